#include <iostream>

#include "linkemu/cli.hpp"

int main(int argc, char** argv) { return linkemu::cli::run_cli(argc, argv, std::cout, std::cerr); }
