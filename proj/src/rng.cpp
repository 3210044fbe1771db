#include "linkemu/rng.hpp"

namespace linkemu {

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t root_seed, std::string name)
    : root_seed_(root_seed),
      name_(std::move(name)),
      engine_(splitmix64(splitmix64(root_seed) ^ fnv1a64(name_))) {}

double RngStream::uniform() { return std::generate_canonical<double, 53>(engine_); }

double RngStream::normal(double mean, double stddev) {
  using param = std::normal_distribution<double>::param_type;
  return normal_(engine_, param{mean, stddev});
}

}  // namespace linkemu
