#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace linkemu {

std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);

// A named random stream. The generator seed is derived from (root_seed, name), so
// adding a stream never perturbs the draws of any other.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::string name);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();  // [0, 1)
  double normal(double mean, double stddev);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] std::uint64_t root_seed() const { return root_seed_; }

 private:
  std::uint64_t root_seed_;
  std::string name_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace linkemu
