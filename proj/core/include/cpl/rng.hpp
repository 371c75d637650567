#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace cpl {

// Seeds are derived by hashing (master, namespace, indices) so that every
// consumer of randomness gets a reproducible stream that does not depend on
// scheduling order or on how many draws other consumers made.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::string_view ns,
                          std::initializer_list<std::uint64_t> indices = {});

// Counter-based uniform in the open interval (0, 1): a pure function of (key, n, k).
double counter_uniform(std::uint64_t key, std::uint64_t n, std::uint64_t k);

// Sequential engine on top of the same mixer; satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;
  explicit Rng(std::uint64_t seed) : key_(mix64(seed ^ 0x9e3779b97f4a7c15ULL)) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * (++counter_)); }
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cpl
