#include "cpl/rng.hpp"

namespace cpl {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view ns,
                          std::initializer_list<std::uint64_t> indices) {
  // FNV-1a over the namespace, then fold in the indices
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : ns) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = mix64(master ^ mix64(h));
  for (std::uint64_t i : indices) s = mix64(s ^ mix64(i + 0x632be59bd9b4e019ULL));
  return s;
}

double counter_uniform(std::uint64_t key, std::uint64_t n, std::uint64_t k) {
  std::uint64_t bits = mix64(mix64(key ^ (n * 0xd6e8feb86659fd93ULL)) + k * 0xa0761d6478bd642fULL);
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace cpl
