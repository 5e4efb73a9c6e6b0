#include "dnsward/rng.hpp"

#include <algorithm>
#include <cmath>

namespace dnsward {

uint64_t Rng::uniform_u64(uint64_t bound) {
  // rejection sampling to avoid modulo bias
  const uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
  const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  return lo + static_cast<int64_t>(uniform_u64(span));
}

int64_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  // multiplication method in chunks; Poisson(a+b) = Poisson(a) + Poisson(b)
  int64_t total = 0;
  while (mean > 256.0) {
    total += poisson(256.0);
    mean -= 256.0;
  }
  const double limit = std::exp(-mean);
  int64_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform01();
  } while (p > limit);
  return total + k - 1;
}

size_t Rng::pick_cumulative(const std::vector<double>& cumulative) {
  const double total = cumulative.back();
  const double x = uniform01() * total;
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
  const size_t idx = static_cast<size_t>(it - cumulative.begin());
  return std::min(idx, cumulative.size() - 1);
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t mix_seed(uint64_t seed, std::string_view salt) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const char c : salt) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(seed ^ h);
}

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  return splitmix64(seed ^ splitmix64(salt));
}

}  // namespace dnsward
