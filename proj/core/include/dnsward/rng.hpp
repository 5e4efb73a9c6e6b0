#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace dnsward {

// Deterministic random source. The engine is std::mt19937_64, whose output
// sequence is fully specified by the standard; every distribution is
// implemented here so that streams are bit-identical across standard
// libraries and platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Unbiased integer in [0, bound); bound must be > 0.
  uint64_t uniform_u64(uint64_t bound);

  // [0, 1) with 53 bits of precision.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Inclusive range.
  int64_t uniform_int(int64_t lo, int64_t hi);

  int64_t poisson(double mean);

  // Index into a cumulative weight vector (strictly increasing, last = total).
  size_t pick_cumulative(const std::vector<double>& cumulative);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (size_t i = v.size() - 1; i > 0; --i) {
      const size_t j = static_cast<size_t>(uniform_u64(i + 1));
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Stable way to derive independent sub-stream seeds (per org, per trial, ...).
uint64_t mix_seed(uint64_t seed, std::string_view salt);
uint64_t mix_seed(uint64_t seed, uint64_t salt);

}  // namespace dnsward
