#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

// Deterministic draws built directly on mt19937_64 output. The standard
// <random> distributions are implementation-defined, which would break
// byte-identical corpora and models across standard libraries.

namespace harbench {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable sub-stream seed for (base seed, tag).
inline uint64_t seed_for(uint64_t base, std::string_view tag) {
  uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return splitmix64(base ^ h);
}

inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

inline size_t uniform_index(std::mt19937_64& gen, size_t n) {
  return static_cast<size_t>(gen() % n);
}

/// Box-Muller; consumes two draws per pair, one cached.
class NormalSampler {
 public:
  double operator()(std::mt19937_64& gen, double mean = 0.0, double stddev = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = 1.0 - uniform01(gen);  // (0,1]
    double u2 = uniform01(gen);
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + stddev * r * std::cos(theta);
  }

 private:
  bool has_spare_ = false;
  double spare_ = 0.0;
};

template <typename T>
void shuffle_deterministic(std::vector<T>& v, std::mt19937_64& gen) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = uniform_index(gen, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace harbench
