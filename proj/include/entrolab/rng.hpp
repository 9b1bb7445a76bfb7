#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace entrolab {

// Deterministic splitmix64 stream. Hand-rolled so results do not depend on
// the standard library's distribution implementations; verification runs
// must be byte-reproducible for a given (seed, draw index).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent stream for draw `index` of a suite seeded with `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    Rng mix(seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
    mix.next();
    mix.next();
    return mix;
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // exp(U), U uniform on [-3, 3]: several decades around 1.
  double positive_sample() { return std::exp(uniform(-3.0, 3.0)); }

  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  std::vector<double> positive_vector(std::size_t n) {
    std::vector<double> f(n);
    for (auto& x : f) x = positive_sample();
    return f;
  }

 private:
  std::uint64_t state_;
};

}  // namespace entrolab
