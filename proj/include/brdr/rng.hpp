#pragma once

// Deterministic random source. All draws are defined directly on top of the
// mt19937_64 bit stream so sequences are identical across platforms and
// library versions (std::uniform_real_distribution makes no such promise).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "brdr/common.hpp"

namespace brdr {

class rng {
 public:
  explicit rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Standard normal via Box-Muller; the spare is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform index in [0,n) by rejection, unbiased.
  std::size_t index(std::size_t n) {
    if (n == 0) throw precondition_error("rng::index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return std::size_t(x % n);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[index(i)]);
  }

  // Moves a uniformly chosen k-subset of pool to its front (partial
  // Fisher-Yates). The pool keeps its contents, only the order changes, so a
  // persistent pool can be resampled every iteration at O(k) cost.
  void draw_front(std::vector<std::size_t>& pool, std::size_t k) {
    if (k > pool.size())
      throw precondition_error("rng::draw_front: k exceeds pool size");
    for (std::size_t i = 0; i < k; ++i)
      std::swap(pool[i], pool[i + index(pool.size() - i)]);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace brdr
