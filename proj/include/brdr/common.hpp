#pragma once

// Shared basics: error types, deterministic reductions, numeric formatting.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>

static_assert(std::endian::native == std::endian::little,
              "little-endian host required for checkpoint/binary formats");

namespace brdr {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct shape_error : error {
  using error::error;
};

// Requested derivative order above what the engine provides.
struct order_error : error {
  using error::error;
};

struct divergence_error : error {
  long long iteration;
  divergence_error(const std::string& msg, long long iter)
      : error(msg + " (iteration " + std::to_string(iter) + ")"),
        iteration(iter) {}
};

struct degenerate_batch_error : error {
  using error::error;
};

struct stationary_point_error : error {
  using error::error;
};

struct domain_error : error {
  using error::error;
};

// Diagnostic asked to run beyond its configured size cap.
struct diag_scale_error : error {
  using error::error;
};

struct oracle_error : error {
  using error::error;
};

struct config_error : error {
  using error::error;
};

struct io_error : error {
  using error::error;
};

struct precondition_error : error {
  using error::error;
};

// Pairwise tree reduction. Every sum over training points goes through this
// so results do not depend on how work is partitioned.
template <typename T, typename F>
T pairwise_reduce(std::size_t lo, std::size_t hi, F&& term) {
  const std::size_t n = hi - lo;
  if (n <= 16) {
    T acc = T(0);
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    return acc;
  }
  const std::size_t mid = lo + n / 2;
  return pairwise_reduce<T>(lo, mid, term) + pairwise_reduce<T>(mid, hi, term);
}

inline double pairwise_sum(std::span<const double> v) {
  return pairwise_reduce<double>(0, v.size(), [&](std::size_t i) { return v[i]; });
}

inline double pairwise_sum_sq(std::span<const double> v) {
  return pairwise_reduce<double>(0, v.size(),
                                 [&](std::size_t i) { return v[i] * v[i]; });
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// 17 significant digits: round-trips f64 exactly in decimal.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double rel_err(double got, double want) {
  const double den = std::abs(want);
  return std::abs(got - want) / (den > 1e-300 ? den : 1e-300);
}

}  // namespace brdr
