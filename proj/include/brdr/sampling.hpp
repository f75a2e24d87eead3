#pragma once

// Collocation point generators. Everything is driven by the deterministic rng
// so runs reproduce bit-for-bit.

#include <Eigen/Dense>
#include <vector>

#include "brdr/common.hpp"
#include "brdr/rng.hpp"

namespace brdr {

inline Eigen::VectorXd linspace(double a, double b, int n) {
  if (n < 2) throw precondition_error("linspace: need at least 2 points");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

// n equispaced points strictly inside (a,b).
inline Eigen::VectorXd interior_linspace(double a, double b, int n) {
  if (n < 1) throw precondition_error("interior_linspace: need at least 1 point");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = a + (b - a) * double(i + 1) / double(n + 1);
  return v;
}

// Cell-centered points: a + (b-a)*(i+1/2)/n.
inline Eigen::VectorXd midpoints(double a, double b, int n) {
  if (n < 1) throw precondition_error("midpoints: need at least 1 point");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = a + (b - a) * (double(i) + 0.5) / double(n);
  return v;
}

// Row p = (xs[p / ny], ys[p % ny]): x varies slowest.
inline Eigen::MatrixXd tensor_grid(const Eigen::VectorXd& xs,
                                   const Eigen::VectorXd& ys) {
  Eigen::MatrixXd g(xs.size() * ys.size(), 2);
  std::ptrdiff_t p = 0;
  for (std::ptrdiff_t i = 0; i < xs.size(); ++i)
    for (std::ptrdiff_t j = 0; j < ys.size(); ++j, ++p) {
      g(p, 0) = xs[i];
      g(p, 1) = ys[j];
    }
  return g;
}

inline Eigen::MatrixXd iid_uniform(rng& gen, int n, const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi) {
  Eigen::MatrixXd pts(n, lo.size());
  for (int i = 0; i < n; ++i)
    for (std::ptrdiff_t d = 0; d < lo.size(); ++d)
      pts(i, d) = gen.uniform(lo[d], hi[d]);
  return pts;
}

// Latin hypercube: each dimension is an independent random permutation of the
// n strata with an independent jitter inside each stratum, so every dimension
// has exactly one point per stratum.
inline Eigen::MatrixXd latin_hypercube(rng& gen, int n,
                                       const Eigen::VectorXd& lo,
                                       const Eigen::VectorXd& hi) {
  if (n < 1) throw precondition_error("latin_hypercube: need at least 1 point");
  Eigen::MatrixXd pts(n, lo.size());
  std::vector<std::size_t> perm(static_cast<std::size_t>(n));
  for (std::ptrdiff_t d = 0; d < lo.size(); ++d) {
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    gen.shuffle(perm);
    for (int i = 0; i < n; ++i) {
      const double u = (double(perm[std::size_t(i)]) + gen.uniform()) / double(n);
      pts(i, d) = lo[d] + (hi[d] - lo[d]) * u;
    }
  }
  return pts;
}

}  // namespace brdr
