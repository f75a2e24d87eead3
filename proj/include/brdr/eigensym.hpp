#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "brdr/common.hpp"

// Dense symmetric eigendecomposition by cyclic Jacobi rotations. Everything
// that needs eigenvalues here (quadrature rules, the kernel diagnostic) is
// capped at a few hundred rows, where Jacobi is fast, simple to make
// deterministic, and accurate to machine precision for eigenvectors too.

namespace brdr {

struct sym_eigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column i pairs with values[i]
};

inline sym_eigen jacobi_eigensym(Eigen::MatrixXd a, int max_sweeps = 60) {
  if (a.rows() != a.cols()) throw shape_error("jacobi_eigensym: matrix not square");
  const int n = int(a.rows());
  sym_eigen e;
  e.vectors = Eigen::MatrixXd::Identity(n, n);
  if (n == 0) {
    e.values.resize(0);
    return e;
  }
  const double scale = a.cwiseAbs().maxCoeff();
  const double stop = scale > 0 ? scale * 1e-15 : 0.0;
  Eigen::VectorXd cp(n), cq(n);
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off <= stop) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= stop * 1e-2) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        cp = a.col(p);
        cq = a.col(q);
        a.col(p) = c * cp - s * cq;
        a.col(q) = s * cp + c * cq;
        cp = a.row(p);
        cq = a.row(q);
        a.row(p) = (c * cp - s * cq).transpose();
        a.row(q) = (s * cp + c * cq).transpose();
        cp = e.vectors.col(p);
        cq = e.vectors.col(q);
        e.vectors.col(p) = c * cp - s * cq;
        e.vectors.col(q) = s * cp + c * cq;
      }
    }
  }
  if (sweep == max_sweeps)
    throw precondition_error("jacobi_eigensym: no convergence");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i) < a(j, j); });
  e.values.resize(n);
  Eigen::MatrixXd v(n, n);
  for (int i = 0; i < n; ++i) {
    e.values[i] = a(order[std::size_t(i)], order[std::size_t(i)]);
    v.col(i) = e.vectors.col(order[std::size_t(i)]);
  }
  e.vectors = std::move(v);
  return e;
}

}  // namespace brdr
