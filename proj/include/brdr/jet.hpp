#pragma once

// Second-order input jets and their column layouts.
//
// A batch of jets is stored as a width x (N*C) matrix: each evaluation point
// owns a contiguous block of C columns. Column 0 holds values, the next gdim
// columns hold directional first derivatives along the input axes, and the
// remaining columns hold second-derivative combinations described by the
// layout. Besides single entries (diagonal or off-diagonal), a column may
// carry a fixed weighted sum of diagonal entries, which lets an operator like
// u_tt - c^2 u_xx ride in one column end to end.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "brdr/common.hpp"

namespace brdr {

enum class hess_mode { none, diag, full, weighted };

struct hess_col {
  // Sum of coef * d2/dx_k dx_l terms, k <= l.
  struct term {
    int k, l;
    double coef;
  };
  std::vector<term> terms;

  static hess_col entry(int i, int j) {
    if (i > j) std::swap(i, j);
    return hess_col{{{i, j, 1.0}}};
  }
  static hess_col weighted_diag(const std::vector<double>& w) {
    hess_col c;
    for (int k = 0; k < int(w.size()); ++k)
      if (w[k] != 0.0) c.terms.push_back({k, k, w[k]});
    return c;
  }
};

struct deriv_layout {
  int gdim = 0;
  std::vector<hess_col> hess;

  int cols() const { return 1 + gdim + int(hess.size()); }
  int value_col() const { return 0; }
  int grad_col(int k) const {
    if (k < 0 || k >= gdim) throw shape_error("grad axis out of range");
    return 1 + k;
  }
  int hess_col_index(int c) const {
    if (c < 0 || c >= int(hess.size()))
      throw shape_error("hessian column out of range");
    return 1 + gdim + c;
  }

  static deriv_layout value_only(int gdim = 0) { return {gdim, {}}; }
  static deriv_layout grad_only(int gdim) { return {gdim, {}}; }
  static deriv_layout diag(int gdim) {
    deriv_layout l{gdim, {}};
    for (int k = 0; k < gdim; ++k) l.hess.push_back(hess_col::entry(k, k));
    return l;
  }
  static deriv_layout full(int gdim) {
    deriv_layout l{gdim, {}};
    for (int i = 0; i < gdim; ++i)
      for (int j = i; j < gdim; ++j) l.hess.push_back(hess_col::entry(i, j));
    return l;
  }
  // Gradient in all axes plus one weighted-diagonal column.
  static deriv_layout weighted(const std::vector<double>& w) {
    deriv_layout l{int(w.size()), {}};
    l.hess.push_back(hess_col::weighted_diag(w));
    return l;
  }
  // Position of the (i,j) entry in full() ordering.
  static int full_index(int gdim, int i, int j) {
    if (i > j) std::swap(i, j);
    if (j >= gdim) throw shape_error("hessian index out of range");
    return i * gdim - i * (i - 1) / 2 + (j - i);
  }
};

// Single-point second-order jet in plain numbers.
struct jet2 {
  double value = 0.0;
  Eigen::VectorXd grad_in;
  hess_mode mode = hess_mode::none;
  Eigen::VectorXd hess_diag;   // diag mode
  Eigen::MatrixXd hess;        // full mode, symmetric
  double hess_weighted = 0.0;  // weighted mode

  int input_dim() const { return int(grad_in.size()); }

  // The full-mode invariant; diagonal storage is symmetric by construction.
  void check_symmetric(double tol = 1e-10) const {
    if (mode != hess_mode::full) return;
    for (int i = 0; i < hess.rows(); ++i)
      for (int j = i + 1; j < hess.cols(); ++j)
        if (std::abs(hess(i, j) - hess(j, i)) >
            tol * (1.0 + std::abs(hess(i, j))))
          throw shape_error("asymmetric hessian in jet2");
  }
};

}  // namespace brdr
