#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "brdr/common.hpp"
#include "brdr/csvio.hpp"
#include "brdr/eigensym.hpp"
#include "brdr/graph.hpp"
#include "brdr/problems.hpp"

// Training diagnostics: the empirical kernel over residual parameter
// gradients, its spectrum, linearized decay predictions, and CSV dumps of
// weight fields and spectra.

namespace brdr {

// Dense kernels are O(n^2) memory and O(n^3) to decompose; anything past this
// belongs on a subsample.
inline constexpr std::ptrdiff_t ntk_point_cap = 512;

// Streaming mean/max over scalar diagnostics (one value per iteration).
class irdr_trace {
 public:
  void add(double v) {
    if (!std::isfinite(v)) throw precondition_error("irdr_trace: non-finite value");
    ++count_;
    mean_ += (v - mean_) / static_cast<double>(count_);
    if (count_ == 1 || v > max_) max_ = v;
  }

  double mean() const {
    if (count_ == 0) throw precondition_error("irdr_trace: no samples");
    return mean_;
  }

  double max() const {
    if (count_ == 0) throw precondition_error("irdr_trace: no samples");
    return max_;
  }

  std::size_t count() const { return count_; }

  void reset() {
    count_ = 0;
    mean_ = 0.0;
    max_ = 0.0;
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double max_ = 0.0;
};

// Rows are dR_i/dtheta for the points of one component batch, evaluated with
// the same forward/residual path the trainer uses.
inline Eigen::MatrixXd residual_jacobian(const problem_spec& pr, comp_kind kind,
                                         const param_store<double>& P,
                                         const Eigen::MatrixXd& sensors,
                                         const Eigen::MatrixXd& coords,
                                         const Eigen::VectorXd* targets = nullptr) {
  if (coords.rows() == 0) throw degenerate_batch_error("residual_jacobian: empty batch");
  if (coords.rows() > ntk_point_cap)
    throw diag_scale_error("residual_jacobian: batch exceeds kernel point cap");
  diff_graph g;
  const deriv_layout lay = residual_layout(pr, kind);
  const col_tables T = col_tables::make(lay);
  net_out o;
  if (P.arch.kind == net_kind::mfcn)
    o = g.use_owned_record(
        detail::make_owned_record<mfcn_eval<double>>(P, P.arch, lay, sensors, coords), T);
  else
    o = g.use_owned_record(
        detail::make_owned_record<mdeeponet_eval<double>>(P, P.arch, lay, sensors, coords),
        T);
  std::vector<diff_value> rs;
  residual_nodes(g, pr, kind, o, coords, rs, targets);
  const std::ptrdiff_t m = P.flat.size();
  Eigen::MatrixXd jac(coords.rows(), m);
  for (std::size_t i = 0; i < rs.size(); ++i)
    jac.row(static_cast<std::ptrdiff_t>(i)) = g.grad(rs[i], m).g.transpose();
  return jac;
}

// K_ij = <dR_i/dtheta, dR_j/dtheta>.  The upper triangle is computed once and
// mirrored, so K is symmetric to the bit.
inline Eigen::MatrixXd ntk_matrix(const Eigen::MatrixXd& jac) {
  const std::ptrdiff_t n = jac.rows();
  if (n == 0) throw degenerate_batch_error("ntk_matrix: empty jacobian");
  if (n > ntk_point_cap) throw diag_scale_error("ntk_matrix: batch exceeds kernel point cap");
  Eigen::MatrixXd k(n, n);
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t j = i; j < n; ++j) {
      k(i, j) = jac.row(i).dot(jac.row(j));
      k(j, i) = k(i, j);
    }
  return k;
}

struct ntk_diagnostic {
  Eigen::MatrixXd kernel;
  sym_eigen eig;
};

inline ntk_diagnostic ntk_analyze(const Eigen::MatrixXd& jac) {
  ntk_diagnostic d;
  d.kernel = ntk_matrix(jac);
  d.eig = jacobi_eigensym(d.kernel);
  return d;
}

// Residuals of the linearized model after t gradient-flow steps of size lr on
// the squared-residual objective: Q diag(exp(-2 lr lambda t)) Q^T r0.
inline Eigen::VectorXd ntk_predict_residuals(const sym_eigen& e, const Eigen::VectorXd& r0,
                                             double lr, double t) {
  if (e.values.size() != r0.size() || e.vectors.rows() != r0.size())
    throw shape_error("ntk_predict_residuals: size mismatch");
  if (!(lr >= 0.0) || !std::isfinite(lr))
    throw precondition_error("ntk_predict_residuals: bad learning rate");
  if (!(t >= 0.0) || !std::isfinite(t))
    throw precondition_error("ntk_predict_residuals: bad time");
  Eigen::VectorXd proj = e.vectors.transpose() * r0;
  for (std::ptrdiff_t i = 0; i < proj.size(); ++i)
    proj[i] *= std::exp(-2.0 * lr * e.values[i] * t);
  return e.vectors * proj;
}

inline void export_ntk_eigenvalues(const std::string& path, const Eigen::VectorXd& values) {
  Eigen::MatrixXd data(values.size(), 2);
  for (std::ptrdiff_t i = 0; i < values.size(); ++i) {
    data(i, 0) = static_cast<double>(i);
    data(i, 1) = values[i];
  }
  write_csv(path, {"index", "eigenvalue"}, data);
}

// One row per point: coordinates, the weight, and its decade.
inline void export_weight_field(const std::string& path,
                                const std::vector<std::string>& coord_names,
                                const Eigen::MatrixXd& coords, const Eigen::VectorXd& w) {
  if (coords.rows() != w.size())
    throw shape_error("export_weight_field: coordinate/weight count mismatch");
  if (static_cast<std::ptrdiff_t>(coord_names.size()) != coords.cols())
    throw shape_error("export_weight_field: coordinate name count mismatch");
  for (std::ptrdiff_t i = 0; i < w.size(); ++i)
    if (!(w[i] > 0.0) || !std::isfinite(w[i]))
      throw precondition_error("export_weight_field: weights must be positive and finite");
  std::vector<std::string> header = coord_names;
  header.push_back("w");
  header.push_back("log10_w");
  Eigen::MatrixXd data(coords.rows(), coords.cols() + 2);
  data.leftCols(coords.cols()) = coords;
  data.col(coords.cols()) = w;
  for (std::ptrdiff_t i = 0; i < w.size(); ++i)
    data(i, coords.cols() + 1) = std::log10(w[i]);
  write_csv(path, header, data);
}

}  // namespace brdr
