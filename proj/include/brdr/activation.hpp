#pragma once

// Activation table: value plus first three derivatives. Third derivatives are
// needed when back-propagating through second-order input jets. New
// activations slot in by adding a table entry and a batched value kernel.

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "brdr/common.hpp"

namespace brdr {

struct activation {
  const char* name;
  double (*value)(double);
  double (*d1)(double);
  double (*d2)(double);
  double (*d3)(double);
};

namespace detail {
inline double tanh_v(double v) { return std::tanh(v); }
inline double tanh_d1(double v) {
  const double t = std::tanh(v);
  return 1.0 - t * t;
}
inline double tanh_d2(double v) {
  const double t = std::tanh(v);
  return -2.0 * t * (1.0 - t * t);
}
inline double tanh_d3(double v) {
  const double t = std::tanh(v);
  const double d1 = 1.0 - t * t;
  return -2.0 * d1 * d1 - 2.0 * t * (-2.0 * t * d1);
}
}  // namespace detail

inline const activation& tanh_act() {
  static const activation a{"tanh", detail::tanh_v, detail::tanh_d1,
                            detail::tanh_d2, detail::tanh_d3};
  return a;
}

inline const activation& act_by_name(const std::string& name) {
  if (name == "tanh") return tanh_act();
  throw config_error("unknown activation: " + name);
}

// Batched tanh. The double path uses 1 - 2/(exp(2v)+1), which vectorizes
// through Eigen's packet exp (plain .tanh() on double arrays does not) and
// agrees with std::tanh to ~2e-12 relative, saturating correctly at +-1.
inline void tanh_values(double* dst, const double* src, Eigen::Index n) {
  Eigen::Map<Eigen::ArrayXd> d(dst, n);
  Eigen::Map<const Eigen::ArrayXd> s(src, n);
  d = 1.0 - 2.0 / ((2.0 * s).exp() + 1.0);
}

inline void tanh_values(float* dst, const float* src, Eigen::Index n) {
  Eigen::Map<Eigen::ArrayXf> d(dst, n);
  Eigen::Map<const Eigen::ArrayXf> s(src, n);
  d = s.tanh();
}

// Derivative ladders in terms of the activation value. Exact identities for
// tanh, applied elementwise.
template <typename Real>
inline Real tanh_d1_of(Real phi) {
  return Real(1) - phi * phi;
}
template <typename Real>
inline Real tanh_d2_of(Real phi) {
  return Real(-2) * phi * (Real(1) - phi * phi);
}
template <typename Real>
inline Real tanh_d3_of(Real phi) {
  const Real d1 = Real(1) - phi * phi;
  return Real(-2) * d1 * d1 + Real(4) * phi * phi * d1;
}

}  // namespace brdr
