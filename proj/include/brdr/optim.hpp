#pragma once

// Adam with bias correction, plus the staircase learning-rate schedule.

#include <Eigen/Dense>
#include <cmath>

#include "brdr/common.hpp"

namespace brdr {

struct adam_state {
  Eigen::VectorXd m, v;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long step = 0;

  void init(std::ptrdiff_t n) {
    m = Eigen::VectorXd::Zero(n);
    v = Eigen::VectorXd::Zero(n);
    step = 0;
  }
};

inline void adam_step(adam_state& st, Eigen::VectorXd& theta,
                      const Eigen::VectorXd& grad, double lr) {
  if (theta.size() != grad.size() || theta.size() != st.m.size())
    throw shape_error("adam_step: size mismatch");
  if (!grad.allFinite())
    throw divergence_error("adam_step: non-finite gradient", st.step);
  st.step += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, double(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, double(st.step));
  st.m = st.beta1 * st.m + (1.0 - st.beta1) * grad;
  st.v = st.beta2 * st.v + (1.0 - st.beta2) * grad.cwiseProduct(grad);
  theta.array() -= lr * (st.m.array() / bc1) /
                   ((st.v.array() / bc2).sqrt() + st.eps);
}

// lr(t) = base * gamma^(t / interval), integer division.
struct lr_schedule {
  double base = 1e-3;
  double gamma = 1.0;
  long long interval = 1;
};

inline double lr_at(const lr_schedule& s, long long t) {
  if (s.interval < 1)
    throw precondition_error("lr_at: interval must be at least 1");
  if (t < 0) throw precondition_error("lr_at: negative iteration");
  return s.base * std::pow(s.gamma, double(t / s.interval));
}

}  // namespace brdr
