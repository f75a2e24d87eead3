#pragma once

// Point-wise adaptive loss weighting.
//
// The core scheme tracks, per training point, an exponential moving average
// of the fourth power of the residual. The ratio of the instantaneous squared
// residual to the bias-corrected root of that average measures how fast the
// point's residual is decaying relative to its own history; weights relax
// toward the batch-normalized ratio so slowly-decaying points gain weight.
// Points sampled intermittently are handled by raising the decay factors to
// the elapsed-iteration power, which makes mini-batch updates agree exactly
// with dense updates.
//
// The companion scale factor keeps the loss magnitude adapted to the inverse
// squared gradient norm, with its own EMA tied to the current learning rate.
//
// Two published baselines are provided for comparison, plus fixed weights.

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "brdr/common.hpp"
#include "brdr/graph.hpp"

namespace brdr {

struct weight_state {
  Eigen::VectorXd w;       // per-point weights
  Eigen::VectorXd ema_r4;  // EMA of residual^4
  std::vector<long long> t_last;
  double beta_c = 0.999;   // EMA decay for the ratio statistic
  double beta_w = 0.999;   // relaxation factor for the weights
  double eps = 1e-14;
  long long t = 0;  // last iteration seen

  void init(std::ptrdiff_t n) {
    w = Eigen::VectorXd::Ones(n);
    ema_r4 = Eigen::VectorXd::Zero(n);
    t_last.assign(std::size_t(n), 0);
    t = 0;
  }
  std::ptrdiff_t size() const { return w.size(); }
};

struct scale_state {
  double s = 1.0;
};

struct irdr_result {
  Eigen::VectorXd c;           // ratio per batch member
  std::vector<long long> dt;   // elapsed iterations per batch member
};

// Advances the EMA for the visited points and returns their decay ratios.
// t is the global iteration count, starting at 1, strictly increasing across
// calls. Bias correction uses the global t: a point first visited late still
// gets the correction of a fresh average.
inline irdr_result compute_irdr(weight_state& st,
                                const Eigen::VectorXd& residuals,
                                std::span<const int> idx, long long t) {
  if (t < 1) throw precondition_error("compute_irdr: t starts at 1");
  if (st.t > 0 && t <= st.t)
    throw precondition_error("compute_irdr: t must increase across calls");
  if (std::ptrdiff_t(idx.size()) != residuals.size())
    throw shape_error("compute_irdr: index/residual length mismatch");
  if (idx.empty()) throw degenerate_batch_error("compute_irdr: empty batch");
  irdr_result out;
  out.c.resize(residuals.size());
  out.dt.resize(idx.size());
  const double corr = 1.0 - std::pow(st.beta_c, double(t));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const int i = idx[j];
    if (i < 0 || i >= st.size())
      throw shape_error("compute_irdr: point index out of range");
    const double r = residuals[std::ptrdiff_t(j)];
    if (!std::isfinite(r))
      throw divergence_error("non-finite residual", t);
    const long long dt = t - st.t_last[std::size_t(i)];
    const double beta_eff = std::pow(st.beta_c, double(dt));
    const double r2 = r * r;
    st.ema_r4[i] = beta_eff * st.ema_r4[i] + (1.0 - beta_eff) * r2 * r2;
    out.c[std::ptrdiff_t(j)] =
        r2 / (std::sqrt(st.ema_r4[i] / corr) + st.eps);
    out.dt[j] = dt;
    st.t_last[std::size_t(i)] = t;
  }
  st.t = t;
  return out;
}

// Relaxes the visited weights toward their batch-normalized ratios. The
// normalizer is the mean ratio pooled over the whole batch, across all loss
// components, which keeps the overall weight mass near one.
inline void update_weights_brdr(weight_state& st, const irdr_result& r,
                                std::span<const int> idx) {
  if (std::ptrdiff_t(idx.size()) != r.c.size() || idx.size() != r.dt.size())
    throw shape_error("update_weights_brdr: result/index length mismatch");
  const double cbar =
      pairwise_reduce<double>(0, idx.size(),
                              [&](std::size_t j) { return r.c[std::ptrdiff_t(j)]; }) /
      double(idx.size());
  if (!(cbar > 0.0))
    throw degenerate_batch_error("update_weights_brdr: zero mean ratio");
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const int i = idx[j];
    const double bw = std::pow(st.beta_w, double(r.dt[j]));
    st.w[i] = bw * st.w[i] + (1.0 - bw) * (r.c[std::ptrdiff_t(j)] / cbar);
  }
}

// Gradient-ascent weights: w += lr * R^2, monotone non-decreasing.
inline void update_weights_sa(weight_state& st,
                              const Eigen::VectorXd& residuals,
                              std::span<const int> idx, double lr) {
  if (std::ptrdiff_t(idx.size()) != residuals.size())
    throw shape_error("update_weights_sa: index/residual length mismatch");
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double r = residuals[std::ptrdiff_t(j)];
    if (!std::isfinite(r)) throw divergence_error("non-finite residual", st.t);
    st.w[idx[j]] += lr * r * r;
  }
}

// Decayed residual-proportional weights, normalized by the batch maximum:
// w <- decay*w + lr*|R|/max|R| + offset. Bounded by lr/(1-decay) + offset
// terms plus the decayed start.
inline void update_weights_rba(weight_state& st,
                               const Eigen::VectorXd& residuals,
                               std::span<const int> idx, double decay,
                               double lr, double offset) {
  if (std::ptrdiff_t(idx.size()) != residuals.size())
    throw shape_error("update_weights_rba: index/residual length mismatch");
  if (idx.empty())
    throw degenerate_batch_error("update_weights_rba: empty batch");
  double m = 0.0;
  for (std::ptrdiff_t j = 0; j < residuals.size(); ++j) {
    if (!std::isfinite(residuals[j]))
      throw divergence_error("non-finite residual", st.t);
    m = std::max(m, std::abs(residuals[j]));
  }
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double ratio =
        m > 0.0 ? std::abs(residuals[std::ptrdiff_t(j)]) / m : 0.0;
    st.w[idx[j]] = decay * st.w[idx[j]] + lr * ratio + offset;
  }
}

// s <- (1-eta)*s + s*2L/|grad|^2. With loss near its quadratic minimum this
// relaxes s toward the value that keeps parameter steps well-scaled; eta is
// the current learning rate. Returns s_new/s_old so the caller can rescale an
// already-computed gradient.
inline double update_scale(scale_state& st, double loss, double grad_sq,
                           double eta, long long iteration = 0) {
  if (!(eta > 0.0) || eta >= 1.0)
    throw precondition_error("update_scale: eta must lie in (0,1)");
  if (!std::isfinite(loss) || !std::isfinite(grad_sq))
    throw divergence_error("non-finite loss or gradient", iteration);
  if (loss < 0.0) throw precondition_error("update_scale: negative loss");
  if (grad_sq <= 0.0)
    throw stationary_point_error("update_scale: zero gradient norm");
  const double s_old = st.s;
  st.s = (1.0 - eta) * s_old + s_old * 2.0 * loss / grad_sq;
  return st.s / s_old;
}

// One weighted loss component: lambda / n_full * sum_i w_i r_i^2.
struct loss_component {
  double lambda = 1.0;
  std::ptrdiff_t n_full = 0;  // divisor: full component size, not batch size
  std::span<const double> w;
  std::span<const diff_value> r;
};

// L = s * sum_components lambda_c/N_c * sum_i w_i r_i^2, as graph nodes.
inline diff_value weighted_loss(diff_graph& g,
                                std::span<const loss_component> comps,
                                double s) {
  if (comps.empty()) throw degenerate_batch_error("weighted_loss: no components");
  diff_value total;
  std::vector<diff_value> terms;
  for (const auto& c : comps) {
    if (c.n_full <= 0)
      throw precondition_error("weighted_loss: component size must be positive");
    if (c.w.size() != c.r.size())
      throw shape_error("weighted_loss: weight/residual length mismatch");
    if (c.r.empty())
      throw degenerate_batch_error("weighted_loss: empty component batch");
    terms.clear();
    terms.reserve(c.r.size());
    for (std::size_t i = 0; i < c.r.size(); ++i)
      terms.push_back(g.smul(g.square(c.r[i]), c.w[i]));
    diff_value part = g.smul(g.sum(terms), c.lambda / double(c.n_full));
    total = total.valid() ? g.add(total, part) : part;
  }
  return g.smul(total, s);
}

}  // namespace brdr
