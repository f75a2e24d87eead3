#pragma once

// Scalar computation graph for residual and loss assembly.
//
// Network evaluations enter as fused records: one record contributes N*C
// output nodes (the jet columns of a whole batch) and, on the reverse sweep,
// converts the adjoints of those nodes into parameter gradients with a single
// batched backward pass. Everything downstream of the network (residuals,
// squares, weighted sums) is a plain eager scalar tape. Sums are built as
// pairwise trees so results never depend on accumulation order.

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "brdr/common.hpp"
#include "brdr/neteval.hpp"

namespace brdr {

struct param_gradient {
  Eigen::VectorXd g;
  double sq = 0.0;  // cached squared norm, pairwise-summed

  void recompute_sq() {
    sq = pairwise_sum_sq(std::span<const double>(g.data(), std::size_t(g.size())));
  }
};

class diff_graph;

struct diff_value {
  diff_graph* g = nullptr;
  int id = -1;
  bool valid() const { return g != nullptr && id >= 0; }
  double value() const;
};

class net_record_base {
 public:
  virtual ~net_record_base() = default;
  virtual int cols() const = 0;
  virtual void out_values(double* dst) const = 0;
  // Converts the adjoint of the output columns into a parameter gradient,
  // accumulating into grad.
  virtual void backward_add(const double* adj, Eigen::VectorXd& grad) = 0;
};

template <typename Real, typename Eval>
class net_record : public net_record_base {
 public:
  net_record(Eval& ev, const param_store<Real>& P) : ev_(&ev), P_(&P) {}

  int cols() const override { return ev_->npoints() * ev_->tables().C; }

  void out_values(double* dst) const override {
    const auto& o = ev_->out();
    const int n = cols();
    for (int i = 0; i < n; ++i) dst[i] = double(o(0, i));
  }

  void backward_add(const double* adj, Eigen::VectorXd& grad) override {
    const int n = cols();
    auto& buf = ev_->adj_buffer();
    for (int i = 0; i < n; ++i) buf(0, i) = Real(adj[i]);
    if constexpr (std::is_same_v<Real, double>) {
      ev_->backward(*P_, buf, grad);
    } else {
      if (gbuf_.size() != grad.size()) gbuf_.setZero(grad.size());
      gbuf_.setZero();
      ev_->backward(*P_, buf, gbuf_);
      grad += gbuf_.template cast<double>();
    }
  }

 private:
  Eval* ev_;
  const param_store<Real>* P_;
  vec_t<Real> gbuf_;
};

// Handle for addressing the jet columns of a registered record.
struct net_out {
  diff_graph* g = nullptr;
  int base = 0;
  const col_tables* T = nullptr;
  inline diff_value val(int p) const;
  inline diff_value grad(int p, int k) const;
  inline diff_value hess(int p, int c) const;
};

class diff_graph {
  enum class op : unsigned char {
    constant,
    param,
    output,
    add,
    sub,
    mul,
    smul,
    square,
    neg
  };
  struct node {
    op o;
    int a = -1, b = -1;
    double k = 0.0;
    double val = 0.0;
    double adj = 0.0;
  };

 public:
  diff_graph() { nodes_.reserve(1 << 14); }

  void reset() {
    nodes_.clear();
    recs_.clear();
    owned_.clear();
  }
  std::size_t size() const { return nodes_.size(); }
  double value(diff_value v) const { return nodes_[v.id].val; }

  diff_value constant(double v) { return push({op::constant, -1, -1, 0, v, 0}); }
  // References one flat parameter entry directly.
  diff_value param(int flat_index, double value) {
    return push({op::param, flat_index, -1, 0, value, 0});
  }
  diff_value add(diff_value x, diff_value y) {
    return push({op::add, x.id, y.id, 0, nodes_[x.id].val + nodes_[y.id].val, 0});
  }
  diff_value sub(diff_value x, diff_value y) {
    return push({op::sub, x.id, y.id, 0, nodes_[x.id].val - nodes_[y.id].val, 0});
  }
  diff_value mul(diff_value x, diff_value y) {
    return push({op::mul, x.id, y.id, 0, nodes_[x.id].val * nodes_[y.id].val, 0});
  }
  diff_value smul(diff_value x, double c) {
    return push({op::smul, x.id, -1, c, c * nodes_[x.id].val, 0});
  }
  diff_value square(diff_value x) {
    const double v = nodes_[x.id].val;
    return push({op::square, x.id, -1, 0, v * v, 0});
  }
  diff_value neg(diff_value x) {
    return push({op::neg, x.id, -1, 0, -nodes_[x.id].val, 0});
  }

  // Balanced pairwise sum; the tree shape depends only on the length.
  diff_value sum(std::span<const diff_value> xs) {
    if (xs.empty()) return constant(0.0);
    return sum_range(xs, 0, xs.size());
  }

  net_out use_record(net_record_base& rec, const col_tables& T) {
    const int n = rec.cols();
    const int base = int(nodes_.size());
    vals_.resize(n);
    rec.out_values(vals_.data());
    for (int i = 0; i < n; ++i)
      push({op::output, -1, -1, 0, vals_[i], 0});
    recs_.push_back({&rec, base, n});
    return {this, base, &T};
  }

  net_out use_owned_record(std::unique_ptr<net_record_base> rec,
                           const col_tables& T) {
    net_out o = use_record(*rec, T);
    owned_.push_back(std::move(rec));
    return o;
  }

  // Reverse sweep from root. Scalar chain rules first, then each record
  // converts its gathered output adjoints in one batched pass.
  param_gradient grad(diff_value root, std::ptrdiff_t nparams) {
    if (!root.valid() || root.g != this)
      throw precondition_error("grad: root is not a node of this graph");
    for (auto& n : nodes_) n.adj = 0.0;
    nodes_[root.id].adj = 1.0;
    param_gradient out;
    out.g = Eigen::VectorXd::Zero(nparams);
    for (int i = int(nodes_.size()) - 1; i >= 0; --i) {
      const node& n = nodes_[i];
      if (n.adj == 0.0) continue;
      switch (n.o) {
        case op::add:
          nodes_[n.a].adj += n.adj;
          nodes_[n.b].adj += n.adj;
          break;
        case op::sub:
          nodes_[n.a].adj += n.adj;
          nodes_[n.b].adj -= n.adj;
          break;
        case op::mul:
          nodes_[n.a].adj += n.adj * nodes_[n.b].val;
          nodes_[n.b].adj += n.adj * nodes_[n.a].val;
          break;
        case op::smul:
          nodes_[n.a].adj += n.adj * n.k;
          break;
        case op::square:
          nodes_[n.a].adj += n.adj * 2.0 * nodes_[n.a].val;
          break;
        case op::neg:
          nodes_[n.a].adj -= n.adj;
          break;
        case op::param:
          if (n.a < 0 || n.a >= nparams)
            throw shape_error("param node index out of range");
          out.g[n.a] += n.adj;
          break;
        case op::constant:
        case op::output:
          break;
      }
    }
    for (const auto& r : recs_) {
      vals_.resize(r.n);
      for (int i = 0; i < r.n; ++i) vals_[i] = nodes_[r.base + i].adj;
      r.rec->backward_add(vals_.data(), out.g);
    }
    out.recompute_sq();
    return out;
  }

 private:
  diff_value push(node n) {
    nodes_.push_back(n);
    return {this, int(nodes_.size()) - 1};
  }
  diff_value sum_range(std::span<const diff_value> xs, std::size_t lo,
                       std::size_t hi) {
    if (hi - lo == 1) return xs[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return add(sum_range(xs, lo, mid), sum_range(xs, mid, hi));
  }

  struct rec_use {
    net_record_base* rec;
    int base, n;
  };
  std::vector<node> nodes_;
  std::vector<rec_use> recs_;
  std::vector<std::unique_ptr<net_record_base>> owned_;
  std::vector<double> vals_;
};

inline double diff_value::value() const { return g->value(*this); }
inline diff_value net_out::val(int p) const { return {g, base + p * T->C}; }
inline diff_value net_out::grad(int p, int k) const {
  return {g, base + p * T->C + T->gslot(k)};
}
inline diff_value net_out::hess(int p, int c) const {
  return {g, base + p * T->C + T->hslot(c)};
}

// ---------------------------------------------------------------------------
// Convenience single-point evaluation: second-order jets that stay
// differentiable with respect to the parameters through the returned nodes.

struct jet2_nodes {
  jet2 numeric;
  diff_value value;
  std::vector<diff_value> grad;
  std::vector<diff_value> hess;  // full() ordering, i <= j
};

namespace detail {

template <typename Eval>
std::unique_ptr<net_record_base> make_owned_record(
    const param_store<double>& P, const arch_descriptor& arch,
    const deriv_layout& lay, const Eigen::MatrixXd& sensors,
    const Eigen::MatrixXd& coords) {
  struct holder : net_record_base {
    Eval ev;
    param_store<double> P;
    net_record<double, Eval> rec;
    holder(const param_store<double>& p) : P(p), rec(ev, P) {}
    int cols() const override { return rec.cols(); }
    void out_values(double* dst) const override { rec.out_values(dst); }
    void backward_add(const double* adj, Eigen::VectorXd& g) override {
      rec.backward_add(adj, g);
    }
  };
  auto h = std::make_unique<holder>(P);
  h->ev.setup(arch, lay, int(coords.rows()));
  if constexpr (std::is_same_v<Eval, mdeeponet_eval<double>>)
    h->ev.set_points(sensors, coords);
  else
    h->ev.set_points(coords);
  h->ev.forward(h->P);
  return h;
}

}  // namespace detail

// For mdeeponet the input vector is [sensor values; coordinates].
inline jet2_nodes eval_with_input_derivatives(diff_graph& g,
                                              const param_store<double>& P,
                                              const Eigen::VectorXd& x,
                                              int order) {
  const arch_descriptor& a = P.arch;
  if (order < 0 || order > 2)
    throw order_error("eval_with_input_derivatives: order must be 0, 1, or 2");
  const int d = a.input_dim;
  deriv_layout lay = order == 0   ? deriv_layout::value_only()
                     : order == 1 ? deriv_layout::grad_only(d)
                                  : deriv_layout::full(d);
  const col_tables T = col_tables::make(lay);

  Eigen::MatrixXd coords(1, d), sensors;
  net_out o;
  if (a.kind == net_kind::mfcn) {
    if (x.size() != d)
      throw shape_error("eval_with_input_derivatives: bad input length");
    coords.row(0) = x.transpose();
    o = g.use_owned_record(
        detail::make_owned_record<mfcn_eval<double>>(P, a, lay, sensors, coords),
        T);
  } else {
    if (x.size() != a.branch_dim + d)
      throw shape_error("eval_with_input_derivatives: bad input length");
    sensors.resize(1, a.branch_dim);
    sensors.row(0) = x.head(a.branch_dim).transpose();
    coords.row(0) = x.tail(d).transpose();
    o = g.use_owned_record(detail::make_owned_record<mdeeponet_eval<double>>(
                               P, a, lay, sensors, coords),
                           T);
  }
  // The record was registered after forward, so node values are current; the
  // tables object must outlive the handle, so rebuild accessors locally.
  jet2_nodes r;
  r.value = {&g, o.base};
  r.numeric.value = r.value.value();
  if (order >= 1) {
    r.numeric.grad_in.resize(d);
    for (int k = 0; k < d; ++k) {
      r.grad.push_back({&g, o.base + T.gslot(k)});
      r.numeric.grad_in[k] = r.grad.back().value();
    }
  }
  if (order == 2) {
    r.numeric.mode = hess_mode::full;
    r.numeric.hess.resize(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        const int c = deriv_layout::full_index(d, i, j);
        r.hess.push_back({&g, o.base + T.hslot(c)});
        r.numeric.hess(i, j) = r.hess.back().value();
        r.numeric.hess(j, i) = r.numeric.hess(i, j);
      }
    r.numeric.check_symmetric();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Finite-difference verification.

struct fd_report {
  double max_rel_err = 0.0;
  std::ptrdiff_t worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::ptrdiff_t checked = 0;
  bool pass(double tol) const { return max_rel_err < tol; }
};

namespace detail {
// Relative error with a floor at a small fraction of the gradient scale, so
// entries that are zero to roundoff cannot dominate the report.
inline void fd_update(fd_report& rep, std::ptrdiff_t idx, double analytic,
                      double numeric, double scale) {
  const double den = std::max({std::abs(analytic), std::abs(numeric),
                               1e-2 * scale, 1e-12});
  const double rel = std::abs(analytic - numeric) / den;
  if (rel > rep.max_rel_err) {
    rep.max_rel_err = rel;
    rep.worst_index = idx;
    rep.worst_analytic = analytic;
    rep.worst_numeric = numeric;
  }
  ++rep.checked;
}
}  // namespace detail

// Checks every entry of the parameter gradient against fourth-order central
// differences of the loss built by `build`. The builder must be a pure
// function of the parameters.
inline fd_report finite_difference_check(
    const param_store<double>& P,
    const std::function<diff_value(diff_graph&, const param_store<double>&)>&
        build,
    double h) {
  if (h <= 0.0)
    throw precondition_error("finite_difference_check: h must be positive");
  diff_graph g;
  const diff_value loss = build(g, P);
  const param_gradient pg = g.grad(loss, P.flat.size());
  const double scale = pg.g.size() ? pg.g.cwiseAbs().maxCoeff() : 0.0;

  param_store<double> Q = P;
  auto eval_at = [&](std::ptrdiff_t i, double delta) {
    const double keep = Q.flat[i];
    Q.flat[i] = keep + delta;
    diff_graph gq;
    const double v = build(gq, Q).value();
    Q.flat[i] = keep;
    return v;
  };
  fd_report rep;
  for (std::ptrdiff_t i = 0; i < P.flat.size(); ++i) {
    const double f1 = eval_at(i, h), f_1 = eval_at(i, -h);
    const double f2 = eval_at(i, 2 * h), f_2 = eval_at(i, -2 * h);
    const double num = (8.0 * (f1 - f_1) - (f2 - f_2)) / (12.0 * h);
    detail::fd_update(rep, i, pg.g[i], num, scale);
  }
  return rep;
}

// Same idea for input derivatives: jets against difference stencils of the
// plain forward value. Index encoding: k for gradient axes, then
// input_dim + full_index(i,j) for second derivatives.
inline fd_report check_input_derivatives(const param_store<double>& P,
                                         const Eigen::VectorXd& x, double h) {
  if (h <= 0.0)
    throw precondition_error("check_input_derivatives: h must be positive");
  const int d = P.arch.input_dim;
  const int off = P.arch.kind == net_kind::mdeeponet ? P.arch.branch_dim : 0;
  diff_graph g;
  const jet2_nodes jn = eval_with_input_derivatives(g, P, x, 2);

  auto value_at = [&](const Eigen::VectorXd& xx) {
    diff_graph gq;
    return eval_with_input_derivatives(gq, P, xx, 0).numeric.value;
  };
  double scale = jn.numeric.grad_in.cwiseAbs().maxCoeff();
  scale = std::max(scale, jn.numeric.hess.cwiseAbs().maxCoeff());

  fd_report rep;
  Eigen::VectorXd xx = x;
  for (int k = 0; k < d; ++k) {
    auto at = [&](double dk) {
      xx = x;
      xx[off + k] += dk;
      return value_at(xx);
    };
    const double num =
        (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
    detail::fd_update(rep, k, jn.numeric.grad_in[k], num, scale);
  }
  const double f0 = value_at(x);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double num;
      if (i == j) {
        auto at = [&](double di) {
          xx = x;
          xx[off + i] += di;
          return value_at(xx);
        };
        num = (-at(2 * h) + 16.0 * at(h) - 30.0 * f0 + 16.0 * at(-h) -
               at(-2 * h)) /
              (12.0 * h * h);
      } else {
        auto at = [&](double di, double dj) {
          xx = x;
          xx[off + i] += di;
          xx[off + j] += dj;
          return value_at(xx);
        };
        num = (at(h, h) + at(-h, -h) - at(h, -h) - at(-h, h)) / (4.0 * h * h);
      }
      detail::fd_update(rep, d + deriv_layout::full_index(d, i, j),
                        jn.numeric.hess(i, j), num, scale);
    }
  return rep;
}

}  // namespace brdr
