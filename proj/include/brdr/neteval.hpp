#pragma once

// Batched jet propagation through the two network families.
//
// A batch of N points with C jet columns per point is one width x (N*C)
// matrix; point p owns columns [p*C, (p+1)*C). Value, gradient, and
// second-derivative columns transform by exact rules at every layer, so a
// single forward pass yields u and its input derivatives at all points, and a
// single reverse pass yields the parameter gradient of any scalar assembled
// from them. Column slices across the batch are handled as strided views so
// per-layer work stays in a handful of fused Eigen expressions and GEMMs.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "brdr/activation.hpp"
#include "brdr/arch.hpp"
#include "brdr/jet.hpp"
#include "brdr/params.hpp"

namespace brdr {

template <typename Real>
using mat_t = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

// Per-column term tables derived from a deriv_layout.
struct col_tables {
  int gdim = 0;
  int C = 1;
  // hterms[c]: the (k,l,coef) pairs making up hessian column c.
  std::vector<std::vector<hess_col::term>> hterms;
  // by_axis[k]: d(column c)/d(g_k) carries coef * g_other.
  struct axis_term {
    int c, other;
    double coef;
  };
  std::vector<std::vector<axis_term>> by_axis;

  static col_tables make(const deriv_layout& lay) {
    col_tables t;
    t.gdim = lay.gdim;
    t.C = lay.cols();
    t.by_axis.resize(lay.gdim);
    for (int c = 0; c < int(lay.hess.size()); ++c) {
      t.hterms.push_back(lay.hess[c].terms);
      for (const auto& tm : lay.hess[c].terms) {
        if (tm.k == tm.l) {
          t.by_axis[tm.k].push_back({c, tm.k, 2.0 * tm.coef});
        } else {
          t.by_axis[tm.k].push_back({c, tm.l, tm.coef});
          t.by_axis[tm.l].push_back({c, tm.k, tm.coef});
        }
      }
    }
    return t;
  }
  int nh() const { return int(hterms.size()); }
  int gslot(int k) const { return 1 + k; }
  int hslot(int c) const { return 1 + gdim + c; }
};

namespace detail {

template <typename Real>
using sview = Eigen::Map<mat_t<Real>, 0, Eigen::OuterStride<>>;
template <typename Real>
using csview = Eigen::Map<const mat_t<Real>, 0, Eigen::OuterStride<>>;

// Strided view of one jet column slot across all points.
template <typename Real>
sview<Real> slot(mat_t<Real>& M, int C, int s, int N) {
  return sview<Real>(M.data() + std::ptrdiff_t(s) * M.rows(), M.rows(), N,
                     Eigen::OuterStride<>(std::ptrdiff_t(C) * M.rows()));
}
template <typename Real>
csview<Real> slot(const mat_t<Real>& M, int C, int s, int N) {
  return csview<Real>(M.data() + std::ptrdiff_t(s) * M.rows(), M.rows(), N,
                      Eigen::OuterStride<>(std::ptrdiff_t(C) * M.rows()));
}

// Vectorized tanh on a strided view. Double has no packet tanh in Eigen, so
// it goes through exp, which agrees with std::tanh to ~2e-12 relative.
template <typename Dst, typename Src>
void tanh_block(Dst dst, const Src& src) {
  using Real = typename Dst::Scalar;
  if constexpr (std::is_same_v<Real, double>) {
    dst.array() = 1.0 - 2.0 / ((2.0 * src.array()).exp() + 1.0);
  } else {
    dst.array() = src.array().tanh();
  }
}

template <typename Real>
struct eval_scratch {
  mat_t<Real> d1, d2, d3, prod, t1;        // width x maxN
  mat_t<Real> adjP, adjZ, adjD, adjU, adjV;  // width x maxN*C
  void setup(int width, int maxN, int C, bool gates) {
    d1.resize(width, maxN);
    d2.resize(width, maxN);
    d3.resize(width, maxN);
    prod.resize(width, maxN);
    t1.resize(width, maxN);
    adjP.resize(width, std::ptrdiff_t(maxN) * C);
    adjZ.resize(width, std::ptrdiff_t(maxN) * C);
    if (gates) {
      adjD.resize(width, std::ptrdiff_t(maxN) * C);
      adjU.resize(width, std::ptrdiff_t(maxN) * C);
      adjV.resize(width, std::ptrdiff_t(maxN) * C);
    }
  }
};

template <typename Real>
void affine_fwd(Eigen::Map<const row_mat<Real>> W,
                Eigen::Map<const vec_t<Real>> b, const mat_t<Real>& X,
                mat_t<Real>& Y, const col_tables& T, int N) {
  const auto nc = std::ptrdiff_t(N) * T.C;
  Y.leftCols(nc).noalias() = W * X.leftCols(nc);
  slot(Y, T.C, 0, N).colwise() += b;
}

// Accumulates parameter gradients; optionally back-propagates to the input.
template <typename Real>
void affine_bwd(Eigen::Map<const row_mat<Real>> W, const mat_t<Real>& X,
                const mat_t<Real>& adjY, Eigen::Map<row_mat<Real>> gW,
                Eigen::Map<vec_t<Real>> gb, mat_t<Real>* adjX,
                const col_tables& T, int N) {
  const auto nc = std::ptrdiff_t(N) * T.C;
  gW.noalias() += adjY.leftCols(nc) * X.leftCols(nc).transpose();
  gb += slot(adjY, T.C, 0, N).rowwise().sum();
  if (adjX) adjX->leftCols(nc).noalias() = W.transpose() * adjY.leftCols(nc);
}

template <typename Real>
void tanh_fwd(const col_tables& T, int N, const mat_t<Real>& X, mat_t<Real>& Y,
              eval_scratch<Real>& ws) {
  auto Yv = slot(Y, T.C, 0, N);
  tanh_block(Yv, slot(X, T.C, 0, N));
  auto D1 = ws.d1.leftCols(N);
  D1.array() = Real(1) - Yv.array().square();
  if (T.nh() > 0)
    ws.d2.leftCols(N).array() = Real(-2) * Yv.array() * D1.array();
  for (int k = 0; k < T.gdim; ++k)
    slot(Y, T.C, T.gslot(k), N).array() =
        D1.array() * slot(X, T.C, T.gslot(k), N).array();
  for (int c = 0; c < T.nh(); ++c) {
    if (T.hterms[c].empty()) {
      slot(Y, T.C, T.hslot(c), N).array() =
          D1.array() * slot(X, T.C, T.hslot(c), N).array();
      continue;
    }
    auto P = ws.prod.leftCols(N);
    bool first = true;
    for (const auto& tm : T.hterms[c]) {
      auto gk = slot(X, T.C, T.gslot(tm.k), N);
      auto gl = slot(X, T.C, T.gslot(tm.l), N);
      if (first)
        P.array() = Real(tm.coef) * gk.array() * gl.array();
      else
        P.array() += Real(tm.coef) * gk.array() * gl.array();
      first = false;
    }
    slot(Y, T.C, T.hslot(c), N).array() =
        D1.array() * slot(X, T.C, T.hslot(c), N).array() +
        ws.d2.leftCols(N).array() * P.array();
  }
}

// adj holds the output adjoint on entry and the input adjoint on exit.
// Value column first (it reads the g/h adjoints), h columns last.
template <typename Real>
void tanh_bwd(const col_tables& T, int N, const mat_t<Real>& X,
              const mat_t<Real>& Y, mat_t<Real>& adj, eval_scratch<Real>& ws) {
  auto phi = slot(Y, T.C, 0, N);
  auto D1 = ws.d1.leftCols(N);
  D1.array() = Real(1) - phi.array().square();
  const bool hess = T.nh() > 0;
  if (T.gdim > 0 || hess)
    ws.d2.leftCols(N).array() = Real(-2) * phi.array() * D1.array();
  if (hess)
    ws.d3.leftCols(N).array() = Real(-2) * D1.array().square() +
                                Real(4) * phi.array().square() * D1.array();
  auto acc = ws.t1.leftCols(N);
  acc.array() = slot(adj, T.C, 0, N).array() * D1.array();
  for (int k = 0; k < T.gdim; ++k)
    acc.array() += slot(adj, T.C, T.gslot(k), N).array() *
                   ws.d2.leftCols(N).array() *
                   slot(X, T.C, T.gslot(k), N).array();
  for (int c = 0; c < T.nh(); ++c) {
    if (T.hterms[c].empty()) {
      acc.array() += slot(adj, T.C, T.hslot(c), N).array() *
                     ws.d2.leftCols(N).array() *
                     slot(X, T.C, T.hslot(c), N).array();
      continue;
    }
    auto P = ws.prod.leftCols(N);
    bool first = true;
    for (const auto& tm : T.hterms[c]) {
      auto gk = slot(X, T.C, T.gslot(tm.k), N);
      auto gl = slot(X, T.C, T.gslot(tm.l), N);
      if (first)
        P.array() = Real(tm.coef) * gk.array() * gl.array();
      else
        P.array() += Real(tm.coef) * gk.array() * gl.array();
      first = false;
    }
    acc.array() += slot(adj, T.C, T.hslot(c), N).array() *
                   (ws.d2.leftCols(N).array() *
                        slot(X, T.C, T.hslot(c), N).array() +
                    ws.d3.leftCols(N).array() * P.array());
  }
  for (int k = 0; k < T.gdim; ++k) {
    auto t = ws.t1.leftCols(N);
    // acc is t1; stash the value-column result before reusing t1.
    if (k == 0) slot(adj, T.C, 0, N).array() = acc.array();
    t.array() = slot(adj, T.C, T.gslot(k), N).array() * D1.array();
    for (const auto& ax : T.by_axis[k])
      t.array() += slot(adj, T.C, T.hslot(ax.c), N).array() *
                   ws.d2.leftCols(N).array() * Real(ax.coef) *
                   slot(X, T.C, T.gslot(ax.other), N).array();
    slot(adj, T.C, T.gslot(k), N).array() = t.array();
  }
  if (T.gdim == 0) slot(adj, T.C, 0, N).array() = acc.array();
  for (int c = 0; c < T.nh(); ++c)
    slot(adj, T.C, T.hslot(c), N).array() *= D1.array();
}

// H = U + Z.(V-U), with D = V-U precomputed once per forward.
template <typename Real>
void gate_fwd(const col_tables& T, int N, const mat_t<Real>& U,
              const mat_t<Real>& D, const mat_t<Real>& Z, mat_t<Real>& H) {
  auto Zv = slot(Z, T.C, 0, N);
  auto Dv = slot(D, T.C, 0, N);
  slot(H, T.C, 0, N).array() =
      slot(U, T.C, 0, N).array() + Zv.array() * Dv.array();
  for (int k = 0; k < T.gdim; ++k)
    slot(H, T.C, T.gslot(k), N).array() =
        slot(U, T.C, T.gslot(k), N).array() +
        slot(Z, T.C, T.gslot(k), N).array() * Dv.array() +
        Zv.array() * slot(D, T.C, T.gslot(k), N).array();
  for (int c = 0; c < T.nh(); ++c) {
    const int s = T.hslot(c);
    auto Hh = slot(H, T.C, s, N);
    Hh.array() = slot(U, T.C, s, N).array() +
                 slot(Z, T.C, s, N).array() * Dv.array() +
                 Zv.array() * slot(D, T.C, s, N).array();
    for (const auto& tm : T.hterms[c]) {
      auto Zk = slot(Z, T.C, T.gslot(tm.k), N);
      auto Dl = slot(D, T.C, T.gslot(tm.l), N);
      if (tm.k == tm.l) {
        Hh.array() += Real(2 * tm.coef) * Zk.array() * Dl.array();
      } else {
        auto Zl = slot(Z, T.C, T.gslot(tm.l), N);
        auto Dk = slot(D, T.C, T.gslot(tm.k), N);
        Hh.array() += Real(tm.coef) *
                      (Zk.array() * Dl.array() + Zl.array() * Dk.array());
      }
    }
  }
}

// Fills adjZ and adjD from adjH, then folds the direct paths into the U,V
// accumulators: adjU += adjH - adjD, adjV += adjD.
template <typename Real>
void gate_bwd(const col_tables& T, int N, const mat_t<Real>& Z,
              const mat_t<Real>& D, const mat_t<Real>& adjH,
              eval_scratch<Real>& ws) {
  const auto nc = std::ptrdiff_t(N) * T.C;
  auto Av = slot(adjH, T.C, 0, N);
  for (int pass = 0; pass < 2; ++pass) {
    // pass 0: adjZ from D; pass 1: adjD from Z.
    const mat_t<Real>& other = pass == 0 ? D : Z;
    mat_t<Real>& dst = pass == 0 ? ws.adjZ : ws.adjD;
    auto Ov = slot(other, T.C, 0, N);
    auto dv = slot(dst, T.C, 0, N);
    dv.array() = Av.array() * Ov.array();
    for (int k = 0; k < T.gdim; ++k)
      dv.array() += slot(adjH, T.C, T.gslot(k), N).array() *
                    slot(other, T.C, T.gslot(k), N).array();
    for (int c = 0; c < T.nh(); ++c)
      dv.array() += slot(adjH, T.C, T.hslot(c), N).array() *
                    slot(other, T.C, T.hslot(c), N).array();
    for (int k = 0; k < T.gdim; ++k) {
      auto dg = slot(dst, T.C, T.gslot(k), N);
      dg.array() = slot(adjH, T.C, T.gslot(k), N).array() * Ov.array();
      for (const auto& ax : T.by_axis[k])
        dg.array() += slot(adjH, T.C, T.hslot(ax.c), N).array() *
                      Real(ax.coef) *
                      slot(other, T.C, T.gslot(ax.other), N).array();
    }
    for (int c = 0; c < T.nh(); ++c)
      slot(dst, T.C, T.hslot(c), N).array() =
          slot(adjH, T.C, T.hslot(c), N).array() * Ov.array();
  }
  ws.adjU.leftCols(nc).array() +=
      adjH.leftCols(nc).array() - ws.adjD.leftCols(nc).array();
  ws.adjV.leftCols(nc).array() += ws.adjD.leftCols(nc).array();
}

// G = sum over latent rows of A.B, per jet column with product-rule mixing.
template <typename Real>
void dot_fwd(const col_tables& T, int N, const mat_t<Real>& A,
             const mat_t<Real>& B, mat_t<Real>& G) {
  auto Av = slot(A, T.C, 0, N);
  auto Bv = slot(B, T.C, 0, N);
  slot(G, T.C, 0, N) = (Av.array() * Bv.array()).colwise().sum().matrix();
  for (int k = 0; k < T.gdim; ++k) {
    const int s = T.gslot(k);
    slot(G, T.C, s, N) = (slot(A, T.C, s, N).array() * Bv.array() +
                          Av.array() * slot(B, T.C, s, N).array())
                             .colwise()
                             .sum()
                             .matrix();
  }
  for (int c = 0; c < T.nh(); ++c) {
    const int s = T.hslot(c);
    auto acc = (slot(A, T.C, s, N).array() * Bv.array() +
                Av.array() * slot(B, T.C, s, N).array())
                   .colwise()
                   .sum()
                   .eval();
    for (const auto& tm : T.hterms[c]) {
      auto Ak = slot(A, T.C, T.gslot(tm.k), N);
      auto Bl = slot(B, T.C, T.gslot(tm.l), N);
      if (tm.k == tm.l) {
        acc += Real(2 * tm.coef) * (Ak.array() * Bl.array()).colwise().sum();
      } else {
        auto Al = slot(A, T.C, T.gslot(tm.l), N);
        auto Bk = slot(B, T.C, T.gslot(tm.k), N);
        acc += Real(tm.coef) * ((Ak.array() * Bl.array()).colwise().sum() +
                                (Al.array() * Bk.array()).colwise().sum());
      }
    }
    slot(G, T.C, s, N) = acc.matrix();
  }
}

template <typename Real>
void dot_bwd_one(const col_tables& T, int N, const mat_t<Real>& other,
                 const mat_t<Real>& adjG, mat_t<Real>& dst) {
  auto Ov = slot(other, T.C, 0, N);
  // Each adjG slot is a 1 x N row broadcast down the latent dimension.
  auto row = [&](int s) { return slot(adjG, T.C, s, N); };
  auto dv = slot(dst, T.C, 0, N);
  dv.array() = Ov.array().rowwise() * row(0).array().row(0);
  for (int k = 0; k < T.gdim; ++k)
    dv.array() += slot(other, T.C, T.gslot(k), N).array().rowwise() *
                  row(T.gslot(k)).array().row(0);
  for (int c = 0; c < T.nh(); ++c)
    dv.array() += slot(other, T.C, T.hslot(c), N).array().rowwise() *
                  row(T.hslot(c)).array().row(0);
  for (int k = 0; k < T.gdim; ++k) {
    auto dg = slot(dst, T.C, T.gslot(k), N);
    dg.array() = Ov.array().rowwise() * row(T.gslot(k)).array().row(0);
    for (const auto& ax : T.by_axis[k])
      dg.array() += Real(ax.coef) *
                    (slot(other, T.C, T.gslot(ax.other), N).array().rowwise() *
                     row(T.hslot(ax.c)).array().row(0));
  }
  for (int c = 0; c < T.nh(); ++c)
    slot(dst, T.C, T.hslot(c), N).array() =
        Ov.array().rowwise() * row(T.hslot(c)).array().row(0);
}

}  // namespace detail

// Builds the input jet block for raw coordinates: value column is the point,
// gradient columns are unit directions, second-derivative columns vanish.
template <typename Real>
void build_input_jets(const Eigen::MatrixXd& pts, const col_tables& T,
                      mat_t<Real>& E) {
  const int N = int(pts.rows());
  const int d = int(pts.cols());
  // gdim 0 is the value-only fast path used for plain field evaluation.
  if (T.gdim != 0 && T.gdim != d)
    throw shape_error("input jet axes disagree with points");
  E.leftCols(std::ptrdiff_t(N) * T.C).setZero();
  for (int p = 0; p < N; ++p) {
    for (int r = 0; r < d; ++r) E(r, std::ptrdiff_t(p) * T.C) = Real(pts(p, r));
    for (int k = 0; k < T.gdim; ++k)
      E(k, std::ptrdiff_t(p) * T.C + T.gslot(k)) = Real(1);
  }
}

// Fourier features on axis 0: rows [sin(pi b x), cos(pi b x)]_{b=1..m}, then
// the remaining axes raw. Derivatives are filled analytically, so the
// embedding is exact to machine precision and exactly 2-periodic in x.
template <typename Real>
void build_fourier_jets(const Eigen::MatrixXd& pts, int modes,
                        const col_tables& T, mat_t<Real>& E) {
  const int N = int(pts.rows());
  const int d = int(pts.cols());
  const double pi = 3.14159265358979323846;
  if (T.gdim != 0 && T.gdim != d)
    throw shape_error("input jet axes disagree with points");
  E.leftCols(std::ptrdiff_t(N) * T.C).setZero();
  // Every embedding row depends on a single input axis, so all mixed second
  // derivatives of the embedding vanish; only (0,0) terms need filling.
  for (int p = 0; p < N; ++p) {
    const std::ptrdiff_t base = std::ptrdiff_t(p) * T.C;
    const double x = pts(p, 0);
    for (int b = 1; b <= modes; ++b) {
      const double w = pi * b;
      const double s = std::sin(w * x), c = std::cos(w * x);
      E(b - 1, base) = Real(s);
      E(modes + b - 1, base) = Real(c);
      if (T.gdim == 0) continue;
      E(b - 1, base + T.gslot(0)) = Real(w * c);
      E(modes + b - 1, base + T.gslot(0)) = Real(-w * s);
      for (int hc = 0; hc < int(T.hterms.size()); ++hc) {
        double coef = 0.0;
        for (const auto& tm : T.hterms[hc])
          if (tm.k == 0 && tm.l == 0) coef += tm.coef;
        if (coef != 0.0) {
          E(b - 1, base + T.hslot(hc)) += Real(-coef * w * w * s);
          E(modes + b - 1, base + T.hslot(hc)) += Real(-coef * w * w * c);
        }
      }
    }
    for (int r = 1; r < d; ++r) {
      E(2 * modes + r - 1, base) = Real(pts(p, r));
      if (T.gdim != 0) E(2 * modes + r - 1, base + T.gslot(r)) = Real(1);
    }
  }
}

// Branch (sensor) inputs carry no coordinate jets: value columns only.
template <typename Real>
void build_branch_jets(const Eigen::MatrixXd& sensors, const col_tables& T,
                       mat_t<Real>& E) {
  const int N = int(sensors.rows());
  const int d = int(sensors.cols());
  E.leftCols(std::ptrdiff_t(N) * T.C).setZero();
  for (int p = 0; p < N; ++p)
    for (int r = 0; r < d; ++r)
      E(r, std::ptrdiff_t(p) * T.C) = Real(sensors(p, r));
}

namespace detail {

// One gated tower: tanh layer 1, then depth-1 gated layers, then an affine
// head. Used directly by mfcn and twice (shared gates) by mdeeponet.
template <typename Real>
struct tower {
  int L = 0;
  std::vector<int> iW, iB;  // modules, layer 1..L+1
  std::vector<mat_t<Real>> pre, post;  // tanh layers 1..L
  std::vector<mat_t<Real>> H;          // gated outputs, layers 2..L
  mat_t<Real> out;

  void setup(const param_store<double>& ref, const std::string& tag, int depth,
             int width, int out_rows, std::ptrdiff_t maxNC) {
    L = depth;
    iW.clear();
    iB.clear();
    for (int l = 1; l <= L + 1; ++l) {
      iW.push_back(ref.module_index("W" + tag + std::to_string(l)));
      iB.push_back(ref.module_index("b" + tag + std::to_string(l)));
    }
    pre.assign(L, {});
    post.assign(L, {});
    for (int l = 0; l < L; ++l) {
      pre[l].resize(width, maxNC);
      post[l].resize(width, maxNC);
    }
    H.assign(L >= 2 ? L - 1 : 0, {});
    for (auto& h : H) h.resize(width, maxNC);
    out.resize(out_rows, maxNC);
  }

  const mat_t<Real>& top() const { return L == 1 ? post[0] : H[L - 2]; }

  void forward(const param_store<Real>& P, const mat_t<Real>& IN,
               const mat_t<Real>& U, const mat_t<Real>& D,
               const col_tables& T, int N, eval_scratch<Real>& ws) {
    affine_fwd<Real>(P.mat(iW[0]), P.vec(iB[0]), IN, pre[0], T, N);
    tanh_fwd(T, N, pre[0], post[0], ws);
    const mat_t<Real>* h = &post[0];
    for (int l = 2; l <= L; ++l) {
      affine_fwd<Real>(P.mat(iW[l - 1]), P.vec(iB[l - 1]), *h, pre[l - 1], T,
                       N);
      tanh_fwd(T, N, pre[l - 1], post[l - 1], ws);
      gate_fwd(T, N, U, D, post[l - 1], H[l - 2]);
      h = &H[l - 2];
    }
    affine_fwd<Real>(P.mat(iW[L]), P.vec(iB[L]), *h, out, T, N);
  }

  // adj_top is the adjoint of `out`; gate adjoints accumulate into
  // ws.adjU/ws.adjV. The input adjoint is discarded (inputs are leaves).
  void backward(const param_store<Real>& P, const mat_t<Real>& IN,
                const mat_t<Real>& D, const mat_t<Real>& adj_top,
                const col_tables& T, int N, eval_scratch<Real>& ws,
                vec_t<Real>& grad) {
    auto gm = [&](int m) {
      return Eigen::Map<row_mat<Real>>(grad.data() + P.mods[m].offset,
                                       P.mods[m].rows, P.mods[m].cols);
    };
    auto gv = [&](int m) {
      return Eigen::Map<vec_t<Real>>(grad.data() + P.mods[m].offset,
                                     P.mods[m].rows);
    };
    const mat_t<Real>& topin = L == 1 ? post[0] : H[L - 2];
    affine_bwd<Real>(P.mat(iW[L]), topin, adj_top, gm(iW[L]), gv(iB[L]),
                     &ws.adjP, T, N);
    for (int l = L; l >= 2; --l) {
      gate_bwd(T, N, post[l - 1], D, ws.adjP, ws);
      tanh_bwd(T, N, pre[l - 1], post[l - 1], ws.adjZ, ws);
      const mat_t<Real>& below = l == 2 ? post[0] : H[l - 3];
      affine_bwd<Real>(P.mat(iW[l - 1]), below, ws.adjZ, gm(iW[l - 1]),
                       gv(iB[l - 1]), &ws.adjP, T, N);
    }
    tanh_bwd(T, N, pre[0], post[0], ws.adjP, ws);
    affine_bwd<Real>(P.mat(iW[0]), IN, ws.adjP, gm(iW[0]), gv(iB[0]), nullptr,
                     T, N);
  }
};

}  // namespace detail

template <typename Real>
class mfcn_eval {
 public:
  void setup(const arch_descriptor& arch, const deriv_layout& lay,
             int max_points) {
    arch.validate();
    if (arch.kind != net_kind::mfcn) throw shape_error("mfcn_eval: wrong kind");
    arch_ = arch;
    lay_ = lay;
    T_ = col_tables::make(lay);
    maxN_ = max_points;
    const std::ptrdiff_t maxNC = std::ptrdiff_t(max_points) * T_.C;
    param_store<double> ref;
    ref.arch = arch;
    ref.mods = module_table(arch);
    iWU_ = ref.module_index("WU");
    ibU_ = ref.module_index("bU");
    iWV_ = ref.module_index("WV");
    ibV_ = ref.module_index("bV");
    tw_.setup(ref, "", arch.depth, arch.width, arch.output_dim, maxNC);
    E_.resize(arch.embedded_dim(), maxNC);
    if (arch.depth >= 2) {
      preU_.resize(arch.width, maxNC);
      U_.resize(arch.width, maxNC);
      preV_.resize(arch.width, maxNC);
      V_.resize(arch.width, maxNC);
      D_.resize(arch.width, maxNC);
    }
    ws_.setup(arch.width, max_points, T_.C, arch.depth >= 2);
    adj_cast_.resize(arch.output_dim, maxNC);
  }

  void set_points(const Eigen::MatrixXd& pts) {
    if (pts.cols() != arch_.input_dim)
      throw shape_error("mfcn_eval: point dimension mismatch");
    if (pts.rows() > maxN_) throw shape_error("mfcn_eval: batch too large");
    N_ = int(pts.rows());
    if (arch_.fourier_modes > 0)
      build_fourier_jets(pts, arch_.fourier_modes, T_, E_);
    else
      build_input_jets(pts, T_, E_);
  }

  int npoints() const { return N_; }
  const col_tables& tables() const { return T_; }
  const mat_t<Real>& out() const { return tw_.out; }

  void forward(const param_store<Real>& P) {
    if (N_ == 0) throw degenerate_batch_error("mfcn_eval: empty batch");
    if (arch_.depth >= 2) {
      detail::affine_fwd<Real>(P.mat(iWU_), P.vec(ibU_), E_, preU_, T_, N_);
      detail::tanh_fwd(T_, N_, preU_, U_, ws_);
      detail::affine_fwd<Real>(P.mat(iWV_), P.vec(ibV_), E_, preV_, T_, N_);
      detail::tanh_fwd(T_, N_, preV_, V_, ws_);
      const auto nc = std::ptrdiff_t(N_) * T_.C;
      D_.leftCols(nc) = V_.leftCols(nc) - U_.leftCols(nc);
    }
    tw_.forward(P, E_, U_, D_, T_, N_, ws_);
  }

  // adj: output_dim x (N*C) adjoint of the output jets. grad must be sized
  // and zeroed (or hold a partial sum) by the caller.
  void backward(const param_store<Real>& P, const mat_t<Real>& adj,
                vec_t<Real>& grad) {
    const auto nc = std::ptrdiff_t(N_) * T_.C;
    if (arch_.depth >= 2) {
      ws_.adjU.leftCols(nc).setZero();
      ws_.adjV.leftCols(nc).setZero();
    }
    tw_.backward(P, E_, D_, adj, T_, N_, ws_, grad);
    if (arch_.depth >= 2) {
      auto gm = [&](int m) {
        return Eigen::Map<row_mat<Real>>(grad.data() + P.mods[m].offset,
                                         P.mods[m].rows, P.mods[m].cols);
      };
      auto gv = [&](int m) {
        return Eigen::Map<vec_t<Real>>(grad.data() + P.mods[m].offset,
                                       P.mods[m].rows);
      };
      detail::tanh_bwd(T_, N_, preU_, U_, ws_.adjU, ws_);
      detail::affine_bwd<Real>(P.mat(iWU_), E_, ws_.adjU, gm(iWU_), gv(ibU_),
                               nullptr, T_, N_);
      detail::tanh_bwd(T_, N_, preV_, V_, ws_.adjV, ws_);
      detail::affine_bwd<Real>(P.mat(iWV_), E_, ws_.adjV, gm(iWV_), gv(ibV_),
                               nullptr, T_, N_);
    }
  }

  mat_t<Real>& adj_buffer() { return adj_cast_; }

 private:
  arch_descriptor arch_;
  deriv_layout lay_;
  col_tables T_;
  int N_ = 0, maxN_ = 0;
  int iWU_ = -1, ibU_ = -1, iWV_ = -1, ibV_ = -1;
  mat_t<Real> E_, preU_, U_, preV_, V_, D_;
  detail::tower<Real> tw_;
  detail::eval_scratch<Real> ws_;
  mat_t<Real> adj_cast_;
};

template <typename Real>
class mdeeponet_eval {
 public:
  void setup(const arch_descriptor& arch, const deriv_layout& lay,
             int max_points) {
    arch.validate();
    if (arch.kind != net_kind::mdeeponet)
      throw shape_error("mdeeponet_eval: wrong kind");
    arch_ = arch;
    lay_ = lay;
    T_ = col_tables::make(lay);
    maxN_ = max_points;
    const std::ptrdiff_t maxNC = std::ptrdiff_t(max_points) * T_.C;
    param_store<double> ref;
    ref.arch = arch;
    ref.mods = module_table(arch);
    iWU_ = ref.module_index("WU");
    ibU_ = ref.module_index("bU");
    iWV_ = ref.module_index("WV");
    ibV_ = ref.module_index("bV");
    br_.setup(ref, "u", arch.depth, arch.width, arch.output_dim, maxNC);
    tr_.setup(ref, "x", arch.depth, arch.width, arch.output_dim, maxNC);
    Eu_.resize(arch.branch_dim, maxNC);
    Ex_.resize(arch.input_dim, maxNC);
    preU_.resize(arch.width, maxNC);
    U_.resize(arch.width, maxNC);
    preV_.resize(arch.width, maxNC);
    V_.resize(arch.width, maxNC);
    D_.resize(arch.width, maxNC);
    out_.resize(1, maxNC);
    adjA_.resize(arch.output_dim, maxNC);
    adjB_.resize(arch.output_dim, maxNC);
    ws_.setup(arch.width, max_points, T_.C, true);
    adj_cast_.resize(1, maxNC);
  }

  // sensors: N x branch_dim, one row per evaluation pair; coords: N x input_dim.
  void set_points(const Eigen::MatrixXd& sensors, const Eigen::MatrixXd& coords) {
    if (sensors.cols() != arch_.branch_dim || coords.cols() != arch_.input_dim)
      throw shape_error("mdeeponet_eval: input dimension mismatch");
    if (sensors.rows() != coords.rows())
      throw shape_error("mdeeponet_eval: sensor/coordinate count mismatch");
    if (coords.rows() > maxN_) throw shape_error("mdeeponet_eval: batch too large");
    N_ = int(coords.rows());
    build_branch_jets(sensors, T_, Eu_);
    build_input_jets(coords, T_, Ex_);
  }

  int npoints() const { return N_; }
  const col_tables& tables() const { return T_; }
  const mat_t<Real>& out() const { return out_; }

  void forward(const param_store<Real>& P) {
    if (N_ == 0) throw degenerate_batch_error("mdeeponet_eval: empty batch");
    detail::affine_fwd<Real>(P.mat(iWU_), P.vec(ibU_), Eu_, preU_, T_, N_);
    detail::tanh_fwd(T_, N_, preU_, U_, ws_);
    detail::affine_fwd<Real>(P.mat(iWV_), P.vec(ibV_), Ex_, preV_, T_, N_);
    detail::tanh_fwd(T_, N_, preV_, V_, ws_);
    const auto nc = std::ptrdiff_t(N_) * T_.C;
    D_.leftCols(nc) = V_.leftCols(nc) - U_.leftCols(nc);
    br_.forward(P, Eu_, U_, D_, T_, N_, ws_);
    tr_.forward(P, Ex_, U_, D_, T_, N_, ws_);
    detail::dot_fwd(T_, N_, br_.out, tr_.out, out_);
  }

  void backward(const param_store<Real>& P, const mat_t<Real>& adj,
                vec_t<Real>& grad) {
    const auto nc = std::ptrdiff_t(N_) * T_.C;
    ws_.adjU.leftCols(nc).setZero();
    ws_.adjV.leftCols(nc).setZero();
    detail::dot_bwd_one(T_, N_, tr_.out, adj, adjA_);
    detail::dot_bwd_one(T_, N_, br_.out, adj, adjB_);
    br_.backward(P, Eu_, D_, adjA_, T_, N_, ws_, grad);
    tr_.backward(P, Ex_, D_, adjB_, T_, N_, ws_, grad);
    auto gm = [&](int m) {
      return Eigen::Map<row_mat<Real>>(grad.data() + P.mods[m].offset,
                                       P.mods[m].rows, P.mods[m].cols);
    };
    auto gv = [&](int m) {
      return Eigen::Map<vec_t<Real>>(grad.data() + P.mods[m].offset,
                                     P.mods[m].rows);
    };
    detail::tanh_bwd(T_, N_, preU_, U_, ws_.adjU, ws_);
    detail::affine_bwd<Real>(P.mat(iWU_), Eu_, ws_.adjU, gm(iWU_), gv(ibU_),
                             nullptr, T_, N_);
    detail::tanh_bwd(T_, N_, preV_, V_, ws_.adjV, ws_);
    detail::affine_bwd<Real>(P.mat(iWV_), Ex_, ws_.adjV, gm(iWV_), gv(ibV_),
                             nullptr, T_, N_);
  }

  mat_t<Real>& adj_buffer() { return adj_cast_; }

 private:
  arch_descriptor arch_;
  deriv_layout lay_;
  col_tables T_;
  int N_ = 0, maxN_ = 0;
  int iWU_ = -1, ibU_ = -1, iWV_ = -1, ibV_ = -1;
  mat_t<Real> Eu_, Ex_, preU_, U_, preV_, V_, D_, out_, adjA_, adjB_;
  detail::tower<Real> br_, tr_;
  detail::eval_scratch<Real> ws_;
  mat_t<Real> adj_cast_;
};

}  // namespace brdr
