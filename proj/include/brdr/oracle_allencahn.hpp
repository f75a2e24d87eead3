#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "brdr/common.hpp"
#include "brdr/jet.hpp"
#include "brdr/problems.hpp"

// Semi-implicit Fourier spectral reference for the Allen-Cahn benchmark.
// CNAB2 stepping: the linear part 5u + D u_xx is Crank-Nicolson, the cubic
// -5u^3 is Adams-Bashforth 2. Modes up to a quarter of the grid are
// retained, which makes the cubic product alias-free; the default grid of
// 4096 points keeps the retained band wide enough that the discarded tail
// of u^3 near the phase fronts sits far below the residual checks.
// Spectral coefficients are stored every few steps so u_t can later be
// recovered by differencing whole coefficient vectors in time while u_x
// and u_xx stay exact in x.

namespace brdr {

struct allencahn_params {
  int n = 4096;       // grid size; modes |k| <= n/4 - 1 are retained
  double dt = 1e-4;
  double t_end = 1.0;
  double d = 1e-4;
  int keep = 10;      // snapshot stride in steps; 0 stores endpoints only
};

class allencahn_oracle {
 public:
  using params = allencahn_params;

  explicit allencahn_oracle(params p = {}) : p_(p) {
    if (p_.n < 64 || p_.n % 4 != 0)
      throw precondition_error("allencahn_oracle: n must be a multiple of 4, >= 64");
    if (!(p_.dt > 0.0) || !(p_.t_end > 0.0) || p_.keep < 0)
      throw precondition_error("allencahn_oracle: bad stepping parameters");
    nsteps_ = std::llround(p_.t_end / p_.dt);
    if (nsteps_ < 2 || std::abs(double(nsteps_) * p_.dt - p_.t_end) > 1e-9)
      throw precondition_error("allencahn_oracle: dt must divide t_end");
    if (p_.keep > 0 && nsteps_ % p_.keep != 0)
      throw precondition_error("allencahn_oracle: keep must divide the step count");
  }

  void solve() {
    const int n = p_.n;
    const int kmax = n / 4 - 1;
    const double pi = std::numbers::pi;
    Eigen::FFT<double> fft;
    Eigen::VectorXd u(n), cube(n);
    for (int j = 0; j < n; ++j) u[j] = allencahn_ic(-1.0 + 2.0 * j / n);
    Eigen::VectorXcd uh(n), nl(n), nl_prev(n);
    fft.fwd(uh, u);
    dealias(uh, kmax);
    // CN factors per mode for L = 5 + D d_xx
    Eigen::VectorXd num(n), den(n);
    for (int k = 0; k < n; ++k) {
      const int ks = k <= n / 2 ? k : k - n;
      const double w = pi * ks;
      const double l = 5.0 - p_.d * w * w;
      num[k] = 1.0 + 0.5 * p_.dt * l;
      den[k] = 1.0 / (1.0 - 0.5 * p_.dt * l);
    }
    hist_.clear();
    hist_times_.clear();
    const auto snap = [&](long long step) {
      if (p_.keep > 0 ? step % p_.keep == 0 : (step == 0 || step == nsteps_)) {
        hist_.push_back(uh / double(n));
        hist_times_.push_back(double(step) * p_.dt);
      }
    };
    snap(0);
    for (long long step = 1; step <= nsteps_; ++step) {
      fft.inv(u, uh);
      cube.array() = u.array().cube();
      fft.fwd(nl, cube);
      nl *= -5.0;
      dealias(nl, kmax);
      if (step == 1) nl_prev = nl;
      uh.array() = (num.array() * uh.array() +
                    p_.dt * (1.5 * nl.array() - 0.5 * nl_prev.array())) *
                   den.array();
      nl_prev.swap(nl);
      snap(step);
      if (step % 1000 == 0 && !uh.allFinite())
        throw oracle_error("allencahn_oracle: solution blew up");
    }
    if (!hist_.back().allFinite())
      throw oracle_error("allencahn_oracle: solution blew up");
  }

  int snapshots() const { return int(hist_.size()); }
  double snap_time(int i) const { return hist_times_.at(std::size_t(i)); }

  // Trig-series evaluation at arbitrary x; dx_order differentiates in x
  double eval(int snap, double x, int dx_order = 0) const {
    const Eigen::VectorXcd& c = hist_.at(std::size_t(snap));
    return series(c, x, dx_order);
  }

  // u with u_x, u_t, u_xx for residual checks; u_t is a fourth-order central
  // difference of the stored coefficients, so the snapshot needs two
  // neighbors on each side. The t,t and mixed entries are left at zero.
  jet2 jet(int snap, double x) const {
    if (p_.keep <= 0) throw precondition_error("allencahn_oracle: no history kept");
    if (snap < 2 || snap > snapshots() - 3)
      throw precondition_error("allencahn_oracle: snapshot too close to the ends");
    const double tau = p_.keep * p_.dt;
    const Eigen::VectorXcd ct =
        (-hist_[std::size_t(snap + 2)] + 8.0 * hist_[std::size_t(snap + 1)] -
         8.0 * hist_[std::size_t(snap - 1)] + hist_[std::size_t(snap - 2)]) /
        (12.0 * tau);
    jet2 j;
    j.value = eval(snap, x);
    j.grad_in = Eigen::VectorXd::Zero(2);
    j.grad_in[0] = eval(snap, x, 1);
    j.grad_in[1] = series(ct, x, 0);
    j.mode = hess_mode::full;
    j.hess = Eigen::MatrixXd::Zero(2, 2);
    j.hess(0, 0) = eval(snap, x, 2);
    return j;
  }

  const params& config() const { return p_; }

 private:
  static void dealias(Eigen::VectorXcd& c, int kmax) {
    const int n = int(c.size());
    for (int k = 0; k < n; ++k) {
      const int ks = k <= n / 2 ? k : k - n;
      if (std::abs(ks) > kmax) c[k] = std::complex<double>(0.0, 0.0);
    }
  }

  double series(const Eigen::VectorXcd& c, double x, int dx_order) const {
    const int n = p_.n;
    const int kmax = n / 4 - 1;
    const double pi = std::numbers::pi;
    std::vector<double> terms(std::size_t(kmax) + 1);
    for (int k = 0; k <= kmax; ++k) {
      const double w = pi * k;
      // grid point j sits at x = -1 + 2j/n, so the DFT basis is e^{i pi k (x+1)}
      std::complex<double> f = c[k] * std::polar(1.0, w * (x + 1.0));
      for (int m = 0; m < dx_order; ++m) f *= std::complex<double>(0.0, w);
      terms[std::size_t(k)] = (k == 0 ? 1.0 : 2.0) * f.real();
    }
    return pairwise_sum(terms);
  }

  params p_;
  long long nsteps_ = 0;
  std::vector<Eigen::VectorXcd> hist_;
  std::vector<double> hist_times_;
};

// u on the standard 101x101 evaluation grid, rows aligned with test_grid.
// The t=0 column is the analytic initial condition; later columns are read
// off stored snapshots, which land exactly on the grid times.
inline Eigen::VectorXd allencahn_reference_values(const problem_spec& pr,
                                                  const allencahn_oracle& orc) {
  if (pr.id != problem_id::allencahn1d)
    throw precondition_error("allencahn_reference_values: wrong problem");
  if (orc.snapshots() == 0 || orc.config().keep <= 0)
    throw precondition_error("allencahn_reference_values: oracle has no history");
  const double tau = orc.config().keep * orc.config().dt;
  const Eigen::MatrixXd grid = test_grid(pr);
  Eigen::VectorXd u(grid.rows());
  for (std::ptrdiff_t i = 0; i < grid.rows(); ++i) {
    const double x = grid(i, 0), t = grid(i, 1);
    if (t == 0.0) {
      u[i] = allencahn_ic(x);
      continue;
    }
    const int snap = int(std::llround(t / tau));
    if (std::abs(orc.snap_time(snap) - t) > 1e-9)
      throw oracle_error("allencahn_reference_values: grid time off snapshot");
    u[i] = orc.eval(snap, x);
  }
  return u;
}

inline Eigen::VectorXd allencahn_reference_values(const problem_spec& pr) {
  allencahn_oracle orc;
  orc.solve();
  return allencahn_reference_values(pr, orc);
}

}  // namespace brdr
