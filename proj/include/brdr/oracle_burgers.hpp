#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "brdr/common.hpp"
#include "brdr/eigensym.hpp"
#include "brdr/problems.hpp"

// Reference solution for the viscous Burgers benchmark via the Cole-Hopf
// transform: with phi_t = nu phi_xx and u = -2 nu phi_x / phi, the initial
// condition u0 = -sin(pi x) gives phi(x,0) = exp(-G(x)/2nu),
// G(y) = (cos(pi y) - 1)/pi. Substituting y = x - 2 sqrt(nu t) z turns the
// heat-kernel integral into a Gauss-Hermite sum, and x-derivatives of phi
// only multiply the integrand by analytic factors, so u, u_x, u_xx and u_t
// all come from the same four moment sums. No finite differencing is ever
// applied to the field itself, which matters near the x=0 gradient spike
// where the viscous length scale is ~1e-2.

namespace brdr {

// Nodes and weights for integrating f against exp(-z^2); exact through
// polynomial degree 2n-1. Nodes are the eigenvalues of the Golub-Welsch
// tridiagonal recurrence matrix, polished by two Newton steps on the
// orthonormal Hermite recurrence. Weights come from the Christoffel
// function 1/sum_k p_k(z)^2 rather than squared eigenvector components:
// the tail weights sit far below eigenvector rounding noise, and a noise
// weight of 1e-32 against an integrand factor of e^100 would poison every
// moment sum.
inline void gauss_hermite(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw precondition_error("gauss_hermite: need n >= 1");
  // the Christoffel sums reach ~exp(z_max^2); stay clear of double overflow
  if (n > 300) throw precondition_error("gauss_hermite: rule too large");
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = std::sqrt(double(i) / 2.0);
    j(i - 1, i) = b;
    j(i, i - 1) = b;
  }
  const sym_eigen e = jacobi_eigensym(j);
  nodes = e.values;
  weights.resize(n);
  const double p00 = std::pow(std::numbers::pi, -0.25);
  // p_{k+1} = (z p_k - sqrt(k/2) p_{k-1}) / sqrt((k+1)/2); p_n' = sqrt(2n) p_{n-1}
  const auto eval_pn = [&](double z, double& pn, double& pnm1) {
    double pm = 0.0, pk = p00;
    for (int k = 0; k < n; ++k) {
      const double next =
          (z * pk - std::sqrt(k * 0.5) * pm) / std::sqrt((k + 1) * 0.5);
      pm = pk;
      pk = next;
    }
    pn = pk;
    pnm1 = pm;
  };
  for (int i = 0; i < n; ++i) {
    double z = nodes[i];
    for (int newton = 0; newton < 2; ++newton) {
      double pn, pnm1;
      eval_pn(z, pn, pnm1);
      const double dp = std::sqrt(2.0 * n) * pnm1;
      if (dp == 0.0) break;
      z -= pn / dp;
    }
    nodes[i] = z;
    double pm = 0.0, pk = p00, ssum = 0.0;
    for (int k = 0; k < n; ++k) {
      ssum += pk * pk;
      const double next =
          (z * pk - std::sqrt(k * 0.5) * pm) / std::sqrt((k + 1) * 0.5);
      pm = pk;
      pk = next;
    }
    weights[i] = 1.0 / ssum;
    if (!std::isfinite(weights[i]) || !(weights[i] > 0.0))
      throw oracle_error("gauss_hermite: weight evaluation failed");
  }
}

class burgers_oracle {
 public:
  explicit burgers_oracle(double nu = 0.01 / std::numbers::pi, int nodes = 150)
      : nu_(nu) {
    if (!(nu > 0.0)) throw precondition_error("burgers_oracle: nu must be positive");
    // max exponent of phi0 is 1/(pi nu); keep exp() well inside double range
    if (1.0 / (std::numbers::pi * nu) > 600.0)
      throw precondition_error("burgers_oracle: nu too small for direct quadrature");
    gauss_hermite(nodes, z_, w_);
  }

  double value(double x, double t) const {
    const ratios r = moments(x, t);
    return -2.0 * nu_ * r.r1;
  }

  // u with u_x, u_t, u_xx filled; mixed and t,t second derivatives are not
  // produced by the moment sums and are left at zero
  jet2 jet(double x, double t) const {
    const ratios r = moments(x, t);
    jet2 j;
    j.value = -2.0 * nu_ * r.r1;
    j.grad_in = Eigen::VectorXd::Zero(2);
    j.grad_in[0] = -2.0 * nu_ * (r.r2 - r.r1 * r.r1);
    j.grad_in[1] = -2.0 * nu_ * nu_ * (r.r3 - r.r1 * r.r2);
    j.mode = hess_mode::full;
    j.hess = Eigen::MatrixXd::Zero(2, 2);
    j.hess(0, 0) =
        -2.0 * nu_ * (r.r3 - 3.0 * r.r1 * r.r2 + 2.0 * r.r1 * r.r1 * r.r1);
    return j;
  }

  double nu() const { return nu_; }

 private:
  struct ratios {
    double r1, r2, r3;  // phi_x/phi, phi_xx/phi, phi_xxx/phi
  };

  ratios moments(double x, double t) const {
    if (!(t >= 0.0)) throw precondition_error("burgers_oracle: negative time");
    const double pi = std::numbers::pi;
    const double a = 2.0 * std::sqrt(nu_ * t);
    const double inv2nu = 1.0 / (2.0 * nu_);
    const std::size_t n = static_cast<std::size_t>(z_.size());
    std::vector<double> s0(n), s1(n), s2(n), s3(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = x - a * z_[std::ptrdiff_t(i)];
      const double sy = std::sin(pi * y);
      const double cy = std::cos(pi * y);
      const double f = w_[std::ptrdiff_t(i)] * std::exp((1.0 - cy) * inv2nu / pi);
      const double h1 = sy * inv2nu;
      const double h1p = pi * cy * inv2nu;
      const double h1pp = -pi * pi * sy * inv2nu;
      s0[i] = f;
      s1[i] = f * h1;
      s2[i] = f * (h1p + h1 * h1);
      s3[i] = f * (h1pp + 3.0 * h1 * h1p + h1 * h1 * h1);
    }
    const double p0 = pairwise_sum(s0);
    if (!(p0 > 0.0) || !std::isfinite(p0))
      throw oracle_error("burgers_oracle: degenerate quadrature");
    ratios r;
    r.r1 = pairwise_sum(s1) / p0;
    r.r2 = pairwise_sum(s2) / p0;
    r.r3 = pairwise_sum(s3) / p0;
    return r;
  }

  double nu_;
  Eigen::VectorXd z_, w_;
};

// u on the standard 101x101 evaluation grid, rows aligned with test_grid
inline Eigen::VectorXd burgers_reference_values(const problem_spec& pr) {
  if (pr.id != problem_id::burgers1d)
    throw precondition_error("burgers_reference_values: wrong problem");
  const burgers_oracle orc(pr.nu);
  const Eigen::MatrixXd grid = test_grid(pr);
  Eigen::VectorXd u(grid.rows());
  for (std::ptrdiff_t i = 0; i < grid.rows(); ++i)
    u[i] = orc.value(grid(i, 0), grid(i, 1));
  return u;
}

// Independent cross-check: explicit RK4 finite differences with fourth-order
// central stencils on a periodic grid over [-1,1). The odd initial condition
// keeps the x=+-1 Dirichlet values pinned at zero, so periodicity implies
// the boundary conditions. Returns values on the same 101x101 grid layout.
inline Eigen::VectorXd burgers_fd_reference(double nu, int nx, double dt) {
  if (nx < 200 || nx % 100 != 0)
    throw precondition_error("burgers_fd_reference: nx must be a multiple of 100");
  const long long per_snap = std::llround(0.01 / dt);
  if (per_snap < 1 || std::abs(double(per_snap) * dt - 0.01) > 1e-12)
    throw precondition_error("burgers_fd_reference: dt must divide 0.01");
  const double pi = std::numbers::pi;
  const double h = 2.0 / nx;
  const double c1 = 1.0 / (12.0 * h);
  const double c2 = nu / (12.0 * h * h);
  Eigen::VectorXd u(nx);
  for (int i = 0; i < nx; ++i) u[i] = -std::sin(pi * (-1.0 + i * h));
  const auto rhs = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    const double* p = v.data();
    double* o = out.data();
    for (int i = 0; i < nx; ++i) {
      const int m2 = i >= 2 ? i - 2 : i - 2 + nx;
      const int m1 = i >= 1 ? i - 1 : i - 1 + nx;
      const int p1 = i + 1 < nx ? i + 1 : i + 1 - nx;
      const int p2 = i + 2 < nx ? i + 2 : i + 2 - nx;
      const double ux = c1 * (-p[p2] + 8.0 * p[p1] - 8.0 * p[m1] + p[m2]);
      const double uxx =
          c2 * (-p[p2] + 16.0 * p[p1] - 30.0 * p[i] + 16.0 * p[m1] - p[m2]);
      o[i] = -p[i] * ux + uxx;
    }
  };
  Eigen::VectorXd k1(nx), k2(nx), k3(nx), k4(nx), tmp(nx);
  Eigen::VectorXd out(101 * 101);
  const int stride = nx / 100;
  const auto record = [&](int jt) {
    for (int ix = 0; ix <= 100; ++ix) {
      const int g = (ix * stride) % nx;  // x=+1 wraps to the x=-1 point
      out[ix * 101 + jt] = u[g];
    }
  };
  record(0);
  for (int jt = 1; jt <= 100; ++jt) {
    for (long long s = 0; s < per_snap; ++s) {
      rhs(u, k1);
      tmp = u + (0.5 * dt) * k1;
      rhs(tmp, k2);
      tmp = u + (0.5 * dt) * k2;
      rhs(tmp, k3);
      tmp = u + dt * k3;
      rhs(tmp, k4);
      u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!u.allFinite()) throw oracle_error("burgers_fd_reference: solution blew up");
    record(jt);
  }
  return out;
}

}  // namespace brdr
