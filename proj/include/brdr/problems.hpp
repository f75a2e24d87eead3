#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "brdr/common.hpp"
#include "brdr/graph.hpp"
#include "brdr/jet.hpp"
#include "brdr/rng.hpp"
#include "brdr/sampling.hpp"

// Benchmark problem definitions: residual operators, reference solutions,
// collocation samplers, and error metrics.

namespace brdr {

enum class problem_id { poisson1d, helmholtz2d, allencahn1d, burgers1d, wave_operator };

// bc_x (derivative boundary condition) is reserved; no benchmark here uses it.
enum class comp_kind { pde, bc, ic, ic_t, bc_x };

inline const char* problem_to_string(problem_id id) {
  switch (id) {
    case problem_id::poisson1d: return "poisson";
    case problem_id::helmholtz2d: return "helmholtz";
    case problem_id::allencahn1d: return "allencahn";
    case problem_id::burgers1d: return "burgers";
    case problem_id::wave_operator: return "wave_operator";
  }
  throw precondition_error("problem_to_string: bad id");
}

inline problem_id parse_problem(const std::string& s) {
  if (s == "poisson") return problem_id::poisson1d;
  if (s == "helmholtz") return problem_id::helmholtz2d;
  if (s == "allencahn") return problem_id::allencahn1d;
  if (s == "burgers") return problem_id::burgers1d;
  if (s == "wave_operator") return problem_id::wave_operator;
  throw config_error("unknown problem: " + s);
}

inline const char* comp_to_string(comp_kind k) {
  switch (k) {
    case comp_kind::pde: return "pde";
    case comp_kind::bc: return "bc";
    case comp_kind::ic: return "ic";
    case comp_kind::ic_t: return "ic_t";
    case comp_kind::bc_x: return "bc_x";
  }
  throw precondition_error("comp_to_string: bad kind");
}

struct component_spec {
  comp_kind kind = comp_kind::pde;
  double lambda = 1.0;
  std::ptrdiff_t count = 0;  // full point-set size (all instances combined)
};

struct problem_spec {
  problem_id id = problem_id::poisson1d;

  // Physical constants; only the fields of the active id are meaningful.
  int k = 2;                             // poisson: u = sin(2k pi x^2)
  double helm_k = 1.0;                   // helmholtz wavenumber
  int a1 = 1, a2 = 4;                    // helmholtz manufactured-solution frequencies
  double ac_d = 1e-4;                    // allen-cahn diffusivity
  double nu = 0.01 / std::numbers::pi;   // burgers viscosity
  double wave_c = std::numbers::sqrt2;   // wave speed
  int n_modes = 5;                       // wave IC modes
  int n_sensors = 101;                   // branch sensor grid size
  int n_instances = 1000;                // wave training instances
  int grid = 101;                        // helmholtz interior grid edge

  std::array<double, 2> xlim{0.0, 1.0};
  std::array<double, 2> ylim{0.0, 1.0};  // second axis: y or t

  std::vector<component_spec> comps;

  int input_dim() const { return id == problem_id::poisson1d ? 1 : 2; }

  bool has(comp_kind kind) const {
    for (const auto& c : comps)
      if (c.kind == kind) return true;
    return false;
  }
  int comp_index(comp_kind kind) const {
    for (std::size_t i = 0; i < comps.size(); ++i)
      if (comps[i].kind == kind) return int(i);
    throw precondition_error(std::string("problem has no component ") +
                             comp_to_string(kind));
  }
  const component_spec& comp(comp_kind kind) const {
    return comps[std::size_t(comp_index(kind))];
  }

  void validate() const {
    if (comps.empty()) throw config_error("problem: no loss components");
    for (const auto& c : comps) {
      if (c.count <= 0) throw config_error("problem: component count must be positive");
      if (!(c.lambda > 0.0)) throw config_error("problem: lambda must be positive");
    }
    if (xlim[1] <= xlim[0] || ylim[1] <= ylim[0])
      throw config_error("problem: empty domain");
    switch (id) {
      case problem_id::poisson1d:
        if (k < 1) throw config_error("poisson: k must be >= 1");
        break;
      case problem_id::helmholtz2d:
        if (grid < 1) throw config_error("helmholtz: grid must be >= 1");
        break;
      case problem_id::allencahn1d:
        if (!(ac_d > 0.0)) throw config_error("allencahn: D must be positive");
        break;
      case problem_id::burgers1d:
        if (!(nu > 0.0)) throw config_error("burgers: viscosity must be positive");
        break;
      case problem_id::wave_operator:
        if (!(wave_c > 0.0)) throw config_error("wave: speed must be positive");
        if (n_modes < 1 || n_sensors < 2 || n_instances < 1)
          throw config_error("wave: bad instance geometry");
        break;
    }
  }
};

// Factories carry the benchmark defaults; callers may override fields before
// sampling (counts must stay consistent with grid/n_instances).

inline problem_spec make_poisson(int k) {
  problem_spec p;
  p.id = problem_id::poisson1d;
  p.k = k;
  p.xlim = {0.0, 1.0};
  p.comps = {{comp_kind::pde, 1.0, 1000}, {comp_kind::bc, 1.0, 2}};
  p.validate();
  return p;
}

inline problem_spec make_helmholtz(int grid = 101) {
  problem_spec p;
  p.id = problem_id::helmholtz2d;
  p.helm_k = 1.0;
  p.a1 = 1;
  p.a2 = 4;
  p.grid = grid;
  p.xlim = {-1.0, 1.0};
  p.ylim = {-1.0, 1.0};
  p.comps = {{comp_kind::pde, 1.0, std::ptrdiff_t(grid) * grid},
             {comp_kind::bc, 1.0, 200}};
  p.validate();
  return p;
}

inline problem_spec make_allencahn() {
  problem_spec p;
  p.id = problem_id::allencahn1d;
  p.ac_d = 1e-4;
  p.xlim = {-1.0, 1.0};
  p.ylim = {0.0, 1.0};
  p.comps = {{comp_kind::pde, 1.0, 25600}, {comp_kind::ic, 1.0, 512}};
  p.validate();
  return p;
}

inline problem_spec make_burgers() {
  problem_spec p;
  p.id = problem_id::burgers1d;
  p.nu = 0.01 / std::numbers::pi;
  p.xlim = {-1.0, 1.0};
  p.ylim = {0.0, 1.0};
  p.comps = {{comp_kind::pde, 1.0, 10000},
             {comp_kind::ic, 1.0, 100},
             {comp_kind::bc, 1.0, 200}};
  p.validate();
  return p;
}

// Per training instance: 2500 residual points, 100 boundary points, and the
// 101-sensor grid for both initial-condition operators.
inline problem_spec make_wave_operator(int n_instances = 1000) {
  problem_spec p;
  p.id = problem_id::wave_operator;
  p.wave_c = std::numbers::sqrt2;
  p.n_modes = 5;
  p.n_sensors = 101;
  p.n_instances = n_instances;
  p.xlim = {0.0, 1.0};
  p.ylim = {0.0, 1.0};
  const auto n = std::ptrdiff_t(n_instances);
  p.comps = {{comp_kind::pde, 1.0, n * 2500},
             {comp_kind::bc, 1.0, n * 100},
             {comp_kind::ic, 1.0, n * p.n_sensors},
             {comp_kind::ic_t, 1.0, n * p.n_sensors}};
  p.validate();
  return p;
}

// ---- reference solutions and source terms ----

inline double poisson_exact(int k, double x) {
  return std::sin(2.0 * k * std::numbers::pi * x * x);
}

// f = u'' of the manufactured solution.
inline double poisson_source(int k, double x) {
  const double a = 2.0 * k * std::numbers::pi;
  return 2.0 * a * std::cos(a * x * x) - (2.0 * a * x) * (2.0 * a * x) * std::sin(a * x * x);
}

inline double helmholtz_exact(const problem_spec& pr, double x, double y) {
  const double pi = std::numbers::pi;
  return std::sin(pr.a1 * pi * x) * std::sin(pr.a2 * pi * y);
}

inline double helmholtz_source(const problem_spec& pr, double x, double y) {
  const double pi = std::numbers::pi;
  const double w1 = pr.a1 * pi, w2 = pr.a2 * pi;
  return (pr.helm_k * pr.helm_k - w1 * w1 - w2 * w2) * std::sin(w1 * x) * std::sin(w2 * y);
}

inline double allencahn_ic(double x) {
  return x * x * std::cos(std::numbers::pi * x);
}

inline double burgers_ic(double x) { return -std::sin(std::numbers::pi * x); }

inline double wave_ic_value(const Eigen::VectorXd& b, double x) {
  double u = 0.0;
  for (std::ptrdiff_t n = 0; n < b.size(); ++n)
    u += b[n] * std::sin(double(n + 1) * std::numbers::pi * x);
  return u;
}

inline double wave_exact(const Eigen::VectorXd& b, double c, double x, double t) {
  double u = 0.0;
  for (std::ptrdiff_t n = 0; n < b.size(); ++n) {
    const double w = double(n + 1) * std::numbers::pi;
    u += b[n] * std::sin(w * x) * std::cos(w * c * t);
  }
  return u;
}

// ---- collocation sampling ----

struct component_points {
  Eigen::MatrixXd x;          // N x input_dim
  std::vector<int> instance;  // operator problems: instance tag per row
};

struct point_set {
  std::vector<component_points> comps;  // aligned with problem_spec.comps
};

namespace detail {

// 50 points per edge, cell-centered so corners never repeat.
inline Eigen::MatrixXd square_boundary(const problem_spec& pr, int count) {
  if (count % 4 != 0) throw config_error("boundary count must be divisible by 4");
  const int per = count / 4;
  const Eigen::VectorXd mx = midpoints(pr.xlim[0], pr.xlim[1], per);
  const Eigen::VectorXd my = midpoints(pr.ylim[0], pr.ylim[1], per);
  Eigen::MatrixXd b(count, 2);
  for (int i = 0; i < per; ++i) {
    b.row(0 * per + i) << pr.xlim[0], my[i];
    b.row(1 * per + i) << pr.xlim[1], my[i];
    b.row(2 * per + i) << mx[i], pr.ylim[0];
    b.row(3 * per + i) << mx[i], pr.ylim[1];
  }
  return b;
}

inline Eigen::Vector2d lo2(const problem_spec& pr) {
  return {pr.xlim[0], pr.ylim[0]};
}
inline Eigen::Vector2d hi2(const problem_spec& pr) {
  return {pr.xlim[1], pr.ylim[1]};
}

}  // namespace detail

// Draw order is fixed (components in spec order, instances outermost) so a
// seed pins the whole point set.
inline point_set sample_points(const problem_spec& pr, rng& gen) {
  pr.validate();
  point_set ps;
  ps.comps.resize(pr.comps.size());
  for (std::size_t ci = 0; ci < pr.comps.size(); ++ci) {
    const component_spec& c = pr.comps[ci];
    component_points& out = ps.comps[ci];
    const int n = int(c.count);
    switch (pr.id) {
      case problem_id::poisson1d:
        if (c.kind == comp_kind::pde) {
          out.x = interior_linspace(pr.xlim[0], pr.xlim[1], n);
        } else {
          out.x.resize(2, 1);
          out.x << pr.xlim[0], pr.xlim[1];
        }
        break;
      case problem_id::helmholtz2d:
        if (c.kind == comp_kind::pde) {
          if (std::ptrdiff_t(pr.grid) * pr.grid != c.count)
            throw config_error("helmholtz: pde count must equal grid^2");
          out.x = tensor_grid(interior_linspace(pr.xlim[0], pr.xlim[1], pr.grid),
                              interior_linspace(pr.ylim[0], pr.ylim[1], pr.grid));
        } else {
          out.x = detail::square_boundary(pr, n);
        }
        break;
      case problem_id::allencahn1d:
        if (c.kind == comp_kind::pde) {
          out.x = latin_hypercube(gen, n, detail::lo2(pr), detail::hi2(pr));
        } else {
          out.x.setZero(n, 2);
          out.x.col(0) = linspace(pr.xlim[0], pr.xlim[1], n);
        }
        break;
      case problem_id::burgers1d:
        if (c.kind == comp_kind::pde) {
          out.x = latin_hypercube(gen, n, detail::lo2(pr), detail::hi2(pr));
        } else if (c.kind == comp_kind::ic) {
          out.x.setZero(n, 2);
          out.x.col(0) = linspace(pr.xlim[0], pr.xlim[1], n);
        } else {
          if (n % 2 != 0) throw config_error("burgers: bc count must be even");
          out.x.resize(n, 2);
          for (int i = 0; i < n / 2; ++i)
            out.x.row(i) << pr.xlim[0], gen.uniform(pr.ylim[0], pr.ylim[1]);
          for (int i = n / 2; i < n; ++i)
            out.x.row(i) << pr.xlim[1], gen.uniform(pr.ylim[0], pr.ylim[1]);
        }
        break;
      case problem_id::wave_operator: {
        const int per = n / pr.n_instances;
        if (std::ptrdiff_t(per) * pr.n_instances != c.count)
          throw config_error("wave: count must be divisible by n_instances");
        out.x.resize(n, 2);
        out.instance.resize(std::size_t(n));
        const Eigen::VectorXd sensors = linspace(pr.xlim[0], pr.xlim[1], pr.n_sensors);
        for (int inst = 0; inst < pr.n_instances; ++inst) {
          const int base = inst * per;
          for (int i = 0; i < per; ++i) out.instance[std::size_t(base + i)] = inst;
          switch (c.kind) {
            case comp_kind::pde:
              for (int i = 0; i < per; ++i)
                out.x.row(base + i) << gen.uniform(pr.xlim[0], pr.xlim[1]),
                    gen.uniform(pr.ylim[0], pr.ylim[1]);
              break;
            case comp_kind::bc:
              if (per % 2 != 0) throw config_error("wave: bc count per instance must be even");
              for (int i = 0; i < per / 2; ++i)
                out.x.row(base + i) << pr.xlim[0], gen.uniform(pr.ylim[0], pr.ylim[1]);
              for (int i = per / 2; i < per; ++i)
                out.x.row(base + i) << pr.xlim[1], gen.uniform(pr.ylim[0], pr.ylim[1]);
              break;
            case comp_kind::ic:
            case comp_kind::ic_t:
              if (per != pr.n_sensors)
                throw config_error("wave: ic count per instance must equal n_sensors");
              for (int i = 0; i < per; ++i) out.x.row(base + i) << sensors[i], pr.ylim[0];
              break;
            default:
              throw precondition_error("wave: unsupported component");
          }
        }
        break;
      }
    }
    if (out.x.rows() != c.count)
      throw precondition_error("sample_points: count mismatch");
  }
  return ps;
}

// ---- operator-learning instances ----

struct operator_set {
  Eigen::MatrixXd b;         // n x n_modes coefficients
  Eigen::MatrixXd sensors;   // n x n_sensors initial-condition values
  Eigen::VectorXd sensor_x;  // the sensor grid
};

inline operator_set sample_operator_instances(const problem_spec& pr, int n, rng& gen) {
  if (n < 1) throw precondition_error("sample_operator_instances: n must be >= 1");
  operator_set s;
  s.sensor_x = linspace(pr.xlim[0], pr.xlim[1], pr.n_sensors);
  s.b.resize(n, pr.n_modes);
  s.sensors.resize(n, pr.n_sensors);
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < pr.n_modes; ++m) s.b(i, m) = gen.normal();
    for (int j = 0; j < pr.n_sensors; ++j)
      s.sensors(i, j) = wave_ic_value(s.b.row(i).transpose(), s.sensor_x[j]);
  }
  return s;
}

// Per-row targets for the wave zero-order IC component.
inline Eigen::VectorXd ic_targets(const problem_spec& pr, const operator_set& ops,
                                  const component_points& cp) {
  if (cp.instance.size() != std::size_t(cp.x.rows()))
    throw shape_error("ic_targets: missing instance tags");
  Eigen::VectorXd t(cp.x.rows());
  for (std::ptrdiff_t i = 0; i < cp.x.rows(); ++i) {
    const int inst = cp.instance[std::size_t(i)];
    if (inst < 0 || inst >= ops.b.rows()) throw shape_error("ic_targets: instance out of range");
    t[i] = wave_ic_value(ops.b.row(inst).transpose(), cp.x(i, 0));
  }
  (void)pr;
  return t;
}

// ---- residual operators ----

// Derivative columns each component needs from the network.
inline deriv_layout residual_layout(const problem_spec& pr, comp_kind kind) {
  switch (pr.id) {
    case problem_id::poisson1d:
      return kind == comp_kind::pde ? deriv_layout::full(1) : deriv_layout::value_only();
    case problem_id::helmholtz2d:
      return kind == comp_kind::pde ? deriv_layout::weighted({1.0, 1.0})
                                    : deriv_layout::value_only();
    case problem_id::allencahn1d:
    case problem_id::burgers1d:
      if (kind == comp_kind::pde) return deriv_layout{2, {hess_col::entry(0, 0)}};
      return deriv_layout::value_only();
    case problem_id::wave_operator:
      switch (kind) {
        case comp_kind::pde:
          return deriv_layout::weighted({-pr.wave_c * pr.wave_c, 1.0});
        case comp_kind::ic:
        case comp_kind::ic_t:
          // one shared forward pass serves both IC operators
          return deriv_layout::grad_only(2);
        default:
          return deriv_layout::value_only();
      }
  }
  throw precondition_error("residual_layout: bad problem");
}

namespace detail {

inline void check_in_domain(const problem_spec& pr, const Eigen::MatrixXd& pts) {
  const double tx = 1e-12 * (pr.xlim[1] - pr.xlim[0]);
  const double ty = 1e-12 * (pr.ylim[1] - pr.ylim[0]);
  for (std::ptrdiff_t i = 0; i < pts.rows(); ++i) {
    if (pts(i, 0) < pr.xlim[0] - tx || pts(i, 0) > pr.xlim[1] + tx)
      throw domain_error("point outside domain");
    if (pts.cols() > 1 && (pts(i, 1) < pr.ylim[0] - ty || pts(i, 1) > pr.ylim[1] + ty))
      throw domain_error("point outside domain");
  }
}

inline void check_layout(const net_out& o, const deriv_layout& want) {
  const col_tables T = col_tables::make(want);
  bool ok = o.T != nullptr && o.T->C == T.C && o.T->gdim == T.gdim &&
            o.T->hterms.size() == T.hterms.size();
  for (std::size_t c = 0; ok && c < T.hterms.size(); ++c) {
    ok = o.T->hterms[c].size() == T.hterms[c].size();
    for (std::size_t j = 0; ok && j < T.hterms[c].size(); ++j)
      ok = o.T->hterms[c][j].k == T.hterms[c][j].k &&
           o.T->hterms[c][j].l == T.hterms[c][j].l &&
           o.T->hterms[c][j].coef == T.hterms[c][j].coef;
  }
  if (!ok) throw shape_error("residual_nodes: network output layout mismatch");
}

}  // namespace detail

// Builds differentiable residual nodes for one component batch. `o` must come
// from a forward pass with residual_layout(pr, kind); `targets` carries the
// per-row IC values for the wave operator.
inline void residual_nodes(diff_graph& g, const problem_spec& pr, comp_kind kind,
                           const net_out& o, const Eigen::MatrixXd& pts,
                           std::vector<diff_value>& out,
                           const Eigen::VectorXd* targets = nullptr) {
  if (pts.cols() != pr.input_dim())
    throw shape_error("residual_nodes: bad point dimension");
  detail::check_in_domain(pr, pts);
  detail::check_layout(o, residual_layout(pr, kind));
  const int n = int(pts.rows());
  out.clear();
  out.reserve(std::size_t(n));
  switch (pr.id) {
    case problem_id::poisson1d:
      for (int p = 0; p < n; ++p)
        out.push_back(kind == comp_kind::pde
                          ? g.sub(o.hess(p, 0), g.constant(poisson_source(pr.k, pts(p, 0))))
                          : o.val(p));
      return;
    case problem_id::helmholtz2d:
      for (int p = 0; p < n; ++p) {
        if (kind == comp_kind::pde) {
          const diff_value lap = o.hess(p, 0);
          const diff_value q = g.constant(helmholtz_source(pr, pts(p, 0), pts(p, 1)));
          out.push_back(g.sub(g.add(lap, g.smul(o.val(p), pr.helm_k * pr.helm_k)), q));
        } else {
          out.push_back(o.val(p));
        }
      }
      return;
    case problem_id::allencahn1d:
      for (int p = 0; p < n; ++p) {
        if (kind == comp_kind::pde) {
          const diff_value v = o.val(p);
          const diff_value react = g.smul(g.sub(v, g.mul(g.square(v), v)), 5.0);
          out.push_back(
              g.sub(g.sub(o.grad(p, 1), react), g.smul(o.hess(p, 0), pr.ac_d)));
        } else {
          out.push_back(g.sub(o.val(p), g.constant(allencahn_ic(pts(p, 0)))));
        }
      }
      return;
    case problem_id::burgers1d:
      for (int p = 0; p < n; ++p) {
        if (kind == comp_kind::pde) {
          const diff_value v = o.val(p);
          out.push_back(g.add(o.grad(p, 1), g.sub(g.mul(v, o.grad(p, 0)),
                                                  g.smul(o.hess(p, 0), pr.nu))));
        } else if (kind == comp_kind::ic) {
          out.push_back(g.sub(o.val(p), g.constant(burgers_ic(pts(p, 0)))));
        } else {
          out.push_back(o.val(p));
        }
      }
      return;
    case problem_id::wave_operator:
      if (kind == comp_kind::ic && (targets == nullptr || targets->size() != n))
        throw shape_error("residual_nodes: wave ic needs per-row targets");
      for (int p = 0; p < n; ++p) {
        switch (kind) {
          case comp_kind::pde:
            out.push_back(o.hess(p, 0));  // u_tt - c^2 u_xx via the weighted column
            break;
          case comp_kind::bc:
            out.push_back(o.val(p));
            break;
          case comp_kind::ic:
            out.push_back(g.sub(o.val(p), g.constant((*targets)[p])));
            break;
          case comp_kind::ic_t:
            out.push_back(o.grad(p, 1));
            break;
          default:
            throw precondition_error("residual_nodes: unsupported wave component");
        }
      }
      return;
  }
  throw precondition_error("residual_nodes: bad problem");
}

// ---- plain numeric residuals (bypass path) ----

// The jet may come from the network (eval_with_input_derivatives) or from an
// analytic field; full-hessian mode is required for PDE components.
inline double residual_value(const problem_spec& pr, comp_kind kind,
                             const Eigen::VectorXd& x, const jet2& j,
                             double target = 0.0) {
  switch (pr.id) {
    case problem_id::poisson1d:
      return kind == comp_kind::pde ? j.hess(0, 0) - poisson_source(pr.k, x[0])
                                    : j.value;
    case problem_id::helmholtz2d:
      if (kind == comp_kind::pde)
        return j.hess(0, 0) + j.hess(1, 1) + pr.helm_k * pr.helm_k * j.value -
               helmholtz_source(pr, x[0], x[1]);
      return j.value;
    case problem_id::allencahn1d:
      if (kind == comp_kind::pde)
        return j.grad_in[1] - 5.0 * (j.value - j.value * j.value * j.value) -
               pr.ac_d * j.hess(0, 0);
      return j.value - allencahn_ic(x[0]);
    case problem_id::burgers1d:
      if (kind == comp_kind::pde)
        return j.grad_in[1] + j.value * j.grad_in[0] - pr.nu * j.hess(0, 0);
      if (kind == comp_kind::ic) return j.value - burgers_ic(x[0]);
      return j.value;
    case problem_id::wave_operator:
      switch (kind) {
        case comp_kind::pde:
          return j.hess(1, 1) - pr.wave_c * pr.wave_c * j.hess(0, 0);
        case comp_kind::bc: return j.value;
        case comp_kind::ic: return j.value - target;
        case comp_kind::ic_t: return j.grad_in[1];
        default: throw precondition_error("residual_value: unsupported wave component");
      }
  }
  throw precondition_error("residual_value: bad problem");
}

// Analytic jets of the closed-form reference solutions.

inline jet2 exact_jet(const problem_spec& pr, const Eigen::VectorXd& x) {
  jet2 j;
  j.mode = hess_mode::full;
  const double pi = std::numbers::pi;
  switch (pr.id) {
    case problem_id::poisson1d: {
      const double a = 2.0 * pr.k * pi, th = a * x[0] * x[0];
      j.value = std::sin(th);
      j.grad_in.resize(1);
      j.grad_in[0] = 2.0 * a * x[0] * std::cos(th);
      j.hess.resize(1, 1);
      j.hess(0, 0) = poisson_source(pr.k, x[0]);
      return j;
    }
    case problem_id::helmholtz2d: {
      const double w1 = pr.a1 * pi, w2 = pr.a2 * pi;
      const double sx = std::sin(w1 * x[0]), cx = std::cos(w1 * x[0]);
      const double sy = std::sin(w2 * x[1]), cy = std::cos(w2 * x[1]);
      j.value = sx * sy;
      j.grad_in.resize(2);
      j.grad_in << w1 * cx * sy, w2 * sx * cy;
      j.hess.resize(2, 2);
      j.hess(0, 0) = -w1 * w1 * sx * sy;
      j.hess(1, 1) = -w2 * w2 * sx * sy;
      j.hess(0, 1) = j.hess(1, 0) = w1 * w2 * cx * cy;
      return j;
    }
    default:
      throw precondition_error("exact_jet: no closed form for this problem");
  }
}

inline jet2 wave_exact_jet(const problem_spec& pr, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& x) {
  jet2 j;
  j.mode = hess_mode::full;
  j.grad_in.setZero(2);
  j.hess.setZero(2, 2);
  for (std::ptrdiff_t n = 0; n < b.size(); ++n) {
    const double w = double(n + 1) * std::numbers::pi, wc = w * pr.wave_c;
    const double sx = std::sin(w * x[0]), cx = std::cos(w * x[0]);
    const double st = std::sin(wc * x[1]), ct = std::cos(wc * x[1]);
    j.value += b[n] * sx * ct;
    j.grad_in[0] += b[n] * w * cx * ct;
    j.grad_in[1] += -b[n] * wc * sx * st;
    j.hess(0, 0) += -b[n] * w * w * sx * ct;
    j.hess(1, 1) += -b[n] * wc * wc * sx * ct;
    j.hess(0, 1) += -b[n] * w * wc * cx * st;
  }
  j.hess(1, 0) = j.hess(0, 1);
  return j;
}

// ---- error metrics ----

inline double relative_l2(const Eigen::VectorXd& pred, const Eigen::VectorXd& ref) {
  if (pred.size() != ref.size()) throw shape_error("relative_l2: length mismatch");
  if (pred.size() == 0) throw degenerate_batch_error("relative_l2: empty vectors");
  std::vector<double> num(std::size_t(pred.size())), den(std::size_t(pred.size()));
  for (std::ptrdiff_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - ref[i];
    num[std::size_t(i)] = d * d;
    den[std::size_t(i)] = ref[i] * ref[i];
  }
  const double nn = pairwise_sum(num), dd = pairwise_sum(den);
  if (!(dd > 0.0)) throw precondition_error("relative_l2: zero-norm reference");
  return std::sqrt(nn / dd);
}

// Operator problems report the mean of per-instance relative errors;
// rows index instances.
inline double mean_relative_l2(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref) {
  if (pred.rows() != ref.rows() || pred.cols() != ref.cols())
    throw shape_error("mean_relative_l2: shape mismatch");
  if (pred.rows() == 0) throw degenerate_batch_error("mean_relative_l2: no instances");
  std::vector<double> errs(std::size_t(pred.rows()));
  for (std::ptrdiff_t i = 0; i < pred.rows(); ++i)
    errs[std::size_t(i)] = relative_l2(pred.row(i).transpose(), ref.row(i).transpose());
  return pairwise_sum(errs) / double(pred.rows());
}

// ---- evaluation grids ----

inline Eigen::MatrixXd test_grid(const problem_spec& pr) {
  switch (pr.id) {
    case problem_id::poisson1d:
      return linspace(pr.xlim[0], pr.xlim[1], 10000);
    default:
      return tensor_grid(linspace(pr.xlim[0], pr.xlim[1], 101),
                         linspace(pr.ylim[0], pr.ylim[1], 101));
  }
}

inline Eigen::VectorXd reference_values(const problem_spec& pr, const Eigen::MatrixXd& pts) {
  Eigen::VectorXd u(pts.rows());
  switch (pr.id) {
    case problem_id::poisson1d:
      for (std::ptrdiff_t i = 0; i < pts.rows(); ++i)
        u[i] = poisson_exact(pr.k, pts(i, 0));
      return u;
    case problem_id::helmholtz2d:
      for (std::ptrdiff_t i = 0; i < pts.rows(); ++i)
        u[i] = helmholtz_exact(pr, pts(i, 0), pts(i, 1));
      return u;
    default:
      throw precondition_error("reference_values: use the oracle solver for this problem");
  }
}

inline Eigen::VectorXd wave_reference(const problem_spec& pr, const Eigen::VectorXd& b,
                                      const Eigen::MatrixXd& pts) {
  Eigen::VectorXd u(pts.rows());
  for (std::ptrdiff_t i = 0; i < pts.rows(); ++i)
    u[i] = wave_exact(b, pr.wave_c, pts(i, 0), pts(i, 1));
  return u;
}

}  // namespace brdr
