#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "brdr/params.hpp"
#include "brdr/problems.hpp"

using namespace brdr;

namespace {

constexpr double kpi = 3.14159265358979323846;

using field = std::function<double(const Eigen::VectorXd&)>;

param_store<double> net(const std::string& desc, unsigned long long seed) {
  rng g(seed);
  return init_params(parse_arch(desc), g);
}

// Fourth-order central stencils.
double fd1(const field& f, Eigen::VectorXd x, int k, double h) {
  auto at = [&](double d) {
    Eigen::VectorXd y = x;
    y[k] += d;
    return f(y);
  };
  return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

double fd2(const field& f, Eigen::VectorXd x, int k, double h) {
  auto at = [&](double d) {
    Eigen::VectorXd y = x;
    y[k] += d;
    return f(y);
  };
  return (-at(2 * h) + 16 * at(h) - 30 * at(0) + 16 * at(-h) - at(-2 * h)) /
         (12 * h * h);
}

double fd_mixed(const field& f, const Eigen::VectorXd& x, int k, int l, double h) {
  field inner = [&](const Eigen::VectorXd& y) { return fd1(f, y, l, h); };
  return fd1(inner, x, k, h);
}

// Runs the same forward/residual path the trainer uses.
std::vector<double> graph_residuals(const problem_spec& pr, comp_kind kind,
                                    const param_store<double>& P,
                                    const Eigen::MatrixXd& sensors,
                                    const Eigen::MatrixXd& coords,
                                    const Eigen::VectorXd* targets = nullptr) {
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
  std::vector<double> v;
  for (const auto& r : rs) v.push_back(r.value());
  return v;
}

jet2 net_jet(const param_store<double>& P, const Eigen::VectorXd& in) {
  diff_graph g;
  return eval_with_input_derivatives(g, P, in, 2).numeric;
}

TEST(problem_tags, round_trip) {
  for (problem_id id :
       {problem_id::poisson1d, problem_id::helmholtz2d, problem_id::allencahn1d,
        problem_id::burgers1d, problem_id::wave_operator})
    EXPECT_EQ(parse_problem(problem_to_string(id)), id);
  EXPECT_THROW(parse_problem("kdv"), config_error);
  EXPECT_STREQ(comp_to_string(comp_kind::ic_t), "ic_t");
}

TEST(factories, benchmark_defaults) {
  const problem_spec po = make_poisson(2);
  EXPECT_EQ(po.comp(comp_kind::pde).count, 1000);
  EXPECT_EQ(po.comp(comp_kind::bc).count, 2);
  EXPECT_EQ(po.input_dim(), 1);

  const problem_spec he = make_helmholtz();
  EXPECT_EQ(he.comp(comp_kind::pde).count, 101 * 101);
  EXPECT_EQ(he.comp(comp_kind::bc).count, 200);
  EXPECT_DOUBLE_EQ(he.xlim[0], -1.0);
  EXPECT_EQ(he.a2, 4);

  const problem_spec ac = make_allencahn();
  EXPECT_EQ(ac.comp(comp_kind::pde).count, 25600);
  EXPECT_EQ(ac.comp(comp_kind::ic).count, 512);
  EXPECT_DOUBLE_EQ(ac.ac_d, 1e-4);
  EXPECT_FALSE(ac.has(comp_kind::bc));

  const problem_spec bu = make_burgers();
  EXPECT_DOUBLE_EQ(bu.nu, 0.01 / kpi);
  EXPECT_EQ(bu.comp(comp_kind::pde).count, 10000);
  EXPECT_EQ(bu.comp(comp_kind::ic).count, 100);
  EXPECT_EQ(bu.comp(comp_kind::bc).count, 200);

  const problem_spec wv = make_wave_operator(200);
  EXPECT_DOUBLE_EQ(wv.wave_c * wv.wave_c, 2.0);
  EXPECT_EQ(wv.comp(comp_kind::pde).count, 200 * 2500);
  EXPECT_EQ(wv.comp(comp_kind::bc).count, 200 * 100);
  EXPECT_EQ(wv.comp(comp_kind::ic).count, 200 * 101);
  EXPECT_EQ(wv.comp(comp_kind::ic_t).count, 200 * 101);

  EXPECT_THROW(make_poisson(0), config_error);
  problem_spec bad = make_burgers();
  bad.nu = 0.0;
  EXPECT_THROW(bad.validate(), config_error);
  bad = make_allencahn();
  bad.comps[0].lambda = -1.0;
  EXPECT_THROW(bad.validate(), config_error);
}

TEST(poisson, exact_endpoints_and_source) {
  EXPECT_EQ(poisson_exact(2, 0.0), 0.0);
  EXPECT_LT(std::abs(poisson_exact(2, 1.0)), 1e-12);
  field u = [](const Eigen::VectorXd& x) { return poisson_exact(2, x[0]); };
  for (double x : {0.13, 0.5, 0.82}) {
    Eigen::VectorXd p(1);
    p << x;
    const double num = fd2(u, p, 0, 1e-3);
    const double ana = poisson_source(2, x);
    EXPECT_LT(std::abs(num - ana) / std::max(std::abs(ana), 1.0), 1e-6);
  }
}

TEST(helmholtz, source_identity) {
  const problem_spec pr = make_helmholtz();
  EXPECT_LT(std::abs(helmholtz_source(pr, 0.5, 0.5)), 1e-12);
  const double q = helmholtz_source(pr, 0.3, -0.7);
  const double want = (1.0 - kpi * kpi - 16.0 * kpi * kpi) * std::sin(kpi * 0.3) *
                      std::sin(4.0 * kpi * -0.7);
  EXPECT_NEAR(q, want, 1e-12 * std::abs(want));
}

TEST(exact_jets, match_stencils) {
  const problem_spec po = make_poisson(2);
  Eigen::VectorXd x1(1);
  x1 << 0.37;
  const jet2 jp = exact_jet(po, x1);
  field fu = [&](const Eigen::VectorXd& y) { return poisson_exact(po.k, y[0]); };
  EXPECT_NEAR(jp.grad_in[0], fd1(fu, x1, 0, 1e-3), 1e-6);
  EXPECT_NEAR(jp.hess(0, 0), fd2(fu, x1, 0, 1e-3), 1e-4);

  const problem_spec he = make_helmholtz();
  Eigen::VectorXd x2(2);
  x2 << 0.3, -0.41;
  const jet2 jh = exact_jet(he, x2);
  field fh = [&](const Eigen::VectorXd& y) { return helmholtz_exact(he, y[0], y[1]); };
  EXPECT_NEAR(jh.grad_in[0], fd1(fh, x2, 0, 1e-4), 1e-7);
  EXPECT_NEAR(jh.grad_in[1], fd1(fh, x2, 1, 1e-4), 1e-7);
  EXPECT_NEAR(jh.hess(0, 0), fd2(fh, x2, 0, 1e-3), 1e-5);
  EXPECT_NEAR(jh.hess(1, 1), fd2(fh, x2, 1, 1e-3), 1e-4);
  EXPECT_NEAR(jh.hess(0, 1), fd_mixed(fh, x2, 0, 1, 1e-3), 1e-5);

  const problem_spec wv = make_wave_operator(1);
  rng g(11);
  Eigen::VectorXd b(5);
  for (int i = 0; i < 5; ++i) b[i] = g.normal();
  Eigen::VectorXd xt(2);
  xt << 0.31, 0.62;
  const jet2 jw = wave_exact_jet(wv, b, xt);
  field fw = [&](const Eigen::VectorXd& y) {
    return wave_exact(b, wv.wave_c, y[0], y[1]);
  };
  EXPECT_NEAR(jw.grad_in[0], fd1(fw, xt, 0, 1e-4), 1e-7);
  EXPECT_NEAR(jw.grad_in[1], fd1(fw, xt, 1, 1e-4), 1e-7);
  EXPECT_NEAR(jw.hess(0, 0), fd2(fw, xt, 0, 1e-4), 1e-5);
  EXPECT_NEAR(jw.hess(1, 1), fd2(fw, xt, 1, 1e-4), 1e-5);
  EXPECT_NEAR(jw.hess(0, 1), fd_mixed(fw, xt, 0, 1, 1e-4), 1e-5);
}

// Reference solutions must annihilate their own residual operators.
TEST(bypass, residuals_vanish) {
  rng g(29);

  const problem_spec po = make_poisson(2);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd x(1);
    x << g.uniform(0.0, 1.0);
    EXPECT_LT(std::abs(residual_value(po, comp_kind::pde, x, exact_jet(po, x))), 1e-9);
  }
  for (double xb : {0.0, 1.0}) {
    Eigen::VectorXd x(1);
    x << xb;
    EXPECT_LT(std::abs(residual_value(po, comp_kind::bc, x, exact_jet(po, x))), 1e-12);
  }

  const problem_spec he = make_helmholtz();
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd x(2);
    x << g.uniform(-1.0, 1.0), g.uniform(-1.0, 1.0);
    EXPECT_LT(std::abs(residual_value(he, comp_kind::pde, x, exact_jet(he, x))), 1e-9);
  }
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd x(2);
    x << (i % 2 == 0 ? -1.0 : 1.0), g.uniform(-1.0, 1.0);
    EXPECT_LT(std::abs(residual_value(he, comp_kind::bc, x, exact_jet(he, x))), 1e-12);
  }

  const problem_spec wv = make_wave_operator(1);
  Eigen::VectorXd b(5);
  for (int i = 0; i < 5; ++i) b[i] = g.normal();
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd x(2);
    x << g.uniform(0.0, 1.0), g.uniform(0.0, 1.0);
    EXPECT_LT(std::abs(residual_value(wv, comp_kind::pde, x, wave_exact_jet(wv, b, x))),
              1e-10);
  }
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(2);
    x << g.uniform(0.0, 1.0), 0.0;
    const double u0 = wave_ic_value(b, x[0]);
    EXPECT_LT(std::abs(residual_value(wv, comp_kind::ic, x, wave_exact_jet(wv, b, x), u0)),
              1e-14);
    EXPECT_EQ(residual_value(wv, comp_kind::ic_t, x, wave_exact_jet(wv, b, x)), 0.0);
    Eigen::VectorXd xb(2);
    xb << (i % 2 == 0 ? 0.0 : 1.0), g.uniform(0.0, 1.0);
    EXPECT_LT(std::abs(residual_value(wv, comp_kind::bc, xb, wave_exact_jet(wv, b, xb))),
              1e-13);
  }
}

TEST(allencahn, duplicate_residual_and_graph_path) {
  const problem_spec pr = make_allencahn();
  const param_store<double> P = net("mfcn:in=2,width=8,depth=2,fourier=4", 17);
  rng g(5);
  Eigen::MatrixXd pts(5, 2), sensors;
  for (int i = 0; i < 5; ++i)
    pts.row(i) << g.uniform(-1.0, 1.0), g.uniform(0.0, 1.0);
  const std::vector<double> rg = graph_residuals(pr, comp_kind::pde, P, sensors, pts);
  for (int i = 0; i < 5; ++i) {
    const jet2 j = net_jet(P, pts.row(i).transpose());
    const double u = j.value;
    // independent transcription of du/dt - 5(u - u^3) - D d2u/dx2
    const double hand = j.grad_in[1] - 5.0 * (u - u * u * u) - 1e-4 * j.hess(0, 0);
    EXPECT_NEAR(residual_value(pr, comp_kind::pde, pts.row(i).transpose(), j), hand,
                1e-12);
    EXPECT_NEAR(rg[std::size_t(i)], hand, 1e-12);
  }
  Eigen::MatrixXd ic(4, 2);
  ic << -1.0, 0.0, -0.3, 0.0, 0.4, 0.0, 1.0, 0.0;
  const std::vector<double> ri = graph_residuals(pr, comp_kind::ic, P, sensors, ic);
  for (int i = 0; i < 4; ++i) {
    const jet2 j = net_jet(P, ic.row(i).transpose());
    const double x = ic(i, 0);
    EXPECT_NEAR(ri[std::size_t(i)], j.value - x * x * std::cos(kpi * x), 1e-12);
  }
}

TEST(burgers, residual_paths) {
  const problem_spec pr = make_burgers();
  const param_store<double> P = net("mfcn:in=2,width=8,depth=2", 23);
  rng g(7);
  Eigen::MatrixXd pts(6, 2), sensors;
  for (int i = 0; i < 6; ++i)
    pts.row(i) << g.uniform(-1.0, 1.0), g.uniform(0.0, 1.0);
  const std::vector<double> rg = graph_residuals(pr, comp_kind::pde, P, sensors, pts);
  for (int i = 0; i < 6; ++i) {
    const jet2 j = net_jet(P, pts.row(i).transpose());
    const double hand =
        j.grad_in[1] + j.value * j.grad_in[0] - (0.01 / kpi) * j.hess(0, 0);
    EXPECT_NEAR(rg[std::size_t(i)], hand, 1e-12);
  }
  Eigen::MatrixXd ic(3, 2);
  ic << -0.5, 0.0, 0.0, 0.0, 0.8, 0.0;
  const std::vector<double> ri = graph_residuals(pr, comp_kind::ic, P, sensors, ic);
  for (int i = 0; i < 3; ++i) {
    const jet2 j = net_jet(P, ic.row(i).transpose());
    EXPECT_NEAR(ri[std::size_t(i)], j.value + std::sin(kpi * ic(i, 0)), 1e-12);
  }
  Eigen::MatrixXd bc(2, 2);
  bc << -1.0, 0.3, 1.0, 0.7;
  const std::vector<double> rb = graph_residuals(pr, comp_kind::bc, P, sensors, bc);
  for (int i = 0; i < 2; ++i)
    EXPECT_NEAR(rb[std::size_t(i)], net_jet(P, bc.row(i).transpose()).value, 1e-12);
}

TEST(poisson_helmholtz, residual_paths) {
  const problem_spec po = make_poisson(2);
  const param_store<double> Pp = net("mfcn:in=1,width=8,depth=2", 31);
  Eigen::MatrixXd xp(4, 1), sensors;
  xp << 0.1, 0.35, 0.6, 0.95;
  const std::vector<double> rp = graph_residuals(po, comp_kind::pde, Pp, sensors, xp);
  for (int i = 0; i < 4; ++i) {
    const jet2 j = net_jet(Pp, xp.row(i).transpose());
    EXPECT_NEAR(rp[std::size_t(i)], j.hess(0, 0) - poisson_source(2, xp(i, 0)), 1e-12);
  }

  const problem_spec he = make_helmholtz();
  const param_store<double> Ph = net("mfcn:in=2,width=8,depth=2", 37);
  rng g(13);
  Eigen::MatrixXd xh(5, 2);
  for (int i = 0; i < 5; ++i)
    xh.row(i) << g.uniform(-1.0, 1.0), g.uniform(-1.0, 1.0);
  const std::vector<double> rh = graph_residuals(he, comp_kind::pde, Ph, sensors, xh);
  for (int i = 0; i < 5; ++i) {
    const jet2 j = net_jet(Ph, xh.row(i).transpose());
    const double hand = j.hess(0, 0) + j.hess(1, 1) + j.value -
                        helmholtz_source(he, xh(i, 0), xh(i, 1));
    EXPECT_NEAR(rh[std::size_t(i)], hand, 1e-10);
  }
}

TEST(wave, residual_paths) {
  const problem_spec pr = make_wave_operator(2);
  const param_store<double> P =
      net("mdeeponet:branch=101,in=2,width=8,depth=1,latent=4", 41);
  rng g(19);
  const operator_set ops = sample_operator_instances(pr, 2, g);
  Eigen::MatrixXd coords(4, 2), sensors(4, 101);
  for (int i = 0; i < 4; ++i) {
    coords.row(i) << g.uniform(0.0, 1.0), g.uniform(0.0, 1.0);
    sensors.row(i) = ops.sensors.row(i % 2);
  }
  const std::vector<double> rg = graph_residuals(pr, comp_kind::pde, P, sensors, coords);
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd in(103);
    in << sensors.row(i).transpose(), coords.row(i).transpose();
    const jet2 j = net_jet(P, in);
    EXPECT_NEAR(rg[std::size_t(i)], j.hess(1, 1) - 2.0 * j.hess(0, 0), 1e-10);
  }

  Eigen::MatrixXd ic_pts(3, 2), ic_sens(3, 101);
  Eigen::VectorXd targets(3);
  for (int i = 0; i < 3; ++i) {
    ic_pts.row(i) << ops.sensor_x[i * 30], 0.0;
    ic_sens.row(i) = ops.sensors.row(0);
    targets[i] = ops.sensors(0, i * 30);
  }
  const std::vector<double> ric =
      graph_residuals(pr, comp_kind::ic, P, ic_sens, ic_pts, &targets);
  const std::vector<double> rict =
      graph_residuals(pr, comp_kind::ic_t, P, ic_sens, ic_pts);
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd in(103);
    in << ic_sens.row(i).transpose(), ic_pts.row(i).transpose();
    const jet2 j = net_jet(P, in);
    EXPECT_NEAR(ric[std::size_t(i)], j.value - targets[i], 1e-12);
    EXPECT_NEAR(rict[std::size_t(i)], j.grad_in[1], 1e-12);
  }
}

TEST(wave, exact_satisfies_pde) {
  const problem_spec pr = make_wave_operator(1);
  rng g(43);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd b(5);
    for (int i = 0; i < 5; ++i) b[i] = g.normal();
    Eigen::VectorXd x(2);
    x << g.uniform(0.0, 1.0), g.uniform(0.0, 1.0);
    field f = [&](const Eigen::VectorXd& y) {
      return wave_exact(b, pr.wave_c, y[0], y[1]);
    };
    const double utt = fd2(f, x, 1, 1e-4);
    const double uxx = fd2(f, x, 0, 1e-4);
    EXPECT_LT(std::abs(utt - 2.0 * uxx), 1e-5);
  }
}

TEST(sampling, lhs_stratification) {
  problem_spec pr = make_burgers();
  pr.comps[0].count = 256;
  pr.comps[1].count = 16;
  pr.comps[2].count = 8;
  rng g(3);
  const point_set ps = sample_points(pr, g);
  const Eigen::MatrixXd& pde = ps.comps[0].x;
  ASSERT_EQ(pde.rows(), 256);
  for (int d = 0; d < 2; ++d) {
    const double lo = d == 0 ? -1.0 : 0.0, hi = 1.0;
    std::vector<int> bin(256, 0);
    for (int i = 0; i < 256; ++i) {
      const int bi = int(std::floor((pde(i, d) - lo) / (hi - lo) * 256.0));
      ASSERT_GE(bi, 0);
      ASSERT_LT(bi, 256);
      ++bin[std::size_t(bi)];
    }
    for (int i = 0; i < 256; ++i) EXPECT_EQ(bin[std::size_t(i)], 1);
  }
}

TEST(sampling, determinism) {
  const problem_spec pr = make_burgers();
  rng g1(77), g2(77), g3(78);
  const point_set a = sample_points(pr, g1);
  const point_set b = sample_points(pr, g2);
  const point_set c = sample_points(pr, g3);
  for (std::size_t i = 0; i < a.comps.size(); ++i)
    EXPECT_TRUE((a.comps[i].x.array() == b.comps[i].x.array()).all());
  EXPECT_FALSE((a.comps[0].x.array() == c.comps[0].x.array()).all());
}

TEST(sampling, geometry) {
  rng g(9);

  const problem_spec po = make_poisson(2);
  const point_set pp = sample_points(po, g);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_GT(pp.comps[0].x(i, 0), 0.0);
    EXPECT_LT(pp.comps[0].x(i, 0), 1.0);
  }
  EXPECT_EQ(pp.comps[1].x(0, 0), 0.0);
  EXPECT_EQ(pp.comps[1].x(1, 0), 1.0);

  const problem_spec he = make_helmholtz(11);
  const point_set ph = sample_points(he, g);
  ASSERT_EQ(ph.comps[0].x.rows(), 121);
  for (int i = 0; i < 121; ++i)
    for (int d = 0; d < 2; ++d) {
      EXPECT_GT(ph.comps[0].x(i, d), -1.0);
      EXPECT_LT(ph.comps[0].x(i, d), 1.0);
    }
  ASSERT_EQ(ph.comps[1].x.rows(), 200);
  for (int i = 0; i < 200; ++i) {
    const double x = ph.comps[1].x(i, 0), y = ph.comps[1].x(i, 1);
    const bool on_x = std::abs(x) == 1.0, on_y = std::abs(y) == 1.0;
    EXPECT_TRUE(on_x != on_y);  // cell-centered edges never hit corners
    EXPECT_LE(std::abs(x), 1.0);
    EXPECT_LE(std::abs(y), 1.0);
  }

  const problem_spec ac = make_allencahn();
  const point_set pa = sample_points(ac, g);
  ASSERT_EQ(pa.comps[1].x.rows(), 512);
  EXPECT_DOUBLE_EQ(pa.comps[1].x(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(pa.comps[1].x(511, 0), 1.0);
  for (int i = 0; i < 512; ++i) EXPECT_EQ(pa.comps[1].x(i, 1), 0.0);
  ASSERT_EQ(pa.comps[0].x.rows(), 25600);

  const problem_spec bu = make_burgers();
  const point_set pb = sample_points(bu, g);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(pb.comps[2].x(i, 0), -1.0);
  for (int i = 100; i < 200; ++i) EXPECT_EQ(pb.comps[2].x(i, 0), 1.0);
  for (int i = 0; i < 200; ++i) {
    EXPECT_GE(pb.comps[2].x(i, 1), 0.0);
    EXPECT_LE(pb.comps[2].x(i, 1), 1.0);
  }
}

TEST(sampling, wave_instances) {
  const problem_spec pr = make_wave_operator(3);
  rng g(15);
  const point_set ps = sample_points(pr, g);
  const component_points& pde = ps.comps[0];
  ASSERT_EQ(pde.x.rows(), 3 * 2500);
  for (int i = 0; i < 3 * 2500; ++i) {
    EXPECT_EQ(pde.instance[std::size_t(i)], i / 2500);
    EXPECT_GE(pde.x(i, 0), 0.0);
    EXPECT_LE(pde.x(i, 1), 1.0);
  }
  const component_points& bc = ps.comps[1];
  for (int inst = 0; inst < 3; ++inst)
    for (int i = 0; i < 100; ++i) {
      const int r = inst * 100 + i;
      EXPECT_EQ(bc.instance[std::size_t(r)], inst);
      EXPECT_EQ(bc.x(r, 0), i < 50 ? 0.0 : 1.0);
    }
  const component_points& ic = ps.comps[2];
  const Eigen::VectorXd grid = linspace(0.0, 1.0, 101);
  for (int inst = 0; inst < 3; ++inst)
    for (int i = 0; i < 101; ++i) {
      const int r = inst * 101 + i;
      EXPECT_EQ(ic.x(r, 0), grid[i]);
      EXPECT_EQ(ic.x(r, 1), 0.0);
    }
  EXPECT_TRUE((ps.comps[3].x.array() == ic.x.array()).all());
}

TEST(operator_instances, single_mode_and_stats) {
  const problem_spec pr = make_wave_operator(1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(5);
  b[0] = 1.0;
  EXPECT_NEAR(wave_ic_value(b, 0.25), std::sin(kpi * 0.25), 1e-15);
  EXPECT_NEAR(wave_exact(b, pr.wave_c, 0.25, 0.4),
              std::sin(kpi * 0.25) * std::cos(kpi * pr.wave_c * 0.4), 1e-15);

  rng g(55);
  const operator_set ops = sample_operator_instances(pr, 10000, g);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_EQ(ops.sensors(i, 0), 0.0);
    EXPECT_LT(std::abs(ops.sensors(i, 100)), 1e-14);
  }
  double sq = 0.0;
  for (int i = 0; i < 10000; ++i)
    for (int m = 0; m < 5; ++m) sq += ops.b(i, m) * ops.b(i, m);
  const double var = sq / (10000.0 * 5.0);
  EXPECT_NEAR(var, 1.0, 0.05);

  rng g1(66), g2(66);
  const operator_set o1 = sample_operator_instances(pr, 7, g1);
  const operator_set o2 = sample_operator_instances(pr, 7, g2);
  EXPECT_TRUE((o1.b.array() == o2.b.array()).all());
  EXPECT_TRUE((o1.sensors.array() == o2.sensors.array()).all());
}

TEST(ic_targets, match_sensor_values) {
  const problem_spec pr = make_wave_operator(3);
  rng g1(21), g2(22);
  const operator_set ops = sample_operator_instances(pr, 3, g1);
  const point_set ps = sample_points(pr, g2);
  const component_points& ic = ps.comps[std::size_t(pr.comp_index(comp_kind::ic))];
  const Eigen::VectorXd t = ic_targets(pr, ops, ic);
  for (int inst = 0; inst < 3; ++inst)
    for (int i = 0; i < 101; ++i)
      EXPECT_EQ(t[inst * 101 + i], ops.sensors(inst, i));
}

TEST(metrics, relative_l2) {
  Eigen::VectorXd ref(3), pred(3);
  ref << 1.0, -2.0, 2.0;
  EXPECT_EQ(relative_l2(ref, ref), 0.0);
  EXPECT_DOUBLE_EQ(relative_l2(2.0 * ref, ref), 1.0);
  pred << 1.0, -2.0, 2.5;
  EXPECT_DOUBLE_EQ(relative_l2(pred, ref), 0.5 / 3.0);
  EXPECT_THROW(relative_l2(pred, Eigen::VectorXd::Zero(3)), precondition_error);
  EXPECT_THROW(relative_l2(pred, Eigen::VectorXd::Ones(4)), shape_error);

  Eigen::MatrixXd R(2, 3), Q(2, 3);
  R.row(0) = ref.transpose();
  R.row(1) = ref.transpose();
  Q.row(0) = ref.transpose();
  Q.row(1) = 2.0 * ref.transpose();
  EXPECT_DOUBLE_EQ(mean_relative_l2(Q, R), 0.5);
}

TEST(grids, shapes_and_values) {
  const problem_spec po = make_poisson(2);
  const Eigen::MatrixXd gp = test_grid(po);
  ASSERT_EQ(gp.rows(), 10000);
  EXPECT_EQ(gp(0, 0), 0.0);
  EXPECT_EQ(gp(9999, 0), 1.0);
  const Eigen::VectorXd up = reference_values(po, gp);
  EXPECT_EQ(up[0], 0.0);

  const problem_spec he = make_helmholtz();
  const Eigen::MatrixXd gh = test_grid(he);
  ASSERT_EQ(gh.rows(), 101 * 101);
  EXPECT_EQ(gh(0, 0), -1.0);
  EXPECT_EQ(gh(101 * 101 - 1, 1), 1.0);
  const Eigen::VectorXd uh = reference_values(he, gh);
  EXPECT_NEAR(uh[50 * 101 + 50], 0.0, 1e-12);

  const problem_spec bu = make_burgers();
  EXPECT_THROW(reference_values(bu, test_grid(bu)), precondition_error);

  const problem_spec wv = make_wave_operator(1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(5);
  b[1] = 1.0;
  const Eigen::MatrixXd gw = test_grid(wv);
  const Eigen::VectorXd uw = wave_reference(wv, b, gw);
  EXPECT_NEAR(uw[0], 0.0, 1e-15);
}

TEST(guards, domain_and_layout) {
  const problem_spec po = make_poisson(2);
  const param_store<double> P = net("mfcn:in=1,width=4,depth=1", 3);
  Eigen::MatrixXd bad(1, 1), sensors;
  bad << 2.0;
  EXPECT_THROW(graph_residuals(po, comp_kind::pde, P, sensors, bad), domain_error);

  // full(2) jets where the helmholtz residual expects the weighted column
  const problem_spec he = make_helmholtz();
  const param_store<double> Ph = net("mfcn:in=2,width=4,depth=1", 5);
  Eigen::MatrixXd x(1, 2);
  x << 0.2, 0.3;
  diff_graph g;
  const deriv_layout lay = deriv_layout::full(2);
  const col_tables T = col_tables::make(lay);
  net_out o = g.use_owned_record(
      detail::make_owned_record<mfcn_eval<double>>(Ph, Ph.arch, lay, sensors, x), T);
  std::vector<diff_value> rs;
  EXPECT_THROW(residual_nodes(g, he, comp_kind::pde, o, x, rs), shape_error);

  const problem_spec wv = make_wave_operator(1);
  const param_store<double> Pw =
      net("mdeeponet:branch=101,in=2,width=4,depth=1,latent=2", 7);
  rng gg(1);
  const operator_set ops = sample_operator_instances(wv, 1, gg);
  Eigen::MatrixXd cs(1, 2), ss(1, 101);
  cs << 0.5, 0.0;
  ss.row(0) = ops.sensors.row(0);
  EXPECT_THROW(graph_residuals(wv, comp_kind::ic, Pw, ss, cs), shape_error);

  component_points cp;
  cp.x.resize(1, 2);
  cp.x << 0.5, 0.0;
  cp.instance = {4};
  EXPECT_THROW(ic_targets(wv, ops, cp), shape_error);
}

}  // namespace
