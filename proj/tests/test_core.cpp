#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "brdr/activation.hpp"
#include "brdr/common.hpp"
#include "brdr/jet.hpp"
#include "brdr/rng.hpp"
#include "brdr/sampling.hpp"

using namespace brdr;

TEST(errors, hierarchy) {
  EXPECT_THROW(throw shape_error("x"), error);
  EXPECT_THROW(throw config_error("x"), error);
  EXPECT_THROW(throw oracle_error("x"), error);
  try {
    throw divergence_error("blew up", 137);
  } catch (const divergence_error& e) {
    EXPECT_EQ(e.iteration, 137);
    EXPECT_NE(std::string(e.what()).find("137"), std::string::npos);
  }
}

TEST(pairwise, exact_integers) {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_EQ(pairwise_sum(v), 500500.0);
  std::vector<double> sq(100);
  std::iota(sq.begin(), sq.end(), 1.0);
  // sum of squares 1..100 = 338350
  EXPECT_EQ(pairwise_sum_sq(sq), 338350.0);
}

TEST(pairwise, matches_long_double_reference) {
  rng gen(3);
  std::vector<double> v(4097);
  for (auto& x : v) x = gen.uniform(-1.0, 1.0) * std::exp(gen.uniform(0.0, 10.0));
  long double ref = 0;
  for (double x : v) ref += (long double)x;
  EXPECT_NEAR(pairwise_sum(v), double(ref), 1e-9 * std::abs(double(ref)) + 1e-12);
}

TEST(pairwise, functor_form) {
  const double s = pairwise_reduce<double>(0, 17, [](std::size_t i) {
    return double(i);
  });
  EXPECT_EQ(s, 136.0);
}

TEST(fmt17, round_trips) {
  for (double x : {1.0 / 3.0, 0.1, 1e-300, 3.141592653589793, -2.5e17,
                   6.62607015e-34}) {
    EXPECT_EQ(std::strtod(fmt17(x).c_str(), nullptr), x);
  }
}

TEST(common, all_finite) {
  std::vector<double> ok{1.0, -2.0, 0.0};
  EXPECT_TRUE(all_finite(ok));
  std::vector<double> bad{1.0, std::nan(""), 0.0};
  EXPECT_FALSE(all_finite(bad));
  std::vector<double> inf{1.0, INFINITY};
  EXPECT_FALSE(all_finite(inf));
}

// mt19937_64 is fully specified by the standard, so these are frozen.
TEST(rng, frozen_bit_stream) {
  rng g(42);
  EXPECT_EQ(g.bits(), 13930160852258120406ull);
  EXPECT_EQ(g.bits(), 11788048577503494824ull);
  rng h(7);
  EXPECT_EQ(h.uniform(), 0.75438530415285798);
  EXPECT_EQ(h.uniform(), 0.94930120289264419);
}

TEST(rng, uniform_range_and_moments) {
  rng g(123);
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = g.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 10000.0, 0.5, 0.02);
  rng h(5);
  for (int i = 0; i < 100; ++i) {
    const double u = h.uniform(-3.0, 7.0);
    ASSERT_GE(u, -3.0);
    ASSERT_LT(u, 7.0);
  }
}

TEST(rng, normal_moments) {
  rng g(99);
  double s1 = 0, s2 = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double z = g.normal();
    s1 += z;
    s2 += z * z;
  }
  const double mean = s1 / n;
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(s2 / n - mean * mean, 1.0, 0.05);
}

TEST(rng, index_bounds_and_rejection) {
  rng g(17);
  for (int i = 0; i < 1000; ++i) ASSERT_LT(g.index(13), 13u);
  EXPECT_THROW(g.index(0), precondition_error);
}

TEST(rng, shuffle_is_permutation) {
  rng g(8);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  g.shuffle(v);
  auto s = v;
  std::sort(s.begin(), s.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(s[std::size_t(i)], i);
}

TEST(rng, draw_front_keeps_pool) {
  rng g(4);
  std::vector<std::size_t> pool(20);
  std::iota(pool.begin(), pool.end(), 0u);
  g.draw_front(pool, 5);
  auto s = pool;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(s[i], i);
  EXPECT_THROW(g.draw_front(pool, 21), precondition_error);
}

TEST(rng, deterministic_across_instances) {
  rng a(2024), b(2024);
  for (int i = 0; i < 32; ++i) EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(activation, tanh_table_values) {
  const activation& t = tanh_act();
  EXPECT_EQ(t.value(0.0), 0.0);
  EXPECT_EQ(t.d1(0.0), 1.0);
  EXPECT_EQ(t.d2(0.0), 0.0);
  EXPECT_EQ(t.d3(0.0), -2.0);
  EXPECT_NEAR(t.value(0.5), std::tanh(0.5), 1e-16);
}

TEST(activation, derivative_ladder_matches_fd) {
  const activation& t = tanh_act();
  const double h = 1e-5;
  for (double v : {-2.0, -0.7, 0.3, 1.9}) {
    EXPECT_NEAR(t.d1(v), (t.value(v + h) - t.value(v - h)) / (2 * h), 1e-9);
    EXPECT_NEAR(t.d2(v), (t.d1(v + h) - t.d1(v - h)) / (2 * h), 1e-9);
    EXPECT_NEAR(t.d3(v), (t.d2(v + h) - t.d2(v - h)) / (2 * h), 1e-8);
  }
}

TEST(activation, of_phi_identities) {
  for (double v : {-1.3, 0.2, 2.4}) {
    const double phi = std::tanh(v);
    EXPECT_NEAR(tanh_d1_of(phi), tanh_act().d1(v), 1e-14);
    EXPECT_NEAR(tanh_d2_of(phi), tanh_act().d2(v), 1e-14);
    EXPECT_NEAR(tanh_d3_of(phi), tanh_act().d3(v), 1e-13);
  }
}

TEST(activation, batched_double_accuracy_and_saturation) {
  const int n = 2001;
  Eigen::ArrayXd x(n), y(n);
  for (int i = 0; i < n; ++i) x[i] = -20.0 + 0.02 * i;
  x[0] = -800.0;
  x[n - 1] = 800.0;
  tanh_values(y.data(), x.data(), n);
  for (int i = 0; i < n; ++i) {
    // Relative away from zero; the exp form cancels near x=0 but stays well
    // under 1e-14 absolute there.
    const double ref = std::tanh(x[i]);
    ASSERT_LT(std::abs(y[i] - ref), 1e-11 * std::max(std::abs(ref), 1e-3))
        << "at x=" << x[i];
  }
  EXPECT_EQ(y[0], -1.0);
  EXPECT_EQ(y[n - 1], 1.0);
}

TEST(activation, batched_float_path) {
  const int n = 101;
  Eigen::ArrayXf x(n), y(n);
  for (int i = 0; i < n; ++i) x[i] = float(-5.0 + 0.1 * i);
  tanh_values(y.data(), x.data(), n);
  for (int i = 0; i < n; ++i)
    ASSERT_NEAR(double(y[i]), std::tanh(double(x[i])), 1e-6);
}

TEST(activation, unknown_name_throws) {
  EXPECT_THROW(act_by_name("relu"), config_error);
  EXPECT_EQ(std::string(act_by_name("tanh").name), "tanh");
}

TEST(jet, layout_counts_and_slots) {
  auto l = deriv_layout::diag(3);
  EXPECT_EQ(l.cols(), 7);
  EXPECT_EQ(l.value_col(), 0);
  EXPECT_EQ(l.grad_col(2), 3);
  EXPECT_EQ(l.hess_col_index(1), 5);
  EXPECT_THROW(l.grad_col(3), shape_error);
  EXPECT_THROW(l.hess_col_index(3), shape_error);

  auto f = deriv_layout::full(3);
  EXPECT_EQ(int(f.hess.size()), 6);
  EXPECT_EQ(f.cols(), 10);

  auto v = deriv_layout::value_only();
  EXPECT_EQ(v.cols(), 1);

  auto w = deriv_layout::weighted({-2.0, 1.0});
  EXPECT_EQ(w.gdim, 2);
  EXPECT_EQ(w.cols(), 4);
  ASSERT_EQ(w.hess.size(), 1u);
  ASSERT_EQ(w.hess[0].terms.size(), 2u);
  EXPECT_EQ(w.hess[0].terms[0].k, 0);
  EXPECT_EQ(w.hess[0].terms[0].coef, -2.0);
}

TEST(jet, weighted_skips_zeros) {
  auto w = deriv_layout::weighted({0.0, 3.0, 0.0});
  ASSERT_EQ(w.hess[0].terms.size(), 1u);
  EXPECT_EQ(w.hess[0].terms[0].k, 1);
  EXPECT_EQ(w.hess[0].terms[0].coef, 3.0);
}

TEST(jet, full_index_enumeration) {
  // d=3 upper triangle order: (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
  EXPECT_EQ(deriv_layout::full_index(3, 0, 0), 0);
  EXPECT_EQ(deriv_layout::full_index(3, 0, 1), 1);
  EXPECT_EQ(deriv_layout::full_index(3, 0, 2), 2);
  EXPECT_EQ(deriv_layout::full_index(3, 1, 1), 3);
  EXPECT_EQ(deriv_layout::full_index(3, 2, 1), 4);  // symmetric lookup
  EXPECT_EQ(deriv_layout::full_index(3, 2, 2), 5);
  EXPECT_THROW(deriv_layout::full_index(3, 0, 3), shape_error);
}

TEST(jet, entry_orders_indices) {
  auto c = hess_col::entry(2, 0);
  EXPECT_EQ(c.terms[0].k, 0);
  EXPECT_EQ(c.terms[0].l, 2);
}

TEST(jet, symmetry_invariant) {
  jet2 j;
  j.mode = hess_mode::full;
  j.hess.setZero(2, 2);
  j.hess(0, 1) = 1.0;
  j.hess(1, 0) = 1.0 + 1e-4;
  EXPECT_THROW(j.check_symmetric(), shape_error);
  j.hess(1, 0) = 1.0;
  EXPECT_NO_THROW(j.check_symmetric());
}

TEST(sampling, linspace_family) {
  auto v = linspace(-1.0, 1.0, 5);
  EXPECT_EQ(v[0], -1.0);
  EXPECT_EQ(v[2], 0.0);
  EXPECT_EQ(v[4], 1.0);
  auto in = interior_linspace(0.0, 1.0, 3);
  EXPECT_DOUBLE_EQ(in[0], 0.25);
  EXPECT_DOUBLE_EQ(in[1], 0.5);
  EXPECT_DOUBLE_EQ(in[2], 0.75);
  auto mid = midpoints(0.0, 1.0, 2);
  EXPECT_DOUBLE_EQ(mid[0], 0.25);
  EXPECT_DOUBLE_EQ(mid[1], 0.75);
  EXPECT_THROW(linspace(0, 1, 1), precondition_error);
}

TEST(sampling, tensor_grid_ordering) {
  Eigen::VectorXd xs(2), ys(3);
  xs << 0.0, 1.0;
  ys << 10.0, 20.0, 30.0;
  auto g = tensor_grid(xs, ys);
  ASSERT_EQ(g.rows(), 6);
  EXPECT_EQ(g(0, 0), 0.0);
  EXPECT_EQ(g(0, 1), 10.0);
  EXPECT_EQ(g(2, 1), 30.0);
  EXPECT_EQ(g(3, 0), 1.0);
  EXPECT_EQ(g(3, 1), 10.0);
}

TEST(sampling, iid_uniform_bounds) {
  rng g(11);
  Eigen::VectorXd lo(2), hi(2);
  lo << -1.0, 0.0;
  hi << 1.0, 2.0;
  auto p = iid_uniform(g, 500, lo, hi);
  for (int i = 0; i < 500; ++i) {
    ASSERT_GE(p(i, 0), -1.0);
    ASSERT_LT(p(i, 0), 1.0);
    ASSERT_GE(p(i, 1), 0.0);
    ASSERT_LT(p(i, 1), 2.0);
  }
}

// Every dimension must place exactly one point in each of the n strata.
TEST(sampling, latin_hypercube_stratification) {
  rng g(77);
  const int n = 64;
  Eigen::VectorXd lo(3), hi(3);
  lo << 0.0, -1.0, 5.0;
  hi << 1.0, 1.0, 6.0;
  auto p = latin_hypercube(g, n, lo, hi);
  for (int d = 0; d < 3; ++d) {
    std::vector<int> count(n, 0);
    for (int i = 0; i < n; ++i) {
      const double u = (p(i, d) - lo[d]) / (hi[d] - lo[d]);
      ASSERT_GE(u, 0.0);
      ASSERT_LT(u, 1.0);
      count[std::size_t(int(u * n))]++;
    }
    for (int s = 0; s < n; ++s) EXPECT_EQ(count[std::size_t(s)], 1);
  }
}

TEST(sampling, latin_hypercube_deterministic) {
  Eigen::VectorXd lo(1), hi(1);
  lo << 0.0;
  hi << 1.0;
  rng a(5), b(5);
  auto pa = latin_hypercube(a, 16, lo, hi);
  auto pb = latin_hypercube(b, 16, lo, hi);
  EXPECT_EQ((pa - pb).cwiseAbs().maxCoeff(), 0.0);
}
