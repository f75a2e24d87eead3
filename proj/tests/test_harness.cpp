#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "brdr/trainer.hpp"

using namespace brdr;

namespace {

std::string tmp_dir(const char* name) {
  const auto p = std::filesystem::temp_directory_path() / "brdr-harness" / name;
  std::filesystem::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  EXPECT_TRUE(bool(f)) << path;
  std::string s((std::istreambuf_iterator<char>(f)),
                std::istreambuf_iterator<char>());
  return s;
}

experiment_config tiny_poisson(const char* out, scheme_id scheme) {
  experiment_config c;
  c.problem = problem_id::poisson1d;
  c.poisson_k = 2;
  c.arch = "mfcn:in=1,width=8,depth=2";
  c.scheme = scheme;
  c.steps = 20;
  c.log_interval = 5;
  c.seed = 11;
  c.out_dir = tmp_dir(out);
  return c;
}

}  // namespace

TEST(metrics, header_contract) {
  const std::vector<std::string> want = {
      "iter",      "lr",        "s",           "loss_total",
      "loss_pde",  "loss_bc",   "loss_ic",     "loss_ic_t",
      "wratio_bc", "wratio_ic", "wratio_ic_t", "rel_l2"};
  EXPECT_EQ(metrics_header(), want);
}

TEST(metrics, round_trip_is_exact) {
  std::vector<metrics_record> recs(2);
  recs[0].iter = 100;
  recs[0].lr = 1.0 / 3.0;
  recs[0].s = 1.0 + 1e-15;
  recs[0].loss_total = 1.2345678901234567e-9;
  recs[0].loss_pde = 7e-300;
  recs[0].wratio_bc = 558.4;
  recs[0].rel_l2 = 0.1;
  recs[1].iter = 200;
  recs[1].loss_bc = -0.0;
  recs[1].rel_l2 = 2e-3;
  const std::string path = tmp_dir("roundtrip") + "/m.csv";
  emit_metrics(path, recs);
  const auto back = read_metrics(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].iter, 100);
  EXPECT_EQ(back[0].lr, recs[0].lr);
  EXPECT_EQ(back[0].s, recs[0].s);
  EXPECT_EQ(back[0].loss_total, recs[0].loss_total);
  EXPECT_EQ(back[0].loss_pde, recs[0].loss_pde);
  EXPECT_EQ(back[0].wratio_bc, recs[0].wratio_bc);
  EXPECT_EQ(back[1].iter, 200);
  EXPECT_EQ(back[1].rel_l2, recs[1].rel_l2);
}

TEST(metrics, empty_stream_gives_header_only_file) {
  const std::string path = tmp_dir("empty") + "/m.csv";
  emit_metrics(path, {});
  const std::string text = slurp(path);
  EXPECT_EQ(text,
            "iter,lr,s,loss_total,loss_pde,loss_bc,loss_ic,loss_ic_t,"
            "wratio_bc,wratio_ic,wratio_ic_t,rel_l2\n");
  EXPECT_TRUE(read_metrics(path).empty());
}

TEST(run, fixed_scheme_keeps_unit_weights_and_scale) {
  trainer tr(tiny_poisson("fixed", scheme_id::fixed));
  for (int t = 0; t < 20; ++t) {
    tr.step();
    EXPECT_EQ(tr.scale().s, 1.0);
    EXPECT_TRUE((tr.weights().w.array() == 1.0).all());
  }
}

TEST(run, brdr_short_invariants) {
  trainer tr(tiny_poisson("brdrshort", scheme_id::brdr));
  tr.step();
  // with fresh statistics the bias-corrected ratio is r^2/|r|^2 exactly
  for (std::ptrdiff_t i = 0; i < tr.last_irdr().size(); ++i)
    EXPECT_NEAR(tr.last_irdr()[i], 1.0, 1e-6);
  for (int t = 1; t < 50; ++t) {
    tr.step();
    EXPECT_NEAR(tr.weights().w.mean(), 1.0, 1e-6);
    EXPECT_GT(tr.weights().w.minCoeff(), 0.0);
    EXPECT_GT(tr.scale().s, 0.0);
  }
  EXPECT_GT(tr.max_mean_irdr(), 0.0);
}

TEST(run, same_seed_is_byte_identical) {
  auto ca = tiny_poisson("det-a", scheme_id::brdr);
  auto cb = tiny_poisson("det-b", scheme_id::brdr);
  const run_result ra = run_experiment(ca);
  const run_result rb = run_experiment(cb);
  EXPECT_FALSE(ra.diverged);
  const std::string a = slurp(ra.metrics_path);
  EXPECT_EQ(a, slurp(rb.metrics_path));
  EXPECT_GT(a.size(), 100u);
  // 20 steps, logging every 5, final row folded into the last interval
  EXPECT_EQ(ra.history.size(), 4u);
  EXPECT_EQ(ra.final_metrics.iter, 20);
  EXPECT_EQ(ra.final_metrics.rel_l2, rb.final_metrics.rel_l2);
}

TEST(run, divergence_abort_keeps_finite_checkpoint) {
  auto c = tiny_poisson("diverge", scheme_id::fixed);
  // saturated tanh layers keep everything polynomial in the weights, so the
  // step has to push |u| past sqrt(DBL_MAX) before r^2 overflows
  c.lr_base = 1e200;
  c.steps = 50;
  const run_result res = run_experiment(c);
  EXPECT_TRUE(res.diverged);
  EXPECT_GE(res.abort_iteration, 1);
  EXPECT_LT(res.abort_iteration, 50);
  checkpoint_meta meta;
  const param_store<double> p = read_checkpoint(res.checkpoint_path, &meta);
  EXPECT_TRUE(p.flat.allFinite());
  EXPECT_EQ(meta.seed, 11u);
  // metrics file exists and parses even when no interval completed
  (void)read_metrics(res.metrics_path);
}

TEST(run, final_checkpoint_matches_trained_params) {
  auto c = tiny_poisson("ckpt", scheme_id::brdr);
  trainer tr(c);
  const run_result res = tr.run();
  checkpoint_meta meta;
  const param_store<double> p = read_checkpoint(res.checkpoint_path, &meta);
  EXPECT_EQ(meta.iteration, 20);
  EXPECT_TRUE((p.flat.array() == tr.params().flat.array()).all());
}

TEST(run, snapshots_written_at_configured_iterations) {
  auto c = tiny_poisson("snaps", scheme_id::rba);
  c.steps = 6;
  c.log_interval = 10;
  c.snapshot_iters = {2, 4};
  const run_result res = run_experiment(c);
  EXPECT_FALSE(res.diverged);
  for (const char* tag : {"2", "4"}) {
    const csv_table w =
        read_csv(c.out_dir + "/weights-" + std::string(tag) + ".csv");
    ASSERT_EQ(w.header.size(), 3u);
    EXPECT_EQ(w.header[0], "x");
    EXPECT_EQ(w.header[1], "w");
    EXPECT_EQ(w.header[2], "log10_w");
    EXPECT_EQ(w.data.rows(), 1002);
    EXPECT_GT(w.data.col(1).minCoeff(), 0.0);
    const csv_table ir =
        read_csv(c.out_dir + "/irdr-" + std::string(tag) + ".csv");
    EXPECT_EQ(ir.header.back(), "irdr_mean");
    EXPECT_EQ(ir.data.rows(), 1002);
  }
  EXPECT_FALSE(std::filesystem::exists(c.out_dir + "/weights-3.csv"));
}

TEST(run, sa_weights_grow_and_rba_keeps_fixed_multipliers) {
  trainer sa(tiny_poisson("sa", scheme_id::sa));
  sa.step();
  const Eigen::VectorXd w1 = sa.weights().w;
  for (int t = 1; t < 10; ++t) sa.step();
  EXPECT_TRUE((sa.weights().w.array() >= w1.array()).all());

  auto rc = tiny_poisson("rba", scheme_id::rba);
  rc.rba_decay = 0.9;
  rc.rba_lr = 0.01;
  trainer rba(rc);
  for (int t = 0; t < 10; ++t) rba.step();
  const auto& pr = rba.problem();
  const std::ptrdiff_t np = pr.comp(comp_kind::pde).count;
  // non-pde points never receive residual updates
  EXPECT_TRUE((rba.weights().w.tail(rba.weights().size() - np).array() == 1.0).all());
  EXPECT_LE(rba.weights().w.head(np).maxCoeff(), 0.01 / (1.0 - 0.9) + 1e-12);
  EXPECT_GE(rba.weights().w.head(np).minCoeff(), 0.0);
}

TEST(run, helmholtz_smoke) {
  experiment_config c;
  c.problem = problem_id::helmholtz2d;
  c.helmholtz_grid = 6;
  c.arch = "mfcn:in=2,width=8,depth=1";
  c.scheme = scheme_id::brdr_plus;
  c.lambda_bc = 100.0;
  c.steps = 3;
  c.seed = 4;
  c.out_dir = tmp_dir("helm");
  const run_result res = run_experiment(c);
  EXPECT_FALSE(res.diverged);
  ASSERT_EQ(res.history.size(), 1u);
  EXPECT_GT(res.final_metrics.rel_l2, 0.0);
  EXPECT_GT(res.final_metrics.loss_pde, 0.0);
  EXPECT_GT(res.final_metrics.loss_bc, 0.0);
  EXPECT_GT(res.final_metrics.wratio_bc, 0.0);
  EXPECT_EQ(res.final_metrics.loss_ic, 0.0);
}

TEST(run, burgers_smoke) {
  experiment_config c;
  c.problem = problem_id::burgers1d;
  c.arch = "mfcn:in=2,width=8,depth=1";
  c.steps = 2;
  c.seed = 5;
  c.out_dir = tmp_dir("burg");
  const run_result res = run_experiment(c);
  EXPECT_FALSE(res.diverged);
  EXPECT_GT(res.final_metrics.rel_l2, 0.0);
  EXPECT_GT(res.final_metrics.loss_ic, 0.0);
  EXPECT_GT(res.final_metrics.loss_bc, 0.0);
}

TEST(run, allencahn_smoke) {
  experiment_config c;
  c.problem = problem_id::allencahn1d;
  c.arch = "mfcn:in=2,width=8,depth=1,fourier=4";
  c.steps = 2;
  c.seed = 6;
  c.out_dir = tmp_dir("ac");
  const run_result res = run_experiment(c);
  EXPECT_FALSE(res.diverged);
  EXPECT_GT(res.final_metrics.rel_l2, 0.0);
  EXPECT_GT(res.final_metrics.loss_ic, 0.0);
  EXPECT_EQ(res.final_metrics.loss_bc, 0.0);
}

TEST(run, wave_smoke_and_determinism) {
  experiment_config c;
  c.problem = problem_id::wave_operator;
  c.wave_train_instances = 2;
  c.wave_test_instances = 3;
  c.arch = "mdeeponet:branch=101,in=2,width=8,depth=1,latent=4";
  c.scheme = scheme_id::brdr;
  c.beta_c = 0.9999;
  c.batch = 40;
  c.steps = 4;
  c.seed = 12;
  c.out_dir = tmp_dir("wave-a");
  const run_result ra = run_experiment(c);
  EXPECT_FALSE(ra.diverged);
  EXPECT_GT(ra.final_metrics.rel_l2, 0.0);
  EXPECT_GT(ra.final_metrics.loss_ic, 0.0);
  EXPECT_GT(ra.final_metrics.loss_ic_t, 0.0);
  EXPECT_GT(ra.final_metrics.wratio_ic_t, 0.0);

  c.out_dir = tmp_dir("wave-b");
  const run_result rb = run_experiment(c);
  EXPECT_EQ(slurp(ra.metrics_path), slurp(rb.metrics_path));
}
