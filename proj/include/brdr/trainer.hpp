// Experiment harness. A trainer owns one full run: problem, network,
// weighting scheme, optimizer, and the on-disk artifact contract (metrics
// CSV, weight/irdr snapshots, checkpoints). Everything is deterministic
// given the seed; see the derived stream constants below.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brdr/common.hpp"
#include "brdr/config.hpp"
#include "brdr/csvio.hpp"
#include "brdr/diagnostics.hpp"
#include "brdr/graph.hpp"
#include "brdr/neteval.hpp"
#include "brdr/optim.hpp"
#include "brdr/oracle_allencahn.hpp"
#include "brdr/oracle_burgers.hpp"
#include "brdr/params.hpp"
#include "brdr/problems.hpp"
#include "brdr/rng.hpp"
#include "brdr/weighting.hpp"

namespace brdr {

// Seed offsets for the independent random streams of a run. Keeping them
// apart means e.g. a fixed-weight run trains on the same points as its
// adaptive counterpart with the same seed.
inline constexpr std::uint64_t seed_stream_points = 1000003;
inline constexpr std::uint64_t seed_stream_batch = 2000003;
inline constexpr std::uint64_t seed_stream_sa_init = 3000003;
inline constexpr std::uint64_t seed_stream_test = 4000003;

struct metrics_record {
  long long iter = 0;
  double lr = 0.0;
  double s = 1.0;
  double loss_total = 0.0;
  double loss_pde = 0.0;
  double loss_bc = 0.0;
  double loss_ic = 0.0;
  double loss_ic_t = 0.0;
  double wratio_bc = 0.0;
  double wratio_ic = 0.0;
  double wratio_ic_t = 0.0;
  double rel_l2 = 0.0;
  double wall_ms = 0.0;  // in-memory only, never written to the file
};

// Fixed file column order; this is a contract. wall_ms is deliberately
// absent so that equal seeds produce byte-identical files.
inline const std::vector<std::string>& metrics_header() {
  static const std::vector<std::string> h = {
      "iter",       "lr",        "s",           "loss_total",
      "loss_pde",   "loss_bc",   "loss_ic",     "loss_ic_t",
      "wratio_bc",  "wratio_ic", "wratio_ic_t", "rel_l2"};
  return h;
}

inline void emit_metrics(const std::string& path,
                         std::span<const metrics_record> recs) {
  Eigen::MatrixXd m(std::ptrdiff_t(recs.size()),
                    std::ptrdiff_t(metrics_header().size()));
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const metrics_record& r = recs[i];
    m.row(std::ptrdiff_t(i)) << double(r.iter), r.lr, r.s, r.loss_total,
        r.loss_pde, r.loss_bc, r.loss_ic, r.loss_ic_t, r.wratio_bc,
        r.wratio_ic, r.wratio_ic_t, r.rel_l2;
  }
  write_csv(path, metrics_header(), m);
}

inline std::vector<metrics_record> read_metrics(const std::string& path) {
  const csv_table t = read_csv(path);
  if (t.header != metrics_header())
    throw io_error("metrics file has unexpected columns: " + path);
  std::vector<metrics_record> out(std::size_t(t.data.rows()));
  for (std::ptrdiff_t i = 0; i < t.data.rows(); ++i) {
    metrics_record& r = out[std::size_t(i)];
    r.iter = std::llround(t.data(i, 0));
    r.lr = t.data(i, 1);
    r.s = t.data(i, 2);
    r.loss_total = t.data(i, 3);
    r.loss_pde = t.data(i, 4);
    r.loss_bc = t.data(i, 5);
    r.loss_ic = t.data(i, 6);
    r.loss_ic_t = t.data(i, 7);
    r.wratio_bc = t.data(i, 8);
    r.wratio_ic = t.data(i, 9);
    r.wratio_ic_t = t.data(i, 10);
    r.rel_l2 = t.data(i, 11);
  }
  return out;
}

struct run_result {
  metrics_record final_metrics;
  std::vector<metrics_record> history;
  std::string metrics_path;
  std::string checkpoint_path;
  bool diverged = false;
  long long abort_iteration = 0;
};

class trainer {
 public:
  explicit trainer(const experiment_config& cfg)
      : cfg_(cfg), bg_(cfg.seed + seed_stream_batch) {
    validate_config(cfg_);
    pr_ = config_problem(cfg_);
    arch_ = parse_arch(cfg_.arch);
    wave_ = pr_.id == problem_id::wave_operator;

    rng ig(cfg_.seed);
    P_ = init_params(arch_, ig);
    adam_.init(P_.flat.size());
    sched_ = {cfg_.lr_base, cfg_.lr_gamma, cfg_.lr_interval};

    rng pg(cfg_.seed + seed_stream_points);
    if (wave_) {
      ops_ = sample_operator_instances(pr_, pr_.n_instances, pg);
      rng tg(cfg_.seed + seed_stream_test);
      test_ops_ = sample_operator_instances(pr_, cfg_.wave_test_instances, tg);
    }
    ps_ = sample_points(pr_, pg);

    ncomp_ = pr_.comps.size();
    off_.assign(ncomp_ + 1, 0);
    for (std::size_t c = 0; c < ncomp_; ++c)
      off_[c + 1] = off_[c] + pr_.comps[c].count;
    total_ = off_[ncomp_];

    init_weights();
    init_lambdas();
    init_batching();
    init_evaluators();

    irdr_mean_.assign(std::size_t(total_), 0.0);
    irdr_count_.assign(std::size_t(total_), 0);
    rs_.resize(ncomp_);
    comp_loss_.assign(ncomp_, 0.0);
    start_ = clock::now();
  }

  trainer(const trainer&) = delete;
  trainer& operator=(const trainer&) = delete;

  // One optimizer iteration: sample, forward, weight update, loss with the
  // previous scale, backward, scale update + gradient correction, Adam.
  void step() {
    const long long t = it_ + 1;
    const double eta = lr_at(sched_, it_);

    g_.reset();
    if (wave_) {
      sample_wave_batch();
      forward_wave();
    } else {
      forward_full();
    }

    for (std::size_t c = 0; c < ncomp_; ++c)
      for (std::ptrdiff_t j = 0; j < nb_[c]; ++j)
        rv_[seg_[c] + j] = rs_[c][std::size_t(j)].value();

    const irdr_result ir = compute_irdr(
        wst_, rv_, std::span<const int>(gix_.data(), gix_.size()), t);
    last_irdr_ = ir.c;
    for (std::ptrdiff_t j = 0; j < tb_; ++j) {
      const int i = gix_[std::size_t(j)];
      irdr_count_[std::size_t(i)] += 1;
      irdr_mean_[std::size_t(i)] +=
          (ir.c[j] - irdr_mean_[std::size_t(i)]) /
          double(irdr_count_[std::size_t(i)]);
    }

    switch (cfg_.scheme) {
      case scheme_id::fixed:
        break;
      case scheme_id::sa:
        update_weights_sa(wst_, rv_,
                          std::span<const int>(gix_.data(), gix_.size()),
                          cfg_.sa_lr);
        break;
      case scheme_id::rba: {
        const std::size_t c = pde_c_;
        const Eigen::VectorXd rp = rv_.segment(seg_[c], nb_[c]);
        update_weights_rba(
            wst_, rp,
            std::span<const int>(gix_.data() + seg_[c], std::size_t(nb_[c])),
            cfg_.rba_decay, cfg_.rba_lr, cfg_.rba_offset);
        break;
      }
      case scheme_id::brdr:
      case scheme_id::brdr_plus:
        update_weights_brdr(wst_, ir,
                            std::span<const int>(gix_.data(), gix_.size()));
        break;
    }

    for (std::ptrdiff_t j = 0; j < tb_; ++j)
      wbuf_[j] = wst_.w[gix_[std::size_t(j)]];
    lcomps_.clear();
    for (std::size_t c = 0; c < ncomp_; ++c)
      lcomps_.push_back(
          {lam_[c], pr_.comps[c].count,
           std::span<const double>(wbuf_.data() + seg_[c], std::size_t(nb_[c])),
           std::span<const diff_value>(rs_[c])});
    const diff_value L = weighted_loss(g_, lcomps_, sst_.s);
    const double lt = L.value();
    if (!std::isfinite(lt)) throw divergence_error("non-finite loss", t);

    param_gradient pg = g_.grad(L, P_.flat.size());
    if (cfg_.scheme == scheme_id::brdr || cfg_.scheme == scheme_id::brdr_plus) {
      const double ratio = update_scale(sst_, lt, pg.sq, eta, t);
      pg.g *= ratio;
    }
    adam_step(adam_, P_.flat, pg.g, eta);

    loss_total_ = lt;
    for (std::size_t c = 0; c < ncomp_; ++c)
      comp_loss_[c] = pairwise_sum_sq(std::span<const double>(
                          rv_.data() + seg_[c], std::size_t(nb_[c]))) /
                      double(pr_.comps[c].count);
    lr_last_ = eta;
    it_ = t;
  }

  // Metrics at the current state. full_test switches the wave benchmark from
  // the reduced logging evaluation to the complete test set; the PINN
  // benchmarks always evaluate their full grid.
  metrics_record measure(bool full_test = false) {
    metrics_record r;
    r.iter = it_;
    r.lr = lr_last_;
    r.s = sst_.s;
    r.loss_total = loss_total_;
    for (std::size_t c = 0; c < ncomp_; ++c) {
      switch (pr_.comps[c].kind) {
        case comp_kind::pde: r.loss_pde = comp_loss_[c]; break;
        case comp_kind::bc: r.loss_bc = comp_loss_[c]; break;
        case comp_kind::ic: r.loss_ic = comp_loss_[c]; break;
        case comp_kind::ic_t: r.loss_ic_t = comp_loss_[c]; break;
        case comp_kind::bc_x:
          throw precondition_error("trainer: unsupported component");
      }
    }
    const double mp = lam_[pde_c_] * comp_weight_mean(pde_c_);
    for (std::size_t c = 0; c < ncomp_; ++c) {
      if (c == pde_c_) continue;
      const double ratio = lam_[c] * comp_weight_mean(c) / mp;
      switch (pr_.comps[c].kind) {
        case comp_kind::bc: r.wratio_bc = ratio; break;
        case comp_kind::ic: r.wratio_ic = ratio; break;
        case comp_kind::ic_t: r.wratio_ic_t = ratio; break;
        default: break;
      }
    }
    r.rel_l2 = eval_rel_l2(full_test);
    r.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - start_)
                    .count();
    const double checks[] = {r.s,          r.loss_total, r.loss_pde,
                             r.loss_bc,    r.loss_ic,    r.loss_ic_t,
                             r.wratio_bc,  r.wratio_ic,  r.wratio_ic_t,
                             r.rel_l2};
    for (double v : checks)
      if (!std::isfinite(v))
        throw divergence_error("non-finite metrics field", it_);
    return r;
  }

  // Full loop with artifact emission. A checkpoint is written up front and
  // refreshed at every logging interval, so after a divergence abort the
  // file on disk always holds the last finite parameters.
  run_result run() {
    std::filesystem::create_directories(cfg_.out_dir);
    run_result res;
    res.metrics_path = cfg_.out_dir + "/metrics.csv";
    res.checkpoint_path = cfg_.out_dir + "/checkpoint.bin";
    start_ = clock::now();
    write_checkpoint(res.checkpoint_path, P_, {cfg_.seed, it_});
    emit_metrics(res.metrics_path, res.history);
    std::size_t si = 0;
    try {
      for (long long t = 1; t <= cfg_.steps; ++t) {
        step();
        while (si < cfg_.snapshot_iters.size() && cfg_.snapshot_iters[si] < t)
          ++si;
        if (si < cfg_.snapshot_iters.size() && cfg_.snapshot_iters[si] == t) {
          write_snapshots(t);
          ++si;
        }
        if (t % cfg_.log_interval == 0 && t < cfg_.steps) {
          res.history.push_back(measure(false));
          emit_metrics(res.metrics_path, res.history);
          write_checkpoint(res.checkpoint_path, P_, {cfg_.seed, it_});
        }
      }
      res.history.push_back(measure(true));
      emit_metrics(res.metrics_path, res.history);
      write_checkpoint(res.checkpoint_path, P_, {cfg_.seed, it_});
      res.final_metrics = res.history.back();
    } catch (const divergence_error& e) {
      res.diverged = true;
      res.abort_iteration = e.iteration;
      emit_metrics(res.metrics_path, res.history);
      write_checkpoint(res.checkpoint_path, P_, {cfg_.seed, it_});
      if (!res.history.empty()) res.final_metrics = res.history.back();
    }
    return res;
  }

  const experiment_config& config() const { return cfg_; }
  const problem_spec& problem() const { return pr_; }
  const param_store<double>& params() const { return P_; }
  const point_set& points() const { return ps_; }
  const operator_set& operators() const { return ops_; }
  const weight_state& weights() const { return wst_; }
  const scale_state& scale() const { return sst_; }
  long long iteration() const { return it_; }

  // irdr ratios of the most recent step, batch order.
  const Eigen::VectorXd& last_irdr() const { return last_irdr_; }
  // Per-point running mean of irdr since the first visit.
  const std::vector<double>& irdr_mean() const { return irdr_mean_; }
  double max_mean_irdr() const {
    double m = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < irdr_mean_.size(); ++i) {
      if (irdr_count_[i] == 0) continue;
      if (!any || irdr_mean_[i] > m) m = irdr_mean_[i];
      any = true;
    }
    if (!any) throw precondition_error("max_mean_irdr: no samples");
    return m;
  }

 private:
  using clock = std::chrono::steady_clock;

  void init_weights() {
    wst_.init(total_);
    if (detail::scheme_uses_beta(cfg_.scheme)) {
      wst_.beta_c = cfg_.beta_c;
      wst_.beta_w = cfg_.beta_w;
    }
    pde_c_ = std::size_t(pr_.comp_index(comp_kind::pde));
    if (cfg_.scheme == scheme_id::sa) {
      rng wg(cfg_.seed + seed_stream_sa_init);
      for (std::ptrdiff_t i = 0; i < total_; ++i) wst_.w[i] = wg.uniform();
    } else if (cfg_.scheme == scheme_id::rba) {
      // residual-guided updates apply to the PDE term only; the other terms
      // keep fixed multipliers through the lambdas
      wst_.w.segment(off_[pde_c_], pr_.comps[pde_c_].count).setZero();
    }
  }

  void init_lambdas() {
    lam_.assign(ncomp_, 1.0);
    if (!detail::scheme_uses_lambda(cfg_.scheme)) return;
    for (std::size_t c = 0; c < ncomp_; ++c) {
      switch (pr_.comps[c].kind) {
        case comp_kind::pde: lam_[c] = cfg_.lambda_pde; break;
        case comp_kind::bc: lam_[c] = cfg_.lambda_bc; break;
        case comp_kind::ic: lam_[c] = cfg_.lambda_ic; break;
        case comp_kind::ic_t: lam_[c] = cfg_.lambda_ic_t; break;
        case comp_kind::bc_x:
          throw precondition_error("trainer: unsupported component");
      }
    }
  }

  void init_batching() {
    nb_.assign(ncomp_, 0);
    seg_.assign(ncomp_ + 1, 0);
    if (wave_) {
      ic_c_ = std::size_t(pr_.comp_index(comp_kind::ic));
      ict_c_ = std::size_t(pr_.comp_index(comp_kind::ic_t));
      bc_c_ = std::size_t(pr_.comp_index(comp_kind::bc));
      pool_.resize(ncomp_);
      for (std::size_t c = 0; c < ncomp_; ++c) {
        nb_[c] = std::min<std::ptrdiff_t>(cfg_.batch, pr_.comps[c].count);
        if (c != ict_c_) {
          pool_[c].resize(std::size_t(pr_.comps[c].count));
          std::iota(pool_[c].begin(), pool_[c].end(), std::size_t(0));
        }
      }
      // the first-step time derivative shares its points with the values
      nb_[ict_c_] = nb_[ic_c_];
      ic_full_ = ic_targets(pr_, ops_, ps_.comps[ic_c_]);
    } else {
      for (std::size_t c = 0; c < ncomp_; ++c) nb_[c] = pr_.comps[c].count;
    }
    for (std::size_t c = 0; c < ncomp_; ++c) seg_[c + 1] = seg_[c] + nb_[c];
    tb_ = seg_[ncomp_];
    rv_.resize(tb_);
    wbuf_.resize(tb_);
    gix_.resize(std::size_t(tb_));
    if (!wave_) {
      for (std::ptrdiff_t j = 0; j < tb_; ++j) gix_[std::size_t(j)] = int(j);
    }
  }

  void init_evaluators() {
    if (!wave_) {
      fev_.reserve(ncomp_);
      frec_.reserve(ncomp_);
      for (std::size_t c = 0; c < ncomp_; ++c) {
        fev_.emplace_back();
        fev_[c].setup(arch_, residual_layout(pr_, pr_.comps[c].kind),
                      int(pr_.comps[c].count));
        fev_[c].set_points(ps_.comps[c].x);
        frec_.emplace_back(fev_[c], P_);
      }
      return;
    }
    grp_comp_ = {pde_c_, bc_c_, ic_c_};
    dev_.reserve(3);
    drec_.reserve(3);
    sb_.resize(3);
    xb_.resize(3);
    for (std::size_t gi = 0; gi < 3; ++gi) {
      const std::size_t c = grp_comp_[gi];
      dev_.emplace_back();
      dev_[gi].setup(arch_, residual_layout(pr_, pr_.comps[c].kind),
                     int(nb_[c]));
      drec_.emplace_back(dev_[gi], P_);
    }
    tgt_.resize(nb_[ic_c_]);
  }

  void sample_wave_batch() {
    for (const std::size_t c : grp_comp_)
      bg_.draw_front(pool_[c], std::size_t(nb_[c]));
    for (std::size_t c = 0; c < ncomp_; ++c) {
      const std::vector<std::size_t>& pool =
          c == ict_c_ ? pool_[ic_c_] : pool_[c];
      for (std::ptrdiff_t j = 0; j < nb_[c]; ++j)
        gix_[std::size_t(seg_[c] + j)] = int(off_[c]) + int(pool[std::size_t(j)]);
    }
  }

  void forward_full() {
    for (std::size_t c = 0; c < ncomp_; ++c) {
      fev_[c].forward(P_);
      const net_out o = g_.use_record(frec_[c], fev_[c].tables());
      residual_nodes(g_, pr_, pr_.comps[c].kind, o, ps_.comps[c].x, rs_[c]);
    }
  }

  void forward_wave() {
    for (std::size_t gi = 0; gi < 3; ++gi) {
      const std::size_t c = grp_comp_[gi];
      const component_points& cp = ps_.comps[c];
      sb_[gi].resize(nb_[c], ops_.sensors.cols());
      xb_[gi].resize(nb_[c], 2);
      for (std::ptrdiff_t j = 0; j < nb_[c]; ++j) {
        const std::size_t i = pool_[c][std::size_t(j)];
        xb_[gi].row(j) = cp.x.row(std::ptrdiff_t(i));
        sb_[gi].row(j) = ops_.sensors.row(cp.instance[i]);
      }
      dev_[gi].set_points(sb_[gi], xb_[gi]);
      dev_[gi].forward(P_);
      const net_out o = g_.use_record(drec_[gi], dev_[gi].tables());
      if (c == ic_c_) {
        for (std::ptrdiff_t j = 0; j < nb_[c]; ++j)
          tgt_[j] = ic_full_[std::ptrdiff_t(pool_[c][std::size_t(j)])];
        residual_nodes(g_, pr_, comp_kind::ic, o, xb_[gi], rs_[ic_c_], &tgt_);
        residual_nodes(g_, pr_, comp_kind::ic_t, o, xb_[gi], rs_[ict_c_]);
      } else {
        residual_nodes(g_, pr_, pr_.comps[c].kind, o, xb_[gi], rs_[c]);
      }
    }
  }

  double comp_weight_mean(std::size_t c) const {
    return pairwise_sum(std::span<const double>(
               wst_.w.data() + off_[c], std::size_t(pr_.comps[c].count))) /
           double(pr_.comps[c].count);
  }

  // Relative L2 error against the benchmark reference. PINN problems
  // evaluate the standard grid; the wave benchmark averages per-instance
  // errors over test instances, a reduced subset unless full_test is set
  // (the full 101x101 sweep over every instance is far more expensive than
  // a training step).
  double eval_rel_l2(bool full_test) {
    if (!wave_) {
      ensure_value_eval();
      ve_->forward(P_);
      pred_.resize(grid_.rows());
      vrec_->out_values(pred_.data());
      return relative_l2(pred_, ref_);
    }
    ensure_wave_eval();
    const Eigen::MatrixXd& grid = full_test ? grid_ : grid_row_;
    const int n = full_test
                      ? int(test_ops_.b.rows())
                      : int(std::min<std::ptrdiff_t>(10, test_ops_.b.rows()));
    std::vector<double> errs(static_cast<std::size_t>(n));
    pred_.resize(grid.rows());
    for (int inst = 0; inst < n; ++inst) {
      srep_ = test_ops_.sensors.row(inst).replicate(grid.rows(), 1);
      we_->set_points(srep_, grid);
      we_->forward(P_);
      wrec_->out_values(pred_.data());
      errs[std::size_t(inst)] = relative_l2(
          pred_, wave_reference(pr_, test_ops_.b.row(inst).transpose(), grid));
    }
    return pairwise_sum(errs) / double(n);
  }

  void ensure_value_eval() {
    if (ve_) return;
    grid_ = test_grid(pr_);
    switch (pr_.id) {
      case problem_id::burgers1d:
        ref_ = burgers_reference_values(pr_);
        break;
      case problem_id::allencahn1d:
        ref_ = allencahn_reference_values(pr_);
        break;
      default:
        ref_ = reference_values(pr_, grid_);
        break;
    }
    ve_.emplace();
    ve_->setup(arch_, deriv_layout::value_only(), int(grid_.rows()));
    ve_->set_points(grid_);
    vrec_.emplace(*ve_, P_);
  }

  void ensure_wave_eval() {
    if (we_) return;
    grid_ = test_grid(pr_);
    grid_row_ = tensor_grid(linspace(pr_.xlim[0], pr_.xlim[1], 21),
                            linspace(pr_.ylim[0], pr_.ylim[1], 21));
    we_.emplace();
    we_->setup(arch_, deriv_layout::value_only(), int(grid_.rows()));
    wrec_.emplace(*we_, P_);
  }

  std::vector<std::string> coord_names() const {
    switch (pr_.id) {
      case problem_id::poisson1d: return {"x"};
      case problem_id::helmholtz2d: return {"x", "y"};
      default: return {"x", "t"};
    }
  }

  void write_snapshots(long long t) {
    if (snap_coords_.rows() == 0) {
      snap_coords_.resize(total_, pr_.input_dim());
      for (std::size_t c = 0; c < ncomp_; ++c)
        snap_coords_.middleRows(off_[c], pr_.comps[c].count) = ps_.comps[c].x;
    }
    // rba starts its pde weights at exactly zero; the export demands
    // positive weights, so clamp to the smallest normal
    const Eigen::VectorXd w =
        wst_.w.cwiseMax(std::numeric_limits<double>::min());
    const std::string tag = std::to_string(t);
    export_weight_field(cfg_.out_dir + "/weights-" + tag + ".csv",
                        coord_names(), snap_coords_, w);
    std::vector<std::string> header = coord_names();
    header.push_back("irdr_mean");
    Eigen::MatrixXd m(total_, snap_coords_.cols() + 1);
    m.leftCols(snap_coords_.cols()) = snap_coords_;
    m.col(snap_coords_.cols()) =
        Eigen::Map<const Eigen::VectorXd>(irdr_mean_.data(), total_);
    write_csv(cfg_.out_dir + "/irdr-" + tag + ".csv", header, m);
  }

  experiment_config cfg_;
  problem_spec pr_;
  arch_descriptor arch_;
  bool wave_ = false;
  param_store<double> P_;
  adam_state adam_;
  lr_schedule sched_;
  weight_state wst_;
  scale_state sst_;
  point_set ps_;
  operator_set ops_, test_ops_;
  Eigen::VectorXd ic_full_;

  std::size_t ncomp_ = 0;
  std::size_t pde_c_ = 0, bc_c_ = 0, ic_c_ = 0, ict_c_ = 0;
  std::vector<std::ptrdiff_t> off_, nb_, seg_;
  std::ptrdiff_t total_ = 0, tb_ = 0;
  std::vector<double> lam_;

  diff_graph g_;
  std::vector<mfcn_eval<double>> fev_;
  std::vector<net_record<double, mfcn_eval<double>>> frec_;
  std::vector<mdeeponet_eval<double>> dev_;
  std::vector<net_record<double, mdeeponet_eval<double>>> drec_;
  std::array<std::size_t, 3> grp_comp_{};
  std::vector<Eigen::MatrixXd> sb_, xb_;
  Eigen::VectorXd tgt_;
  rng bg_;
  std::vector<std::vector<std::size_t>> pool_;

  std::vector<std::vector<diff_value>> rs_;
  std::vector<loss_component> lcomps_;
  Eigen::VectorXd rv_, wbuf_;
  std::vector<int> gix_;
  Eigen::VectorXd last_irdr_;
  std::vector<double> irdr_mean_;
  std::vector<long long> irdr_count_;

  long long it_ = 0;
  double lr_last_ = 0.0;
  double loss_total_ = 0.0;
  std::vector<double> comp_loss_;

  Eigen::MatrixXd grid_, grid_row_, srep_, snap_coords_;
  Eigen::VectorXd ref_, pred_;
  std::optional<mfcn_eval<double>> ve_;
  std::optional<net_record<double, mfcn_eval<double>>> vrec_;
  std::optional<mdeeponet_eval<double>> we_;
  std::optional<net_record<double, mdeeponet_eval<double>>> wrec_;

  clock::time_point start_;
};

// Convenience wrapper matching the CLI's run subcommand.
inline run_result run_experiment(const experiment_config& cfg) {
  trainer tr(cfg);
  return tr.run();
}

}  // namespace brdr
