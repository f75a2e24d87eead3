#pragma once

// Experiment configuration: a flat key = value text format, named presets,
// validation against the chosen problem and weighting scheme, and a canonical
// emitter whose output re-parses to an identical config.
//
// Schema (one key per line, '#' starts a comment, unknown keys are errors):
//   preset                name expanded first; later keys override its fields
//   problem               poisson | helmholtz | allencahn | burgers | wave_operator
//   poisson_k             poisson only: frequency parameter k
//   helmholtz_grid        helmholtz only: interior grid points per side
//   wave_train_instances  wave_operator only: training initial conditions
//   wave_test_instances   wave_operator only: test initial conditions
//   arch                  network descriptor, e.g. mfcn:in=1,width=32,depth=4
//   scheme                fixed | sa | rba | brdr | brdr_plus
//   beta_c, beta_w        brdr / brdr_plus only
//   sa_lr                 sa only
//   rba_decay, rba_lr, rba_offset   rba only
//   lambda_pde, lambda_bc, lambda_ic, lambda_ic_t
//                         rba / brdr_plus only, and only for components the
//                         problem actually has
//   lr_base, lr_gamma, lr_interval  staircase schedule base*gamma^(t/interval)
//   steps                 total training iterations
//   batch                 wave_operator only: points per component per step
//   seed                  unsigned 64-bit
//   out_dir               artifact directory
//   log_interval          iterations between metrics rows
//   snapshot_iters        comma-separated, strictly increasing; may be empty

#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "brdr/arch.hpp"
#include "brdr/common.hpp"
#include "brdr/problems.hpp"

namespace brdr {

enum class scheme_id { fixed, sa, rba, brdr, brdr_plus };

inline const char* scheme_to_string(scheme_id s) {
  switch (s) {
    case scheme_id::fixed: return "fixed";
    case scheme_id::sa: return "sa";
    case scheme_id::rba: return "rba";
    case scheme_id::brdr: return "brdr";
    case scheme_id::brdr_plus: return "brdr_plus";
  }
  throw precondition_error("scheme_to_string: bad scheme");
}

inline scheme_id scheme_from_string(const std::string& s) {
  if (s == "fixed") return scheme_id::fixed;
  if (s == "sa") return scheme_id::sa;
  if (s == "rba") return scheme_id::rba;
  if (s == "brdr") return scheme_id::brdr;
  if (s == "brdr_plus") return scheme_id::brdr_plus;
  throw config_error("unknown scheme: " + s);
}

struct experiment_config {
  problem_id problem = problem_id::poisson1d;
  int poisson_k = 2;
  int helmholtz_grid = 101;
  int wave_train_instances = 1000;
  int wave_test_instances = 500;
  std::string arch;
  scheme_id scheme = scheme_id::brdr;
  double beta_c = 0.999;
  double beta_w = 0.999;
  double sa_lr = 0.005;
  double rba_decay = 0.9999;
  double rba_lr = 0.001;
  double rba_offset = 0.0;
  double lambda_pde = 1.0;
  double lambda_bc = 1.0;
  double lambda_ic = 1.0;
  double lambda_ic_t = 1.0;
  double lr_base = 0.001;
  double lr_gamma = 1.0;
  long long lr_interval = 1;
  long long steps = 1;
  long long batch = 10000;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  long long log_interval = 100;
  std::vector<long long> snapshot_iters;

  friend bool operator==(const experiment_config&, const experiment_config&) = default;
};

inline problem_spec config_problem(const experiment_config& c) {
  switch (c.problem) {
    case problem_id::poisson1d: return make_poisson(c.poisson_k);
    case problem_id::helmholtz2d: return make_helmholtz(c.helmholtz_grid);
    case problem_id::allencahn1d: return make_allencahn();
    case problem_id::burgers1d: return make_burgers();
    case problem_id::wave_operator: return make_wave_operator(c.wave_train_instances);
  }
  throw precondition_error("config_problem: bad problem id");
}

namespace detail {

inline bool problem_has_comp(const problem_spec& pr, comp_kind k) {
  for (const auto& c : pr.comps)
    if (c.kind == k) return true;
  return false;
}

inline bool scheme_uses_beta(scheme_id s) {
  return s == scheme_id::brdr || s == scheme_id::brdr_plus;
}

inline bool scheme_uses_lambda(scheme_id s) {
  return s == scheme_id::rba || s == scheme_id::brdr_plus;
}

inline std::string shortest_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

// Checks ranges and cross-field consistency, then resets every field that
// does not apply to the chosen problem/scheme back to its default so that the
// canonical emission round-trips structurally. `explicit_keys` holds the keys
// present in the parsed file; an explicitly set inapplicable key is an error
// rather than a silent reset.
inline void validate_config(experiment_config& c,
                            const std::set<std::string>& explicit_keys = {}) {
  const experiment_config defaults;
  const auto fail = [](const std::string& field, const std::string& why) {
    throw config_error(field + ": " + why);
  };
  const auto applicable = [&](const std::string& key, bool ok) {
    if (!ok && explicit_keys.count(key))
      fail(key, "not applicable to this problem/scheme");
    return ok;
  };

  if (c.arch.empty()) fail("arch", "required");
  const arch_descriptor a = parse_arch(c.arch);

  if (applicable("poisson_k", c.problem == problem_id::poisson1d)) {
    if (c.poisson_k < 1) fail("poisson_k", "must be at least 1");
  } else {
    c.poisson_k = defaults.poisson_k;
  }
  if (applicable("helmholtz_grid", c.problem == problem_id::helmholtz2d)) {
    if (c.helmholtz_grid < 3) fail("helmholtz_grid", "must be at least 3");
  } else {
    c.helmholtz_grid = defaults.helmholtz_grid;
  }
  const bool is_wave = c.problem == problem_id::wave_operator;
  if (applicable("wave_train_instances", is_wave)) {
    if (c.wave_train_instances < 1) fail("wave_train_instances", "must be at least 1");
  } else {
    c.wave_train_instances = defaults.wave_train_instances;
  }
  if (applicable("wave_test_instances", is_wave)) {
    if (c.wave_test_instances < 1) fail("wave_test_instances", "must be at least 1");
  } else {
    c.wave_test_instances = defaults.wave_test_instances;
  }
  if (applicable("batch", is_wave)) {
    if (c.batch < 1) fail("batch", "must be at least 1");
  } else {
    c.batch = defaults.batch;
  }

  if (is_wave) {
    if (a.kind != net_kind::mdeeponet) fail("arch", "wave_operator needs an mdeeponet");
  } else {
    if (a.kind != net_kind::mfcn) fail("arch", "this problem needs an mfcn");
  }
  const problem_spec pr = config_problem(c);
  const int want_in = pr.id == problem_id::poisson1d ? 1 : 2;
  if (a.input_dim != want_in)
    fail("arch", "input dim " + std::to_string(a.input_dim) + ", problem needs " +
                     std::to_string(want_in));
  if (is_wave && a.branch_dim != pr.n_sensors)
    fail("arch", "branch dim must match the " + std::to_string(pr.n_sensors) +
                     " sensor points");

  if (applicable("beta_c", detail::scheme_uses_beta(c.scheme))) {
    if (!(c.beta_c > 0.0 && c.beta_c < 1.0)) fail("beta_c", "must lie in (0,1)");
  } else {
    c.beta_c = defaults.beta_c;
  }
  if (applicable("beta_w", detail::scheme_uses_beta(c.scheme))) {
    if (!(c.beta_w > 0.0 && c.beta_w < 1.0)) fail("beta_w", "must lie in (0,1)");
  } else {
    c.beta_w = defaults.beta_w;
  }
  if (applicable("sa_lr", c.scheme == scheme_id::sa)) {
    if (!(c.sa_lr > 0.0)) fail("sa_lr", "must be positive");
  } else {
    c.sa_lr = defaults.sa_lr;
  }
  if (applicable("rba_decay", c.scheme == scheme_id::rba)) {
    if (!(c.rba_decay >= 0.0 && c.rba_decay < 1.0)) fail("rba_decay", "must lie in [0,1)");
  } else {
    c.rba_decay = defaults.rba_decay;
  }
  if (applicable("rba_lr", c.scheme == scheme_id::rba)) {
    if (!(c.rba_lr > 0.0)) fail("rba_lr", "must be positive");
  } else {
    c.rba_lr = defaults.rba_lr;
  }
  if (applicable("rba_offset", c.scheme == scheme_id::rba)) {
    if (!(c.rba_offset >= 0.0)) fail("rba_offset", "must be non-negative");
  } else {
    c.rba_offset = defaults.rba_offset;
  }

  const bool lam = detail::scheme_uses_lambda(c.scheme);
  if (applicable("lambda_pde", lam && detail::problem_has_comp(pr, comp_kind::pde))) {
    if (!(c.lambda_pde > 0.0)) fail("lambda_pde", "must be positive");
  } else {
    c.lambda_pde = defaults.lambda_pde;
  }
  if (applicable("lambda_bc", lam && detail::problem_has_comp(pr, comp_kind::bc))) {
    if (!(c.lambda_bc > 0.0)) fail("lambda_bc", "must be positive");
  } else {
    c.lambda_bc = defaults.lambda_bc;
  }
  if (applicable("lambda_ic", lam && detail::problem_has_comp(pr, comp_kind::ic))) {
    if (!(c.lambda_ic > 0.0)) fail("lambda_ic", "must be positive");
  } else {
    c.lambda_ic = defaults.lambda_ic;
  }
  if (applicable("lambda_ic_t", lam && detail::problem_has_comp(pr, comp_kind::ic_t))) {
    if (!(c.lambda_ic_t > 0.0)) fail("lambda_ic_t", "must be positive");
  } else {
    c.lambda_ic_t = defaults.lambda_ic_t;
  }

  if (!(c.lr_base > 0.0)) fail("lr_base", "must be positive");
  if (!(c.lr_gamma > 0.0 && c.lr_gamma <= 1.0)) fail("lr_gamma", "must lie in (0,1]");
  if (c.lr_interval < 1) fail("lr_interval", "must be at least 1");
  if (c.steps < 1) fail("steps", "must be at least 1");
  if (c.log_interval < 1) fail("log_interval", "must be at least 1");
  for (std::size_t i = 0; i < c.snapshot_iters.size(); ++i) {
    if (c.snapshot_iters[i] < 0) fail("snapshot_iters", "entries must be non-negative");
    if (i > 0 && c.snapshot_iters[i] <= c.snapshot_iters[i - 1])
      fail("snapshot_iters", "entries must be strictly increasing");
  }
  if (c.out_dir.empty()) fail("out_dir", "required");
}

// ---- presets ----

inline std::vector<std::string> preset_names() {
  return {"poisson-k2",           "poisson-k4",
          "poisson-k8",           "helmholtz-brdr",
          "allencahn-brdr-plus",  "burgers-brdr",
          "wave-op-brdr",         "poisson-k2-desk",
          "poisson-k4-desk",      "poisson-k8-desk",
          "helmholtz-brdr-desk",  "allencahn-brdr-plus-desk",
          "burgers-brdr-desk",    "wave-op-brdr-desk"};
}

inline experiment_config preset_config(const std::string& name) {
  experiment_config c;
  const auto snapshots = [&](long long steps) {
    c.snapshot_iters = {steps / 10, steps / 2, steps * 9 / 10};
  };
  const auto poisson = [&](int k, bool desk) {
    c.problem = problem_id::poisson1d;
    c.poisson_k = k;
    c.arch = desk ? "mfcn:in=1,width=32,depth=4" : "mfcn:in=1,width=128,depth=6";
    c.scheme = scheme_id::brdr;
    c.lr_base = 0.001;
    c.lr_gamma = 1.0;
    c.lr_interval = 1;
    c.steps = desk ? 50000 : 100000;
    snapshots(c.steps);
  };

  if (name == "poisson-k2") {
    poisson(2, false);
  } else if (name == "poisson-k4") {
    poisson(4, false);
  } else if (name == "poisson-k8") {
    poisson(8, false);
  } else if (name == "poisson-k2-desk") {
    poisson(2, true);
  } else if (name == "poisson-k4-desk") {
    poisson(4, true);
  } else if (name == "poisson-k8-desk") {
    poisson(8, true);
  } else if (name == "helmholtz-brdr" || name == "helmholtz-brdr-desk") {
    const bool desk = name != "helmholtz-brdr";
    c.problem = problem_id::helmholtz2d;
    c.helmholtz_grid = desk ? 51 : 101;
    c.arch = desk ? "mfcn:in=2,width=64,depth=4" : "mfcn:in=2,width=128,depth=6";
    c.scheme = scheme_id::brdr;
    c.lr_base = 0.005;
    c.lr_gamma = 0.99;
    c.lr_interval = 250;
    c.steps = desk ? 30000 : 100000;
    snapshots(c.steps);
  } else if (name == "allencahn-brdr-plus" || name == "allencahn-brdr-plus-desk") {
    const bool desk = name != "allencahn-brdr-plus";
    c.problem = problem_id::allencahn1d;
    c.arch = desk ? "mfcn:in=2,width=64,depth=4,fourier=10"
                  : "mfcn:in=2,width=128,depth=6,fourier=10";
    c.scheme = scheme_id::brdr_plus;
    c.lambda_ic = 100.0;
    c.lr_base = 0.001;
    c.lr_gamma = 0.99;
    c.lr_interval = 750;
    c.steps = desk ? 30000 : 300000;
    snapshots(c.steps);
  } else if (name == "burgers-brdr" || name == "burgers-brdr-desk") {
    const bool desk = name != "burgers-brdr";
    c.problem = problem_id::burgers1d;
    c.arch = desk ? "mfcn:in=2,width=64,depth=4" : "mfcn:in=2,width=128,depth=6";
    c.scheme = scheme_id::brdr;
    c.lr_base = 0.001;
    c.lr_gamma = 0.99;
    c.lr_interval = 100;
    c.steps = desk ? 10000 : 40000;
    snapshots(c.steps);
  } else if (name == "wave-op-brdr" || name == "wave-op-brdr-desk") {
    const bool desk = name != "wave-op-brdr";
    c.problem = problem_id::wave_operator;
    c.wave_train_instances = desk ? 200 : 1000;
    c.wave_test_instances = desk ? 100 : 500;
    c.arch = desk ? "mdeeponet:branch=101,in=2,width=64,depth=4,latent=64"
                  : "mdeeponet:branch=101,in=2,width=100,depth=7,latent=100";
    c.scheme = scheme_id::brdr;
    c.beta_c = 0.9999;
    c.beta_w = 0.999;
    c.batch = 10000;
    c.lr_base = 0.001;
    c.lr_gamma = 0.99;
    c.lr_interval = 500;
    c.steps = desk ? 20000 : 100000;
    snapshots(c.steps);
  } else {
    throw config_error("unknown preset: " + name);
  }
  c.out_dir = "out/" + name;
  validate_config(c);
  return c;
}

// ---- parsing ----

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

template <typename T>
T parse_number(const std::string& v, int line, const std::string& key) {
  T out{};
  const char* b = v.data();
  const char* e = v.data() + v.size();
  const auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e)
    throw config_error("config line " + std::to_string(line) + ": " + key +
                       ": not a valid number: '" + v + "'");
  return out;
}

inline std::vector<long long> parse_iter_list(const std::string& v, int line,
                                              const std::string& key) {
  std::vector<long long> out;
  if (trim(v).empty()) return out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    auto end = v.find(',', pos);
    if (end == std::string::npos) end = v.size();
    out.push_back(parse_number<long long>(trim(v.substr(pos, end - pos)), line, key));
    pos = end + 1;
    if (end == v.size()) break;
  }
  return out;
}

}  // namespace detail

inline experiment_config parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<int> lines;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = detail::trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(line) + ": expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    if (key.empty())
      throw config_error("config line " + std::to_string(line) + ": empty key");
    if (!seen.insert(key).second)
      throw config_error("config line " + std::to_string(line) + ": duplicate key '" +
                         key + "'");
    entries.emplace_back(key, val);
    lines.push_back(line);
  }

  experiment_config c;
  bool have_problem = false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first == "preset") {
      c = preset_config(entries[i].second);
      have_problem = true;
    }
  }

  std::set<std::string> explicit_keys;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string& key = entries[i].first;
    const std::string& val = entries[i].second;
    const int ln = lines[i];
    if (key == "preset") continue;
    explicit_keys.insert(key);
    if (key == "problem") {
      c.problem = parse_problem(val);
      have_problem = true;
    } else if (key == "poisson_k") {
      c.poisson_k = detail::parse_number<int>(val, ln, key);
    } else if (key == "helmholtz_grid") {
      c.helmholtz_grid = detail::parse_number<int>(val, ln, key);
    } else if (key == "wave_train_instances") {
      c.wave_train_instances = detail::parse_number<int>(val, ln, key);
    } else if (key == "wave_test_instances") {
      c.wave_test_instances = detail::parse_number<int>(val, ln, key);
    } else if (key == "arch") {
      c.arch = val;
    } else if (key == "scheme") {
      c.scheme = scheme_from_string(val);
    } else if (key == "beta_c") {
      c.beta_c = detail::parse_number<double>(val, ln, key);
    } else if (key == "beta_w") {
      c.beta_w = detail::parse_number<double>(val, ln, key);
    } else if (key == "sa_lr") {
      c.sa_lr = detail::parse_number<double>(val, ln, key);
    } else if (key == "rba_decay") {
      c.rba_decay = detail::parse_number<double>(val, ln, key);
    } else if (key == "rba_lr") {
      c.rba_lr = detail::parse_number<double>(val, ln, key);
    } else if (key == "rba_offset") {
      c.rba_offset = detail::parse_number<double>(val, ln, key);
    } else if (key == "lambda_pde") {
      c.lambda_pde = detail::parse_number<double>(val, ln, key);
    } else if (key == "lambda_bc") {
      c.lambda_bc = detail::parse_number<double>(val, ln, key);
    } else if (key == "lambda_ic") {
      c.lambda_ic = detail::parse_number<double>(val, ln, key);
    } else if (key == "lambda_ic_t") {
      c.lambda_ic_t = detail::parse_number<double>(val, ln, key);
    } else if (key == "lr_base") {
      c.lr_base = detail::parse_number<double>(val, ln, key);
    } else if (key == "lr_gamma") {
      c.lr_gamma = detail::parse_number<double>(val, ln, key);
    } else if (key == "lr_interval") {
      c.lr_interval = detail::parse_number<long long>(val, ln, key);
    } else if (key == "steps") {
      c.steps = detail::parse_number<long long>(val, ln, key);
    } else if (key == "batch") {
      c.batch = detail::parse_number<long long>(val, ln, key);
    } else if (key == "seed") {
      c.seed = detail::parse_number<std::uint64_t>(val, ln, key);
    } else if (key == "out_dir") {
      c.out_dir = val;
    } else if (key == "log_interval") {
      c.log_interval = detail::parse_number<long long>(val, ln, key);
    } else if (key == "snapshot_iters") {
      c.snapshot_iters = detail::parse_iter_list(val, ln, key);
    } else {
      throw config_error("config line " + std::to_string(ln) + ": unknown key '" + key +
                         "'");
    }
  }
  if (!have_problem) throw config_error("problem: required");
  validate_config(c, explicit_keys);
  return c;
}

inline experiment_config parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

// Emits every applicable key in schema order; reals use the shortest
// representation that round-trips exactly.
inline std::string config_to_string(const experiment_config& c) {
  std::ostringstream out;
  const auto put = [&](const char* key, const std::string& v) {
    out << key << " = " << v << "\n";
  };
  put("problem", problem_to_string(c.problem));
  if (c.problem == problem_id::poisson1d)
    put("poisson_k", std::to_string(c.poisson_k));
  if (c.problem == problem_id::helmholtz2d)
    put("helmholtz_grid", std::to_string(c.helmholtz_grid));
  const bool is_wave = c.problem == problem_id::wave_operator;
  if (is_wave) {
    put("wave_train_instances", std::to_string(c.wave_train_instances));
    put("wave_test_instances", std::to_string(c.wave_test_instances));
  }
  put("arch", c.arch);
  put("scheme", scheme_to_string(c.scheme));
  if (detail::scheme_uses_beta(c.scheme)) {
    put("beta_c", detail::shortest_double(c.beta_c));
    put("beta_w", detail::shortest_double(c.beta_w));
  }
  if (c.scheme == scheme_id::sa) put("sa_lr", detail::shortest_double(c.sa_lr));
  if (c.scheme == scheme_id::rba) {
    put("rba_decay", detail::shortest_double(c.rba_decay));
    put("rba_lr", detail::shortest_double(c.rba_lr));
    put("rba_offset", detail::shortest_double(c.rba_offset));
  }
  if (detail::scheme_uses_lambda(c.scheme)) {
    const problem_spec pr = config_problem(c);
    if (detail::problem_has_comp(pr, comp_kind::pde))
      put("lambda_pde", detail::shortest_double(c.lambda_pde));
    if (detail::problem_has_comp(pr, comp_kind::bc))
      put("lambda_bc", detail::shortest_double(c.lambda_bc));
    if (detail::problem_has_comp(pr, comp_kind::ic))
      put("lambda_ic", detail::shortest_double(c.lambda_ic));
    if (detail::problem_has_comp(pr, comp_kind::ic_t))
      put("lambda_ic_t", detail::shortest_double(c.lambda_ic_t));
  }
  put("lr_base", detail::shortest_double(c.lr_base));
  put("lr_gamma", detail::shortest_double(c.lr_gamma));
  put("lr_interval", std::to_string(c.lr_interval));
  put("steps", std::to_string(c.steps));
  if (is_wave) put("batch", std::to_string(c.batch));
  put("seed", std::to_string(c.seed));
  put("out_dir", c.out_dir);
  put("log_interval", std::to_string(c.log_interval));
  std::string iters;
  for (std::size_t i = 0; i < c.snapshot_iters.size(); ++i) {
    if (i) iters += ",";
    iters += std::to_string(c.snapshot_iters[i]);
  }
  put("snapshot_iters", iters);
  return out.str();
}

}  // namespace brdr
