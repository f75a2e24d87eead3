#pragma once

// Flat parameter storage, initialization, and checkpoint I/O.
//
// Checkpoint format: a one-line JSON header, '\n', a NUL byte, then the
// parameter vector as little-endian IEEE-754 doubles in canonical order.

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "brdr/arch.hpp"
#include "brdr/common.hpp"
#include "brdr/rng.hpp"

namespace brdr {

template <typename Real>
using row_mat =
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using vec_t = Eigen::Vector<Real, Eigen::Dynamic>;

template <typename Real>
struct param_store {
  arch_descriptor arch;
  std::vector<module_shape> mods;
  vec_t<Real> flat;

  int module_index(const std::string& name) const {
    for (int i = 0; i < int(mods.size()); ++i)
      if (mods[i].name == name) return i;
    throw shape_error("no such module: " + name);
  }
  Eigen::Map<const row_mat<Real>> mat(int m) const {
    return {flat.data() + mods[m].offset, mods[m].rows, mods[m].cols};
  }
  Eigen::Map<const vec_t<Real>> vec(int m) const {
    return {flat.data() + mods[m].offset, mods[m].rows};
  }
  Eigen::Map<const row_mat<Real>> mat(const std::string& n) const {
    return mat(module_index(n));
  }
  Eigen::Map<const vec_t<Real>> vec(const std::string& n) const {
    return vec(module_index(n));
  }
};

// Uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)], drawn in flat order.
inline param_store<double> init_params(const arch_descriptor& a, rng& gen) {
  param_store<double> p;
  p.arch = a;
  p.mods = module_table(a);
  p.flat.resize(param_count(a));
  for (const auto& m : p.mods) {
    const double bound = 1.0 / std::sqrt(double(m.fan_in));
    for (std::ptrdiff_t i = 0; i < m.size(); ++i)
      p.flat[m.offset + i] = gen.uniform(-bound, bound);
  }
  return p;
}

template <typename To, typename From>
param_store<To> cast_params(const param_store<From>& src) {
  param_store<To> dst;
  dst.arch = src.arch;
  dst.mods = src.mods;
  dst.flat = src.flat.template cast<To>();
  return dst;
}

struct checkpoint_meta {
  std::uint64_t seed = 0;
  long long iteration = 0;
};

namespace detail {
inline nlohmann::json arch_json(const arch_descriptor& a) {
  return {{"kind", a.kind == net_kind::mfcn ? "mfcn" : "mdeeponet"},
          {"input_dim", a.input_dim},
          {"branch_dim", a.branch_dim},
          {"width", a.width},
          {"depth", a.depth},
          {"output_dim", a.output_dim},
          {"fourier_modes", a.fourier_modes}};
}

inline arch_descriptor arch_from_json(const nlohmann::json& j) {
  arch_descriptor a;
  const std::string kind = j.at("kind");
  if (kind == "mfcn")
    a.kind = net_kind::mfcn;
  else if (kind == "mdeeponet")
    a.kind = net_kind::mdeeponet;
  else
    throw io_error("checkpoint: unknown net kind " + kind);
  a.input_dim = j.at("input_dim");
  a.branch_dim = j.at("branch_dim");
  a.width = j.at("width");
  a.depth = j.at("depth");
  a.output_dim = j.at("output_dim");
  a.fourier_modes = j.at("fourier_modes");
  a.validate();
  return a;
}
}  // namespace detail

inline void write_checkpoint(const std::string& path,
                             const param_store<double>& p,
                             const checkpoint_meta& meta) {
  nlohmann::json h{{"format", "brdr-ckpt"},
                   {"version", 1},
                   {"arch", detail::arch_json(p.arch)},
                   {"precision", "f64"},
                   {"param_count", p.flat.size()},
                   {"seed", meta.seed},
                   {"iteration", meta.iteration}};
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw io_error("cannot open checkpoint for writing: " + path);
  f << h.dump() << '\n' << '\0';
  f.write(reinterpret_cast<const char*>(p.flat.data()),
          std::streamsize(p.flat.size()) * 8);
  if (!f) throw io_error("short write on checkpoint: " + path);
}

inline param_store<double> read_checkpoint(const std::string& path,
                                           checkpoint_meta* meta = nullptr) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open checkpoint: " + path);
  std::string header;
  std::getline(f, header, '\0');
  if (!f) throw io_error("checkpoint truncated in header: " + path);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("checkpoint header is not valid JSON: ") +
                   e.what());
  }
  if (h.value("format", "") != "brdr-ckpt")
    throw io_error("not a checkpoint file: " + path);
  if (h.value("precision", "f64") != "f64")
    throw io_error("checkpoint precision not supported: " + path);
  param_store<double> p;
  p.arch = detail::arch_from_json(h.at("arch"));
  p.mods = module_table(p.arch);
  const std::ptrdiff_t n = param_count(p.arch);
  if (h.at("param_count").get<std::ptrdiff_t>() != n)
    throw io_error("checkpoint param_count disagrees with arch");
  p.flat.resize(n);
  f.read(reinterpret_cast<char*>(p.flat.data()), std::streamsize(n) * 8);
  if (f.gcount() != std::streamsize(n) * 8)
    throw io_error("checkpoint truncated in parameters: " + path);
  if (meta) {
    meta->seed = h.value("seed", std::uint64_t(0));
    meta->iteration = h.value("iteration", 0LL);
  }
  return p;
}

}  // namespace brdr
