#pragma once

// Network architecture descriptors and the canonical parameter layout.
//
// Two families:
//   mfcn       gated fully connected net: two auxiliary encoders U,V mix into
//              every hidden layer, H^l = (1-Z^l).U + Z^l.V
//   mdeeponet  two mfcn-style towers (branch over sensor values, trunk over
//              coordinates) sharing the U,V encoders, combined by a dot
//              product over the latent dimension
//
// Flat parameter order is part of the on-disk contract: modules in table
// order, each weight matrix stored row-major, its bias following it.

#include <cstddef>
#include <string>
#include <vector>

#include "brdr/common.hpp"

namespace brdr {

enum class net_kind { mfcn, mdeeponet };

struct arch_descriptor {
  net_kind kind = net_kind::mfcn;
  int input_dim = 1;   // coordinate (trunk) input dimension
  int branch_dim = 0;  // sensor count, mdeeponet only
  int width = 32;
  int depth = 4;       // hidden layers per tower
  int output_dim = 1;  // latent dimension for mdeeponet
  // Embeds axis 0 as [sin(pi b x), cos(pi b x)]_{b=1..modes}, remaining axes
  // pass through. Zero disables.
  int fourier_modes = 0;

  int embedded_dim() const {
    return fourier_modes > 0 ? 2 * fourier_modes + (input_dim - 1) : input_dim;
  }

  void validate() const {
    if (input_dim < 1 || width < 1 || depth < 1 || output_dim < 1)
      throw config_error("arch: dimensions must be positive");
    if (kind == net_kind::mdeeponet) {
      if (branch_dim < 1)
        throw config_error("arch: mdeeponet requires branch_dim >= 1");
      if (fourier_modes > 0)
        throw config_error("arch: fourier embedding is mfcn-only");
    } else if (branch_dim != 0) {
      throw config_error("arch: branch_dim is mdeeponet-only");
    }
    if (kind == net_kind::mfcn && output_dim != 1)
      throw config_error("arch: mfcn output_dim must be 1");
  }
};

struct module_shape {
  std::string name;
  int rows, cols;  // bias: cols == 1
  int fan_in;      // init bound is 1/sqrt(fan_in)
  std::ptrdiff_t offset;
  std::ptrdiff_t size() const { return std::ptrdiff_t(rows) * cols; }
};

inline std::vector<module_shape> module_table(const arch_descriptor& a) {
  a.validate();
  std::vector<module_shape> t;
  std::ptrdiff_t off = 0;
  auto add = [&](const std::string& name, int rows, int cols, int fan_in) {
    t.push_back({name, rows, cols, fan_in, off});
    off += std::ptrdiff_t(rows) * cols;
  };
  auto linear = [&](const std::string& name, int out, int in) {
    add("W" + name, out, in, in);
    add("b" + name, out, 1, in);
  };
  auto tower = [&](const std::string& tag, int in, int out) {
    linear(tag + "1", a.width, in);
    for (int l = 2; l <= a.depth; ++l)
      linear(tag + std::to_string(l), a.width, a.width);
    linear(tag + std::to_string(a.depth + 1), out, a.width);
  };
  if (a.kind == net_kind::mfcn) {
    const int e = a.embedded_dim();
    linear("U", a.width, e);
    linear("V", a.width, e);
    tower("", e, a.output_dim);
  } else {
    linear("U", a.width, a.branch_dim);
    linear("V", a.width, a.input_dim);
    tower("u", a.branch_dim, a.output_dim);
    tower("x", a.input_dim, a.output_dim);
  }
  return t;
}

inline std::ptrdiff_t param_count(const arch_descriptor& a) {
  const auto t = module_table(a);
  return t.back().offset + t.back().size();
}

// Descriptor strings, e.g.
//   mfcn:in=2,width=64,depth=4,fourier=10
//   mdeeponet:branch=101,in=2,width=100,depth=7,latent=100
inline std::string arch_to_string(const arch_descriptor& a) {
  std::string s = a.kind == net_kind::mfcn ? "mfcn" : "mdeeponet";
  s += ":";
  if (a.kind == net_kind::mdeeponet)
    s += "branch=" + std::to_string(a.branch_dim) + ",";
  s += "in=" + std::to_string(a.input_dim);
  s += ",width=" + std::to_string(a.width);
  s += ",depth=" + std::to_string(a.depth);
  if (a.kind == net_kind::mdeeponet)
    s += ",latent=" + std::to_string(a.output_dim);
  if (a.fourier_modes > 0) s += ",fourier=" + std::to_string(a.fourier_modes);
  return s;
}

inline arch_descriptor parse_arch(const std::string& s) {
  arch_descriptor a;
  const auto colon = s.find(':');
  if (colon == std::string::npos)
    throw config_error("arch string needs kind prefix: " + s);
  const std::string kind = s.substr(0, colon);
  if (kind == "mfcn")
    a.kind = net_kind::mfcn;
  else if (kind == "mdeeponet")
    a.kind = net_kind::mdeeponet;
  else
    throw config_error("unknown net kind: " + kind);
  std::size_t pos = colon + 1;
  while (pos < s.size()) {
    auto end = s.find(',', pos);
    if (end == std::string::npos) end = s.size();
    const std::string item = s.substr(pos, end - pos);
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw config_error("arch field needs key=value: " + item);
    const std::string key = item.substr(0, eq);
    int val = 0;
    try {
      val = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw config_error("arch field not an integer: " + item);
    }
    if (key == "in")
      a.input_dim = val;
    else if (key == "branch")
      a.branch_dim = val;
    else if (key == "width")
      a.width = val;
    else if (key == "depth")
      a.depth = val;
    else if (key == "latent" || key == "out")
      a.output_dim = val;
    else if (key == "fourier")
      a.fourier_modes = val;
    else
      throw config_error("unknown arch field: " + key);
    pos = end + 1;
  }
  a.validate();
  return a;
}

}  // namespace brdr
