#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include <Eigen/Core>

#include "brdr/common.hpp"

// CSV emission and parsing for metrics logs and reference-solution caches.
// Reals are written with 17 significant digits so every value round-trips
// to the exact bit pattern.

namespace brdr {

struct csv_table {
  std::vector<std::string> header;
  Eigen::MatrixXd data;
};

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& data) {
  if (header.empty()) throw precondition_error("write_csv: empty header");
  if (data.rows() > 0 && data.cols() != std::ptrdiff_t(header.size()))
    throw shape_error("write_csv: column count does not match header");
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw io_error("write_csv: cannot open " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].empty() || header[i].find(',') != std::string::npos ||
        header[i].find('\n') != std::string::npos)
      throw precondition_error("write_csv: bad column name");
    if (i) f << ',';
    f << header[i];
  }
  f << '\n';
  for (std::ptrdiff_t r = 0; r < data.rows(); ++r) {
    for (std::ptrdiff_t c = 0; c < data.cols(); ++c) {
      if (c) f << ',';
      f << fmt17(data(r, c));
    }
    f << '\n';
  }
  f.close();
  if (!f) throw io_error("write_csv: write failed for " + path);
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace detail

inline csv_table read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw io_error("read_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  csv_table t;
  t.header = detail::split_fields(line);
  const std::size_t ncol = t.header.size();
  std::vector<double> vals;
  std::size_t nrow = 0, lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_fields(line);
    if (fields.size() != ncol)
      throw io_error("read_csv: wrong field count at line " + std::to_string(lineno) +
                     " of " + path);
    for (const std::string& s : fields) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw io_error("read_csv: bad number '" + s + "' at line " +
                       std::to_string(lineno) + " of " + path);
      vals.push_back(v);
    }
    ++nrow;
  }
  t.data.resize(std::ptrdiff_t(nrow), std::ptrdiff_t(ncol));
  for (std::size_t r = 0; r < nrow; ++r)
    for (std::size_t c = 0; c < ncol; ++c)
      t.data(std::ptrdiff_t(r), std::ptrdiff_t(c)) = vals[r * ncol + c];
  return t;
}

// Reference-solution cache: coordinate columns followed by a final u column.

inline void write_solution_csv(const std::string& path,
                               const std::vector<std::string>& coord_names,
                               const Eigen::MatrixXd& grid, const Eigen::VectorXd& u) {
  if (grid.rows() != u.size()) throw shape_error("write_solution_csv: length mismatch");
  if (grid.cols() != std::ptrdiff_t(coord_names.size()))
    throw shape_error("write_solution_csv: coordinate name count mismatch");
  std::vector<std::string> header = coord_names;
  header.push_back("u");
  Eigen::MatrixXd data(grid.rows(), grid.cols() + 1);
  data.leftCols(grid.cols()) = grid;
  data.col(grid.cols()) = u;
  write_csv(path, header, data);
}

inline Eigen::VectorXd read_solution_csv(const std::string& path,
                                         const Eigen::MatrixXd& grid) {
  const csv_table t = read_csv(path);
  if (t.header.empty() || t.header.back() != "u")
    throw io_error("solution cache: last column must be u: " + path);
  if (t.data.rows() != grid.rows() || t.data.cols() != grid.cols() + 1)
    throw io_error("solution cache: unexpected table shape: " + path);
  // fmt17 round-trips exactly, so a matching grid compares equal bit for bit
  if (!(t.data.leftCols(grid.cols()).array() == grid.array()).all())
    throw io_error("solution cache: grid mismatch: " + path);
  return t.data.col(grid.cols());
}

}  // namespace brdr
