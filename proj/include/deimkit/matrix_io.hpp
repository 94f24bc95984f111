#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "deimkit/matrix.hpp"

namespace deimkit {

// MatrixMarket dense array format and headerless CSV (one row per line).
// The writers emit 17 significant digits so round-trips are exact.

inline void write_matrix_market(const Matrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "%%MatrixMarket matrix array real general\n";
  out << a.rows() << " " << a.cols() << "\n";
  out << std::setprecision(17);
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) out << a(i, j) << "\n";
}

inline Matrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw IoError("not a MatrixMarket file: " + path);
  if (line.find("array") == std::string::npos || line.find("real") == std::string::npos)
    throw IoError("unsupported MatrixMarket variant (need 'array real'): " + path);
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream hdr(line);
  std::size_t rows = 0, cols = 0;
  if (!(hdr >> rows >> cols) || rows == 0 || cols == 0)
    throw IoError("bad MatrixMarket size line: " + path);
  Matrix a(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i)
      if (!(in >> a(i, j))) throw IoError("truncated MatrixMarket data: " + path);
  a.require_finite("read_matrix_market");
  return a;
}

inline void write_csv(const Matrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << std::setprecision(17);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j) out << ",";
      out << a(i, j);
    }
    out << "\n";
  }
}

inline Matrix read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("ragged CSV: " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty CSV: " + path);
  Matrix a(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) a(i, j) = rows[i][j];
  a.require_finite("read_csv");
  return a;
}

/// Dispatch on content: MatrixMarket header or plain CSV.
inline Matrix read_matrix_auto(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw IoError("cannot open: " + path);
  std::string first;
  std::getline(probe, first);
  probe.close();
  if (first.rfind("%%MatrixMarket", 0) == 0) return read_matrix_market(path);
  return read_csv(path);
}

}  // namespace deimkit
