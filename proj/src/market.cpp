#include "fr/market.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fr {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

void write_matrix_market(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows << " " << m.cols << "\n";
  // Array format stores values column by column.
  for (std::size_t j = 0; j < m.cols; ++j) {
    for (std::size_t i = 0; i < m.rows; ++i) {
      out << format_double(m.at(i, j)) << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

DenseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);

  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("empty file: " + path);
  }
  std::istringstream hs(header);
  std::string banner, object, fmt, field, symmetry;
  hs >> banner >> object >> fmt >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix" ||
      lower(fmt) != "array" || lower(field) != "real" ||
      lower(symmetry) != "general") {
    throw std::runtime_error("unsupported header in " + path + ": \"" +
                             header + "\" (need: matrix array real general)");
  }

  std::string line;
  std::size_t rows = 0, cols = 0;
  bool have_dims = false;
  std::vector<double> col_major;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '%') continue;
    std::istringstream ls(line);
    if (!have_dims) {
      if (!(ls >> rows >> cols)) continue;  // skip blank lines before dims
      have_dims = true;
      col_major.reserve(rows * cols);
      continue;
    }
    double v;
    while (ls >> v) col_major.push_back(v);
  }
  if (!have_dims) throw std::runtime_error("missing dimensions in " + path);
  if (col_major.size() != rows * cols) {
    throw std::runtime_error("value count " + std::to_string(col_major.size()) +
                             " does not match " + std::to_string(rows) + "x" +
                             std::to_string(cols) + " in " + path);
  }
  for (double v : col_major) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("non-finite value in " + path);
    }
  }

  DenseMatrix m(rows, cols);
  std::size_t idx = 0;
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) m.at(i, j) = col_major[idx++];
  }
  return m;
}

void write_vector_market(const std::string& path, const Vec& v) {
  DenseMatrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m.at(i, 0) = v[i];
  write_matrix_market(path, m);
}

Vec read_vector_market(const std::string& path) {
  DenseMatrix m = read_matrix_market(path);
  if (m.cols != 1 && m.rows != 1) {
    throw std::runtime_error("expected a single-column vector in " + path +
                             ", got " + std::to_string(m.rows) + "x" +
                             std::to_string(m.cols));
  }
  return m.a;  // row- and column-major agree for a single row/column
}

}  // namespace fr
