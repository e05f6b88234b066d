// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mkhbm/error.hpp"
#include "mkhbm/linalg.hpp"

namespace mkhbm {

namespace {

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

Matrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Format, "empty MatrixMarket stream");
  std::istringstream header(lowercase(line));
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix" || format != "coordinate" || field != "real" ||
      symmetry != "general") {
    fail(ErrorKind::Format, "only '%%MatrixMarket matrix coordinate real general' is supported");
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::size_t rows = 0, cols = 0, entries = 0;
  if (!(std::istringstream(line) >> rows >> cols >> entries)) fail(ErrorKind::Format, "bad MatrixMarket size line");

  std::vector<Triplet> triplets;
  triplets.reserve(entries);
  for (std::size_t k = 0; k < entries; ++k) {
    std::size_t r = 0, c = 0;
    double v = 0.0;
    if (!(in >> r >> c >> v)) fail(ErrorKind::Format, "truncated MatrixMarket entry list");
    if (r == 0 || c == 0) fail(ErrorKind::Format, "MatrixMarket indices are 1-based");
    triplets.push_back({r - 1, c - 1, v});
  }
  return Matrix::from_triplets(rows, cols, std::move(triplets));
}

Matrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const Matrix& a) {
  const Matrix csr = a.to_csr();
  const auto& s = csr.csr_values();
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << s.values.size() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", s.values[k]);
      out << (i + 1) << ' ' << (s.col_indices[k] + 1) << ' ' << buf << '\n';
    }
  }
}

void write_matrix_market(const std::filesystem::path& path, const Matrix& a) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  write_matrix_market(out, a);
}

}  // namespace mkhbm
