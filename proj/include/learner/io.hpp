#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "learner/matrix_core.hpp"

namespace learner {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool is_missing_token(std::string_view s) {
  return s.empty() || (s.size() == 2 && std::toupper(static_cast<unsigned char>(s[0])) == 'N' &&
                       std::toupper(static_cast<unsigned char>(s[1])) == 'A');
}

inline bool parse_number(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

}  // namespace detail

/// Parses delimited text: one row per line, `NA` (any case) or an empty field
/// marks a missing entry, and a first line containing a non-numeric,
/// non-missing token is taken as a header and skipped.
inline ObservedMatrix parse_matrix(std::string_view text, char delim = ',') {
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t pos = text.find('\n', start);
      if (pos == std::string_view::npos) pos = text.size();
      std::string line(text.substr(start, pos - start));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
      start = pos + 1;
    }
    while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  }
  require(!lines.empty(), ErrorCode::EmptyMatrix, "no rows");

  std::size_t first = 0;
  {
    double scratch = 0.0;
    for (auto tok : detail::split(lines[0], delim)) {
      if (!detail::is_missing_token(tok) && !detail::parse_number(tok, scratch)) {
        first = 1;
        break;
      }
    }
  }
  const auto nrows = static_cast<Index>(lines.size() - first);
  require(nrows > 0, ErrorCode::EmptyMatrix, "header without data rows");

  Matrix values;
  Mask mask;
  Index ncols = -1;
  for (std::size_t li = first; li < lines.size(); ++li) {
    const auto fields = detail::split(lines[li], delim);
    const auto row = static_cast<Index>(li - first);
    if (ncols < 0) {
      ncols = static_cast<Index>(fields.size());
      values = Matrix::Zero(nrows, ncols);
      mask = Mask::Constant(nrows, ncols, false);
    }
    require(static_cast<Index>(fields.size()) == ncols, ErrorCode::RaggedRows,
            "line " + std::to_string(li + 1) + " has " + std::to_string(fields.size()) + " fields, expected " +
                std::to_string(ncols));
    for (Index j = 0; j < ncols; ++j) {
      const auto tok = fields[static_cast<std::size_t>(j)];
      if (detail::is_missing_token(tok)) continue;
      double x = 0.0;
      require(detail::parse_number(tok, x), ErrorCode::ParseError,
              "line " + std::to_string(li + 1) + ", column " + std::to_string(j + 1) + ": '" + std::string(tok) +
                  "' is not a finite number");
      values(row, j) = x;
      mask(row, j) = true;
    }
  }
  require(mask.any(), ErrorCode::AllMissing, "every entry is missing");
  return ObservedMatrix(std::move(values), std::move(mask));
}

inline ObservedMatrix read_matrix(const std::string& path, char delim = ',') {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_matrix(buf.str(), delim);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

inline std::string format_matrix(const Matrix& values, const Mask* mask = nullptr, char delim = ',') {
  require(values.rows() > 0 && values.cols() > 0, ErrorCode::EmptyMatrix, "matrix has no entries");
  std::string out;
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j > 0) out += delim;
      if (mask != nullptr && !(*mask)(i, j)) out += "NA";
      else out += format_double(values(i, j));
    }
    out += '\n';
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorCode::IoError, "cannot write '" + path + "'");
  f << text;
  f.flush();
  require(static_cast<bool>(f), ErrorCode::IoError, "write to '" + path + "' failed");
}

inline void write_matrix(const Matrix& values, const std::string& path, char delim = ',') {
  write_text(path, format_matrix(values, nullptr, delim));
}

inline void write_matrix(const ObservedMatrix& m, const std::string& path, char delim = ',') {
  write_text(path, format_matrix(m.values(), &m.mask(), delim));
}

}  // namespace learner
