#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "symfact/cli.hpp"

namespace symfact::cli {

namespace {

struct Token {
  std::string_view text;
  std::size_t column;
};

std::vector<Token> split_tokens(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

bool parse_real(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  // from_chars also accepts "inf" and "nan"; the format allows only numerals.
  const char first = s.front() == '-' && s.size() > 1 ? s[1] : s.front();
  if (!std::isdigit(static_cast<unsigned char>(first)) && first != '.') return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

Complex parse_entry(const Token& t, std::size_t line) {
  const auto comma = t.text.find(',');
  double re = 0.0;
  double im = 0.0;
  const bool ok = comma == std::string_view::npos
                      ? parse_real(t.text, re)
                      : parse_real(t.text.substr(0, comma), re) && parse_real(t.text.substr(comma + 1), im);
  if (!ok) throw ParseError(line, t.column, "bad token '" + std::string(t.text) + "'");
  return {re, im};
}

std::size_t parse_dim(const Token& t, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc{} || ptr != t.text.data() + t.text.size() || v == 0) {
    throw ParseError(line, t.column, "expected a positive integer dimension, got '" + std::string(t.text) + "'");
  }
  return v;
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : ValidationError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

Matrix parse_matrix(std::string_view text) {
  Matrix m;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t filled = 0;
  bool header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto tokens = split_tokens(line);
    if (tokens.empty() || tokens.front().text.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (!header) {
      if (tokens.size() != 2) {
        throw ParseError(line_no, tokens.front().column, "header must be \"ROWS COLS\"");
      }
      rows = parse_dim(tokens[0], line_no);
      cols = parse_dim(tokens[1], line_no);
      m = Matrix(rows, cols);
      header = true;
    } else {
      if (filled == rows) throw ParseError(line_no, tokens.front().column, "more rows than the header declares");
      if (tokens.size() != cols) {
        const std::size_t col = tokens.size() > cols ? tokens[cols].column : line.size() + 1;
        throw ParseError(line_no, col, "expected " + std::to_string(cols) + " entries, found " +
                                           std::to_string(tokens.size()));
      }
      for (std::size_t j = 0; j < cols; ++j) m(filled, j) = parse_entry(tokens[j], line_no);
      ++filled;
    }
    if (end == text.size()) break;
  }
  if (!header) throw ParseError(line_no == 0 ? 1 : line_no, 1, "empty file: no \"ROWS COLS\" header");
  if (filled != rows) {
    throw ParseError(line_no, 1, "expected " + std::to_string(rows) + " rows, found " + std::to_string(filled));
  }
  return m;
}

std::string format_matrix(const Matrix& m) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ' ';
      out += format_real(m(i, j).real());
      out += ',';
      out += format_real(m(i, j).imag());
    }
    out += '\n';
  }
  return out;
}

}  // namespace symfact::cli
