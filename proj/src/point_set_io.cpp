#include "point_set_io.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace geoalign {

namespace {

struct Token {
  std::string text;
  long column;  // 1-based
};

// Splits a line on spaces/tabs, remembering where each token starts.
std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), static_cast<long>(start + 1)});
  }
  return out;
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') continue;
    return c == '#';
  }
  return true;
}

double parse_double(const std::string& name, long line, const Token& tok) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.text.c_str(), &end);
  if (end != tok.text.c_str() + tok.text.size() || tok.text.empty())
    throw ParseError(name, line, tok.column, "expected a number, got '" + tok.text + "'");
  if (errno == ERANGE || !std::isfinite(v))
    throw ParseError(name, line, tok.column, "number out of range: '" + tok.text + "'");
  return v;
}

std::int64_t parse_count(const std::string& name, long line, const Token& tok,
                         const char* what) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.text.c_str(), &end, 10);
  if (end != tok.text.c_str() + tok.text.size() || tok.text.empty())
    throw ParseError(name, line, tok.column,
                     std::string("expected ") + what + ", got '" + tok.text + "'");
  if (errno == ERANGE || v < 1)
    throw ParseError(name, line, tok.column,
                     std::string(what) + " must be a positive integer");
  return static_cast<std::int64_t>(v);
}

}  // namespace

WeightedPointSet read_point_set(std::istream& in, const std::string& name) {
  std::string line;
  long lineno = 0;
  std::int64_t d = -1, n = -1;

  // Header: "d n".
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    const auto toks = tokenize(line);
    if (toks.size() != 2)
      throw ParseError(name, lineno, toks.empty() ? 1 : toks[0].column,
                       "header must be 'd n'");
    d = parse_count(name, lineno, toks[0], "dimension");
    n = parse_count(name, lineno, toks[1], "point count");
    break;
  }
  if (d < 0)
    throw ParseError(name, lineno == 0 ? 1 : lineno, 1, "missing 'd n' header");

  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(static_cast<std::size_t>(n * d));
  weights.reserve(static_cast<std::size_t>(n));

  std::int64_t seen = 0;
  while (seen < n && std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    const auto toks = tokenize(line);
    if (static_cast<std::int64_t>(toks.size()) != d + 1) {
      if (static_cast<std::int64_t>(toks.size()) < d + 1)
        throw ParseError(name, lineno,
                         toks.empty() ? 1 : toks.back().column,
                         "expected weight plus " + std::to_string(d) +
                             " coordinates, got " + std::to_string(toks.size()) +
                             " values");
      throw ParseError(name, lineno, toks[static_cast<std::size_t>(d + 1)].column,
                       "unexpected extra value on point line");
    }
    const double w = parse_double(name, lineno, toks[0]);
    if (w <= 0.0)
      throw ParseError(name, lineno, toks[0].column, "weight must be > 0");
    weights.push_back(w);
    for (std::int64_t k = 0; k < d; ++k)
      coords.push_back(parse_double(name, lineno, toks[static_cast<std::size_t>(k + 1)]));
    ++seen;
  }
  if (seen < n)
    throw ParseError(name, lineno + 1, 1,
                     "expected " + std::to_string(n) + " point lines, got " +
                         std::to_string(seen));
  return WeightedPointSet(n, d, std::move(coords), std::move(weights));
}

WeightedPointSet load_point_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "' for reading");
  return read_point_set(in, path);
}

void write_point_set(std::ostream& out, const WeightedPointSet& p) {
  char buf[64];
  out << p.dim() << ' ' << p.size() << '\n';
  for (std::int64_t i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", p.weight(i));
    out << buf;
    const auto pt = p.point(i);
    for (std::int64_t k = 0; k < p.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", pt[static_cast<std::size_t>(k)]);
      out << ' ' << buf;
    }
    out << '\n';
  }
}

void save_point_set(const WeightedPointSet& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  write_point_set(out, p);
  if (!out) fail(ErrorKind::io, "failed writing '" + path + "'");
}

}  // namespace geoalign
