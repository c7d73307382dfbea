#pragma once

#include <compare>
#include <stdexcept>
#include <string>

namespace sentinel {

// Half-open source region. Line and column are 1-based; a default Span
// (line 0) means "no usable location", which printers render without
// positions.
struct Span {
  std::string file;
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;

  bool known() const { return line > 0; }
  auto operator<=>(const Span&) const = default;
  bool operator==(const Span&) const = default;

  std::string str() const {
    if (!known()) return file.empty() ? std::string("<unknown>") : file;
    return file + ":" + std::to_string(line) + ":" + std::to_string(col);
  }
};

inline Span join(const Span& a, const Span& b) {
  if (!a.known()) return b;
  if (!b.known()) return a;
  Span s = a;
  s.end_line = b.end_line;
  s.end_col = b.end_col;
  return s;
}

struct ParseError : std::runtime_error {
  Span span;
  ParseError(Span sp, const std::string& msg)
      : std::runtime_error(sp.str() + ": " + msg), span(std::move(sp)) {}
};

struct ResolveError : std::runtime_error {
  Span span;
  ResolveError(Span sp, const std::string& msg)
      : std::runtime_error(sp.str() + ": " + msg), span(std::move(sp)) {}
};

// Raised when term canonicalization meets an undefined combination of the
// two logical constants, e.g. the sum of positive and negative infinity.
struct IndeterminateForm : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a query exceeds the disjunct or coefficient budget. Surfaces
// as a distinguished process exit code so scripted runs can tell resource
// exhaustion from an ordinary verification failure.
struct ResourceLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sentinel
