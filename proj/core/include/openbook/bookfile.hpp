#pragma once

// Line-oriented book description files.  Every record is one line of
// whitespace-separated key=value tokens behind a directive word; slot order
// and orientation are always explicit.  The schema is strict: unknown
// directives or keys are positioned errors, not warnings.

#include <cstdint>
#include <map>
#include <string>

#include "openbook/book.hpp"

namespace openbook {

struct ParseError : Error {
  ParseError(int line, int col, const std::string& message)
      : Error(std::to_string(line) + ":" + std::to_string(col) + ": " + message),
        line(line),
        col(col) {}
  int line;
  int col;
};

struct SolverSettings {
  bool full2d = false;
  int mode_min = 0;
  int mode_max = 0;
  int nodes = 200;
  int grid_ns = 64;
  int grid_nt = 64;
  int count = 10;
  double tol = 1e-9;
  double shift = -1.0;
  std::uint64_t seed = 1;
  double cluster_tol = 1e-6;

  bool operator==(const SolverSettings&) const = default;
};

struct ParsedBook {
  OpenBookComplex book;
  SolverSettings settings;
  ValidationReport validation;
  /// Source line of each declared entity id, for positioned diagnostics.
  std::map<std::string, int> entity_lines;
};

/// Throws ParseError on syntax or schema problems; structural validation
/// problems land in the returned report instead.
ParsedBook parse_book_file(const std::string& text);

/// Canonical re-emission; parse(emit(x)) == x structurally.
std::string emit_book_file(const OpenBookComplex& book, const SolverSettings& settings);

/// Validation entries with "(line N)" attached where the offending id is known.
std::vector<std::string> positioned_validation(const ParsedBook& parsed);

}  // namespace openbook
