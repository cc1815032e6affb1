#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cmq/expr.hpp"

namespace cmq {

/// Coordinate chart of a (2m+1)-dimensional contact metric structure.
/// All tensor entries are expressions over the declared coordinates;
/// omitted entries are zero. phi is stored row-major as phi[i*n + j],
/// the (1,1) tensor slot with upper index i and lower index j.
struct ChartStructure {
  int m = 0;
  std::vector<std::string> coords;
  std::vector<Expr> lambda;  // n covector entries
  std::vector<Expr> metric;  // n*n, symmetric
  std::vector<Expr> phi;     // n*n
  std::vector<Expr> xi;      // n vector entries

  int dim() const { return 2 * m + 1; }

  bool operator==(const ChartStructure& o) const = default;
};

/// Parses the chart file format:
///   dim = 3
///   coords = x, y, z
///   [lambda] / [metric] / [phi] / [xi] sections with `<index[ index]> = <expr>`
/// Indices are coordinate names or 1-based positions. A single off-diagonal
/// metric entry fills both symmetric slots; giving both with different
/// expressions is an error. Throws ParseError with line/column positions.
ChartStructure parse_chart(const std::string& text);

/// Canonical emission; parse_chart(emit_chart(c)) is structurally identical.
std::string emit_chart(const ChartStructure& c);

/// Built-in structures: heisenberg3, heisenberg5, deformed3 (parameter
/// "epsilon", default 0.3), sphere3. The registry verifies the omega/g/phi
/// cross-term of the compatibility equations at a sample point and flips the
/// sign of phi once if needed before handing the chart out.
ChartStructure builtin_chart(const std::string& name,
                             const std::map<std::string, double>& params = {});

std::vector<std::string> builtin_names();

}  // namespace cmq
