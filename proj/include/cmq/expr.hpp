#pragma once

#include <span>
#include <string>
#include <vector>

#include "cmq/jet.hpp"

namespace cmq {

/// Value-semantic expression tree over declared chart coordinates.
/// Grammar: + - * / with unary minus, ^ with a literal integer exponent,
/// and the unary functions sin, cos, exp, sqrt.
struct Expr {
  enum class Kind { kNumber, kCoord, kAdd, kSub, kMul, kDiv, kNeg, kPow, kCall };

  Kind kind = Kind::kNumber;
  double number = 0.0;
  int coord = -1;          // kCoord: resolved coordinate slot
  std::string name;        // kCoord: coordinate symbol, kCall: function name
  long long exponent = 0;  // kPow
  std::vector<Expr> args;

  static Expr num(double v);
  static Expr coordinate(int slot, std::string symbol);

  bool operator==(const Expr& o) const;
  bool is_zero() const { return kind == Kind::kNumber && number == 0.0; }
};

/// Parses an expression against the declared coordinate list. `line` seeds
/// the positions reported in parse errors.
Expr parse_expr(const std::string& text, std::span<const std::string> coords, int line = 1);

/// Canonical text form; parse_expr(emit_expr(e)) reproduces e structurally.
std::string emit_expr(const Expr& e);

/// Evaluates the expression as a truncated Taylor jet at the base point.
Jet eval_jet(const Expr& e, std::span<const double> base, int order);

}  // namespace cmq
