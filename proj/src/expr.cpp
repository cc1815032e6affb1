#include "cmq/expr.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace cmq {

Expr Expr::num(double v) {
  Expr e;
  e.kind = Kind::kNumber;
  e.number = v;
  return e;
}

Expr Expr::coordinate(int slot, std::string symbol) {
  Expr e;
  e.kind = Kind::kCoord;
  e.coord = slot;
  e.name = std::move(symbol);
  return e;
}

bool Expr::operator==(const Expr& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::kNumber:
      return number == o.number;
    case Kind::kCoord:
      return coord == o.coord;
    case Kind::kPow:
      return exponent == o.exponent && args == o.args;
    case Kind::kCall:
      return name == o.name && args == o.args;
    default:
      return args == o.args;
  }
}

namespace {

struct Parser {
  const std::string& text;
  std::span<const std::string> coords;
  int line;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError(line, int(at) + 1, msg);
  }

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  Expr parse() {
    Expr e = sum();
    skip_ws();
    if (pos != text.size()) fail("unexpected trailing input", pos);
    return e;
  }

  Expr sum() {
    Expr e = term();
    for (;;) {
      if (eat('+')) {
        Expr r;
        r.kind = Expr::Kind::kAdd;
        r.args = {std::move(e), term()};
        e = std::move(r);
      } else if (eat('-')) {
        Expr r;
        r.kind = Expr::Kind::kSub;
        r.args = {std::move(e), term()};
        e = std::move(r);
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (eat('*')) {
        Expr r;
        r.kind = Expr::Kind::kMul;
        r.args = {std::move(e), factor()};
        e = std::move(r);
      } else if (eat('/')) {
        Expr r;
        r.kind = Expr::Kind::kDiv;
        r.args = {std::move(e), factor()};
        e = std::move(r);
      } else {
        return e;
      }
    }
  }

  Expr factor() {
    if (eat('-')) {
      Expr r;
      r.kind = Expr::Kind::kNeg;
      r.args = {factor()};
      return r;
    }
    return power();
  }

  Expr power() {
    Expr base = atom();
    skip_ws();
    if (pos < text.size() && text[pos] == '^') {
      std::size_t caret = pos;
      ++pos;
      skip_ws();
      std::size_t start = pos;
      if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos == start || (pos == start + 1 && !std::isdigit(static_cast<unsigned char>(text[start]))))
        fail("exponent must be a literal integer", caret);
      skip_ws();
      if (pos < text.size() && text[pos] == '^') fail("chained exponents are not supported", pos);
      Expr r;
      r.kind = Expr::Kind::kPow;
      r.exponent = std::strtoll(text.c_str() + start, nullptr, 10);
      r.args = {std::move(base)};
      return r;
    }
    return base;
  }

  Expr atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression", pos);
    char c = text[pos];
    if (c == '(') {
      std::size_t open = pos;
      ++pos;
      Expr e = sum();
      if (!eat(')')) fail("missing closing parenthesis", open);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      double v = std::strtod(text.c_str() + pos, &end);
      if (end == text.c_str() + pos) fail("malformed number", pos);
      pos = std::size_t(end - text.c_str());
      return Expr::num(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
        ++pos;
      std::string name = text.substr(start, pos - start);
      if (peek() == '(') {
        if (name != "sin" && name != "cos" && name != "exp" && name != "sqrt")
          fail("unknown function '" + name + "'", start);
        eat('(');
        Expr arg = sum();
        if (!eat(')')) fail("missing closing parenthesis in call to '" + name + "'", start);
        Expr r;
        r.kind = Expr::Kind::kCall;
        r.name = name;
        r.args = {std::move(arg)};
        return r;
      }
      for (std::size_t i = 0; i < coords.size(); ++i)
        if (coords[i] == name) return Expr::coordinate(int(i), name);
      fail("undeclared coordinate '" + name + "'", start);
    }
    fail(std::string("unexpected character '") + c + "'", pos);
  }
};

int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::kAdd:
    case Expr::Kind::kSub:
      return 1;
    case Expr::Kind::kMul:
    case Expr::Kind::kDiv:
      return 2;
    case Expr::Kind::kNeg:
      return 3;
    case Expr::Kind::kPow:
      return 4;
    default:
      return 5;
  }
}

void emit(const Expr& e, std::string& out, int parent_prec) {
  int prec = precedence(e.kind);
  bool paren = prec < parent_prec;
  if (paren) out += "(";
  switch (e.kind) {
    case Expr::Kind::kNumber: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", e.number);
      out += buf;
      break;
    }
    case Expr::Kind::kCoord:
      out += e.name;
      break;
    case Expr::Kind::kAdd:
      emit(e.args[0], out, prec);
      out += " + ";
      emit(e.args[1], out, prec + 1);
      break;
    case Expr::Kind::kSub:
      emit(e.args[0], out, prec);
      out += " - ";
      emit(e.args[1], out, prec + 1);
      break;
    case Expr::Kind::kMul:
      emit(e.args[0], out, prec);
      out += "*";
      emit(e.args[1], out, prec + 1);
      break;
    case Expr::Kind::kDiv:
      emit(e.args[0], out, prec);
      out += "/";
      emit(e.args[1], out, prec + 1);
      break;
    case Expr::Kind::kNeg:
      out += "-";
      emit(e.args[0], out, prec + 1);
      break;
    case Expr::Kind::kPow:
      emit(e.args[0], out, prec + 1);
      out += "^" + std::to_string(e.exponent);
      break;
    case Expr::Kind::kCall:
      out += e.name + "(";
      emit(e.args[0], out, 0);
      out += ")";
      break;
  }
  if (paren) out += ")";
}

}  // namespace

Expr parse_expr(const std::string& text, std::span<const std::string> coords, int line) {
  Parser p{text, coords, line};
  return p.parse();
}

std::string emit_expr(const Expr& e) {
  std::string out;
  emit(e, out, 0);
  return out;
}

Jet eval_jet(const Expr& e, std::span<const double> base, int order) {
  int n = int(base.size());
  switch (e.kind) {
    case Expr::Kind::kNumber:
      return Jet::constant(n, order, Cplx(e.number));
    case Expr::Kind::kCoord:
      return Jet::variable(e.coord, Cplx(base[std::size_t(e.coord)]), n, order);
    case Expr::Kind::kAdd:
      return eval_jet(e.args[0], base, order) + eval_jet(e.args[1], base, order);
    case Expr::Kind::kSub:
      return eval_jet(e.args[0], base, order) - eval_jet(e.args[1], base, order);
    case Expr::Kind::kMul:
      return eval_jet(e.args[0], base, order) * eval_jet(e.args[1], base, order);
    case Expr::Kind::kDiv:
      return eval_jet(e.args[0], base, order) *
             jet_elem(ElemFn::kRecip, eval_jet(e.args[1], base, order));
    case Expr::Kind::kNeg:
      return -eval_jet(e.args[0], base, order);
    case Expr::Kind::kPow:
      return jet_pow_int(eval_jet(e.args[0], base, order), e.exponent);
    case Expr::Kind::kCall: {
      Jet a = eval_jet(e.args[0], base, order);
      if (e.name == "sin") return jet_elem(ElemFn::kSin, a);
      if (e.name == "cos") return jet_elem(ElemFn::kCos, a);
      if (e.name == "exp") return jet_elem(ElemFn::kExp, a);
      return jet_elem(ElemFn::kSqrt, a);
    }
  }
  throw Error("unreachable expression kind");
}

}  // namespace cmq
