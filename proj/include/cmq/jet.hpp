#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cmq/common.hpp"

namespace cmq {

// Exponent multi-indices are packed into a u64: the top byte holds the total
// degree and bytes 6..0 hold the per-variable exponents (variable 0 sits in
// byte 6). Unsigned comparison of the packed value is then exactly the
// graded-lexicographic monomial order, and monomial multiplication is integer
// addition (exponents stay < 256 because orders are capped well below that).
namespace mono {

inline constexpr int kMaxVars = 7;
inline constexpr std::uint64_t kOne = 0;

inline std::uint64_t var(int i) {
  return (std::uint64_t(1) << 56) | (std::uint64_t(1) << (8 * (6 - i)));
}
inline int degree(std::uint64_t m) { return int(m >> 56); }
inline int exponent(std::uint64_t m, int i) { return int((m >> (8 * (6 - i))) & 0xff); }
inline std::uint64_t mul(std::uint64_t a, std::uint64_t b) { return a + b; }
inline std::uint64_t div_var(std::uint64_t m, int i) { return m - var(i); }

std::string to_string(std::uint64_t m, int n_vars);

}  // namespace mono

/// Truncated Taylor jet at a base point: a sparse polynomial in the local
/// coordinate offsets with complex coefficients, exact through total degree
/// `order`. Terms are kept sorted in graded-lex order with exact zeros
/// removed. Arithmetic between jets of different orders truncates to the
/// smaller order (the sum/product is only trustworthy there); mismatched
/// variable counts are a hard shape error.
class Jet {
 public:
  Jet() = default;
  Jet(int n_vars, int order);

  static Jet constant(int n_vars, int order, Cplx value);
  /// Jet of the i-th coordinate function around base value `value`.
  static Jet variable(int i, Cplx value, int n_vars, int order);

  int n_vars() const { return n_vars_; }
  int order() const { return order_; }
  const std::vector<std::pair<std::uint64_t, Cplx>>& terms() const { return terms_; }

  Cplx value() const;
  Cplx coeff(std::uint64_t m) const;
  void set_coeff(std::uint64_t m, Cplx c);

  /// Same jet viewed at a lower order (new_order is clamped to the current one).
  Jet truncated(int new_order) const;
  /// Partial derivative in coordinate i; consumes one order of the budget.
  Jet partial(int i) const;

  /// *this += scale * a * b, truncated to min(order(), a.order(), b.order()).
  void fma(const Jet& a, const Jet& b, Cplx scale = Cplx(1.0));
  void add_scaled(const Jet& a, Cplx scale);

  double max_abs() const;
  bool empty() const { return terms_.empty(); }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(Cplx s);

  friend Jet operator+(Jet a, const Jet& b) {
    a += b;
    return a;
  }
  friend Jet operator-(Jet a, const Jet& b) {
    a -= b;
    return a;
  }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator*(Jet a, Cplx s) {
    a *= s;
    return a;
  }
  friend Jet operator*(Cplx s, Jet a) {
    a *= s;
    return a;
  }
  friend Jet operator-(Jet a) {
    a *= Cplx(-1.0);
    return a;
  }
  friend Jet operator+(Jet a, Cplx s) {
    a.set_coeff(mono::kOne, a.value() + s);
    return a;
  }

 private:
  void check_vars(const Jet& o) const;
  void drop_above_order();

  int n_vars_ = 0;
  int order_ = 0;
  std::vector<std::pair<std::uint64_t, Cplx>> terms_;
};

enum class ElemFn { kExp, kSin, kCos, kSqrt, kRecip };

/// Composition with an elementary function, exact through the jet order.
/// sqrt requires a strictly positive real constant term, recip a nonzero one.
Jet jet_elem(ElemFn f, const Jet& a);

/// Integer power; negative exponents go through recip and inherit its domain
/// requirement.
Jet jet_pow_int(const Jet& a, long long k);

double max_abs_diff(const Jet& a, const Jet& b);

/// Complex conjugate of every coefficient; monomials are untouched.
Jet conjugate(const Jet& a);

}  // namespace cmq
