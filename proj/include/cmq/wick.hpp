#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "cmq/geometry.hpp"

namespace cmq {

/// Key of one homogeneous monomial nu^p y^alpha dx^F of an algebra-valued
/// form. `y` uses the packed mono:: encoding, `form` is the bitmask of the
/// strictly increasing dx index set. Keys order by (nu, y, form), which is
/// graded-lex on the fiber monomial.
struct WKey {
  std::uint8_t nu = 0;
  std::uint64_t y = mono::kOne;
  std::uint8_t form = 0;

  int nu_degree() const { return 2 * int(nu) + mono::degree(y); }
  int form_degree() const { return std::popcount(std::uint32_t(form)); }

  friend bool operator==(const WKey&, const WKey&) = default;
  friend bool operator<(const WKey& a, const WKey& b) {
    if (a.nu != b.nu) return a.nu < b.nu;
    if (a.y != b.y) return a.y < b.y;
    return a.form < b.form;
  }
};

/// Element of the truncated formal Wick algebra tensored with forms at one
/// base point: a finite sum of nu^p y^alpha dx^F with Jet coefficients in the
/// chart coordinates. With deg nu = 2 and deg y = 1, every stored monomial
/// satisfies 2p + |alpha| <= nu_cutoff; higher terms are dropped on insertion
/// (all operations truncate immediately). Zero coefficients are pruned.
class WickElement {
 public:
  WickElement() = default;
  WickElement(int n_vars, int nu_cutoff) : n_vars_(n_vars), cutoff_(nu_cutoff) {}

  /// Scalar embedding: the jet as the (p=0, alpha=0, F=empty) coefficient.
  static WickElement scalar(const Jet& a0, int nu_cutoff);

  int n_vars() const { return n_vars_; }
  int nu_cutoff() const { return cutoff_; }
  bool empty() const { return terms_.empty(); }
  const std::map<WKey, Jet>& terms() const { return terms_; }

  /// Coefficient lookup; absent keys read as a zero jet of ample order.
  Jet coeff(const WKey& k) const;

  /// Accumulates c into the coefficient of k; silently drops terms beyond the
  /// nu-cutoff and prunes exact zeros.
  void add_term(const WKey& k, const Jet& c, Cplx scale = Cplx(1.0));

  /// Minimal jet order across coefficients (the remaining derivative budget);
  /// an empty element reports the given fallback.
  int min_order(int fallback = 0) const;

  /// Smallest nu-degree 2p+|alpha| present, or nu_cutoff+1 when empty.
  int lowest_nu_degree() const;

  /// Drops every term of nu-degree above `deg` (keeps the cutoff field).
  WickElement truncated_nu_degree(int deg) const;

  /// Multiplies by scale * nu^shift; shifting below nu-power 0 is a hard
  /// error, it signals a missing factor in a formal-division call site.
  WickElement nu_shifted(int shift, Cplx scale = Cplx(1.0)) const;

  double max_abs() const;

  WickElement& operator+=(const WickElement& o);
  WickElement& operator-=(const WickElement& o);
  WickElement& operator*=(Cplx s);
  friend WickElement operator+(WickElement a, const WickElement& b) { return a += b; }
  friend WickElement operator-(WickElement a, const WickElement& b) { return a -= b; }
  friend WickElement operator*(WickElement a, Cplx s) { return a *= s; }
  friend WickElement operator*(Cplx s, WickElement a) { return a *= s; }

 private:
  void check_compatible(const WickElement& o) const;

  int n_vars_ = 0;
  int cutoff_ = 0;
  std::map<WKey, Jet> terms_;
};

double max_abs_diff(const WickElement& a, const WickElement& b);

/// Fiberwise product exp((nu/2) h^ij d/dy^i d/dz^j) a(y) b(z) at z = y, with
/// wedge signs on the form factors and immediate nu-cutoff truncation.
WickElement circ(const GeometryFrame& f, const WickElement& a, const WickElement& b);

/// Graded commutator a o b - (-1)^{|Fa||Fb|} b o a, applied per term pair.
WickElement commutator(const GeometryFrame& f, const WickElement& a,
                       const WickElement& b);

/// Pointwise (no-contraction) graded product of the fiber polynomials.
WickElement dot_mul(const WickElement& a, const WickElement& b);

/// delta = dx^i wedge d/dy^i.
WickElement delta(const WickElement& a);

/// delta* = y^i P^j_i i_{d/dx^j}.
WickElement delta_star(const GeometryFrame& f, const WickElement& a);

/// Homotopy inverse of delta: delta* scaled per monomial y-degree m and form
/// degree n, 1/(m+n) on the xi-transverse form part and 1/(m+n-1) on the
/// lambda-wedge part, with the degenerate cases dropped.
WickElement delta_inv(const GeometryFrame& f, const WickElement& a);

/// Pi a = a(x,0,0,nu) + lambda wedge (i_xi a)(x,0,0,nu).
WickElement proj_Pi(const GeometryFrame& f, const WickElement& a);

/// Exterior covariant derivative dx^i wedge (d_i - y^j Gamma^k_{ji} d/dy^k);
/// consumes one jet order of every coefficient.
WickElement cov_d(const GeometryFrame& f, const WickElement& a);

/// Interior product of the form part with the Reeb field.
WickElement xi_contract(const GeometryFrame& f, const WickElement& a);

/// Left wedge with the contact form lambda_i dx^i.
WickElement lambda_wedge(const GeometryFrame& f, const WickElement& a);

/// Canonical torsion and curvature elements (1/2) T_kij y^k dx^i dx^j and
/// -(1/4) R_ijkl y^i y^j dx^k dx^l.
std::pair<WickElement, WickElement> make_T_R(const GeometryFrame& f, int nu_cutoff);

/// Max-norm of xi^i d/dy^i applied to a (zero on xi-transverse elements).
double transversality_residual(const GeometryFrame& f, const WickElement& a);

/// nu-power coefficients of the pure scalar (y = 0, F = empty) part.
std::vector<Jet> scalar_series(const WickElement& a);

}  // namespace cmq
