#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmq/jet.hpp"
#include "testutil.hpp"

using namespace cmq;
using cmqtest::Rng;

namespace {

Jet var(int i, double v, int n, int ord) { return Jet::variable(i, Cplx(v), n, ord); }

}  // namespace

TEST_CASE("coordinate jets carry value and unit slope") {
  Jet x1 = var(1, 2.0, 2, 3);
  CHECK(x1.value() == Cplx(2.0));
  CHECK(x1.coeff(mono::var(1)) == Cplx(1.0));
  CHECK(x1.coeff(mono::var(0)) == Cplx(0.0));

  Jet x0 = var(0, 5.0, 1, 0);
  CHECK(x0.value() == Cplx(5.0));
  CHECK(x0.terms().size() == 1);  // no linear term at order 0
}

TEST_CASE("products truncate at the jet order") {
  int n = 1, ord = 2;
  Jet x = var(0, 0.0, n, ord);
  Jet one = Jet::constant(n, ord, 1.0);
  Jet p = (one + x) * (one - x);
  CHECK(p.value() == Cplx(1.0));
  CHECK(p.coeff(mono::var(0)) == Cplx(0.0));
  CHECK(p.coeff(mono::mul(mono::var(0), mono::var(0))) == Cplx(-1.0));
  CHECK(p.terms().size() == 2);  // the x^3, x^4 terms would exceed the order
}

TEST_CASE("square of (x+1) matches the finite-difference oracle") {
  Jet x = var(0, 0.0, 1, 2);
  Jet p = (x + Cplx(1.0)) * (x + Cplx(1.0));
  cmqtest::RealFn f = [](std::span<const double> v) { return (v[0] + 1.0) * (v[0] + 1.0); };
  for (const auto& alpha : cmqtest::multi_indices(1, 2)) {
    double expect = cmqtest::fd_taylor_coeff(f, {0.0}, alpha);
    CHECK(std::abs(p.coeff(cmqtest::encode(alpha)) - Cplx(expect)) < 1e-6);
  }
  CHECK(p.coeff(cmqtest::encode({0})) == Cplx(1.0));
  CHECK(p.coeff(cmqtest::encode({1})) == Cplx(2.0));
  CHECK(p.coeff(cmqtest::encode({2})) == Cplx(1.0));
}

TEST_CASE("mismatched variable counts are a shape error") {
  Jet a = var(0, 0.0, 2, 3);
  Jet b = var(0, 0.0, 3, 3);
  CHECK_THROWS_AS(a * b, ShapeError);
  CHECK_THROWS_AS(a + b, ShapeError);
}

TEST_CASE("mixed orders truncate to the smaller order") {
  Jet a = var(0, 1.0, 1, 4);
  Jet b = var(0, 1.0, 1, 2);
  CHECK((a * b).order() == 2);
  CHECK((a + b).order() == 2);
}

TEST_CASE("elementary functions: fixed values") {
  int n = 1, ord = 4;
  Jet zero = Jet::constant(n, ord, 0.0);
  Jet e = jet_elem(ElemFn::kExp, zero);
  // exp around 0: coefficients 1/k!
  CHECK(std::abs(e.value() - Cplx(1.0)) < 1e-15);
  CHECK(std::abs(e.coeff(mono::kOne) - Cplx(1.0)) < 1e-15);

  Jet x = var(0, 0.0, n, 3);
  Jet r = jet_elem(ElemFn::kRecip, x + Cplx(1.0));
  CHECK(std::abs(r.coeff(cmqtest::encode({0})) - Cplx(1.0)) < 1e-15);
  CHECK(std::abs(r.coeff(cmqtest::encode({1})) - Cplx(-1.0)) < 1e-15);
  CHECK(std::abs(r.coeff(cmqtest::encode({2})) - Cplx(1.0)) < 1e-15);
  CHECK(std::abs(r.coeff(cmqtest::encode({3})) - Cplx(-1.0)) < 1e-15);
}

TEST_CASE("elementary functions match finite differences") {
  std::vector<double> base = {0.3, -0.4};
  int n = 2, ord = 3;
  Jet x = var(0, base[0], n, ord), y = var(1, base[1], n, ord);
  Jet j = jet_elem(ElemFn::kSin, x) * jet_elem(ElemFn::kExp, y) +
          jet_elem(ElemFn::kSqrt, x * x + y * y + Cplx(1.0));
  cmqtest::RealFn f = [](std::span<const double> v) {
    return std::sin(v[0]) * std::exp(v[1]) + std::sqrt(v[0] * v[0] + v[1] * v[1] + 1.0);
  };
  for (const auto& alpha : cmqtest::multi_indices(n, ord)) {
    double expect = cmqtest::fd_taylor_coeff(f, base, alpha);
    double got = j.coeff(cmqtest::encode(alpha)).real();
    CHECK(std::abs(got - expect) < 1e-6 * (1.0 + std::abs(expect)));
    CHECK(std::abs(j.coeff(cmqtest::encode(alpha)).imag()) < 1e-12);
  }
}

TEST_CASE("domain errors for sqrt and recip") {
  Jet x = var(0, -1.0, 1, 2);
  CHECK_THROWS_AS(jet_elem(ElemFn::kSqrt, x), DomainError);
  Jet z = var(0, 0.0, 1, 2);
  CHECK_THROWS_AS(jet_elem(ElemFn::kRecip, z), DomainError);
}

TEST_CASE("partial derivative consumes one order") {
  int n = 2, ord = 3;
  Jet x = var(0, 0.5, n, ord), y = var(1, -0.25, n, ord);
  Jet p = x * x * y;
  Jet px = p.partial(0);
  CHECK(px.order() == ord - 1);
  // d/dx (x^2 y) = 2xy
  Jet expect = Cplx(2.0) * x.truncated(ord - 1) * y.truncated(ord - 1);
  CHECK(max_abs_diff(px, expect) < 1e-14);

  Jet o0 = p.truncated(0);
  CHECK_THROWS_AS(o0.partial(0), BudgetError);
}

TEST_CASE("mixed partials commute") {
  Rng rng(101);
  std::vector<double> base = {0.2, -0.3, 0.7};
  for (int trial = 0; trial < 10; ++trial) {
    Jet p = cmqtest::random_poly_jet(rng, base, 4, 3, {0, 1, 2});
    Jet a = p.partial(0).partial(1);
    Jet b = p.partial(1).partial(0);
    CHECK(max_abs_diff(a, b) < 1e-13);
  }
}

TEST_CASE("ring axioms on random sparse polynomials") {
  Rng rng(202);
  std::vector<double> base = {0.1, 0.4, -0.2};
  for (int trial = 0; trial < 10; ++trial) {
    Jet a = cmqtest::random_poly_jet(rng, base, 5, 2, {0, 1, 2});
    Jet b = cmqtest::random_poly_jet(rng, base, 5, 2, {0, 1, 2});
    Jet c = cmqtest::random_poly_jet(rng, base, 5, 2, {0, 1, 2});
    CHECK(max_abs_diff(a * b, b * a) < 1e-13);
    CHECK(max_abs_diff((a * b) * c, a * (b * c)) < 1e-12);
    CHECK(max_abs_diff((a + b) * c, a * c + b * c) < 1e-12);
  }
}

TEST_CASE("chain rule through elementary functions") {
  Rng rng(303);
  std::vector<double> base = {0.3, 0.2};
  Jet a = cmqtest::random_poly_jet(rng, base, 4, 2, {0, 1});
  // imaginary parts confuse sqrt's domain guard; keep this test real
  Jet ar(2, 4);
  for (auto& [k, c] : a.terms()) ar.set_coeff(k, Cplx(c.real()));
  Jet ea = jet_elem(ElemFn::kExp, ar);
  CHECK(max_abs_diff(ea.partial(0), ea.truncated(3) * ar.partial(0)) < 1e-12);
  Jet sa = jet_elem(ElemFn::kSin, ar);
  Jet ca = jet_elem(ElemFn::kCos, ar);
  CHECK(max_abs_diff(sa.partial(1), ca.truncated(3) * ar.partial(1)) < 1e-12);
  CHECK(max_abs_diff(ca.partial(0), -sa.truncated(3) * ar.partial(0)) < 1e-12);
}

TEST_CASE("integer powers, including negative exponents") {
  Jet x = var(0, 2.0, 1, 3);
  Jet p = jet_pow_int(x, 3);
  CHECK(std::abs(p.value() - Cplx(8.0)) < 1e-14);
  CHECK(std::abs(p.coeff(cmqtest::encode({1})) - Cplx(12.0)) < 1e-14);
  Jet q = jet_pow_int(x, -2);
  cmqtest::RealFn f = [](std::span<const double> v) { return std::pow(v[0], -2.0); };
  for (const auto& alpha : cmqtest::multi_indices(1, 3)) {
    double expect = cmqtest::fd_taylor_coeff(f, {2.0}, alpha);
    CHECK(std::abs(q.coeff(cmqtest::encode(alpha)).real() - expect) < 1e-6);
  }
}

TEST_CASE("terms are stored in graded-lex order") {
  int n = 3, ord = 3;
  Jet x = var(0, 1.0, n, ord), y = var(1, 1.0, n, ord), z = var(2, 1.0, n, ord);
  Jet p = x * y * z + x + z * z + Jet::constant(n, ord, 7.0);
  std::uint64_t prev = 0;
  bool first = true;
  for (const auto& [k, c] : p.terms()) {
    if (!first) CHECK(k > prev);
    // graded: degree never decreases along the list
    if (!first) CHECK(mono::degree(k) >= mono::degree(prev));
    prev = k;
    first = false;
  }
}
