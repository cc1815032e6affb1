#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "cmq/chart.hpp"
#include "cmq/expr.hpp"
#include "testutil.hpp"

using namespace cmq;

namespace {

const std::vector<std::string> kXYZ = {"x", "y", "z"};

ParseError capture(const std::string& text,
                   const std::vector<std::string>& coords = kXYZ) {
  try {
    parse_expr(text, coords);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected ParseError for: " << text);
  return ParseError(0, 0, "");
}

ParseError capture_chart(const std::string& text) {
  try {
    parse_chart(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected ParseError for chart text");
  return ParseError(0, 0, "");
}

// Dense value-level snapshot of the chart tensors at a point; lambda is
// evaluated at order 1 so that omega = d lambda is available.
struct PointData {
  int n;
  std::vector<double> lam, g, phi, xi, omega;
};

PointData eval_point(const ChartStructure& c, const std::vector<double>& pt) {
  int n = c.dim();
  PointData d;
  d.n = n;
  d.lam.resize(std::size_t(n));
  d.xi.resize(std::size_t(n));
  d.g.resize(std::size_t(n) * n);
  d.phi.resize(std::size_t(n) * n);
  d.omega.assign(std::size_t(n) * n, 0.0);
  std::vector<Jet> lj;
  for (int i = 0; i < n; ++i) {
    lj.push_back(eval_jet(c.lambda[std::size_t(i)], pt, 1));
    d.lam[std::size_t(i)] = lj.back().value().real();
    d.xi[std::size_t(i)] = eval_jet(c.xi[std::size_t(i)], pt, 0).value().real();
  }
  for (int i = 0; i < n * n; ++i) {
    d.g[std::size_t(i)] = eval_jet(c.metric[std::size_t(i)], pt, 0).value().real();
    d.phi[std::size_t(i)] = eval_jet(c.phi[std::size_t(i)], pt, 0).value().real();
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      d.omega[std::size_t(i) * n + std::size_t(j)] =
          lj[std::size_t(j)].coeff(mono::var(i)).real() -
          lj[std::size_t(i)].coeff(mono::var(j)).real();
  return d;
}

// All pointwise compatibility identities of a contact metric structure.
void check_structure_at(const ChartStructure& c, const std::vector<double>& pt) {
  PointData d = eval_point(c, pt);
  int n = d.n;
  auto at = [n](const std::vector<double>& m, int i, int j) {
    return m[std::size_t(i) * n + std::size_t(j)];
  };

  double pairing = 0.0;
  for (int i = 0; i < n; ++i) pairing += d.lam[std::size_t(i)] * d.xi[std::size_t(i)];
  CHECK(pairing == doctest::Approx(1.0).epsilon(1e-12));

  for (int i = 0; i < n; ++i) {
    double gxi = 0.0;
    for (int j = 0; j < n; ++j) gxi += at(d.g, i, j) * d.xi[std::size_t(j)];
    CHECK(gxi == doctest::Approx(d.lam[std::size_t(i)]).epsilon(1e-10).scale(1.0));
  }

  for (int i = 0; i < n; ++i) {
    double pxi = 0.0;
    double lphi = 0.0;
    for (int j = 0; j < n; ++j) {
      pxi += at(d.phi, i, j) * d.xi[std::size_t(j)];
      lphi += d.lam[std::size_t(j)] * at(d.phi, j, i);
    }
    CHECK(std::abs(pxi) < 1e-12);
    CHECK(std::abs(lphi) < 1e-12);
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double gphi = 0.0;
      double phi2 = 0.0;
      double gpp = 0.0;
      for (int k = 0; k < n; ++k) {
        gphi += at(d.g, i, k) * at(d.phi, k, j);
        phi2 += at(d.phi, i, k) * at(d.phi, k, j);
        for (int l = 0; l < n; ++l)
          gpp += at(d.g, k, l) * at(d.phi, k, i) * at(d.phi, l, j);
      }
      CHECK(std::abs(at(d.omega, i, j) - gphi) < 1e-10);
      double eye = i == j ? 1.0 : 0.0;
      CHECK(std::abs(phi2 - (-eye + d.xi[std::size_t(i)] * d.lam[std::size_t(j)])) < 1e-12);
      CHECK(std::abs(gpp - (at(d.g, i, j) -
                            d.lam[std::size_t(i)] * d.lam[std::size_t(j)])) < 1e-10);
    }
  }
}

}  // namespace

TEST_CASE("expression parse errors carry line and column") {
  ParseError e = capture("x + siin(y)");
  CHECK(e.line() == 1);
  CHECK(e.col() == 5);
  CHECK(std::string(e.what()).find("unknown function 'siin'") != std::string::npos);

  e = capture("x + w*2");
  CHECK(e.col() == 5);
  CHECK(std::string(e.what()).find("undeclared coordinate 'w'") != std::string::npos);

  e = capture("(x + y");
  CHECK(e.col() == 1);
  CHECK(std::string(e.what()).find("missing closing parenthesis") != std::string::npos);

  e = capture("x^y");
  CHECK(std::string(e.what()).find("literal integer") != std::string::npos);

  e = capture("x^2^3");
  CHECK(std::string(e.what()).find("chained exponents") != std::string::npos);

  e = capture("x y");
  CHECK(e.col() == 3);
  CHECK(std::string(e.what()).find("trailing input") != std::string::npos);

  e = capture("x + @");
  CHECK(std::string(e.what()).find("unexpected character") != std::string::npos);

  e = capture("");
  CHECK(std::string(e.what()).find("unexpected end") != std::string::npos);

  CHECK_THROWS_AS((void)parse_expr("sin(x", kXYZ, 7), ParseError);
  try {
    (void)parse_expr("sin(x", kXYZ, 7);
  } catch (const ParseError& pe) {
    CHECK(pe.line() == 7);
  }
}

TEST_CASE("expression round-trip is structurally exact") {
  const char* cases[] = {
      "1 + x*y - z^2",
      "-(x + y)/(1 + z^2)",
      "sin(x)*cos(y) + exp(-z)",
      "sqrt(1 + x^2)",
      "x - y - z",
      "x/(y/z)",
      "2*(x + 1)^3 - 0.5",
      "-x^2",
      "x^-2",
      "-(-x)",
      "1/(1 + x^2 + y^2 + z^2)^2",
  };
  for (const char* text : cases) {
    CAPTURE(text);
    Expr a = parse_expr(text, kXYZ);
    std::string printed = emit_expr(a);
    Expr b = parse_expr(printed, kXYZ);
    CHECK(a == b);
    CHECK(emit_expr(b) == printed);
  }
}

TEST_CASE("subtraction and division emit with explicit grouping") {
  Expr a = parse_expr("x - (y - z)", kXYZ);
  CHECK(emit_expr(a) == "x - (y - z)");
  CHECK(parse_expr(emit_expr(a), kXYZ) == a);
  Expr b = parse_expr("x/(y*z)", kXYZ);
  CHECK(emit_expr(b) == "x/(y*z)");
  CHECK(parse_expr(emit_expr(b), kXYZ) == b);
}

TEST_CASE("eval_jet reproduces polynomial coefficients exactly") {
  Expr e = parse_expr("(x + 2*y)^3", kXYZ);
  std::vector<double> base = {0.0, 0.0, 0.0};
  Jet j = eval_jet(e, base, 3);
  auto c = [&](int a, int b) {
    std::uint64_t m = mono::kOne;
    for (int k = 0; k < a; ++k) m = mono::mul(m, mono::var(0));
    for (int k = 0; k < b; ++k) m = mono::mul(m, mono::var(1));
    return j.coeff(m).real();
  };
  CHECK(c(3, 0) == doctest::Approx(1.0));
  CHECK(c(2, 1) == doctest::Approx(6.0));
  CHECK(c(1, 2) == doctest::Approx(12.0));
  CHECK(c(0, 3) == doctest::Approx(8.0));
  CHECK(j.value() == Cplx(0.0));
}

TEST_CASE("eval_jet matches finite differences on transcendental data") {
  const std::string text = "sin(x*y)*exp(z) + sqrt(1 + x^2)/(2 + cos(y))";
  Expr e = parse_expr(text, kXYZ);
  std::vector<double> base = {0.4, -0.7, 0.2};
  Jet j = eval_jet(e, base, 3);
  cmqtest::RealFn f = [](std::span<const double> p) {
    return std::sin(p[0] * p[1]) * std::exp(p[2]) +
           std::sqrt(1.0 + p[0] * p[0]) / (2.0 + std::cos(p[1]));
  };
  for (const auto& alpha : cmqtest::multi_indices(3, 3)) {
    double want = cmqtest::fd_taylor_coeff(f, base, alpha);
    Cplx got = j.coeff(cmqtest::encode(alpha));
    CHECK(std::abs(got.real() - want) < 1e-6);
    CHECK(std::abs(got.imag()) < 1e-12);
  }
}

TEST_CASE("chart parsing handles omitted entries, indices and comments") {
  const std::string text =
      "# demo chart\n"
      "dim = 3\n"
      "coords = x, y, z\n"
      "\n"
      "[lambda]\n"
      "1 = -y   # numeric index\n"
      "z = 1\n"
      "\n"
      "[metric]\n"
      "x x = 1 + y^2\n"
      "y 2 = 1\n"
      "z z = 1\n"
      "x z = -y\n"
      "\n"
      "[phi]\n"
      "x y = 1\n"
      "z y = y\n"
      "y x = -1\n"
      "\n"
      "[xi]\n"
      "3 = 1\n";
  ChartStructure c = parse_chart(text);
  CHECK(c.m == 1);
  CHECK(c.dim() == 3);
  CHECK(c.coords == std::vector<std::string>{"x", "y", "z"});
  CHECK(c.lambda[1].is_zero());
  CHECK(emit_expr(c.lambda[0]) == "-y");
  CHECK(c.xi[2] == Expr::num(1.0));
  // Single off-diagonal entry fills both symmetric slots.
  CHECK(c.metric[0 * 3 + 2] == c.metric[2 * 3 + 0]);
  CHECK(emit_expr(c.metric[2]) == "-y");
  CHECK(c.phi[1 * 3 + 0] == parse_expr("-1", c.coords));
  ChartStructure again = parse_chart(emit_chart(c));
  CHECK(again == c);
}

TEST_CASE("chart parse errors are positioned and specific") {
  ParseError e = capture_chart("dim = 4\n");
  CHECK(e.line() == 1);
  CHECK(std::string(e.what()).find("odd integer") != std::string::npos);

  e = capture_chart("dim = 9\n");
  CHECK(std::string(e.what()).find("supported maximum") != std::string::npos);

  e = capture_chart("dim = 3\ncoords = x, y\n");
  CHECK(e.line() == 2);
  CHECK(std::string(e.what()).find("expected 3, got 2") != std::string::npos);

  e = capture_chart("dim = 3\ncoords = x, y, x\n");
  CHECK(std::string(e.what()).find("duplicate coordinate 'x'") != std::string::npos);

  e = capture_chart("dim = 3\ncoords = x, y, z\n[lambda]\nw = 1\n");
  CHECK(e.line() == 4);
  CHECK(std::string(e.what()).find("unknown index 'w'") != std::string::npos);

  e = capture_chart("dim = 3\ncoords = x, y, z\n[lambda]\n4 = 1\n");
  CHECK(std::string(e.what()).find("out of range (1..3)") != std::string::npos);

  e = capture_chart("dim = 3\ncoords = x, y, z\n[frame]\n");
  CHECK(e.line() == 3);
  CHECK(std::string(e.what()).find("unknown section 'frame'") != std::string::npos);

  e = capture_chart("dim = 3\ncoords = x, y, z\nx = 1\n");
  CHECK(std::string(e.what()).find("expected dim, coords or a section header") !=
        std::string::npos);

  e = capture_chart("[lambda]\n");
  CHECK(std::string(e.what()).find("dim and coords must precede") != std::string::npos);

  e = capture_chart("dim = 3\ncoords = x, y, z\n[metric]\nx = 1\n");
  CHECK(e.line() == 4);
  CHECK(std::string(e.what()).find("metric entries take two indices") !=
        std::string::npos);

  e = capture_chart("dim = 3\ncoords = x, y, z\n[lambda]\nx = 1\nx = 2\n");
  CHECK(e.line() == 5);
  CHECK(std::string(e.what()).find("duplicate entry for 'x'") != std::string::npos);

  e = capture_chart(
      "dim = 3\ncoords = x, y, z\n[metric]\nx z = -y\nz x = y\n"
      "[lambda]\n[phi]\n[xi]\n");
  CHECK(e.line() == 5);
  CHECK(std::string(e.what()).find("non-symmetric metric block") != std::string::npos);

  e = capture_chart("dim = 3\ncoords = x, y, z\n[lambda]\nx = 1\n");
  CHECK(std::string(e.what()).find("missing [metric] section") != std::string::npos);

  // Identical symmetric duplicates are allowed.
  ChartStructure ok = parse_chart(
      "dim = 3\ncoords = x, y, z\n[metric]\nx z = -y\nz x = -y\nx x = 1\ny y = 1\n"
      "z z = 1\n[lambda]\nz = 1\n[phi]\n[xi]\nz = 1\n");
  CHECK(emit_expr(ok.metric[2]) == "-y");

  // Expression errors surface with the column inside the full line.
  e = capture_chart("dim = 3\ncoords = x, y, z\n[lambda]\nx = 1 + siin(y)\n");
  CHECK(e.line() == 4);
  CHECK(e.col() == 9);
  CHECK(std::string(e.what()).find("unknown function 'siin'") != std::string::npos);
}

TEST_CASE("builtin charts satisfy the pointwise structure identities") {
  cmqtest::Rng rng(20260815);
  for (const std::string& name : builtin_names()) {
    CAPTURE(name);
    ChartStructure c = builtin_chart(name);
    int n = c.dim();
    for (int trial = 0; trial < 8; ++trial) {
      std::vector<double> pt = rng.point(n, -0.4, 0.4);
      check_structure_at(c, pt);
    }
  }
}

TEST_CASE("builtin charts round-trip through emit_chart") {
  for (const std::string& name : builtin_names()) {
    CAPTURE(name);
    ChartStructure c = builtin_chart(name);
    CHECK(parse_chart(emit_chart(c)) == c);
  }
}

TEST_CASE("deformed3 with epsilon zero matches heisenberg3 coefficient-wise") {
  ChartStructure flat = builtin_chart("deformed3", {{"epsilon", 0.0}});
  ChartStructure h3 = builtin_chart("heisenberg3");
  cmqtest::Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> pt = rng.point(3, -0.5, 0.5);
    for (int i = 0; i < 9; ++i) {
      CHECK(max_abs_diff(eval_jet(flat.metric[std::size_t(i)], pt, 3),
                         eval_jet(h3.metric[std::size_t(i)], pt, 3)) < 1e-14);
      CHECK(max_abs_diff(eval_jet(flat.phi[std::size_t(i)], pt, 3),
                         eval_jet(h3.phi[std::size_t(i)], pt, 3)) < 1e-14);
    }
  }
}

TEST_CASE("deformed3 epsilon actually deforms the metric") {
  ChartStructure c = builtin_chart("deformed3", {{"epsilon", 0.25}});
  std::vector<double> pt = {0.0, 0.0, 0.5};
  double gxx = eval_jet(c.metric[0], pt, 0).value().real();
  CHECK(gxx == doctest::Approx(std::exp(2.0 * 0.25 * 0.5)).epsilon(1e-12));
  check_structure_at(c, {0.1, -0.2, 0.4});
}

TEST_CASE("builtin registry rejects unknown names and parameters") {
  CHECK_THROWS_WITH_AS((void)builtin_chart("klein4"),
                       doctest::Contains("unknown builtin chart 'klein4'"),
                       Error);
  CHECK_THROWS_WITH_AS((void)builtin_chart("heisenberg3", {{"epsilon", 0.1}}),
                       doctest::Contains("unknown parameter 'epsilon'"), Error);
  CHECK_THROWS_WITH_AS((void)builtin_chart("deformed3", {{"eps", 0.1}}),
                       doctest::Contains("unknown parameter 'eps'"), Error);
  CHECK_THROWS_WITH_AS((void)builtin_chart("deformed3", {{"epsilon", 3.0}}),
                       doctest::Contains("out of range"), Error);
}
