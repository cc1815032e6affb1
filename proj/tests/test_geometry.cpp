#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "cmq/chart.hpp"
#include "cmq/expr.hpp"
#include "cmq/geometry.hpp"
#include "testutil.hpp"

using namespace cmq;
using cmqtest::Rng;

namespace {

int id2(int n, int i, int j) { return i * n + j; }
int id3(int n, int i, int j, int k) { return (i * n + j) * n + k; }
int id4(int n, int i, int j, int k, int l) { return ((i * n + j) * n + k) * n + l; }

const char* kAllBuiltins[] = {"deformed3", "heisenberg3", "heisenberg5", "sphere3"};

GeometryFrame frame_at(const std::string& name, Rng& rng, int order,
                       double box = 0.35) {
  ChartStructure c = builtin_chart(name);
  auto pt = rng.point(c.dim(), -box, box);
  return build_frame(c, pt, order);
}

// First covariant derivative W^i_k = d_k v^i + G^i_{ak} v^a of a vector field.
std::vector<Jet> cov1(const GeometryFrame& f, const std::vector<Jet>& G,
                      const std::vector<Jet>& v) {
  const int n = f.n;
  std::vector<Jet> w(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      Jet r = v[std::size_t(i)].partial(k);
      for (int a = 0; a < n; ++a) r.fma(G[std::size_t(id3(n, i, a, k))], v[std::size_t(a)]);
      w[std::size_t(id2(n, i, k))] = r;
    }
  return w;
}

// Second covariant derivative X^i_{k,l} = d_l W^i_k + G^i_{ml} W^m_k - G^m_{kl} W^i_m.
std::vector<Jet> cov2(const GeometryFrame& f, const std::vector<Jet>& G,
                      const std::vector<Jet>& w) {
  const int n = f.n;
  std::vector<Jet> x(std::size_t(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        Jet r = w[std::size_t(id2(n, i, k))].partial(l);
        for (int m = 0; m < n; ++m) {
          r.fma(G[std::size_t(id3(n, i, m, l))], w[std::size_t(id2(n, m, k))]);
          r.fma(G[std::size_t(id3(n, m, k, l))], w[std::size_t(id2(n, i, m))], Cplx(-1.0));
        }
        x[std::size_t(id3(n, i, k, l))] = r;
      }
  return x;
}

// Residual of nabla_l nabla_k v^i - nabla_k nabla_l v^i
//   = R^i_{a l k} v^a + T^m_{l k} nabla_m v^i
// for the given connection, curvature and torsion (torsion empty = symmetric).
double commutator_residual(const GeometryFrame& f, const std::vector<Jet>& G,
                           const std::vector<Jet>& R, const std::vector<Jet>& T,
                           const std::vector<Jet>& v) {
  const int n = f.n;
  auto w = cov1(f, G, v);
  auto x = cov2(f, G, w);
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k) {
        Jet lhs = x[std::size_t(id3(n, i, k, l))] - x[std::size_t(id3(n, i, l, k))];
        for (int a = 0; a < n; ++a)
          lhs.fma(R[std::size_t(id4(n, i, a, l, k))], v[std::size_t(a)], Cplx(-1.0));
        if (!T.empty())
          for (int m = 0; m < n; ++m)
            lhs.fma(T[std::size_t(id3(n, m, l, k))], w[std::size_t(id2(n, i, m))],
                    Cplx(-1.0));
        worst = std::max(worst, lhs.max_abs());
      }
  return worst;
}

Jet reeb_derivative(const GeometryFrame& f, const Jet& a) {
  Jet r(f.n, a.order() - 1);
  for (int i = 0; i < f.n; ++i) r.fma(f.xi[std::size_t(i)], a.partial(i));
  return r;
}

}  // namespace

TEST_CASE("structure residual suites vanish on every builtin chart") {
  Rng rng(20260815);
  for (const char* name : kAllBuiltins) {
    for (int trial = 0; trial < 3; ++trial) {
      GeometryFrame f = frame_at(name, rng, 4);
      CAPTURE(name);
      auto compat = check_compatibility(f);
      auto conn = check_connection(f);
      auto sym = check_symmetries(f);
      CHECK_MESSAGE(compat.all_below(1e-8), name, " compat ", compat.max_residual());
      CHECK_MESSAGE(conn.all_below(1e-8), name, " connection ", conn.max_residual());
      CHECK_MESSAGE(sym.all_below(1e-8), name, " symmetry ", sym.max_residual());
    }
  }
}

TEST_CASE("contact volume densities take their closed-form values") {
  Rng rng(31);
  GeometryFrame f3 = frame_at("heisenberg3", rng, 3);
  CHECK(max_abs_diff(f3.volume, Jet::constant(3, f3.volume.order(), Cplx(1.0))) <= 1e-12);

  GeometryFrame f5 = frame_at("heisenberg5", rng, 3);
  CHECK(std::abs(std::abs(f5.volume.value()) - 2.0) <= 1e-12);
  Jet centered = f5.volume - Jet::constant(5, f5.volume.order(), f5.volume.value());
  CHECK(centered.max_abs() <= 1e-12);

  GeometryFrame fs = frame_at("sphere3", rng, 3);
  CHECK(std::abs(fs.volume.value()) > 1e-6);
}

TEST_CASE("curvature matches the covariant derivative commutator") {
  Rng rng(777);
  std::vector<Jet> no_torsion;
  for (const char* name : {"heisenberg3", "sphere3"}) {
    ChartStructure c = builtin_chart(name);
    std::vector<int> vars(std::size_t(c.dim()));
    for (int i = 0; i < c.dim(); ++i) vars[std::size_t(i)] = i;
    for (int trial = 0; trial < 2; ++trial) {
      auto pt = rng.point(c.dim(), -0.3, 0.3);
      GeometryFrame f = build_frame(c, pt, 4);
      std::vector<Jet> v(std::size_t(f.n));
      for (int i = 0; i < f.n; ++i)
        v[std::size_t(i)] = cmqtest::random_poly_jet(rng, pt, 4, 3, vars);
      CAPTURE(name);
      CHECK(commutator_residual(f, f.gamma, f.curv, f.torsion, v) <= 1e-9);
      CHECK(commutator_residual(f, f.gamma_g, f.curv_g, no_torsion, v) <= 1e-9);
    }
  }
}

TEST_CASE("negative controls trip the intended residual rows") {
  Rng rng(99);
  ChartStructure c = builtin_chart("heisenberg3");
  auto pt = rng.point(3, -0.2, 0.2);

  SUBCASE("doubling the metric breaks the omega pairing") {
    ChartStructure broken = c;
    for (auto& e : broken.metric) e = parse_expr("2*(" + emit_expr(e) + ")", broken.coords);
    GeometryFrame f = build_frame(broken, pt, 4);
    CHECK(check_compatibility(f).at("omega_structure") > 0.5);
  }

  SUBCASE("the Levi-Civita connection does not parallelize omega") {
    GeometryFrame f = build_frame(c, pt, 4);
    f.gamma = f.gamma_g;
    refresh_connection_tensors(f);
    auto rep = check_connection(f);
    CHECK(rep.at("parallel_omega") > 0.01);
    CHECK(rep.at("torsion_pairing") > 0.01);
  }

  SUBCASE("a random connection violates the curvature symmetries") {
    GeometryFrame f = build_frame(c, pt, 4);
    auto monos = cmqtest::multi_indices(3, 2);
    for (auto& entry : f.gamma) {
      Jet j(3, f.order - 1);
      for (const auto& alpha : monos)
        j.set_coeff(cmqtest::encode(alpha), Cplx(rng.uniform(0.3, 1.0)));
      entry = j;
    }
    refresh_connection_tensors(f);
    auto rep = check_symmetries(f);
    CHECK(rep.at("curv_pair_symmetric") > 1e-2);
    CHECK(rep.at("curv_metric_pairing") > 1e-2);
  }
}

TEST_CASE("classification separates the builtin families") {
  Rng rng(20260815);
  for (const char* name : {"heisenberg3", "heisenberg5", "sphere3"}) {
    GeometryFrame f = frame_at(name, rng, 4, 0.3);
    Classification cls = classify(f);
    CAPTURE(name);
    CHECK(cls.is_contact);
    CHECK(cls.is_kcontact);
    CHECK(cls.is_cr);
    CHECK(cls.is_sasakian);
    CHECK(cls.levi_positive);
  }

  ChartStructure dc = builtin_chart("deformed3", {{"epsilon", 0.3}});
  GeometryFrame df = build_frame(dc, std::vector<double>{0.0, 0.0, 0.0}, 4);
  Classification dcls = classify(df);
  CHECK(dcls.is_contact);
  CHECK_FALSE(dcls.is_kcontact);
  CHECK_FALSE(dcls.is_sasakian);
  CHECK(dcls.residuals.at("kcontact") > 0.01);
  double lie_max = 0.0;
  for (const auto& j : df.lie_g) lie_max = std::max(lie_max, std::abs(j.value()));
  CHECK(lie_max > 0.01);

  // Dimension three leaves no gap between K-contact and Sasakian.
  for (const char* name : kAllBuiltins) {
    ChartStructure c = builtin_chart(name);
    if (c.dim() != 3) continue;
    GeometryFrame f = build_frame(c, rng.point(3, -0.2, 0.2), 4);
    Classification cls = classify(f);
    if (cls.is_kcontact) CHECK(cls.is_sasakian);
  }
}

TEST_CASE("the pairing kernel of h is omega, not the metric") {
  Rng rng(5150);
  for (const char* name : kAllBuiltins) {
    GeometryFrame f = frame_at(name, rng, 3, 0.25);
    const int n = f.n;
    // g_ij h^in h^jm reproduces xi^n xi^m; the naive expectation that it
    // vanishes like the omega pairing fails by a unit-size amount.
    double worst = 0.0;
    double magnitude = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Cplx acc(0.0);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            acc += f.g[std::size_t(id2(n, i, j))].value() *
                   f.h[std::size_t(id2(n, i, a))].value() *
                   f.h[std::size_t(id2(n, j, b))].value();
        Cplx expected = f.xi[std::size_t(a)].value() * f.xi[std::size_t(b)].value();
        worst = std::max(worst, std::abs(acc - expected));
        magnitude = std::max(magnitude, std::abs(acc));
      }
    CAPTURE(name);
    CHECK(worst <= 1e-8);
    CHECK(magnitude > 0.05);
  }
}

TEST_CASE("jacobi bracket algebra") {
  Rng rng(424242);
  ChartStructure c = builtin_chart("heisenberg3");
  auto pt = rng.point(3, -0.3, 0.3);
  GeometryFrame f = build_frame(c, pt, 5);
  std::vector<int> all_vars{0, 1, 2};

  SUBCASE("antisymmetry on the diagonal") {
    Jet a = cmqtest::random_poly_jet(rng, pt, 5, 3, all_vars);
    CHECK(jacobi_bracket(f, a, a).max_abs() <= 1e-12);
  }

  SUBCASE("coordinate bracket reproduces the bivector component") {
    Jet x = Jet::variable(0, Cplx(pt[0]), 3, 5);
    Jet y = Jet::variable(1, Cplx(pt[1]), 3, 5);
    // xi = d/dz kills both coordinates, so only the bivector term survives.
    CHECK(max_abs_diff(jacobi_bracket(f, x, y), f.pi[std::size_t(id2(3, 0, 1))]) <= 1e-10);
  }

  SUBCASE("Leibniz defect equals g h (xi f)") {
    Jet a = cmqtest::random_poly_jet(rng, pt, 5, 2, all_vars);
    Jet b = cmqtest::random_poly_jet(rng, pt, 5, 2, all_vars);
    Jet h = cmqtest::random_poly_jet(rng, pt, 5, 2, all_vars);
    Jet defect = jacobi_bracket(f, a, b * h) - jacobi_bracket(f, a, b) * h -
                 b * jacobi_bracket(f, a, h);
    Jet expected = b * h * reeb_derivative(f, a);
    CHECK(max_abs_diff(defect, expected) <= 1e-9);
  }

  SUBCASE("Jacobi identity closes on Reeb-invariant functions") {
    for (const char* name : {"heisenberg3", "heisenberg5"}) {
      ChartStructure ci = builtin_chart(name);
      auto pti = rng.point(ci.dim(), -0.25, 0.25);
      GeometryFrame fi = build_frame(ci, pti, 5);
      std::vector<int> inv_vars(std::size_t(ci.dim() - 1));
      for (int i = 0; i + 1 < ci.dim(); ++i) inv_vars[std::size_t(i)] = i;
      Jet a = cmqtest::random_poly_jet(rng, pti, 5, 2, inv_vars);
      Jet b = cmqtest::random_poly_jet(rng, pti, 5, 2, inv_vars);
      Jet d = cmqtest::random_poly_jet(rng, pti, 5, 2, inv_vars);
      Jet cyc = jacobi_bracket(fi, a, jacobi_bracket(fi, b, d));
      cyc += jacobi_bracket(fi, b, jacobi_bracket(fi, d, a));
      cyc += jacobi_bracket(fi, d, jacobi_bracket(fi, a, b));
      CAPTURE(name);
      CHECK(cyc.max_abs() <= 1e-9);
    }
  }
}

TEST_CASE("frame construction rejects bad inputs") {
  ChartStructure c = builtin_chart("heisenberg3");
  std::vector<double> origin{0.0, 0.0, 0.0};

  CHECK_THROWS_AS(build_frame(c, origin, 2), BudgetError);
  CHECK_THROWS_AS(build_frame(c, std::vector<double>{0.0, 0.0}, 4), ShapeError);

  const char* singular =
      "dim = 3\n"
      "coords = x, y, z\n"
      "[lambda]\nx = -y\nz = 1\n"
      "[metric]\nx x = x\ny y = 1\nz z = 1\n"
      "[phi]\nx y = 1\ny x = -1\n"
      "[xi]\nz = 1\n";
  CHECK_THROWS_WITH_AS(build_frame(parse_chart(singular), origin, 4),
                       doctest::Contains("singular"), DomainError);

  const char* degenerate =
      "dim = 3\n"
      "coords = x, y, z\n"
      "[lambda]\nz = 1\n"
      "[metric]\nx x = 1\ny y = 1\nz z = 1\n"
      "[phi]\n"
      "[xi]\nz = 1\n";
  CHECK_THROWS_WITH_AS(build_frame(parse_chart(degenerate), origin, 4),
                       doctest::Contains("volume"), DomainError);

  GeometryFrame f = build_frame(c, origin, 4);
  Jet wrong(2, 3);
  CHECK_THROWS_AS(jacobi_bracket(f, wrong, wrong), ShapeError);
}
