#include "cmq/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

namespace cmq {

double ResidualReport::max_residual() const {
  double r = 0.0;
  for (const auto& [name, value] : items) r = std::max(r, value);
  return r;
}

double ResidualReport::at(std::string_view name) const {
  for (const auto& [key, value] : items)
    if (key == name) return value;
  throw Error("no residual named '" + std::string(name) + "'");
}

namespace {

std::size_t id2(int n, int i, int j) { return std::size_t(i) * n + std::size_t(j); }
std::size_t id3(int n, int i, int j, int k) {
  return (std::size_t(i) * n + std::size_t(j)) * n + std::size_t(k);
}
std::size_t id4(int n, int i, int j, int k, int l) {
  return ((std::size_t(i) * n + std::size_t(j)) * n + std::size_t(k)) * n + std::size_t(l);
}

/// Inverse of a jet-valued matrix with invertible constant part: seed with the
/// numeric inverse of the values, then a Neumann series in the derivative part
/// (nilpotent under truncation, so `order` correction steps are exact).
std::vector<Jet> invert_matrix(const std::vector<Jet>& a, int n, const char* what) {
  int nv = a[0].n_vars();
  int order = a[0].order();
  Eigen::MatrixXd a0(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a0(i, j) = a[id2(n, i, j)].value().real();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a0);
  double scale = std::max(1.0, a0.cwiseAbs().maxCoeff());
  if (std::abs(lu.determinant()) < 1e-12 * std::pow(scale, n))
    throw DomainError(std::string(what) + " is singular at the base point");
  Eigen::MatrixXd b0 = lu.inverse();

  std::vector<Jet> inv(std::size_t(n) * n, Jet(nv, order));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      inv[id2(n, i, j)] = Jet::constant(nv, order, Cplx(b0(i, j)));
  if (order == 0) return inv;

  std::vector<Jet> rem(std::size_t(n) * n);  // a minus its constant part
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet r = a[id2(n, i, j)];
      r.set_coeff(mono::kOne, Cplx(0.0));
      rem[id2(n, i, j)] = std::move(r);
    }

  std::vector<Jet> term = inv;
  for (int step = 0; step < order; ++step) {
    std::vector<Jet> mid(std::size_t(n) * n, Jet(nv, order));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          mid[id2(n, i, j)].fma(rem[id2(n, i, k)], term[id2(n, k, j)]);
    std::vector<Jet> next(std::size_t(n) * n, Jet(nv, order));
    bool any = false;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k)
          next[id2(n, i, j)].add_scaled(mid[id2(n, k, j)], Cplx(-b0(i, k)));
        inv[id2(n, i, j)] += next[id2(n, i, j)];
        any = any || !next[id2(n, i, j)].empty();
      }
    if (!any) break;
    term = std::move(next);
  }
  return inv;
}

double max_abs_all(const std::vector<Jet>& t) {
  double r = 0.0;
  for (const Jet& j : t) r = std::max(r, j.max_abs());
  return r;
}

// Sign of appending dx^k to the wedge monomial `mask` (bits = present dx's).
double append_sign(std::uint32_t mask, int k) {
  return (std::popcount(mask >> (k + 1)) % 2) ? -1.0 : 1.0;
}

}  // namespace

GeometryFrame build_frame(const ChartStructure& chart, std::span<const double> base_point,
                          int order, const Tolerances& tol) {
  int n = chart.dim();
  if (int(base_point.size()) != n)
    throw ShapeError("base point has " + std::to_string(base_point.size()) +
                     " coordinates, chart needs " + std::to_string(n));
  if (order < 3)
    throw BudgetError("frame order must be >= 3 (curvature consumes two orders)");

  GeometryFrame f;
  f.n = n;
  f.m = chart.m;
  f.order = order;
  f.base.assign(base_point.begin(), base_point.end());

  f.lambda.reserve(std::size_t(n));
  f.xi.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    f.lambda.push_back(eval_jet(chart.lambda[std::size_t(i)], base_point, order));
    f.xi.push_back(eval_jet(chart.xi[std::size_t(i)], base_point, order));
  }
  f.g.reserve(std::size_t(n) * n);
  f.phi.reserve(std::size_t(n) * n);
  for (int i = 0; i < n * n; ++i) {
    f.g.push_back(eval_jet(chart.metric[std::size_t(i)], base_point, order));
    f.phi.push_back(eval_jet(chart.phi[std::size_t(i)], base_point, order));
  }
  f.g_inv = invert_matrix(f.g, n, "metric");

  f.omega.assign(std::size_t(n) * n, Jet(n, order - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      f.omega[id2(n, i, j)] =
          f.lambda[std::size_t(j)].partial(i) - f.lambda[std::size_t(i)].partial(j);

  f.pi.assign(std::size_t(n) * n, Jet(n, order));
  f.h.assign(std::size_t(n) * n, Jet(n, order));
  f.proj.assign(std::size_t(n) * n, Jet(n, order));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet& p = f.pi[id2(n, i, j)];
      for (int k = 0; k < n; ++k) p.fma(f.g_inv[id2(n, i, k)], f.phi[id2(n, j, k)]);
      f.h[id2(n, i, j)] = f.g_inv[id2(n, i, j)] + Cplx(0.0, 1.0) * p;
      Jet& pr = f.proj[id2(n, i, j)];
      pr.fma(f.xi[std::size_t(i)], f.lambda[std::size_t(j)], Cplx(-1.0));
      if (i == j) pr += Jet::constant(n, order, Cplx(1.0));
    }

  // Levi-Civita coefficients of g.
  std::vector<Jet> dg(std::size_t(n) * n * n);  // dg[i][j][k] = d_k g_ij
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        dg[id3(n, i, j, k)] = f.g[id2(n, i, j)].partial(k);
  f.gamma_g.assign(std::size_t(n) * n * n, Jet(n, order - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Jet sum(n, order - 1);
        for (int l = 0; l < n; ++l) {
          Jet tmp = dg[id3(n, l, k, j)] + dg[id3(n, l, j, k)] - dg[id3(n, j, k, l)];
          sum.fma(f.g_inv[id2(n, i, l)], tmp, Cplx(0.5));
        }
        f.gamma_g[id3(n, i, j, k)] = std::move(sum);
      }

  // Levi-Civita covariant derivatives entering S and the Tanno tensor.
  auto covg_lambda = [&](int j, int k) {
    Jet r = f.lambda[std::size_t(j)].partial(k);
    for (int m2 = 0; m2 < n; ++m2)
      r.fma(f.gamma_g[id3(n, m2, j, k)], f.lambda[std::size_t(m2)], Cplx(-1.0));
    return r;
  };
  auto covg_xi = [&](int i, int k) {
    Jet r = f.xi[std::size_t(i)].partial(k);
    for (int m2 = 0; m2 < n; ++m2)
      r.fma(f.gamma_g[id3(n, i, m2, k)], f.xi[std::size_t(m2)]);
    return r;
  };
  auto covg_phi = [&](int l, int j, int k) {
    Jet r = f.phi[id2(n, l, j)].partial(k);
    for (int m2 = 0; m2 < n; ++m2) {
      r.fma(f.gamma_g[id3(n, l, m2, k)], f.phi[id2(n, m2, j)]);
      r.fma(f.gamma_g[id3(n, m2, j, k)], f.phi[id2(n, l, m2)], Cplx(-1.0));
    }
    return r;
  };

  std::vector<Jet> dlam_g(std::size_t(n) * n), dxi_g(std::size_t(n) * n);
  std::vector<Jet> dphi_g(std::size_t(n) * n * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      dlam_g[id2(n, j, k)] = covg_lambda(j, k);
      dxi_g[id2(n, j, k)] = covg_xi(j, k);
    }
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) dphi_g[id3(n, l, j, k)] = covg_phi(l, j, k);

  f.S.assign(std::size_t(n) * n * n, Jet(n, order - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Jet s(n, order - 1);
        for (int l = 0; l < n; ++l)
          s.fma(f.phi[id2(n, i, l)], dphi_g[id3(n, l, j, k)], Cplx(-0.5));
        s.fma(f.lambda[std::size_t(j)], dxi_g[id2(n, i, k)], Cplx(-0.5));
        s.fma(f.xi[std::size_t(i)], dlam_g[id2(n, j, k)]);
        f.S[id3(n, i, j, k)] = std::move(s);
      }

  f.gamma.resize(std::size_t(n) * n * n);
  for (std::size_t i = 0; i < f.gamma.size(); ++i) f.gamma[i] = f.gamma_g[i] + f.S[i];

  refresh_connection_tensors(f);

  // Levi-Civita curvature, same direction-last convention as `curv`.
  f.curv_g.assign(std::size_t(n) * n * n * n, Jet(n, order - 2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet r = f.gamma_g[id3(n, i, j, l)].partial(k) -
                  f.gamma_g[id3(n, i, j, k)].partial(l);
          for (int m2 = 0; m2 < n; ++m2) {
            r.fma(f.gamma_g[id3(n, i, m2, k)], f.gamma_g[id3(n, m2, j, l)]);
            r.fma(f.gamma_g[id3(n, i, m2, l)], f.gamma_g[id3(n, m2, j, k)], Cplx(-1.0));
          }
          f.curv_g[id4(n, i, j, k, l)] = std::move(r);
        }

  f.tanno.assign(std::size_t(n) * n * n, Jet(n, order - 1));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet q = dphi_g[id3(n, k, i, j)];
        Jet mid(n, order - 1);
        for (int m2 = 0; m2 < n; ++m2) {
          mid.fma(f.phi[id2(n, m2, i)], dlam_g[id2(n, m2, j)]);
          q.fma(f.phi[id2(n, k, m2)] * dxi_g[id2(n, m2, j)], f.lambda[std::size_t(i)]);
        }
        q.fma(f.xi[std::size_t(k)], mid);
        f.tanno[id3(n, k, i, j)] = std::move(q);
      }

  f.lie_g.assign(std::size_t(n) * n, Jet(n, order - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet r(n, order - 1);
      for (int k = 0; k < n; ++k) {
        r.fma(f.xi[std::size_t(k)], dg[id3(n, i, j, k)]);
        r.fma(f.g[id2(n, k, j)], f.xi[std::size_t(k)].partial(i));
        r.fma(f.g[id2(n, i, k)], f.xi[std::size_t(k)].partial(j));
      }
      f.lie_g[id2(n, i, j)] = std::move(r);
    }
  f.lie_g_inv.assign(std::size_t(n) * n, Jet(n, order - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet r(n, order - 1);
      for (int k = 0; k < n; ++k) {
        Jet mid(n, order - 1);
        for (int l = 0; l < n; ++l)
          mid.fma(f.g_inv[id2(n, j, l)], f.lie_g[id2(n, k, l)]);
        r.fma(f.g_inv[id2(n, i, k)], mid, Cplx(-1.0));
      }
      f.lie_g_inv[id2(n, i, j)] = std::move(r);
    }

  // Contact volume density: wedge lambda with m copies of d lambda over the
  // bitmask basis of form monomials.
  std::map<std::uint32_t, Jet> form;
  for (int i = 0; i < n; ++i)
    if (!f.lambda[std::size_t(i)].empty())
      form[std::uint32_t(1) << i] = f.lambda[std::size_t(i)];
  for (int rep = 0; rep < f.m; ++rep) {
    std::map<std::uint32_t, Jet> next;
    for (const auto& [mask, coeff] : form)
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          std::uint32_t bits = (std::uint32_t(1) << i) | (std::uint32_t(1) << j);
          if (mask & bits) continue;
          double sign = append_sign(mask, i) * append_sign(mask | (1u << i), j);
          auto it = next.try_emplace(mask | bits, Jet(n, order - 1)).first;
          it->second.fma(coeff, f.omega[id2(n, i, j)], Cplx(sign));
        }
    form = std::move(next);
  }
  std::uint32_t full = (std::uint32_t(1) << n) - 1;
  auto it = form.find(full);
  f.volume = it == form.end() ? Jet(n, order - 1) : it->second;
  if (std::abs(f.volume.value()) <= tol.abs_tol)
    throw DomainError("contact volume density vanishes at the base point");

  return f;
}

void refresh_connection_tensors(GeometryFrame& f) {
  int n = f.n;
  int order = f.order;
  f.torsion.assign(std::size_t(n) * n * n, Jet(n, order - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        f.torsion[id3(n, i, j, k)] = f.gamma[id3(n, i, j, k)] - f.gamma[id3(n, i, k, j)];

  f.torsion_low.assign(std::size_t(n) * n * n, Jet(n, order - 1));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet& t = f.torsion_low[id3(n, k, i, j)];
        for (int m2 = 0; m2 < n; ++m2)
          t.fma(f.omega[id2(n, k, m2)], f.torsion[id3(n, m2, i, j)]);
      }

  f.curv.assign(std::size_t(n) * n * n * n, Jet(n, order - 2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet r = f.gamma[id3(n, i, j, l)].partial(k) - f.gamma[id3(n, i, j, k)].partial(l);
          for (int m2 = 0; m2 < n; ++m2) {
            r.fma(f.gamma[id3(n, i, m2, k)], f.gamma[id3(n, m2, j, l)]);
            r.fma(f.gamma[id3(n, i, m2, l)], f.gamma[id3(n, m2, j, k)], Cplx(-1.0));
          }
          f.curv[id4(n, i, j, k, l)] = std::move(r);
        }

  f.curv_low.assign(std::size_t(n) * n * n * n, Jet(n, order - 2));
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Jet& r = f.curv_low[id4(n, k, l, i, j)];
          for (int m2 = 0; m2 < n; ++m2)
            r.fma(f.omega[id2(n, k, m2)], f.curv[id4(n, m2, l, i, j)]);
        }
}

ResidualReport check_compatibility(const GeometryFrame& f) {
  int n = f.n;
  ResidualReport rep;

  double r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s(n, f.order);
      for (int k = 0; k < n; ++k) s.fma(f.g_inv[id2(n, i, k)], f.g[id2(n, k, j)]);
      if (i == j) s -= Jet::constant(n, f.order, Cplx(1.0));
      r = std::max(r, s.max_abs());
    }
  rep.add("metric_inverse", r);

  {
    Jet s(n, f.order);
    for (int i = 0; i < n; ++i) s.fma(f.lambda[std::size_t(i)], f.xi[std::size_t(i)]);
    s -= Jet::constant(n, f.order, Cplx(1.0));
    rep.add("reeb_pairing", s.max_abs());
  }

  r = 0.0;
  for (int i = 0; i < n; ++i) {
    Jet s(n, f.order);
    for (int j = 0; j < n; ++j) s.fma(f.g[id2(n, i, j)], f.xi[std::size_t(j)]);
    s -= f.lambda[std::size_t(i)];
    r = std::max(r, s.max_abs());
  }
  rep.add("reeb_metric_dual", r);

  r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s(n, f.order - 1);
      for (int k = 0; k < n; ++k) s.fma(f.g[id2(n, i, k)], f.phi[id2(n, k, j)]);
      s -= f.omega[id2(n, i, j)];
      r = std::max(r, s.max_abs());
    }
  rep.add("omega_structure", r);

  r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s(n, f.order);
      for (int k = 0; k < n; ++k) {
        Jet mid(n, f.order);
        for (int l = 0; l < n; ++l) mid.fma(f.g[id2(n, k, l)], f.phi[id2(n, l, j)]);
        s.fma(f.phi[id2(n, k, i)], mid);
      }
      s -= f.g[id2(n, i, j)];
      s.fma(f.lambda[std::size_t(i)], f.lambda[std::size_t(j)]);
      r = std::max(r, s.max_abs());
    }
  rep.add("metric_phi_invariance", r);

  r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s(n, f.order);
      for (int k = 0; k < n; ++k) s.fma(f.phi[id2(n, i, k)], f.phi[id2(n, k, j)]);
      if (i == j) s += Jet::constant(n, f.order, Cplx(1.0));
      s.fma(f.xi[std::size_t(i)], f.lambda[std::size_t(j)], Cplx(-1.0));
      r = std::max(r, s.max_abs());
    }
  rep.add("phi_square", r);

  r = 0.0;
  for (int i = 0; i < n; ++i) {
    Jet s(n, f.order);
    Jet t(n, f.order);
    for (int j = 0; j < n; ++j) {
      s.fma(f.phi[id2(n, i, j)], f.xi[std::size_t(j)]);
      t.fma(f.lambda[std::size_t(j)], f.phi[id2(n, j, i)]);
    }
    r = std::max(r, std::max(s.max_abs(), t.max_abs()));
  }
  rep.add("phi_reeb_and_lambda_phi", r);

  r = 0.0;
  for (int j = 0; j < n; ++j) {
    Jet s(n, f.order - 1);
    for (int i = 0; i < n; ++i) s.fma(f.xi[std::size_t(i)], f.omega[id2(n, i, j)]);
    r = std::max(r, s.max_abs());
  }
  rep.add("reeb_omega", r);

  r = 0.0;
  {
    Jet tr(n, f.order);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Jet s(n, f.order);
        for (int k = 0; k < n; ++k) s.fma(f.proj[id2(n, i, k)], f.proj[id2(n, k, j)]);
        s -= f.proj[id2(n, i, j)];
        r = std::max(r, s.max_abs());
      }
      tr += f.proj[id2(n, i, i)];
    }
    tr -= Jet::constant(n, f.order, Cplx(2.0 * f.m));
    rep.add("projector_squared", r);
    rep.add("projector_trace", tr.max_abs());
  }

  r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s(n, f.order - 1);
      for (int k = 0; k < n; ++k) s.fma(f.pi[id2(n, i, k)], f.omega[id2(n, k, j)]);
      s -= f.proj[id2(n, i, j)];
      r = std::max(r, s.max_abs());
    }
  rep.add("projector_pi_omega", r);

  r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      r = std::max(r, max_abs_diff(f.h[id2(n, i, j)], conjugate(f.h[id2(n, j, i)])));
  rep.add("wick_hermitian", r);

  // Kernel structure of the Wick tensor: both omega and the transverse part
  // of g annihilate h on both slots, while the lambda lambda contraction
  // reproduces xi xi (so g_ij h^in h^jm = xi^n xi^m, not zero).
  double r_omega = 0.0, r_transverse = 0.0, r_reeb = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Jet so(n, f.order - 1);
      Jet st(n, f.order);
      Jet sr(n, f.order);
      for (int i = 0; i < n; ++i) {
        Jet mo(n, f.order - 1);
        Jet mt(n, f.order);
        Jet mr(n, f.order);
        for (int j = 0; j < n; ++j) {
          mo.fma(f.omega[id2(n, i, j)], f.h[id2(n, j, b)]);
          Jet trans = f.g[id2(n, i, j)];
          trans.fma(f.lambda[std::size_t(i)], f.lambda[std::size_t(j)], Cplx(-1.0));
          mt.fma(trans, f.h[id2(n, j, b)]);
          mr.fma(f.lambda[std::size_t(i)] * f.lambda[std::size_t(j)], f.h[id2(n, j, b)]);
        }
        so.fma(f.h[id2(n, i, a)], mo);
        st.fma(f.h[id2(n, i, a)], mt);
        sr.fma(f.h[id2(n, i, a)], mr);
      }
      sr.fma(f.xi[std::size_t(a)], f.xi[std::size_t(b)], Cplx(-1.0));
      r_omega = std::max(r_omega, so.max_abs());
      r_transverse = std::max(r_transverse, st.max_abs());
      r_reeb = std::max(r_reeb, sr.max_abs());
    }
  rep.add("omega_h_kernel", r_omega);
  rep.add("transverse_h_kernel", r_transverse);
  rep.add("reeb_h_image", r_reeb);

  return rep;
}

ResidualReport check_connection(const GeometryFrame& f) {
  int n = f.n;
  ResidualReport rep;

  auto cov_lambda = [&](const std::vector<Jet>& gamma, int j, int k) {
    Jet r = f.lambda[std::size_t(j)].partial(k);
    for (int m2 = 0; m2 < n; ++m2)
      r.fma(gamma[id3(n, m2, j, k)], f.lambda[std::size_t(m2)], Cplx(-1.0));
    return r;
  };

  double r = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) r = std::max(r, cov_lambda(f.gamma, j, k).max_abs());
  rep.add("parallel_lambda", r);

  r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      Jet s = f.xi[std::size_t(i)].partial(k);
      for (int m2 = 0; m2 < n; ++m2) s.fma(f.gamma[id3(n, i, m2, k)], f.xi[std::size_t(m2)]);
      r = std::max(r, s.max_abs());
    }
  rep.add("parallel_xi", r);

  auto cov2_lower = [&](const std::vector<Jet>& gamma, const std::vector<Jet>& t, int i,
                        int j, int k) {
    Jet s = t[id2(n, i, j)].partial(k);
    for (int m2 = 0; m2 < n; ++m2) {
      s.fma(gamma[id3(n, m2, i, k)], t[id2(n, m2, j)], Cplx(-1.0));
      s.fma(gamma[id3(n, m2, j, k)], t[id2(n, i, m2)], Cplx(-1.0));
    }
    return s;
  };

  r = 0.0;
  double r_levi = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        r = std::max(r, cov2_lower(f.gamma, f.g, i, j, k).max_abs());
        r_levi = std::max(r_levi, cov2_lower(f.gamma_g, f.g, i, j, k).max_abs());
      }
  rep.add("parallel_g", r);

  r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        r = std::max(r, cov2_lower(f.gamma, f.omega, i, j, k).max_abs());
  rep.add("parallel_omega", r);

  r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Jet s = f.phi[id2(n, i, j)].partial(k);
        for (int m2 = 0; m2 < n; ++m2) {
          s.fma(f.gamma[id3(n, i, m2, k)], f.phi[id2(n, m2, j)]);
          s.fma(f.gamma[id3(n, m2, j, k)], f.phi[id2(n, i, m2)], Cplx(-1.0));
        }
        r = std::max(r, s.max_abs());
      }
  rep.add("parallel_phi", r);

  rep.add("levi_civita_metric", r_levi);

  r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s = f.omega[id2(n, i, j)];
      for (int k = 0; k < n; ++k)
        s.fma(f.lambda[std::size_t(k)], f.torsion[id3(n, k, j, i)], Cplx(-1.0));
      r = std::max(r, s.max_abs());
    }
  rep.add("torsion_pairing", r);

  r = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet s = f.S[id3(n, k, i, j)];
        s.add_scaled(f.torsion[id3(n, k, i, j)], Cplx(-0.5));
        for (int nn = 0; nn < n; ++nn) {
          Jet mid(n, f.order - 1);
          for (int m2 = 0; m2 < n; ++m2) {
            mid.fma(f.g[id2(n, i, m2)], f.torsion[id3(n, m2, j, nn)]);
            mid.fma(f.g[id2(n, j, m2)], f.torsion[id3(n, m2, i, nn)]);
          }
          s.fma(mid, f.g_inv[id2(n, nn, k)], Cplx(-0.5));
        }
        r = std::max(r, s.max_abs());
      }
  rep.add("potential_from_torsion", r);

  return rep;
}

ResidualReport check_symmetries(const GeometryFrame& f) {
  int n = f.n;
  ResidualReport rep;

  double r_sym = 0.0, r_anti = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          r_sym = std::max(r_sym, max_abs_diff(f.curv_low[id4(n, k, l, i, j)],
                                               f.curv_low[id4(n, l, k, i, j)]));
          Jet s = f.curv_low[id4(n, k, l, i, j)] + f.curv_low[id4(n, k, l, j, i)];
          r_anti = std::max(r_anti, s.max_abs());
        }
  rep.add("curv_pair_symmetric", r_sym);
  rep.add("curv_pair_antisymmetric", r_anti);

  double r = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet s = f.torsion_low[id3(n, k, i, j)] + f.torsion_low[id3(n, i, j, k)] +
                f.torsion_low[id3(n, j, k, i)];
        r = std::max(r, s.max_abs());
      }
  rep.add("torsion_cyclic", r);

  r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet s(n, f.order - 2);
          for (int m2 = 0; m2 < n; ++m2) {
            s.fma(f.g_inv[id2(n, i, m2)], f.curv[id4(n, j, m2, k, l)]);
            s.fma(f.g_inv[id2(n, j, m2)], f.curv[id4(n, i, m2, k, l)]);
          }
          r = std::max(r, s.max_abs());
        }
  rep.add("curv_metric_pairing", r);

  for (const auto& [name, value] : bianchi_residuals(f).items) rep.add(name, value);
  return rep;
}

Classification classify(const GeometryFrame& f, const Tolerances& tol) {
  int n = f.n;
  Classification c;

  double vol = std::abs(f.volume.value());
  c.residuals.add("volume_density", vol);
  c.is_contact = vol > tol.geometry;

  double scale_g = std::max(1.0, max_abs_all(f.g));
  double kc = max_abs_all(f.lie_g);
  c.residuals.add("kcontact", kc);
  c.is_kcontact = kc <= tol.geometry * scale_g;

  double cr = max_abs_all(f.tanno);
  c.residuals.add("cr_tanno", cr);
  c.is_cr = cr <= tol.geometry * scale_g;

  // 2 covg_k omega_ij = lambda_i g_kj - lambda_j g_ki.
  double sas = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Jet s = f.omega[id2(n, i, j)].partial(k) * Cplx(2.0);
        for (int m2 = 0; m2 < n; ++m2) {
          s.fma(f.gamma_g[id3(n, m2, i, k)], f.omega[id2(n, m2, j)], Cplx(-2.0));
          s.fma(f.gamma_g[id3(n, m2, j, k)], f.omega[id2(n, i, m2)], Cplx(-2.0));
        }
        s.fma(f.lambda[std::size_t(i)], f.g[id2(n, k, j)], Cplx(-1.0));
        s.fma(f.lambda[std::size_t(j)], f.g[id2(n, k, i)]);
        sas = std::max(sas, s.max_abs());
      }
  c.residuals.add("sasakian", sas);
  c.is_sasakian = sas <= tol.geometry * scale_g;

  // Levi form omega(phi X, Y) on an orthonormalized basis of ker lambda.
  Eigen::MatrixXd p(n, n), levi_full(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      p(i, j) = f.proj[id2(n, i, j)].value().real();
      double v = 0.0;
      for (int k = 0; k < n; ++k)
        v += f.phi[id2(n, k, i)].value().real() * f.omega[id2(n, k, j)].value().real();
      levi_full(i, j) = v;
    }
  std::vector<Eigen::VectorXd> basis;
  for (int j = 0; j < n && int(basis.size()) < 2 * f.m; ++j) {
    Eigen::VectorXd v = p.col(j);
    for (const auto& b : basis) v -= b.dot(v) * b;
    if (v.norm() > 1e-8) basis.push_back(v.normalized());
  }
  double levi_min = 0.0;
  if (int(basis.size()) == 2 * f.m) {
    Eigen::MatrixXd levi(2 * f.m, 2 * f.m);
    for (std::size_t a = 0; a < basis.size(); ++a)
      for (std::size_t b = 0; b < basis.size(); ++b)
        levi(Eigen::Index(a), Eigen::Index(b)) = basis[a].dot(levi_full * basis[b]);
    levi = 0.5 * (levi + levi.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(levi);
    levi_min = es.eigenvalues().minCoeff();
  }
  c.residuals.add("levi_min_eigenvalue", levi_min);
  c.levi_positive = levi_min > tol.geometry;

  return c;
}

Jet jacobi_bracket(const GeometryFrame& f, const Jet& a, const Jet& b) {
  int n = f.n;
  if (a.n_vars() != n || b.n_vars() != n)
    throw ShapeError("jacobi_bracket operands must live in the chart's coordinates");

  std::vector<Jet> da, db;
  da.reserve(std::size_t(n));
  db.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    da.push_back(a.partial(i));
    db.push_back(b.partial(i));
  }
  int out_order = std::min(a.order(), b.order()) - 1;
  Jet out(n, out_order);
  for (int j = 0; j < n; ++j) {
    Jet v(n, out_order);
    for (int i = 0; i < n; ++i) v.fma(da[std::size_t(i)], f.pi[id2(n, i, j)]);
    out.fma(v, db[std::size_t(j)]);
  }
  Jet xa(n, out_order), xb(n, out_order);
  for (int k = 0; k < n; ++k) {
    xa.fma(f.xi[std::size_t(k)], da[std::size_t(k)]);
    xb.fma(f.xi[std::size_t(k)], db[std::size_t(k)]);
  }
  out.fma(a, xb);
  out.fma(b, xa, Cplx(-1.0));
  return out;
}

}  // namespace cmq
