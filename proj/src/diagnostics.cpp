#include "cmq/diagnostics.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>

namespace cmq {

namespace {

int id2(int n, int i, int j) { return i * n + j; }
int id3(int n, int i, int j, int k) { return (i * n + j) * n + k; }
int id4(int n, int i, int j, int k, int l) { return ((i * n + j) * n + k) * n + l; }

Jet reeb_apply(const GeometryFrame& f, const Jet& a) {
  Jet out(f.n, a.order() - 1);
  for (int i = 0; i < f.n; ++i) out.fma(f.xi[std::size_t(i)], a.partial(i));
  return out;
}

// Hessian of a scalar under the given connection coefficients, outer slot
// differentiating last per the covector rule: H_ij = d_i d_j a - C^l_{ji} d_l a.
Jet scalar_hessian(const GeometryFrame& f, const std::vector<Jet>& conn,
                   const Jet& a, int i, int j) {
  Jet out = a.partial(j).partial(i);
  for (int l = 0; l < f.n; ++l)
    out.fma(conn[std::size_t(id3(f.n, l, j, i))], a.partial(l), Cplx(-1.0));
  return out;
}

// Covariant derivative of the symplectic 2-form under the metric connection.
Jet cov_omega(const GeometryFrame& f, int i, int j, int k) {
  Jet out = f.omega[std::size_t(id2(f.n, j, k))].partial(i);
  for (int l = 0; l < f.n; ++l) {
    out.fma(f.gamma_g[std::size_t(id3(f.n, l, j, i))],
            f.omega[std::size_t(id2(f.n, l, k))], Cplx(-1.0));
    out.fma(f.gamma_g[std::size_t(id3(f.n, l, k, i))],
            f.omega[std::size_t(id2(f.n, j, l))], Cplx(-1.0));
  }
  return out;
}

Jet delta1_raw(const GeometryFrame& f, const Jet& a0) {
  const int n = f.n;
  // Torsion contracted with the Reeb field on its last slot.
  std::vector<Jet> t_xi(std::size_t(n * n), Jet(n, f.order - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet acc(n, f.order - 1);
      for (int k = 0; k < n; ++k)
        acc.fma(f.torsion_low[std::size_t(id3(n, i, j, k))],
                f.xi[std::size_t(k)]);
      t_xi[std::size_t(id2(n, i, j))] = acc;
    }

  std::vector<Jet> hess(std::size_t(n * n), Jet(n, a0.order() - 2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      hess[std::size_t(id2(n, i, j))] = scalar_hessian(f, f.gamma, a0, i, j);

  std::vector<Jet> grad_pi(std::size_t(n), Jet(n, a0.order() - 1));
  for (int k = 0; k < n; ++k) {
    Jet acc(n, a0.order() - 1);
    for (int l = 0; l < n; ++l)
      acc.fma(f.pi[std::size_t(id2(n, k, l))], a0.partial(l));
    grad_pi[std::size_t(k)] = acc;
  }

  // The four-way symmetrized pairing of pi and the inverse metric applied to
  // a symmetric two-index jet table.
  auto h_pair = [&](int i, int j, const std::vector<Jet>& table) {
    Jet acc(n, f.order - 2);
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        const Jet& c = table[std::size_t(id2(n, u, v))];
        if (c.empty()) continue;
        acc.fma(f.pi[std::size_t(id2(n, i, u))] *
                    f.g_inv[std::size_t(id2(n, j, v))],
                c);
        acc.fma(f.pi[std::size_t(id2(n, j, v))] *
                    f.g_inv[std::size_t(id2(n, i, u))],
                c);
        acc.fma(f.pi[std::size_t(id2(n, j, u))] *
                    f.g_inv[std::size_t(id2(n, i, v))],
                c);
        acc.fma(f.pi[std::size_t(id2(n, i, v))] *
                    f.g_inv[std::size_t(id2(n, j, u))],
                c);
      }
    return acc;
  };

  Jet out(n, a0.order() - 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Jet& tij = t_xi[std::size_t(id2(n, i, j))];
      if (tij.empty()) continue;
      out.fma(tij, h_pair(i, j, hess), Cplx(-1.0 / 8.0));
    }

  // Second term: (1/24) T_{ijk} T_{nmp} xi^p H^{ij|nm} pi^{kl} d_l a0.
  std::vector<Jet> t_xi2(std::size_t(n * n), Jet(n, f.order - 1));
  for (int nn = 0; nn < n; ++nn)
    for (int mm = 0; mm < n; ++mm) {
      Jet acc(n, f.order - 1);
      for (int p = 0; p < n; ++p)
        acc.fma(f.torsion_low[std::size_t(id3(n, nn, mm, p))],
                f.xi[std::size_t(p)]);
      t_xi2[std::size_t(id2(n, nn, mm))] = acc;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet hm = h_pair(i, j, t_xi2);
      if (hm.empty()) continue;
      for (int k = 0; k < n; ++k)
        out.fma(f.torsion_low[std::size_t(id3(n, i, j, k))] * hm,
                grad_pi[std::size_t(k)], Cplx(1.0 / 24.0));
    }
  return out;
}

Jet delta1_connection(const GeometryFrame& f, const Jet& a0) {
  const int n = f.n;
  Jet out(n, a0.order() - 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Jet& lg = f.lie_g_inv[std::size_t(id2(n, i, j))];
      if (lg.empty()) continue;
      out.fma(lg, scalar_hessian(f, f.gamma, a0, i, j), Cplx(-0.25));
      for (int k = 0; k < n; ++k) {
        Jet w = cov_omega(f, i, j, k);
        if (w.empty()) continue;
        for (int l = 0; l < n; ++l)
          out.fma(lg * w * f.pi[std::size_t(id2(n, k, l))], a0.partial(l),
                  Cplx(1.0 / 12.0));
      }
    }
  return out;
}

Jet delta1_laplacian(const GeometryFrame& f, const Jet& a0) {
  if (a0.order() < 4)
    throw BudgetError("laplacian commutator needs observable jet order >= 4");
  const int n = f.n;
  ZetaChi zc = zeta_chi(f);

  Jet out = reeb_apply(f, laplacian(f, a0));
  out -= laplacian(f, reeb_apply(f, a0));

  Jet strain(n, f.order - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      strain.fma(f.lie_g[std::size_t(id2(n, i, j))],
                 f.lie_g_inv[std::size_t(id2(n, i, j))]);
  out.fma(strain, reeb_apply(f, a0), Cplx(0.5));

  for (int i = 0; i < n; ++i) out.fma(zc.zeta[std::size_t(i)], a0.partial(i));
  out *= Cplx(-0.25);
  return out;
}

}  // namespace

Jet laplacian(const GeometryFrame& f, const Jet& a) {
  const int n = f.n;
  Jet out(n, a.order() - 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.fma(f.g_inv[std::size_t(id2(n, i, j))],
              scalar_hessian(f, f.gamma_g, a, i, j));
  return out;
}

Jet delta1(const GeometryFrame& f, const Jet& a0, Delta1Form form) {
  if (a0.n_vars() != f.n)
    throw ShapeError("observable does not match the frame dimension");
  switch (form) {
    case Delta1Form::kRaw: return delta1_raw(f, a0);
    case Delta1Form::kConnection: return delta1_connection(f, a0);
    case Delta1Form::kLaplacian: return delta1_laplacian(f, a0);
  }
  throw Error("unknown obstruction form");
}

ZetaChi zeta_chi(const GeometryFrame& f) {
  const int n = f.n;
  ZetaChi out;
  out.zeta.assign(std::size_t(n), Jet(n, f.order - 2));

  // First covariant derivative of the Reeb field under the metric connection.
  std::vector<Jet> grad_xi(std::size_t(n * n), Jet(n, f.order - 1));
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < n; ++m) {
      Jet acc = f.xi[std::size_t(i)].partial(m);
      for (int j = 0; j < n; ++j)
        acc.fma(f.gamma_g[std::size_t(id3(n, i, j, m))], f.xi[std::size_t(j)]);
      grad_xi[std::size_t(id2(n, i, m))] = acc;
    }

  for (int i = 0; i < n; ++i) {
    Jet acc(n, f.order - 2);
    for (int nn = 0; nn < n; ++nn)
      for (int mm = 0; mm < n; ++mm) {
        const Jet& ginv = f.g_inv[std::size_t(id2(n, nn, mm))];
        for (int k = 0; k < n; ++k)
          acc.fma(f.curv_g[std::size_t(id4(n, i, nn, k, mm))] * ginv,
                  f.xi[std::size_t(k)]);
        // Second covariant derivative of the Reeb field, traced with the
        // inverse metric.
        Jet second = grad_xi[std::size_t(id2(n, i, mm))].partial(nn);
        for (int l = 0; l < n; ++l) {
          second.fma(f.gamma_g[std::size_t(id3(n, i, l, nn))],
                     grad_xi[std::size_t(id2(n, l, mm))]);
          second.fma(f.gamma_g[std::size_t(id3(n, l, mm, nn))],
                     grad_xi[std::size_t(id2(n, i, l))], Cplx(-1.0));
        }
        acc.fma(ginv, second);
        const Jet& lg = f.lie_g_inv[std::size_t(id2(n, nn, mm))];
        if (!lg.empty())
          for (int k = 0; k < n; ++k)
            acc.fma(lg * cov_omega(f, nn, mm, k),
                    f.pi[std::size_t(id2(n, k, i))], Cplx(1.0 / 6.0));
      }
    out.zeta[std::size_t(i)] = acc;
  }

  Jet chi(n, f.order - 3);
  for (int i = 0; i < n; ++i) {
    chi += out.zeta[std::size_t(i)].partial(i);
    for (int j = 0; j < n; ++j)
      chi.fma(f.gamma_g[std::size_t(id3(n, i, j, i))], out.zeta[std::size_t(j)]);
  }
  out.chi = std::move(chi);
  return out;
}

ReebOrbit hopf_fiber_orbit(std::span<const double> start, int n_samples) {
  if (start.size() != 3) throw ShapeError("fiber orbits take a 3-coordinate start point");
  if (n_samples < 8) throw DomainError("orbit sampling needs at least 8 points");
  // Push the chart point onto the unit sphere, rotate both ambient planes in
  // step, and project back. The rotation is the flow of the chart's Reeb
  // field, so the period is one full turn.
  const double u1 = start[0], u2 = start[1], u3 = start[2];
  const double s = 1.0 + u1 * u1 + u2 * u2 + u3 * u3;
  double x[4] = {2.0 * u1 / s, 2.0 * u2 / s, 2.0 * u3 / s, (2.0 - s) / s};
  ReebOrbit orbit;
  orbit.period = 2.0 * std::numbers::pi;
  orbit.times.reserve(std::size_t(n_samples));
  orbit.points.reserve(std::size_t(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    double t = orbit.period * double(k) / double(n_samples);
    double c = std::cos(t), sn = std::sin(t);
    double y1 = c * x[0] - sn * x[1];
    double y2 = sn * x[0] + c * x[1];
    double y3 = c * x[2] - sn * x[3];
    double y4 = sn * x[2] + c * x[3];
    orbit.times.push_back(t);
    orbit.points.push_back({y1 / (1.0 + y4), y2 / (1.0 + y4), y3 / (1.0 + y4)});
  }
  return orbit;
}

PsiResult psi_gamma(const FrameFactory& factory, const ReebOrbit& orbit,
                    const ObservableFn& a0, double orbit_tol) {
  const std::size_t count = orbit.points.size();
  if (count != orbit.times.size() || count < 8)
    throw ShapeError("orbit needs matching times and points, at least 8 samples");
  if (!(orbit.period > 0.0)) throw DomainError("orbit period must be positive");

  PsiResult res;
  std::vector<GeometryFrame> frames;
  frames.reserve(count);
  for (std::size_t k = 0; k < count; ++k)
    frames.push_back(factory(orbit.points[k]));

  const int n = frames[0].n;
  std::vector<Cplx> values(count, Cplx(0.0));
  for (std::size_t k = 0; k < count; ++k) {
    const GeometryFrame& fr = frames[k];
    ZetaChi zc = zeta_chi(fr);
    Jet obs = a0(fr);
    Cplx v = 0.0;
    for (int i = 0; i < n; ++i)
      v += zc.zeta[std::size_t(i)].value() * obs.partial(i).value();
    values[k] = v;

    // Central-difference tangent with periodic wrap; must follow the Reeb
    // field or the curve is not a characteristic.
    std::size_t prev = (k + count - 1) % count;
    std::size_t next = (k + 1) % count;
    double dt = orbit.times[next] - orbit.times[prev];
    if (next < k) dt += orbit.period;
    if (prev > k) dt += orbit.period;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      double tangent =
          (orbit.points[next][std::size_t(i)] - orbit.points[prev][std::size_t(i)]) / dt;
      worst = std::max(worst,
                       std::abs(tangent - fr.xi[std::size_t(i)].value().real()));
    }
    res.orbit_residual = std::max(res.orbit_residual, worst);
  }
  if (res.orbit_residual > orbit_tol)
    throw DomainError("orbit samples do not follow the Reeb field");

  QuadratureResult quad = periodic_trapezoid(values, orbit.times, orbit.period);
  res.value = quad.value;
  res.quad_error = quad.error_estimate;
  return res;
}

QuadratureResult periodic_trapezoid(std::span<const Cplx> values,
                                    std::span<const double> times,
                                    double period) {
  const std::size_t count = values.size();
  if (count != times.size() || count < 2)
    throw ShapeError("quadrature needs matching values and times, at least 2 samples");
  if (!(period > 0.0)) throw DomainError("quadrature period must be positive");
  auto pass = [&](std::size_t stride) {
    Cplx acc = 0.0;
    for (std::size_t k = 0; k < count; k += stride) {
      std::size_t next = (k + stride) % count;
      double dt = times[next] - times[k];
      if (next <= k) dt += period;
      acc += 0.5 * dt * (values[k] + values[next]);
    }
    return acc;
  };
  QuadratureResult out;
  out.value = pass(1);
  if (count % 2 == 0)
    out.error_estimate = std::abs(out.value - pass(2)) / 3.0;
  return out;
}

PhiResult phi_character(const FrameFactory& factory, const QuadGrid& grid,
                        const ObservableFn& a0,
                        const std::function<Jet(const Jet&)>& f) {
  if (grid.points.size() != grid.weights.size() || grid.points.empty())
    throw ShapeError("quadrature grid needs matching points and weights");
  PhiResult res;
  for (std::size_t k = 0; k < grid.points.size(); ++k) {
    GeometryFrame fr = factory(grid.points[k]);
    ZetaChi zc = zeta_chi(fr);
    Jet composed = f(a0(fr));
    Cplx volume = fr.volume.value();
    Cplx zf = 0.0;
    for (int i = 0; i < fr.n; ++i)
      zf += zc.zeta[std::size_t(i)].value() * composed.partial(i).value();
    res.direct += grid.weights[k] * volume * zf;
    res.by_parts -= grid.weights[k] * volume * zc.chi.value() * composed.value();
  }
  res.discrepancy = std::abs(res.direct - res.by_parts);
  return res;
}

}  // namespace cmq
