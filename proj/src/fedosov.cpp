#include "cmq/fedosov.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace cmq {

namespace {

std::size_t id2(int n, int i, int j) { return std::size_t(i) * n + std::size_t(j); }

/// (i/nu) r o r. With r of odd form degree the fiberwise (level-zero) part of
/// r o r cancels identically, so the product equals half the graded
/// commutator; computing it that way keeps rounding remainders out of the
/// formal division.
WickElement quad_term(const GeometryFrame& f, const WickElement& r) {
  return commutator(f, r, r).nu_shifted(-1, Cplx(0.0, 0.5));
}

Jet zero_jet(int n_vars) { return Jet(n_vars, 60); }

}  // namespace

FedosovState solve_r(const GeometryFrame& frame, int nu_cutoff) {
  if (nu_cutoff < 1) throw ShapeError("nu-cutoff must be at least 1");
  if (frame.order < nu_cutoff + 3)
    throw BudgetError("abelian connection at nu-cutoff " + std::to_string(nu_cutoff) +
                      " needs jet order >= " + std::to_string(nu_cutoff + 3));
  FedosovState st;
  st.frame = frame;
  st.nu_cutoff = nu_cutoff;
  st.working_cutoff = nu_cutoff + 2;
  auto [t_el, r_el] = make_T_R(frame, st.working_cutoff);
  st.torsion_el = t_el;
  st.curvature_el = r_el;

  // Degree d of r is populated by operator chains of depth d - 1, so the
  // first nu_cutoff + 1 passes converge every stored degree; the extra pass
  // records an exact zero delta, the idempotence certificate.
  WickElement seed = delta_inv(frame, t_el + r_el);
  WickElement r(frame.n, st.working_cutoff);
  const int passes = nu_cutoff + 2;
  for (int p = 0; p < passes; ++p) {
    WickElement next = seed + delta_inv(frame, cov_d(frame, r) + quad_term(frame, r));
    st.iteration_deltas.push_back(max_abs_diff(next, r));
    r = next;
  }
  st.r = r;
  return st;
}

WickElement connection_D(const FedosovState& st, const WickElement& a) {
  const GeometryFrame& f = st.frame;
  return cov_d(f, a) - delta(a) + commutator(f, st.r, a).nu_shifted(-1, Cplx(0.0, 1.0));
}

WickElement flatness_residual(const FedosovState& st) {
  const GeometryFrame& f = st.frame;
  WickElement defect = st.torsion_el + st.curvature_el + cov_d(f, st.r) +
                       quad_term(f, st.r) - delta(st.r);
  return defect.truncated_nu_degree(st.nu_cutoff);
}

WickElement quantum_lift(const FedosovState& st, const Jet& a0, int degree_cap) {
  const GeometryFrame& f = st.frame;
  if (a0.n_vars() != f.n) throw ShapeError("observable does not match the frame dimension");
  int cap = degree_cap < 0 ? st.working_cutoff : std::min(degree_cap, st.working_cutoff);
  WickElement seed = WickElement::scalar(a0, st.working_cutoff);
  // The iteration map is affine in the lifted element, so each pass only has
  // to transport the previous pass's correction; its minimal nu-degree grows
  // by one per pass, which also bounds the loop.
  WickElement b = seed;
  WickElement d = seed;
  for (int p = 0; p < cap && !d.empty(); ++p) {
    WickElement upd = cov_d(f, d) + commutator(f, st.r, d).nu_shifted(-1, Cplx(0.0, 1.0));
    d = delta_inv(f, upd).truncated_nu_degree(cap);
    b += d;
  }
  return b;
}

std::vector<Jet> delta_series(const FedosovState& st, const Jet& a0) {
  const GeometryFrame& f = st.frame;
  WickElement lifted = quantum_lift(st, a0);
  std::vector<Jet> s = scalar_series(xi_contract(f, connection_D(st, lifted)));
  s.resize(std::size_t(st.nu_cutoff / 2) + 1, zero_jet(f.n));
  return s;
}

std::vector<Jet> delta_nu(const FedosovState& st, const std::vector<Jet>& a) {
  const int pmax = st.nu_cutoff / 2;
  std::vector<Jet> out(std::size_t(pmax) + 1, zero_jet(st.frame.n));
  for (int j = 0; j < int(a.size()) && j <= pmax; ++j) {
    if (a[std::size_t(j)].empty()) continue;
    // Same capping as star_nu: the nu^j coefficient only feeds orders p with
    // p + j <= pmax, and its jet is generally too shallow for a full lift.
    int cap = st.nu_cutoff - 2 * j + 2;
    WickElement lifted = quantum_lift(st, a[std::size_t(j)], cap);
    std::vector<Jet> s =
        scalar_series(xi_contract(st.frame, connection_D(st, lifted)));
    for (int p = 0; p + j <= pmax && p < int(s.size()); ++p)
      out[std::size_t(p + j)] += s[std::size_t(p)];
  }
  return out;
}

namespace {

/// Pi(Q a0 o Q b0) with both lifts capped at `cap` stored nu-degrees; the
/// scalar output is then valid for nu-powers p with 2p <= cap - 2.
std::vector<Jet> star_pair(const FedosovState& st, const Jet& a0, const Jet& b0, int cap) {
  WickElement qa = quantum_lift(st, a0, cap);
  WickElement qb = quantum_lift(st, b0, cap);
  return scalar_series(circ(st.frame, qa, qb));
}

}  // namespace

std::vector<Jet> star_series(const FedosovState& st, const Jet& a0, const Jet& b0) {
  std::vector<Jet> s = star_pair(st, a0, b0, st.working_cutoff);
  s.resize(std::size_t(st.nu_cutoff / 2) + 1, zero_jet(st.frame.n));
  return s;
}

std::vector<Jet> star_nu(const FedosovState& st, const std::vector<Jet>& a,
                         const std::vector<Jet>& b) {
  const int pmax = st.nu_cutoff / 2;
  std::vector<Jet> out(std::size_t(pmax) + 1, zero_jet(st.frame.n));
  for (int j = 0; j < int(a.size()) && j <= pmax; ++j) {
    if (a[std::size_t(j)].empty()) continue;
    for (int k = 0; k < int(b.size()) && j + k <= pmax; ++k) {
      if (b[std::size_t(k)].empty()) continue;
      // Operands carrying nu^{j+k} only need the product's lower nu-orders;
      // capping the lifts accordingly also spares their (shallower) jets.
      int cap = st.nu_cutoff - 2 * (j + k) + 2;
      std::vector<Jet> s = star_pair(st, a[std::size_t(j)], b[std::size_t(k)], cap);
      for (int p = 0; p + j + k <= pmax && p < int(s.size()); ++p)
        out[std::size_t(p + j + k)] += s[std::size_t(p)];
    }
  }
  return out;
}

double series_max_abs(const std::vector<Jet>& s) {
  double worst = 0.0;
  for (const Jet& c : s) worst = std::max(worst, c.max_abs());
  return worst;
}

double series_max_abs_diff(const std::vector<Jet>& a, const std::vector<Jet>& b) {
  double worst = 0.0;
  std::size_t m = std::max(a.size(), b.size());
  for (std::size_t p = 0; p < m; ++p) {
    if (p >= a.size()) {
      worst = std::max(worst, b[p].max_abs());
    } else if (p >= b.size()) {
      worst = std::max(worst, a[p].max_abs());
    } else {
      worst = std::max(worst, max_abs_diff(a[p], b[p]));
    }
  }
  return worst;
}

double wick_kernel_residual(const GeometryFrame& f, const Jet& a, bool conjugate_side) {
  const int n = f.n;
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    Jet acc(n, a.order() - 1);
    for (int i = 0; i < n; ++i) {
      const Jet& hij = conjugate_side ? f.h[id2(n, i, j)] : f.h[id2(n, j, i)];
      acc.fma(hij, a.partial(i));
    }
    worst = std::max(worst, acc.max_abs());
  }
  return worst;
}

std::vector<Jet> wick_kernel_candidates(const GeometryFrame& f, bool conjugate_side) {
  const int n = f.n;
  Eigen::MatrixXcd m(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      m(j, i) = conjugate_side ? f.h[id2(n, i, j)].value() : f.h[id2(n, j, i)].value();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
  lu.setThreshold(1e-9);
  Eigen::MatrixXcd kernel = lu.kernel();
  std::vector<Jet> out;
  if (lu.dimensionOfKernel() == 0) return out;
  for (int c = 0; c < kernel.cols(); ++c) {
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(kernel(i, c)));
    if (scale == 0.0) continue;
    Jet cand(n, f.order);
    for (int i = 0; i < n; ++i) {
      Cplx w = kernel(i, c) / scale;
      if (w == Cplx(0.0)) continue;
      cand += Jet::variable(i, f.base[std::size_t(i)], n, f.order) * w;
    }
    out.push_back(std::move(cand));
  }
  return out;
}

double check_wick_property(const FedosovState& st, const Jet& a, const Jet& c,
                           bool a_on_left) {
  std::vector<Jet> prod =
      a_on_left ? star_series(st, a, c) : star_series(st, c, a);
  Jet plain = a * c;
  double worst = max_abs_diff(prod.at(0), plain);
  for (std::size_t p = 1; p < prod.size(); ++p)
    worst = std::max(worst, prod[p].max_abs());
  return worst;
}

}  // namespace cmq
