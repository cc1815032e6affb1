#include "cmq/wick.hpp"

#include <algorithm>
#include <limits>

namespace cmq {

namespace {

int id2(int n, int i, int j) { return i * n + j; }
int id3(int n, int i, int j, int k) { return (i * n + j) * n + k; }
int id4(int n, int i, int j, int k, int l) { return ((i * n + j) * n + k) * n + l; }

// Parity of the transpositions sorting the concatenation dx^A dx^B; callers
// reject overlapping masks first.
int wedge_parity(std::uint8_t a, std::uint8_t b) {
  int count = 0;
  std::uint32_t rest = b;
  while (rest) {
    int bit = std::countr_zero(rest);
    rest &= rest - 1;
    count += std::popcount(std::uint32_t(a) >> (bit + 1));
  }
  return count & 1;
}

Cplx wedge_sign(std::uint8_t a, std::uint8_t b) {
  return wedge_parity(a, b) ? Cplx(-1.0) : Cplx(1.0);
}

// Sign of removing index j from the mask: the count of set bits below j.
Cplx interior_sign(std::uint8_t form, int j) {
  int below = std::popcount(std::uint32_t(form) & ((1u << j) - 1u));
  return (below & 1) ? Cplx(-1.0) : Cplx(1.0);
}

void require_frame_match(const GeometryFrame& f, const WickElement& a) {
  if (a.n_vars() != f.n)
    throw ShapeError("wick element does not match the frame dimension");
}

void require_same_shape(const WickElement& a, const WickElement& b) {
  if (a.n_vars() != b.n_vars() || a.nu_cutoff() != b.nu_cutoff())
    throw ShapeError("wick elements have mismatched shape or nu-cutoff");
}

// Shared worker for circ and the graded commutator: accumulates the
// contraction series of left * right into out, starting at contraction level
// min_level. With negate_graded set, every pair contributes with the extra
// factor -(-1)^{|F_left||F_right|}, which turns a second pass with swapped
// arguments into the commutator. The commutator passes min_level = 1: its
// level-0 parts cancel identically (the fiberwise product is graded
// commutative), and dropping them structurally keeps rounding remainders of
// nu-power zero out of formal divisions by nu.
void circ_accumulate(const GeometryFrame& f, const WickElement& left,
                     const WickElement& right, bool negate_graded, int min_level,
                     WickElement& out) {
  const int n = f.n;
  const int cutoff = out.nu_cutoff();
  using YPair = std::pair<std::uint64_t, std::uint64_t>;
  for (const auto& [ka, ca] : left.terms()) {
    for (const auto& [kb, cb] : right.terms()) {
      // Contractions trade two y-degrees for one nu-power, so the nu-degree
      // of every level equals the degree of the bare product; filter once.
      if (ka.nu_degree() + kb.nu_degree() > cutoff) continue;
      if (ka.form & kb.form) continue;
      // Contraction-only accumulation needs a y on both sides; skipping early
      // saves the bare coefficient product, which is the expensive part.
      if (min_level > 0 &&
          (mono::degree(ka.y) == 0 || mono::degree(kb.y) == 0))
        continue;
      Cplx s = wedge_sign(ka.form, kb.form);
      if (negate_graded) {
        s = -s;
        if ((ka.form_degree() & 1) && (kb.form_degree() & 1)) s = -s;
      }
      const std::uint8_t form = ka.form | kb.form;
      const int nu0 = int(ka.nu) + int(kb.nu);

      std::map<YPair, Jet> state;
      {
        Jet c0(n, std::min(ca.order(), cb.order()));
        c0.fma(ca, cb, s);
        state.emplace(YPair{ka.y, kb.y}, std::move(c0));
      }
      // Level k carries the operator factor nu^k / (2^k k!).
      double level_scale = 1.0;
      for (int k = 0; !state.empty(); ++k) {
        if (k >= min_level)
          for (const auto& [ys, c] : state) {
            WKey key{std::uint8_t(nu0 + k), mono::mul(ys.first, ys.second), form};
            out.add_term(key, c, Cplx(level_scale));
          }
        std::map<YPair, Jet> next;
        for (const auto& [ys, c] : state) {
          if (c.empty()) continue;
          for (int i = 0; i < n; ++i) {
            int ei = mono::exponent(ys.first, i);
            if (ei == 0) continue;
            std::uint64_t yi = mono::div_var(ys.first, i);
            for (int j = 0; j < n; ++j) {
              int ej = mono::exponent(ys.second, j);
              if (ej == 0) continue;
              const Jet& hij = f.h[id2(n, i, j)];
              if (hij.empty()) continue;
              YPair key{yi, mono::div_var(ys.second, j)};
              auto it = next.find(key);
              if (it == next.end())
                it = next.emplace(key, Jet(n, std::min(c.order(), hij.order()))).first;
              it->second.fma(c, hij, Cplx(double(ei) * double(ej)));
            }
          }
        }
        state = std::move(next);
        level_scale /= 2.0 * double(k + 1);
      }
    }
  }
}

}  // namespace

WickElement WickElement::scalar(const Jet& a0, int nu_cutoff) {
  WickElement r(a0.n_vars(), nu_cutoff);
  r.add_term(WKey{}, a0);
  return r;
}

Jet WickElement::coeff(const WKey& k) const {
  auto it = terms_.find(k);
  if (it != terms_.end()) return it->second;
  return Jet(n_vars_, 60);
}

void WickElement::add_term(const WKey& k, const Jet& c, Cplx scale) {
  if (c.n_vars() != n_vars_)
    throw ShapeError("wick coefficient has a mismatched variable count");
  if (k.nu_degree() > cutoff_) return;
  if (c.empty() || scale == Cplx(0.0)) return;
  auto it = terms_.find(k);
  if (it == terms_.end()) {
    Jet fresh(n_vars_, c.order());
    fresh.add_scaled(c, scale);
    if (!fresh.empty()) terms_.emplace(k, std::move(fresh));
    return;
  }
  it->second.add_scaled(c, scale);
  if (it->second.empty()) terms_.erase(it);
}

int WickElement::min_order(int fallback) const {
  if (terms_.empty()) return fallback;
  int m = std::numeric_limits<int>::max();
  for (const auto& [k, c] : terms_) m = std::min(m, c.order());
  return m;
}

int WickElement::lowest_nu_degree() const {
  int m = cutoff_ + 1;
  for (const auto& [k, c] : terms_) m = std::min(m, k.nu_degree());
  return m;
}

WickElement WickElement::truncated_nu_degree(int deg) const {
  WickElement r(n_vars_, cutoff_);
  for (const auto& [k, c] : terms_)
    if (k.nu_degree() <= deg) r.add_term(k, c);
  return r;
}

WickElement WickElement::nu_shifted(int shift, Cplx scale) const {
  WickElement r(n_vars_, cutoff_);
  for (const auto& [k, c] : terms_) {
    int p = int(k.nu) + shift;
    if (p < 0) throw Error("formal division by nu hit a term of nu-power zero");
    r.add_term(WKey{std::uint8_t(p), k.y, k.form}, c, scale);
  }
  return r;
}

double WickElement::max_abs() const {
  double m = 0.0;
  for (const auto& [k, c] : terms_) m = std::max(m, c.max_abs());
  return m;
}

WickElement& WickElement::operator+=(const WickElement& o) {
  check_compatible(o);
  for (const auto& [k, c] : o.terms_) add_term(k, c);
  return *this;
}

WickElement& WickElement::operator-=(const WickElement& o) {
  check_compatible(o);
  for (const auto& [k, c] : o.terms_) add_term(k, c, Cplx(-1.0));
  return *this;
}

WickElement& WickElement::operator*=(Cplx s) {
  if (s == Cplx(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [k, c] : terms_) c *= s;
  return *this;
}

void WickElement::check_compatible(const WickElement& o) const {
  if (n_vars_ != o.n_vars_ || cutoff_ != o.cutoff_)
    throw ShapeError("wick elements have mismatched shape or nu-cutoff");
}

double max_abs_diff(const WickElement& a, const WickElement& b) {
  WickElement d = a;
  d -= b;
  return d.max_abs();
}

WickElement circ(const GeometryFrame& f, const WickElement& a, const WickElement& b) {
  require_frame_match(f, a);
  require_same_shape(a, b);
  WickElement out(a.n_vars(), a.nu_cutoff());
  circ_accumulate(f, a, b, false, 0, out);
  return out;
}

WickElement commutator(const GeometryFrame& f, const WickElement& a,
                       const WickElement& b) {
  require_frame_match(f, a);
  require_same_shape(a, b);
  WickElement out(a.n_vars(), a.nu_cutoff());
  circ_accumulate(f, a, b, false, 1, out);
  circ_accumulate(f, b, a, true, 1, out);
  return out;
}

WickElement dot_mul(const WickElement& a, const WickElement& b) {
  require_same_shape(a, b);
  const int cutoff = a.nu_cutoff();
  WickElement out(a.n_vars(), cutoff);
  for (const auto& [ka, ca] : a.terms()) {
    for (const auto& [kb, cb] : b.terms()) {
      if (ka.nu_degree() + kb.nu_degree() > cutoff) continue;
      if (ka.form & kb.form) continue;
      Cplx s = wedge_sign(ka.form, kb.form);
      WKey key{std::uint8_t(ka.nu + kb.nu), mono::mul(ka.y, kb.y),
               std::uint8_t(ka.form | kb.form)};
      Jet c(a.n_vars(), std::min(ca.order(), cb.order()));
      c.fma(ca, cb, s);
      out.add_term(key, c);
    }
  }
  return out;
}

WickElement delta(const WickElement& a) {
  const int n = a.n_vars();
  WickElement out(n, a.nu_cutoff());
  for (const auto& [k, c] : a.terms()) {
    for (int i = 0; i < n; ++i) {
      int e = mono::exponent(k.y, i);
      if (e == 0) continue;
      std::uint8_t bit = std::uint8_t(1u << i);
      if (k.form & bit) continue;
      WKey key{k.nu, mono::div_var(k.y, i), std::uint8_t(k.form | bit)};
      out.add_term(key, c, wedge_sign(bit, k.form) * Cplx(double(e)));
    }
  }
  return out;
}

WickElement delta_star(const GeometryFrame& f, const WickElement& a) {
  require_frame_match(f, a);
  const int n = f.n;
  WickElement out(n, a.nu_cutoff());
  for (const auto& [k, c] : a.terms()) {
    for (int j = 0; j < n; ++j) {
      std::uint8_t bit = std::uint8_t(1u << j);
      if (!(k.form & bit)) continue;
      Cplx s = interior_sign(k.form, j);
      std::uint8_t nf = std::uint8_t(k.form & ~bit);
      for (int i = 0; i < n; ++i) {
        const Jet& pji = f.proj[id2(n, j, i)];
        if (pji.empty()) continue;
        Jet cc(n, std::min(c.order(), pji.order()));
        cc.fma(c, pji, s);
        out.add_term(WKey{k.nu, mono::mul(k.y, mono::var(i)), nf}, cc);
      }
    }
  }
  return out;
}

WickElement delta_inv(const GeometryFrame& f, const WickElement& a) {
  require_frame_match(f, a);
  WickElement sec = lambda_wedge(f, xi_contract(f, a));
  WickElement prim = a;
  prim -= sec;
  // delta* raises y-degree and lowers form degree; the scale is fixed by the
  // (m, n) bidegree of the source monomial, with the homotopy-degenerate
  // monomials dropped entirely.
  auto scaled_by_degree = [&](const WickElement& part, int shift) {
    WickElement r(a.n_vars(), a.nu_cutoff());
    for (const auto& [k, c] : part.terms()) {
      int denom = mono::degree(k.y) + k.form_degree() + shift;
      if (denom <= 0) continue;
      r.add_term(k, c, Cplx(1.0 / double(denom)));
    }
    return r;
  };
  WickElement out = delta_star(f, scaled_by_degree(prim, 0));
  out += delta_star(f, scaled_by_degree(sec, -1));
  return out;
}

WickElement proj_Pi(const GeometryFrame& f, const WickElement& a) {
  require_frame_match(f, a);
  const int n = f.n;
  WickElement out(n, a.nu_cutoff());
  for (const auto& [k, c] : a.terms())
    if (k.y == mono::kOne && k.form == 0) out.add_term(k, c);
  WickElement contracted = xi_contract(f, a);
  for (const auto& [k, c] : contracted.terms()) {
    if (k.y != mono::kOne || k.form != 0) continue;
    for (int i = 0; i < n; ++i) {
      if (f.lambda[i].empty()) continue;
      Jet cc(n, std::min(c.order(), f.lambda[i].order()));
      cc.fma(c, f.lambda[i]);
      out.add_term(WKey{k.nu, mono::kOne, std::uint8_t(1u << i)}, cc);
    }
  }
  return out;
}

WickElement cov_d(const GeometryFrame& f, const WickElement& a) {
  require_frame_match(f, a);
  if (!a.empty() && a.min_order() < 1)
    throw BudgetError("covariant derivative needs at least one remaining jet order");
  const int n = f.n;
  WickElement out(n, a.nu_cutoff());
  for (const auto& [k, c] : a.terms()) {
    for (int i = 0; i < n; ++i) {
      std::uint8_t bit = std::uint8_t(1u << i);
      if (k.form & bit) continue;
      Cplx s = wedge_sign(bit, k.form);
      std::uint8_t nf = std::uint8_t(k.form | bit);
      out.add_term(WKey{k.nu, k.y, nf}, c.partial(i), s);
      for (int m = 0; m < n; ++m) {
        int e = mono::exponent(k.y, m);
        if (e == 0) continue;
        std::uint64_t ym = mono::div_var(k.y, m);
        for (int j = 0; j < n; ++j) {
          const Jet& gamma = f.gamma[id3(n, m, j, i)];
          if (gamma.empty()) continue;
          Jet cc(n, std::min(c.order(), gamma.order()));
          cc.fma(c, gamma, s * Cplx(-double(e)));
          out.add_term(WKey{k.nu, mono::mul(ym, mono::var(j)), nf}, cc);
        }
      }
    }
  }
  return out;
}

WickElement xi_contract(const GeometryFrame& f, const WickElement& a) {
  require_frame_match(f, a);
  const int n = f.n;
  WickElement out(n, a.nu_cutoff());
  for (const auto& [k, c] : a.terms()) {
    for (int j = 0; j < n; ++j) {
      std::uint8_t bit = std::uint8_t(1u << j);
      if (!(k.form & bit)) continue;
      if (f.xi[j].empty()) continue;
      Jet cc(n, std::min(c.order(), f.xi[j].order()));
      cc.fma(c, f.xi[j], interior_sign(k.form, j));
      out.add_term(WKey{k.nu, k.y, std::uint8_t(k.form & ~bit)}, cc);
    }
  }
  return out;
}

WickElement lambda_wedge(const GeometryFrame& f, const WickElement& a) {
  require_frame_match(f, a);
  const int n = f.n;
  WickElement out(n, a.nu_cutoff());
  for (const auto& [k, c] : a.terms()) {
    for (int i = 0; i < n; ++i) {
      std::uint8_t bit = std::uint8_t(1u << i);
      if (k.form & bit) continue;
      if (f.lambda[i].empty()) continue;
      Jet cc(n, std::min(c.order(), f.lambda[i].order()));
      cc.fma(c, f.lambda[i], wedge_sign(bit, k.form));
      out.add_term(WKey{k.nu, k.y, std::uint8_t(k.form | bit)}, cc);
    }
  }
  return out;
}

std::pair<WickElement, WickElement> make_T_R(const GeometryFrame& f, int nu_cutoff) {
  const int n = f.n;
  WickElement t_el(n, nu_cutoff);
  WickElement r_el(n, nu_cutoff);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const Jet& t = f.torsion_low[id3(n, k, i, j)];
        if (t.empty()) continue;
        t_el.add_term(WKey{0, mono::var(k), std::uint8_t((1u << i) | (1u << j))}, t);
      }
  // Collapsing the full (1/4) R_ijkl sum onto i <= j, k < l representatives
  // gives weight 1, except 1/2 on the diagonal y^i y^i monomials. The overall
  // sign is fixed by the operator identities: with the commutator convention
  // behind curv_low, making both d_nabla^2 = (i/nu)[R, .] and the Bianchi
  // relation delta R = d_nabla T hold requires the negative of the raw
  // y y dx dx contraction.
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          const Jet& r = f.curv_low[id4(n, i, j, k, l)];
          if (r.empty()) continue;
          r_el.add_term(WKey{0, mono::mul(mono::var(i), mono::var(j)),
                             std::uint8_t((1u << k) | (1u << l))},
                        r, Cplx(i == j ? -0.5 : -1.0));
        }
  return {std::move(t_el), std::move(r_el)};
}

double transversality_residual(const GeometryFrame& f, const WickElement& a) {
  require_frame_match(f, a);
  const int n = f.n;
  WickElement out(n, a.nu_cutoff());
  for (const auto& [k, c] : a.terms()) {
    for (int i = 0; i < n; ++i) {
      int e = mono::exponent(k.y, i);
      if (e == 0) continue;
      if (f.xi[i].empty()) continue;
      Jet cc(n, std::min(c.order(), f.xi[i].order()));
      cc.fma(c, f.xi[i], Cplx(double(e)));
      out.add_term(WKey{k.nu, mono::div_var(k.y, i), k.form}, cc);
    }
  }
  return out.max_abs();
}

std::vector<Jet> scalar_series(const WickElement& a) {
  std::vector<Jet> r;
  for (const auto& [k, c] : a.terms()) {
    if (k.y != mono::kOne || k.form != 0) continue;
    if (int(k.nu) >= int(r.size())) r.resize(std::size_t(k.nu) + 1, Jet(a.n_vars(), 60));
    r[k.nu] = c;
  }
  return r;
}

ResidualReport bianchi_residuals(const GeometryFrame& f) {
  auto [t_el, r_el] = make_T_R(f, 4);
  ResidualReport rep;
  rep.add("bianchi_delta_torsion", delta(t_el).max_abs());
  rep.add("bianchi_delta_curvature", max_abs_diff(delta(r_el), cov_d(f, t_el)));
  rep.add("bianchi_cov_d_curvature", cov_d(f, r_el).max_abs());
  return rep;
}

}  // namespace cmq
