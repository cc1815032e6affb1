#include "cmq/jet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cmq {

namespace mono {

std::string to_string(std::uint64_t m, int n_vars) {
  std::string s;
  for (int i = 0; i < n_vars; ++i) {
    if (i) s += ",";
    s += std::to_string(exponent(m, i));
  }
  return "(" + s + ")";
}

}  // namespace mono

namespace {

constexpr int kMaxOrder = 60;

// Sorts an unsorted product buffer and combines equal keys, dropping exact zeros.
void sort_combine(std::vector<std::pair<std::uint64_t, Cplx>>& buf) {
  std::sort(buf.begin(), buf.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < buf.size();) {
    std::uint64_t k = buf[i].first;
    Cplx c = buf[i].second;
    ++i;
    while (i < buf.size() && buf[i].first == k) {
      c += buf[i].second;
      ++i;
    }
    if (c != Cplx(0.0)) buf[out++] = {k, c};
  }
  buf.resize(out);
}

// Two-pointer merge of sorted term lists: dst = dst + src, keys <= max_degree.
void merge_into(std::vector<std::pair<std::uint64_t, Cplx>>& dst,
                const std::vector<std::pair<std::uint64_t, Cplx>>& src, int max_degree) {
  if (src.empty()) return;
  std::vector<std::pair<std::uint64_t, Cplx>> out;
  out.reserve(dst.size() + src.size());
  std::size_t i = 0, j = 0;
  while (i < dst.size() || j < src.size()) {
    bool take_src;
    if (i == dst.size())
      take_src = true;
    else if (j == src.size())
      take_src = false;
    else if (dst[i].first == src[j].first) {
      Cplx c = dst[i].second + src[j].second;
      if (c != Cplx(0.0)) out.emplace_back(dst[i].first, c);
      ++i;
      ++j;
      continue;
    } else
      take_src = src[j].first < dst[i].first;
    const auto& t = take_src ? src[j++] : dst[i++];
    if (mono::degree(t.first) <= max_degree && t.second != Cplx(0.0)) out.push_back(t);
  }
  dst = std::move(out);
}

}  // namespace

Jet::Jet(int n_vars, int order) : n_vars_(n_vars), order_(order) {
  if (n_vars < 1 || n_vars > mono::kMaxVars)
    throw ShapeError("jet variable count out of range: " + std::to_string(n_vars));
  if (order < 0 || order > kMaxOrder)
    throw ShapeError("jet order out of range: " + std::to_string(order));
}

Jet Jet::constant(int n_vars, int order, Cplx value) {
  Jet j(n_vars, order);
  if (value != Cplx(0.0)) j.terms_.emplace_back(mono::kOne, value);
  return j;
}

Jet Jet::variable(int i, Cplx value, int n_vars, int order) {
  Jet j(n_vars, order);
  if (i < 0 || i >= n_vars) throw ShapeError("jet variable index out of range");
  if (value != Cplx(0.0)) j.terms_.emplace_back(mono::kOne, value);
  if (order >= 1) j.terms_.emplace_back(mono::var(i), Cplx(1.0));
  return j;
}

void Jet::check_vars(const Jet& o) const {
  if (n_vars_ != o.n_vars_) throw ShapeError("mismatched jet shape (variable count)");
}

void Jet::drop_above_order() {
  while (!terms_.empty() && mono::degree(terms_.back().first) > order_) terms_.pop_back();
}

Cplx Jet::value() const {
  if (!terms_.empty() && terms_.front().first == mono::kOne) return terms_.front().second;
  return Cplx(0.0);
}

Cplx Jet::coeff(std::uint64_t m) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                             [](const auto& t, std::uint64_t k) { return t.first < k; });
  if (it != terms_.end() && it->first == m) return it->second;
  return Cplx(0.0);
}

void Jet::set_coeff(std::uint64_t m, Cplx c) {
  if (mono::degree(m) > order_) throw ShapeError("coefficient degree exceeds jet order");
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                             [](const auto& t, std::uint64_t k) { return t.first < k; });
  if (it != terms_.end() && it->first == m) {
    if (c == Cplx(0.0))
      terms_.erase(it);
    else
      it->second = c;
  } else if (c != Cplx(0.0)) {
    terms_.insert(it, {m, c});
  }
}

Jet Jet::truncated(int new_order) const {
  Jet r = *this;
  if (new_order < 0) throw ShapeError("negative jet order");
  if (new_order < order_) {
    r.order_ = new_order;
    r.drop_above_order();
  }
  return r;
}

Jet Jet::partial(int i) const {
  if (order_ == 0)
    throw BudgetError("jet order budget exhausted: cannot differentiate an order-0 jet");
  if (i < 0 || i >= n_vars_) throw ShapeError("partial derivative index out of range");
  Jet r(n_vars_, order_ - 1);
  r.terms_.reserve(terms_.size());
  for (const auto& [k, c] : terms_) {
    int e = mono::exponent(k, i);
    if (e > 0) r.terms_.emplace_back(mono::div_var(k, i), c * double(e));
  }
  return r;
}

void Jet::fma(const Jet& a, const Jet& b, Cplx scale) {
  check_vars(a);
  check_vars(b);
  int new_order = std::min({order_, a.order_, b.order_});
  if (new_order < order_) {
    order_ = new_order;
    drop_above_order();
  }
  if (a.terms_.empty() || b.terms_.empty() || scale == Cplx(0.0)) return;
  std::vector<std::pair<std::uint64_t, Cplx>> buf;
  buf.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& [ka, ca] : a.terms_) {
    int budget = order_ - mono::degree(ka);
    if (budget < 0) continue;
    Cplx cs = ca * scale;
    for (const auto& [kb, cb] : b.terms_) {
      if (mono::degree(kb) > budget) break;  // terms sorted by degree first
      buf.emplace_back(mono::mul(ka, kb), cs * cb);
    }
  }
  sort_combine(buf);
  merge_into(terms_, buf, order_);
}

void Jet::add_scaled(const Jet& a, Cplx scale) {
  check_vars(a);
  if (a.order_ < order_) {
    order_ = a.order_;
    drop_above_order();
  }
  if (a.terms_.empty() || scale == Cplx(0.0)) return;
  std::vector<std::pair<std::uint64_t, Cplx>> buf;
  buf.reserve(a.terms_.size());
  for (const auto& [k, c] : a.terms_) buf.emplace_back(k, c * scale);
  merge_into(terms_, buf, order_);
}

double Jet::max_abs() const {
  double m = 0.0;
  for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

Jet& Jet::operator+=(const Jet& o) {
  add_scaled(o, Cplx(1.0));
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  add_scaled(o, Cplx(-1.0));
  return *this;
}

Jet& Jet::operator*=(Cplx s) {
  if (s == Cplx(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [k, c] : terms_) c *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  a.check_vars(b);
  Jet r(a.n_vars_, std::min(a.order_, b.order_));
  r.fma(a, b, Cplx(1.0));
  return r;
}

Jet jet_elem(ElemFn f, const Jet& a) {
  const int ord = a.order();
  const Cplx c0 = a.value();
  std::vector<Cplx> co(std::size_t(ord) + 1);
  switch (f) {
    case ElemFn::kExp: {
      Cplx e = std::exp(c0);
      double fact = 1.0;
      for (int k = 0; k <= ord; ++k) {
        if (k > 0) fact *= k;
        co[k] = e / fact;
      }
      break;
    }
    case ElemFn::kSin:
    case ElemFn::kCos: {
      Cplx s = std::sin(c0), c = std::cos(c0);
      // derivative cycle starting at sin or cos
      Cplx cyc[4] = {s, c, -s, -c};
      int off = (f == ElemFn::kCos) ? 1 : 0;
      double fact = 1.0;
      for (int k = 0; k <= ord; ++k) {
        if (k > 0) fact *= k;
        co[k] = cyc[(k + off) % 4] / fact;
      }
      break;
    }
    case ElemFn::kSqrt: {
      if (!(c0.real() > 0.0) || std::abs(c0.imag()) > 1e-12 * (1.0 + std::abs(c0)))
        throw DomainError("sqrt requires a strictly positive real value at the base point");
      co[0] = std::sqrt(c0);
      for (int k = 1; k <= ord; ++k) co[k] = co[k - 1] * (1.5 - k) / (double(k) * c0);
      break;
    }
    case ElemFn::kRecip: {
      if (std::abs(c0) == 0.0) throw DomainError("division by a jet vanishing at the base point");
      co[0] = Cplx(1.0) / c0;
      for (int k = 1; k <= ord; ++k) co[k] = -co[k - 1] / c0;
      break;
    }
  }
  // Horner composition with the nilpotent part of a.
  Jet t = a;
  t.set_coeff(mono::kOne, Cplx(0.0));
  Jet r = Jet::constant(a.n_vars(), ord, co[ord]);
  for (int k = ord - 1; k >= 0; --k) {
    Jet next = Jet::constant(a.n_vars(), ord, co[k]);
    next.fma(r, t);
    r = std::move(next);
  }
  return r;
}

Jet jet_pow_int(const Jet& a, long long k) {
  if (k < 0) return jet_elem(ElemFn::kRecip, jet_pow_int(a, -k));
  Jet r = Jet::constant(a.n_vars(), a.order(), Cplx(1.0));
  Jet base = a;
  while (k > 0) {
    if (k & 1) r = r * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return r;
}

double max_abs_diff(const Jet& a, const Jet& b) {
  Jet d = a - b;
  return d.max_abs();
}

Jet conjugate(const Jet& a) {
  Jet r(a.n_vars(), a.order());
  for (const auto& [key, c] : a.terms()) r.set_coeff(key, std::conj(c));
  return r;
}

}  // namespace cmq
