#include "cmq/chart.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include "cmq/jet.hpp"

namespace cmq {
namespace {

enum class Sect { kNone, kLambda, kMetric, kPhi, kXi };

int section_slot(const std::string& name) {
  if (name == "lambda") return 0;
  if (name == "metric") return 1;
  if (name == "phi") return 2;
  if (name == "xi") return 3;
  return -1;
}

/// Scanner over one physical line; `end` excludes the comment tail, columns
/// stay 1-based against the untrimmed line.
struct Cursor {
  const std::string& s;
  std::size_t end;
  int line;
  std::size_t pos = 0;
  std::size_t tok_at = 0;  // start of the most recent token

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError(line, int(at) + 1, msg);
  }

  void ws() {
    while (pos < end && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool done() {
    ws();
    return pos >= end;
  }

  char peek() {
    ws();
    return pos < end ? s[pos] : '\0';
  }

  bool eat(char c) {
    ws();
    if (pos < end && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  std::string token(const char* missing_msg) {
    ws();
    tok_at = pos;
    while (pos < end &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    if (pos == tok_at) fail(missing_msg, tok_at);
    return s.substr(tok_at, pos - tok_at);
  }
};

bool all_digits(const std::string& t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

bool valid_identifier(const std::string& t) {
  if (t.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(t[0])) && t[0] != '_') return false;
  return std::all_of(t.begin() + 1, t.end(), [](unsigned char c) {
    return std::isalnum(c) != 0 || c == '_';
  });
}

int resolve_index(const std::string& tok, const std::vector<std::string>& coords,
                  const Cursor& c) {
  if (all_digits(tok)) {
    long v = std::strtol(tok.c_str(), nullptr, 10);
    if (v < 1 || v > long(coords.size()))
      c.fail("index out of range (1.." + std::to_string(coords.size()) + ")", c.tok_at);
    return int(v - 1);
  }
  for (std::size_t i = 0; i < coords.size(); ++i)
    if (coords[i] == tok) return int(i);
  c.fail("unknown index '" + tok + "'", c.tok_at);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ChartStructure parse_chart(const std::string& text) {
  int dim = 0;
  std::vector<std::string> coords;
  bool have_dim = false;
  bool have_coords = false;
  Sect cur = Sect::kNone;
  bool seen[4] = {false, false, false, false};
  std::vector<std::optional<Expr>> lam, met, phi, xi;
  std::vector<int> met_line;  // line of each metric entry, for symmetry errors

  int line_no = 0;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::size_t body = raw.find('#');
    if (body == std::string::npos) body = raw.size();
    Cursor c{raw, body, line_no};
    if (c.done()) continue;

    if (c.peek() == '[') {
      std::size_t open = c.pos;
      c.eat('[');
      std::string name = c.token("expected a section name");
      if (!c.eat(']')) c.fail("missing ']' in section header", open);
      if (!c.done()) c.fail("unexpected trailing input after section header", c.pos);
      if (!have_dim || !have_coords)
        c.fail("dim and coords must precede sections", open);
      int slot = section_slot(name);
      if (slot < 0) c.fail("unknown section '" + name + "'", open + 1);
      if (seen[slot]) c.fail("duplicate section '[" + name + "]'", open);
      seen[slot] = true;
      cur = Sect(slot + 1);
      continue;
    }

    std::string head = c.token("expected an identifier or index");

    if (cur == Sect::kNone) {
      if (head == "dim") {
        if (have_dim) c.fail("duplicate dim declaration", c.tok_at);
        if (!c.eat('=')) c.fail("expected '=' after dim", c.pos);
        std::string v = c.token("expected a dimension value");
        if (!all_digits(v)) c.fail("dim must be an odd integer >= 3", c.tok_at);
        dim = int(std::strtol(v.c_str(), nullptr, 10));
        if (dim < 3 || dim % 2 == 0)
          c.fail("dim must be an odd integer >= 3", c.tok_at);
        if (dim > mono::kMaxVars)
          c.fail("dim exceeds the supported maximum of " +
                     std::to_string(mono::kMaxVars),
                 c.tok_at);
        if (!c.done()) c.fail("unexpected trailing input", c.pos);
        have_dim = true;
      } else if (head == "coords") {
        if (have_coords) c.fail("duplicate coords declaration", c.tok_at);
        if (!have_dim) c.fail("dim must precede coords", c.tok_at);
        if (!c.eat('=')) c.fail("expected '=' after coords", c.pos);
        for (;;) {
          std::string name = c.token("expected a coordinate name");
          if (!valid_identifier(name))
            c.fail("invalid coordinate name '" + name + "'", c.tok_at);
          if (name == "sin" || name == "cos" || name == "exp" || name == "sqrt")
            c.fail("coordinate name '" + name + "' collides with a function",
                   c.tok_at);
          if (std::find(coords.begin(), coords.end(), name) != coords.end())
            c.fail("duplicate coordinate '" + name + "'", c.tok_at);
          coords.push_back(name);
          if (!c.eat(',')) break;
        }
        if (!c.done()) c.fail("unexpected trailing input", c.pos);
        if (int(coords.size()) != dim)
          c.fail("coords count must equal dim (expected " + std::to_string(dim) +
                     ", got " + std::to_string(coords.size()) + ")",
                 0);
        have_coords = true;
        int n = dim;
        lam.assign(std::size_t(n), std::nullopt);
        xi.assign(std::size_t(n), std::nullopt);
        met.assign(std::size_t(n) * n, std::nullopt);
        phi.assign(std::size_t(n) * n, std::nullopt);
        met_line.assign(std::size_t(n) * n, 0);
      } else {
        c.fail("expected dim, coords or a section header", c.tok_at);
      }
      continue;
    }

    // Entry inside a section.
    int n = dim;
    int i = resolve_index(head, coords, c);
    int j = -1;
    if (cur == Sect::kMetric || cur == Sect::kPhi) {
      if (c.peek() == '=')
        c.fail(std::string(cur == Sect::kMetric ? "metric" : "phi") +
                   " entries take two indices",
               c.pos);
      std::string second = c.token("expected a second index");
      j = resolve_index(second, coords, c);
    }
    if (!c.eat('=')) c.fail("expected '=' in entry", c.pos);
    c.ws();
    std::size_t rhs_at = c.pos;
    std::string rhs = raw.substr(rhs_at, body - rhs_at);
    if (rhs.find_first_not_of(" \t") == std::string::npos)
      c.fail("missing expression after '='", rhs_at);
    Expr e;
    try {
      e = parse_expr(rhs, coords, line_no);
    } catch (const ParseError& pe) {
      throw ParseError(line_no, pe.col() + int(rhs_at), pe.detail());
    }

    switch (cur) {
      case Sect::kLambda:
        if (lam[std::size_t(i)])
          c.fail("duplicate entry for '" + coords[std::size_t(i)] + "'", c.tok_at);
        lam[std::size_t(i)] = std::move(e);
        break;
      case Sect::kXi:
        if (xi[std::size_t(i)])
          c.fail("duplicate entry for '" + coords[std::size_t(i)] + "'", c.tok_at);
        xi[std::size_t(i)] = std::move(e);
        break;
      case Sect::kMetric: {
        std::size_t idx = std::size_t(i) * n + std::size_t(j);
        if (met[idx])
          c.fail("duplicate entry for (" + coords[std::size_t(i)] + ", " +
                     coords[std::size_t(j)] + ")",
                 c.tok_at);
        met[idx] = std::move(e);
        met_line[idx] = line_no;
        break;
      }
      case Sect::kPhi: {
        std::size_t idx = std::size_t(i) * n + std::size_t(j);
        if (phi[idx])
          c.fail("duplicate entry for (" + coords[std::size_t(i)] + ", " +
                     coords[std::size_t(j)] + ")",
                 c.tok_at);
        phi[idx] = std::move(e);
        break;
      }
      case Sect::kNone:
        break;
    }
  }

  if (!have_dim) throw ParseError(1, 1, "missing dim declaration");
  if (!have_coords) throw ParseError(1, 1, "missing coords declaration");
  const char* names[4] = {"lambda", "metric", "phi", "xi"};
  for (int s = 0; s < 4; ++s)
    if (!seen[s])
      throw ParseError(std::max(line_no, 1), 1,
                       std::string("missing [") + names[s] + "] section");

  // A single off-diagonal metric entry fills both symmetric slots.
  int n = dim;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      std::size_t ab = std::size_t(a) * n + std::size_t(b);
      std::size_t ba = std::size_t(b) * n + std::size_t(a);
      if (met[ab] && met[ba]) {
        if (!(*met[ab] == *met[ba]))
          throw ParseError(std::max(met_line[ab], met_line[ba]), 1,
                           "non-symmetric metric block: entries (" + coords[std::size_t(a)] +
                               ", " + coords[std::size_t(b)] + ") and (" +
                               coords[std::size_t(b)] + ", " + coords[std::size_t(a)] +
                               ") differ");
      } else if (met[ab]) {
        met[ba] = met[ab];
      } else if (met[ba]) {
        met[ab] = met[ba];
      }
    }
  }

  ChartStructure out;
  out.m = (dim - 1) / 2;
  out.coords = std::move(coords);
  auto fill = [](std::vector<std::optional<Expr>>& src) {
    std::vector<Expr> dst;
    dst.reserve(src.size());
    for (auto& e : src) dst.push_back(e ? std::move(*e) : Expr::num(0.0));
    return dst;
  };
  out.lambda = fill(lam);
  out.metric = fill(met);
  out.phi = fill(phi);
  out.xi = fill(xi);
  return out;
}

std::string emit_chart(const ChartStructure& c) {
  int n = c.dim();
  std::string out;
  out += "dim = " + std::to_string(n) + "\n";
  out += "coords = ";
  for (int i = 0; i < n; ++i) {
    if (i) out += ", ";
    out += c.coords[std::size_t(i)];
  }
  out += "\n\n[lambda]\n";
  for (int i = 0; i < n; ++i)
    if (!c.lambda[std::size_t(i)].is_zero())
      out += c.coords[std::size_t(i)] + " = " + emit_expr(c.lambda[std::size_t(i)]) + "\n";
  out += "\n[metric]\n";
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      if (!c.metric[std::size_t(i) * n + std::size_t(j)].is_zero())
        out += c.coords[std::size_t(i)] + " " + c.coords[std::size_t(j)] + " = " +
               emit_expr(c.metric[std::size_t(i) * n + std::size_t(j)]) + "\n";
  out += "\n[phi]\n";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!c.phi[std::size_t(i) * n + std::size_t(j)].is_zero())
        out += c.coords[std::size_t(i)] + " " + c.coords[std::size_t(j)] + " = " +
               emit_expr(c.phi[std::size_t(i) * n + std::size_t(j)]) + "\n";
  out += "\n[xi]\n";
  for (int i = 0; i < n; ++i)
    if (!c.xi[std::size_t(i)].is_zero())
      out += c.coords[std::size_t(i)] + " = " + emit_expr(c.xi[std::size_t(i)]) + "\n";
  return out;
}

namespace {

const char* kHeisenberg3 = R"(# Left-invariant contact metric structure on the 3-dimensional
# Heisenberg group in Darboux-type coordinates.
dim = 3
coords = x, y, z

[lambda]
x = -y
z = 1

[metric]
x x = 1 + y^2
y y = 1
z z = 1
x z = -y

[phi]
x y = 1
z y = y
y x = -1

[xi]
z = 1
)";

const char* kHeisenberg5 = R"(# Left-invariant contact metric structure on the 5-dimensional
# Heisenberg group, two Darboux blocks sharing the Reeb direction.
dim = 5
coords = x1, y1, x2, y2, z

[lambda]
x1 = -y1
x2 = -y2
z = 1

[metric]
x1 x1 = 1 + y1^2
y1 y1 = 1
x2 x2 = 1 + y2^2
y2 y2 = 1
z z = 1
x1 x2 = y1*y2
x1 z = -y1
x2 z = -y2

[phi]
x1 y1 = 1
z y1 = y1
y1 x1 = -1
x2 y2 = 1
z y2 = y2
y2 x2 = -1

[xi]
z = 1
)";

/// Strict contact deformation of kHeisenberg3 scaled by f = exp(EPS*z);
/// EPS = 0 reproduces the undeformed coefficients. The Reeb field stays
/// d/dz but is no longer Killing, so the structure is not K-contact.
const char* kDeformed3Template = R"(# Reeb-breaking deformation of the Heisenberg structure, conformal
# factor exp(EPS*z) on the contact sub-bundle.
dim = 3
coords = x, y, z

[lambda]
x = -y
z = 1

[metric]
x x = exp(P2*z) + y^2
y y = exp(M2*z)
z z = 1
x z = -y

[phi]
x y = exp(M2*z)
z y = y*exp(M2*z)
y x = -exp(P2*z)

[xi]
z = 1
)";

const char* kSphere3 = R"(# Standard Sasakian structure of the unit 3-sphere pulled back through
# stereographic projection from the south pole, rescaled so that the
# symplectic structure equals the full exterior derivative of lambda.
dim = 3
coords = u1, u2, u3

[lambda]
u1 = -4*(u2 + u1*u3)/(1 + u1^2 + u2^2 + u3^2)^2
u2 = 4*(u1 - u2*u3)/(1 + u1^2 + u2^2 + u3^2)^2
u3 = 2*(u1^2 + u2^2 - u3^2 - 1)/(1 + u1^2 + u2^2 + u3^2)^2

[metric]
u1 u1 = 8/(1 + u1^2 + u2^2 + u3^2)^2 - (-4*(u2 + u1*u3)/(1 + u1^2 + u2^2 + u3^2)^2)^2
u2 u2 = 8/(1 + u1^2 + u2^2 + u3^2)^2 - (4*(u1 - u2*u3)/(1 + u1^2 + u2^2 + u3^2)^2)^2
u3 u3 = 8/(1 + u1^2 + u2^2 + u3^2)^2 - (2*(u1^2 + u2^2 - u3^2 - 1)/(1 + u1^2 + u2^2 + u3^2)^2)^2
u1 u2 = -(-4*(u2 + u1*u3))*(4*(u1 - u2*u3))/(1 + u1^2 + u2^2 + u3^2)^4
u1 u3 = -(-4*(u2 + u1*u3))*(2*(u1^2 + u2^2 - u3^2 - 1))/(1 + u1^2 + u2^2 + u3^2)^4
u2 u3 = -(4*(u1 - u2*u3))*(2*(u1^2 + u2^2 - u3^2 - 1))/(1 + u1^2 + u2^2 + u3^2)^4

[phi]
u1 u2 = -(u1^2 + u2^2 - u3^2 - 1)/(1 + u1^2 + u2^2 + u3^2)
u2 u1 = (u1^2 + u2^2 - u3^2 - 1)/(1 + u1^2 + u2^2 + u3^2)
u1 u3 = 2*(u1 - u2*u3)/(1 + u1^2 + u2^2 + u3^2)
u3 u1 = -2*(u1 - u2*u3)/(1 + u1^2 + u2^2 + u3^2)
u2 u3 = 2*(u2 + u1*u3)/(1 + u1^2 + u2^2 + u3^2)
u3 u2 = -2*(u2 + u1*u3)/(1 + u1^2 + u2^2 + u3^2)

[xi]
u1 = -(u2 + u1*u3)
u2 = u1 - u2*u3
u3 = (u1^2 + u2^2 - u3^2 - 1)/2
)";

std::string replace_all(std::string text, const std::string& what,
                        const std::string& with) {
  std::size_t at = 0;
  while ((at = text.find(what, at)) != std::string::npos) {
    text.replace(at, what.size(), with);
    at += with.size();
  }
  return text;
}

/// Largest deviation of omega_ij = d_i lambda_j - d_j lambda_i from
/// (g phi)_ij at the sample point; detects a wrong global sign of phi.
double phi_cross_residual(const ChartStructure& ch, const std::vector<double>& pt) {
  int n = ch.dim();
  std::vector<Jet> lam, g, ph;
  for (int i = 0; i < n; ++i) lam.push_back(eval_jet(ch.lambda[std::size_t(i)], pt, 1));
  for (int i = 0; i < n * n; ++i) {
    g.push_back(eval_jet(ch.metric[std::size_t(i)], pt, 0));
    ph.push_back(eval_jet(ch.phi[std::size_t(i)], pt, 0));
  }
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Cplx omega = lam[std::size_t(j)].coeff(mono::var(i)) -
                   lam[std::size_t(i)].coeff(mono::var(j));
      Cplx gp = 0.0;
      for (int k = 0; k < n; ++k)
        gp += g[std::size_t(i) * n + std::size_t(k)].value() *
              ph[std::size_t(k) * n + std::size_t(j)].value();
      worst = std::max(worst, std::abs(omega - gp));
    }
  }
  return worst;
}

ChartStructure checked(ChartStructure ch, const std::string& name,
                       std::vector<double> pt) {
  if (phi_cross_residual(ch, pt) < 1e-8) return ch;
  ChartStructure flipped = ch;
  for (auto& e : flipped.phi) {
    if (e.is_zero()) continue;
    Expr m;
    m.kind = Expr::Kind::kNeg;
    m.args = {std::move(e)};
    e = std::move(m);
  }
  if (phi_cross_residual(flipped, pt) < 1e-8) return flipped;
  throw Error("builtin '" + name + "' fails the contact metric cross-check");
}

}  // namespace

ChartStructure builtin_chart(const std::string& name,
                             const std::map<std::string, double>& params) {
  auto reject_params = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : params) {
      (void)value;
      if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
            return key == a;
          }) == allowed.end())
        throw Error("unknown parameter '" + key + "' for builtin '" + name + "'");
    }
  };

  if (name == "heisenberg3") {
    reject_params({});
    return checked(parse_chart(kHeisenberg3), name, {0.2, -0.3, 0.15});
  }
  if (name == "heisenberg5") {
    reject_params({});
    return checked(parse_chart(kHeisenberg5), name, {0.2, -0.3, 0.1, 0.25, -0.15});
  }
  if (name == "deformed3") {
    reject_params({"epsilon"});
    double eps = 0.3;
    if (auto it = params.find("epsilon"); it != params.end()) eps = it->second;
    if (!(std::abs(eps) <= 2.0))
      throw Error("parameter 'epsilon' out of range [-2, 2] for builtin 'deformed3'");
    std::string text = replace_all(kDeformed3Template, "P2", format_number(2.0 * eps));
    text = replace_all(text, "M2", format_number(-2.0 * eps));
    return checked(parse_chart(text), name, {0.2, -0.3, 0.15});
  }
  if (name == "sphere3") {
    reject_params({});
    return checked(parse_chart(kSphere3), name, {0.2, -0.1, 0.3});
  }
  throw Error("unknown builtin chart '" + name +
              "' (available: deformed3, heisenberg3, heisenberg5, sphere3)");
}

std::vector<std::string> builtin_names() {
  return {"deformed3", "heisenberg3", "heisenberg5", "sphere3"};
}

}  // namespace cmq
