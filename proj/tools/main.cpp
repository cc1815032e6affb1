// Report-generating command line surface. Every subcommand loads a chart,
// evaluates the requested checks at one point or a seeded sweep, and emits a
// deterministic JSON report: identical invocations produce identical bytes.
//
// Exit codes: 0 all checks passed, 1 a mathematical check exceeded the
// tolerance, 2 input or parse error, 3 derivative budget exhausted.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmq/chart.hpp"
#include "cmq/common.hpp"
#include "cmq/diagnostics.hpp"
#include "cmq/expr.hpp"
#include "cmq/fedosov.hpp"
#include "cmq/geometry.hpp"
#include "cmq/wick.hpp"
#include "json_out.hpp"

using namespace cmq;
using cmqtool::JsonWriter;

namespace {

struct CommonOpts {
  std::string builtin;
  std::string chart_file;
  std::string point_csv;
  int points = 0;  // 0 = per-command default
  std::uint64_t seed = 1;
  std::string box_csv = "-0.3,0.3";
  int nu_cutoff = 4;
  int order = 0;  // 0 = derived from the command
  double tol = -1.0;
  std::string out_file;
};

void add_common(CLI::App* sub, CommonOpts& o, bool with_cutoff) {
  auto* b = sub->add_option("--builtin", o.builtin, "builtin chart name");
  auto* c = sub->add_option("--chart", o.chart_file, "chart description file");
  b->excludes(c);
  c->excludes(b);
  auto* pt = sub->add_option("--point", o.point_csv, "single base point \"x,y,...\"");
  auto* np = sub->add_option("--points", o.points, "seeded sweep point count");
  auto* sd = sub->add_option("--seed", o.seed, "sweep PRNG seed (recorded)");
  auto* bx = sub->add_option("--box", o.box_csv, "sweep box \"LO,HI\" per coordinate");
  pt->excludes(np);
  pt->excludes(sd);
  pt->excludes(bx);
  if (with_cutoff)
    sub->add_option("--nu-cutoff", o.nu_cutoff, "formal parameter cutoff")
        ->check(CLI::Range(2, 6));
  sub->add_option("--order", o.order, "jet order (default per command)");
  sub->add_option("--tol", o.tol, "tolerance (default: CMQ_TOL env or 1e-8)");
  sub->add_option("--out", o.out_file, "write the report to this file");
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct LoadedChart {
  ChartStructure chart;
  std::string source;
  std::string name;
  std::string hash;
};

LoadedChart load_chart(const CommonOpts& o) {
  LoadedChart lc;
  if (o.builtin.empty() == o.chart_file.empty())
    throw ParseError(0, 0, "exactly one of --builtin or --chart is required");
  if (!o.builtin.empty()) {
    lc.chart = builtin_chart(o.builtin);
    lc.source = "builtin";
    lc.name = o.builtin;
  } else {
    std::ifstream in(o.chart_file);
    if (!in) throw ParseError(0, 0, "cannot open chart file: " + o.chart_file);
    std::stringstream ss;
    ss << in.rdbuf();
    lc.chart = parse_chart(ss.str());
    lc.source = "file";
    lc.name = o.chart_file;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(emit_chart(lc.chart))));
  lc.hash = buf;
  return lc;
}

std::vector<double> parse_csv(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find(',', pos);
    std::string tok = text.substr(pos, next == std::string::npos ? next : next - pos);
    const char* s = tok.c_str();
    char* end = nullptr;
    double v = std::strtod(s, &end);
    while (end && *end == ' ') ++end;
    if (end == s || (end && *end != '\0'))
      throw ParseError(0, 0, std::string("bad number in ") + what + ": '" + tok + "'");
    out.push_back(v);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

double resolve_tol(double cli) {
  if (cli >= 0.0) return cli;
  if (const char* env = std::getenv("CMQ_TOL")) {
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (end != env && v > 0.0) return v;
  }
  return 1e-8;
}

// Sweep points come from raw mt19937_64 bits so the stream is pinned by the
// standard, not by the library's distribution implementation.
std::vector<std::vector<double>> make_points(const CommonOpts& o, int dim,
                                             int default_count, bool* swept,
                                             std::vector<double>* box_out) {
  if (!o.point_csv.empty()) {
    auto p = parse_csv(o.point_csv, "--point");
    if (int(p.size()) != dim)
      throw ShapeError("--point has " + std::to_string(p.size()) +
                       " coordinates, chart needs " + std::to_string(dim));
    *swept = false;
    return {p};
  }
  auto box = parse_csv(o.box_csv, "--box");
  if (box.size() != 2 || !(box[0] < box[1]))
    throw ParseError(0, 0, "--box needs \"LO,HI\" with LO < HI");
  *box_out = box;
  *swept = true;
  int count = o.points > 0 ? o.points : default_count;
  std::mt19937_64 eng(o.seed);
  std::vector<std::vector<double>> pts;
  pts.reserve(std::size_t(count));
  for (int i = 0; i < count; ++i) {
    std::vector<double> p(std::size_t(dim), 0.0);
    for (double& x : p) {
      double u = double(eng() >> 11) * 0x1.0p-53;
      x = box[0] + u * (box[1] - box[0]);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

// Point sweeps fan out over a worker pool; each record lands in its own slot
// so the later single-threaded serialization is order-stable.
template <typename Fn>
void parallel_for(int count, Fn&& fn) {
  int workers = std::min(count, int(std::max(1u, std::thread::hardware_concurrency())));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errs{std::size_t(workers)};
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i; (i = next.fetch_add(1)) < count;) fn(i);
      } catch (...) {
        errs[std::size_t(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

struct ReportCtx {
  LoadedChart lc;
  int order = 0;
  double tol = 0.0;
  bool swept = false;
  std::vector<double> box;
  std::vector<std::vector<double>> points;
};

ReportCtx make_ctx(const CommonOpts& o, int default_order, int default_points) {
  ReportCtx ctx;
  ctx.lc = load_chart(o);
  ctx.order = o.order > 0 ? o.order : default_order;
  ctx.tol = resolve_tol(o.tol);
  ctx.points = make_points(o, ctx.lc.chart.dim(), default_points, &ctx.swept, &ctx.box);
  return ctx;
}

void write_prologue(JsonWriter& w, const char* cmd, const ReportCtx& ctx,
                    const CommonOpts& o, int nu_cutoff) {
  w.begin_object();
  w.key("schema_version");
  w.value(1);
  w.key("tool_version");
  w.value(kVersion);
  w.key("command");
  w.value(cmd);
  w.key("chart");
  w.begin_object();
  w.key("source");
  w.value(ctx.lc.source);
  w.key("name");
  w.value(ctx.lc.name);
  w.key("hash");
  w.value(ctx.lc.hash);
  w.key("dim");
  w.value(ctx.lc.chart.dim());
  w.end_object();
  w.key("order");
  w.value(ctx.order);
  if (nu_cutoff >= 0) {
    w.key("nu_cutoff");
    w.value(nu_cutoff);
  }
  w.key("tolerance");
  w.value(ctx.tol);
  if (ctx.swept) {
    w.key("seed");
    w.value(static_cast<unsigned long long>(o.seed));
    w.key("box");
    w.value(std::span<const double>(ctx.box));
  }
  w.key("points");
  w.begin_array();
  for (const auto& p : ctx.points) w.value(std::span<const double>(p));
  w.end_array();
}

void write_flags(JsonWriter& w, const Classification& cls) {
  w.begin_object();
  w.key("is_contact");
  w.value(cls.is_contact);
  w.key("is_kcontact");
  w.value(cls.is_kcontact);
  w.key("is_cr");
  w.value(cls.is_cr);
  w.key("is_sasakian");
  w.value(cls.is_sasakian);
  w.key("levi_positive");
  w.value(cls.levi_positive);
  w.end_object();
}

int emit(JsonWriter& w, const std::string& out_file) {
  std::string text = w.take();
  text += '\n';
  if (out_file.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return 0;
  }
  std::ofstream f(out_file, std::ios::binary);
  if (!f) {
    std::fprintf(stderr, "cannot write %s\n", out_file.c_str());
    return 2;
  }
  f.write(text.data(), std::streamsize(text.size()));
  return 0;
}

Expr parse_observable(const std::string& text, const ChartStructure& chart,
                      const char* flag) {
  if (text.empty()) throw ParseError(0, 0, std::string(flag) + " is required");
  return parse_expr(text, chart.coords);
}

std::vector<Cplx> series_values(const std::vector<Jet>& s) {
  std::vector<Cplx> v;
  v.reserve(s.size());
  for (const Jet& j : s) v.push_back(j.value());
  return v;
}

void write_series(JsonWriter& w, const char* name, const std::vector<Cplx>& s) {
  w.key(name);
  w.begin_array();
  for (Cplx z : s) w.value(z);
  w.end_array();
}

// ---- verify / classify ----

int run_verify(const CommonOpts& o, bool classify_only) {
  ReportCtx ctx = make_ctx(o, 5, 10);
  struct Rec {
    double comp = 0.0, conn = 0.0, sym = 0.0, bia = 0.0;
    Classification cls;
  };
  std::vector<Rec> recs(ctx.points.size());
  Tolerances ct;
  ct.geometry = ctx.tol;
  parallel_for(int(ctx.points.size()), [&](int i) {
    GeometryFrame f = build_frame(ctx.lc.chart, ctx.points[std::size_t(i)], ctx.order);
    Rec& r = recs[std::size_t(i)];
    if (!classify_only) {
      r.comp = check_compatibility(f).max_residual();
      r.conn = check_connection(f).max_residual();
      r.sym = check_symmetries(f).max_residual();
      r.bia = bianchi_residuals(f).max_residual();
    }
    r.cls = classify(f, ct);
  });

  JsonWriter w;
  write_prologue(w, classify_only ? "classify" : "verify", ctx, o, -1);
  w.key("results");
  w.begin_array();
  double worst = 0.0;
  bool all_contact = true;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const Rec& r = recs[i];
    w.begin_object();
    w.key("point");
    w.value(std::span<const double>(ctx.points[i]));
    if (!classify_only) {
      w.key("compatibility");
      w.value(r.comp);
      w.key("connection");
      w.value(r.conn);
      w.key("symmetries");
      w.value(r.sym);
      w.key("bianchi");
      w.value(r.bia);
      worst = std::max({worst, r.comp, r.conn, r.sym, r.bia});
    }
    w.key("classification");
    write_flags(w, r.cls);
    if (classify_only) {
      w.key("residuals");
      w.begin_array();
      for (const auto& [name, val] : r.cls.residuals.items) {
        w.begin_object();
        w.key("name");
        w.value(name);
        w.key("residual");
        w.value(val);
        w.end_object();
      }
      w.end_array();
    }
    all_contact = all_contact && r.cls.is_contact;
    w.end_object();
  }
  w.end_array();
  bool pass = classify_only ? all_contact : worst <= ctx.tol;
  if (!classify_only) {
    w.key("max_residual");
    w.value(worst);
  }
  w.key("pass");
  w.value(pass);
  w.end_object();
  int rc = emit(w, o.out_file);
  return rc != 0 ? rc : (pass ? 0 : 1);
}

// ---- fedosov ----

int run_fedosov(const CommonOpts& o) {
  ReportCtx ctx = make_ctx(o, o.nu_cutoff + 3, 3);
  const int cutoff = o.nu_cutoff;
  struct Term {
    int nu_power;
    std::vector<int> y;
    std::vector<int> form;
    Cplx value;
  };
  struct Rec {
    std::vector<double> iters;
    std::vector<Term> terms;
    std::vector<double> flat;
  };
  std::vector<Rec> recs(ctx.points.size());
  parallel_for(int(ctx.points.size()), [&](int i) {
    GeometryFrame f = build_frame(ctx.lc.chart, ctx.points[std::size_t(i)], ctx.order);
    FedosovState st = solve_r(f, cutoff);
    Rec& r = recs[std::size_t(i)];
    r.iters = st.iteration_deltas;
    for (const auto& [k, jet] : st.r.terms()) {
      if (k.nu_degree() > cutoff + 1) continue;
      Term t;
      t.nu_power = int(k.nu);
      for (int v = 0; v < f.n; ++v) t.y.push_back(mono::exponent(k.y, v));
      for (int v = 0; v < f.n; ++v)
        if (k.form & (1u << v)) t.form.push_back(v);
      t.value = jet.value();
      r.terms.push_back(std::move(t));
    }
    r.flat.assign(std::size_t(cutoff) + 1, 0.0);
    for (const auto& [k, jet] : flatness_residual(st).terms()) {
      int d = k.nu_degree();
      if (d <= cutoff)
        r.flat[std::size_t(d)] = std::max(r.flat[std::size_t(d)], jet.max_abs());
    }
  });

  JsonWriter w;
  write_prologue(w, "fedosov", ctx, o, cutoff);
  w.key("results");
  w.begin_array();
  double worst = 0.0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const Rec& r = recs[i];
    w.begin_object();
    w.key("point");
    w.value(std::span<const double>(ctx.points[i]));
    w.key("iterations");
    w.value(std::span<const double>(r.iters));
    w.key("r");
    w.begin_array();
    for (const Term& t : r.terms) {
      w.begin_object();
      w.key("nu_power");
      w.value(t.nu_power);
      w.key("y");
      w.value(std::span<const int>(t.y));
      w.key("form");
      w.value(std::span<const int>(t.form));
      w.key("value");
      w.value(t.value);
      w.end_object();
    }
    w.end_array();
    w.key("flatness");
    w.begin_array();
    for (std::size_t d = 0; d < r.flat.size(); ++d) {
      w.begin_object();
      w.key("degree");
      w.value(int(d));
      w.key("residual");
      w.value(r.flat[d]);
      w.end_object();
      worst = std::max(worst, r.flat[d]);
    }
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.key("max_flatness");
  w.value(worst);
  bool pass = worst <= ctx.tol;
  w.key("pass");
  w.value(pass);
  w.end_object();
  int rc = emit(w, o.out_file);
  return rc != 0 ? rc : (pass ? 0 : 1);
}

// ---- star / delta ----

int run_star(const CommonOpts& o, const std::string& a_text, const std::string& b_text,
             bool delta_only) {
  ReportCtx ctx = make_ctx(o, o.nu_cutoff + 3, 3);
  Expr ea = parse_observable(a_text, ctx.lc.chart, "--a");
  Expr eb;
  if (!delta_only) eb = parse_observable(b_text, ctx.lc.chart, "--b");
  struct Rec {
    std::vector<Cplx> ab, ba, comm, da, db;
  };
  std::vector<Rec> recs(ctx.points.size());
  parallel_for(int(ctx.points.size()), [&](int i) {
    GeometryFrame f = build_frame(ctx.lc.chart, ctx.points[std::size_t(i)], ctx.order);
    FedosovState st = solve_r(f, o.nu_cutoff);
    Jet a0 = eval_jet(ea, f.base, f.order);
    Rec& r = recs[std::size_t(i)];
    r.da = series_values(delta_series(st, a0));
    if (delta_only) return;
    Jet b0 = eval_jet(eb, f.base, f.order);
    r.ab = series_values(star_series(st, a0, b0));
    r.ba = series_values(star_series(st, b0, a0));
    r.comm.resize(r.ab.size());
    for (std::size_t k = 0; k < r.ab.size(); ++k) r.comm[k] = r.ab[k] - r.ba[k];
    r.db = series_values(delta_series(st, b0));
  });

  JsonWriter w;
  write_prologue(w, delta_only ? "delta" : "star", ctx, o, o.nu_cutoff);
  w.key("a");
  w.value(a_text);
  if (!delta_only) {
    w.key("b");
    w.value(b_text);
  }
  w.key("results");
  w.begin_array();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const Rec& r = recs[i];
    w.begin_object();
    w.key("point");
    w.value(std::span<const double>(ctx.points[i]));
    if (!delta_only) {
      write_series(w, "a_star_b", r.ab);
      write_series(w, "b_star_a", r.ba);
      write_series(w, "commutator", r.comm);
    }
    write_series(w, "delta_a", r.da);
    if (!delta_only) write_series(w, "delta_b", r.db);
    w.end_object();
  }
  w.end_array();
  w.key("pass");
  w.value(true);
  w.end_object();
  int rc = emit(w, o.out_file);
  return rc;
}

// ---- obstruction ----

ReebOrbit read_orbit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, 0, "cannot open orbit file: " + path);
  ReebOrbit ob;
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    ob.period = j.at("period").get<double>();
    for (const auto& t : j.at("times")) ob.times.push_back(t.get<double>());
    for (const auto& p : j.at("points"))
      ob.points.push_back(p.get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, 0, std::string("orbit file: ") + e.what());
  }
  return ob;
}

int run_obstruction(const CommonOpts& o, const std::string& a_text,
                    const std::string& hopf_csv, const std::string& orbit_file,
                    int orbit_samples) {
  ReportCtx ctx = make_ctx(o, o.nu_cutoff + 3, 3);
  Expr ea = parse_observable(a_text, ctx.lc.chart, "--a");
  struct Rec {
    Cplx raw, conn, lap, engine;
    double spread = 0.0;
    std::vector<Cplx> zeta;
    Cplx chi;
  };
  std::vector<Rec> recs(ctx.points.size());
  parallel_for(int(ctx.points.size()), [&](int i) {
    GeometryFrame f = build_frame(ctx.lc.chart, ctx.points[std::size_t(i)], ctx.order);
    Jet a0 = eval_jet(ea, f.base, f.order);
    Rec& r = recs[std::size_t(i)];
    r.raw = delta1(f, a0, Delta1Form::kRaw).value();
    r.conn = delta1(f, a0, Delta1Form::kConnection).value();
    r.lap = delta1(f, a0, Delta1Form::kLaplacian).value();
    FedosovState st = solve_r(f, o.nu_cutoff);
    r.engine = delta_series(st, a0)[1].value();
    Cplx vals[4] = {r.raw, r.conn, r.lap, r.engine};
    for (int x = 0; x < 4; ++x)
      for (int y = x + 1; y < 4; ++y)
        r.spread = std::max(r.spread, std::abs(vals[x] - vals[y]));
    ZetaChi zc = zeta_chi(f);
    for (const Jet& z : zc.zeta) r.zeta.push_back(z.value());
    r.chi = zc.chi.value();
  });

  JsonWriter w;
  write_prologue(w, "obstruction", ctx, o, o.nu_cutoff);
  w.key("a");
  w.value(a_text);
  w.key("results");
  w.begin_array();
  double worst = 0.0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const Rec& r = recs[i];
    w.begin_object();
    w.key("point");
    w.value(std::span<const double>(ctx.points[i]));
    w.key("delta1");
    w.begin_object();
    w.key("raw");
    w.value(r.raw);
    w.key("connection");
    w.value(r.conn);
    w.key("laplacian");
    w.value(r.lap);
    w.key("engine");
    w.value(r.engine);
    w.key("spread");
    w.value(r.spread);
    w.end_object();
    w.key("zeta");
    w.begin_array();
    for (Cplx z : r.zeta) w.value(z);
    w.end_array();
    w.key("chi");
    w.value(r.chi);
    w.end_object();
    worst = std::max(worst, r.spread);
  }
  w.end_array();

  if (!hopf_csv.empty() || !orbit_file.empty()) {
    ReebOrbit orbit;
    if (!hopf_csv.empty()) {
      auto start = parse_csv(hopf_csv, "--hopf");
      orbit = hopf_fiber_orbit(start, orbit_samples);
    } else {
      orbit = read_orbit_file(orbit_file);
    }
    const ChartStructure& chart = ctx.lc.chart;
    FrameFactory factory = [&chart](std::span<const double> p) {
      return build_frame(chart, p, 4);
    };
    ObservableFn fn = [&ea](const GeometryFrame& fr) {
      return eval_jet(ea, fr.base, fr.order);
    };
    PsiResult psi = psi_gamma(factory, orbit, fn);
    w.key("psi");
    w.begin_object();
    w.key("samples");
    w.value(int(orbit.times.size()));
    w.key("period");
    w.value(orbit.period);
    w.key("value");
    w.value(psi.value);
    w.key("quad_error");
    w.value(psi.quad_error);
    w.key("orbit_residual");
    w.value(psi.orbit_residual);
    w.end_object();
  }

  w.key("max_spread");
  w.value(worst);
  bool pass = worst <= ctx.tol;
  w.key("pass");
  w.value(pass);
  w.end_object();
  int rc = emit(w, o.out_file);
  return rc != 0 ? rc : (pass ? 0 : 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chart-level quantization reports for contact metric structures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.footer("Tolerance default comes from the CMQ_TOL environment variable when set.");

  CommonOpts vo, co, fo, so, dl, ob;
  std::string star_a, star_b, delta_a, obs_a, hopf_csv, orbit_file;
  int orbit_samples = 256;

  CLI::App* verify = app.add_subcommand("verify", "structure identity residuals");
  add_common(verify, vo, false);
  CLI::App* classify_cmd = app.add_subcommand("classify", "classification flags");
  add_common(classify_cmd, co, false);
  CLI::App* fedosov = app.add_subcommand("fedosov", "abelian connection and flatness");
  add_common(fedosov, fo, true);
  CLI::App* star = app.add_subcommand("star", "star products of two observables");
  add_common(star, so, true);
  star->add_option("--a", star_a, "first observable expression")->required();
  star->add_option("--b", star_b, "second observable expression")->required();
  CLI::App* delta_cmd = app.add_subcommand("delta", "obstruction series of an observable");
  add_common(delta_cmd, dl, true);
  delta_cmd->add_option("--a", delta_a, "observable expression")->required();
  CLI::App* obstruction = app.add_subcommand("obstruction", "first obstruction, four routes");
  add_common(obstruction, ob, true);
  obstruction->add_option("--a", obs_a, "observable expression (Reeb-invariant)")->required();
  obstruction->add_option("--hopf", hopf_csv, "fiber orbit start point \"u1,u2,u3\"");
  obstruction->add_option("--orbit-file", orbit_file,
                          "JSON orbit: {period, times, points}");
  obstruction->add_option("--orbit-samples", orbit_samples, "fiber orbit sample count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) return run_verify(vo, false);
    if (classify_cmd->parsed()) return run_verify(co, true);
    if (fedosov->parsed()) return run_fedosov(fo);
    if (star->parsed()) return run_star(so, star_a, star_b, false);
    if (delta_cmd->parsed()) return run_star(dl, delta_a, "", true);
    if (obstruction->parsed())
      return run_obstruction(ob, obs_a, hopf_csv, orbit_file, orbit_samples);
  } catch (const BudgetError& e) {
    std::fprintf(stderr, "budget exhausted: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
