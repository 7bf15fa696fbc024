#include "cli_run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "cli_output.hpp"
#include "juliadim.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace jdcli {

namespace {

struct CliError : std::runtime_error {
  int status;
  CliError(int status_, const std::string& msg)
      : std::runtime_error(msg), status(status_) {}
};

void check(int rc) {
  if (rc != JD_OK) throw CliError(rc, jd_last_error());
}

bool is_sentinel_status(int rc) {
  return rc == JD_ERR_ALL_PRUNED || rc == JD_ERR_EMPTY_MATRIX;
}

// Owning handle over one C API object type; movable so the factory
// helpers below can return them.
#define JD_HANDLE(NAME, TYPE, FREE)                        \
  struct NAME {                                            \
    TYPE* p = nullptr;                                     \
    NAME() = default;                                      \
    NAME(const NAME&) = delete;                            \
    NAME& operator=(const NAME&) = delete;                 \
    NAME(NAME&& o) noexcept : p(o.p) { o.p = nullptr; }    \
    NAME& operator=(NAME&& o) noexcept {                   \
      if (this != &o) {                                    \
        FREE(p);                                           \
        p = o.p;                                           \
        o.p = nullptr;                                     \
      }                                                    \
      return *this;                                        \
    }                                                      \
    ~NAME() { FREE(p); }                                   \
    TYPE** out() { return &p; }                            \
    operator TYPE*() const { return p; }                   \
  }

JD_HANDLE(MapH, jd_map, jd_map_free);
JD_HANDLE(CurveH, jd_curve, jd_curve_free);
JD_HANDLE(PuzzleH, jd_puzzle, jd_puzzle_free);
JD_HANDLE(MatrixH, jd_matrix, jd_matrix_free);
#undef JD_HANDLE

struct WarningSet {
  std::vector<std::string> ordered;
  std::set<std::string> seen;
  void add(const std::string& w) {
    if (seen.insert(w).second) ordered.push_back(w);
  }
};

MapH make_map(const RunConfig& cfg) {
  MapH m;
  if (cfg.map.kind == "unicritical") {
    check(jd_map_unicritical(cfg.map.degree, cfg.map.c_re, cfg.map.c_im,
                             m.out()));
  } else if (cfg.map.kind == "polynomial") {
    check(jd_map_polynomial(cfg.map.coeffs.data(),
                            static_cast<int>(cfg.map.coeffs.size() / 2),
                            m.out()));
  } else {
    check(jd_map_rational(cfg.map.num.data(),
                          static_cast<int>(cfg.map.num.size() / 2),
                          cfg.map.den.data(),
                          static_cast<int>(cfg.map.den.size() / 2), m.out()));
  }
  return m;
}

std::string describe_map(jd_map* m) {
  int needed = 0;
  check(jd_map_describe(m, nullptr, 0, &needed));
  std::string s(static_cast<std::size_t>(needed), '\0');
  check(jd_map_describe(m, s.data(), needed, nullptr));
  s.resize(static_cast<std::size_t>(needed - 1));
  return s;
}

void base_point(const RunConfig& cfg, jd_map* m, double* re, double* im) {
  if (cfg.has_base) {
    *re = cfg.base_re;
    *im = cfg.base_im;
    return;
  }
  check(jd_map_base_point(m, cfg.eta, cfg.base_angle.c_str(), re, im));
}

int metric_of(const RunConfig& cfg) {
  return cfg.map.kind == "rational" ? JD_METRIC_SPHERICAL
                                    : JD_METRIC_EUCLIDEAN;
}

jd_tree_params tree_params(const RunConfig& cfg) {
  jd_tree_params p;
  jd_tree_params_init(&p);
  p.depth = cfg.depth;
  p.delta = cfg.delta > 0 ? cfg.delta : 0.0;
  p.big_delta = cfg.big_delta > 0 ? cfg.big_delta : 0.0;
  p.samples = cfg.samples;
  p.seed = cfg.seed;
  p.node_budget = cfg.node_budget;
  p.threads = cfg.threads;
  p.metric = metric_of(cfg);
  return p;
}

jd_pullback_params pullback_params(const RunConfig& cfg) {
  jd_pullback_params p;
  jd_pullback_params_init(&p);
  p.depth = cfg.depth;
  p.radius = cfg.radius;
  p.kappa = cfg.kappa;
  p.node_budget = cfg.node_budget;
  p.threads = cfg.threads;
  p.metric = metric_of(cfg);
  return p;
}

bool lower_bound_claim(const std::string& id) {
  return id.find("fuzzy") != std::string::npos ||
         id.find("restricted") != std::string::npos ||
         id.find("double") != std::string::npos ||
         id.find("msample") != std::string::npos || id == "pullback";
}

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunOutput {
  std::vector<CsvRow> rows;
  json summary;
  std::vector<PlotSeries> curves;       // pressure curves, x = t
  std::vector<PlotSeries> convergence;  // zero vs family parameter
  WarningSet warnings;
  int exit_code = 0;
};

json base_summary(const RunConfig& cfg, const std::string& subcommand) {
  json s;
  s["version"] = jd_version();
  s["generated"] = timestamp_utc();
  s["subcommand"] = subcommand;
  s["estimator"] = cfg.estimator;
  s["config_hash"] = cfg.hash();
  s["map"] = cfg.map.text();
  s["zeros"] = json::array();
  s["warnings"] = json::array();
  s["errors"] = json::array();
  s["status"] = "ok";
  return s;
}

void curve_to_rows(jd_curve* c, const std::string& estimator,
                   const std::string& param_name, double param_value,
                   RunOutput& out, PlotSeries* series) {
  int n = 0;
  check(jd_curve_size(c, &n));
  double branch = 0;
  check(jd_curve_branch_count(c, &branch));
  int sentinel = 0;
  check(jd_curve_is_sentinel(c, &sentinel));
  for (int k = 0; k < n; ++k) {
    double t = 0, v = 0;
    check(jd_curve_sample(c, k, &t, &v));
    out.rows.push_back({estimator, param_name, param_value, t, v, branch,
                        sentinel ? "sentinel" : ""});
    if (series) series->points.push_back({t, v});
  }
  int wc = 0;
  check(jd_curve_warning_count(c, &wc));
  for (int k = 0; k < wc; ++k) {
    const char* w = nullptr;
    check(jd_curve_warning(c, k, &w));
    out.warnings.add(w);
  }
}

// Writes the artifacts and prints either the full payload (no --out) or a
// short report. Returns the final exit code.
int emit(const RunConfig& cfg, RunOutput& out) {
  for (const auto& w : out.warnings.ordered) out.summary["warnings"].push_back(w);
  if (out.summary["status"] == "ok" && out.exit_code == 2)
    out.summary["status"] = "sentinel";
  if (out.summary["status"] == "ok" && out.exit_code != 0)
    out.summary["status"] = "error";
  out.summary["exit_code"] = out.exit_code;

  std::string csv = csv_text(out.rows);
  std::string js = out.summary.dump(2);
  js.push_back('\n');
  if (cfg.out.empty()) {
    if (cfg.format == "json")
      std::cout << js;
    else
      std::cout << csv;
  } else {
    write_file(cfg.out + ".csv", csv);
    write_file(cfg.out + ".json", js);
    if (cfg.plot) {
      if (!out.curves.empty())
        write_file(cfg.out + ".svg", svg_plot(out.curves, "t", "pressure"));
      if (!out.convergence.empty())
        write_file(cfg.out + "-convergence.svg",
                   svg_plot(out.convergence, "parameter", "zero"));
    }
    std::cout << "wrote " << cfg.out << ".csv and " << cfg.out << ".json";
    if (cfg.plot && !out.curves.empty()) std::cout << " and " << cfg.out << ".svg";
    std::cout << "\n";
    if (out.summary.contains("zero_final"))
      std::cout << "zero_final = "
                << format_double(out.summary["zero_final"].get<double>())
                << "\n";
    std::cout << "status: " << out.summary["status"].get<std::string>()
              << "\n";
  }
  return out.exit_code;
}

int run_guarded(const RunConfig& cfg, const std::string& subcommand,
                const std::function<void(RunOutput&)>& body) {
  RunOutput out;
  out.summary = base_summary(cfg, subcommand);
  try {
    body(out);
  } catch (const CliError& e) {
    out.summary["errors"].push_back(
        {{"code", jd_status_name(e.status)}, {"message", e.what()}});
    out.exit_code = is_sentinel_status(e.status) ? 2 : 1;
  } catch (const std::exception& e) {
    out.summary["errors"].push_back({{"code", "error"}, {"message", e.what()}});
    out.exit_code = 1;
  }
  try {
    return emit(cfg, out);
  } catch (const std::exception& e) {
    std::cerr << "output failed: " << e.what() << "\n";
    return 1;
  }
}

// Non-fatal first-zero attempt for curve subcommands: records the zero
// when the curve crosses, a note when it does not.
void try_first_zero(jd_curve* c, double param, RunOutput& out) {
  double t0 = 0, bracket = 0;
  int monotone = 0, lb = 0;
  int rc = jd_curve_first_zero(c, nullptr, nullptr, &t0, &bracket, &monotone,
                               &lb);
  if (rc == JD_OK) {
    out.summary["zeros"].push_back({{"param", param},
                                    {"t0", t0},
                                    {"bracket", bracket},
                                    {"monotone_in_t", monotone != 0},
                                    {"lower_bound", lb != 0}});
    out.summary["zero_final"] = t0;
  } else if (rc == JD_ERR_ALL_PRUNED) {
    throw CliError(rc, jd_last_error());
  } else {
    out.warnings.add(std::string("zero extraction: ") + jd_last_error());
  }
}

// ---------------------------------------------------------- puzzles ---

std::string puzzle_cache_name(const std::string& hash, int depth) {
  return hash + "-N" + std::to_string(depth) + ".jdpz";
}

// Deepest cached puzzle for this hash, or empty. The depth comes from the
// file name; the loaded object is refined further when too shallow.
fs::path find_cached_puzzle(const fs::path& dir, const std::string& hash,
                            int* depth_out) {
  fs::path best;
  int best_depth = -1;
  if (!fs::exists(dir)) return best;
  std::string prefix = hash + "-N";
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) != 0 || entry.path().extension() != ".jdpz")
      continue;
    int d = std::atoi(name.c_str() + prefix.size());
    if (d > best_depth) {
      best_depth = d;
      best = entry.path();
    }
  }
  *depth_out = best_depth;
  return best;
}

PuzzleH acquire_puzzle(const RunConfig& cfg, jd_map* map, RunOutput& out) {
  jd_puzzle_params pp;
  jd_puzzle_params_init(&pp);
  pp.eta = cfg.eta;
  pp.seed = cfg.seed;
  pp.metric = metric_of(cfg);
  const char* angles = cfg.angles.empty() ? nullptr : cfg.angles.c_str();

  PuzzleH puzzle;
  int cached_depth = -1;
  fs::path cache_file;
  if (!cfg.cache_dir.empty()) {
    cache_file =
        find_cached_puzzle(cfg.cache_dir, cfg.puzzle_hash(), &cached_depth);
    if (!cache_file.empty()) {
      int rc = jd_puzzle_load(cache_file.string().c_str(), puzzle.out());
      if (rc != JD_OK) {
        out.warnings.add("ignoring cache file " + cache_file.string() + ": " +
                         jd_last_error());
        puzzle.p = nullptr;
        cached_depth = -1;
      }
    }
  }
  if (!puzzle.p) check(jd_puzzle_create(map, &pp, angles, puzzle.out()));
  check(jd_puzzle_refine_to(puzzle, cfg.puzzle_depth));
  if (!cfg.cache_dir.empty() && cached_depth < cfg.puzzle_depth) {
    fs::create_directories(cfg.cache_dir);
    fs::path fresh = fs::path(cfg.cache_dir) /
                     puzzle_cache_name(cfg.puzzle_hash(), cfg.puzzle_depth);
    int rc = jd_puzzle_save(puzzle, fresh.string().c_str(), 1);
    if (rc != JD_OK)
      out.warnings.add(std::string("cache write failed: ") + jd_last_error());
  }
  return puzzle;
}

struct FamilyZero {
  int depth;
  double t0;
  double lambda;
  bool monotone_in_t;
};

// Shared driver for mcmullen/dimension on matrix estimators: pressure
// curves and Perron roots across the depth family.
void mcm_family(const RunConfig& cfg, RunOutput& out) {
  if (!estimator_is_mcm(cfg.estimator))
    throw std::runtime_error("estimator '" + cfg.estimator +
                             "' is not a matrix estimator; pick one of "
                             "mcm-plain, mcm-fuzzy, mcm-restricted, "
                             "mcm-restricted-fuzzy, mcm-double, mcm-multiple");
  MapH map = make_map(cfg);
  out.summary["map"] = describe_map(map);
  PuzzleH puzzle = acquire_puzzle(cfg, map, out);

  std::string mode = mcm_matrix_mode(cfg.estimator);
  double restriction =
      cfg.a_schedule == "constant" ? cfg.a_value : -1.0;
  std::vector<double> ts = cfg.t_grid();
  std::vector<FamilyZero> zeros;
  int last_error = JD_OK;
  std::string last_message;

  for (int N = cfg.puzzle_depth_min; N <= cfg.puzzle_depth; ++N) {
    MatrixH m;
    int rc = jd_puzzle_matrix(puzzle, N, mode.c_str(), restriction, m.out());
    if (rc != JD_OK) {
      out.warnings.add("depth " + std::to_string(N) + ": " + jd_last_error());
      last_error = rc;
      last_message = jd_last_error();
      continue;
    }
    CurveH curve;
    check(jd_matrix_pressure_curve(m, cfg.estimator.c_str(), ts.data(),
                                   static_cast<int>(ts.size()), curve.out()));
    out.curves.push_back({"N=" + std::to_string(N), {}});
    curve_to_rows(curve, cfg.estimator, "N", N, out, &out.curves.back());

    double t0 = 0, lambda = 0;
    int monotone = 0;
    rc = jd_matrix_perron_root_in_t(m, cfg.t_min, cfg.t_max, cfg.tol_t, &t0,
                                    &lambda, &monotone);
    if (rc != JD_OK) {
      out.warnings.add("depth " + std::to_string(N) + ": " + jd_last_error());
      last_error = rc;
      last_message = jd_last_error();
      continue;
    }
    zeros.push_back({N, t0, lambda, monotone != 0});
  }

  if (zeros.empty()) {
    int status = last_error == JD_OK ? JD_ERR_EMPTY_MATRIX : last_error;
    throw CliError(status, last_message.empty()
                               ? "no depth produced a usable matrix"
                               : last_message);
  }

  bool monotone_zeros = true;
  std::vector<double> zs;
  json jzeros = json::array();
  PlotSeries conv{"zero", {}};
  for (std::size_t k = 0; k < zeros.size(); ++k) {
    const auto& z = zeros[k];
    double diff = k ? z.t0 - zeros[k - 1].t0 : 0.0;
    if (k && diff < -1e-9) monotone_zeros = false;
    jzeros.push_back({{"param", z.depth},
                      {"t0", z.t0},
                      {"lambda", z.lambda},
                      {"diff", diff},
                      {"monotone_in_t", z.monotone_in_t},
                      {"lower_bound", lower_bound_claim(cfg.estimator)}});
    zs.push_back(z.t0);
    conv.points.push_back({double(z.depth), z.t0});
  }
  out.summary["zeros"] = jzeros;
  out.summary["zero_final"] = zs.back();
  out.summary["monotone_zeros"] = monotone_zeros;
  double aitken = 0;
  int valid = 0;
  check(jd_aitken(zs.data(), static_cast<int>(zs.size()), &aitken, &valid));
  out.summary["aitken"] = {{"value", aitken}, {"valid", valid != 0}};
  out.convergence.push_back(std::move(conv));
}

// ------------------------------------------------ refinement callbacks ---

struct EvalCtx {
  const RunConfig* cfg;
  jd_map* map;
  double base_re, base_im;
};

int tree_eval_cb(double t, double* value, void* vctx) {
  auto* ctx = static_cast<EvalCtx*>(vctx);
  jd_tree_params p = tree_params(*ctx->cfg);
  double ts[1] = {t};
  jd_curve* c = nullptr;
  int rc = jd_tree_pressure(ctx->map, ctx->cfg->estimator.c_str(),
                            ctx->base_re, ctx->base_im, &p, ts, 1, &c);
  if (rc != JD_OK) return rc;
  rc = jd_curve_sample(c, 0, nullptr, value);
  jd_curve_free(c);
  return rc;
}

int pullback_eval_cb(double t, double* value, void* vctx) {
  auto* ctx = static_cast<EvalCtx*>(vctx);
  jd_pullback_params p = pullback_params(*ctx->cfg);
  double ts[1] = {t};
  jd_curve* c = nullptr;
  int rc = jd_pullback_pressure(ctx->map, ctx->base_re, ctx->base_im, &p, ts,
                                1, &c);
  if (rc != JD_OK) return rc;
  rc = jd_curve_sample(c, 0, nullptr, value);
  jd_curve_free(c);
  return rc;
}

json params_json(const RunConfig& cfg) {
  json p;
  if (estimator_is_tree(cfg.estimator)) {
    p["n"] = cfg.depth;
    if (cfg.delta > 0) p["delta"] = cfg.delta;
    if (cfg.big_delta > 0) p["Delta"] = cfg.big_delta;
    if (cfg.estimator == "tree-msample") p["m"] = cfg.samples;
    p["seed"] = cfg.seed;
  } else if (cfg.estimator == "pullback") {
    p["n"] = cfg.depth;
    p["r"] = cfg.radius;
    p["kappa"] = cfg.kappa;
  } else {
    p["N"] = cfg.puzzle_depth;
    p["N-min"] = cfg.puzzle_depth_min;
    p["eta"] = cfg.eta;
    if (!cfg.angles.empty()) p["angles"] = cfg.angles;
    p["A"] = cfg.a_schedule == "constant" ? json(cfg.a_value) : json("linear");
  }
  p["threads"] = cfg.threads;
  p["t-grid"] = {{"min", cfg.t_min}, {"max", cfg.t_max}, {"step", cfg.t_step}};
  return p;
}

}  // namespace

// ----------------------------------------------------------- drivers ---

int run_tree(RunConfig cfg) {
  cfg.validate();
  return run_guarded(cfg, "tree-pressure", [&](RunOutput& out) {
    if (!estimator_is_tree(cfg.estimator))
      throw std::runtime_error(
          "estimator '" + cfg.estimator +
          "' is not a tree estimator; pick one of tree-plain, tree-fuzzy, "
          "tree-restricted, tree-msample");
    out.summary["params"] = params_json(cfg);
    MapH map = make_map(cfg);
    out.summary["map"] = describe_map(map);
    double bre = 0, bim = 0;
    base_point(cfg, map, &bre, &bim);
    out.summary["base"] = {bre, bim};
    jd_tree_params p = tree_params(cfg);
    std::vector<double> ts = cfg.t_grid();
    CurveH curve;
    check(jd_tree_pressure(map, cfg.estimator.c_str(), bre, bim, &p,
                           ts.data(), static_cast<int>(ts.size()),
                           curve.out()));
    out.curves.push_back({cfg.estimator, {}});
    curve_to_rows(curve, cfg.estimator, "n", cfg.depth, out,
                  &out.curves.back());
    int sentinel = 0;
    check(jd_curve_is_sentinel(curve, &sentinel));
    if (sentinel) {
      out.summary["errors"].push_back(
          {{"code", jd_status_name(JD_ERR_ALL_PRUNED)},
           {"message", "every branch was pruned; the pressure curve is a "
                       "sentinel"}});
      out.exit_code = 2;
      return;
    }
    try_first_zero(curve, cfg.depth, out);
  });
}

int run_pullback(RunConfig cfg) {
  cfg.validate();
  cfg.estimator = "pullback";
  return run_guarded(cfg, "pullback", [&](RunOutput& out) {
    out.summary["params"] = params_json(cfg);
    MapH map = make_map(cfg);
    out.summary["map"] = describe_map(map);
    double bre = 0, bim = 0;
    base_point(cfg, map, &bre, &bim);
    out.summary["base"] = {bre, bim};
    jd_pullback_params p = pullback_params(cfg);
    std::vector<double> ts = cfg.t_grid();
    CurveH curve;
    check(jd_pullback_pressure(map, bre, bim, &p, ts.data(),
                               static_cast<int>(ts.size()), curve.out()));
    out.curves.push_back({"pullback", {}});
    curve_to_rows(curve, "pullback", "n", cfg.depth, out, &out.curves.back());
    try_first_zero(curve, cfg.depth, out);
  });
}

int run_mcmullen(RunConfig cfg) {
  cfg.validate();
  return run_guarded(cfg, "mcmullen", [&](RunOutput& out) {
    out.summary["params"] = params_json(cfg);
    mcm_family(cfg, out);
  });
}

int run_dimension(RunConfig cfg) {
  cfg.validate();
  return run_guarded(cfg, "dimension", [&](RunOutput& out) {
    out.summary["params"] = params_json(cfg);
    if (estimator_is_mcm(cfg.estimator)) {
      mcm_family(cfg, out);
      return;
    }
    MapH map = make_map(cfg);
    out.summary["map"] = describe_map(map);
    double bre = 0, bim = 0;
    base_point(cfg, map, &bre, &bim);
    out.summary["base"] = {bre, bim};
    std::vector<double> ts = cfg.t_grid();
    CurveH curve;
    EvalCtx ctx{&cfg, map, bre, bim};
    jd_eval_fn eval = nullptr;
    if (estimator_is_tree(cfg.estimator)) {
      jd_tree_params p = tree_params(cfg);
      check(jd_tree_pressure(map, cfg.estimator.c_str(), bre, bim, &p,
                             ts.data(), static_cast<int>(ts.size()),
                             curve.out()));
      eval = tree_eval_cb;
    } else {
      jd_pullback_params p = pullback_params(cfg);
      check(jd_pullback_pressure(map, bre, bim, &p, ts.data(),
                                 static_cast<int>(ts.size()), curve.out()));
      eval = pullback_eval_cb;
    }
    out.curves.push_back({cfg.estimator, {}});
    curve_to_rows(curve, cfg.estimator, "n", cfg.depth, out,
                  &out.curves.back());
    double t0 = 0, bracket = 0;
    int monotone = 0, lb = 0;
    check(jd_curve_first_zero(curve, eval, &ctx, &t0, &bracket, &monotone,
                              &lb));
    out.summary["zeros"].push_back({{"param", cfg.depth},
                                    {"t0", t0},
                                    {"bracket", bracket},
                                    {"monotone_in_t", monotone != 0},
                                    {"lower_bound", lb != 0},
                                    {"refined", true}});
    out.summary["zero_final"] = t0;
    out.summary["dimension_estimate"] = {{"t0", t0},
                                         {"bracket", bracket},
                                         {"lower_bound", lb != 0}};
  });
}

int run_diagnose(RunConfig cfg) {
  cfg.validate();
  cfg.estimator = "pullback";
  return run_guarded(cfg, "diagnose", [&](RunOutput& out) {
    MapH map = make_map(cfg);
    out.summary["map"] = describe_map(map);
    double bre = 0, bim = 0;
    base_point(cfg, map, &bre, &bim);
    out.summary["base"] = {bre, bim};
    int degree = 0;
    check(jd_map_degree(map, &degree));
    json checks = json::array();
    bool all_pass = true;

    auto record = [&](const std::string& name, bool pass, double measured,
                      const std::string& detail) {
      checks.push_back({{"name", name},
                        {"pass", pass},
                        {"measured", measured},
                        {"detail", detail}});
      out.rows.push_back({"diagnose", name, pass ? 1.0 : 0.0, 0.0, measured,
                          0.0, pass ? "pass" : "fail"});
      std::cout << "check " << name << ": " << (pass ? "PASS" : "FAIL")
                << " (" << detail << ")\n";
      if (!pass) all_pass = false;
    };

    // Green's function functional equation G(f(z)) = d G(z).
    if (cfg.map.kind != "rational") {
      double g1 = 0, g2 = 0, fre = 0, fim = 0;
      check(jd_map_green_potential(map, bre, bim, &g1));
      check(jd_map_evaluate(map, bre, bim, &fre, &fim));
      check(jd_map_green_potential(map, fre, fim, &g2));
      double err = std::abs(g2 - degree * g1) / std::max(1.0, degree * g1);
      record("green-functional-equation", err <= 1e-8, err,
             "relative defect " + format_double(err));
      if (!cfg.has_base) {
        double err2 = std::abs(g1 - cfg.eta / 2);
        record("base-potential", err2 <= 1e-9, err2,
               "|G(base) - eta/2| = " + format_double(err2));
      }
    }

    // Analytic derivative vs a centered finite difference.
    {
      double h = 1e-6 * (1.0 + std::hypot(bre, bim));
      double f1re, f1im, f2re, f2im, dmod;
      check(jd_map_evaluate(map, bre + h, bim, &f1re, &f1im));
      check(jd_map_evaluate(map, bre - h, bim, &f2re, &f2im));
      check(jd_map_derivative_modulus(map, bre, bim, JD_METRIC_EUCLIDEAN,
                                      &dmod));
      double fd = std::hypot(f1re - f2re, f1im - f2im) / (2 * h);
      double err = std::abs(fd - dmod) / std::max(1.0, dmod);
      record("derivative-finite-difference", err <= 1e-5, err,
             "relative defect " + format_double(err));
    }

    // Spherical modulus against its conformal rescaling of the euclidean
    // one.
    {
      double de, ds, fre, fim;
      check(jd_map_derivative_modulus(map, bre, bim, JD_METRIC_EUCLIDEAN,
                                      &de));
      check(jd_map_derivative_modulus(map, bre, bim, JD_METRIC_SPHERICAL,
                                      &ds));
      check(jd_map_evaluate(map, bre, bim, &fre, &fim));
      double z2 = bre * bre + bim * bim;
      double w2 = fre * fre + fim * fim;
      double expected = de * (1 + z2) / (1 + w2);
      double err = std::abs(ds - expected) / std::max(1e-300, expected);
      record("metric-consistency", err <= 1e-10, err,
             "relative defect " + format_double(err));
    }

    // Every preimage must map back onto the point.
    {
      std::vector<double> pts(static_cast<std::size_t>(2 * degree));
      std::vector<int> mults(static_cast<std::size_t>(degree));
      int count = 0;
      check(jd_map_preimages(map, bre, bim, pts.data(), mults.data(), degree,
                             &count));
      double worst = 0;
      int mult_sum = 0;
      for (int k = 0; k < count; ++k) {
        double fre, fim;
        check(jd_map_evaluate(map, pts[2 * k], pts[2 * k + 1], &fre, &fim));
        worst = std::max(worst, std::hypot(fre - bre, fim - bim));
        mult_sum += mults[static_cast<std::size_t>(k)];
      }
      double scale = 1.0 + std::hypot(bre, bim);
      bool pass = worst <= 1e-6 * scale &&
                  (cfg.map.kind == "rational" || mult_sum == degree);
      record("fiber-roundtrip", pass, worst,
             "max |f(w) - z| = " + format_double(worst) + ", multiplicities " +
                 std::to_string(mult_sum) + "/" + std::to_string(degree));
    }

    // Telescope defect across halved root radii.
    json telescope = json::array();
    double prev_max = 0;
    bool first = true;
    for (double r : {cfg.radius, cfg.radius / 2, cfg.radius / 4}) {
      jd_pullback_params p = pullback_params(cfg);
      p.radius = r;
      int count = 0;
      double max_abs = 0, sat = 0;
      check(jd_telescope(map, bre, bim, &p, nullptr, 0, &count, &max_abs,
                         &sat));
      std::vector<double> values(static_cast<std::size_t>(count));
      check(jd_telescope(map, bre, bim, &p, values.data(), count, &count,
                         &max_abs, &sat));
      double worst_positive = 0;
      for (double v : values) worst_positive = std::max(worst_positive, v);
      record("telescope-nonpositive-r" + format_double(r),
             worst_positive <= 1e-12, worst_positive,
             "max branch value " + format_double(worst_positive));
      if (!first)
        record("telescope-shrinks-r" + format_double(r),
               max_abs <= prev_max + 1e-12, max_abs,
               "max |defect| " + format_double(max_abs) + " vs " +
                   format_double(prev_max));
      telescope.push_back({{"r", r},
                           {"max_abs", max_abs},
                           {"saturated_fraction", sat},
                           {"branches", count}});
      out.rows.push_back({"telescope", "r", r, 1.0, max_abs, double(count),
                          sat > 0.5 ? "saturated" : ""});
      prev_max = max_abs;
      first = false;
    }
    out.summary["telescope"] = telescope;
    out.summary["checks"] = checks;
    if (!all_pass) out.exit_code = 1;
  });
}

int run_cache(const std::string& action, RunConfig cfg) {
  if (cfg.cache_dir.empty()) {
    std::cerr << "cache directory not set; pass --cache-dir\n";
    return 1;
  }
  fs::path dir(cfg.cache_dir);
  if (action == "clear") {
    int removed = 0;
    if (fs::exists(dir)) {
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".jdpz") {
          fs::remove(entry.path());
          ++removed;
        }
      }
    }
    std::cout << "removed " << removed << " cache file"
              << (removed == 1 ? "" : "s") << "\n";
    return 0;
  }
  if (action != "inspect") {
    std::cerr << "unknown cache action '" << action
              << "'; expected inspect or clear\n";
    return 1;
  }
  if (!fs::exists(dir)) {
    std::cout << "cache directory " << dir.string() << " is empty\n";
    return 0;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".jdpz") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cout << "cache directory " << dir.string() << " is empty\n";
    return 0;
  }
  for (const auto& f : files) {
    std::cout << f.filename().string() << "  " << fs::file_size(f)
              << " bytes";
    PuzzleH puzzle;
    int rc = jd_puzzle_load(f.string().c_str(), puzzle.out());
    if (rc != JD_OK) {
      std::cout << "  (unreadable: " << jd_last_error() << ")\n";
      continue;
    }
    int depth = 0, pieces = 0;
    jd_puzzle_depth(puzzle, &depth);
    jd_puzzle_piece_count(puzzle, depth, &pieces);
    std::cout << "  depth " << depth << ", " << pieces
              << " pieces at the deepest level\n";
  }
  return 0;
}

}  // namespace jdcli
