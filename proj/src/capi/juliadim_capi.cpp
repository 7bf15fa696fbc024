#include "juliadim.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "core/dimension.hpp"
#include "core/errors.hpp"
#include "core/green.hpp"
#include "core/map.hpp"
#include "core/pullback.hpp"
#include "core/puzzle.hpp"
#include "core/spectral.hpp"
#include "core/tree.hpp"

using jdim::cpx;

struct jd_map {
  jdim::Map m;
};
struct jd_curve {
  jdim::PressureCurve c;
};
struct jd_puzzle {
  jdim::Puzzle p;
};
struct jd_matrix {
  jdim::SparseNonnegMatrix m;
};

namespace {

thread_local std::string g_last_error = "no error";

int to_status(jdim::ErrorCode code) {
  using jdim::ErrorCode;
  switch (code) {
    case ErrorCode::none: return JD_OK;
    case ErrorCode::invalid_argument: return JD_ERR_INVALID_ARGUMENT;
    case ErrorCode::pole: return JD_ERR_POLE;
    case ErrorCode::non_convergence: return JD_ERR_NON_CONVERGENCE;
    case ErrorCode::budget_exceeded: return JD_ERR_BUDGET_EXCEEDED;
    case ErrorCode::all_pruned: return JD_ERR_ALL_PRUNED;
    case ErrorCode::empty_matrix: return JD_ERR_EMPTY_MATRIX;
    case ErrorCode::no_sign_change: return JD_ERR_NO_SIGN_CHANGE;
    case ErrorCode::structure: return JD_ERR_STRUCTURE;
    case ErrorCode::ambiguity: return JD_ERR_AMBIGUITY;
    case ErrorCode::io: return JD_ERR_IO;
  }
  return JD_ERR_UNKNOWN;
}

template <typename Fn>
int guarded(Fn&& fn) noexcept {
  try {
    fn();
    return JD_OK;
  } catch (const jdim::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return JD_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unrecognized failure";
    return JD_ERR_UNKNOWN;
  }
}

int arg_error(const std::string& msg) {
  g_last_error = msg;
  return JD_ERR_INVALID_ARGUMENT;
}

jdim::Metric to_metric(int metric) {
  if (metric == JD_METRIC_EUCLIDEAN) return jdim::Metric::euclidean;
  if (metric == JD_METRIC_SPHERICAL) return jdim::Metric::spherical;
  jdim::fail(jdim::ErrorCode::invalid_argument,
             "metric must be 0 (euclidean) or 1 (spherical)");
}

std::vector<cpx> pack_coeffs(const double* a, int count) {
  std::vector<cpx> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[i] = cpx(a[2 * i], a[2 * i + 1]);
  return out;
}

jdim::TreeEstimator parse_tree_estimator(const char* id) {
  std::string s = id ? id : "";
  if (s == "tree-plain") return jdim::TreeEstimator::plain;
  if (s == "tree-fuzzy") return jdim::TreeEstimator::fuzzy;
  if (s == "tree-restricted") return jdim::TreeEstimator::restricted_fuzzy;
  if (s == "tree-msample") return jdim::TreeEstimator::multi_sample;
  jdim::fail(jdim::ErrorCode::invalid_argument,
             "unknown tree estimator '" + s +
                 "'; expected tree-plain, tree-fuzzy, tree-restricted, or "
                 "tree-msample");
}

jdim::MatrixMode parse_matrix_mode(const char* id) {
  std::string s = id ? id : "";
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "plain") return jdim::MatrixMode::plain;
  if (s == "fuzzy") return jdim::MatrixMode::fuzzy;
  if (s == "restricted") return jdim::MatrixMode::restricted;
  if (s == "restricted-fuzzy") return jdim::MatrixMode::restricted_fuzzy;
  if (s == "double-sample" || s == "double")
    return jdim::MatrixMode::double_sample;
  if (s == "double-sample-in-piece" || s == "double-in-piece")
    return jdim::MatrixMode::double_sample_in_piece;
  if (s == "multiple") return jdim::MatrixMode::multiple;
  jdim::fail(jdim::ErrorCode::invalid_argument,
             "unknown matrix mode '" + s +
                 "'; expected plain, fuzzy, restricted, restricted-fuzzy, "
                 "double-sample, double-sample-in-piece, or multiple");
}

std::vector<jdim::Angle> parse_angle_list(const char* text) {
  std::vector<jdim::Angle> out;
  if (!text) return out;
  std::string s(text);
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    std::string item = s.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t a = item.find_first_not_of(" \t");
    std::size_t b = item.find_last_not_of(" \t");
    if (a != std::string::npos)
      out.push_back(jdim::Angle::parse(item.substr(a, b - a + 1)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int copy_string(const std::string& s, char* buf, int cap, int* needed) {
  int need = static_cast<int>(s.size()) + 1;
  if (needed) *needed = need;
  if (buf && cap > 0) {
    int n = std::min(cap - 1, need - 1);
    std::memcpy(buf, s.data(), static_cast<std::size_t>(n));
    buf[n] = '\0';
  }
  return JD_OK;
}

}  // namespace

extern "C" {

const char* jd_version(void) { return "0.1.0"; }

const char* jd_last_error(void) { return g_last_error.c_str(); }

const char* jd_status_name(int status) {
  switch (status) {
    case JD_OK: return "ok";
    case JD_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case JD_ERR_POLE: return "pole";
    case JD_ERR_NON_CONVERGENCE: return "non-convergence";
    case JD_ERR_BUDGET_EXCEEDED: return "budget-exceeded";
    case JD_ERR_ALL_PRUNED: return "all-pruned";
    case JD_ERR_EMPTY_MATRIX: return "empty-matrix";
    case JD_ERR_NO_SIGN_CHANGE: return "no-sign-change";
    case JD_ERR_STRUCTURE: return "structure";
    case JD_ERR_AMBIGUITY: return "ambiguity";
    case JD_ERR_IO: return "io";
    default: return "unknown";
  }
}

/* ----------------------------------------------------------- maps ----- */

int jd_map_unicritical(int degree, double c_re, double c_im, jd_map** out) {
  if (!out) return arg_error("out pointer is null");
  return guarded([&] {
    *out = new jd_map{jdim::Map::unicritical(degree, cpx(c_re, c_im))};
  });
}

int jd_map_polynomial(const double* coeffs, int count, jd_map** out) {
  if (!out) return arg_error("out pointer is null");
  if (!coeffs || count <= 0) return arg_error("coefficient array is empty");
  return guarded([&] {
    *out = new jd_map{jdim::Map::polynomial(pack_coeffs(coeffs, count))};
  });
}

int jd_map_rational(const double* num, int num_count, const double* den,
                    int den_count, jd_map** out) {
  if (!out) return arg_error("out pointer is null");
  if (!num || num_count <= 0 || !den || den_count <= 0)
    return arg_error("coefficient array is empty");
  return guarded([&] {
    *out = new jd_map{jdim::Map::rational(pack_coeffs(num, num_count),
                                          pack_coeffs(den, den_count))};
  });
}

void jd_map_free(jd_map* map) { delete map; }

int jd_map_degree(const jd_map* map, int* out) {
  if (!map || !out) return arg_error("null pointer");
  *out = map->m.degree();
  return JD_OK;
}

int jd_map_describe(const jd_map* map, char* buf, int cap, int* needed) {
  if (!map) return arg_error("null pointer");
  return guarded([&] { copy_string(map->m.describe(), buf, cap, needed); });
}

int jd_map_evaluate(const jd_map* map, double z_re, double z_im,
                    double* out_re, double* out_im) {
  if (!map || !out_re || !out_im) return arg_error("null pointer");
  return guarded([&] {
    cpx w = map->m.evaluate(cpx(z_re, z_im));
    *out_re = w.real();
    *out_im = w.imag();
  });
}

int jd_map_derivative_modulus(const jd_map* map, double z_re, double z_im,
                              int metric, double* out) {
  if (!map || !out) return arg_error("null pointer");
  return guarded([&] {
    *out = map->m.derivative_modulus(cpx(z_re, z_im), to_metric(metric));
  });
}

int jd_map_preimages(const jd_map* map, double z_re, double z_im, double* pts,
                     int* mults, int cap, int* out_count) {
  if (!map || !out_count) return arg_error("null pointer");
  return guarded([&] {
    auto fiber = map->m.preimages(cpx(z_re, z_im));
    int count = static_cast<int>(fiber.size());
    *out_count = count;
    if (pts || mults) {
      if (cap < count)
        jdim::fail(jdim::ErrorCode::invalid_argument,
                   "fiber buffer too small (need " + std::to_string(count) +
                       " entries)");
      for (int i = 0; i < count; ++i) {
        if (pts) {
          pts[2 * i] = fiber[static_cast<std::size_t>(i)].point.real();
          pts[2 * i + 1] = fiber[static_cast<std::size_t>(i)].point.imag();
        }
        if (mults)
          mults[i] = fiber[static_cast<std::size_t>(i)].multiplicity;
      }
    }
  });
}

int jd_map_critical_distance(const jd_map* map, double z_re, double z_im,
                             double* out) {
  if (!map || !out) return arg_error("null pointer");
  return guarded(
      [&] { *out = map->m.distance_to_critical_set(cpx(z_re, z_im)); });
}

int jd_map_derivative_disk_bounds(const jd_map* map, double center_re,
                                  double center_im, double radius, int metric,
                                  double* out_lo, double* out_hi) {
  if (!map || !out_lo || !out_hi) return arg_error("null pointer");
  return guarded([&] {
    auto b = map->m.derivative_bounds_on_disk(cpx(center_re, center_im),
                                              radius, to_metric(metric));
    *out_lo = b.lower;
    *out_hi = b.upper;
  });
}

int jd_map_green_potential(const jd_map* map, double z_re, double z_im,
                           double* out) {
  if (!map || !out) return arg_error("null pointer");
  return guarded(
      [&] { *out = jdim::green_potential(map->m, cpx(z_re, z_im)); });
}

int jd_map_ray_point(const jd_map* map, double theta, double potential,
                     double* out_re, double* out_im) {
  if (!map || !out_re || !out_im) return arg_error("null pointer");
  return guarded([&] {
    cpx z = jdim::point_on_ray(map->m, theta, potential);
    *out_re = z.real();
    *out_im = z.imag();
  });
}

int jd_map_base_point(const jd_map* map, double eta, const char* angle,
                      double* out_re, double* out_im) {
  if (!map || !out_re || !out_im) return arg_error("null pointer");
  return guarded([&] {
    jdim::Angle theta = jdim::Angle::parse(angle ? angle : "0");
    cpx z = jdim::select_base_point(map->m, eta, theta);
    *out_re = z.real();
    *out_im = z.imag();
  });
}

/* ------------------------------------------- tree and pullback ----- */

void jd_tree_params_init(jd_tree_params* p) {
  if (!p) return;
  jdim::TreeParams d;
  p->depth = d.depth;
  p->delta = d.delta;
  p->big_delta = d.big_delta;
  p->samples = d.samples;
  p->seed = d.seed;
  p->node_budget = d.node_budget;
  p->threads = d.threads;
  p->metric = JD_METRIC_EUCLIDEAN;
}

void jd_pullback_params_init(jd_pullback_params* p) {
  if (!p) return;
  jdim::PullbackParams d;
  p->depth = d.depth;
  p->radius = d.radius;
  p->kappa = d.kappa;
  p->node_budget = d.node_budget;
  p->threads = d.threads;
  p->metric = JD_METRIC_EUCLIDEAN;
}

namespace {

jdim::TreeParams unpack_tree(const jd_tree_params& p) {
  jdim::TreeParams out;
  out.depth = p.depth;
  out.delta = p.delta;
  out.big_delta = p.big_delta;
  out.samples = p.samples;
  out.seed = p.seed;
  out.node_budget = p.node_budget;
  out.threads = p.threads;
  out.metric = to_metric(p.metric);
  return out;
}

jdim::PullbackParams unpack_pullback(const jd_pullback_params& p) {
  jdim::PullbackParams out;
  out.depth = p.depth;
  out.radius = p.radius;
  out.kappa = p.kappa;
  out.node_budget = p.node_budget;
  out.threads = p.threads;
  out.metric = to_metric(p.metric);
  return out;
}

}  // namespace

int jd_tree_pressure(const jd_map* map, const char* estimator, double base_re,
                     double base_im, const jd_tree_params* params,
                     const double* t_grid, int t_count, jd_curve** out) {
  if (!map || !params || !out) return arg_error("null pointer");
  if (!t_grid || t_count <= 0) return arg_error("t grid is empty");
  return guarded([&] {
    jdim::TreeEstimator kind = parse_tree_estimator(estimator);
    jdim::TreeParams p = unpack_tree(*params);
    jdim::TreeResult r =
        jdim::tree_pressure(map->m, cpx(base_re, base_im), kind, p,
                            std::span<const double>(t_grid, t_count));
    jdim::PressureCurve c;
    c.estimator = estimator;
    c.params = {{"n", double(p.depth)},
                {"delta", p.delta},
                {"Delta", p.big_delta},
                {"m", double(p.samples)}};
    c.samples = std::move(r.samples);
    c.branch_count = r.branch_count;
    c.sentinel = r.sentinel;
    c.warnings = std::move(r.warnings);
    *out = new jd_curve{std::move(c)};
  });
}

int jd_pullback_pressure(const jd_map* map, double base_re, double base_im,
                         const jd_pullback_params* params,
                         const double* t_grid, int t_count, jd_curve** out) {
  if (!map || !params || !out) return arg_error("null pointer");
  if (!t_grid || t_count <= 0) return arg_error("t grid is empty");
  return guarded([&] {
    jdim::PullbackParams p = unpack_pullback(*params);
    jdim::PullbackResult r =
        jdim::pullback_pressure(map->m, cpx(base_re, base_im), p,
                                std::span<const double>(t_grid, t_count));
    jdim::PressureCurve c;
    c.estimator = "pullback";
    c.params = {{"n", double(p.depth)}, {"r", p.radius}, {"kappa", p.kappa}};
    c.samples = std::move(r.samples);
    c.branch_count = r.branch_count;
    c.warnings = std::move(r.warnings);
    *out = new jd_curve{std::move(c)};
  });
}

int jd_telescope(const jd_map* map, double base_re, double base_im,
                 const jd_pullback_params* params, double* values, int cap,
                 int* out_count, double* out_max_abs,
                 double* out_saturated_fraction) {
  if (!map || !params) return arg_error("null pointer");
  return guarded([&] {
    jdim::TelescopeResult r = jdim::telescope_diagnostic(
        map->m, cpx(base_re, base_im), unpack_pullback(*params));
    int count = static_cast<int>(r.per_branch.size());
    if (values) {
      if (cap < count)
        jdim::fail(jdim::ErrorCode::invalid_argument,
                   "telescope buffer too small (need " +
                       std::to_string(count) + " values)");
      std::copy(r.per_branch.begin(), r.per_branch.end(), values);
    }
    if (out_count) *out_count = count;
    if (out_max_abs) *out_max_abs = r.max_abs;
    if (out_saturated_fraction) *out_saturated_fraction = r.saturated_fraction;
  });
}

/* ----------------------------------------------------- curves ----- */

int jd_curve_size(const jd_curve* curve, int* out) {
  if (!curve || !out) return arg_error("null pointer");
  *out = static_cast<int>(curve->c.samples.size());
  return JD_OK;
}

int jd_curve_sample(const jd_curve* curve, int index, double* out_t,
                    double* out_value) {
  if (!curve) return arg_error("null pointer");
  if (index < 0 || index >= static_cast<int>(curve->c.samples.size()))
    return arg_error("sample index out of range");
  const auto& s = curve->c.samples[static_cast<std::size_t>(index)];
  if (out_t) *out_t = s.t;
  if (out_value) *out_value = s.value;
  return JD_OK;
}

int jd_curve_branch_count(const jd_curve* curve, double* out) {
  if (!curve || !out) return arg_error("null pointer");
  *out = curve->c.branch_count;
  return JD_OK;
}

int jd_curve_is_sentinel(const jd_curve* curve, int* out) {
  if (!curve || !out) return arg_error("null pointer");
  *out = curve->c.sentinel ? 1 : 0;
  return JD_OK;
}

int jd_curve_warning_count(const jd_curve* curve, int* out) {
  if (!curve || !out) return arg_error("null pointer");
  *out = static_cast<int>(curve->c.warnings.size());
  return JD_OK;
}

int jd_curve_warning(const jd_curve* curve, int index, const char** out) {
  if (!curve || !out) return arg_error("null pointer");
  if (index < 0 || index >= static_cast<int>(curve->c.warnings.size()))
    return arg_error("warning index out of range");
  *out = curve->c.warnings[static_cast<std::size_t>(index)].c_str();
  return JD_OK;
}

int jd_curve_estimator(const jd_curve* curve, const char** out) {
  if (!curve || !out) return arg_error("null pointer");
  *out = curve->c.estimator.c_str();
  return JD_OK;
}

int jd_curve_first_zero(const jd_curve* curve, jd_eval_fn eval, void* ctx,
                        double* out_t0, double* out_bracket, int* out_monotone,
                        int* out_lower_bound) {
  if (!curve || !out_t0) return arg_error("null pointer");
  return guarded([&] {
    std::function<double(double)> ev;
    if (eval) {
      ev = [eval, ctx](double t) {
        double v = 0.0;
        int rc = eval(t, &v, ctx);
        if (rc != JD_OK)
          jdim::fail(jdim::ErrorCode::non_convergence,
                     "zero refinement callback failed with status " +
                         std::string(jd_status_name(rc)));
        return v;
      };
    }
    jdim::DimensionEstimate est =
        jdim::first_zero(curve->c, eval != nullptr, ev);
    *out_t0 = est.t0;
    if (out_bracket) *out_bracket = est.bracket;
    if (out_monotone) *out_monotone = est.monotone ? 1 : 0;
    if (out_lower_bound) *out_lower_bound = est.is_lower_bound_claim ? 1 : 0;
  });
}

void jd_curve_free(jd_curve* curve) { delete curve; }

int jd_aitken(const double* zeros, int count, double* out, int* out_valid) {
  if (!zeros || !out) return arg_error("null pointer");
  if (count <= 0) return arg_error("zero sequence is empty");
  *out = zeros[count - 1];
  int valid = 0;
  if (count >= 3) {
    double z0 = zeros[count - 3], z1 = zeros[count - 2], z2 = zeros[count - 1];
    double d1 = z1 - z0, d2 = z2 - z1;
    double denom = d2 - d1;
    if (std::abs(denom) > 1e-14) {
      *out = z2 - d2 * d2 / denom;
      valid = 1;
    }
  }
  if (out_valid) *out_valid = valid;
  return JD_OK;
}

/* ---------------------------------------------------- puzzles ----- */

void jd_puzzle_params_init(jd_puzzle_params* p) {
  if (!p) return;
  jdim::PuzzleOptions d;
  p->eta = d.eta;
  p->arc_samples = d.arc_samples;
  p->potential_samples = d.potential_samples;
  p->ray_eta_min = d.ray_eta_min;
  p->seed = d.seed;
  p->metric = JD_METRIC_EUCLIDEAN;
}

int jd_puzzle_create(const jd_map* map, const jd_puzzle_params* params,
                     const char* angles, jd_puzzle** out) {
  if (!map || !params || !out) return arg_error("null pointer");
  return guarded([&] {
    jdim::PuzzleOptions opt;
    opt.eta = params->eta;
    opt.arc_samples = params->arc_samples;
    opt.potential_samples = params->potential_samples;
    opt.ray_eta_min = params->ray_eta_min;
    opt.seed = params->seed;
    opt.metric = to_metric(params->metric);
    opt.angles = parse_angle_list(angles);
    *out = new jd_puzzle{jdim::Puzzle(map->m, opt)};
  });
}

int jd_puzzle_refine_to(jd_puzzle* puzzle, int depth) {
  if (!puzzle) return arg_error("null pointer");
  return guarded([&] { puzzle->p.refine_to(depth); });
}

int jd_puzzle_depth(const jd_puzzle* puzzle, int* out) {
  if (!puzzle || !out) return arg_error("null pointer");
  *out = puzzle->p.depth();
  return JD_OK;
}

int jd_puzzle_piece_count(const jd_puzzle* puzzle, int depth, int* out) {
  if (!puzzle || !out) return arg_error("null pointer");
  return guarded([&] {
    *out = static_cast<int>(puzzle->p.level(depth).pieces.size());
  });
}

int jd_puzzle_piece(const jd_puzzle* puzzle, int depth, int index,
                    double* y_re, double* y_im, double* diam,
                    double* dist_to_crit) {
  if (!puzzle) return arg_error("null pointer");
  return guarded([&] {
    const auto& pieces = puzzle->p.level(depth).pieces;
    if (index < 0 || index >= static_cast<int>(pieces.size()))
      jdim::fail(jdim::ErrorCode::invalid_argument,
                 "piece index out of range");
    const auto& pc = pieces[static_cast<std::size_t>(index)];
    if (y_re) *y_re = pc.y.real();
    if (y_im) *y_im = pc.y.imag();
    if (diam) *diam = pc.diam;
    if (dist_to_crit) *dist_to_crit = pc.dist_to_crit;
  });
}

int jd_puzzle_piece_word(const jd_puzzle* puzzle, int depth, int index,
                         int* letters, int cap, int* out_len) {
  if (!puzzle || !out_len) return arg_error("null pointer");
  return guarded([&] {
    const auto& pieces = puzzle->p.level(depth).pieces;
    if (index < 0 || index >= static_cast<int>(pieces.size()))
      jdim::fail(jdim::ErrorCode::invalid_argument,
                 "piece index out of range");
    const auto& word = pieces[static_cast<std::size_t>(index)].word;
    int len = static_cast<int>(word.size());
    *out_len = len;
    if (letters) {
      if (cap < len)
        jdim::fail(jdim::ErrorCode::invalid_argument,
                   "word buffer too small (need " + std::to_string(len) +
                       " letters)");
      std::copy(word.begin(), word.end(), letters);
    }
  });
}

int jd_puzzle_transition_count(const jd_puzzle* puzzle, int depth, int* out) {
  if (!puzzle || !out) return arg_error("null pointer");
  return guarded([&] {
    *out = static_cast<int>(puzzle->p.level(depth).transitions.size());
  });
}

int jd_puzzle_transition(const jd_puzzle* puzzle, int depth, int index,
                         int* out_from, int* out_to, int* out_s) {
  if (!puzzle) return arg_error("null pointer");
  return guarded([&] {
    const auto& trans = puzzle->p.level(depth).transitions;
    if (index < 0 || index >= static_cast<int>(trans.size()))
      jdim::fail(jdim::ErrorCode::invalid_argument,
                 "transition index out of range");
    const auto& tr = trans[static_cast<std::size_t>(index)];
    if (out_from) *out_from = tr.from;
    if (out_to) *out_to = tr.to;
    if (out_s) *out_s = tr.s;
  });
}

int jd_puzzle_max_diam(const jd_puzzle* puzzle, int depth, double* out) {
  if (!puzzle || !out) return arg_error("null pointer");
  return guarded([&] { *out = puzzle->p.level(depth).max_diam(); });
}

int jd_puzzle_misclassified(const jd_puzzle* puzzle, int depth,
                            unsigned long long* out) {
  if (!puzzle || !out) return arg_error("null pointer");
  return guarded([&] { *out = puzzle->p.level(depth).misclassified; });
}

int jd_puzzle_member(const jd_puzzle* puzzle, double z_re, double z_im,
                     int depth, int piece, int* out) {
  if (!puzzle || !out) return arg_error("null pointer");
  return guarded([&] {
    *out = puzzle->p.member(cpx(z_re, z_im), depth, piece) ? 1 : 0;
  });
}

int jd_puzzle_matrix(const jd_puzzle* puzzle, int depth, const char* mode,
                     double restriction, jd_matrix** out) {
  if (!puzzle || !out) return arg_error("null pointer");
  return guarded([&] {
    jdim::MatrixMode m = parse_matrix_mode(mode);
    jdim::RestrictionSchedule sched =
        restriction < 0.0 ? jdim::RestrictionSchedule::linear()
                          : jdim::RestrictionSchedule::constant(restriction);
    *out = new jd_matrix{puzzle->p.matrix(depth, m, sched)};
  });
}

int jd_puzzle_save(const jd_puzzle* puzzle, const char* path, int binary) {
  if (!puzzle || !path) return arg_error("null pointer");
  return guarded([&] { puzzle->p.save(path, binary != 0); });
}

int jd_puzzle_load(const char* path, jd_puzzle** out) {
  if (!path || !out) return arg_error("null pointer");
  return guarded([&] { *out = new jd_puzzle{jdim::Puzzle::load(path)}; });
}

void jd_puzzle_free(jd_puzzle* puzzle) { delete puzzle; }

/* --------------------------------------------------- matrices ----- */

int jd_matrix_dim(const jd_matrix* m, int* out) {
  if (!m || !out) return arg_error("null pointer");
  *out = m->m.dim;
  return JD_OK;
}

int jd_matrix_entry(const jd_matrix* m, int i, int j, double* out) {
  if (!m || !out) return arg_error("null pointer");
  if (i < 0 || i >= m->m.dim || j < 0 || j >= m->m.dim)
    return arg_error("matrix index out of range");
  *out = m->m.weight(i, j);
  return JD_OK;
}

int jd_matrix_nonzero_count(const jd_matrix* m, long long* out) {
  if (!m || !out) return arg_error("null pointer");
  *out = static_cast<long long>(m->m.nonzero_count());
  return JD_OK;
}

int jd_matrix_power(const jd_matrix* m, double t, jd_matrix** out) {
  if (!m || !out) return arg_error("null pointer");
  return guarded([&] { *out = new jd_matrix{jdim::entrywise_power(m->m, t)}; });
}

int jd_matrix_spectral_radius(const jd_matrix* m, double tol, int max_iter,
                              int threads, double* out_radius,
                              int* out_converged, int* out_primitive,
                              int* out_period) {
  if (!m || !out_radius) return arg_error("null pointer");
  return guarded([&] {
    jdim::PerronOptions opt;
    if (tol > 0) opt.tol = tol;
    if (max_iter > 0) opt.max_iterations = max_iter;
    if (threads > 0) opt.threads = threads;
    jdim::PerronResult r = jdim::spectral_radius(m->m, opt);
    *out_radius = r.radius;
    if (out_converged) *out_converged = r.converged ? 1 : 0;
    if (out_primitive) *out_primitive = r.primitive ? 1 : 0;
    if (out_period) *out_period = r.period;
  });
}

int jd_matrix_perron_root_in_t(const jd_matrix* m, double t_lo, double t_hi,
                               double tol_t, double* out_t, double* out_lambda,
                               int* out_monotone) {
  if (!m || !out_t) return arg_error("null pointer");
  return guarded([&] {
    jdim::RootInT r = jdim::perron_root_in_t(m->m, t_lo, t_hi,
                                             tol_t > 0 ? tol_t : 1e-6);
    *out_t = r.t;
    if (out_lambda) *out_lambda = r.lambda;
    if (out_monotone) *out_monotone = r.monotone ? 1 : 0;
  });
}

int jd_matrix_pressure_curve(const jd_matrix* m, const char* estimator,
                             const double* t_grid, int t_count,
                             jd_curve** out) {
  if (!m || !out) return arg_error("null pointer");
  if (!t_grid || t_count <= 0) return arg_error("t grid is empty");
  return guarded([&] {
    jdim::PressureCurve c;
    c.estimator = estimator ? estimator : "matrix";
    c.branch_count = static_cast<double>(m->m.dim);
    bool any_finite = false;
    bool cap_warned = false;
    for (int k = 0; k < t_count; ++k) {
      double t = t_grid[k];
      jdim::PerronResult r =
          jdim::spectral_radius(jdim::entrywise_power(m->m, t));
      double v = r.radius > 0
                     ? std::log(r.radius)
                     : -std::numeric_limits<double>::infinity();
      if (std::isfinite(v)) any_finite = true;
      if (!r.converged && !cap_warned) {
        c.warnings.push_back(
            "power iteration hit the iteration cap at t = " +
            std::to_string(t) + "; the spectral radius may be inaccurate");
        cap_warned = true;
      }
      c.samples.push_back({t, v});
    }
    c.sentinel = !any_finite;
    *out = new jd_curve{std::move(c)};
  });
}

int jd_matrix_triplets(const jd_matrix* m, char* buf, int cap, int* needed) {
  if (!m) return arg_error("null pointer");
  return guarded([&] { copy_string(jdim::dump_triplets(m->m), buf, cap, needed); });
}

void jd_matrix_free(jd_matrix* m) { delete m; }

}  // extern "C"
