#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "juliadim.h"

namespace {

struct MapGuard {
  jd_map* m = nullptr;
  ~MapGuard() { jd_map_free(m); }
};
struct CurveGuard {
  jd_curve* c = nullptr;
  ~CurveGuard() { jd_curve_free(c); }
};
struct PuzzleGuard {
  jd_puzzle* p = nullptr;
  ~PuzzleGuard() { jd_puzzle_free(p); }
};
struct MatrixGuard {
  jd_matrix* m = nullptr;
  ~MatrixGuard() { jd_matrix_free(m); }
};

jd_map* squaring_map() {
  jd_map* m = nullptr;
  REQUIRE(jd_map_unicritical(2, 0.0, 0.0, &m) == JD_OK);
  return m;
}

}  // namespace

TEST_CASE("version and status names") {
  REQUIRE(jd_version() != nullptr);
  CHECK(std::strlen(jd_version()) > 0);
  CHECK(std::string(jd_status_name(JD_OK)) == "ok");
  CHECK(std::string(jd_status_name(JD_ERR_POLE)) == "pole");
  CHECK(std::string(jd_status_name(JD_ERR_EMPTY_MATRIX)) == "empty-matrix");
  CHECK(std::string(jd_status_name(JD_ERR_ALL_PRUNED)) == "all-pruned");
  CHECK(std::string(jd_status_name(JD_ERR_IO)) == "io");
  CHECK(std::string(jd_status_name(1234)) == "unknown");
  REQUIRE(jd_last_error() != nullptr);
}

TEST_CASE("map lifecycle and evaluation") {
  MapGuard g;
  REQUIRE(jd_map_unicritical(2, -1.0, 0.0, &g.m) == JD_OK);
  int deg = 0;
  CHECK(jd_map_degree(g.m, &deg) == JD_OK);
  CHECK(deg == 2);

  double re = 0.0, im = 0.0;
  CHECK(jd_map_evaluate(g.m, 1.0, 1.0, &re, &im) == JD_OK);
  CHECK(re == doctest::Approx(-1.0));
  CHECK(im == doctest::Approx(2.0));

  double dm = 0.0;
  CHECK(jd_map_derivative_modulus(g.m, 0.5, 0.0, JD_METRIC_EUCLIDEAN, &dm) ==
        JD_OK);
  CHECK(dm == doctest::Approx(1.0));

  double lo = 0.0, hi = 0.0;
  CHECK(jd_map_derivative_disk_bounds(g.m, 1.0, 0.0, 0.25,
                                      JD_METRIC_EUCLIDEAN, &lo, &hi) == JD_OK);
  CHECK(lo == doctest::Approx(1.5));
  CHECK(hi == doctest::Approx(2.5));

  double dist = 0.0;
  CHECK(jd_map_critical_distance(g.m, 3.0, 4.0, &dist) == JD_OK);
  CHECK(dist == doctest::Approx(5.0));

  // Fiber of 0 under z^2 - 1 is {-1, 1}.
  int count = 0;
  REQUIRE(jd_map_preimages(g.m, 0.0, 0.0, nullptr, nullptr, 0, &count) ==
          JD_OK);
  REQUIRE(count == 2);
  std::vector<double> pts(2 * count);
  std::vector<int> mults(count);
  REQUIRE(jd_map_preimages(g.m, 0.0, 0.0, pts.data(), mults.data(), count,
                           &count) == JD_OK);
  CHECK(pts[0] == doctest::Approx(-1.0));
  CHECK(pts[2] == doctest::Approx(1.0));
  CHECK(mults[0] == 1);
  CHECK(mults[1] == 1);

  int small = 0;
  CHECK(jd_map_preimages(g.m, 0.0, 0.0, pts.data(), nullptr, 1, &small) ==
        JD_ERR_INVALID_ARGUMENT);
  CHECK(std::string(jd_last_error()).find("buffer too small") !=
        std::string::npos);

  int needed = 0;
  REQUIRE(jd_map_describe(g.m, nullptr, 0, &needed) == JD_OK);
  REQUIRE(needed > 1);
  std::vector<char> buf(static_cast<std::size_t>(needed));
  REQUIRE(jd_map_describe(g.m, buf.data(), needed, &needed) == JD_OK);
  CHECK(std::strlen(buf.data()) == static_cast<std::size_t>(needed - 1));
}

TEST_CASE("constructor and pole errors set the thread message") {
  jd_map* m = nullptr;
  CHECK(jd_map_unicritical(1, 0.0, 0.0, &m) == JD_ERR_INVALID_ARGUMENT);
  CHECK(m == nullptr);
  CHECK(std::string(jd_last_error()).find("degree") != std::string::npos);

  // f(z) = (z^2 + 1) / z has a pole at the origin.
  MapGuard g;
  double num[] = {1.0, 0.0, 0.0, 0.0, 1.0, 0.0};
  double den[] = {0.0, 0.0, 1.0, 0.0};
  REQUIRE(jd_map_rational(num, 3, den, 2, &g.m) == JD_OK);
  double re = 0.0, im = 0.0;
  CHECK(jd_map_evaluate(g.m, 0.0, 0.0, &re, &im) == JD_ERR_POLE);
}

TEST_CASE("green potential, rays and base points") {
  MapGuard g;
  g.m = squaring_map();
  double pot = 0.0;
  CHECK(jd_map_green_potential(g.m, std::exp(0.3), 0.0, &pot) == JD_OK);
  CHECK(pot == doctest::Approx(0.3).epsilon(1e-9));

  double re = 0.0, im = 0.0;
  CHECK(jd_map_ray_point(g.m, 0.0, 0.25, &re, &im) == JD_OK);
  CHECK(re == doctest::Approx(std::exp(0.25)).epsilon(1e-9));
  CHECK(std::abs(im) < 1e-9);

  CHECK(jd_map_base_point(g.m, 0.2, "0", &re, &im) == JD_OK);
  CHECK(re == doctest::Approx(std::exp(0.1)).epsilon(1e-9));
  CHECK(std::abs(im) < 1e-9);

  CHECK(jd_map_base_point(g.m, 0.2, "nonsense", &re, &im) ==
        JD_ERR_INVALID_ARGUMENT);
}

TEST_CASE("tree pressure through the C API") {
  MapGuard g;
  g.m = squaring_map();
  jd_tree_params params;
  jd_tree_params_init(&params);
  params.depth = 12;
  double grid[] = {0.5, 1.0, 1.5};

  CurveGuard c;
  REQUIRE(jd_tree_pressure(g.m, "tree-plain", 1.0, 0.0, &params, grid, 3,
                           &c.c) == JD_OK);
  int size = 0;
  REQUIRE(jd_curve_size(c.c, &size) == JD_OK);
  REQUIRE(size == 3);
  const double log2 = std::log(2.0);
  for (int k = 0; k < 3; ++k) {
    double t = 0.0, v = 0.0;
    REQUIRE(jd_curve_sample(c.c, k, &t, &v) == JD_OK);
    CHECK(t == grid[k]);
    CHECK(std::abs(v - (1.0 - t) * log2) < 1e-9);
  }
  double branches = 0.0;
  CHECK(jd_curve_branch_count(c.c, &branches) == JD_OK);
  CHECK(branches == doctest::Approx(4096.0));
  int sentinel = 1;
  CHECK(jd_curve_is_sentinel(c.c, &sentinel) == JD_OK);
  CHECK(sentinel == 0);
  const char* est = nullptr;
  CHECK(jd_curve_estimator(c.c, &est) == JD_OK);
  CHECK(std::string(est) == "tree-plain");

  double t0 = 0.0, bracket = 0.0;
  int monotone = 0, lower = 1;
  REQUIRE(jd_curve_first_zero(c.c, nullptr, nullptr, &t0, &bracket, &monotone,
                              &lower) == JD_OK);
  CHECK(std::abs(t0 - 1.0) < 1e-9);
  CHECK(monotone == 1);
  CHECK(lower == 0);

  jd_curve* bad = nullptr;
  CHECK(jd_tree_pressure(g.m, "tree-bogus", 1.0, 0.0, &params, grid, 3,
                         &bad) == JD_ERR_INVALID_ARGUMENT);
  CHECK(std::string(jd_last_error()).find("tree-msample") !=
        std::string::npos);
}

namespace {

int tree_eval_cb(double t, double* value, void* ctx) {
  jd_map* m = static_cast<jd_map*>(ctx);
  jd_tree_params params;
  jd_tree_params_init(&params);
  params.depth = 12;
  jd_curve* c = nullptr;
  int rc = jd_tree_pressure(m, "tree-plain", 1.0, 0.0, &params, &t, 1, &c);
  if (rc != JD_OK) return rc;
  rc = jd_curve_sample(c, 0, nullptr, value);
  jd_curve_free(c);
  return rc;
}

int failing_cb(double, double*, void*) { return JD_ERR_IO; }

}  // namespace

TEST_CASE("zero refinement via the evaluation callback") {
  MapGuard g;
  g.m = squaring_map();
  jd_tree_params params;
  jd_tree_params_init(&params);
  params.depth = 12;
  double grid[] = {0.5, 1.5};
  CurveGuard c;
  REQUIRE(jd_tree_pressure(g.m, "tree-plain", 1.0, 0.0, &params, grid, 2,
                           &c.c) == JD_OK);

  double t0 = 0.0, bracket = 1.0;
  REQUIRE(jd_curve_first_zero(c.c, tree_eval_cb, g.m, &t0, &bracket, nullptr,
                              nullptr) == JD_OK);
  CHECK(bracket <= 1e-4);
  CHECK(std::abs(t0 - 1.0) < 1e-4);

  CHECK(jd_curve_first_zero(c.c, failing_cb, nullptr, &t0, &bracket, nullptr,
                            nullptr) == JD_ERR_NON_CONVERGENCE);
  CHECK(std::string(jd_last_error()).find("io") != std::string::npos);
}

TEST_CASE("pullback pressure and telescope diagnostics") {
  MapGuard g;
  g.m = squaring_map();
  jd_pullback_params params;
  jd_pullback_params_init(&params);
  CHECK(params.kappa == doctest::Approx(1.2));
  params.depth = 1;
  double t1 = 1.0;

  CurveGuard c;
  REQUIRE(jd_pullback_pressure(g.m, 1.0, 0.0, &params, &t1, 1, &c.c) ==
          JD_OK);
  double t = 0.0, v = 0.0;
  REQUIRE(jd_curve_sample(c.c, 0, &t, &v) == JD_OK);
  // Enclosure radius 1.2 * 0.1 / 2 = 0.06, so the step bound is 2 * 1.06.
  CHECK(v == doctest::Approx(std::log(2.0 / 2.12)).epsilon(1e-12));
  const char* est = nullptr;
  CHECK(jd_curve_estimator(c.c, &est) == JD_OK);
  CHECK(std::string(est) == "pullback");

  params.depth = 3;
  params.radius = 0.05;
  int count = 0;
  double max_abs = -1.0, sat = -1.0;
  REQUIRE(jd_telescope(g.m, 1.0, 0.0, &params, nullptr, 0, &count, &max_abs,
                       &sat) == JD_OK);
  REQUIRE(count == 8);
  CHECK(sat == 0.0);
  CHECK(max_abs > 0.0);
  CHECK(max_abs < 0.07);

  std::vector<double> values(static_cast<std::size_t>(count));
  REQUIRE(jd_telescope(g.m, 1.0, 0.0, &params, values.data(), count, &count,
                       nullptr, nullptr) == JD_OK);
  for (double x : values) {
    CHECK(x <= 1e-15);
    CHECK(x >= -0.07);
  }

  CHECK(jd_telescope(g.m, 1.0, 0.0, &params, values.data(), 4, &count,
                     nullptr, nullptr) == JD_ERR_INVALID_ARGUMENT);
  CHECK(std::string(jd_last_error()).find("telescope buffer too small") !=
        std::string::npos);
}

TEST_CASE("puzzle lifecycle through the C API") {
  MapGuard g;
  g.m = squaring_map();
  jd_puzzle_params params;
  jd_puzzle_params_init(&params);
  CHECK(params.eta == doctest::Approx(0.2));

  PuzzleGuard p;
  REQUIRE(jd_puzzle_create(g.m, &params, nullptr, &p.p) == JD_OK);
  int depth = -1;
  CHECK(jd_puzzle_depth(p.p, &depth) == JD_OK);
  CHECK(depth == 0);
  REQUIRE(jd_puzzle_refine_to(p.p, 4) == JD_OK);
  CHECK(jd_puzzle_depth(p.p, &depth) == JD_OK);
  CHECK(depth == 4);

  int count = 0;
  REQUIRE(jd_puzzle_piece_count(p.p, 0, &count) == JD_OK);
  CHECK(count == 2);
  REQUIRE(jd_puzzle_piece_count(p.p, 4, &count) == JD_OK);
  CHECK(count == 32);

  int tcount = 0;
  REQUIRE(jd_puzzle_transition_count(p.p, 0, &tcount) == JD_OK);
  REQUIRE(tcount == 4);
  for (int k = 0; k < tcount; ++k) {
    int from = -1, to = -1, s = 0;
    REQUIRE(jd_puzzle_transition(p.p, 0, k, &from, &to, &s) == JD_OK);
    CHECK(s == 1);
    CHECK(from >= 0);
    CHECK(from < 2);
    CHECK(to >= 0);
    CHECK(to < 2);
  }

  double d0 = 0.0, d4 = 0.0;
  REQUIRE(jd_puzzle_max_diam(p.p, 0, &d0) == JD_OK);
  REQUIRE(jd_puzzle_max_diam(p.p, 4, &d4) == JD_OK);
  CHECK(d4 < d0);

  unsigned long long missed = 7;
  REQUIRE(jd_puzzle_misclassified(p.p, 4, &missed) == JD_OK);
  CHECK(missed == 0);

  double y_re = 0.0, y_im = 0.0, diam = 0.0, dist = 0.0;
  REQUIRE(jd_puzzle_piece(p.p, 4, 0, &y_re, &y_im, &diam, &dist) == JD_OK);
  CHECK(diam > 0.0);
  CHECK(dist > 0.5);
  int inside = 0;
  REQUIRE(jd_puzzle_member(p.p, y_re, y_im, 4, 0, &inside) == JD_OK);
  CHECK(inside == 1);

  int len = 0;
  REQUIRE(jd_puzzle_piece_word(p.p, 4, 0, nullptr, 0, &len) == JD_OK);
  REQUIRE(len == 5);
  std::vector<int> word(static_cast<std::size_t>(len));
  REQUIRE(jd_puzzle_piece_word(p.p, 4, 0, word.data(), len, &len) == JD_OK);
  for (int w : word) {
    CHECK(w >= 0);
    CHECK(w < 2);
  }
  CHECK(jd_puzzle_piece_word(p.p, 4, 0, word.data(), 2, &len) ==
        JD_ERR_INVALID_ARGUMENT);

  // Angle lists: co-landing pair works, a non-closed singleton does not.
  MapGuard basilica;
  REQUIRE(jd_map_unicritical(2, -1.0, 0.0, &basilica.m) == JD_OK);
  PuzzleGuard q;
  REQUIRE(jd_puzzle_create(basilica.m, &params, "1/3, 2/3", &q.p) == JD_OK);
  REQUIRE(jd_puzzle_piece_count(q.p, 0, &count) == JD_OK);
  CHECK(count == 2);
  jd_puzzle* bad = nullptr;
  CHECK(jd_puzzle_create(basilica.m, &params, "1/3", &bad) ==
        JD_ERR_INVALID_ARGUMENT);
}

TEST_CASE("puzzle matrices and spectral calls") {
  MapGuard g;
  g.m = squaring_map();
  jd_puzzle_params params;
  jd_puzzle_params_init(&params);
  PuzzleGuard p;
  REQUIRE(jd_puzzle_create(g.m, &params, nullptr, &p.p) == JD_OK);
  REQUIRE(jd_puzzle_refine_to(p.p, 6) == JD_OK);

  MatrixGuard m;
  REQUIRE(jd_puzzle_matrix(p.p, 0, "plain", -1.0, &m.m) == JD_OK);
  int dim = 0;
  REQUIRE(jd_matrix_dim(m.m, &dim) == JD_OK);
  REQUIRE(dim == 2);
  long long nnz = 0;
  REQUIRE(jd_matrix_nonzero_count(m.m, &nnz) == JD_OK);
  CHECK(nnz == 4);
  double w = 0.0;
  REQUIRE(jd_matrix_entry(m.m, 0, 0, &w) == JD_OK);
  CHECK(w > 0.40);
  CHECK(w < 0.50);
  CHECK(jd_matrix_entry(m.m, 0, 5, &w) == JD_ERR_INVALID_ARGUMENT);

  MatrixGuard sq;
  REQUIRE(jd_matrix_power(m.m, 2.0, &sq.m) == JD_OK);
  double w2 = 0.0;
  REQUIRE(jd_matrix_entry(m.m, 0, 0, &w) == JD_OK);
  REQUIRE(jd_matrix_entry(sq.m, 0, 0, &w2) == JD_OK);
  CHECK(w2 == doctest::Approx(w * w).epsilon(1e-14));

  double radius = 0.0;
  int converged = 0, primitive = 0, period = 0;
  REQUIRE(jd_matrix_spectral_radius(m.m, 0.0, 0, 0, &radius, &converged,
                                    &primitive, &period) == JD_OK);
  CHECK(converged == 1);
  CHECK(primitive == 1);
  CHECK(period == 1);
  CHECK(radius > 0.8);
  CHECK(radius < 1.0);

  double troot = 0.0, lambda = 0.0;
  int monotone = 0;
  REQUIRE(jd_matrix_perron_root_in_t(m.m, 0.1, 2.0, 1e-6, &troot, &lambda,
                                     &monotone) == JD_OK);
  CHECK(troot > 0.5);
  CHECK(troot < 1.0);
  CHECK(std::abs(lambda - 1.0) < 1e-6);
  CHECK(monotone == 1);

  double grid[] = {0.5, 1.0, 1.5};
  CurveGuard c;
  REQUIRE(jd_matrix_pressure_curve(m.m, "mcm-plain", grid, 3, &c.c) == JD_OK);
  double t0 = 0.0;
  REQUIRE(jd_curve_first_zero(c.c, nullptr, nullptr, &t0, nullptr, nullptr,
                              nullptr) == JD_OK);
  CHECK(std::abs(t0 - troot) < 5e-3);

  // Deeper level roots move toward 1.
  MatrixGuard deep;
  REQUIRE(jd_puzzle_matrix(p.p, 6, "plain", -1.0, &deep.m) == JD_OK);
  double troot6 = 0.0;
  REQUIRE(jd_matrix_perron_root_in_t(deep.m, 0.1, 2.0, 1e-6, &troot6, nullptr,
                                     nullptr) == JD_OK);
  CHECK(std::abs(troot6 - 1.0) < 0.03);
  CHECK(troot6 > troot);

  jd_matrix* none = nullptr;
  CHECK(jd_puzzle_matrix(p.p, 3, "restricted", 1e9, &none) ==
        JD_ERR_EMPTY_MATRIX);
  CHECK(std::string(jd_last_error()).find("no admissible pieces") !=
        std::string::npos);
  CHECK(jd_puzzle_matrix(p.p, 3, "bogus", -1.0, &none) ==
        JD_ERR_INVALID_ARGUMENT);
  CHECK(std::string(jd_last_error()).find("multiple") != std::string::npos);

  int needed = 0;
  REQUIRE(jd_matrix_triplets(m.m, nullptr, 0, &needed) == JD_OK);
  REQUIRE(needed > 1);
  std::vector<char> text(static_cast<std::size_t>(needed));
  REQUIRE(jd_matrix_triplets(m.m, text.data(), needed, &needed) == JD_OK);
  CHECK(std::string(text.data()).find("2") == 0);
}

TEST_CASE("puzzle save and load round-trip") {
  MapGuard g;
  g.m = squaring_map();
  jd_puzzle_params params;
  jd_puzzle_params_init(&params);
  PuzzleGuard p;
  REQUIRE(jd_puzzle_create(g.m, &params, nullptr, &p.p) == JD_OK);
  REQUIRE(jd_puzzle_refine_to(p.p, 3) == JD_OK);

  const char* path = "capi_puzzle_roundtrip.jdpz";
  REQUIRE(jd_puzzle_save(p.p, path, 1) == JD_OK);
  PuzzleGuard q;
  REQUIRE(jd_puzzle_load(path, &q.p) == JD_OK);
  std::remove(path);

  int pc = 0, qc = 0;
  REQUIRE(jd_puzzle_piece_count(p.p, 3, &pc) == JD_OK);
  REQUIRE(jd_puzzle_piece_count(q.p, 3, &qc) == JD_OK);
  REQUIRE(pc == qc);
  for (int i = 0; i < pc; ++i) {
    double ar = 0, ai = 0, br = 0, bi = 0;
    REQUIRE(jd_puzzle_piece(p.p, 3, i, &ar, &ai, nullptr, nullptr) == JD_OK);
    REQUIRE(jd_puzzle_piece(q.p, 3, i, &br, &bi, nullptr, nullptr) == JD_OK);
    CHECK(ar == br);
    CHECK(ai == bi);
  }

  {
    std::FILE* f = std::fopen(path, "wb");
    REQUIRE(f);
    std::fputs("garbage", f);
    std::fclose(f);
  }
  jd_puzzle* broken = nullptr;
  CHECK(jd_puzzle_load(path, &broken) == JD_ERR_IO);
  std::remove(path);
}

TEST_CASE("aitken extrapolation") {
  double zeros[] = {0.8, 0.9, 0.95};
  double out = 0.0;
  int valid = 0;
  REQUIRE(jd_aitken(zeros, 3, &out, &valid) == JD_OK);
  CHECK(valid == 1);
  CHECK(out == doctest::Approx(1.0).epsilon(1e-9));

  REQUIRE(jd_aitken(zeros, 2, &out, &valid) == JD_OK);
  CHECK(valid == 0);
  CHECK(out == doctest::Approx(0.9));

  CHECK(jd_aitken(nullptr, 3, &out, &valid) == JD_ERR_INVALID_ARGUMENT);
  CHECK(jd_aitken(zeros, 0, &out, &valid) == JD_ERR_INVALID_ARGUMENT);
}
