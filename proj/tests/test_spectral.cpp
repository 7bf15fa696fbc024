#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "core/errors.hpp"
#include "core/spectral.hpp"

using jdim::PerronResult;
using jdim::RootInT;
using jdim::SparseNonnegMatrix;

namespace {

SparseNonnegMatrix from_dense(const std::vector<std::vector<double>>& a) {
  SparseNonnegMatrix m = SparseNonnegMatrix::zero(static_cast<int>(a.size()));
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j)
      if (a[i][j] != 0.0) m.add(i, j, a[i][j]);
  return m;
}

}  // namespace

TEST_CASE("sparse storage basics") {
  SparseNonnegMatrix m = SparseNonnegMatrix::zero(3);
  CHECK(m.empty());
  m.add(0, 1, 0.5);
  m.add(0, 1, 0.25);  // accumulates
  m.add(2, 0, 1.0);
  m.add(1, 1, 0.0);  // dropped
  CHECK(m.weight(0, 1) == 0.75);
  CHECK(m.weight(1, 1) == 0.0);
  CHECK(m.nonzero_count() == 2);
  CHECK(!m.empty());
}

TEST_CASE("primitivity classification") {
  // Swap matrix: irreducible with period 2.
  auto swap2 = from_dense({{0.0, 1.0}, {1.0, 0.0}});
  auto p = jdim::is_primitive(swap2);
  CHECK(p.irreducible);
  CHECK(p.period == 2);
  CHECK(!p.primitive);

  // Fibonacci-like matrix: primitive.
  auto fib = from_dense({{1.0, 1.0}, {1.0, 0.0}});
  auto q = jdim::is_primitive(fib);
  CHECK(q.irreducible);
  CHECK(q.period == 1);
  CHECK(q.primitive);

  // Identity: two components, not irreducible.
  auto id2 = from_dense({{1.0, 0.0}, {0.0, 1.0}});
  auto r = jdim::is_primitive(id2);
  CHECK(!r.irreducible);
  CHECK(!r.primitive);
}

TEST_CASE("spectral radius of small matrices") {
  auto m = from_dense({{2.0, 1.0}, {1.0, 2.0}});
  PerronResult r = jdim::spectral_radius(m);
  CHECK(r.converged);
  CHECK(r.radius == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.iterations > 0);
  CHECK(r.irreducible);
  CHECK(r.primitive);

  auto swap2 = from_dense({{0.0, 1.0}, {1.0, 0.0}});
  PerronResult s = jdim::spectral_radius(swap2);
  CHECK(s.converged);
  CHECK(s.radius == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.period == 2);

  auto half = from_dense({{0.5, 0.5}, {0.5, 0.5}});
  PerronResult h = jdim::spectral_radius(half);
  CHECK(h.radius == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("empty matrix has zero radius") {
  SparseNonnegMatrix m = SparseNonnegMatrix::zero(4);
  PerronResult r = jdim::spectral_radius(m);
  CHECK(r.radius == 0.0);
}

TEST_CASE("entrywise powers") {
  auto m = from_dense({{4.0}});
  auto h = jdim::entrywise_power(m, 0.5);
  CHECK(h.weight(0, 0) == doctest::Approx(2.0).epsilon(1e-15));

  auto a = from_dense({{0.5, 0.25}, {0.0, 0.125}});
  auto same = jdim::entrywise_power(a, 1.0);
  CHECK(same.weight(0, 0) == 0.5);
  CHECK(same.weight(0, 1) == 0.25);
  CHECK(same.weight(1, 1) == 0.125);
  auto sq = jdim::entrywise_power(a, 2.0);
  CHECK(sq.weight(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(sq.weight(0, 1) == doctest::Approx(0.0625).epsilon(1e-15));
  // Structural zeros stay structural for every exponent.
  CHECK(sq.weight(1, 0) == 0.0);
  CHECK(jdim::entrywise_power(a, 0.0).weight(1, 0) == 0.0);
  CHECK(jdim::entrywise_power(a, 0.0).weight(0, 0) == 1.0);
  CHECK(sq.nonzero_count() == a.nonzero_count());
}

TEST_CASE("radius is monotone in the entries") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    int n = 2 + static_cast<int>(u(rng) * 6);
    SparseNonnegMatrix a = SparseNonnegMatrix::zero(n);
    SparseNonnegMatrix b = SparseNonnegMatrix::zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (u(rng) < 0.4) continue;
        double w = u(rng);
        a.add(i, j, w);
        b.add(i, j, w + u(rng) * 0.5);
      }
    double ra = jdim::spectral_radius(a).radius;
    double rb = jdim::spectral_radius(b).radius;
    CHECK(ra <= rb + 1e-9);
  }
}

TEST_CASE("row-stochastic matrices have unit radius") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const int n = 50;
  SparseNonnegMatrix m = SparseNonnegMatrix::zero(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> w(4);
    double sum = 0.0;
    for (double& x : w) {
      x = u(rng);
      sum += x;
    }
    for (int k = 0; k < 4; ++k)
      m.add(i, (i * 7 + k * 11) % n, w[k] / sum);
  }
  PerronResult r = jdim::spectral_radius(m);
  CHECK(r.converged);
  CHECK(r.radius == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("perron root in t for constant-entry matrices") {
  // Entries 1/2 on a full 2x2: lambda(t) = 2 * 2^-t, zero of log at t = 1.
  auto half = from_dense({{0.5, 0.5}, {0.5, 0.5}});
  RootInT r = jdim::perron_root_in_t(half, 0.1, 2.0);
  CHECK(std::abs(r.t - 1.0) <= 1e-6);
  CHECK(std::abs(r.lambda - 1.0) <= 1e-8);
  CHECK(r.monotone);
  CHECK(r.evaluations > 0);

  // Entries 1/4: lambda(t) = 2 * 4^-t crosses 1 at t = 1/2.
  auto quarter = from_dense({{0.25, 0.25}, {0.25, 0.25}});
  RootInT q = jdim::perron_root_in_t(quarter, 0.1, 2.0);
  CHECK(std::abs(q.t - 0.5) <= 1e-6);
}

TEST_CASE("log of the perron root decreases and is convex in t") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  SparseNonnegMatrix m = SparseNonnegMatrix::zero(5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if ((i + j) % 2 == 0 || j == (i + 1) % 5) m.add(i, j, u(rng));
  std::vector<double> ts = {0.2, 0.6, 1.0, 1.4, 1.8};
  std::vector<double> lam;
  for (double t : ts)
    lam.push_back(
        std::log(jdim::spectral_radius(jdim::entrywise_power(m, t)).radius));
  for (std::size_t k = 1; k < lam.size(); ++k) CHECK(lam[k] < lam[k - 1]);
  for (std::size_t k = 1; k + 1 < lam.size(); ++k)
    CHECK(lam[k] <= 0.5 * (lam[k - 1] + lam[k + 1]) + 1e-9);
}

TEST_CASE("bracket without a sign change is an error") {
  auto quarter = from_dense({{0.25, 0.25}, {0.25, 0.25}});
  try {
    (void)jdim::perron_root_in_t(quarter, 1.5, 2.0);
    CHECK(false);
  } catch (const jdim::Error& e) {
    CHECK(e.code() == jdim::ErrorCode::no_sign_change);
    CHECK(std::string(e.what()).find("1.5") != std::string::npos);
  }
}

TEST_CASE("empty matrix cannot host a root search") {
  SparseNonnegMatrix m = SparseNonnegMatrix::zero(3);
  try {
    (void)jdim::perron_root_in_t(m, 0.1, 2.0);
    CHECK(false);
  } catch (const jdim::Error& e) {
    CHECK(e.code() == jdim::ErrorCode::empty_matrix);
  }
}

TEST_CASE("triplet dump round-trips exactly") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(1e-8, 3.0);
  SparseNonnegMatrix m = SparseNonnegMatrix::zero(7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      if ((i * 3 + j) % 4 == 0) m.add(i, j, u(rng) * std::pow(10.0, i - 3));
  std::string text = jdim::dump_triplets(m);
  SparseNonnegMatrix back = jdim::parse_triplets(text);
  REQUIRE(back.dim == m.dim);
  REQUIRE(back.nonzero_count() == m.nonzero_count());
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) CHECK(back.weight(i, j) == m.weight(i, j));
}

TEST_CASE("malformed triplet text is rejected") {
  CHECK_THROWS_AS((void)jdim::parse_triplets("not a matrix"), jdim::Error);
  CHECK_THROWS_AS((void)jdim::parse_triplets("2\n5 5 1.0\n"), jdim::Error);
}
