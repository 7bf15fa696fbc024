#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/map.hpp"
#include "core/pullback.hpp"
#include "core/tree.hpp"

using jdim::cpx;
using jdim::DiskEnclosure;
using jdim::Map;
using jdim::PullbackParams;
using jdim::PullbackResult;

namespace {

PullbackParams pparams(int depth, double radius, double kappa = 1.2) {
  PullbackParams p;
  p.depth = depth;
  p.radius = radius;
  p.kappa = kappa;
  return p;
}

}  // namespace

TEST_CASE("disk propagation through a regular branch") {
  Map f = Map::unicritical(2, 0.0);
  DiskEnclosure image{cpx(1.0, 0.0), 0.1, false};
  DiskEnclosure e = jdim::propagate_disk(f, cpx(1.0, 0.0), image, 1.2);
  CHECK(std::abs(e.center - cpx(1.0, 0.0)) == 0.0);
  CHECK(e.radius == doctest::Approx(0.06).epsilon(1e-14));
  CHECK(!e.saturated);

  DiskEnclosure e2 = jdim::propagate_disk(f, cpx(-1.0, 0.0), image, 1.2);
  CHECK(e2.radius == doctest::Approx(0.06).epsilon(1e-14));
  CHECK(!e2.saturated);
}

TEST_CASE("disk propagation saturates at half the critical distance") {
  Map f = Map::unicritical(2, 0.0);
  DiskEnclosure image{cpx(0.01, 0.0), 0.1, false};
  DiskEnclosure e = jdim::propagate_disk(f, cpx(0.1, 0.0), image, 1.2);
  CHECK(e.radius == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(e.saturated);
}

TEST_CASE("derivative underflow near the critical set is an error") {
  Map f = Map::unicritical(2, 0.0);
  DiskEnclosure image{cpx(0.0, 0.0), 0.01, false};
  try {
    (void)jdim::propagate_disk(f, cpx(1e-13, 0.0), image, 1.2);
    CHECK(false);
  } catch (const jdim::Error& e) {
    CHECK(e.code() == jdim::ErrorCode::invalid_argument);
    CHECK(std::string(e.what()).find("underflow") != std::string::npos);
  }
}

TEST_CASE("one-step pullback pressure on the circle") {
  Map f = Map::unicritical(2, 0.0);
  std::vector<double> ts = {1.0};
  PullbackResult r =
      jdim::pullback_pressure(f, cpx(1.0, 0.0), pparams(1, 0.1), ts);
  // Enclosures D(+-1, 0.06); sup |f'| over each is 2.12.
  CHECK(r.samples[0].value ==
        doctest::Approx(std::log(2.0 / 2.12)).epsilon(1e-12));
  CHECK(r.branch_count == 2.0);
  CHECK(r.saturated_steps == 0);
  CHECK(r.total_steps == 2);
}

TEST_CASE("pullback pressure stays in a narrow band for the circle") {
  Map f = Map::unicritical(2, 0.0);
  std::vector<double> ts = {1.0};
  for (double r0 : {0.1, 0.05, 0.025}) {
    PullbackResult r =
        jdim::pullback_pressure(f, cpx(1.0, 0.0), pparams(5, r0), ts);
    CHECK(r.samples[0].value <= 0.0);
    CHECK(r.samples[0].value >= -0.07);
  }
}

TEST_CASE("pullback pressure grows as the root radius shrinks") {
  Map f = Map::unicritical(2, cpx(-0.5, 0.0));
  std::vector<double> ts = {0.4, 0.9, 1.4, 1.9};
  cpx base(1.4, 0.0);
  PullbackResult big = jdim::pullback_pressure(f, base, pparams(6, 0.1), ts);
  PullbackResult mid = jdim::pullback_pressure(f, base, pparams(6, 0.05), ts);
  PullbackResult fin = jdim::pullback_pressure(f, base, pparams(6, 0.025), ts);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    CHECK(big.samples[k].value <= mid.samples[k].value + 1e-12);
    CHECK(mid.samples[k].value <= fin.samples[k].value + 1e-12);
  }
}

TEST_CASE("pullback pressure never exceeds the plain tree pressure") {
  Map f = Map::unicritical(2, cpx(-1.0, 0.0));
  std::vector<double> ts = {0.3, 0.8, 1.3, 1.8};
  cpx base(2.0, 0.0);
  PullbackResult pull = jdim::pullback_pressure(f, base, pparams(6, 0.05), ts);
  jdim::TreeParams tp;
  tp.depth = 6;
  jdim::TreeResult plain =
      jdim::tree_pressure(f, base, jdim::TreeEstimator::plain, tp, ts);
  for (std::size_t k = 0; k < ts.size(); ++k)
    CHECK(pull.samples[k].value <= plain.samples[k].value + 1e-12);
}

TEST_CASE("pullback pressure converges to plain as the radius vanishes") {
  Map f = Map::unicritical(2, 0.0);
  std::vector<double> ts = {1.0};
  PullbackResult r =
      jdim::pullback_pressure(f, cpx(1.0, 0.0), pparams(4, 1e-8), ts);
  CHECK(std::abs(r.samples[0].value) < 1e-6);
}

TEST_CASE("root radius is limited by the critical distance") {
  Map f = Map::unicritical(2, 0.0);
  std::vector<double> ts = {1.0};
  try {
    (void)jdim::pullback_pressure(f, cpx(1.0, 0.0), pparams(2, 0.6), ts);
    CHECK(false);
  } catch (const jdim::Error& e) {
    CHECK(e.code() == jdim::ErrorCode::invalid_argument);
  }
  CHECK_NOTHROW(
      (void)jdim::pullback_pressure(f, cpx(1.0, 0.0), pparams(2, 0.5), ts));
}

TEST_CASE("saturation of most steps emits a warning") {
  Map f = Map::unicritical(2, cpx(-1.0, 0.0));
  std::vector<double> ts = {1.0};
  PullbackResult r =
      jdim::pullback_pressure(f, cpx(-0.9, 0.0), pparams(1, 0.1), ts);
  CHECK(r.saturated_steps == r.total_steps);
  REQUIRE(!r.warnings.empty());
  CHECK(r.warnings[0].find("cap") != std::string::npos);

  jdim::TelescopeResult tel =
      jdim::telescope_diagnostic(f, cpx(-0.9, 0.0), pparams(1, 0.1));
  CHECK(tel.saturated_fraction == 1.0);
}

TEST_CASE("telescope values are nonpositive and symmetric on the circle") {
  Map f = Map::unicritical(2, 0.0);
  jdim::TelescopeResult tel =
      jdim::telescope_diagnostic(f, cpx(1.0, 0.0), pparams(10, 0.1));
  REQUIRE(tel.per_branch.size() == 1024);
  for (double v : tel.per_branch) {
    CHECK(v <= 1e-15);
    CHECK(v >= -0.07);
    CHECK(std::abs(v - tel.per_branch[0]) < 1e-12);
  }
  CHECK(tel.saturated_fraction == 0.0);
}

TEST_CASE("telescope defect shrinks with the root radius") {
  for (cpx c : {cpx(0.0, 0.0), cpx(-0.5, 0.0)}) {
    Map f = Map::unicritical(2, c);
    cpx base(1.4, 0.0);
    double prev = 1e300;
    for (double r0 : {0.1, 0.05, 0.025}) {
      jdim::TelescopeResult tel =
          jdim::telescope_diagnostic(f, base, pparams(8, r0));
      for (double v : tel.per_branch) CHECK(v <= 1e-15);
      CHECK(tel.max_abs < prev);
      prev = tel.max_abs;
    }
  }
}

TEST_CASE("telescope defect vanishes with a tiny root ball") {
  Map f = Map::unicritical(2, 0.0);
  jdim::TelescopeResult tel =
      jdim::telescope_diagnostic(f, cpx(1.0, 0.0), pparams(6, 1e-7));
  CHECK(tel.max_abs <= 1e-5);
}

TEST_CASE("threaded pullback matches single-threaded values") {
  Map f = Map::unicritical(2, cpx(0.2, 0.2));
  std::vector<double> ts = {0.5, 1.0, 1.5};
  cpx base(1.3, 0.0);
  PullbackParams one = pparams(11, 0.05);
  PullbackParams many = pparams(11, 0.05);
  many.threads = 4;
  PullbackResult a = jdim::pullback_pressure(f, base, one, ts);
  PullbackResult b = jdim::pullback_pressure(f, base, many, ts);
  for (std::size_t k = 0; k < ts.size(); ++k)
    CHECK(std::abs(a.samples[k].value - b.samples[k].value) < 1e-10);
  CHECK(a.branch_count == b.branch_count);
  CHECK(a.saturated_steps == b.saturated_steps);
  CHECK(a.total_steps == b.total_steps);
}

TEST_CASE("pullback parameter validation") {
  Map f = Map::unicritical(2, 0.0);
  std::vector<double> ts = {1.0};
  CHECK_THROWS_AS(
      (void)jdim::pullback_pressure(f, cpx(1.0, 0.0), pparams(0, 0.1), ts),
      jdim::Error);
  CHECK_THROWS_AS(
      (void)jdim::pullback_pressure(f, cpx(1.0, 0.0), pparams(2, -0.1), ts),
      jdim::Error);
  CHECK_THROWS_AS(
      (void)jdim::pullback_pressure(f, cpx(1.0, 0.0), pparams(2, 0.1, 0.5),
                                    ts),
      jdim::Error);
}
