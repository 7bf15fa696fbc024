#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/errors.hpp"
#include "core/green.hpp"
#include "core/map.hpp"

using jdim::Angle;
using jdim::cpx;
using jdim::Map;

TEST_CASE("angle arithmetic is exact") {
  Angle a = Angle::parse("1/3");
  CHECK(a.num == 1);
  CHECK(a.den == 3);
  CHECK(a.times(2) == Angle::make(2, 3));
  CHECK(a.times(2).times(2) == a);  // 4/3 reduces to 1/3 mod 1

  CHECK(Angle::parse("0.5") == Angle::make(1, 2));
  CHECK(Angle::parse("3/6") == Angle::make(1, 2));
  CHECK(Angle::make(7, 3) == Angle::make(1, 3));
  CHECK(Angle::make(-1, 3) == Angle::make(2, 3));
  CHECK(Angle::make(1, 4) < Angle::make(1, 3));
  CHECK(Angle::make(1, 2).str() == "1/2");
  CHECK(Angle::make(1, 2).turns() == 0.5);
  CHECK_THROWS_AS(Angle::parse("x"), jdim::Error);
  CHECK_THROWS_AS(Angle::make(1, 0), jdim::Error);
}

TEST_CASE("potential of z^2 is log|z| outside the disk") {
  Map f = Map::unicritical(2, 0.0);
  CHECK(jdim::green_potential(f, cpx(2.0, 0.0)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(jdim::green_potential(f, cpx(0.0, 3.0)) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-9));
  // On the unit circle the potential vanishes.
  CHECK(jdim::green_potential(f, cpx(1.0, 0.0)) == 0.0);
  CHECK(jdim::green_potential(f, cpx(0.6, 0.8)) ==
        doctest::Approx(0.0).epsilon(1e-9));
  // Interior points never escape.
  CHECK(jdim::green_potential(f, cpx(0.3, 0.1)) == 0.0);
}

TEST_CASE("potential functional equation") {
  Map f = Map::unicritical(2, cpx(-1.0, 0.0));
  for (cpx z : {cpx(3.0, 0.0), cpx(1.9, 0.4), cpx(-2.2, 1.1)}) {
    double g = jdim::green_potential(f, z);
    double gf = jdim::green_potential(f, f.evaluate(z));
    CHECK(gf == doctest::Approx(2.0 * g).epsilon(1e-9));
  }
  Map f3 = Map::unicritical(3, cpx(0.1, 0.1));
  cpx z(1.7, 0.2);
  CHECK(jdim::green_potential(f3, f3.evaluate(z)) ==
        doctest::Approx(3.0 * jdim::green_potential(f3, z)).epsilon(1e-9));
}

TEST_CASE("ray 0 of z^2 is the positive real axis") {
  Map f = Map::unicritical(2, 0.0);
  auto ray = jdim::trace_external_ray(f, Angle::make(0, 1), 0.2, 0.01);
  REQUIRE(ray.points.size() >= 2);
  double prev = 1e300;
  for (const auto& p : ray.points) {
    CHECK(p.potential < prev);
    prev = p.potential;
    CHECK(p.z.imag() == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(std::abs(p.z - cpx(std::exp(p.potential), 0.0)) < 1e-9);
  }
  CHECK(ray.points.front().potential == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(ray.points.back().potential <= 0.01 * (1.0 + 1e-12));
}

TEST_CASE("ray 1/2 of z^2 is the negative real axis") {
  Map f = Map::unicritical(2, 0.0);
  auto ray = jdim::trace_external_ray(f, Angle::make(1, 2), 0.2, 0.02);
  for (const auto& p : ray.points) {
    CHECK(p.z.real() < 0.0);
    CHECK(std::abs(p.z + cpx(std::exp(p.potential), 0.0)) < 1e-9);
  }
}

TEST_CASE("ray 0 of the basilica approaches the beta fixed point") {
  Map f = Map::unicritical(2, cpx(-1.0, 0.0));
  auto ray = jdim::trace_external_ray(f, Angle::make(0, 1), 0.3, 1e-4);
  double beta = (1.0 + std::sqrt(5.0)) / 2.0;
  const auto& last = ray.points.back();
  CHECK(std::abs(last.z.imag()) < 1e-9);
  CHECK(last.z.real() > beta);
  CHECK(std::abs(last.z - cpx(beta, 0.0)) < 1e-2);
  // Real rays stay real and move monotonically inward.
  double prev = 1e300;
  for (const auto& p : ray.points) {
    CHECK(std::abs(p.z.imag()) < 1e-9);
    CHECK(p.z.real() < prev);
    prev = p.z.real();
  }
}

TEST_CASE("point_on_ray matches the Boettcher coordinate for z^2") {
  Map f = Map::unicritical(2, 0.0);
  cpx p = jdim::point_on_ray(f, 0.0, 0.1);
  CHECK(std::abs(p - cpx(std::exp(0.1), 0.0)) < 1e-9);
  cpx q = jdim::point_on_ray(f, 0.25, 0.1);
  CHECK(std::abs(q - cpx(0.0, std::exp(0.1))) < 1e-9);
}

TEST_CASE("the map sends ray points to doubled-angle ray points") {
  Map f = Map::unicritical(2, cpx(-1.0, 0.0));
  cpx a = jdim::point_on_ray(f, 1.0 / 3.0, 0.05);
  cpx b = jdim::point_on_ray(f, 2.0 / 3.0, 0.10);
  CHECK(std::abs(f.evaluate(a) - b) < 1e-8);
}

TEST_CASE("base point selection sits at half the puzzle potential") {
  Map f = Map::unicritical(2, 0.0);
  cpx b0 = jdim::select_base_point(f, 0.2, Angle::make(0, 1));
  CHECK(std::abs(b0 - cpx(std::exp(0.1), 0.0)) < 1e-9);
  cpx bh = jdim::select_base_point(f, 0.2, Angle::make(1, 2));
  CHECK(std::abs(bh - cpx(-std::exp(0.1), 0.0)) < 1e-9);
}

TEST_CASE("base point for the basilica lands just outside the spine tip") {
  Map f = Map::unicritical(2, cpx(-1.0, 0.0));
  cpx b = jdim::select_base_point(f, 0.2, Angle::make(0, 1));
  double beta = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(std::abs(b.imag()) < 1e-9);
  CHECK(b.real() > beta);
  CHECK(b.real() < beta + 0.1);
  CHECK(jdim::green_potential(f, b) == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("connectivity guard") {
  CHECK_NOTHROW(jdim::require_connected_julia(Map::unicritical(2, -1.0)));
  CHECK_NOTHROW(jdim::require_connected_julia(Map::unicritical(2, 0.25)));
  CHECK_THROWS_AS(jdim::require_connected_julia(Map::unicritical(2, 3.0)),
                  jdim::Error);
  try {
    jdim::require_connected_julia(Map::unicritical(2, cpx(0.0, 1.5)));
    CHECK(false);
  } catch (const jdim::Error& e) {
    CHECK(e.code() == jdim::ErrorCode::invalid_argument);
  }
}
