#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/map.hpp"

namespace jdim {

// External angle as an exact rational number of turns, reduced mod 1.
// Kept exact so angle-doubling orbits and forward closure checks do not
// drift.
struct Angle {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Angle make(std::int64_t num, std::int64_t den);
  static Angle parse(const std::string& text);  // "p/q" or decimal
  Angle times(int d) const;                     // d * theta mod 1
  double turns() const { return static_cast<double>(num) / den; }
  bool operator==(const Angle& o) const {
    return num == o.num && den == o.den;
  }
  bool operator<(const Angle& o) const;
  std::string str() const;
};

// Green's function of the filled Julia set, computed from the escape rate
// d^-n log|f^n(z)| with tail refinement. Returns 0 when the orbit stays
// bounded for the iteration cap. Polynomial kinds only.
double green_potential(const Map& f, cpx z, int max_iter = 1024);

struct RayPoint {
  double potential;
  cpx z;
};

struct ExternalRay {
  double theta;                  // in turns
  std::vector<RayPoint> points;  // strictly decreasing potential
};

// Trace the external ray of the given angle from potential eta_hi down to
// eta_lo by Newton inversion of the Boettcher coordinate at iterated
// targets, warm-starting each step from the previous ray point. Requires a
// monic polynomial with bounded critical orbits (connected Julia set
// heuristic).
ExternalRay trace_external_ray(const Map& f, const Angle& theta,
                               double eta_hi, double eta_lo);

// The point with Green potential `potential` on the external ray `theta`
// (in turns; need not be rational here).
cpx point_on_ray(const Map& f, double theta, double potential);

// Default tree base point: the point at potential eta/2 on ray theta.
cpx select_base_point(const Map& f, double eta, const Angle& theta);

// Throws when a finite critical orbit escapes (disconnected Julia set).
void require_connected_julia(const Map& f);

}  // namespace jdim
