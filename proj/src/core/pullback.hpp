#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/map.hpp"
#include "core/tree.hpp"

namespace jdim {

struct DiskEnclosure {
  cpx center;
  double radius;
  bool saturated = false;
};

// First-order enclosure of the pullback component of `image` through the
// branch landing at w (f(w) in image): radius kappa * image.radius /
// |f'(w)|, capped at half the distance from w to the critical set. The cap
// marks the enclosure as saturated.
DiskEnclosure propagate_disk(const Map& f, cpx w, const DiskEnclosure& image,
                             double kappa);

struct PullbackParams {
  int depth = 10;
  double radius = 0.1;  // root ball radius
  double kappa = 1.2;   // enclosure safety factor, >= 1
  // The root ball must stay clear of the critical set: radius <=
  // max_radius_fraction * distance_to_critical_set(base).
  double max_radius_fraction = 0.5;
  std::uint64_t node_budget = 1ull << 24;
  int threads = 1;
  Metric metric = Metric::euclidean;
};

struct PullbackResult {
  std::vector<PressureSample> samples;
  double branch_count = 0.0;
  std::uint64_t saturated_steps = 0;
  std::uint64_t total_steps = 0;
  std::vector<std::string> warnings;
};

// Pullback-infimum pressure: per step the weight base is the |f'| upper
// bound over the propagated enclosure, so branch weights are infima of
// |f'|^-t over the (approximate) pullback components of B(base, radius).
PullbackResult pullback_pressure(const Map& f, cpx base,
                                 const PullbackParams& p,
                                 std::span<const double> t_grid);

double pullback_pressure_at(const Map& f, cpx base, const PullbackParams& p,
                            double t);

// Per-branch telescoping defect at t = 1:
// (1/n) log( product of enclosure infima / |(f^n)'|^-1 ) <= 0.
// Shrinks to 0 with the root radius when the enclosures behave.
struct TelescopeResult {
  std::vector<double> per_branch;
  double max_abs = 0.0;
  double saturated_fraction = 0.0;
};

TelescopeResult telescope_diagnostic(const Map& f, cpx base,
                                     const PullbackParams& p);

}  // namespace jdim
