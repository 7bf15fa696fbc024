#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/roots.hpp"

namespace jdim {

enum class Metric { euclidean, spherical };

enum class MapKind { unicritical, polynomial, rational };

struct CriticalPoint {
  cpx location;
  int local_degree;  // order of the branch point, >= 2
};

struct PreimageRoot {
  cpx point;
  int multiplicity;
  double residual;
};

struct DerivBounds {
  double lower;
  double upper;
};

// A holomorphic self-map of the plane: z^d + c, a general polynomial, or a
// rational quotient p/q. Supplies the primitives the pressure estimators
// are built from: forward evaluation, derivative moduli in either metric,
// full preimage fibers with multiplicity, critical data, and rigorous
// |f'| bounds on disks.
class Map {
 public:
  static Map unicritical(int degree, cpx c);
  // Coefficients ascending: a[0] + a[1] z + ... + a[d] z^d.
  static Map polynomial(std::vector<cpx> coeffs);
  static Map rational(std::vector<cpx> num, std::vector<cpx> den);

  MapKind kind() const { return kind_; }
  int degree() const { return degree_; }
  cpx unicritical_c() const { return c_; }
  bool is_polynomial_like() const { return kind_ != MapKind::rational; }
  bool is_monic() const;
  bool has_real_coefficients() const;
  Metric default_metric() const {
    return kind_ == MapKind::rational ? Metric::spherical : Metric::euclidean;
  }
  std::string describe() const;

  cpx evaluate(cpx z) const;       // throws ErrorCode::pole on a pole
  cpx derivative(cpx z) const;
  double derivative_modulus(cpx z, Metric metric) const;

  const std::vector<CriticalPoint>& critical_points() const { return crit_; }
  double critical_residual() const { return crit_residual_; }
  double distance_to_critical_set(cpx z) const;  // +inf when no finite point

  // All finite solutions of f(w) = z, multiplicities summing to the degree
  // (for polynomial kinds). Deterministic (re, im) ordering. warm may carry
  // previous-level roots to seed the iteration.
  std::vector<PreimageRoot> preimages(cpx z,
                                      std::span<const cpx> warm = {}) const;

  // Bounds for |f'| over the closed disk |w - center| <= radius, in the
  // requested metric. Closed form for unicritical maps, coefficient bounds
  // otherwise; always lower <= |f'(center)| <= upper.
  DerivBounds derivative_bounds_on_disk(cpx center, double radius,
                                        Metric metric) const;

  // A point of the closed disk where |f'| is (approximately) maximal.
  // Exact radial point for unicritical maps, boundary search otherwise.
  cpx argmax_derivative_on_disk(cpx center, double radius) const;

  // Ascending coefficients of numerator / denominator (denominator = {1}
  // for polynomial kinds).
  const std::vector<cpx>& num_coeffs() const { return num_; }
  const std::vector<cpx>& den_coeffs() const { return den_; }

 private:
  Map() = default;
  void finalize();

  MapKind kind_ = MapKind::unicritical;
  int degree_ = 2;
  cpx c_{0.0, 0.0};
  std::vector<cpx> num_;   // f = num/den, den = {1} unless rational
  std::vector<cpx> den_;
  std::vector<cpx> dnum_;  // num', den'
  std::vector<cpx> dden_;
  std::vector<cpx> wronsk_;  // num' den - num den' (derivative numerator)
  std::vector<CriticalPoint> crit_;
  double crit_residual_ = 0.0;
};

}  // namespace jdim
