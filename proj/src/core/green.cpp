#include "core/green.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "core/errors.hpp"

namespace jdim {

Angle Angle::make(std::int64_t num, std::int64_t den) {
  if (den <= 0) fail(ErrorCode::invalid_argument, "angle denominator <= 0");
  num %= den;
  if (num < 0) num += den;
  std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Angle{num, den};
}

Angle Angle::parse(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      std::int64_t p = std::stoll(text.substr(0, slash));
      std::int64_t q = std::stoll(text.substr(slash + 1));
      return make(p, q);
    }
    double v = std::stod(text);
    if (v < 0.0 || v >= 1.0) v -= std::floor(v);
    const std::int64_t den = 1000000000;
    return make(static_cast<std::int64_t>(std::llround(v * den)), den);
  } catch (const std::exception&) {
    fail(ErrorCode::invalid_argument, "cannot parse angle '" + text + "'");
  }
}

Angle Angle::times(int d) const { return make(num * d, den); }

bool Angle::operator<(const Angle& o) const {
  return num * o.den < o.num * den;
}

std::string Angle::str() const {
  std::ostringstream os;
  os << num << "/" << den;
  return os.str();
}

namespace {

constexpr double kEscape = 1e12;
constexpr double kTargetLevel = 18.0;  // potential at which phi ~ identity

void require_polynomial(const Map& f, const char* who) {
  if (!f.is_polynomial_like())
    fail(ErrorCode::invalid_argument,
         std::string(who) + " needs a polynomial map");
}

// frac(d^n * theta) for an exact rational angle, via modular power.
double iterated_angle(const Angle& theta, int d, int n) {
  std::int64_t m = 1 % theta.den;
  std::int64_t base = d % theta.den;
  int e = n;
  while (e > 0) {
    if (e & 1) m = (m * base) % theta.den;
    base = (base * base) % theta.den;
    e >>= 1;
  }
  std::int64_t num = (m * (theta.num % theta.den)) % theta.den;
  return static_cast<double>(num) / theta.den;
}

double iterated_angle(double theta, int d, int n) {
  double t = theta;
  for (int i = 0; i < n; ++i) {
    t *= d;
    t -= std::floor(t);
  }
  return t;
}

// Sub-leading Boettcher correction: phi(z) = z + a_{d-1}/d + O(1/z).
cpx bottcher_shift(const Map& f) {
  const std::vector<cpx>& a = f.num_coeffs();
  return a[a.size() - 2] / static_cast<double>(f.degree());
}

struct NewtonTarget {
  int n;         // forward iterations to the reference level
  cpx target;    // where f^n(w) must land
};

template <typename Th>
NewtonTarget ray_target(const Map& f, const Th& theta, double potential) {
  const int d = f.degree();
  int n = 0;
  double level = potential;
  while (level < kTargetLevel) {
    level *= d;
    ++n;
  }
  double ang = 2.0 * M_PI * iterated_angle(theta, d, n);
  cpx u = std::exp(cpx(level, ang));
  return {n, u - bottcher_shift(f)};
}

// Newton solve f^n(w) = target from a warm start. Returns false when the
// iteration leaves the basin or stalls.
bool newton_pullback(const Map& f, const NewtonTarget& t, cpx& w) {
  for (int it = 0; it < 60; ++it) {
    cpx z = w;
    cpx dz{1.0, 0.0};
    bool bad = false;
    for (int k = 0; k < t.n; ++k) {
      dz *= f.derivative(z);
      z = f.evaluate(z);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        bad = true;
        break;
      }
    }
    if (bad || std::abs(dz) == 0.0) return false;
    cpx step = (z - t.target) / dz;
    w -= step;
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) return false;
    if (std::abs(step) <= 1e-13 * (1.0 + std::abs(w))) return true;
  }
  return false;
}

template <typename Th>
ExternalRay trace_ray_impl(const Map& f, const Th& theta, double theta_turns,
                           double eta_hi, double eta_lo) {
  require_polynomial(f, "trace_external_ray");
  if (!f.is_monic())
    fail(ErrorCode::invalid_argument, "ray tracing needs a monic polynomial");
  if (!(eta_hi > eta_lo) || eta_lo <= 0.0)
    fail(ErrorCode::invalid_argument, "ray tracing needs eta_hi > eta_lo > 0");
  require_connected_julia(f);

  ExternalRay ray;
  ray.theta = theta_turns;

  // Start at the reference level where the Boettcher coordinate is close to
  // the identity, then walk the potential down geometrically.
  double p = kTargetLevel;
  cpx w = ray_target(f, theta, p).target;

  const double step_ratio = 0.8;
  double next = p;
  int failures = 0;
  while (p > eta_lo) {
    next = std::max(next * step_ratio, eta_lo);
    // keep the first recorded point at or below eta_hi
    if (p > eta_hi && next < eta_hi) next = eta_hi;
    NewtonTarget t = ray_target(f, theta, next);
    cpx cand = w;
    bool ok = newton_pullback(f, t, cand);
    if (ok && std::abs(cand - w) > 0.5 * (1.0 + std::abs(w)) && p < 1.0)
      ok = false;  // suspicious jump between branches
    if (!ok) {
      if (++failures > 200)
        fail(ErrorCode::non_convergence,
             "external ray trace failed near potential " + std::to_string(p));
      next = std::sqrt(p * next);  // subdivide and retry
      if (next >= p * 0.999999) next = p * 0.999999;
      continue;
    }
    w = cand;
    p = next;
    if (p <= eta_hi) ray.points.push_back({p, w});
  }
  if (ray.points.empty() || ray.points.back().potential > eta_lo * 1.0000001)
    fail(ErrorCode::non_convergence, "external ray trace produced no points");
  return ray;
}

}  // namespace

double green_potential(const Map& f, cpx z, int max_iter) {
  require_polynomial(f, "green_potential");
  const int d = f.degree();
  cpx w = z;
  double scale = 1.0;  // d^-n
  for (int n = 0; n < max_iter; ++n) {
    double aw = std::abs(w);
    if (aw >= kEscape) {
      // Two refinement steps while the modulus stays comfortably finite.
      for (int extra = 0; extra < 2; ++extra) {
        if (std::log(aw) * d > 250.0) break;
        w = f.evaluate(w);
        scale /= d;
        aw = std::abs(w);
      }
      return std::log(aw) * scale;
    }
    w = f.evaluate(w);
    scale /= d;
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
      return std::log(kEscape) * scale * d;  // crude but finite fallback
  }
  return 0.0;
}

void require_connected_julia(const Map& f) {
  for (const CriticalPoint& c : f.critical_points()) {
    cpx w = c.location;
    for (int n = 0; n < 256; ++n) {
      w = f.evaluate(w);
      if (std::abs(w) > 1e6)
        fail(ErrorCode::invalid_argument,
             "critical orbit escapes: Julia set is not connected");
    }
  }
}

ExternalRay trace_external_ray(const Map& f, const Angle& theta,
                               double eta_hi, double eta_lo) {
  return trace_ray_impl(f, theta, theta.turns(), eta_hi, eta_lo);
}

cpx point_on_ray(const Map& f, double theta, double potential) {
  ExternalRay ray = trace_ray_impl(f, theta, theta, potential * 2.0,
                                   potential);
  return ray.points.back().z;
}

cpx select_base_point(const Map& f, double eta, const Angle& theta) {
  if (eta <= 0.0)
    fail(ErrorCode::invalid_argument, "select_base_point needs eta > 0");
  ExternalRay ray = trace_external_ray(f, theta, eta, eta * 0.5);
  cpx z = ray.points.back().z;
  double g = green_potential(f, z);
  if (std::abs(g - eta * 0.5) > 1e-6 * (1.0 + eta))
    fail(ErrorCode::non_convergence,
         "base point potential check failed (got " + std::to_string(g) + ")");
  return z;
}

}  // namespace jdim
