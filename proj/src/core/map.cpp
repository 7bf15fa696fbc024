#include "core/map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "core/errors.hpp"

namespace jdim {

namespace {

cpx pow_int(cpx z, int n) {
  cpx r{1.0, 0.0};
  cpx b = z;
  int e = n;
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

// sum |a_k| R^k, an upper bound for |p| on |z| <= R.
double coeff_bound(std::span<const cpx> coeffs, double R) {
  double s = 0.0;
  double pw = 1.0;
  for (const cpx& a : coeffs) {
    s += std::abs(a) * pw;
    pw *= R;
  }
  return s;
}

std::vector<cpx> poly_mul(std::span<const cpx> a, std::span<const cpx> b) {
  std::vector<cpx> out(a.size() + b.size() - 1, cpx{0.0, 0.0});
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::vector<cpx> poly_sub(std::vector<cpx> a, std::span<const cpx> b) {
  if (a.size() < b.size()) a.resize(b.size(), cpx{0.0, 0.0});
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  return a;
}

bool lex_less(const cpx& a, const cpx& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

Map Map::unicritical(int degree, cpx c) {
  if (degree < 2)
    fail(ErrorCode::invalid_argument, "unicritical map needs degree >= 2");
  Map m;
  m.kind_ = MapKind::unicritical;
  m.degree_ = degree;
  m.c_ = c;
  m.num_.assign(degree + 1, cpx{0.0, 0.0});
  m.num_[0] = c;
  m.num_[degree] = cpx{1.0, 0.0};
  m.den_ = {cpx{1.0, 0.0}};
  m.finalize();
  return m;
}

Map Map::polynomial(std::vector<cpx> coeffs) {
  coeffs = poly_trim(std::move(coeffs));
  if (coeffs.size() < 3)
    fail(ErrorCode::invalid_argument, "polynomial map needs degree >= 2");
  Map m;
  m.kind_ = MapKind::polynomial;
  m.degree_ = static_cast<int>(coeffs.size()) - 1;
  m.num_ = std::move(coeffs);
  m.den_ = {cpx{1.0, 0.0}};
  m.finalize();
  return m;
}

Map Map::rational(std::vector<cpx> num, std::vector<cpx> den) {
  num = poly_trim(std::move(num));
  den = poly_trim(std::move(den));
  if (den.size() == 1 && std::abs(den[0]) == 0.0)
    fail(ErrorCode::invalid_argument, "rational map with zero denominator");
  Map m;
  m.kind_ = MapKind::rational;
  m.degree_ = static_cast<int>(std::max(num.size(), den.size())) - 1;
  if (m.degree_ < 2)
    fail(ErrorCode::invalid_argument, "rational map needs degree >= 2");
  m.num_ = std::move(num);
  m.den_ = std::move(den);
  m.finalize();
  return m;
}

void Map::finalize() {
  dnum_ = poly_derivative(num_);
  dden_ = poly_derivative(den_);
  if (dden_.empty()) dden_ = {cpx{0.0, 0.0}};

  if (den_.size() == 1) {
    wronsk_ = dnum_;
    for (cpx& a : wronsk_) a *= den_[0];
  } else {
    wronsk_ = poly_sub(poly_mul(dnum_, den_), poly_mul(num_, dden_));
  }
  wronsk_ = poly_trim(std::move(wronsk_), 1e-14);

  // Critical points: zeros of the derivative numerator. Local degree is the
  // zero's multiplicity plus one.
  crit_.clear();
  crit_residual_ = 0.0;
  if (kind_ == MapKind::unicritical) {
    crit_.push_back({cpx{0.0, 0.0}, degree_});
    return;
  }
  if (wronsk_.size() < 2) return;  // no finite critical point
  AberthResult r = aberth_solve(wronsk_);
  if (!r.converged)
    fail(ErrorCode::non_convergence, "critical point solve did not converge");
  crit_residual_ = r.max_residual;
  for (const ClusteredRoot& cr : cluster_roots(r.roots, r.max_residual))
    crit_.push_back({cr.point, cr.multiplicity + 1});
}

bool Map::is_monic() const {
  return kind_ != MapKind::rational &&
         std::abs(num_.back() - cpx{1.0, 0.0}) <= 1e-12;
}

bool Map::has_real_coefficients() const {
  for (const cpx& a : num_)
    if (a.imag() != 0.0) return false;
  for (const cpx& a : den_)
    if (a.imag() != 0.0) return false;
  return true;
}

std::string Map::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case MapKind::unicritical:
      os << "z^" << degree_ << " + (" << c_.real() << "," << c_.imag() << ")";
      break;
    case MapKind::polynomial:
      os << "polynomial degree " << degree_;
      break;
    case MapKind::rational:
      os << "rational degree " << degree_;
      break;
  }
  return os.str();
}

cpx Map::evaluate(cpx z) const {
  if (kind_ == MapKind::unicritical) return pow_int(z, degree_) + c_;
  cpx p = poly_eval(num_, z);
  if (den_.size() == 1) return p / den_[0];
  cpx q = poly_eval(den_, z);
  if (std::abs(q) == 0.0)
    fail(ErrorCode::pole, "evaluate: z is a pole of the map");
  return p / q;
}

cpx Map::derivative(cpx z) const {
  if (kind_ == MapKind::unicritical)
    return static_cast<double>(degree_) * pow_int(z, degree_ - 1);
  if (den_.size() == 1) return poly_eval(dnum_, z) / den_[0];
  cpx q = poly_eval(den_, z);
  if (std::abs(q) == 0.0)
    fail(ErrorCode::pole, "derivative: z is a pole of the map");
  return poly_eval(wronsk_, z) / (q * q);
}

double Map::derivative_modulus(cpx z, Metric metric) const {
  if (metric == Metric::euclidean) {
    if (kind_ == MapKind::unicritical)
      return degree_ * std::pow(std::abs(z), degree_ - 1);
    return std::abs(derivative(z));
  }
  double n2z = std::norm(z);
  double n2f = std::norm(evaluate(z));
  return std::abs(derivative(z)) * (1.0 + n2z) / (1.0 + n2f);
}

double Map::distance_to_critical_set(cpx z) const {
  double best = std::numeric_limits<double>::infinity();
  for (const CriticalPoint& c : crit_)
    best = std::min(best, std::abs(z - c.location));
  return best;
}

std::vector<PreimageRoot> Map::preimages(cpx z,
                                         std::span<const cpx> warm) const {
  std::vector<PreimageRoot> out;

  if (kind_ == MapKind::unicritical) {
    cpx t = z - c_;
    if (t.real() == 0.0 && t.imag() == 0.0) {
      // Exact critical value: the fiber collapses to the critical point.
      out.push_back({cpx{0.0, 0.0}, degree_, 0.0});
      return out;
    }
    double r = std::pow(std::abs(t), 1.0 / degree_);
    double phi = std::arg(t) / degree_;
    out.reserve(degree_);
    for (int k = 0; k < degree_; ++k) {
      double a = phi + 2.0 * M_PI * k / degree_;
      out.push_back({r * cpx(std::cos(a), std::sin(a)), 1, 0.0});
    }
  } else {
    // Roots of num(w) - z den(w).
    std::vector<cpx> p = num_;
    if (den_.size() == 1) {
      p[0] -= z * den_[0];
    } else {
      std::vector<cpx> zq = den_;
      for (cpx& a : zq) a *= z;
      p = poly_sub(std::move(p), zq);
    }
    p = poly_trim(std::move(p), 1e-13);
    if (p.size() < 2) return out;  // fiber escapes to infinity
    AberthResult r = aberth_solve(p, warm);
    if (!r.converged)
      fail(ErrorCode::non_convergence, "preimage solve did not converge");
    for (const ClusteredRoot& cr : cluster_roots(r.roots, r.max_residual, 1e-7))
      out.push_back({cr.point, cr.multiplicity, cr.residual});
  }

  std::sort(out.begin(), out.end(),
            [](const PreimageRoot& a, const PreimageRoot& b) {
              return lex_less(a.point, b.point);
            });
  return out;
}

DerivBounds Map::derivative_bounds_on_disk(cpx center, double radius,
                                           Metric metric) const {
  if (radius < 0.0)
    fail(ErrorCode::invalid_argument, "disk bounds need radius >= 0");

  const double R = std::abs(center) + radius;
  DerivBounds b{};

  if (kind_ == MapKind::unicritical) {
    double lo = std::max(0.0, std::abs(center) - radius);
    b.lower = degree_ * std::pow(lo, degree_ - 1);
    b.upper = degree_ * std::pow(R, degree_ - 1);
  } else if (den_.size() == 1) {
    std::vector<cpx> d2 = poly_derivative(dnum_);
    double bend = coeff_bound(d2, R) / std::abs(den_[0]);
    double mid = std::abs(derivative(center));
    b.lower = std::max(0.0, mid - radius * bend);
    b.upper = mid + radius * bend;
  } else {
    // f' = W/Q^2 with W = num' den - num den'. Bound |f''| through
    // (W' Q - 2 W Q') / Q^3 and a coefficient lower bound for |Q|.
    double qlo = std::abs(poly_eval(den_, center)) -
                 radius * coeff_bound(dden_, R);
    if (qlo <= 0.0) {
      b.lower = 0.0;
      b.upper = std::numeric_limits<double>::infinity();
    } else {
      std::vector<cpx> dw = poly_derivative(wronsk_);
      std::vector<cpx> t1 = poly_mul(dw, den_);
      std::vector<cpx> t2 = poly_mul(wronsk_, dden_);
      for (cpx& a : t2) a *= 2.0;
      std::vector<cpx> f2num = poly_sub(std::move(t1), t2);
      double bend = coeff_bound(f2num, R) / (qlo * qlo * qlo);
      double mid = std::abs(derivative(center));
      b.lower = std::max(0.0, mid - radius * bend);
      b.upper = mid + radius * bend;
    }
  }

  if (metric == Metric::spherical) {
    // Multiply by the range of (1 + |z|^2) / (1 + |f(z)|^2) over the disk.
    double zlo = std::max(0.0, std::abs(center) - radius);
    double zhi = R;
    double flo, fhi;
    if (den_.size() == 1) {
      double spread = radius * coeff_bound(dnum_, R) / std::abs(den_[0]);
      double mid = std::abs(evaluate(center));
      flo = std::max(0.0, mid - spread);
      fhi = mid + spread;
    } else {
      double qlo = std::abs(poly_eval(den_, center)) -
                   radius * coeff_bound(dden_, R);
      double plo = std::max(0.0, std::abs(poly_eval(num_, center)) -
                                     radius * coeff_bound(dnum_, R));
      double phi = std::abs(poly_eval(num_, center)) +
                   radius * coeff_bound(dnum_, R);
      double qhi = std::abs(poly_eval(den_, center)) +
                   radius * coeff_bound(dden_, R);
      flo = qhi > 0.0 ? plo / qhi : 0.0;
      fhi = qlo > 0.0 ? phi / qlo : std::numeric_limits<double>::infinity();
    }
    b.lower *= std::isinf(fhi) ? 0.0 : (1.0 + zlo * zlo) / (1.0 + fhi * fhi);
    b.upper *= (1.0 + zhi * zhi) / (1.0 + flo * flo);
  }
  return b;
}

cpx Map::argmax_derivative_on_disk(cpx center, double radius) const {
  if (radius <= 0.0) return center;
  if (kind_ == MapKind::unicritical) {
    double ac = std::abs(center);
    if (ac == 0.0) return cpx{radius, 0.0};
    return center * ((ac + radius) / ac);
  }
  // |f'| is the modulus of an analytic function away from poles, so the
  // maximum sits on the boundary circle. Coarse scan plus local refinement.
  const int n = 64;
  double best_a = 0.0;
  double best_v = -1.0;
  for (int i = 0; i < n; ++i) {
    double a = 2.0 * M_PI * i / n;
    cpx w = center + radius * cpx(std::cos(a), std::sin(a));
    double v;
    try {
      v = std::abs(derivative(w));
    } catch (const Error&) {
      continue;  // pole on the circle
    }
    if (v > best_v) {
      best_v = v;
      best_a = a;
    }
  }
  double lo = best_a - 2.0 * M_PI / n;
  double hi = best_a + 2.0 * M_PI / n;
  for (int it = 0; it < 40; ++it) {
    double m1 = lo + (hi - lo) * 0.382;
    double m2 = lo + (hi - lo) * 0.618;
    auto val = [&](double a) {
      cpx w = center + radius * cpx(std::cos(a), std::sin(a));
      try {
        return std::abs(derivative(w));
      } catch (const Error&) {
        return -1.0;
      }
    };
    if (val(m1) < val(m2))
      lo = m1;
    else
      hi = m2;
  }
  double a = 0.5 * (lo + hi);
  return center + radius * cpx(std::cos(a), std::sin(a));
}

}  // namespace jdim
