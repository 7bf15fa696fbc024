#include "core/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "core/errors.hpp"

namespace jdim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_curve(const PressureCurve& curve) {
  for (std::size_t k = 0; k + 1 < curve.samples.size(); ++k)
    if (!(curve.samples[k].t < curve.samples[k + 1].t))
      fail(ErrorCode::invalid_argument,
           "pressure curve t values must be strictly increasing");
}
}  // namespace

bool estimator_is_lower_bound(const std::string& estimator) {
  return estimator.find("fuzzy") != std::string::npos ||
         estimator.find("restricted") != std::string::npos ||
         estimator.find("msample") != std::string::npos ||
         estimator.find("double") != std::string::npos ||
         estimator.find("pullback") != std::string::npos;
}

DimensionEstimate first_zero(const PressureCurve& curve, bool refine,
                             const std::function<double(double)>& eval) {
  validate_curve(curve);
  if (curve.sentinel)
    fail(ErrorCode::all_pruned,
         "pressure curve is a sentinel (nothing survived); no zero exists");

  std::vector<PressureSample> finite;
  for (const PressureSample& s : curve.samples)
    if (std::isfinite(s.value)) finite.push_back(s);
  if (finite.size() < 2)
    fail(ErrorCode::invalid_argument,
         "zero extraction needs at least two finite samples");

  DimensionEstimate est;
  est.method = curve.estimator;
  est.is_lower_bound_claim = estimator_is_lower_bound(curve.estimator);
  for (std::size_t k = 0; k + 1 < finite.size(); ++k)
    if (finite[k + 1].value > finite[k].value + 1e-12) est.monotone = false;

  double lo = 0.0, hi = 0.0;
  bool found = false;
  for (std::size_t k = 0; k + 1 < finite.size(); ++k) {
    if (finite[k].value == 0.0) {
      est.t0 = finite[k].t;
      est.bracket = 0.0;
      return est;
    }
    if (finite[k].value > 0.0 && finite[k + 1].value <= 0.0) {
      lo = finite[k].t;
      hi = finite[k + 1].t;
      found = true;
      break;
    }
  }
  if (!found && finite.back().value == 0.0) {
    est.t0 = finite.back().t;
    est.bracket = 0.0;
    return est;
  }
  if (!found) {
    double vmin = kInf, vmax = -kInf;
    for (const PressureSample& s : finite) {
      vmin = std::min(vmin, s.value);
      vmax = std::max(vmax, s.value);
    }
    std::ostringstream msg;
    msg << "pressure curve has no sign change (values span [" << vmin << ", "
        << vmax << "])";
    fail(ErrorCode::no_sign_change, msg.str());
  }

  double vlo = 0.0, vhi = 0.0;
  for (const PressureSample& s : finite) {
    if (s.t == lo) vlo = s.value;
    if (s.t == hi) vhi = s.value;
  }

  if (refine && eval) {
    while (hi - lo > 1e-4) {
      double mid = 0.5 * (lo + hi);
      double vm = eval(mid);
      if (vm == 0.0) {
        est.t0 = mid;
        est.bracket = 0.0;
        est.refined = true;
        return est;
      }
      if (vm > 0.0) {
        lo = mid;
        vlo = vm;
      } else {
        hi = mid;
        vhi = vm;
      }
    }
    est.refined = true;
  }

  est.t0 = lo + (hi - lo) * vlo / (vlo - vhi);
  est.bracket = hi - lo;
  return est;
}

ConvergenceReport convergence_report(
    const std::string& family_param,
    const std::vector<std::pair<double, PressureCurve>>& family) {
  if (family.size() < 2)
    fail(ErrorCode::invalid_argument,
         "a convergence report needs at least two curves");

  std::vector<std::pair<double, PressureCurve>> sorted = family;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  ConvergenceReport rep;
  rep.family_param = family_param;
  for (const auto& [index, curve] : sorted) {
    ConvergenceRow row;
    row.index = index;
    DimensionEstimate est = first_zero(curve);
    row.zero = est.t0;
    if (!est.monotone) {
      std::ostringstream w;
      w << "curve at " << family_param << " = " << index
        << " is not monotone in t; its zero is the first crossing";
      rep.warnings.push_back(w.str());
    }
    if (!rep.rows.empty()) {
      row.diff = row.zero - rep.rows.back().zero;
      row.monotone_step = row.zero >= rep.rows.back().zero - 1e-12;
      if (!row.monotone_step) rep.monotone = false;
    }
    rep.rows.push_back(row);
  }

  if (rep.rows.size() >= 3) {
    double z0 = rep.rows[rep.rows.size() - 3].zero;
    double z1 = rep.rows[rep.rows.size() - 2].zero;
    double z2 = rep.rows[rep.rows.size() - 1].zero;
    double denom = (z2 - z1) - (z1 - z0);
    if (std::abs(denom) > 1e-14 * (1.0 + std::abs(z2))) {
      rep.aitken = z2 - (z2 - z1) * (z2 - z1) / denom;
      rep.aitken_valid = std::isfinite(rep.aitken);
    }
  }
  return rep;
}

}  // namespace jdim
