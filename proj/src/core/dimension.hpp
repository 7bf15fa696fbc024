#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "core/tree.hpp"

namespace jdim {

// A sampled pressure function for one estimator at one parameter tuple.
struct PressureCurve {
  std::string estimator;
  std::vector<std::pair<std::string, double>> params;
  std::vector<PressureSample> samples;  // t strictly increasing
  double branch_count = 0.0;
  bool sentinel = false;  // all values are -inf (nothing survived)
  std::vector<std::string> warnings;
};

struct DimensionEstimate {
  double t0 = 0.0;
  std::string method;
  double bracket = 0.0;  // width of the bracketing interval
  bool monotone = true;  // sampled values nonincreasing
  bool refined = false;
  bool is_lower_bound_claim = false;
};

// Whether an estimator id names a from-below mode (its pressure, hence its
// zero, underestimates the plain quantity).
bool estimator_is_lower_bound(const std::string& estimator);

// First zero of the sampled curve in increasing t: linear interpolation on
// the first sign change among finite samples. With refine set and an
// evaluator given, the bracket is bisected by re-invoking the estimator
// until it is narrower than 1e-4.
DimensionEstimate first_zero(
    const PressureCurve& curve, bool refine = false,
    const std::function<double(double)>& eval = nullptr);

struct ConvergenceRow {
  double index = 0.0;  // n, N, or delta
  double zero = 0.0;
  double diff = 0.0;       // zero minus the previous row's zero
  bool monotone_step = true;
};

struct ConvergenceReport {
  std::string family_param;
  std::vector<ConvergenceRow> rows;
  bool monotone = true;
  double aitken = 0.0;  // heuristic extrapolation of the zero sequence
  bool aitken_valid = false;
  std::vector<std::string> warnings;
};

// Zeros across a parameter family (sorted by index), successive
// differences, per-step monotonicity, and a heuristic Aitken limit. Needs
// at least two curves.
ConvergenceReport convergence_report(
    const std::string& family_param,
    const std::vector<std::pair<double, PressureCurve>>& family);

}  // namespace jdim
