#pragma once

#include <complex>
#include <span>
#include <vector>

namespace jdim {

using cpx = std::complex<double>;

// Horner evaluation of p and p' for coefficients in ascending order.
std::pair<cpx, cpx> poly_eval2(std::span<const cpx> coeffs, cpx z);
cpx poly_eval(std::span<const cpx> coeffs, cpx z);
std::vector<cpx> poly_derivative(std::span<const cpx> coeffs);

// Drop (numerically) vanishing leading coefficients.
std::vector<cpx> poly_trim(std::vector<cpx> coeffs, double tol = 0.0);

struct AberthResult {
  std::vector<cpx> roots;
  int iterations = 0;
  double max_residual = 0.0;
  bool converged = false;
};

// Aberth-Ehrlich simultaneous iteration. Coefficients ascending, leading
// coefficient nonzero. Deterministic circle start unless warm-start points
// are supplied (one per root).
AberthResult aberth_solve(std::span<const cpx> coeffs,
                          std::span<const cpx> warm = {});

struct ClusteredRoot {
  cpx point;
  int multiplicity;
  double residual;
};

// Merge numerically coincident roots into multiple roots. rel_tol scales
// with the root magnitudes. Output sorted by (re, im).
std::vector<ClusteredRoot> cluster_roots(const std::vector<cpx>& roots,
                                         double max_residual,
                                         double rel_tol = 1e-6);

}  // namespace jdim
