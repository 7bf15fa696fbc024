#include "core/roots.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace jdim {

std::pair<cpx, cpx> poly_eval2(std::span<const cpx> coeffs, cpx z) {
  cpx p{0.0, 0.0};
  cpx dp{0.0, 0.0};
  for (std::size_t i = coeffs.size(); i-- > 0;) {
    dp = dp * z + p;
    p = p * z + coeffs[i];
  }
  return {p, dp};
}

cpx poly_eval(std::span<const cpx> coeffs, cpx z) {
  cpx p{0.0, 0.0};
  for (std::size_t i = coeffs.size(); i-- > 0;) p = p * z + coeffs[i];
  return p;
}

std::vector<cpx> poly_derivative(std::span<const cpx> coeffs) {
  std::vector<cpx> d;
  if (coeffs.size() <= 1) return d;
  d.resize(coeffs.size() - 1);
  for (std::size_t i = 1; i < coeffs.size(); ++i)
    d[i - 1] = coeffs[i] * static_cast<double>(i);
  return d;
}

std::vector<cpx> poly_trim(std::vector<cpx> coeffs, double tol) {
  double scale = 0.0;
  for (const cpx& a : coeffs) scale = std::max(scale, std::abs(a));
  const double cut = tol * scale;
  while (coeffs.size() > 1 && std::abs(coeffs.back()) <= cut)
    coeffs.pop_back();
  return coeffs;
}

namespace {

// Backward-error scale for the residual test: sum |a_k| |z|^k.
double residual_scale(std::span<const cpx> coeffs, cpx z) {
  double az = std::abs(z);
  double pw = 1.0;
  double s = 0.0;
  for (const cpx& a : coeffs) {
    s += std::abs(a) * pw;
    pw *= az;
  }
  return std::max(s, 1e-300);
}

}  // namespace

AberthResult aberth_solve(std::span<const cpx> coeffs,
                          std::span<const cpx> warm) {
  if (coeffs.size() < 2)
    fail(ErrorCode::invalid_argument, "aberth_solve: constant polynomial");
  if (std::abs(coeffs.back()) == 0.0)
    fail(ErrorCode::invalid_argument, "aberth_solve: zero leading coefficient");

  const int n = static_cast<int>(coeffs.size()) - 1;
  AberthResult out;
  out.roots.resize(n);

  if (static_cast<int>(warm.size()) == n) {
    std::copy(warm.begin(), warm.end(), out.roots.begin());
    // Coincident warm starts make the Aberth correction singular.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (std::abs(out.roots[i] - out.roots[j]) < 1e-14)
          out.roots[i] += cpx(1e-8 * (i + 1), 1e-8);
  } else {
    // Cauchy bound, points on a circle with an angular offset that avoids
    // real-axis symmetry traps.
    double r = 0.0;
    for (int i = 0; i < n; ++i)
      r = std::max(r, std::abs(coeffs[i] / coeffs.back()));
    r = 1.0 + r;
    for (int i = 0; i < n; ++i) {
      double a = 2.0 * M_PI * (i + 0.3779) / n + 0.2;
      out.roots[i] = r * cpx(std::cos(a), std::sin(a));
    }
  }

  const int max_iter = 256;
  for (int iter = 0; iter < max_iter; ++iter) {
    double max_rel_res = 0.0;
    double max_step = 0.0;
    for (int i = 0; i < n; ++i) {
      auto [p, dp] = poly_eval2(coeffs, out.roots[i]);
      double rel = std::abs(p) / residual_scale(coeffs, out.roots[i]);
      max_rel_res = std::max(max_rel_res, rel);
      if (rel < 1e-15) continue;
      if (std::abs(dp) == 0.0) {
        out.roots[i] += cpx(1e-6, 1e-6);
        max_step = 1.0;
        continue;
      }
      cpx newton = p / dp;
      cpx s{0.0, 0.0};
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        cpx d = out.roots[i] - out.roots[j];
        if (std::abs(d) < 1e-300) d = cpx(1e-300, 0.0);
        s += 1.0 / d;
      }
      cpx denom = 1.0 - newton * s;
      cpx step = std::abs(denom) < 1e-300 ? newton : newton / denom;
      out.roots[i] -= step;
      max_step = std::max(max_step,
                          std::abs(step) / (1.0 + std::abs(out.roots[i])));
    }
    out.iterations = iter + 1;
    if (max_rel_res < 1e-14 || (max_step < 1e-16 && max_rel_res < 1e-10)) {
      out.converged = true;
      break;
    }
  }

  out.max_residual = 0.0;
  for (int i = 0; i < n; ++i) {
    auto [p, dp] = poly_eval2(coeffs, out.roots[i]);
    (void)dp;
    out.max_residual = std::max(
        out.max_residual, std::abs(p) / residual_scale(coeffs, out.roots[i]));
  }
  if (out.max_residual < 1e-10) out.converged = true;
  return out;
}

std::vector<ClusteredRoot> cluster_roots(const std::vector<cpx>& roots,
                                         double max_residual,
                                         double rel_tol) {
  std::vector<cpx> sorted = roots;
  std::sort(sorted.begin(), sorted.end(), [](const cpx& a, const cpx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });

  double scale = 1.0;
  for (const cpx& r : sorted) scale = std::max(scale, std::abs(r));
  const double tol = rel_tol * scale;

  std::vector<ClusteredRoot> out;
  std::vector<bool> used(sorted.size(), false);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (used[i]) continue;
    cpx sum = sorted[i];
    int count = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (used[j]) continue;
      if (std::abs(sorted[j] - sorted[i]) <= tol) {
        sum += sorted[j];
        ++count;
        used[j] = true;
      }
    }
    out.push_back({sum / static_cast<double>(count), count, max_residual});
  }
  std::sort(out.begin(), out.end(),
            [](const ClusteredRoot& a, const ClusteredRoot& b) {
              if (a.point.real() != b.point.real())
                return a.point.real() < b.point.real();
              return a.point.imag() < b.point.imag();
            });
  return out;
}

}  // namespace jdim
