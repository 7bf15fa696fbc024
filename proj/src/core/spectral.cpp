#include "core/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <thread>

#include "core/errors.hpp"

namespace jdim {

SparseNonnegMatrix SparseNonnegMatrix::zero(int n) {
  if (n < 1) fail(ErrorCode::invalid_argument, "matrix dimension must be >= 1");
  SparseNonnegMatrix m;
  m.dim = n;
  m.rows.resize(n);
  return m;
}

void SparseNonnegMatrix::add(int i, int j, double w) {
  if (i < 0 || i >= dim || j < 0 || j >= dim)
    fail(ErrorCode::invalid_argument, "matrix index out of range");
  if (w < 0.0 || !std::isfinite(w))
    fail(ErrorCode::invalid_argument, "matrix weights must be finite and >= 0");
  if (w == 0.0) return;
  for (auto& e : rows[i]) {
    if (e.first == j) {
      e.second += w;
      return;
    }
  }
  rows[i].emplace_back(j, w);
}

double SparseNonnegMatrix::weight(int i, int j) const {
  if (i < 0 || i >= dim || j < 0 || j >= dim)
    fail(ErrorCode::invalid_argument, "matrix index out of range");
  for (const auto& e : rows[i])
    if (e.first == j) return e.second;
  return 0.0;
}

std::size_t SparseNonnegMatrix::nonzero_count() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.size();
  return n;
}

SparseNonnegMatrix entrywise_power(const SparseNonnegMatrix& m, double t) {
  SparseNonnegMatrix out = m;
  if (t == 1.0) return out;
  for (auto& row : out.rows)
    for (auto& e : row) e.second = std::pow(e.second, t);
  return out;
}

PrimitivityInfo is_primitive(const SparseNonnegMatrix& m) {
  if (m.dim < 1)
    fail(ErrorCode::invalid_argument, "matrix dimension must be >= 1");
  const int n = m.dim;
  std::vector<std::vector<int>> rev(n);
  for (int i = 0; i < n; ++i)
    for (const auto& e : m.rows[i]) rev[e.first].push_back(i);

  auto bfs_levels = [&](bool forward) {
    std::vector<int> level(n, -1);
    std::queue<int> q;
    level[0] = 0;
    q.push(0);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      if (forward) {
        for (const auto& e : m.rows[u])
          if (level[e.first] < 0) {
            level[e.first] = level[u] + 1;
            q.push(e.first);
          }
      } else {
        for (int v : rev[u])
          if (level[v] < 0) {
            level[v] = level[u] + 1;
            q.push(v);
          }
      }
    }
    return level;
  };

  std::vector<int> fwd = bfs_levels(true);
  std::vector<int> bwd = bfs_levels(false);
  PrimitivityInfo info;
  info.irreducible = true;
  for (int v = 0; v < n; ++v)
    if (fwd[v] < 0 || bwd[v] < 0) info.irreducible = false;
  if (!info.irreducible) return info;

  // gcd of level defects over all edges; tree edges contribute 0 (no-op)
  long long g = 0;
  for (int u = 0; u < n; ++u)
    for (const auto& e : m.rows[u]) {
      long long d = static_cast<long long>(fwd[u]) + 1 - fwd[e.first];
      g = std::gcd(g, std::abs(d));
    }
  info.period = static_cast<int>(g);
  info.primitive = info.period == 1;
  return info;
}

namespace {

// y = (M + I) x, row-parallel when asked; each component is summed by a
// single thread so the result does not depend on the thread count.
void shifted_matvec(const SparseNonnegMatrix& m, const std::vector<double>& x,
                    std::vector<double>& y, int threads) {
  const int n = m.dim;
  auto rows = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      double s = x[i];
      for (const auto& e : m.rows[i]) s += e.second * x[e.first];
      y[i] = s;
    }
  };
  if (threads <= 1 || n < 1024) {
    rows(0, n);
    return;
  }
  std::vector<std::thread> pool;
  for (int k = 0; k < threads; ++k) {
    int lo = static_cast<int>(static_cast<long long>(n) * k / threads);
    int hi = static_cast<int>(static_cast<long long>(n) * (k + 1) / threads);
    pool.emplace_back(rows, lo, hi);
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

PerronResult spectral_radius(const SparseNonnegMatrix& m,
                             const PerronOptions& opt) {
  if (m.dim < 1)
    fail(ErrorCode::invalid_argument, "matrix dimension must be >= 1");
  PerronResult res;
  PrimitivityInfo info = is_primitive(m);
  res.irreducible = info.irreducible;
  res.period = info.period;
  res.primitive = info.primitive;

  const int n = m.dim;
  std::vector<double> x(n, 1.0), y(n, 0.0);
  double mu = 1.0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    shifted_matvec(m, x, y, opt.threads);
    mu = 0.0;
    for (double v : y) mu = std::max(mu, v);
    if (mu == 0.0) {  // cannot happen: the shift keeps y >= x
      res.radius = 0.0;
      res.iterations = it;
      res.converged = true;
      return res;
    }
    double resid = 0.0;
    for (int i = 0; i < n; ++i) resid = std::max(resid, std::abs(y[i] - mu * x[i]));
    for (int i = 0; i < n; ++i) x[i] = y[i] / mu;
    res.iterations = it;
    res.residual = resid / mu;
    if (res.residual <= opt.tol) {
      res.converged = true;
      break;
    }
  }
  res.radius = mu - 1.0;
  if (res.radius < 0.0 && res.radius > -1e-14) res.radius = 0.0;
  return res;
}

RootInT perron_root_in_t(const SparseNonnegMatrix& m, double t_lo, double t_hi,
                         double tol_t, const PerronOptions& opt) {
  if (!(t_lo < t_hi))
    fail(ErrorCode::invalid_argument, "root bracket must satisfy t_lo < t_hi");
  if (m.empty())
    fail(ErrorCode::empty_matrix,
         "matrix has no nonzero entries; the Perron root vanishes "
         "identically");

  RootInT out;
  auto eval = [&](double t) {
    ++out.evaluations;
    return spectral_radius(entrywise_power(m, t), opt).radius;
  };

  constexpr int kScan = 16;
  double ts[kScan], ls[kScan];
  for (int k = 0; k < kScan; ++k) {
    ts[k] = t_lo + (t_hi - t_lo) * k / (kScan - 1);
    ls[k] = eval(ts[k]);
  }
  if (!(ls[0] > 1.0) || !(ls[kScan - 1] < 1.0)) {
    std::ostringstream msg;
    msg << "no Perron root in bracket: lambda(" << t_lo << ") = " << ls[0]
        << ", lambda(" << t_hi << ") = " << ls[kScan - 1];
    fail(ErrorCode::no_sign_change, msg.str());
  }
  out.monotone = true;
  for (int k = 0; k + 1 < kScan; ++k)
    if (ls[k + 1] > ls[k] + 1e-12 * std::max(1.0, ls[k])) out.monotone = false;

  // first crossing; for a monotone curve this is the only one
  int seg = 0;
  while (seg + 1 < kScan && !(ls[seg] >= 1.0 && ls[seg + 1] < 1.0)) ++seg;
  if (seg + 1 >= kScan) seg = 0;  // crossing hidden between scan points
  double lo = ts[seg], hi = ts[seg + 1];
  double lam_mid = ls[seg];
  double mid = lo;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    lam_mid = eval(mid);
    if ((hi - lo) * 0.5 <= tol_t && std::abs(lam_mid - 1.0) <= 1e-8) break;
    if (lam_mid >= 1.0)
      lo = mid;
    else
      hi = mid;
  }
  out.t = mid;
  out.lambda = lam_mid;
  return out;
}

std::string dump_triplets(const SparseNonnegMatrix& m) {
  std::ostringstream os;
  os << m.dim << "\n";
  os << std::setprecision(17);
  for (int i = 0; i < m.dim; ++i)
    for (const auto& e : m.rows[i])
      os << i << " " << e.first << " " << e.second << "\n";
  return os.str();
}

SparseNonnegMatrix parse_triplets(const std::string& text) {
  std::istringstream is(text);
  int n = 0;
  if (!(is >> n) || n < 1)
    fail(ErrorCode::io, "triplet text must start with the dimension");
  SparseNonnegMatrix m = SparseNonnegMatrix::zero(n);
  int i, j;
  double w;
  while (is >> i >> j >> w) m.add(i, j, w);
  return m;
}

}  // namespace jdim
