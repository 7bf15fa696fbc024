#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace jdim {

// Row-sparse nonnegative matrix. Stored weights are the t = 1 entries;
// entrywise_power produces the t-power copies. Exact zeros are never
// stored, so structural zeros survive any power.
struct SparseNonnegMatrix {
  int dim = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;

  static SparseNonnegMatrix zero(int n);
  void add(int i, int j, double w);  // accumulates; drops w == 0
  double weight(int i, int j) const;
  std::size_t nonzero_count() const;
  bool empty() const { return nonzero_count() == 0; }
};

SparseNonnegMatrix entrywise_power(const SparseNonnegMatrix& m, double t);

struct PrimitivityInfo {
  bool irreducible = false;
  int period = 0;  // 0 when not irreducible
  bool primitive = false;
};

// Reachability both ways from vertex 0, then period = gcd of
// (level[u] + 1 - level[v]) over edges on a BFS labelling.
PrimitivityInfo is_primitive(const SparseNonnegMatrix& m);

struct PerronOptions {
  double tol = 1e-10;
  int max_iterations = 20000;
  int threads = 1;
};

struct PerronResult {
  double radius = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool irreducible = false;
  int period = 0;
  bool primitive = false;
};

// Power iteration on M + I from the all-ones vector; the shift makes
// periodic irreducible matrices converge. Reports radius(M + I) - 1.
// Hitting the iteration cap flags the result instead of throwing.
PerronResult spectral_radius(const SparseNonnegMatrix& m,
                             const PerronOptions& opt = {});

struct RootInT {
  double t = 0.0;
  double lambda = 0.0;  // Perron root at t
  bool monotone = true;
  int evaluations = 0;
};

// Solve lambda(M^t) = 1 on [t_lo, t_hi]. Requires log lambda > 0 at t_lo
// and < 0 at t_hi. A 16-sample scan checks that log lambda decreases
// across the bracket; when it does not, bisection runs on the first sign
// change and the result is flagged non-monotone.
RootInT perron_root_in_t(const SparseNonnegMatrix& m, double t_lo,
                         double t_hi, double tol_t = 1e-6,
                         const PerronOptions& opt = {});

// Plain-text triplet dump (dimension line, then "i j weight" lines) and
// its inverse, for external checking and the cache.
std::string dump_triplets(const SparseNonnegMatrix& m);
SparseNonnegMatrix parse_triplets(const std::string& text);

}  // namespace jdim
