#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "core/map.hpp"

namespace jdim {

enum class TreeEstimator { plain, fuzzy, restricted_fuzzy, multi_sample };

struct TreeParams {
  int depth = 10;
  double delta = 0.0;      // ball radius for fuzzy / restricted / sampling
  double big_delta = 0.0;  // critical exclusion distance (restricted)
  int samples = 2;         // m, multi_sample only
  unsigned seed = 0;       // sample orientation; 0 = real axis
  std::uint64_t node_budget = 1ull << 24;
  int threads = 1;
  Metric metric = Metric::euclidean;
};

// One backward branch of depth n, reduced to the aggregates every t reuses:
// log_plain  = sum log|f'| over the branch points (= log |(f^n)'| at the end),
// log_weight = sum of the log of the per-step weight base for the chosen
// estimator. The branch contributes multiplicity * exp(-t * log_weight).
struct BranchAggregate {
  cpx endpoint;
  double log_plain;
  double log_weight;
  double multiplicity;
};

struct PressureSample {
  double t;
  double value;
};

struct TreeResult {
  std::vector<PressureSample> samples;
  double branch_count = 0.0;    // surviving branches, with multiplicity
  std::uint64_t pruned = 0;     // subtrees cut by the critical exclusion
  std::uint64_t collapsed = 0;  // exact critical-value fibers met
  bool sentinel = false;        // nothing survived; values are -inf
  std::vector<std::string> warnings;
};

// Expand the full preimage tree of `base` to depth p.depth and stream one
// aggregate per surviving branch. Deterministic depth-first order.
// Single-threaded; the pressure driver below adds the threaded path.
void expand_tree(const Map& f, cpx base, TreeEstimator kind,
                 const TreeParams& p,
                 const std::function<void(const BranchAggregate&)>& visit,
                 TreeResult* stats = nullptr);

// Pressure values (1/n) log sum_branches mult * exp(-t log_weight) for the
// whole t grid from a single expansion.
TreeResult tree_pressure(const Map& f, cpx base, TreeEstimator kind,
                         const TreeParams& p, std::span<const double> t_grid);

// Re-evaluate at a single t (used by zero refinement).
double tree_pressure_at(const Map& f, cpx base, TreeEstimator kind,
                        const TreeParams& p, double t);

const char* tree_estimator_name(TreeEstimator kind);

}  // namespace jdim
