#include "core/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "core/accum.hpp"
#include "core/errors.hpp"

namespace jdim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const Map& f, cpx base, const PullbackParams& p) {
  if (p.depth < 1)
    fail(ErrorCode::invalid_argument, "pullback depth must be >= 1");
  if (!(p.radius > 0.0))
    fail(ErrorCode::invalid_argument, "initial radius must be positive");
  if (!(p.kappa >= 1.0))
    fail(ErrorCode::invalid_argument, "kappa must be >= 1");
  double leaves = std::pow(static_cast<double>(f.degree()), p.depth);
  if (leaves > static_cast<double>(p.node_budget))
    fail(ErrorCode::budget_exceeded,
         "degree^depth exceeds the node budget (" +
             std::to_string(p.node_budget) + ")");
  double dc = f.distance_to_critical_set(base);
  if (std::isfinite(dc) && p.radius > p.max_radius_fraction * dc)
    fail(ErrorCode::invalid_argument,
         "initial radius exceeds the allowed fraction of the distance to "
         "the critical set");
}

struct PNode {
  cpx z;
  double rho;  // enclosure radius at z
  double log_plain;
  double log_weight;
  double multiplicity;
};

struct WalkStats {
  std::uint64_t saturated = 0;
  std::uint64_t total = 0;
};

// Depth-first expansion shared by the pressure and telescope drivers.
template <typename Visit>
void descend(const Map& f, const PullbackParams& p, const PNode& node,
             int depth_left, std::span<const cpx> warm, WalkStats& stats,
             const Visit& visit) {
  if (depth_left == 0) {
    visit(node);
    return;
  }
  std::vector<PreimageRoot> fiber = f.preimages(node.z, warm);
  std::vector<cpx> next_warm;
  next_warm.reserve(fiber.size());
  for (const PreimageRoot& r : fiber) next_warm.push_back(r.point);
  DiskEnclosure image{node.z, node.rho, false};
  for (const PreimageRoot& r : fiber) {
    DiskEnclosure e = propagate_disk(f, r.point, image, p.kappa);
    ++stats.total;
    if (e.saturated) ++stats.saturated;
    double dp = f.derivative_modulus(r.point, p.metric);
    double db = f.derivative_bounds_on_disk(r.point, e.radius, p.metric).upper;
    PNode child{r.point, e.radius, node.log_plain + std::log(dp),
                node.log_weight + std::log(db),
                node.multiplicity * r.multiplicity};
    descend(f, p, child, depth_left - 1, next_warm, stats, visit);
  }
}

}  // namespace

DiskEnclosure propagate_disk(const Map& f, cpx w, const DiskEnclosure& image,
                             double kappa) {
  double deriv = f.derivative_modulus(w, Metric::euclidean);
  if (deriv < 1e-12)
    fail(ErrorCode::invalid_argument,
         "derivative underflow at a branch point; enclosure propagation "
         "breaks down near the critical set");
  double raw = kappa * image.radius / deriv;
  double cap = f.distance_to_critical_set(w) / 2.0;
  DiskEnclosure out{w, raw, false};
  if (raw > cap) {
    out.radius = cap;
    out.saturated = true;
  }
  return out;
}

PullbackResult pullback_pressure(const Map& f, cpx base,
                                 const PullbackParams& p,
                                 std::span<const double> t_grid) {
  validate(f, base, p);
  if (t_grid.empty()) fail(ErrorCode::invalid_argument, "empty t grid");

  PullbackResult out;
  GridAccum total(t_grid);
  WalkStats stats;
  PNode root{base, p.radius, 0.0, 0.0, 1.0};

  int threads = std::max(1, p.threads);
  if (threads == 1) {
    descend(f, p, root, p.depth, {}, stats,
            [&](const PNode& b) { total.add(b.log_weight, b.multiplicity); });
  } else {
    std::vector<PNode> frontier{root};
    int level = 0;
    while (level < p.depth &&
           frontier.size() < static_cast<std::size_t>(threads) * 4) {
      std::vector<PNode> next;
      for (const PNode& nd : frontier) {
        std::vector<PreimageRoot> fiber = f.preimages(nd.z);
        DiskEnclosure image{nd.z, nd.rho, false};
        for (const PreimageRoot& r : fiber) {
          DiskEnclosure e = propagate_disk(f, r.point, image, p.kappa);
          ++stats.total;
          if (e.saturated) ++stats.saturated;
          double dp = f.derivative_modulus(r.point, p.metric);
          double db =
              f.derivative_bounds_on_disk(r.point, e.radius, p.metric).upper;
          next.push_back(PNode{r.point, e.radius,
                               nd.log_plain + std::log(dp),
                               nd.log_weight + std::log(db),
                               nd.multiplicity * r.multiplicity});
        }
      }
      frontier = std::move(next);
      ++level;
      if (frontier.empty()) break;
    }

    const int remaining = p.depth - level;
    std::vector<GridAccum> partial(threads, GridAccum(t_grid));
    std::vector<WalkStats> wstats(threads);
    std::vector<std::thread> pool;
    const std::size_t n = frontier.size();
    for (int i = 0; i < threads; ++i) {
      std::size_t lo = n * i / threads;
      std::size_t hi = n * (i + 1) / threads;
      pool.emplace_back([&, i, lo, hi]() {
        for (std::size_t j = lo; j < hi; ++j)
          descend(f, p, frontier[j], remaining, {}, wstats[i],
                  [&](const PNode& b) {
                    partial[i].add(b.log_weight, b.multiplicity);
                  });
      });
    }
    for (std::thread& th : pool) th.join();
    for (int i = 0; i < threads; ++i) {
      total.merge(partial[i]);
      stats.saturated += wstats[i].saturated;
      stats.total += wstats[i].total;
    }
  }

  out.branch_count = total.count();
  out.saturated_steps = stats.saturated;
  out.total_steps = stats.total;
  if (stats.total > 0 && 2 * stats.saturated > stats.total)
    out.warnings.push_back(
        "more than half of the enclosure steps hit the critical-distance "
        "cap; the infimum bound is weak");
  out.samples.reserve(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k)
    out.samples.push_back({t_grid[k], total.value(k, p.depth)});
  return out;
}

double pullback_pressure_at(const Map& f, cpx base, const PullbackParams& p,
                            double t) {
  double ts[1] = {t};
  return pullback_pressure(f, base, p, ts).samples[0].value;
}

TelescopeResult telescope_diagnostic(const Map& f, cpx base,
                                     const PullbackParams& p) {
  validate(f, base, p);
  TelescopeResult out;
  WalkStats stats;
  PNode root{base, p.radius, 0.0, 0.0, 1.0};
  descend(f, p, root, p.depth, {}, stats, [&](const PNode& b) {
    // log of (branch infimum weight at t = 1) / |(f^n)'|^{-1}, per level
    double v = (b.log_plain - b.log_weight) / p.depth;
    out.per_branch.push_back(v);
    out.max_abs = std::max(out.max_abs, std::abs(v));
  });
  out.saturated_fraction =
      stats.total == 0
          ? 0.0
          : static_cast<double>(stats.saturated) / static_cast<double>(stats.total);
  if (out.per_branch.empty()) out.max_abs = -kInf;
  return out;
}

}  // namespace jdim
