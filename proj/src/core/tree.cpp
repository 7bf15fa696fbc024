#include "core/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "core/accum.hpp"
#include "core/errors.hpp"
#include "core/seeding.hpp"

namespace jdim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const Map& f, TreeEstimator kind, const TreeParams& p) {
  if (p.depth < 1) fail(ErrorCode::invalid_argument, "tree depth must be >= 1");
  double leaves = std::pow(static_cast<double>(f.degree()), p.depth);
  if (leaves > static_cast<double>(p.node_budget))
    fail(ErrorCode::budget_exceeded,
         "degree^depth exceeds the node budget (" +
             std::to_string(p.node_budget) + ")");
  switch (kind) {
    case TreeEstimator::plain:
      break;
    case TreeEstimator::fuzzy:
      if (!(p.delta > 0.0))
        fail(ErrorCode::invalid_argument, "fuzzy estimator needs delta > 0");
      break;
    case TreeEstimator::restricted_fuzzy:
      if (!(p.big_delta > 0.0))
        fail(ErrorCode::invalid_argument,
             "restricted estimator needs Delta > 0");
      if (!(p.delta > 0.0) || p.delta > p.big_delta / 10.0)
        fail(ErrorCode::invalid_argument, "delta must be at most Delta/10");
      break;
    case TreeEstimator::multi_sample:
      if (p.samples < 2)
        fail(ErrorCode::invalid_argument, "multi_sample needs m >= 2");
      if (!(p.delta > 0.0))
        fail(ErrorCode::invalid_argument, "multi_sample needs delta > 0");
      break;
  }
}

struct Node {
  cpx z;
  double log_plain;
  double log_weight;
  double multiplicity;
};

class Walker {
 public:
  Walker(const Map& f, TreeEstimator kind, const TreeParams& p)
      : f_(f), kind_(kind), p_(p), phase_(orientation_from_seed(p.seed)) {
    if (kind == TreeEstimator::multi_sample) {
      sample_dirs_.reserve(p.samples);
      for (int j = 0; j < p.samples; ++j) {
        double a = phase_ + 2.0 * M_PI * j / p.samples;
        sample_dirs_.push_back(0.5 * p.delta *
                               cpx(std::cos(a), std::sin(a)));
      }
    }
  }

  std::uint64_t pruned = 0;
  std::uint64_t collapsed = 0;
  bool hit_critical = false;

  // Step weight base at a new tree point, or a negative value when the
  // subtree is pruned by the critical exclusion.
  double step_log_base(cpx w) {
    switch (kind_) {
      case TreeEstimator::plain:
        return std::log(f_.derivative_modulus(w, p_.metric));
      case TreeEstimator::fuzzy:
        return std::log(
            f_.derivative_bounds_on_disk(w, p_.delta, p_.metric).upper);
      case TreeEstimator::restricted_fuzzy: {
        // Weight at the point of the closed delta-ball where |f'| peaks.
        // For unicritical maps that point value equals the closed-form disk
        // bound; reusing it keeps the fuzzy comparison exact.
        if (f_.kind() == MapKind::unicritical)
          return std::log(
              f_.derivative_bounds_on_disk(w, p_.delta, p_.metric).upper);
        cpx peak = f_.argmax_derivative_on_disk(w, p_.delta);
        return std::log(f_.derivative_modulus(peak, p_.metric));
      }
      case TreeEstimator::multi_sample: {
        double best = 0.0;
        for (const cpx& dir : sample_dirs_)
          best = std::max(best, f_.derivative_modulus(w + dir, p_.metric));
        return std::log(best);
      }
    }
    return 0.0;
  }

  bool prunes(cpx w) const {
    return kind_ == TreeEstimator::restricted_fuzzy &&
           f_.distance_to_critical_set(w) <= p_.big_delta;
  }

  template <typename Visit>
  void descend(const Node& node, int depth_left, std::span<const cpx> warm,
               const Visit& visit) {
    if (depth_left == 0) {
      visit(BranchAggregate{node.z, node.log_plain, node.log_weight,
                            node.multiplicity});
      return;
    }
    std::vector<PreimageRoot> fiber = f_.preimages(node.z, warm);
    std::vector<cpx> next_warm;
    next_warm.reserve(fiber.size());
    for (const PreimageRoot& r : fiber) next_warm.push_back(r.point);
    for (const PreimageRoot& r : fiber) {
      if (prunes(r.point)) {
        ++pruned;
        continue;
      }
      if (r.multiplicity > 1) ++collapsed;
      double lp = f_.derivative_modulus(r.point, p_.metric);
      double lb = step_log_base(r.point);
      if (lp == 0.0 || lb == -kInf) hit_critical = true;
      Node child{r.point, node.log_plain + std::log(lp),
                 node.log_weight + lb,
                 node.multiplicity * r.multiplicity};
      descend(child, depth_left - 1, next_warm, visit);
    }
  }

 private:
  const Map& f_;
  TreeEstimator kind_;
  TreeParams p_;
  double phase_;
  std::vector<cpx> sample_dirs_;
};

}  // namespace

void expand_tree(const Map& f, cpx base, TreeEstimator kind,
                 const TreeParams& p,
                 const std::function<void(const BranchAggregate&)>& visit,
                 TreeResult* stats) {
  validate(f, kind, p);
  Walker w(f, kind, p);
  Node root{base, 0.0, 0.0, 1.0};
  w.descend(root, p.depth, {}, visit);
  if (stats) {
    stats->pruned = w.pruned;
    stats->collapsed = w.collapsed;
    if (w.collapsed > 0)
      stats->warnings.push_back("fiber collapsed onto a critical point");
    if (w.hit_critical)
      stats->warnings.push_back(
          "branch passes through a critical point; plain weights are "
          "infinite");
  }
}

TreeResult tree_pressure(const Map& f, cpx base, TreeEstimator kind,
                         const TreeParams& p, std::span<const double> t_grid) {
  validate(f, kind, p);
  if (t_grid.empty())
    fail(ErrorCode::invalid_argument, "empty t grid");

  TreeResult out;
  GridAccum total(t_grid);
  Walker seed_walker(f, kind, p);

  int threads = std::max(1, p.threads);
  if (threads == 1) {
    expand_tree(f, base, kind, p,
                [&](const BranchAggregate& b) {
                  total.add(b.log_weight, b.multiplicity);
                },
                &out);
  } else {
    // Breadth-first expansion to a small frontier, then one worker per
    // contiguous slice. Merging in slice order keeps results independent of
    // scheduling.
    std::vector<Node> frontier{Node{base, 0.0, 0.0, 1.0}};
    int level = 0;
    while (level < p.depth &&
           frontier.size() < static_cast<std::size_t>(threads) * 4) {
      std::vector<Node> next;
      for (const Node& nd : frontier) {
        std::vector<PreimageRoot> fiber = f.preimages(nd.z);
        for (const PreimageRoot& r : fiber) {
          if (seed_walker.prunes(r.point)) {
            ++seed_walker.pruned;
            continue;
          }
          if (r.multiplicity > 1) ++seed_walker.collapsed;
          double lp = f.derivative_modulus(r.point, p.metric);
          double lb = seed_walker.step_log_base(r.point);
          if (lp == 0.0 || lb == -kInf) seed_walker.hit_critical = true;
          next.push_back(Node{r.point, nd.log_plain + std::log(lp),
                              nd.log_weight + lb,
                              nd.multiplicity * r.multiplicity});
        }
      }
      frontier = std::move(next);
      ++level;
      if (frontier.empty()) break;
    }

    const int remaining = p.depth - level;
    std::vector<GridAccum> partial(threads, GridAccum(t_grid));
    std::vector<Walker> walkers;
    walkers.reserve(threads);
    for (int i = 0; i < threads; ++i) walkers.emplace_back(f, kind, p);

    std::vector<std::thread> pool;
    const std::size_t n = frontier.size();
    for (int i = 0; i < threads; ++i) {
      std::size_t lo = n * i / threads;
      std::size_t hi = n * (i + 1) / threads;
      pool.emplace_back([&, i, lo, hi]() {
        for (std::size_t j = lo; j < hi; ++j)
          walkers[i].descend(frontier[j], remaining, {},
                             [&](const BranchAggregate& b) {
                               partial[i].add(b.log_weight, b.multiplicity);
                             });
      });
    }
    for (std::thread& th : pool) th.join();
    for (int i = 0; i < threads; ++i) {
      total.merge(partial[i]);
      seed_walker.pruned += walkers[i].pruned;
      seed_walker.collapsed += walkers[i].collapsed;
      seed_walker.hit_critical =
          seed_walker.hit_critical || walkers[i].hit_critical;
    }
    out.pruned = seed_walker.pruned;
    out.collapsed = seed_walker.collapsed;
    if (out.collapsed > 0)
      out.warnings.push_back("fiber collapsed onto a critical point");
    if (seed_walker.hit_critical)
      out.warnings.push_back(
          "branch passes through a critical point; plain weights are "
          "infinite");
  }

  out.branch_count = total.count();
  out.sentinel = total.count() == 0.0;
  if (out.sentinel)
    out.warnings.push_back("all branches pruned; pressure undefined");
  out.samples.reserve(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k)
    out.samples.push_back({t_grid[k], total.value(k, p.depth)});
  return out;
}

double tree_pressure_at(const Map& f, cpx base, TreeEstimator kind,
                        const TreeParams& p, double t) {
  double ts[1] = {t};
  TreeResult r = tree_pressure(f, base, kind, p, ts);
  return r.samples[0].value;
}

const char* tree_estimator_name(TreeEstimator kind) {
  switch (kind) {
    case TreeEstimator::plain: return "tree-plain";
    case TreeEstimator::fuzzy: return "tree-fuzzy";
    case TreeEstimator::restricted_fuzzy: return "tree-restricted";
    case TreeEstimator::multi_sample: return "tree-msample";
  }
  return "tree";
}

}  // namespace jdim
