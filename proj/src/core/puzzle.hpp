#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/green.hpp"
#include "core/map.hpp"
#include "core/spectral.hpp"

namespace jdim {

enum class MatrixMode {
  plain,
  fuzzy,
  restricted,
  restricted_fuzzy,
  double_sample,
  double_sample_in_piece,
  multiple,
};

const char* matrix_mode_name(MatrixMode mode);

// Row filter A(N) for the restricted modes: a piece survives when
// dist_to_crit / diam >= A(depth). Default A(N) = N, which grows while
// A(N) * max_diam(N) still shrinks for expanding puzzles.
struct RestrictionSchedule {
  std::function<double(int)> value;

  static RestrictionSchedule linear() {
    return {[](int n) { return static_cast<double>(n); }};
  }
  static RestrictionSchedule constant(double a) {
    return {[a](int) { return a; }};
  }
};

struct PuzzleOptions {
  double eta = 0.2;           // equipotential level of the depth-0 pieces
  std::vector<Angle> angles;  // dissection ray angles; empty = {0, 1/2}
  int arc_samples = 4;        // sample angles per angular gap
  int potential_samples = 3;  // sample potentials per angle
  double ray_eta_min = 1e-5;  // how deep rays are traced toward landing
  unsigned seed = 0;          // double-sample orientation
  Metric metric = Metric::euclidean;
};

struct PuzzlePiece {
  std::vector<int> word;  // depth-0 sector itinerary, length depth+1
  cpx y;                  // distinguished point
  std::vector<cpx> samples;
  double diam = 0.0;          // max pairwise sample distance
  double dist_to_crit = 0.0;  // min over samples
  cpx disk_center;            // enclosing disk of the sample cloud,
  double disk_radius = 0.0;   // radius inflated by 1.2
};

struct Transition {
  int from = 0;
  int to = 0;
  int s = 0;  // branch count of the pullback, >= 1
};

struct PuzzleLevel {
  int depth = 0;
  std::vector<PuzzlePiece> pieces;
  std::vector<Transition> transitions;
  std::uint64_t misclassified = 0;  // sample preimages that failed to place

  double max_diam() const;
};

// Yoccoz-style puzzle of a unicritical polynomial with connected Julia
// set. Depth-0 pieces are the components of {G < eta} cut by external
// rays; for real maps with angles in {0, 1/2} the cut is the real spine
// and sector membership is the sign of Im. Otherwise the traced rays must
// co-land in groups, and membership uses crossing parity against the cut
// polylines. Refinement is combinatorial: every transition (i, j) with
// branch count s spawns s child pieces carrying branch-pulled-back sample
// clouds.
class Puzzle {
 public:
  Puzzle(const Map& f, const PuzzleOptions& opt);

  const Map& map() const { return f_; }
  const PuzzleOptions& options() const { return opt_; }
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  const PuzzleLevel& level(int n) const;
  void refine_to(int n);

  int sector_count() const;
  int sector(cpx w) const;
  // Full membership test: potential bound, sector itinerary, and nearest
  // distinguished point among pieces sharing the itinerary.
  bool member(cpx w, int depth, int piece) const;

  SparseNonnegMatrix matrix(int depth, MatrixMode mode,
                            const RestrictionSchedule& schedule =
                                RestrictionSchedule::linear()) const;

  void save(const std::string& path, bool binary) const;
  static Puzzle load(const std::string& path);

 private:
  Puzzle() = default;
  void build_base();
  void refine_next();
  int classify_sibling(cpx w, const std::vector<int>& group, int lvl) const;

  Map f_ = Map::unicritical(2, 0.0);
  PuzzleOptions opt_;
  bool spine_ = false;                         // real-axis cut shortcut
  std::vector<std::vector<cpx>> arcs_;         // cut polylines (cross-cuts)
  cpx ref_;                                    // signature reference point
  std::vector<std::vector<char>> signatures_;  // per depth-0 sector
  std::vector<PuzzleLevel> levels_;
};

}  // namespace jdim
