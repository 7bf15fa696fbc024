#include "core/puzzle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/seeding.hpp"

namespace jdim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string word_key(const std::vector<int>& word) {
  std::string k;
  k.reserve(word.size());
  for (int v : word) k.push_back(static_cast<char>('0' + v));
  return k;
}

double cross(cpx o, cpx a, cpx b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) -
         (a.imag() - o.imag()) * (b.real() - o.real());
}

bool segments_cross(cpx p, cpx q, cpx a, cpx b) {
  double d1 = cross(p, q, a);
  double d2 = cross(p, q, b);
  double d3 = cross(a, b, p);
  double d4 = cross(a, b, q);
  return ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0)) &&
         d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0;
}

int crossing_parity(cpx w, cpx ref, const std::vector<cpx>& polyline) {
  int count = 0;
  for (std::size_t k = 0; k + 1 < polyline.size(); ++k)
    if (segments_cross(w, ref, polyline[k], polyline[k + 1])) ++count;
  return count & 1;
}

bool lex_less(cpx a, cpx b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

int angle_period(const Angle& a, int d) {
  Angle t = a;
  for (int p = 1; p <= 64; ++p) {
    t = t.times(d);
    if (t == a) return p;
  }
  fail(ErrorCode::invalid_argument,
       "dissection angle " + a.str() +
           " is not periodic under multiplication by the degree");
}

// Landing point of a periodic ray: Newton for the fixed point of f^p
// seeded with the deepest traced ray point.
cpx polish_landing(const Map& f, cpx z0, int period) {
  cpx z = z0;
  for (int it = 0; it < 60; ++it) {
    cpx val = z;
    cpx der = 1.0;
    for (int k = 0; k < period; ++k) {
      der *= f.derivative(val);
      val = f.evaluate(val);
    }
    cpx g = val - z;
    cpx gp = der - 1.0;
    if (std::abs(gp) == 0.0) break;
    cpx step = g / gp;
    z -= step;
    if (std::abs(step) < 1e-13 * (1.0 + std::abs(z))) return z;
  }
  fail(ErrorCode::non_convergence, "external ray landing did not converge");
}

struct PieceGeometry {
  double diam;
  double dist;
  cpx center;
  double radius;
};

PieceGeometry cloud_geometry(const Map& f, const std::vector<cpx>& cloud) {
  PieceGeometry g{0.0, kInf, 0.0, 0.0};
  cpx mean = 0.0;
  for (cpx s : cloud) {
    mean += s;
    g.dist = std::min(g.dist, f.distance_to_critical_set(s));
  }
  mean /= static_cast<double>(cloud.size());
  g.center = mean;
  double r0 = 0.0;
  for (cpx s : cloud) r0 = std::max(r0, std::abs(s - mean));
  g.radius = 1.2 * r0;
  for (std::size_t a = 0; a < cloud.size(); ++a)
    for (std::size_t b = a + 1; b < cloud.size(); ++b)
      g.diam = std::max(g.diam, std::abs(cloud[a] - cloud[b]));
  return g;
}

// Deterministic central representative: the cloud point whose farthest
// cloud neighbour is nearest.
cpx one_center(const std::vector<cpx>& cloud) {
  cpx best = cloud.front();
  double best_score = kInf;
  for (cpx cand : cloud) {
    double score = 0.0;
    for (cpx s : cloud) score = std::max(score, std::abs(cand - s));
    if (score < best_score ||
        (score == best_score && lex_less(cand, best))) {
      best_score = score;
      best = cand;
    }
  }
  return best;
}

}  // namespace

const char* matrix_mode_name(MatrixMode mode) {
  switch (mode) {
    case MatrixMode::plain: return "plain";
    case MatrixMode::fuzzy: return "fuzzy";
    case MatrixMode::restricted: return "restricted";
    case MatrixMode::restricted_fuzzy: return "restricted-fuzzy";
    case MatrixMode::double_sample: return "double-sample";
    case MatrixMode::double_sample_in_piece: return "double-sample-in-piece";
    case MatrixMode::multiple: return "multiple";
  }
  return "plain";
}

double PuzzleLevel::max_diam() const {
  double m = 0.0;
  for (const PuzzlePiece& p : pieces) m = std::max(m, p.diam);
  return m;
}

Puzzle::Puzzle(const Map& f, const PuzzleOptions& opt) : f_(f), opt_(opt) {
  if (f.kind() != MapKind::unicritical)
    fail(ErrorCode::invalid_argument,
         "puzzles are built for unicritical polynomials only");
  if (!(opt_.eta > 0.0))
    fail(ErrorCode::invalid_argument, "equipotential level must be positive");
  if (opt_.arc_samples < 2 || opt_.potential_samples < 1)
    fail(ErrorCode::invalid_argument, "puzzle sample grid is too small");
  require_connected_julia(f_);
  if (opt_.angles.empty()) {
    opt_.angles = {Angle::make(0, 1), Angle::make(1, 2)};
  }
  std::sort(opt_.angles.begin(), opt_.angles.end());
  opt_.angles.erase(std::unique(opt_.angles.begin(), opt_.angles.end()),
                    opt_.angles.end());
  for (const Angle& a : opt_.angles) {
    Angle fwd = a.times(f_.degree());
    if (!std::binary_search(opt_.angles.begin(), opt_.angles.end(), fwd))
      fail(ErrorCode::invalid_argument,
           "dissection angles are not closed under multiplication by the "
           "degree (" + a.str() + " maps to " + fwd.str() + ")");
  }
  build_base();
}

int Puzzle::sector_count() const {
  return spine_ ? 2 : static_cast<int>(signatures_.size());
}

int Puzzle::sector(cpx w) const {
  if (spine_) return w.imag() >= 0.0 ? 0 : 1;
  std::vector<char> sig(arcs_.size());
  for (std::size_t k = 0; k < arcs_.size(); ++k)
    sig[k] = static_cast<char>(crossing_parity(w, ref_, arcs_[k]));
  for (std::size_t i = 0; i < signatures_.size(); ++i)
    if (signatures_[i] == sig) return static_cast<int>(i);
  return -1;
}

void Puzzle::build_base() {
  const int d = f_.degree();
  const double eta = opt_.eta;

  spine_ = f_.has_real_coefficients();
  if (spine_)
    for (const Angle& a : opt_.angles)
      if (!(a == Angle::make(0, 1) || a == Angle::make(1, 2))) spine_ = false;

  if (!spine_) {
    // Trace the rays, polish their landing points, and group co-landing
    // rays into cross-cut arcs.
    std::vector<ExternalRay> rays;
    std::vector<cpx> landings;
    for (const Angle& a : opt_.angles) {
      ExternalRay r = trace_external_ray(f_, a, 1.5 * eta, opt_.ray_eta_min);
      int p = angle_period(a, d);
      landings.push_back(polish_landing(f_, r.points.back().z, p));
      rays.push_back(std::move(r));
    }
    std::vector<std::vector<int>> groups;
    std::vector<cpx> group_land;
    for (std::size_t k = 0; k < rays.size(); ++k) {
      bool placed = false;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (std::abs(landings[k] - group_land[g]) <=
            1e-6 * (1.0 + std::abs(group_land[g]))) {
          groups[g].push_back(static_cast<int>(k));
          placed = true;
          break;
        }
      }
      if (!placed) {
        groups.push_back({static_cast<int>(k)});
        group_land.push_back(landings[k]);
      }
    }
    arcs_.clear();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].size() < 2)
        fail(ErrorCode::invalid_argument,
             "ray " + opt_.angles[groups[g][0]].str() +
                 " lands alone; dissection rays must co-land in groups of "
                 "at least two");
      for (std::size_t k = 0; k + 1 < groups[g].size(); ++k) {
        const ExternalRay& r1 = rays[groups[g][k]];
        const ExternalRay& r2 = rays[groups[g][k + 1]];
        std::vector<cpx> arc;
        for (const RayPoint& p : r1.points) arc.push_back(p.z);
        arc.push_back(group_land[g]);
        for (auto it = r2.points.rbegin(); it != r2.points.rend(); ++it)
          arc.push_back(it->z);
        arcs_.push_back(std::move(arc));
      }
    }
    double theta_ref =
        opt_.angles[0].turns() +
        0.5 * ((opt_.angles.size() > 1 ? opt_.angles[1].turns() : 1.0) -
               opt_.angles[0].turns());
    ref_ = point_on_ray(f_, theta_ref, 0.5 * eta);
  }

  // Sample lattice: interior angles of each angular gap at a few
  // equipotentials strictly inside the level.
  std::vector<cpx> samples;
  const int as = opt_.arc_samples;
  const int ps = opt_.potential_samples;
  for (std::size_t k = 0; k < opt_.angles.size(); ++k) {
    double t0 = opt_.angles[k].turns();
    double t1 = (k + 1 < opt_.angles.size()) ? opt_.angles[k + 1].turns()
                                             : opt_.angles[0].turns() + 1.0;
    for (int a = 1; a <= as; ++a) {
      double theta = t0 + (t1 - t0) * a / (as + 1);
      for (int q = 0; q < ps; ++q) {
        double pot = ps == 1 ? 0.45 * eta
                             : eta * (0.2 + 0.5 * q / (ps - 1));
        samples.push_back(point_on_ray(f_, theta, pot));
      }
    }
  }

  std::vector<int> sample_sector(samples.size());
  if (spine_) {
    signatures_.clear();
    for (std::size_t m = 0; m < samples.size(); ++m)
      sample_sector[m] = samples[m].imag() >= 0.0 ? 0 : 1;
  } else {
    std::vector<std::vector<char>> sigs;
    for (cpx s : samples) {
      std::vector<char> sig(arcs_.size());
      for (std::size_t k = 0; k < arcs_.size(); ++k)
        sig[k] = static_cast<char>(crossing_parity(s, ref_, arcs_[k]));
      sigs.push_back(std::move(sig));
    }
    signatures_.clear();
    for (const auto& sig : sigs)
      if (std::find(signatures_.begin(), signatures_.end(), sig) ==
          signatures_.end())
        signatures_.push_back(sig);
    std::sort(signatures_.begin(), signatures_.end());
    for (std::size_t m = 0; m < samples.size(); ++m) {
      auto it = std::find(signatures_.begin(), signatures_.end(), sigs[m]);
      sample_sector[m] = static_cast<int>(it - signatures_.begin());
    }
  }

  const int nsec = sector_count();
  if (nsec < 2)
    fail(ErrorCode::structure, "the dissection produced a single piece");

  PuzzleLevel base;
  base.depth = 0;
  for (int i = 0; i < nsec; ++i) {
    PuzzlePiece piece;
    piece.word = {i};
    for (std::size_t m = 0; m < samples.size(); ++m)
      if (sample_sector[m] == i) piece.samples.push_back(samples[m]);
    if (piece.samples.size() < 2)
      fail(ErrorCode::structure,
           "puzzle sector " + std::to_string(i) + " has too few samples");
    piece.y = one_center(piece.samples);
    PieceGeometry g = cloud_geometry(f_, piece.samples);
    piece.diam = g.diam;
    piece.dist_to_crit = g.dist;
    piece.disk_center = g.center;
    piece.disk_radius = g.radius;
    base.pieces.push_back(std::move(piece));
  }

  // Transition counts: distinct preimages of each distinguished point,
  // classified by sector.
  std::map<std::pair<int, int>, int> counts;
  for (int j = 0; j < nsec; ++j) {
    std::vector<PreimageRoot> fiber = f_.preimages(base.pieces[j].y);
    for (const PreimageRoot& r : fiber) {
      int sec = sector(r.point);
      if (sec < 0) {
        ++base.misclassified;
        continue;
      }
      ++counts[{sec, j}];
    }
  }
  for (const auto& [key, s] : counts)
    base.transitions.push_back({key.first, key.second, s});

  // Covering check: every sample of a successor piece must have a
  // preimage in the source sector.
  for (int j = 0; j < nsec; ++j) {
    for (cpx s : base.pieces[j].samples) {
      std::vector<PreimageRoot> fiber = f_.preimages(s);
      std::vector<int> per_sector(nsec, 0);
      for (const PreimageRoot& r : fiber) {
        int sec = sector(r.point);
        if (sec >= 0) ++per_sector[sec];
      }
      for (const Transition& t : base.transitions) {
        if (t.to != j) continue;
        if (per_sector[t.from] == 0)
          fail(ErrorCode::structure,
               "piece " + std::to_string(t.from) +
                   " does not cover piece " + std::to_string(j) +
                   ": a sample preimage is missing");
        if (per_sector[t.from] != t.s) ++base.misclassified;
      }
    }
  }

  levels_.clear();
  levels_.push_back(std::move(base));
}

const PuzzleLevel& Puzzle::level(int n) const {
  if (n < 0 || n > depth())
    fail(ErrorCode::invalid_argument,
         "puzzle level " + std::to_string(n) + " has not been built");
  return levels_[n];
}

void Puzzle::refine_to(int n) {
  if (n < 0) fail(ErrorCode::invalid_argument, "puzzle depth must be >= 0");
  while (depth() < n) refine_next();
}

int Puzzle::classify_sibling(cpx w, const std::vector<int>& group,
                             int lvl) const {
  if (group.size() == 1) return group[0];
  int best = group[0];
  double best_d = kInf;
  for (int id : group) {
    double d = std::abs(w - levels_[lvl].pieces[id].y);
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

void Puzzle::refine_next() {
  const PuzzleLevel& L = levels_.back();
  const int N = L.depth;
  const int npieces = static_cast<int>(L.pieces.size());
  PuzzleLevel next;
  next.depth = N + 1;

  std::unordered_map<std::string, std::vector<int>> word_groups;
  for (int i = 0; i < npieces; ++i)
    word_groups[word_key(L.pieces[i].word)].push_back(i);

  std::map<std::pair<int, int>, int> trans_index;
  for (std::size_t t = 0; t < L.transitions.size(); ++t)
    trans_index[{L.transitions[t].from, L.transitions[t].to}] =
        static_cast<int>(t);

  // Membership of a preimage of a point of piece j in piece i reduces to a
  // sector check plus distinguished-point proximity among pieces sharing
  // i's itinerary: the rest of the itinerary is inherited from j.
  // Branch points per transition: sorted preimages of the target's
  // distinguished point that fall in the source piece.
  std::vector<std::vector<cpx>> branch_points(L.transitions.size());
  std::vector<std::vector<int>> children_of(L.transitions.size());

  for (std::size_t t = 0; t < L.transitions.size(); ++t) {
    const Transition& tr = L.transitions[t];
    const PuzzlePiece& src = L.pieces[tr.from];
    const PuzzlePiece& dst = L.pieces[tr.to];
    const std::vector<int>& group = word_groups[word_key(src.word)];

    std::vector<cpx> B;
    std::vector<PreimageRoot> fiber = f_.preimages(dst.y);
    for (const PreimageRoot& r : fiber) {
      if (sector(r.point) != src.word[0]) continue;
      if (classify_sibling(r.point, group, N) != tr.from) continue;
      B.push_back(r.point);
    }
    if (static_cast<int>(B.size()) != tr.s)
      fail(ErrorCode::structure,
           "branch count changed while refining transition " +
               std::to_string(tr.from) + " -> " + std::to_string(tr.to) +
               " at depth " + std::to_string(N) + " (expected " +
               std::to_string(tr.s) + ", found " +
               std::to_string(B.size()) + ")");
    std::sort(B.begin(), B.end(), lex_less);
    branch_points[t] = B;

    // Pull the target's sample cloud back along each branch.
    std::vector<std::vector<cpx>> clouds(tr.s);
    std::vector<cpx> warm;
    for (cpx s : dst.samples) {
      std::vector<PreimageRoot> fib = f_.preimages(s, warm);
      warm.clear();
      for (const PreimageRoot& r : fib) warm.push_back(r.point);
      std::vector<cpx> cands;
      for (const PreimageRoot& r : fib) {
        if (sector(r.point) != src.word[0]) continue;
        if (classify_sibling(r.point, group, N) != tr.from) continue;
        cands.push_back(r.point);
      }
      if (cands.size() != static_cast<std::size_t>(tr.s))
        ++next.misclassified;
      std::vector<char> taken(tr.s, 0);
      for (cpx cand : cands) {
        int best = 0;
        double best_d = kInf;
        for (int sig = 0; sig < tr.s; ++sig) {
          double dd = std::abs(cand - B[sig]);
          if (dd < best_d) {
            best_d = dd;
            best = sig;
          }
        }
        if (taken[best]) {
          ++next.misclassified;
          continue;
        }
        taken[best] = 1;
        clouds[best].push_back(cand);
      }
    }

    for (int sig = 0; sig < tr.s; ++sig) {
      if (clouds[sig].size() < 2)
        fail(ErrorCode::structure,
             "refined piece lost its sample cloud (transition " +
                 std::to_string(tr.from) + " -> " + std::to_string(tr.to) +
                 ", branch " + std::to_string(sig) + ")");
      PuzzlePiece child;
      child.word.reserve(src.word.size() + dst.word.size());
      child.word.push_back(src.word[0]);
      child.word.insert(child.word.end(), dst.word.begin(), dst.word.end());
      child.y = B[sig];
      child.samples = std::move(clouds[sig]);
      PieceGeometry g = cloud_geometry(f_, child.samples);
      child.diam = g.diam;
      child.dist_to_crit = g.dist;
      child.disk_center = g.center;
      child.disk_radius = g.radius;
      children_of[t].push_back(static_cast<int>(next.pieces.size()));
      next.pieces.push_back(std::move(child));
    }
  }

  // Transitions of the refined level: classify the preimages of every new
  // distinguished point. A preimage of a point of (old) piece j belongs to
  // the child (i -> j, branch) selected by sector, sibling proximity, and
  // branch proximity.
  std::map<std::pair<int, int>, int> new_counts;
  for (std::size_t t = 0; t < L.transitions.size(); ++t) {
    const Transition& tr = L.transitions[t];
    const int j = tr.from;  // children of (j -> k) live inside old piece j
    for (int cid : children_of[t]) {
      std::vector<PreimageRoot> fiber = f_.preimages(next.pieces[cid].y);
      for (const PreimageRoot& r : fiber) {
        int sec = sector(r.point);
        if (sec < 0) {
          ++next.misclassified;
          continue;
        }
        std::vector<int> wkey;
        wkey.push_back(sec);
        const std::vector<int>& wj = L.pieces[j].word;
        wkey.insert(wkey.end(), wj.begin(), wj.end() - 1);
        auto git = word_groups.find(word_key(wkey));
        if (git == word_groups.end()) {
          ++next.misclassified;
          continue;
        }
        int i = classify_sibling(r.point, git->second, N);
        auto tit = trans_index.find({i, j});
        if (tit == trans_index.end()) {
          ++next.misclassified;
          continue;
        }
        const std::vector<cpx>& B = branch_points[tit->second];
        int best = 0;
        double best_d = kInf;
        for (std::size_t sig = 0; sig < B.size(); ++sig) {
          double dd = std::abs(r.point - B[sig]);
          if (dd < best_d) {
            best_d = dd;
            best = static_cast<int>(sig);
          }
        }
        int from_id = children_of[tit->second][best];
        ++new_counts[{from_id, cid}];
      }
    }
  }
  for (const auto& [key, s] : new_counts)
    next.transitions.push_back({key.first, key.second, s});

  // Every child of (i -> j) must reach every child of (j -> k).
  for (std::size_t t = 0; t < L.transitions.size(); ++t) {
    const int j = L.transitions[t].to;
    for (int cid : children_of[t]) {
      for (const Transition& tr2 : L.transitions) {
        if (tr2.from != j) continue;
        int t2 = trans_index[{tr2.from, tr2.to}];
        for (int target : children_of[t2]) {
          if (!new_counts.count({cid, target}))
            fail(ErrorCode::structure,
                 "refined transition missing between pieces " +
                     std::to_string(cid) + " and " + std::to_string(target) +
                     " at depth " + std::to_string(N + 1) +
                     " (sample membership misclassified near a boundary)");
        }
      }
    }
  }

  levels_.push_back(std::move(next));
}

bool Puzzle::member(cpx w, int depth_n, int piece) const {
  const PuzzleLevel& L = level(depth_n);
  if (piece < 0 || piece >= static_cast<int>(L.pieces.size()))
    fail(ErrorCode::invalid_argument, "piece index out of range");
  double bound = opt_.eta * std::pow(static_cast<double>(f_.degree()),
                                     -static_cast<double>(depth_n));
  if (green_potential(f_, w) > bound * (1.0 + 1e-9) + 1e-12) return false;
  const std::vector<int>& word = L.pieces[piece].word;
  cpx z = w;
  for (std::size_t k = 0; k < word.size(); ++k) {
    if (sector(z) != word[k]) return false;
    if (k + 1 < word.size()) z = f_.evaluate(z);
  }
  std::vector<int> group;
  for (int i = 0; i < static_cast<int>(L.pieces.size()); ++i)
    if (L.pieces[i].word == word) group.push_back(i);
  return classify_sibling(w, group, depth_n) == piece;
}

SparseNonnegMatrix Puzzle::matrix(int depth_n, MatrixMode mode,
                                  const RestrictionSchedule& schedule) const {
  const PuzzleLevel& L = level(depth_n);
  const int n = static_cast<int>(L.pieces.size());
  const double A = schedule.value ? schedule.value(depth_n)
                                  : static_cast<double>(depth_n);
  const double phase = orientation_from_seed(opt_.seed);
  const cpx dir(std::cos(phase), std::sin(phase));

  const bool restricted = mode == MatrixMode::restricted ||
                          mode == MatrixMode::restricted_fuzzy;
  const bool fuzzy =
      mode == MatrixMode::fuzzy || mode == MatrixMode::restricted_fuzzy;

  std::vector<double> row_weight(n, 0.0);
  std::vector<char> keep(n, 1);
  for (int i = 0; i < n; ++i) {
    const PuzzlePiece& p = L.pieces[i];
    if (restricted) {
      double ratio = p.diam > 0.0 ? p.dist_to_crit / p.diam : kInf;
      if (!(ratio >= A)) {
        keep[i] = 0;
        continue;
      }
    }
    double base;
    if (fuzzy) {
      base = f_.derivative_bounds_on_disk(p.disk_center, p.disk_radius,
                                          opt_.metric)
                 .upper;
    } else if ((mode == MatrixMode::double_sample ||
                mode == MatrixMode::double_sample_in_piece) &&
               p.dist_to_crit <= A * p.diam) {
      cpx v1, v2;
      if (mode == MatrixMode::double_sample) {
        cpx off = 0.5 * A * p.diam * dir;
        v1 = p.y + off;
        v2 = p.y - off;
      } else {
        cpx off = 0.25 * p.diam * dir;
        v1 = p.disk_center + off;
        v2 = p.disk_center - off;
      }
      base = std::max(f_.derivative_modulus(v1, opt_.metric),
                      f_.derivative_modulus(v2, opt_.metric));
    } else {
      base = f_.derivative_modulus(p.y, opt_.metric);
    }
    if (!(base > 0.0))
      fail(ErrorCode::structure,
           "piece " + std::to_string(i) +
               " weighs in at a critical point; move the distinguished "
               "point or restrict the matrix");
    row_weight[i] = 1.0 / base;
  }

  SparseNonnegMatrix m = SparseNonnegMatrix::zero(n);
  for (const Transition& t : L.transitions) {
    if (!keep[t.from]) continue;
    double v = row_weight[t.from];
    if (mode == MatrixMode::multiple) v *= t.s;
    m.add(t.from, t.to, v);
  }
  if (m.empty())
    fail(ErrorCode::empty_matrix, "no admissible pieces at this depth");
  return m;
}

// ---------------------------------------------------------------- cache --

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}
void put_f64(std::string& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(out, v);
}
void put_cpx(std::string& out, cpx z) {
  put_f64(out, z.real());
  put_f64(out, z.imag());
}

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  std::uint32_t u32() {
    if (pos + 4 > s.size()) fail(ErrorCode::io, "truncated puzzle cache");
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + k]))
           << (8 * k);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    if (pos + 8 > s.size()) fail(ErrorCode::io, "truncated puzzle cache");
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos + k]))
           << (8 * k);
    pos += 8;
    return v;
  }
  double f64() {
    std::uint64_t v = u64();
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
  cpx zz() {
    double re = f64();
    double im = f64();
    return {re, im};
  }
};

constexpr char kMagic[8] = {'J', 'D', 'P', 'Z', 'B', '0', '1', '\n'};

}  // namespace

void Puzzle::save(const std::string& path, bool binary) const {
  if (binary) {
    std::string out(kMagic, sizeof(kMagic));
    put_u32(out, static_cast<std::uint32_t>(f_.degree()));
    put_cpx(out, f_.unicritical_c());
    put_f64(out, opt_.eta);
    put_u32(out, static_cast<std::uint32_t>(opt_.angles.size()));
    for (const Angle& a : opt_.angles) {
      put_u64(out, static_cast<std::uint64_t>(a.num));
      put_u64(out, static_cast<std::uint64_t>(a.den));
    }
    put_u32(out, static_cast<std::uint32_t>(opt_.arc_samples));
    put_u32(out, static_cast<std::uint32_t>(opt_.potential_samples));
    put_f64(out, opt_.ray_eta_min);
    put_u32(out, opt_.seed);
    put_u32(out, opt_.metric == Metric::spherical ? 1u : 0u);
    put_u32(out, spine_ ? 1u : 0u);
    put_u32(out, static_cast<std::uint32_t>(arcs_.size()));
    for (const auto& arc : arcs_) {
      put_u32(out, static_cast<std::uint32_t>(arc.size()));
      for (cpx z : arc) put_cpx(out, z);
    }
    put_cpx(out, ref_);
    put_u32(out, static_cast<std::uint32_t>(signatures_.size()));
    for (const auto& sig : signatures_) {
      put_u32(out, static_cast<std::uint32_t>(sig.size()));
      for (char c : sig) out.push_back(c);
    }
    put_u32(out, static_cast<std::uint32_t>(levels_.size()));
    for (const PuzzleLevel& L : levels_) {
      put_u32(out, static_cast<std::uint32_t>(L.depth));
      put_u64(out, L.misclassified);
      put_u32(out, static_cast<std::uint32_t>(L.pieces.size()));
      for (const PuzzlePiece& p : L.pieces) {
        put_u32(out, static_cast<std::uint32_t>(p.word.size()));
        for (int w : p.word) put_u32(out, static_cast<std::uint32_t>(w));
        put_cpx(out, p.y);
        put_u32(out, static_cast<std::uint32_t>(p.samples.size()));
        for (cpx s : p.samples) put_cpx(out, s);
        put_f64(out, p.diam);
        put_f64(out, p.dist_to_crit);
        put_cpx(out, p.disk_center);
        put_f64(out, p.disk_radius);
      }
      put_u32(out, static_cast<std::uint32_t>(L.transitions.size()));
      for (const Transition& t : L.transitions) {
        put_u32(out, static_cast<std::uint32_t>(t.from));
        put_u32(out, static_cast<std::uint32_t>(t.to));
        put_u32(out, static_cast<std::uint32_t>(t.s));
      }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::io, "cannot open " + path + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) fail(ErrorCode::io, "short write to " + path);
    return;
  }

  nlohmann::json j;
  j["format"] = "puzzle-cache";
  j["version"] = 1;
  j["map"] = {{"degree", f_.degree()},
              {"c", {f_.unicritical_c().real(), f_.unicritical_c().imag()}}};
  nlohmann::json ang = nlohmann::json::array();
  for (const Angle& a : opt_.angles) ang.push_back({a.num, a.den});
  j["options"] = {{"eta", opt_.eta},
                  {"angles", ang},
                  {"arc_samples", opt_.arc_samples},
                  {"potential_samples", opt_.potential_samples},
                  {"ray_eta_min", opt_.ray_eta_min},
                  {"seed", opt_.seed},
                  {"metric",
                   opt_.metric == Metric::spherical ? "spherical"
                                                    : "euclidean"}};
  j["spine"] = spine_;
  nlohmann::json arcs = nlohmann::json::array();
  for (const auto& arc : arcs_) {
    nlohmann::json a = nlohmann::json::array();
    for (cpx z : arc) a.push_back({z.real(), z.imag()});
    arcs.push_back(std::move(a));
  }
  j["arcs"] = std::move(arcs);
  j["ref"] = {ref_.real(), ref_.imag()};
  nlohmann::json sigs = nlohmann::json::array();
  for (const auto& sig : signatures_) {
    std::string s;
    for (char c : sig) s.push_back(static_cast<char>('0' + c));
    sigs.push_back(s);
  }
  j["signatures"] = std::move(sigs);
  nlohmann::json levels = nlohmann::json::array();
  for (const PuzzleLevel& L : levels_) {
    nlohmann::json pieces = nlohmann::json::array();
    for (const PuzzlePiece& p : L.pieces) {
      nlohmann::json samples = nlohmann::json::array();
      for (cpx s : p.samples) samples.push_back({s.real(), s.imag()});
      pieces.push_back({{"word", p.word},
                        {"y", {p.y.real(), p.y.imag()}},
                        {"samples", std::move(samples)},
                        {"diam", p.diam},
                        {"dist_to_crit", p.dist_to_crit},
                        {"disk_center",
                         {p.disk_center.real(), p.disk_center.imag()}},
                        {"disk_radius", p.disk_radius}});
    }
    nlohmann::json trans = nlohmann::json::array();
    for (const Transition& t : L.transitions)
      trans.push_back({t.from, t.to, t.s});
    levels.push_back({{"depth", L.depth},
                      {"misclassified", L.misclassified},
                      {"pieces", std::move(pieces)},
                      {"transitions", std::move(trans)}});
  }
  j["levels"] = std::move(levels);

  std::ofstream f(path);
  if (!f) fail(ErrorCode::io, "cannot open " + path + " for writing");
  f << j.dump(1, '\t') << "\n";
  if (!f) fail(ErrorCode::io, "short write to " + path);
}

Puzzle Puzzle::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  std::string data = buf.str();

  Puzzle p;
  if (data.size() >= sizeof(kMagic) &&
      std::memcmp(data.data(), kMagic, sizeof(kMagic)) == 0) {
    Cursor c{data, sizeof(kMagic)};
    int degree = static_cast<int>(c.u32());
    cpx cc = c.zz();
    p.f_ = Map::unicritical(degree, cc);
    p.opt_.eta = c.f64();
    std::uint32_t na = c.u32();
    p.opt_.angles.clear();
    for (std::uint32_t k = 0; k < na; ++k) {
      auto num = static_cast<std::int64_t>(c.u64());
      auto den = static_cast<std::int64_t>(c.u64());
      p.opt_.angles.push_back(Angle::make(num, den));
    }
    p.opt_.arc_samples = static_cast<int>(c.u32());
    p.opt_.potential_samples = static_cast<int>(c.u32());
    p.opt_.ray_eta_min = c.f64();
    p.opt_.seed = c.u32();
    p.opt_.metric = c.u32() ? Metric::spherical : Metric::euclidean;
    p.spine_ = c.u32() != 0;
    std::uint32_t narcs = c.u32();
    for (std::uint32_t k = 0; k < narcs; ++k) {
      std::uint32_t len = c.u32();
      std::vector<cpx> arc(len);
      for (std::uint32_t q = 0; q < len; ++q) arc[q] = c.zz();
      p.arcs_.push_back(std::move(arc));
    }
    p.ref_ = c.zz();
    std::uint32_t nsig = c.u32();
    for (std::uint32_t k = 0; k < nsig; ++k) {
      std::uint32_t len = c.u32();
      if (c.pos + len > data.size())
        fail(ErrorCode::io, "truncated puzzle cache");
      std::vector<char> sig(data.begin() + static_cast<long>(c.pos),
                            data.begin() + static_cast<long>(c.pos + len));
      c.pos += len;
      p.signatures_.push_back(std::move(sig));
    }
    std::uint32_t nlev = c.u32();
    for (std::uint32_t k = 0; k < nlev; ++k) {
      PuzzleLevel L;
      L.depth = static_cast<int>(c.u32());
      L.misclassified = c.u64();
      std::uint32_t np = c.u32();
      for (std::uint32_t q = 0; q < np; ++q) {
        PuzzlePiece piece;
        std::uint32_t wl = c.u32();
        for (std::uint32_t w = 0; w < wl; ++w)
          piece.word.push_back(static_cast<int>(c.u32()));
        piece.y = c.zz();
        std::uint32_t ns = c.u32();
        for (std::uint32_t w = 0; w < ns; ++w)
          piece.samples.push_back(c.zz());
        piece.diam = c.f64();
        piece.dist_to_crit = c.f64();
        piece.disk_center = c.zz();
        piece.disk_radius = c.f64();
        L.pieces.push_back(std::move(piece));
      }
      std::uint32_t nt = c.u32();
      for (std::uint32_t q = 0; q < nt; ++q) {
        Transition t;
        t.from = static_cast<int>(c.u32());
        t.to = static_cast<int>(c.u32());
        t.s = static_cast<int>(c.u32());
        L.transitions.push_back(t);
      }
      p.levels_.push_back(std::move(L));
    }
    if (p.levels_.empty()) fail(ErrorCode::io, "puzzle cache holds no levels");
    return p;
  }

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(data);
  } catch (const std::exception& e) {
    fail(ErrorCode::io, std::string("puzzle cache is not valid JSON: ") +
                            e.what());
  }
  if (j.value("format", "") != "puzzle-cache")
    fail(ErrorCode::io, "not a puzzle cache file");
  int degree = j.at("map").at("degree").get<int>();
  auto cc = j.at("map").at("c");
  p.f_ = Map::unicritical(degree, cpx(cc.at(0).get<double>(),
                                      cc.at(1).get<double>()));
  const auto& opt = j.at("options");
  p.opt_.eta = opt.at("eta").get<double>();
  p.opt_.angles.clear();
  for (const auto& a : opt.at("angles"))
    p.opt_.angles.push_back(Angle::make(a.at(0).get<std::int64_t>(),
                                        a.at(1).get<std::int64_t>()));
  p.opt_.arc_samples = opt.at("arc_samples").get<int>();
  p.opt_.potential_samples = opt.at("potential_samples").get<int>();
  p.opt_.ray_eta_min = opt.at("ray_eta_min").get<double>();
  p.opt_.seed = opt.at("seed").get<unsigned>();
  p.opt_.metric = opt.at("metric").get<std::string>() == "spherical"
                      ? Metric::spherical
                      : Metric::euclidean;
  p.spine_ = j.at("spine").get<bool>();
  for (const auto& arc : j.at("arcs")) {
    std::vector<cpx> pts;
    for (const auto& z : arc)
      pts.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
    p.arcs_.push_back(std::move(pts));
  }
  p.ref_ = cpx(j.at("ref").at(0).get<double>(), j.at("ref").at(1).get<double>());
  for (const auto& s : j.at("signatures")) {
    std::string str = s.get<std::string>();
    std::vector<char> sig;
    for (char ch : str) sig.push_back(static_cast<char>(ch - '0'));
    p.signatures_.push_back(std::move(sig));
  }
  for (const auto& lj : j.at("levels")) {
    PuzzleLevel L;
    L.depth = lj.at("depth").get<int>();
    L.misclassified = lj.at("misclassified").get<std::uint64_t>();
    for (const auto& pj : lj.at("pieces")) {
      PuzzlePiece piece;
      piece.word = pj.at("word").get<std::vector<int>>();
      piece.y = cpx(pj.at("y").at(0).get<double>(),
                    pj.at("y").at(1).get<double>());
      for (const auto& s : pj.at("samples"))
        piece.samples.emplace_back(s.at(0).get<double>(),
                                   s.at(1).get<double>());
      piece.diam = pj.at("diam").get<double>();
      piece.dist_to_crit = pj.at("dist_to_crit").get<double>();
      piece.disk_center = cpx(pj.at("disk_center").at(0).get<double>(),
                              pj.at("disk_center").at(1).get<double>());
      piece.disk_radius = pj.at("disk_radius").get<double>();
      L.pieces.push_back(std::move(piece));
    }
    for (const auto& t : lj.at("transitions"))
      L.transitions.push_back(
          {t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    p.levels_.push_back(std::move(L));
  }
  if (p.levels_.empty()) fail(ErrorCode::io, "puzzle cache holds no levels");
  return p;
}

}  // namespace jdim
