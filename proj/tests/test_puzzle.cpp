#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/green.hpp"
#include "core/map.hpp"
#include "core/puzzle.hpp"
#include "core/spectral.hpp"

using jdim::Angle;
using jdim::cpx;
using jdim::Map;
using jdim::MatrixMode;
using jdim::Puzzle;
using jdim::PuzzleOptions;
using jdim::RestrictionSchedule;
using jdim::SparseNonnegMatrix;
using jdim::Transition;

namespace {

Puzzle circle_puzzle(int depth = 0) {
  Map f = Map::unicritical(2, 0.0);
  PuzzleOptions opt;
  Puzzle p(f, opt);
  p.refine_to(depth);
  return p;
}

Puzzle basilica_puzzle(int depth = 0) {
  Map f = Map::unicritical(2, cpx(-1.0, 0.0));
  PuzzleOptions opt;
  opt.angles = {Angle::make(1, 3), Angle::make(2, 3)};
  Puzzle p(f, opt);
  p.refine_to(depth);
  return p;
}

}  // namespace

TEST_CASE("circle puzzle base level") {
  Puzzle p = circle_puzzle();
  CHECK(p.sector_count() == 2);
  const auto& L = p.level(0);
  REQUIRE(L.pieces.size() == 2);
  REQUIRE(L.transitions.size() == 4);
  for (const Transition& t : L.transitions) CHECK(t.s == 1);
  CHECK(L.misclassified == 0);
  for (const auto& piece : L.pieces) {
    CHECK(piece.word.size() == 1);
    CHECK(piece.samples.size() >= 4);
    // Samples sit just outside the unit circle, below the eta equipotential.
    for (cpx s : piece.samples) {
      CHECK(std::abs(s) > 1.0);
      CHECK(std::abs(s) < std::exp(0.2));
    }
    CHECK(piece.dist_to_crit == doctest::Approx(std::abs(piece.samples[0]))
                                    .epsilon(0.2));
    CHECK(piece.diam > 0.0);
    CHECK(piece.disk_radius > 0.0);
  }
  // Upper and lower sectors by the sign of the imaginary part.
  CHECK(p.sector(cpx(0.1, 0.9)) == 0);
  CHECK(p.sector(cpx(0.1, -0.9)) == 1);
}

TEST_CASE("circle puzzle refinement doubles the pieces") {
  Puzzle p = circle_puzzle(6);
  std::uint64_t missed = 0;
  for (int n = 0; n <= 6; ++n) {
    CHECK(p.level(n).pieces.size() == (2u << n));
    missed += p.level(n).misclassified;
  }
  CHECK(missed == 0);
}

TEST_CASE("circle puzzle diameters decay at the expected rate") {
  Puzzle p = circle_puzzle(10);
  for (int n = 5; n <= 10; ++n) {
    double ratio = p.level(n).max_diam() / p.level(n - 1).max_diam();
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
  }
}

TEST_CASE("plain matrix of the circle puzzle") {
  Puzzle p = circle_puzzle();
  SparseNonnegMatrix m = p.matrix(0, MatrixMode::plain);
  REQUIRE(m.dim == 2);
  CHECK(m.nonzero_count() == 4);
  // Entries are 1/|f'(y)| with y just outside the unit circle, so a shade
  // under 1/2, constant along each row.
  for (int i = 0; i < 2; ++i) {
    CHECK(m.weight(i, 0) == m.weight(i, 1));
    CHECK(m.weight(i, 0) > 0.40);
    CHECK(m.weight(i, 0) < 0.50);
  }
  CHECK(jdim::is_primitive(m).primitive);

  jdim::RootInT root = jdim::perron_root_in_t(m, 0.1, 2.0);
  CHECK(root.t > 0.5);
  CHECK(root.t < 1.0);
}

TEST_CASE("plain matrix roots approach 1 with depth") {
  Puzzle p = circle_puzzle(6);
  SparseNonnegMatrix m = p.matrix(6, MatrixMode::plain);
  jdim::RootInT root = jdim::perron_root_in_t(m, 0.1, 2.0);
  CHECK(std::abs(root.t - 1.0) < 0.03);
  CHECK(root.monotone);
}

TEST_CASE("multiple mode equals plain when no branch doubles") {
  Puzzle p = circle_puzzle(2);
  SparseNonnegMatrix a = p.matrix(2, MatrixMode::plain);
  SparseNonnegMatrix b = p.matrix(2, MatrixMode::multiple);
  REQUIRE(a.dim == b.dim);
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) CHECK(a.weight(i, j) == b.weight(i, j));
}

TEST_CASE("fuzzy matrix entries never exceed plain entries") {
  Puzzle p = circle_puzzle(3);
  SparseNonnegMatrix plain = p.matrix(3, MatrixMode::plain);
  SparseNonnegMatrix fuzzy = p.matrix(3, MatrixMode::fuzzy);
  for (int i = 0; i < plain.dim; ++i)
    for (int j = 0; j < plain.dim; ++j) {
      CHECK(fuzzy.weight(i, j) <= plain.weight(i, j) + 1e-15);
      if (plain.weight(i, j) > 0.0) CHECK(fuzzy.weight(i, j) > 0.0);
    }
}

TEST_CASE("restriction keeps or zeroes whole rows") {
  Puzzle p = circle_puzzle(3);
  SparseNonnegMatrix plain = p.matrix(3, MatrixMode::plain);
  SparseNonnegMatrix rest =
      p.matrix(3, MatrixMode::restricted, RestrictionSchedule::constant(0.5));
  // Every piece of the circle puzzle is far from the critical point, so the
  // mild ratio filter keeps everything.
  for (int i = 0; i < plain.dim; ++i)
    for (int j = 0; j < plain.dim; ++j)
      CHECK(rest.weight(i, j) == plain.weight(i, j));

  try {
    (void)p.matrix(3, MatrixMode::restricted,
                   RestrictionSchedule::constant(1e9));
    CHECK(false);
  } catch (const jdim::Error& e) {
    CHECK(e.code() == jdim::ErrorCode::empty_matrix);
    CHECK(std::string(e.what()).find("no admissible pieces") !=
          std::string::npos);
  }
}

TEST_CASE("double sampling activates near the critical set only") {
  Puzzle p = circle_puzzle(2);
  SparseNonnegMatrix plain = p.matrix(2, MatrixMode::plain);

  // Threshold zero: no piece counts as near-critical, weights fall back to
  // the distinguished point.
  SparseNonnegMatrix off = p.matrix(2, MatrixMode::double_sample,
                                    RestrictionSchedule::constant(0.0));
  for (int i = 0; i < plain.dim; ++i)
    for (int j = 0; j < plain.dim; ++j)
      CHECK(off.weight(i, j) == plain.weight(i, j));

  // Huge threshold: every piece is "near critical" and the weight uses the
  // larger of two sampled derivatives, so entries can only shrink
  // (|f'| = 2|z| here, and max(|y+v|, |y-v|) >= |y|).
  SparseNonnegMatrix forced = p.matrix(2, MatrixMode::double_sample,
                                       RestrictionSchedule::constant(100.0));
  for (int i = 0; i < plain.dim; ++i)
    for (int j = 0; j < plain.dim; ++j)
      CHECK(forced.weight(i, j) <= plain.weight(i, j) + 1e-15);

  // The in-piece variant samples near the disk center; entries stay
  // positive and bounded.
  SparseNonnegMatrix inp = p.matrix(2, MatrixMode::double_sample_in_piece,
                                    RestrictionSchedule::constant(100.0));
  for (int i = 0; i < plain.dim; ++i)
    for (int j = 0; j < plain.dim; ++j)
      if (plain.weight(i, j) > 0.0) {
        CHECK(inp.weight(i, j) > 0.0);
        CHECK(inp.weight(i, j) < 1.0);
      }
}

TEST_CASE("membership follows the sample clouds") {
  Puzzle p = circle_puzzle(3);
  const auto& L = p.level(3);
  for (std::size_t i = 0; i < L.pieces.size(); ++i) {
    for (cpx s : L.pieces[i].samples) {
      CHECK(p.member(s, 3, static_cast<int>(i)));
    }
    // A sample of one piece is not a member of a piece with another word.
    std::size_t other = (i + L.pieces.size() / 2) % L.pieces.size();
    if (L.pieces[other].word != L.pieces[i].word)
      CHECK(!p.member(L.pieces[i].samples[0], 3, static_cast<int>(other)));
  }
  // Points above the equipotential level never belong.
  CHECK(!p.member(cpx(3.0, 0.0), 3, 0));
}

TEST_CASE("markov covering: every transition is backed by sample preimages") {
  Puzzle p = circle_puzzle(2);
  const auto& L = p.level(2);
  for (const Transition& t : L.transitions) {
    for (cpx s : L.pieces[t.to].samples) {
      auto fiber = p.map().preimages(s);
      int hits = 0;
      for (const auto& r : fiber)
        if (p.member(r.point, 2, t.from)) ++hits;
      CHECK(hits == t.s);
    }
  }
}

TEST_CASE("refined clouds pull back the image piece's cloud") {
  // A depth-n piece is a preimage branch of the depth-(n-1) piece whose
  // word is the tail of its own, and its samples are chosen preimages of
  // that piece's samples. Mapping forward must recover them.
  Puzzle p = circle_puzzle(4);
  for (int n = 1; n <= 4; ++n) {
    const auto& L = p.level(n);
    const auto& P = p.level(n - 1);
    std::map<std::vector<int>, std::vector<int>> by_word;
    for (std::size_t i = 0; i < P.pieces.size(); ++i)
      by_word[P.pieces[i].word].push_back(static_cast<int>(i));
    for (const auto& piece : L.pieces) {
      std::vector<int> image_word(piece.word.begin() + 1, piece.word.end());
      auto it = by_word.find(image_word);
      REQUIRE(it != by_word.end());
      for (cpx s : piece.samples) {
        cpx fs = p.map().evaluate(s);
        double best = 1e300;
        for (int j : it->second)
          for (cpx q : P.pieces[j].samples)
            best = std::min(best, std::abs(fs - q));
        CHECK(best <= 1e-9);
      }
    }
  }
}

TEST_CASE("basilica puzzle with co-landing rays has a doubling transition") {
  Puzzle p = basilica_puzzle(4);
  const auto& L = p.level(0);
  CHECK(p.sector_count() == 2);
  REQUIRE(L.pieces.size() == 2);
  CHECK(L.misclassified == 0);

  int total_s = 0;
  int doubled = 0;
  std::vector<int> column_sum(2, 0);
  for (const Transition& t : L.transitions) {
    total_s += t.s;
    column_sum[t.to] += t.s;
    if (t.s == 2) ++doubled;
    CHECK(t.s <= 2);  // bounded by the critical multiplicity
  }
  CHECK(total_s == 4);
  CHECK(doubled == 1);
  // Each fiber has two points, so every column's branch counts sum to 2.
  CHECK(column_sum[0] == 2);
  CHECK(column_sum[1] == 2);

  // The doubling transition spawns two depth-1 children with equal words.
  CHECK(p.level(1).pieces.size() == 4);
  std::map<std::vector<int>, int> words;
  for (const auto& piece : p.level(1).pieces) ++words[piece.word];
  bool has_twin = false;
  for (const auto& [w, count] : words)
    if (count == 2) has_twin = true;
  CHECK(has_twin);

  // Deeper levels keep doubling: sum of s at level n = pieces at n+1.
  for (int n = 0; n < 4; ++n) {
    int sum = 0;
    for (const Transition& t : p.level(n).transitions) sum += t.s;
    CHECK(static_cast<std::size_t>(sum) == p.level(n + 1).pieces.size());
  }
  CHECK(p.level(4).pieces.size() == 32);
}

TEST_CASE("basilica matrices behave like the circle case") {
  Puzzle p = basilica_puzzle(4);
  SparseNonnegMatrix plain = p.matrix(4, MatrixMode::plain);
  SparseNonnegMatrix fuzzy = p.matrix(4, MatrixMode::fuzzy);
  SparseNonnegMatrix mult = p.matrix(4, MatrixMode::multiple);
  CHECK(jdim::is_primitive(plain).irreducible);
  for (int i = 0; i < plain.dim; ++i)
    for (int j = 0; j < plain.dim; ++j) {
      CHECK(fuzzy.weight(i, j) <= plain.weight(i, j) + 1e-15);
      CHECK(mult.weight(i, j) >= plain.weight(i, j));
    }
  // The doubled branch through the critical value lives at the base level;
  // there `multiple` is strictly larger than `plain` on that transition.
  SparseNonnegMatrix plain0 = p.matrix(0, MatrixMode::plain);
  SparseNonnegMatrix mult0 = p.matrix(0, MatrixMode::multiple);
  double gap = 0.0;
  for (int i = 0; i < plain0.dim; ++i)
    for (int j = 0; j < plain0.dim; ++j)
      gap = std::max(gap, mult0.weight(i, j) - plain0.weight(i, j));
  CHECK(gap > 0.0);
}

TEST_CASE("spine shortcut and ray mode agree on sector counts") {
  // Real map with default angles {0, 1/2}: the real spine splits the disk
  // into upper and lower pieces without tracing rays.
  Map f = Map::unicritical(2, cpx(-0.5, 0.0));
  PuzzleOptions opt;
  Puzzle p(f, opt);
  CHECK(p.sector_count() == 2);
  CHECK(p.level(0).pieces.size() == 2);
  p.refine_to(3);
  CHECK(p.level(3).pieces.size() == 16);
}

TEST_CASE("puzzle option validation") {
  Map f = Map::unicritical(2, 0.0);

  PuzzleOptions bad_eta;
  bad_eta.eta = 0.0;
  CHECK_THROWS_AS(Puzzle(f, bad_eta), jdim::Error);

  PuzzleOptions open_angles;
  open_angles.angles = {Angle::make(1, 3)};
  try {
    Puzzle p(f, open_angles);
    CHECK(false);
  } catch (const jdim::Error& e) {
    CHECK(e.code() == jdim::ErrorCode::invalid_argument);
    CHECK(std::string(e.what()).find("closed") != std::string::npos);
  }

  Map poly = Map::polynomial({cpx(0.0), cpx(-3.0), cpx(0.0), cpx(1.0)});
  PuzzleOptions opt;
  CHECK_THROWS_AS(Puzzle(poly, opt), jdim::Error);

  Map esc = Map::unicritical(2, cpx(3.0, 0.0));
  CHECK_THROWS_AS(Puzzle(esc, opt), jdim::Error);
}

TEST_CASE("save and load round-trip bit for bit") {
  for (bool binary : {true, false}) {
    Puzzle p = basilica_puzzle(2);
    std::string path = binary ? "puzzle_roundtrip_test.jdpz"
                              : "puzzle_roundtrip_test.json";
    p.save(path, binary);
    Puzzle q = Puzzle::load(path);
    std::remove(path.c_str());

    REQUIRE(q.depth() == p.depth());
    CHECK(q.map().degree() == p.map().degree());
    CHECK(q.map().unicritical_c() == p.map().unicritical_c());
    CHECK(q.options().eta == p.options().eta);
    REQUIRE(q.options().angles.size() == p.options().angles.size());
    for (int n = 0; n <= p.depth(); ++n) {
      const auto& a = p.level(n);
      const auto& b = q.level(n);
      REQUIRE(a.pieces.size() == b.pieces.size());
      REQUIRE(a.transitions.size() == b.transitions.size());
      CHECK(a.misclassified == b.misclassified);
      for (std::size_t i = 0; i < a.pieces.size(); ++i) {
        CHECK(a.pieces[i].word == b.pieces[i].word);
        CHECK(a.pieces[i].y == b.pieces[i].y);
        CHECK(a.pieces[i].diam == b.pieces[i].diam);
        CHECK(a.pieces[i].dist_to_crit == b.pieces[i].dist_to_crit);
        CHECK(a.pieces[i].disk_center == b.pieces[i].disk_center);
        CHECK(a.pieces[i].disk_radius == b.pieces[i].disk_radius);
        REQUIRE(a.pieces[i].samples.size() == b.pieces[i].samples.size());
        for (std::size_t k = 0; k < a.pieces[i].samples.size(); ++k)
          CHECK(a.pieces[i].samples[k] == b.pieces[i].samples[k]);
      }
      for (std::size_t t = 0; t < a.transitions.size(); ++t) {
        CHECK(a.transitions[t].from == b.transitions[t].from);
        CHECK(a.transitions[t].to == b.transitions[t].to);
        CHECK(a.transitions[t].s == b.transitions[t].s);
      }
    }

    // The reloaded puzzle keeps working: refine further and build a matrix.
    q.refine_to(3);
    p.refine_to(3);
    CHECK(q.level(3).pieces.size() == p.level(3).pieces.size());
    SparseNonnegMatrix m = q.matrix(3, MatrixMode::plain);
    CHECK(m.dim == static_cast<int>(q.level(3).pieces.size()));
  }
}

TEST_CASE("loading garbage fails with an io error") {
  const char* path = "puzzle_garbage_test.jdpz";
  {
    std::FILE* f = std::fopen(path, "wb");
    REQUIRE(f);
    std::fputs("this is not a puzzle cache", f);
    std::fclose(f);
  }
  try {
    (void)Puzzle::load(path);
    CHECK(false);
  } catch (const jdim::Error& e) {
    CHECK(e.code() == jdim::ErrorCode::io);
  }
  std::remove(path);

  CHECK_THROWS_AS((void)Puzzle::load("really-not-there.jdpz"), jdim::Error);
}

TEST_CASE("reloaded puzzles refine identically") {
  Puzzle p = circle_puzzle(2);
  const char* path = "puzzle_refine_test.jdpz";
  p.save(path, true);
  Puzzle q = Puzzle::load(path);
  std::remove(path);
  p.refine_to(4);
  q.refine_to(4);
  const auto& a = p.level(4);
  const auto& b = q.level(4);
  REQUIRE(a.pieces.size() == b.pieces.size());
  for (std::size_t i = 0; i < a.pieces.size(); ++i) {
    CHECK(a.pieces[i].y == b.pieces[i].y);
    CHECK(a.pieces[i].diam == b.pieces[i].diam);
  }
}
