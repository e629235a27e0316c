#pragma once

// Property and oracle checks shared by the unit tests (small sizes) and the
// acceptance binary (full sizes). Each returns counts rather than asserting.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "scenegen/scenegen.hpp"

namespace checks {

using namespace scenegen;

inline const char* kBedroomText =
    "A picture is above a bed. A night stand is on the right side of the head of the bed. "
    "A lamp is on the night stand. Another picture is above the lamp. "
    "A dresser is on the left side of the head of the bed.";

inline const std::vector<std::string> kBedroomTriplets{
    "(picture-0, bed-0, above)", "(night-stand-0, bed-0:head, right)", "(lamp-0, night-stand-0, on)",
    "(picture-1, lamp-0, above)", "(dresser-0, bed-0:head, left)"};

inline Vocabulary vocabulary() {
  RunConfig cfg;
  return Vocabulary::load(cfg);
}

// ---------------------------------------------------------------------------
// Interval kernel

struct Counts {
  std::size_t cases = 0;
  std::size_t violations = 0;
};

/// Containment (sampled points) and monotonicity (random supersets) for
/// add, sub, scale_shift and lt.
inline Counts interval_kernel(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-100, 100), width(0, 20), unit(0, 1);
  auto interval = [&] {
    const double lo = coord(rng);
    return rng() % 5 == 0 ? Interval(lo) : Interval(lo, lo + width(rng));
  };
  auto inside = [&](const Interval& a) { return a.lo() + unit(rng) * a.width(); };
  auto widen = [&](const Interval& a) { return Interval(a.lo() - width(rng) * unit(rng), a.hi() + width(rng) * unit(rng)); };
  auto sub_of = [](const Interval& inner, const Interval& outer) { return outer.contains(inner); };

  Counts c;
  for (std::size_t i = 0; i < n; ++i) {
    ++c.cases;
    const Interval a = interval(), b = interval();
    const double x = inside(a), y = inside(b);
    const double k = rng() % 7 == 0 ? 0.0 : coord(rng) / 25, s = coord(rng);
    bool ok = add(a, b).contains(x + y) && sub(a, b).contains(x - y) && scale_shift(a, k, s).contains(k * x + s);
    const Tribool l = lt(a, b);
    if (l == Tribool::True && !(x < y)) ok = false;
    if (l == Tribool::False && (x < y)) ok = false;

    const Interval A = widen(a), B = widen(b);
    ok = ok && sub_of(add(a, b), add(A, B)) && sub_of(sub(a, b), sub(A, B)) &&
         sub_of(scale_shift(a, k, s), scale_shift(A, k, s));
    const Tribool L = lt(A, B);
    if (L != Tribool::Maybe && l != L) ok = false;
    if (!ok) ++c.violations;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Relation properties on degenerate poses

inline EntityGeom point_geom(const ObjectModel& m, const oracle::Point& p) {
  const Pose pose{Interval(p.x), Interval(p.y), Interval(p.z), Interval(p.k * kHalfPi)};
  const auto b = place_box(pose, m.base(), SubCuboid{"", 0, 0, 0, m.base().lx, m.base().ly, m.base().lz});
  return EntityGeom{b->corners, b->center, support_height(pose, m), OrientationSet::within(pose.d)};
}

inline std::vector<CornerPair> point_parts(const ObjectModel& m, const oracle::Point& p) {
  const Pose pose{Interval(p.x), Interval(p.y), Interval(p.z), Interval(p.k * kHalfPi)};
  std::vector<CornerPair> out;
  if (m.parts().empty()) out.push_back(*corners(pose, m.base()));
  for (const auto& s : m.parts()) out.push_back(place_box(pose, m.base(), s)->corners);
  return out;
}

inline oracle::Entity oracle_geom(const ObjectModel& m, const oracle::Point& p) {
  const auto& b = m.base();
  oracle::Entity e;
  e.box = oracle::place(p, b.lx, b.ly, b.lz, 0, 0, 0, b.lx, b.ly, b.lz);
  e.center = e.box.center();
  e.support = p.z + b.zs;
  e.k = p.k;
  return e;
}

struct RelationCounts {
  std::size_t pairs = 0;
  std::size_t front_behind = 0;  ///< both True
  std::size_t left_right = 0;    ///< left(d2) != right(d2 + pi)
  std::size_t on_under = 0;      ///< on and under both True
  std::size_t exclusive = 0;     ///< asymmetric
  std::size_t maybe = 0;         ///< a degenerate evaluation returned Maybe
  std::size_t oracle = 0;        ///< disagreement with the plain-double oracle
  std::size_t on_true = 0;       ///< how often "on" held (coverage)
  std::size_t violations() const { return front_behind + left_right + on_under + exclusive + maybe + oracle; }
};

/// Random degenerate pose pairs over the library's models. A third of the pairs
/// put the target on the reference's support so that "on" is exercised.
inline RelationCounts relation_properties(const ObjectLibrary& lib, std::size_t n, std::uint64_t seed) {
  std::vector<ObjectModel> models;
  for (const auto& [cat, m] : lib.models()) models.push_back(m);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0, 3), unit(0, 1);
  const RelationThresholds th;
  const oracle::Params P;
  const Relation rels[] = {Relation::Near,  Relation::On,    Relation::Above,  Relation::Under,
                           Relation::Behind, Relation::Front, Relation::Left,   Relation::Right,
                           Relation::NextTo, Relation::SideBySide};
  RelationCounts c;
  for (std::size_t i = 0; i < n; ++i) {
    const ObjectModel& mt = models[rng() % models.size()];
    const ObjectModel& mr = models[rng() % models.size()];
    oracle::Point pr{pos(rng), pos(rng), std::round(unit(rng) * 4) / 4, int(rng() % 4)};
    oracle::Point pt{pos(rng), pos(rng), std::round(unit(rng) * 8) / 4, int(rng() % 4)};
    if (i % 3 == 0) {
      // Center the target over the reference and rest it on the support.
      const auto r = oracle_geom(mr, pr);
      const auto t0 = oracle_geom(mt, pt);
      pt.x += r.center[0] - t0.center[0] + (unit(rng) - 0.5) * 0.2;
      pt.y += r.center[1] - t0.center[1] + (unit(rng) - 0.5) * 0.2;
      pt.z = r.support;
    }
    ++c.pairs;
    const EntityGeom t = point_geom(mt, pt), r = point_geom(mr, pr);
    const auto ot = oracle_geom(mt, pt), orr = oracle_geom(mr, pr);
    for (Relation rel : rels) {
      const Tribool v = eval_atomic(rel, t, r, th);
      if (v == Tribool::Maybe) ++c.maybe;
      if ((v == Tribool::True) != oracle::relation(rel, ot, orr, P)) ++c.oracle;
    }
    if (eval_atomic(Relation::Front, t, r, th) == Tribool::True &&
        eval_atomic(Relation::Behind, t, r, th) == Tribool::True)
      ++c.front_behind;

    oracle::Point flipped = pr;
    flipped.k = (pr.k + 2) % 4;
    const EntityGeom rf = point_geom(mr, flipped);
    if (eval_atomic(Relation::Left, t, r, th) != eval_atomic(Relation::Right, t, rf, th)) ++c.left_right;

    const bool on = eval_atomic(Relation::On, t, r, th) == Tribool::True;
    c.on_true += on;
    if (on && eval_atomic(Relation::Under, t, r, th) == Tribool::True) ++c.on_under;

    const auto pa = point_parts(mt, pt), pb = point_parts(mr, pr);
    const Tribool ab = exclusive_pair(t.box, pa, r.box, pb, th.contact_eps);
    const Tribool ba = exclusive_pair(r.box, pb, t.box, pa, th.contact_eps);
    if (ab != ba) ++c.exclusive;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Solver soundness

struct SoundnessCounts {
  std::size_t boxes = 0;
  std::size_t boxes_not_true = 0;
  std::size_t samples = 0;
  std::size_t sample_failures = 0;
};

inline SoundnessCounts solution_soundness(const CompiledScene& scene, const std::vector<LayoutState>& boxes,
                                          std::size_t samples_per_box, std::uint64_t seed) {
  SoundnessCounts c;
  const oracle::SceneOracle check(scene);
  std::mt19937_64 rng(seed);
  for (const auto& b : boxes) {
    ++c.boxes;
    if (eval(scene, b) != Tribool::True) ++c.boxes_not_true;
    for (std::size_t s = 0; s < samples_per_box; ++s) {
      ++c.samples;
      if (!check(oracle::random_point(b, rng))) ++c.sample_failures;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Grid completeness on small scenes

/// Two ground objects with fixed orientations in a small room.
struct SmallScene {
  std::string name;
  ObjectLibrary lib;
  Query query;
  Room room;
  std::array<int, 2> turns{0, 0};
};

inline std::vector<SmallScene> small_scenes() {
  auto lib = [] {
    ObjectLibrary l;
    ObjectFlags ground;
    ground.on_ground = true;
    l.add(ObjectModel("crate", CuboidSpec{0.3, 0.2, 0.3, 0.3}, {}, {}, ground));
    l.add(ObjectModel("stool", CuboidSpec{0.25, 0.25, 0.4, 0.4}, {}, {}, ground));
    return l;
  };
  auto triplet = [](const std::string& rel) {
    Query q;
    const ObjectRef a{"crate", 0}, b{"stool", 0};
    q.mention(a);
    q.mention(b);
    q.triplets.push_back(SemanticTriplet{a, b, rel});
    return q;
  };
  const Room room{1.0, 1.0, 0.5};
  return {{"crate left of stool", lib(), triplet("left"), room, {0, 0}},
          {"crate behind stool (stool turned)", lib(), triplet("behind"), room, {1, 1}},
          {"crate near stool", lib(), triplet("near"), room, {1, 0}},
          {"crate right of stool (turned)", lib(), triplet("right"), room, {0, 3}}};
}

struct CompletenessResult {
  std::size_t grid_points = 0;
  std::size_t feasible = 0;
  std::size_t uncovered = 0;       ///< feasible grid points farther than tol*sqrt(dims) from every box
  std::size_t boxes = 0;
  std::size_t empty_boxes = 0;     ///< boxes wider than the grid step holding no feasible grid point
  double max_distance = 0;
  double seconds = 0;
  SolveStatus status = SolveStatus::Infeasible;
};

inline double box_distance(const std::vector<oracle::Point>& p, const LayoutState& b) {
  double d2 = 0;
  auto add = [&](double v, const Interval& iv) {
    const double g = v < iv.lo() ? iv.lo() - v : (v > iv.hi() ? v - iv.hi() : 0.0);
    d2 += g * g;
  };
  for (std::size_t i = 0; i < p.size(); ++i) {
    add(p[i].x, b.poses[i].x);
    add(p[i].y, b.poses[i].y);
    add(p[i].z, b.poses[i].z);
    add(p[i].k * kHalfPi, b.poses[i].d);
  }
  return std::sqrt(d2);
}

inline bool box_contains(const LayoutState& b, const std::vector<oracle::Point>& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& q = b.poses[i];
    if (!q.x.contains(p[i].x) || !q.y.contains(p[i].y) || !q.z.contains(p[i].z) ||
        !q.d.contains(p[i].k * kHalfPi))
      return false;
  }
  return true;
}

inline CompletenessResult grid_completeness(const SmallScene& sc, double step, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  CompletenessResult r;
  const CompiledScene scene = compile(sc.query, sc.lib, {}, sc.room);
  LayoutState init = scene.initial_state();
  for (std::size_t i = 0; i < 2; ++i) init.poses[i].d = Interval(sc.turns[i] * kHalfPi);
  SolverConfig cfg;
  cfg.tol = tol;
  cfg.early_stop = false;
  cfg.max_expansions = std::size_t(-1);
  const SolveResult res = solve(scene, init, cfg);
  r.status = res.status;
  r.boxes = res.solutions.size();

  // Grid over each pose interval of the initial state.
  auto axis = [&](const Interval& iv) {
    std::vector<double> v;
    for (long k = long(std::ceil(iv.lo() / step - 1e-9)); k * step <= iv.hi() + 1e-9; ++k) v.push_back(k * step);
    return v;
  };
  const auto x0 = axis(init.poses[0].x), y0 = axis(init.poses[0].y), z0 = axis(init.poses[0].z);
  const auto x1 = axis(init.poses[1].x), y1 = axis(init.poses[1].y), z1 = axis(init.poses[1].z);
  const oracle::SceneOracle check(scene);
  const double reach = tol * std::sqrt(double(init.dims()));
  std::vector<std::size_t> hits(res.solutions.size(), 0);
  std::vector<oracle::Point> p(2);
  p[0].k = sc.turns[0];
  p[1].k = sc.turns[1];
  for (double a : x0)
    for (double b : y0)
      for (double c : z0) {
        p[0].x = a, p[0].y = b, p[0].z = c;
        for (double d : x1)
          for (double e : y1)
            for (double f : z1) {
              p[1].x = d, p[1].y = e, p[1].z = f;
              ++r.grid_points;
              if (!check(p)) continue;
              ++r.feasible;
              double best = 1e300;
              for (std::size_t s = 0; s < res.solutions.size(); ++s) {
                const double dist = box_distance(p, res.solutions[s]);
                best = std::min(best, dist);
                if (dist == 0) ++hits[s];
              }
              r.max_distance = std::max(r.max_distance, best);
              if (best > reach) ++r.uncovered;
            }
      }
  for (std::size_t s = 0; s < res.solutions.size(); ++s) {
    bool wide = true;
    for (std::size_t k = 0; k < res.solutions[s].dims(); ++k) {
      const Interval& iv = res.solutions[s].var(k);
      if (k % 4 == 3 || iv.is_point()) continue;  // fixed orientation / exact contact
      if (iv.width() < step) wide = false;
    }
    if (wide && hits[s] == 0) ++r.empty_boxes;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// ---------------------------------------------------------------------------
// Matching

struct MatchingCounts {
  std::size_t instances = 0;
  std::size_t above_optimum = 0;      ///< greedy > exhaustive (must never happen)
  std::size_t non_competing = 0;
  std::size_t non_competing_gap = 0;  ///< greedy != exhaustive on a non-competing instance
  std::size_t iou_pairs = 0;
  double iou_max_error = 0;
};

inline Box2D random_box(std::mt19937_64& rng, const std::string& cat, double extent = 100) {
  std::uniform_real_distribution<double> pos(0, extent), size(2, extent / 2);
  const double x = pos(rng), y = pos(rng);
  return Box2D{x, y, x + size(rng), y + size(rng), cat, 1.0, ""};
}

inline MatchingCounts matching_oracle(std::size_t n, std::uint64_t seed, std::size_t max_boxes = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> conf(0.05, 1.0);
  const std::string cats[] = {"chair", "table", "lamp"};
  MatchingCounts c;
  MatchConfig cfg;
  cfg.mode = MatchConfig::Mode::Soft;
  for (std::size_t i = 0; i < n; ++i) {
    ++c.instances;
    std::vector<Box2D> refs;
    DetectionSet det;
    const std::size_t nr = 1 + rng() % max_boxes, nd = 1 + rng() % max_boxes;
    const std::size_t ncat = 1 + rng() % 3;
    for (std::size_t k = 0; k < nr; ++k) refs.push_back(random_box(rng, cats[rng() % ncat]));
    for (std::size_t k = 0; k < nd; ++k) {
      Box2D b = random_box(rng, cats[rng() % ncat]);
      b.confidence = conf(rng);
      det.boxes.push_back(b);
    }
    std::vector<int> assignment;
    const double greedy = greedy_assign(refs, det, weighted_detections(det, cfg), assignment);
    std::vector<double> w;
    for (const auto& b : det.boxes) w.push_back(b.confidence);
    const double best = oracle::exhaustive_assignment(refs, det.boxes, w);
    if (greedy > best + 1e-12) ++c.above_optimum;

    bool competing = false;
    for (std::size_t j = 0; j < det.boxes.size() && !competing; ++j) {
      int users = 0;
      for (const auto& r : refs)
        if (r.category == det.boxes[j].category && oracle::area_iou(r, det.boxes[j]) > 0) ++users;
      competing = users > 1;
    }
    if (!competing) {
      ++c.non_competing;
      if (std::abs(greedy - best) > 1e-12) ++c.non_competing_gap;
    }

    for (const auto& r : refs)
      for (const auto& d : det.boxes) {
        ++c.iou_pairs;
        c.iou_max_error = std::max(c.iou_max_error, std::abs(iou(r, d) - oracle::area_iou(r, d)));
      }
  }
  // Touching, nested and identical boxes.
  const Box2D a{0, 0, 10, 10, "x", 1, ""};
  for (const Box2D& b : {Box2D{10, 0, 20, 10, "x", 1, ""}, Box2D{2, 2, 5, 5, "x", 1, ""}, a,
                         Box2D{5, 0, 15, 10, "x", 1, ""}, Box2D{-3, -3, 0.5, 0.5, "x", 1, ""}}) {
    ++c.iou_pairs;
    c.iou_max_error = std::max(c.iou_max_error, std::abs(iou(a, b) - oracle::area_iou(a, b)));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Metrics fixtures (hand-computed)

struct MetricsFixture {
  std::vector<std::vector<std::size_t>> ranks;
  std::vector<std::pair<std::size_t, double>> recall;  ///< (k, expected R@k)
  double median;
};

inline std::vector<MetricsFixture> metrics_fixtures() {
  return {
      {{{1}, {12}, {3}}, {{10, 2.0 / 3.0}, {1, 1.0 / 3.0}, {12, 1.0}}, 3},
      {{{1}, {3}, {7}}, {{1, 1.0 / 3.0}, {5, 2.0 / 3.0}, {7, 1.0}}, 3},
      {{{1}, {3}, {7}, {9}}, {{10, 1.0}, {3, 0.5}}, 5},
      {{{2, 5}, {1}}, {{1, 0.5}, {2, 1.0}}, 2},
      {{{100}, {500}, {501}}, {{100, 1.0 / 3.0}, {500, 2.0 / 3.0}, {50, 0.0}}, 500},
      {{{1}}, {{1, 1.0}, {500, 1.0}}, 1},
      {{{50}, {51}, {49}, {10}}, {{50, 0.75}, {10, 0.25}, {100, 1.0}}, 49.5},
      {{{4}, {4}, {4}}, {{3, 0.0}, {4, 1.0}}, 4},
      {{{10, 20}, {30, 5}}, {{5, 0.5}, {10, 1.0}, {4, 0.0}}, 15},
      {{{7}, {2}, {9}, {1}, {3}}, {{2, 0.4}, {1, 0.2}, {10, 1.0}}, 3},
  };
}

inline std::size_t metrics_mismatches() {
  std::size_t bad = 0;
  for (const auto& f : metrics_fixtures()) {
    for (const auto& [k, want] : f.recall)
      if (recall_at_k(f.ranks, k) != want) ++bad;
    if (median_rank(f.ranks) != f.median) ++bad;
  }
  return bad;
}

// ---------------------------------------------------------------------------
// Synthetic retrieval benchmark

struct BenchQuery {
  std::string id;
  std::string dsl;
};

/// Target queries of the synthetic benchmark.
inline std::vector<BenchQuery> bench_targets() {
  return {{"q00", "picture-0 above bed-0\nnight-stand-0 right bed-0:head\nlamp-0 on night-stand-0\n"},
          {"q01", "chair-0 front desk-0\nmonitor-0 on desk-0\n"},
          {"q02", "table-0 front sofa-0\nlamp-0 on table-0\n"},
          {"q03", "chair-0 left dining-table-0\nchair-1 right dining-table-0\n"},
          {"q04", "desk-0 near whiteboard-0\nchair-0 front desk-0\n"},
          {"q05", "mirror-0 above sink-0\n"},
          {"q06", "tv-0 on cabinet-0\nsofa-0 front cabinet-0\n"},
          {"q07", "mirror-0 above dresser-0\nbox-0 on dresser-0\n"},
          {"q08", "count 2 pillow-0\npillow-0 on bed-0\n"},
          {"q09", "garbage-bin-0 near table-0\nside-table-0 right table-0\nlamp-0 on side-table-0\n"}};
}

/// One distractor query per target with the same categories and counts but a
/// structurally different arrangement (vertical vs lateral placement, a different
/// side of an elongated object), so category counts carry no signal while the
/// arrangements are not related by a rotation of the reference object.
inline std::vector<BenchQuery> bench_distractors() {
  return {{"d00", "lamp-0 on bed-0\nnight-stand-0 left bed-0:rear\npicture-0 above night-stand-0\n"},
          {"d01", "monitor-0 under desk-0\nchair-0 front desk-0\n"},
          {"d02", "lamp-0 on sofa-0\ntable-0 right sofa-0\n"},
          {"d03", "chair-0 left dining-table-0\nchair-1 left chair-0\n"},
          {"d04", "chair-0 near whiteboard-0\ndesk-0 behind chair-0\n"},
          {"d05", "mirror-0 right sink-0\n"},
          {"d06", "tv-0 on sofa-0\ncabinet-0 right sofa-0\n"},
          {"d07", "mirror-0 right dresser-0\nbox-0 front dresser-0\n"},
          {"d08", "count 2 pillow-0\npillow-0 front bed-0\n"},
          {"d09", "lamp-0 on table-0\ngarbage-bin-0 under table-0\nside-table-0 near table-0\n"}};
}

struct Benchmark {
  std::vector<BenchQuery> queries;
  std::vector<DetectionSet> db;
  std::map<std::string, std::vector<std::string>> ground_truth;
  std::size_t unsolved = 0;  ///< synthetic images that could not be generated
};

/// Perturbs every coordinate by at most `frac` of the box size and appends
/// ceil(spurious * n) random boxes with random categories and confidences.
inline void corrupt(DetectionSet& d, const std::vector<std::string>& categories, double frac, double spurious,
                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(-frac, frac), unit(0, 1);
  for (auto& b : d.boxes) {
    const double w = b.width(), h = b.height();
    Box2D m = b;
    m.x_min += jitter(rng) * w;
    m.x_max += jitter(rng) * w;
    m.y_min += jitter(rng) * h;
    m.y_max += jitter(rng) * h;
    m.x_min = std::clamp(m.x_min, 0.0, double(d.width));
    m.x_max = std::clamp(m.x_max, 0.0, double(d.width));
    m.y_min = std::clamp(m.y_min, 0.0, double(d.height));
    m.y_max = std::clamp(m.y_max, 0.0, double(d.height));
    if (m.valid()) b = m;
  }
  const std::size_t extra = std::size_t(std::ceil(spurious * double(d.boxes.size())));
  for (std::size_t k = 0; k < extra; ++k) {
    const double w = 20 + unit(rng) * 180, h = 20 + unit(rng) * 180;
    const double x = unit(rng) * (d.width - w), y = unit(rng) * (d.height - h);
    d.boxes.push_back(Box2D{x, y, x + w, y + h, categories[rng() % categories.size()], 0.3 + 0.7 * unit(rng), ""});
  }
}

/// Detection sets from a query's own layouts: an independent solver seed and camera
/// seed from the ones used for the references, confidence 1, then corrupted. A
/// photo of a scene shows the scene, so cameras are resampled (bounded attempts)
/// until every object of the layout projects into the image.
inline std::vector<DetectionSet> synthetic_images(const BenchQuery& q, const Vocabulary& v, std::size_t count,
                                                  std::uint64_t seed, const std::vector<std::string>& categories,
                                                  std::mt19937_64& rng) {
  const Query query = parse_query(q.dsl, false, v);
  const CompiledScene scene = compile(query, v.objects);
  SolverConfig sc;
  sc.seed = seed;
  sc.K = count;
  const SolveResult res = solve(scene, sc);
  std::vector<DetectionSet> out;
  for (std::size_t li = 0; li < res.solutions.size() && out.size() < count; ++li) {
    const LayoutState layout = sample_layout(res.solutions[li], seed + li);
    for (std::uint64_t attempt = 0; attempt < 200; ++attempt) {
      const auto cams = sample_cameras(scene, layout, 1, seed * 131 + li * 977 + attempt);
      if (cams.cameras.empty()) continue;
      const auto ref = project(scene, layout, cams.cameras[0]);
      if (!ref || ref->boxes.size() != scene.size()) continue;
      DetectionSet d;
      d.width = ref->width;
      d.height = ref->height;
      for (auto b : ref->boxes) {
        b.label.clear();
        b.confidence = 1.0;
        d.boxes.push_back(b);
      }
      corrupt(d, categories, 0.05, 0.2, rng);
      out.push_back(std::move(d));
      break;
    }
  }
  return out;
}

inline Benchmark build_benchmark(const Vocabulary& v, std::uint64_t seed) {
  Benchmark bm;
  bm.queries = bench_targets();
  std::vector<std::string> categories;
  for (const auto& [cat, m] : v.objects.models()) categories.push_back(cat);
  std::mt19937_64 rng(seed);

  std::vector<std::pair<std::string, DetectionSet>> images;  // (owner, image)
  for (const auto& q : bm.queries) {
    auto imgs = synthetic_images(q, v, 1, seed + 1000 + images.size(), categories, rng);
    if (imgs.empty()) ++bm.unsolved;
    for (auto& d : imgs) images.emplace_back(q.id, std::move(d));
  }
  for (const auto& q : bench_distractors()) {
    auto imgs = synthetic_images(q, v, 4, seed + 5000 + images.size(), categories, rng);
    if (imgs.size() < 4) bm.unsolved += 4 - imgs.size();
    for (auto& d : imgs) images.emplace_back("", std::move(d));
  }
  // Opaque ids in shuffled order so id-order tie breaking carries no signal.
  std::vector<std::size_t> order(images.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t r = 0; r < order.size(); ++r) {
    auto& [owner, d] = images[order[r]];
    char id[32];
    std::snprintf(id, sizeof id, "img%03zu", r);
    d.image_id = id;
    if (!owner.empty()) bm.ground_truth[owner].push_back(id);
    bm.db.push_back(d);
  }
  std::sort(bm.db.begin(), bm.db.end(), [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  return bm;
}

struct BenchResult {
  MetricsTable layout, histogram;
  std::size_t solved = 0;
};

inline BenchResult run_benchmark(const Benchmark& bm, const Vocabulary& v, const RunConfig& cfg) {
  BenchResult out;
  std::vector<std::vector<std::size_t>> lr, hr;
  for (const auto& q : bm.queries) {
    auto it = bm.ground_truth.find(q.id);
    if (it == bm.ground_truth.end()) {
      // No ground-truth image could be generated: counts as a miss for both scorers.
      lr.push_back({bm.db.size() + 1});
      hr.push_back({bm.db.size() + 1});
      continue;
    }
    const QueryRun run = synthesize(q.id, parse_query(q.dsl, false, v), v, cfg);
    out.solved += !run.references.references.empty();
    lr.push_back(ground_truth_ranks(rank_query(run, bm.db, cfg, false), it->second));
    hr.push_back(ground_truth_ranks(rank_query(run, bm.db, cfg, true), it->second));
  }
  out.layout = evaluate(lr);
  out.histogram = evaluate(hr);
  return out;
}

}  // namespace checks
