#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "scenegen/relations.hpp"

namespace scenegen {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Pairwise difference bounds L[a](i,j) <= c_i - c_j <= U[a](i,j) per axis a in {x, y, z}.
class BoundMatrices {
 public:
  BoundMatrices() = default;

  /// Vacuous bounds: |c_i - c_j| <= extent[a].
  BoundMatrices(std::size_t n, const std::array<double, 3>& extent) : n_(n) {
    for (int a = 0; a < 3; ++a) {
      u_[a].assign(n * n, extent[std::size_t(a)]);
      for (std::size_t i = 0; i < n; ++i) u_[a][i * n + i] = 0;
    }
  }

  std::size_t size() const { return n_; }
  double upper(int axis, std::size_t i, std::size_t j) const { return u_[axis][i * n_ + j]; }
  double lower(int axis, std::size_t i, std::size_t j) const { return -u_[axis][j * n_ + i]; }

  /// Intersects the bound on c_i - c_j with [lo, hi]; the (j, i) entry follows by antisymmetry.
  void tighten(int axis, std::size_t i, std::size_t j, double lo, double hi) {
    double& u = u_[axis][i * n_ + j];
    double& l_neg = u_[axis][j * n_ + i];  // stores -L(i,j)
    u = std::min(u, hi);
    l_neg = std::min(l_neg, -lo);
  }

  /// Transitive tightening to a fixed point (Floyd-Warshall on each axis).
  /// Returns false when some interval becomes empty.
  bool close() {
    constexpr double slack = 1e-12;
    for (int a = 0; a < 3; ++a) {
      auto& u = u_[a];
      for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t i = 0; i < n_; ++i) {
          const double uik = u[i * n_ + k];
          if (uik == kInf) continue;
          for (std::size_t j = 0; j < n_; ++j) {
            const double via = uik + u[k * n_ + j];
            if (via < u[i * n_ + j]) u[i * n_ + j] = via;
          }
        }
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
          if (u[i * n_ + j] + u[j * n_ + i] < -slack) return false;
    }
    return true;
  }

  bool feasible() const {
    for (int a = 0; a < 3; ++a)
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
          if (lower(a, i, j) > upper(a, i, j)) return false;
    return true;
  }

  friend bool operator==(const BoundMatrices&, const BoundMatrices&) = default;

 private:
  std::size_t n_ = 0;
  std::array<std::vector<double>, 3> u_;
};

/// Per-object unary position bounds plus the pairwise matrices, for one vector of orientation sets.
struct ShrinkBounds {
  bool feasible = true;
  BoundMatrices pair;
  std::vector<std::array<Interval, 3>> unary;
};

/// Bounds implied by the top-level constraints for the orientations currently
/// allowed in `state` (positions in `state` are ignored). Only relations whose
/// operands are single objects and, for directional relations, whose reference
/// orientation is resolved contribute; disjunctions contribute nothing.
inline ShrinkBounds init_bounds(const CompiledScene& scene, const LayoutState& state) {
  const std::size_t n = scene.size();
  const double eps = scene.th.contact_eps;
  const double big = 2 * std::max({scene.room.x, scene.room.y, scene.room.z}) + 1;
  ShrinkBounds out;
  out.pair = BoundMatrices(n, {big, big, big});
  out.unary.assign(n, {Interval(-big, big), Interval(-big, big), Interval(-big, big)});

  LayoutState zero = state;
  for (auto& p : zero.poses) p.x = p.y = p.z = Interval(0.0);
  SceneGeometry g(scene, zero);
  if (!g.valid()) {
    out.feasible = false;
    return out;
  }

  auto clip = [&](std::size_t i, int a, double lo, double hi) {
    if (lo > hi) {
      out.feasible = false;
      return;
    }
    auto r = intersect(out.unary[i][std::size_t(a)], Interval(lo, hi));
    if (!r) out.feasible = false;
    else out.unary[i][std::size_t(a)] = *r;
  };

  // Unary priors.
  for (const auto& c : scene.root.children) {
    if (c.a < 0) continue;
    const std::size_t i = std::size_t(c.a);
    switch (c.kind) {
      case Constraint::Kind::InRoom: {
        const auto& b = g.base(i)->corners;
        for (int a = 0; a < 3; ++a) clip(i, a, -b.p[a].hi() - eps, scene.room.extent(a) - b.q[a].lo() + eps);
        break;
      }
      case Constraint::Kind::Ground: {
        const double off = g.base(i)->corners.p.z.lo();
        clip(i, 2, -off, -off);
        break;
      }
      case Constraint::Kind::Wall: {
        const auto o = g.orientation(i);
        if (o.is_single() && (o.first() == 0 || o.first() == 1)) {
          const int a = o.first();
          const double off = g.base(i)->corners.p[a].lo();
          clip(i, a, -off, -off);
        }
        break;
      }
      default: break;
    }
  }

  auto single = [&](int e) -> std::optional<std::size_t> {
    const auto& def = scene.entities[std::size_t(e)];
    if (def.members.size() != 1) return std::nullopt;
    return std::size_t(def.members[0]);
  };

  auto directional = [&](Relation rel, int ea, int eb) {
    const auto i = single(ea), j = single(eb);
    if (!i || !j || *i == *j) return;
    const auto& t = g.entity(std::size_t(ea));
    const auto& r = g.entity(std::size_t(eb));
    if (!r.orient.is_single()) return;
    const int k = r.orient.first();
    const bool along_u = rel == Relation::Behind || rel == Relation::Front;
    const auto dir = quarter_direction(along_u ? k : k + 3);
    const bool low_kind = rel == Relation::Behind || rel == Relation::Right;
    const bool low = (dir.sign > 0) == low_kind;
    const int a = dir.axis;
    if (low) out.pair.tighten(a, *i, *j, -kInf, (r.box.p[a] - t.box.q[a]).hi());
    else out.pair.tighten(a, *i, *j, (r.box.q[a] - t.box.p[a]).lo(), kInf);
  };

  for (const auto& c : scene.root.children) {
    if (c.kind != Constraint::Kind::Relation) continue;
    if (c.relation == Relation::InARow) {
      for (std::size_t m = 0; m + 1 < c.row.size(); ++m) directional(Relation::Right, c.row[m], c.row[m + 1]);
      continue;
    }
    const auto i = single(c.a), j = single(c.b);
    if (!i || !j || *i == *j) continue;
    const auto& t = g.entity(std::size_t(c.a));
    const auto& r = g.entity(std::size_t(c.b));
    auto center_xy = [&] {
      for (int a = 0; a < 2; ++a)
        out.pair.tighten(a, *i, *j, (r.box.p[a] - t.center[a]).lo(), (r.box.q[a] - t.center[a]).hi());
    };
    auto near_all = [&](double d) {
      for (int a = 0; a < 3; ++a)
        out.pair.tighten(a, *i, *j, (r.box.p[a] - t.box.q[a]).lo() - d, (r.box.q[a] - t.box.p[a]).hi() + d);
    };
    switch (c.relation) {
      case Relation::Behind:
      case Relation::Front:
      case Relation::Left:
      case Relation::Right:
        directional(c.relation, c.a, c.b);
        break;
      case Relation::On: {
        const Interval dz = r.support - t.box.p.z;
        out.pair.tighten(2, *i, *j, dz.lo(), dz.hi());
        center_xy();
        break;
      }
      case Relation::Above: {
        const Interval dz = r.box.q.z - t.box.p.z;
        out.pair.tighten(2, *i, *j, dz.lo() + scene.th.d_min_above, dz.hi() + scene.th.d_max_above);
        center_xy();
        break;
      }
      case Relation::Under: {
        out.pair.tighten(2, *i, *j, -kInf, (r.support - t.support).hi());
        for (int a = 0; a < 2; ++a)
          out.pair.tighten(a, *i, *j, (r.box.p[a] - t.box.q[a]).lo(), (r.box.q[a] - t.box.p[a]).hi());
        break;
      }
      case Relation::Near:
        near_all(c.distance > 0 ? c.distance : scene.th.d_near);
        break;
      case Relation::SideBySide:
        near_all(scene.th.d_near);
        break;
      default: break;
    }
  }
  return out;
}

/// Floyd-Warshall closure of the pairwise part; marks the bounds infeasible on an empty interval.
inline bool close_bounds(ShrinkBounds& b) {
  if (!b.feasible) return false;
  b.feasible = b.pair.close();
  return b.feasible;
}

/// x_i <- x_i ∩ unary_i ∩ (∩_j [x_j + L_ij, x_j + U_ij]) for every position variable.
/// Returns nullopt when some variable becomes empty.
inline std::optional<LayoutState> shrink(const LayoutState& s, const ShrinkBounds& b) {
  if (!b.feasible) return std::nullopt;
  const std::size_t n = s.size();
  LayoutState base = s;
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) {
      auto r = intersect(base.var(4 * i + std::size_t(a)), b.unary[i][std::size_t(a)]);
      if (!r) return std::nullopt;
      base.var(4 * i + std::size_t(a)) = *r;
    }
  LayoutState out = base;
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) {
      Interval v = out.var(4 * i + std::size_t(a));
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const Interval& xj = base.var(4 * j + std::size_t(a));
        const double lo = xj.lo() + b.pair.lower(a, i, j);
        const double hi = xj.hi() + b.pair.upper(a, i, j);
        if (lo > hi) return std::nullopt;
        auto r = intersect(v, Interval(lo, hi));
        if (!r) return std::nullopt;
        v = *r;
      }
      out.var(4 * i + std::size_t(a)) = v;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Search

struct SolverConfig {
  double tol = 0.2;
  std::size_t K = 5;
  std::size_t max_expansions = 1'000'000;
  std::uint64_t seed = 0;
  bool shrinkage = true;
  bool early_stop = true;  ///< stop once K solutions are found
  /// Split-selection width of an unresolved orientation; infinite resolves orientations first.
  double orientation_width = kInf;
  /// Called for each Maybe state discarded at width <= tol (diagnostics).
  std::function<void(const LayoutState&)> on_undecided;

  void validate() const {
    if (!(tol > 0)) throw ValidationError("tol must be positive");
    if (K < 1) throw ValidationError("K must be at least 1");
  }
};

enum class SolveStatus { Solved, Infeasible, BudgetExhausted };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Solved: return "solved";
    case SolveStatus::Infeasible: return "infeasible";
    default: return "budget-exhausted";
  }
}

struct SolverStats {
  std::size_t expansions = 0;
  std::size_t prunes = 0;          ///< states evaluated False
  std::size_t shrink_prunes = 0;   ///< states emptied by shrinkage
  std::size_t undecided = 0;       ///< Maybe states narrower than tol, discarded
  std::size_t solutions = 0;
  std::size_t max_queue = 0;
  bool budget_hit = false;
  double seconds = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  /// Infeasible with no undecided discards: the queue exhausted on definite prunes only.
  bool proven = false;
  std::vector<LayoutState> solutions;
  SolverStats stats;
};

/// Width used to pick the split dimension.
inline double split_width(const LayoutState& s, std::size_t k, const SolverConfig& cfg) {
  if (k % 4 == 3) return s.orientation(k / 4).size() > 1 ? cfg.orientation_width : 0.0;
  return s.var(k).width();
}

/// Halves dimension k. Orientation halves split the discrete value list.
inline std::pair<LayoutState, LayoutState> split_state(const LayoutState& s, std::size_t k) {
  LayoutState a = s, b = s;
  if (k % 4 == 3) {
    std::vector<int> ks;
    s.orientation(k / 4).for_each([&](int q) { ks.push_back(q); });
    const std::size_t half = ks.size() / 2;
    a.var(k) = Interval(ks.front() * kHalfPi, ks[half - 1] * kHalfPi);
    b.var(k) = Interval(ks[half] * kHalfPi, ks.back() * kHalfPi);
  } else {
    auto [lo, hi] = split(s.var(k));
    a.var(k) = lo;
    b.var(k) = hi;
  }
  return {std::move(a), std::move(b)};
}

class Solver {
 public:
  Solver(const CompiledScene& scene, SolverConfig cfg) : scene_(scene), cfg_(cfg) { cfg_.validate(); }

  SolveResult run() { return run(scene_.initial_state()); }

  SolveResult run(const LayoutState& init) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult res;
    std::mt19937_64 rng(cfg_.seed);
    std::deque<LayoutState> queue{init};

    auto push = [&](LayoutState s) {
      queue.push_back(std::move(s));
      std::uniform_int_distribution<std::size_t> pick(0, queue.size() - 1);
      std::swap(queue.back(), queue[pick(rng)]);
    };

    while (!queue.empty()) {
      if (res.stats.expansions >= cfg_.max_expansions) {
        res.stats.budget_hit = true;
        break;
      }
      LayoutState x = std::move(queue.front());
      queue.pop_front();
      ++res.stats.expansions;

      if (cfg_.shrinkage) {
        auto s = shrink(x, bounds_for(x));
        if (!s) {
          ++res.stats.shrink_prunes;
          continue;
        }
        x = std::move(*s);
      }

      const Tribool f = eval(scene_, x);
      if (f == Tribool::False) {
        ++res.stats.prunes;
      } else if (f == Tribool::True) {
        res.solutions.push_back(std::move(x));
        if (cfg_.early_stop && res.solutions.size() >= cfg_.K) break;
      } else {
        std::size_t best = 0;
        double w = -1;
        for (std::size_t k = 0; k < x.dims(); ++k) {
          const double wk = split_width(x, k, cfg_);
          if (wk > w) {
            w = wk;
            best = k;
          }
        }
        if (w > cfg_.tol) {
          auto [a, b] = split_state(x, best);
          push(std::move(a));
          push(std::move(b));
          res.stats.max_queue = std::max(res.stats.max_queue, queue.size());
        } else {
          ++res.stats.undecided;
          if (cfg_.on_undecided) cfg_.on_undecided(x);
        }
      }
    }

    res.stats.solutions = res.solutions.size();
    res.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!res.solutions.empty()) res.status = SolveStatus::Solved;
    else if (res.stats.budget_hit) res.status = SolveStatus::BudgetExhausted;
    else {
      res.status = SolveStatus::Infeasible;
      res.proven = res.stats.undecided == 0;
    }
    return res;
  }

  /// Closed bounds for the orientation sets of `x`, cached per orientation vector.
  const ShrinkBounds& bounds_for(const LayoutState& x) {
    std::vector<std::uint8_t> key;
    key.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) key.push_back(x.orientation(i).mask());
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      ShrinkBounds b = init_bounds(scene_, x);
      close_bounds(b);
      it = cache_.emplace(std::move(key), std::move(b)).first;
    }
    return it->second;
  }

 private:
  const CompiledScene& scene_;
  SolverConfig cfg_;
  std::map<std::vector<std::uint8_t>, ShrinkBounds> cache_;
};

inline SolveResult solve(const CompiledScene& scene, const SolverConfig& cfg) { return Solver(scene, cfg).run(); }

inline SolveResult solve(const CompiledScene& scene, const LayoutState& init, const SolverConfig& cfg) {
  return Solver(scene, cfg).run(init);
}

/// One concrete layout per solution box: interval midpoints, orientation snapped
/// to a contained axis-aligned value (seeded choice when several remain).
inline LayoutState sample_layout(const LayoutState& s, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  LayoutState out = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto& p = out.poses[i];
    p.x = Interval(p.x.midpoint());
    p.y = Interval(p.y.midpoint());
    p.z = Interval(p.z.midpoint());
    std::vector<int> ks;
    s.orientation(i).for_each([&](int k) { ks.push_back(k); });
    int k = ks.empty() ? 0 : ks.front();
    if (ks.size() > 1) k = ks[std::uniform_int_distribution<std::size_t>(0, ks.size() - 1)(rng)];
    p.d = Interval(k * kHalfPi);
  }
  return out;
}

}  // namespace scenegen
