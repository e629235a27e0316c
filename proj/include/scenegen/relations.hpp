#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scenegen/interval.hpp"
#include "scenegen/object_model.hpp"
#include "scenegen/query.hpp"

namespace scenegen {

struct RelationThresholds {
  double d_near = 0.5;
  double d_min_above = 0.25;
  double d_max_above = 0.5;
  double d_coherence = 2.0;  ///< "objects in a triplet are close": near with this distance
  double contact_eps = 1e-9;  ///< slack for exact contact (on, walls, ground, touching faces)

  void validate() const {
    if (!(d_near > 0 && d_min_above > 0 && d_max_above > 0 && d_coherence > 0))
      throw ValidationError("relation thresholds must be positive");
    if (!(d_min_above <= d_max_above)) throw ValidationError("d_min_above must not exceed d_max_above");
    if (!(contact_eps >= 0)) throw ValidationError("contact_eps must be non-negative");
  }
};

struct Room {
  double x = 5, y = 5, z = 5;
  double extent(int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
};

/// u_theta and e_theta for an axis-aligned theta = k*pi/2.
struct AxisFrame {
  double theta = 0;
  std::array<double, 3> u{1, 0, 0};
  std::array<double, 3> e{1, 1, 1};

  static AxisFrame quarter(int k) {
    AxisFrame f;
    k &= 3;
    f.theta = k * kHalfPi;
    const auto [ux, uy] = rotate_quarter(k, 1, 0);
    f.u = {ux, uy, 0};
    // (cos - sin, sin + cos, 1) is R_theta (1, 1, 1): applied to the rotated
    // corners it inflates every face outward by the same distance.
    const auto [ex, ey] = rotate_quarter(k, 1, 1);
    f.e = {ex, ey, 1};
    return f;
  }
};

// ---------------------------------------------------------------------------
// Layout state

/// 4n pose intervals; variable 4i+0..3 are x_i, y_i, z_i, d_i.
struct LayoutState {
  std::vector<Pose> poses;

  std::size_t size() const { return poses.size(); }
  std::size_t dims() const { return 4 * poses.size(); }

  Interval& var(std::size_t k) {
    Pose& p = poses[k / 4];
    switch (k % 4) {
      case 0: return p.x;
      case 1: return p.y;
      case 2: return p.z;
      default: return p.d;
    }
  }
  const Interval& var(std::size_t k) const { return const_cast<LayoutState*>(this)->var(k); }

  OrientationSet orientation(std::size_t i) const { return OrientationSet::within(poses[i].d); }

  bool is_point() const {
    for (const auto& p : poses)
      if (!p.x.is_point() || !p.y.is_point() || !p.z.is_point() || !orientation(&p - poses.data()).is_single())
        return false;
    return true;
  }

  friend bool operator==(const LayoutState& a, const LayoutState& b) {
    if (a.poses.size() != b.poses.size()) return false;
    for (std::size_t i = 0; i < a.poses.size(); ++i) {
      const auto &p = a.poses[i], &q = b.poses[i];
      if (!(p.x == q.x && p.y == q.y && p.z == q.z && p.d == q.d)) return false;
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Relations

enum class Relation : std::uint8_t { Near, On, Above, Under, Behind, Front, Left, Right, NextTo, SideBySide, InARow };

inline std::optional<Relation> relation_from_name(std::string_view name) {
  static const std::map<std::string_view, Relation> table{
      {"near", Relation::Near},       {"on", Relation::On},         {"above", Relation::Above},
      {"under", Relation::Under},     {"behind", Relation::Behind}, {"front", Relation::Front},
      {"left", Relation::Left},       {"right", Relation::Right},   {"next-to", Relation::NextTo},
      {"side-by-side", Relation::SideBySide}, {"in-a-row", Relation::InARow}};
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

inline const char* relation_name(Relation r) {
  switch (r) {
    case Relation::Near: return "near";
    case Relation::On: return "on";
    case Relation::Above: return "above";
    case Relation::Under: return "under";
    case Relation::Behind: return "behind";
    case Relation::Front: return "front";
    case Relation::Left: return "left";
    case Relation::Right: return "right";
    case Relation::NextTo: return "next-to";
    case Relation::SideBySide: return "side-by-side";
    default: return "in-a-row";
  }
}

/// Placed geometry of a relation operand: an object, a sub-object, or a group hull.
struct EntityGeom {
  CornerPair box;
  Vec3I center;
  Interval support;
  OrientationSet orient;
};

namespace detail {

inline Tribool low_side(const EntityGeom& t, const EntityGeom& r, int axis) {
  return le(t.box.q[axis], r.box.p[axis]);
}
inline Tribool high_side(const EntityGeom& t, const EntityGeom& r, int axis) {
  return le(r.box.q[axis], t.box.p[axis]);
}

inline Tribool center_inside_xy(const EntityGeom& t, const EntityGeom& r) {
  Tribool out = Tribool::True;
  for (int a = 0; a < 2; ++a) out = out && le(r.box.p[a], t.center[a]) && le(t.center[a], r.box.q[a]);
  return out;
}

/// All orientations agree -> that value, otherwise Maybe.
template <typename F>
Tribool consensus(OrientationSet s, F&& f) {
  std::optional<Tribool> acc;
  bool mixed = false;
  s.for_each([&](int k) {
    if (mixed) return;
    const Tribool r = f(k);
    if (!acc) acc = r;
    else if (*acc != r) mixed = true;
  });
  if (mixed) return Tribool::Maybe;
  return acc.value_or(Tribool::False);
}

}  // namespace detail

inline Tribool same_orientation(OrientationSet a, OrientationSet b) {
  if ((a & b).empty()) return Tribool::False;
  if (a.is_single() && a == b) return Tribool::True;
  return Tribool::Maybe;
}

/// Boxes overlap after inflating the reference by `d` on every face (closed test).
inline Tribool near(const EntityGeom& t, const EntityGeom& r, double d) {
  Tribool out = Tribool::True;
  for (int a = 0; a < 3 && out != Tribool::False; ++a)
    out = out && le(t.box.p[a], r.box.q[a] + d) && le(r.box.p[a] - d, t.box.q[a]);
  return out;
}

/// One of the 8 atomic relations, or next-to / side-by-side.
inline Tribool eval_atomic(Relation rel, const EntityGeom& t, const EntityGeom& r, const RelationThresholds& th) {
  using detail::consensus;
  switch (rel) {
    case Relation::Near: return near(t, r, th.d_near);
    case Relation::On:
      return eq_tol(t.box.p.z, r.support, th.contact_eps) && detail::center_inside_xy(t, r);
    case Relation::Above:
      return le(r.box.q.z + th.d_min_above, t.box.p.z) && le(t.box.p.z, r.box.q.z + th.d_max_above) &&
             detail::center_inside_xy(t, r);
    case Relation::Under: {
      Tribool out = lt(t.support, r.support);
      for (int a = 0; a < 2; ++a) out = out && lt(t.box.p[a], r.box.q[a]) && lt(r.box.p[a], t.box.q[a]);
      return out;
    }
    case Relation::Behind:
    case Relation::Right:
      // max(u.p1, u.q1) <= min(u.p2, u.q2) along u_{d2} (behind) or u_{d2 - pi/2} (right)
      return consensus(r.orient, [&](int k) {
        const auto dir = quarter_direction(rel == Relation::Behind ? k : k + 3);
        return dir.sign > 0 ? detail::low_side(t, r, dir.axis) : detail::high_side(t, r, dir.axis);
      });
    case Relation::Front:
    case Relation::Left:
      return consensus(r.orient, [&](int k) {
        const auto dir = quarter_direction(rel == Relation::Front ? k : k + 3);
        return dir.sign > 0 ? detail::high_side(t, r, dir.axis) : detail::low_side(t, r, dir.axis);
      });
    case Relation::NextTo:
      return eval_atomic(Relation::Left, t, r, th) || eval_atomic(Relation::Right, t, r, th);
    case Relation::SideBySide:
      return same_orientation(t.orient, r.orient) && near(t, r, th.d_near);
    default:
      throw std::invalid_argument("relation '" + std::string(relation_name(rel)) + "' is not binary");
  }
}

/// in-a-row over an ordered list: d_i = d_{i+1} and right(O_i, O_{i+1}) for all i.
inline Tribool eval_row(const std::vector<EntityGeom>& row, const RelationThresholds& th) {
  Tribool out = Tribool::True;
  for (std::size_t i = 0; i + 1 < row.size() && out != Tribool::False; ++i)
    out = out && same_orientation(row[i].orient, row[i + 1].orient) &&
          eval_atomic(Relation::Right, row[i], row[i + 1], th);
  return out;
}

/// Separated along some axis; faces may touch (up to eps).
inline Tribool disjoint(const CornerPair& a, const CornerPair& b, double eps) {
  Tribool out = Tribool::False;
  for (int ax = 0; ax < 3 && out != Tribool::True; ++ax)
    out = out || le(a.q[ax], b.p[ax] + eps) || le(b.q[ax], a.p[ax] + eps);
  return out;
}

/// Every sub-cuboid of one object is disjoint from every sub-cuboid of the other.
inline Tribool exclusive_pair(const CornerPair& base_a, const std::vector<CornerPair>& parts_a,
                              const CornerPair& base_b, const std::vector<CornerPair>& parts_b, double eps) {
  if (disjoint(base_a, base_b, eps) == Tribool::True) return Tribool::True;
  Tribool out = Tribool::True;
  for (const auto& a : parts_a)
    for (const auto& b : parts_b) {
      out = out && disjoint(a, b, eps);
      if (out == Tribool::False) return out;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Constraint tree

struct Constraint {
  enum class Kind : std::uint8_t { Relation, SameOrientation, Wall, Ground, InRoom, Exclusive, All, Any };

  Kind kind = Kind::All;
  scenegen::Relation relation = scenegen::Relation::Near;
  int a = -1;  ///< target entity (Relation, SameOrientation) or object index (priors)
  int b = -1;  ///< reference entity
  double distance = 0;  ///< for near: inflation distance
  std::vector<int> row;  ///< in-a-row operands (entities)
  std::vector<Constraint> children;
  std::string label;
};

struct SceneObject {
  ObjectRef ref;
  ObjectModel model;
  std::vector<std::string> attributes;
  bool wall = false;  ///< on the wall or against the wall (x=0 or y=0, facing into the room)
  bool ground = false;
};

/// Relation operand: a single object (optionally a sub-object of it) or a group of objects.
struct EntityDef {
  std::vector<int> members;
  std::optional<SubCuboid> sub;
  std::string name;
};

struct CompiledScene {
  std::vector<SceneObject> objects;
  std::vector<EntityDef> entities;
  Constraint root;
  RelationThresholds th;
  Room room;

  std::size_t size() const { return objects.size(); }

  int index_of(const ObjectRef& r) const {
    for (std::size_t i = 0; i < objects.size(); ++i)
      if (objects[i].ref == r.object()) return int(i);
    return -1;
  }

  /// Room-spanning start box; wall objects start with d in {0, pi/2}. The x/y
  /// lower bound allows the negative offset a rotated non-square footprint needs
  /// to touch a wall (the pose point is not a corner when rotated).
  LayoutState initial_state() const {
    LayoutState s;
    for (const auto& o : objects) {
      const auto& b = o.model.base();
      const double slack = std::abs(b.lx - b.ly) / 2;
      const Interval d = o.wall ? Interval(0, kHalfPi) : Interval(0, 3 * kHalfPi);
      s.poses.push_back(Pose{Interval(-slack, room.x), Interval(-slack, room.y), Interval(0, room.z), d});
    }
    return s;
  }
};

namespace detail {

class SceneCompiler {
 public:
  SceneCompiler(const ObjectLibrary& lib, const RelationThresholds& th, const Room& room) : lib_(lib) {
    th.validate();
    out_.th = th;
    out_.room = room;
  }

  CompiledScene run(const Query& raw) {
    const Query q = expand_counts(raw);
    for (const auto& r : q.objects()) {
      SceneObject o;
      o.ref = r;
      o.attributes = q.attributes_of(r);
      o.model = lib_.model(r.category, o.attributes);
      const auto& f = o.model.flags();
      o.wall = f.on_wall || f.against_wall;
      o.ground = f.on_ground;
      for (const auto& a : o.attributes) {
        if (a == "against-wall" || a == "on-wall") o.wall = true;
        else if (a == "on-ground") o.ground = true;
      }
      out_.objects.push_back(std::move(o));
    }
    for (const auto& t : q.triplets) {
      if (!lib_.contains(t.target.category) || (t.reference && !lib_.contains(t.reference->category)))
        throw ValidationError(t.str() + ": unknown category");
    }

    std::vector<Constraint> relations;
    std::vector<Constraint> coherence;
    std::set<std::pair<int, int>> same;
    for (const auto& t : q.triplets) {
      auto rel = relation_from_name(t.relation);
      if (!rel) throw ValidationError("unknown relation '" + t.relation + "'");
      Constraint c;
      c.kind = Constraint::Kind::Relation;
      c.relation = *rel;
      c.label = t.str();
      std::vector<int> involved;
      if (*rel == Relation::InARow) {
        if (t.reference) throw ValidationError(t.str() + ": in-a-row takes no reference");
        for (int m : members_of(q, t.target)) {
          c.row.push_back(single(m, std::nullopt));
          involved.push_back(m);
        }
      } else {
        if (!t.reference) throw ValidationError(t.str() + ": missing reference");
        c.a = entity(q, t.target);
        c.b = entity(q, *t.reference);
        c.distance = *rel == Relation::Near ? out_.th.d_near : 0;
        Constraint near_c;
        near_c.kind = Constraint::Kind::Relation;
        near_c.relation = Relation::Near;
        near_c.a = c.a;
        near_c.b = c.b;
        near_c.distance = out_.th.d_coherence;
        near_c.label = "coherent" + t.str();
        coherence.push_back(std::move(near_c));
        for (int m : out_.entities[std::size_t(c.a)].members) involved.push_back(m);
        for (int m : out_.entities[std::size_t(c.b)].members) involved.push_back(m);
      }
      relations.push_back(std::move(c));

      // Wall propagation: next-to / side-by-side / in-a-row partners of a wall
      // object are against the wall too, with the same orientation.
      if (*rel == Relation::NextTo || *rel == Relation::SideBySide || *rel == Relation::InARow) {
        const bool any_wall = std::any_of(involved.begin(), involved.end(),
                                          [&](int i) { return out_.objects[std::size_t(i)].wall; });
        if (any_wall) {
          for (int i : involved) out_.objects[std::size_t(i)].wall = true;
          for (std::size_t k = 1; k < involved.size(); ++k) {
            auto key = std::minmax(involved[0], involved[k]);
            if (key.first != key.second) same.insert(key);
          }
        }
      }
    }

    std::vector<Constraint> top;
    for (std::size_t i = 0; i < out_.objects.size(); ++i) {
      const auto& o = out_.objects[i];
      top.push_back(prior(Constraint::Kind::InRoom, int(i), "in-room(" + o.ref.str() + ")"));
      if (o.ground) top.push_back(prior(Constraint::Kind::Ground, int(i), "ground(" + o.ref.str() + ")"));
      if (o.wall) top.push_back(prior(Constraint::Kind::Wall, int(i), "wall(" + o.ref.str() + ")"));
    }
    for (const auto& [i, j] : same) {
      Constraint c;
      c.kind = Constraint::Kind::SameOrientation;
      c.a = single(i, std::nullopt);
      c.b = single(j, std::nullopt);
      c.label = "same-orientation(" + out_.objects[std::size_t(i)].ref.str() + ", " +
                out_.objects[std::size_t(j)].ref.str() + ")";
      top.push_back(std::move(c));
    }
    for (auto& c : relations) top.push_back(std::move(c));
    for (auto& c : coherence) top.push_back(std::move(c));
    if (out_.objects.size() > 1) {
      Constraint ex;
      ex.kind = Constraint::Kind::Exclusive;
      ex.label = "exclusive";
      top.push_back(std::move(ex));
    }
    out_.root.kind = Constraint::Kind::All;
    out_.root.label = "all";
    out_.root.children = std::move(top);
    return std::move(out_);
  }

 private:
  static Constraint prior(Constraint::Kind kind, int object, std::string label) {
    Constraint c;
    c.kind = kind;
    c.a = object;
    c.label = std::move(label);
    return c;
  }

  int object_index(const ObjectRef& r) const {
    for (std::size_t i = 0; i < out_.objects.size(); ++i)
      if (out_.objects[i].ref == r.object()) return int(i);
    throw ValidationError(r.str() + " is not an object of the query");
  }

  std::vector<int> members_of(const Query& q, const ObjectRef& r) const {
    if (auto it = q.groups.find(r.object()); it != q.groups.end()) {
      std::vector<int> out;
      for (const auto& m : it->second) out.push_back(object_index(m));
      return out;
    }
    return {object_index(r)};
  }

  int entity(const Query& q, const ObjectRef& r) {
    if (q.is_group(r)) {
      if (r.sub_object) throw ValidationError(r.str() + ": sub-objects of groups are not supported");
      EntityDef e{members_of(q, r), std::nullopt, "group(" + r.object().str() + ")"};
      return add(std::move(e));
    }
    const int i = object_index(r);
    std::optional<SubCuboid> sub;
    if (r.sub_object) {
      const SubCuboid* s = out_.objects[std::size_t(i)].model.find_sub_object(*r.sub_object);
      if (!s) throw ValidationError(r.str() + ": unknown sub-object");
      sub = *s;
    }
    return single(i, sub);
  }

  int single(int i, std::optional<SubCuboid> sub) {
    std::string name = out_.objects[std::size_t(i)].ref.str();
    if (sub) name += ":" + sub->name;
    return add(EntityDef{{i}, std::move(sub), std::move(name)});
  }

  int add(EntityDef e) {
    for (std::size_t k = 0; k < out_.entities.size(); ++k)
      if (out_.entities[k].name == e.name) return int(k);
    out_.entities.push_back(std::move(e));
    return int(out_.entities.size() - 1);
  }

  const ObjectLibrary& lib_;
  CompiledScene out_;
};

}  // namespace detail

/// Triplets plus priors as one conjunction: in-room, ground and wall priors per
/// object, orientation equality from wall propagation, one node per triplet,
/// coherence (near with d_coherence) per binary triplet, and exclusivity.
inline CompiledScene compile(const Query& q, const ObjectLibrary& lib, const RelationThresholds& th = {},
                             const Room& room = {}) {
  return detail::SceneCompiler(lib, th, room).run(q);
}

// ---------------------------------------------------------------------------
// Evaluation

/// Geometry of every object and entity for one layout state, computed lazily.
class SceneGeometry {
 public:
  SceneGeometry(const CompiledScene& scene, const LayoutState& state) : scene_(scene), state_(state) {
    if (state.size() != scene.size()) throw std::invalid_argument("layout dimension does not match the scene");
    base_.resize(scene.size());
    parts_.resize(scene.size());
    entities_.resize(scene.entities.size());
  }

  /// nullopt when the orientation interval holds no admissible value.
  const std::optional<PlacedBox>& base(std::size_t i) {
    if (!base_[i]) {
      const auto& b = scene_.objects[i].model.base();
      base_[i] = place_box(state_.poses[i], b, SubCuboid{"", 0, 0, 0, b.lx, b.ly, b.lz});
    }
    return *base_[i];
  }

  const std::vector<CornerPair>& parts(std::size_t i) {
    if (!parts_[i]) {
      std::vector<CornerPair> out;
      const auto& m = scene_.objects[i].model;
      if (m.parts().empty()) {
        out.push_back(base(i)->corners);
      } else {
        for (const auto& p : m.parts()) out.push_back(place_box(state_.poses[i], m.base(), p)->corners);
      }
      parts_[i] = std::move(out);
    }
    return *parts_[i];
  }

  const EntityGeom& entity(std::size_t e) {
    if (!entities_[e]) entities_[e] = compute(scene_.entities[e]);
    return *entities_[e];
  }

  OrientationSet orientation(std::size_t i) const { return state_.orientation(i); }
  const Pose& pose(std::size_t i) const { return state_.poses[i]; }

  bool valid() {
    for (std::size_t i = 0; i < scene_.size(); ++i)
      if (!base(i)) return false;
    return true;
  }

 private:
  EntityGeom compute(const EntityDef& e) {
    if (e.members.size() == 1 && e.sub) {
      const std::size_t i = std::size_t(e.members[0]);
      const auto& m = scene_.objects[i].model;
      const auto box = place_box(state_.poses[i], m.base(), *e.sub);
      const Interval top = state_.poses[i].z + (e.sub->dz + e.sub->lz);
      return EntityGeom{box->corners, box->center, top, state_.orientation(i)};
    }
    std::optional<EntityGeom> out;
    for (int mi : e.members) {
      const std::size_t i = std::size_t(mi);
      const auto& b = *base(i);
      EntityGeom g{b.corners, b.center, support_height(state_.poses[i], scene_.objects[i].model),
                   state_.orientation(i)};
      if (!out) {
        out = g;
        continue;
      }
      for (int a = 0; a < 3; ++a) {
        out->box.p[a] = hull(out->box.p[a], g.box.p[a]);
        out->box.q[a] = hull(out->box.q[a], g.box.q[a]);
      }
      out->support = hull(out->support, g.support);
    }
    if (e.members.size() > 1) {
      // The virtual group box is the hull of its members; its center is the hull's center.
      for (int a = 0; a < 3; ++a)
        out->center[a] = Interval((out->box.p[a].lo() + out->box.q[a].lo()) / 2,
                                  (out->box.p[a].hi() + out->box.q[a].hi()) / 2);
    }
    return *out;
  }

  const CompiledScene& scene_;
  const LayoutState& state_;
  std::vector<std::optional<std::optional<PlacedBox>>> base_;
  std::vector<std::optional<std::vector<CornerPair>>> parts_;
  std::vector<std::optional<EntityGeom>> entities_;
};

namespace detail {

/// Back face on x=0 facing +x, or back face on y=0 facing +y.
inline Tribool eval_wall(const CornerPair& b, OrientationSet o, double eps) {
  const Interval zero(0.0);
  const Tribool on_x = o.contains(0) ? eq_tol(b.p.x, zero, eps) && same_orientation(o, OrientationSet::only(0))
                                     : Tribool::False;
  const Tribool on_y = o.contains(1) ? eq_tol(b.p.y, zero, eps) && same_orientation(o, OrientationSet::only(1))
                                     : Tribool::False;
  return on_x || on_y;
}

inline Tribool eval_in_room(const CornerPair& b, const Room& room, double eps) {
  Tribool out = Tribool::True;
  for (int a = 0; a < 3; ++a)
    out = out && le(Interval(0.0), b.p[a] + eps) && le(b.q[a], Interval(room.extent(a) + eps));
  return out;
}

inline Tribool eval_node(const Constraint& c, const CompiledScene& s, SceneGeometry& g) {
  using K = Constraint::Kind;
  const double eps = s.th.contact_eps;
  switch (c.kind) {
    case K::All: {
      Tribool out = Tribool::True;
      for (const auto& ch : c.children) {
        out = out && eval_node(ch, s, g);
        if (out == Tribool::False) break;
      }
      return out;
    }
    case K::Any: {
      Tribool out = Tribool::False;
      for (const auto& ch : c.children) {
        out = out || eval_node(ch, s, g);
        if (out == Tribool::True) break;
      }
      return out;
    }
    case K::Relation: {
      if (c.relation == Relation::InARow) {
        std::vector<EntityGeom> row;
        for (int e : c.row) row.push_back(g.entity(std::size_t(e)));
        return eval_row(row, s.th);
      }
      const auto& t = g.entity(std::size_t(c.a));
      const auto& r = g.entity(std::size_t(c.b));
      if (c.relation == Relation::Near) return near(t, r, c.distance > 0 ? c.distance : s.th.d_near);
      return eval_atomic(c.relation, t, r, s.th);
    }
    case K::SameOrientation:
      return same_orientation(g.entity(std::size_t(c.a)).orient, g.entity(std::size_t(c.b)).orient);
    case K::Wall: {
      const std::size_t i = std::size_t(c.a);
      return eval_wall(g.base(i)->corners, g.orientation(i), eps);
    }
    case K::Ground:
      return eq_tol(g.base(std::size_t(c.a))->corners.p.z, Interval(0.0), eps);
    case K::InRoom:
      return eval_in_room(g.base(std::size_t(c.a))->corners, s.room, eps);
    case K::Exclusive: {
      Tribool out = Tribool::True;
      for (std::size_t i = 0; i < s.size() && out != Tribool::False; ++i)
        for (std::size_t j = i + 1; j < s.size() && out != Tribool::False; ++j)
          out = out && exclusive_pair(g.base(i)->corners, g.parts(i), g.base(j)->corners, g.parts(j), eps);
      return out;
    }
  }
  return Tribool::Maybe;
}

}  // namespace detail

/// Interval evaluation of the whole constraint: True only if every point of the
/// box satisfies it, False only if none does.
inline Tribool eval(const CompiledScene& scene, const LayoutState& state) {
  SceneGeometry g(scene, state);
  if (!g.valid()) return Tribool::False;
  return detail::eval_node(scene.root, scene, g);
}

inline Tribool eval(const Constraint& c, const CompiledScene& scene, const LayoutState& state) {
  SceneGeometry g(scene, state);
  if (!g.valid()) return Tribool::False;
  return detail::eval_node(c, scene, g);
}

/// Top-level constraints that are not definitely satisfied, with their value.
inline std::vector<std::pair<std::string, Tribool>> unsatisfied(const CompiledScene& scene,
                                                                 const LayoutState& state) {
  std::vector<std::pair<std::string, Tribool>> out;
  SceneGeometry g(scene, state);
  if (!g.valid()) return {{"orientation", Tribool::False}};
  for (const auto& c : scene.root.children) {
    const Tribool r = detail::eval_node(c, scene, g);
    if (r != Tribool::True) out.emplace_back(c.label, r);
  }
  return out;
}

}  // namespace scenegen
