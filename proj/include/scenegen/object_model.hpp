#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenegen/interval.hpp"

namespace scenegen {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2;

class LibraryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Orientation

/// Set of axis-aligned orientations {0, pi/2, pi, 3pi/2}, bit k <=> k quarter turns.
class OrientationSet {
 public:
  constexpr OrientationSet() = default;
  constexpr explicit OrientationSet(std::uint8_t mask) : mask_(mask & 0xF) {}

  static constexpr OrientationSet all() { return OrientationSet(0xF); }
  static constexpr OrientationSet only(int quarter) { return OrientationSet(std::uint8_t(1u << (quarter & 3))); }

  /// Quarter turns whose angle lies in `d` (with a small slack for rounding).
  static OrientationSet within(const Interval& d) {
    constexpr double slack = 1e-9;
    std::uint8_t m = 0;
    for (int k = 0; k < 4; ++k) {
      const double a = k * kHalfPi;
      if (a >= d.lo() - slack && a <= d.hi() + slack) m |= std::uint8_t(1u << k);
    }
    return OrientationSet(m);
  }

  constexpr std::uint8_t mask() const { return mask_; }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr bool contains(int quarter) const { return (mask_ >> (quarter & 3)) & 1u; }
  constexpr int size() const { return std::popcount(mask_); }
  constexpr bool is_single() const { return size() == 1; }
  constexpr int first() const { return std::countr_zero(mask_); }
  constexpr int last() const { return 31 - std::countl_zero(std::uint32_t(mask_)); }

  /// Hull interval in radians of the contained quarter turns.
  Interval hull() const {
    if (empty()) throw std::logic_error("empty orientation set");
    return {first() * kHalfPi, last() * kHalfPi};
  }

  template <typename F>
  void for_each(F&& f) const {
    for (int k = 0; k < 4; ++k)
      if (contains(k)) f(k);
  }

  friend constexpr bool operator==(OrientationSet, OrientationSet) = default;
  friend constexpr OrientationSet operator&(OrientationSet a, OrientationSet b) {
    return OrientationSet(a.mask_ & b.mask_);
  }

 private:
  std::uint8_t mask_ = 0;
};

/// Exact 2D rotation by k quarter turns.
constexpr std::array<double, 2> rotate_quarter(int k, double x, double y) {
  switch (k & 3) {
    case 0: return {x, y};
    case 1: return {-y, x};
    case 2: return {-x, -y};
    default: return {y, -x};
  }
}

/// Unit direction u_theta for theta = k*pi/2 as (axis, sign).
struct AxisDirection {
  int axis;  // 0 = x, 1 = y
  int sign;  // +1 or -1
};

constexpr AxisDirection quarter_direction(int k) {
  switch (k & 3) {
    case 0: return {0, +1};
    case 1: return {1, +1};
    case 2: return {0, -1};
    default: return {1, -1};
  }
}

// ---------------------------------------------------------------------------
// Geometry types

struct Vec3I {
  Interval x, y, z;

  Interval& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  const Interval& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  friend bool operator==(const Vec3I&, const Vec3I&) = default;
};

/// Lowest (p) and highest (q) corner of an axis-aligned box; each coordinate is an interval.
struct CornerPair {
  Vec3I p, q;
  friend bool operator==(const CornerPair&, const CornerPair&) = default;
};

/// A box placed in the world together with its center. The center is tracked
/// separately from (p+q)/2 so interval dependency does not widen it.
struct PlacedBox {
  CornerPair corners;
  Vec3I center;
};

struct Pose {
  Interval x, y, z, d;
};

struct CuboidSpec {
  double lx = 0, ly = 0, lz = 0;
  double zs = 0;  ///< supporting-surface height above the lowest point

  void validate() const {
    if (!(lx > 0 && ly > 0 && lz > 0)) throw LibraryError("cuboid extents must be positive");
    if (!(zs >= 0 && zs <= lz)) throw LibraryError("supporting surface must lie within the cuboid");
  }
};

/// Sub-cuboid in the object's local frame (x is the facing direction), in meters
/// from the object's lowest point.
struct SubCuboid {
  std::string name;
  double dx = 0, dy = 0, dz = 0;
  double lx = 0, ly = 0, lz = 0;
};

/// Sub-cuboid described as fractions of the base extents.
struct PartRule {
  std::string name;
  std::array<double, 3> offset{0, 0, 0};
  std::array<double, 3> extent{1, 1, 1};

  SubCuboid resolve(const CuboidSpec& base) const {
    const std::array<double, 3> l{base.lx, base.ly, base.lz};
    SubCuboid s{name, offset[0] * l[0], offset[1] * l[1], offset[2] * l[2],
                extent[0] * l[0], extent[1] * l[1], extent[2] * l[2]};
    return s;
  }
};

struct ObjectFlags {
  bool on_wall = false;
  bool against_wall = false;
  bool on_ground = false;
};

struct SizeOverride {
  std::optional<double> lx, ly, lz;
};

/// Places a local sub-box of an object with the given pose. Returns nullopt when
/// the orientation interval contains none of the four axis-aligned values.
inline std::optional<PlacedBox> place_box(const Pose& pose, const CuboidSpec& base, const SubCuboid& local) {
  const OrientationSet orient = OrientationSet::within(pose.d);
  if (orient.empty()) return std::nullopt;

  const double ox = local.dx + local.lx / 2 - base.lx / 2;
  const double oy = local.dy + local.ly / 2 - base.ly / 2;
  const double oz = local.dz + local.lz / 2 - base.lz / 2;

  std::optional<PlacedBox> out;
  orient.for_each([&](int k) {
    const auto [rx, ry] = rotate_quarter(k, ox, oy);
    const double hx = (k % 2 == 0) ? local.lx / 2 : local.ly / 2;
    const double hy = (k % 2 == 0) ? local.ly / 2 : local.lx / 2;
    const double hz = local.lz / 2;
    const Vec3I c{pose.x + (base.lx / 2 + rx), pose.y + (base.ly / 2 + ry), pose.z + (base.lz / 2 + oz)};
    PlacedBox b{CornerPair{Vec3I{c.x - hx, c.y - hy, c.z - hz}, Vec3I{c.x + hx, c.y + hy, c.z + hz}}, c};
    if (!out) {
      out = b;
      return;
    }
    for (int a = 0; a < 3; ++a) {
      out->corners.p[a] = hull(out->corners.p[a], b.corners.p[a]);
      out->corners.q[a] = hull(out->corners.q[a], b.corners.q[a]);
      out->center[a] = hull(out->center[a], b.center[a]);
    }
  });
  return out;
}

/// Corner pair of the whole cuboid: p = R_d(-l/2) + c, q = R_d(l/2) + c with
/// c = (x + lx/2, y + ly/2, z + lz/2), reported as componentwise min/max.
inline std::optional<CornerPair> corners(const Pose& pose, const CuboidSpec& spec) {
  auto b = place_box(pose, spec, SubCuboid{"", 0, 0, 0, spec.lx, spec.ly, spec.lz});
  if (!b) return std::nullopt;
  return b->corners;
}

// ---------------------------------------------------------------------------
// ObjectModel

class ObjectModel {
 public:
  ObjectModel() = default;
  ObjectModel(std::string category, CuboidSpec base, std::vector<PartRule> parts = {},
              std::vector<PartRule> regions = {}, ObjectFlags flags = {},
              std::map<std::string, SizeOverride> variants = {})
      : category_(std::move(category)),
        base_(base),
        part_rules_(std::move(parts)),
        region_rules_(std::move(regions)),
        flags_(flags),
        variants_(std::move(variants)) {
    base_.validate();
    resolve();
  }

  const std::string& category() const { return category_; }
  const CuboidSpec& base() const { return base_; }
  const ObjectFlags& flags() const { return flags_; }
  const std::vector<SubCuboid>& parts() const { return parts_; }
  const std::vector<SubCuboid>& regions() const { return regions_; }
  const std::map<std::string, SizeOverride>& variants() const { return variants_; }

  /// Geometry used for collision tests: the parts, or the base cuboid when there are none.
  std::vector<SubCuboid> solid_parts() const {
    if (!parts_.empty()) return parts_;
    return {SubCuboid{"", 0, 0, 0, base_.lx, base_.ly, base_.lz}};
  }

  /// Named region or named part.
  const SubCuboid* find_sub_object(const std::string& name) const {
    for (const auto& r : regions_)
      if (r.name == name) return &r;
    for (const auto& p : parts_)
      if (!p.name.empty() && p.name == name) return &p;
    return nullptr;
  }

  bool has_sub_object(const std::string& name) const { return find_sub_object(name) != nullptr; }

  std::vector<std::string> sub_object_names() const {
    std::vector<std::string> out;
    for (const auto& r : regions_) out.push_back(r.name);
    for (const auto& p : parts_)
      if (!p.name.empty()) out.push_back(p.name);
    return out;
  }

  /// Applies size variants named in `attributes`; unknown attributes are ignored
  /// (they may be placement attributes handled elsewhere).
  ObjectModel with_attributes(const std::vector<std::string>& attributes) const {
    ObjectModel m = *this;
    const double support_frac = base_.zs / base_.lz;
    for (const auto& a : attributes) {
      auto it = variants_.find(a);
      if (it == variants_.end()) continue;
      if (it->second.lx) m.base_.lx = *it->second.lx;
      if (it->second.ly) m.base_.ly = *it->second.ly;
      if (it->second.lz) m.base_.lz = *it->second.lz;
    }
    m.base_.zs = support_frac * m.base_.lz;
    m.base_.validate();
    m.resolve();
    return m;
  }

 private:
  void resolve() {
    parts_.clear();
    regions_.clear();
    for (const auto& r : part_rules_) parts_.push_back(r.resolve(base_));
    for (const auto& r : region_rules_) regions_.push_back(r.resolve(base_));
    for (const auto& s : parts_) check_inside(s);
    for (const auto& s : regions_) check_inside(s);
  }

  void check_inside(const SubCuboid& s) const {
    constexpr double eps = 1e-9;
    if (!(s.lx > 0 && s.ly > 0 && s.lz > 0))
      throw LibraryError(category_ + ": sub-cuboid '" + s.name + "' has non-positive extent");
    if (s.dx < -eps || s.dy < -eps || s.dz < -eps || s.dx + s.lx > base_.lx + eps ||
        s.dy + s.ly > base_.ly + eps || s.dz + s.lz > base_.lz + eps)
      throw LibraryError(category_ + ": sub-cuboid '" + s.name + "' exceeds the object cuboid");
  }

  std::string category_;
  CuboidSpec base_;
  std::vector<PartRule> part_rules_;
  std::vector<PartRule> region_rules_;
  ObjectFlags flags_;
  std::map<std::string, SizeOverride> variants_;
  std::vector<SubCuboid> parts_;
  std::vector<SubCuboid> regions_;
};

inline std::optional<CornerPair> sub_corners(const Pose& pose, const ObjectModel& model, std::size_t k) {
  const auto& parts = model.parts();
  if (parts.empty()) {
    if (k != 0) throw std::out_of_range("sub-cuboid index out of range");
    return corners(pose, model.base());
  }
  if (k >= parts.size()) throw std::out_of_range("sub-cuboid index out of range");
  auto b = place_box(pose, model.base(), parts[k]);
  if (!b) return std::nullopt;
  return b->corners;
}

inline Interval support_height(const Pose& pose, const ObjectModel& model) {
  return pose.z + model.base().zs;
}

// ---------------------------------------------------------------------------
// ObjectLibrary

class ObjectLibrary {
 public:
  void add(ObjectModel model, std::vector<std::string> phrases = {}) {
    const std::string cat = model.category();
    if (phrases.empty()) phrases.push_back(default_phrase(cat));
    phrases_[cat] = std::move(phrases);
    models_[cat] = std::move(model);
  }

  bool contains(const std::string& category) const { return models_.count(category) != 0; }

  const ObjectModel& at(const std::string& category) const {
    auto it = models_.find(category);
    if (it == models_.end()) throw LibraryError("unknown object category '" + category + "'");
    return it->second;
  }

  ObjectModel model(const std::string& category, const std::vector<std::string>& attributes = {}) const {
    return at(category).with_attributes(attributes);
  }

  const std::vector<std::string>& phrases(const std::string& category) const { return phrases_.at(category); }
  const std::map<std::string, ObjectModel>& models() const { return models_; }
  std::size_t size() const { return models_.size(); }

  static ObjectLibrary from_json(const nlohmann::json& j) {
    ObjectLibrary lib;
    const auto& cats = j.at("categories");
    for (auto it = cats.begin(); it != cats.end(); ++it) {
      const std::string name = it.key();
      const auto& c = it.value();
      try {
        const auto size = c.at("size").get<std::array<double, 3>>();
        const double support_frac = c.value("support", 1.0);
        CuboidSpec base{size[0], size[1], size[2], support_frac * size[2]};

        ObjectFlags flags;
        for (const auto& f : c.value("flags", std::vector<std::string>{})) {
          if (f == "on_wall") flags.on_wall = true;
          else if (f == "against_wall") flags.against_wall = true;
          else if (f == "on_ground") flags.on_ground = true;
          else throw LibraryError("unknown flag '" + f + "'");
        }

        auto rules = [](const nlohmann::json& arr) {
          std::vector<PartRule> out;
          for (const auto& r : arr) {
            out.push_back(PartRule{r.value("name", std::string{}), r.at("offset").get<std::array<double, 3>>(),
                                   r.at("extent").get<std::array<double, 3>>()});
          }
          return out;
        };
        std::vector<PartRule> parts = c.contains("parts") ? rules(c["parts"]) : std::vector<PartRule>{};
        std::vector<PartRule> regions = c.contains("regions") ? rules(c["regions"]) : std::vector<PartRule>{};

        std::map<std::string, SizeOverride> variants;
        if (c.contains("variants")) {
          for (auto v = c["variants"].begin(); v != c["variants"].end(); ++v) {
            SizeOverride o;
            const auto& s = v.value();
            if (s.contains("lx")) o.lx = s["lx"].get<double>();
            if (s.contains("ly")) o.ly = s["ly"].get<double>();
            if (s.contains("lz")) o.lz = s["lz"].get<double>();
            variants[v.key()] = o;
          }
        }
        auto phrases = c.value("phrases", std::vector<std::string>{});
        lib.add(ObjectModel(name, base, std::move(parts), std::move(regions), flags, std::move(variants)),
                std::move(phrases));
      } catch (const nlohmann::json::exception& e) {
        throw LibraryError("object library entry '" + name + "': " + e.what());
      }
    }
    return lib;
  }

  static ObjectLibrary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LibraryError("cannot open object library '" + path + "'");
    try {
      return from_json(nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true));
    } catch (const nlohmann::json::parse_error& e) {
      throw LibraryError("object library '" + path + "': " + e.what());
    }
  }

 private:
  static std::string default_phrase(std::string cat) {
    for (auto& ch : cat)
      if (ch == '-') ch = ' ';
    return cat;
  }

  std::map<std::string, ObjectModel> models_;
  std::map<std::string, std::vector<std::string>> phrases_;
};

}  // namespace scenegen
