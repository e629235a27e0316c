#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scenegen/relations.hpp"

namespace scenegen {

struct Intrinsics {
  double hfov_deg = 60;
  int width = 640;
  int height = 480;

  double focal() const { return width / 2.0 / std::tan(hfov_deg * kPi / 360.0); }
  double cx() const { return width / 2.0; }
  double cy() const { return height / 2.0; }
};

/// Level camera (no pitch or roll) at height z looking along yaw.
struct CameraPose {
  double x = 0, y = 0, z = 1.7;
  double yaw = 0;
  Intrinsics intrinsics;

  std::array<double, 3> forward() const { return {std::cos(yaw), std::sin(yaw), 0}; }
  std::array<double, 3> right() const { return {std::sin(yaw), -std::cos(yaw), 0}; }
};

struct Box2D {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  std::string category;
  double confidence = 1;
  std::string label;  ///< object ref for projected boxes; empty for detections

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  bool valid() const { return x_min < x_max && y_min < y_max; }
};

struct ReferenceLayout {
  std::vector<Box2D> boxes;
  std::size_t layout_index = 0;
  std::size_t camera_index = 0;
  CameraPose camera;
  int width = 640;
  int height = 480;
};

struct CameraRules {
  double min_distance = 5;
  double max_distance = 10;
  double wall_cone_deg = 60;
  std::size_t attempts_per_camera = 1000;
};

namespace detail {

inline std::array<double, 2> layout_centroid(const CompiledScene& scene, const LayoutState& layout) {
  SceneGeometry g(scene, layout);
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    sx += g.base(i)->center.x.midpoint();
    sy += g.base(i)->center.y.midpoint();
  }
  const double n = double(std::max<std::size_t>(scene.size(), 1));
  return {sx / n, sy / n};
}

inline bool wall_mounted(const SceneObject& o) {
  if (o.model.flags().on_wall) return true;
  return std::find(o.attributes.begin(), o.attributes.end(), "on-wall") != o.attributes.end();
}

/// Angle between the view direction and -u_d of the object, in degrees.
inline double facing_offset_deg(double yaw, int quarter) {
  const auto [ux, uy] = rotate_quarter(quarter, 1, 0);
  const double c = std::clamp(-(std::cos(yaw) * ux + std::sin(yaw) * uy), -1.0, 1.0);
  return std::acos(c) * 180.0 / kPi;
}

}  // namespace detail

/// True when the camera obeys the sampling heuristics for this layout.
inline bool camera_valid(const CameraPose& cam, const CompiledScene& scene, const LayoutState& layout,
                         const CameraRules& rules = {}) {
  const double r = std::hypot(cam.x, cam.y);
  if (!(cam.x > 0 && cam.y > 0)) return false;
  if (r < rules.min_distance - 1e-9 || r > rules.max_distance + 1e-9) return false;
  const auto c = detail::layout_centroid(scene, layout);
  const double aim = std::atan2(c[1] - cam.y, c[0] - cam.x);
  if (std::abs(std::remainder(aim - cam.yaw, 2 * kPi)) > 1e-9) return false;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (!detail::wall_mounted(scene.objects[i])) continue;
    if (detail::facing_offset_deg(cam.yaw, layout.orientation(i).first()) > rules.wall_cone_deg + 1e-9) return false;
  }
  return true;
}

struct CameraSample {
  std::vector<CameraPose> cameras;
  bool complete = false;  ///< false when rejection sampling ran out before `count` poses
};

/// Positive-quadrant positions 5-10 m from the origin, aimed at the centroid of
/// the object centers; wall-mounted objects must be seen within 60 degrees of head-on.
inline CameraSample sample_cameras(const CompiledScene& scene, const LayoutState& layout, std::size_t count,
                                   std::uint64_t seed, const Intrinsics& intr = {}, const CameraRules& rules = {}) {
  CameraSample out;
  if (scene.size() == 0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> radius(rules.min_distance, rules.max_distance);
  std::uniform_real_distribution<double> angle(0.0, kHalfPi);
  const auto c = detail::layout_centroid(scene, layout);
  std::size_t attempts = rules.attempts_per_camera * count;
  while (out.cameras.size() < count && attempts-- > 0) {
    const double r = radius(rng);
    const double a = angle(rng);
    CameraPose cam;
    cam.x = r * std::cos(a);
    cam.y = r * std::sin(a);
    cam.yaw = std::atan2(c[1] - cam.y, c[0] - cam.x);
    cam.intrinsics = intr;
    if (camera_valid(cam, scene, layout, rules)) out.cameras.push_back(cam);
  }
  out.complete = out.cameras.size() == count;
  return out;
}

/// Pinhole projection of one world-space box; nullopt when it lies behind the near plane
/// or keeps less than `min_visible` of its unclipped area inside the image.
inline std::optional<Box2D> project_box(const CornerPair& box, const CameraPose& cam, double min_visible = 0.05,
                                        double near_plane = 0.05) {
  const auto f = cam.forward();
  const auto r = cam.right();
  std::array<std::array<double, 3>, 8> pts;
  for (int k = 0; k < 8; ++k) {
    const double wx = (k & 1) ? box.q.x.lo() : box.p.x.lo();
    const double wy = (k & 2) ? box.q.y.lo() : box.p.y.lo();
    const double wz = (k & 4) ? box.q.z.lo() : box.p.z.lo();
    const double vx = wx - cam.x, vy = wy - cam.y, vz = wz - cam.z;
    pts[std::size_t(k)] = {vx * r[0] + vy * r[1], vz, vx * f[0] + vy * f[1]};  // (right, up, depth)
  }
  std::vector<std::array<double, 3>> front;
  for (const auto& p : pts)
    if (p[2] >= near_plane) front.push_back(p);
  // Edges crossing the near plane contribute their crossing point.
  for (int a = 0; a < 8; ++a)
    for (int bit = 1; bit < 8; bit <<= 1) {
      const int b = a | bit;
      if (b == a) continue;
      const auto& pa = pts[std::size_t(a)];
      const auto& pb = pts[std::size_t(b)];
      if ((pa[2] < near_plane) == (pb[2] < near_plane)) continue;
      const double t = (near_plane - pa[2]) / (pb[2] - pa[2]);
      front.push_back({pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]), near_plane});
    }
  if (front.empty()) return std::nullopt;

  const auto& K = cam.intrinsics;
  const double fpx = K.focal();
  Box2D b{1e300, 1e300, -1e300, -1e300, "", 1.0, ""};
  for (const auto& p : front) {
    const double u = K.cx() + fpx * p[0] / p[2];
    const double v = K.cy() - fpx * p[1] / p[2];
    b.x_min = std::min(b.x_min, u);
    b.x_max = std::max(b.x_max, u);
    b.y_min = std::min(b.y_min, v);
    b.y_max = std::max(b.y_max, v);
  }
  const double full = b.area();
  Box2D c = b;
  c.x_min = std::clamp(c.x_min, 0.0, double(K.width));
  c.x_max = std::clamp(c.x_max, 0.0, double(K.width));
  c.y_min = std::clamp(c.y_min, 0.0, double(K.height));
  c.y_max = std::clamp(c.y_max, 0.0, double(K.height));
  if (!c.valid() || !(full > 0) || c.area() < min_visible * full) return std::nullopt;
  return c;
}

/// 2D reference configuration of a concrete layout: one box per visible object
/// (base cuboid), in object order. nullopt when no object is visible.
inline std::optional<ReferenceLayout> project(const CompiledScene& scene, const LayoutState& layout,
                                              const CameraPose& cam) {
  SceneGeometry g(scene, layout);
  ReferenceLayout out;
  out.camera = cam;
  out.width = cam.intrinsics.width;
  out.height = cam.intrinsics.height;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const auto& placed = g.base(i);
    if (!placed) continue;
    auto b = project_box(placed->corners, cam);
    if (!b) continue;
    b->category = scene.objects[i].ref.category;
    b->label = scene.objects[i].ref.str();
    out.boxes.push_back(std::move(*b));
  }
  if (out.boxes.empty()) return std::nullopt;
  return out;
}

struct ReferenceSet {
  std::vector<ReferenceLayout> references;
  std::vector<LayoutState> layouts;  ///< sampled concrete layouts, by layout index
  std::size_t degenerate = 0;        ///< camera views with nothing visible, skipped
};

/// min(m, #solutions) layouts (seeded choice without replacement when there are more),
/// v cameras each; degenerate views are skipped.
inline ReferenceSet generate_references(const CompiledScene& scene, const std::vector<LayoutState>& solutions,
                                        std::size_t m, std::size_t v, std::uint64_t seed,
                                        const Intrinsics& intr = {}) {
  ReferenceSet out;
  std::vector<std::size_t> order(solutions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  if (order.size() > m) {
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(m);
    std::sort(order.begin(), order.end());
  }
  for (std::size_t li = 0; li < order.size(); ++li) {
    const LayoutState layout = sample_layout(solutions[order[li]], seed + li);
    out.layouts.push_back(layout);
    const auto cams = sample_cameras(scene, layout, v, seed * 7919 + li, intr);
    for (std::size_t ci = 0; ci < cams.cameras.size(); ++ci) {
      auto ref = project(scene, layout, cams.cameras[ci]);
      if (!ref) {
        ++out.degenerate;
        continue;
      }
      ref->layout_index = li;
      ref->camera_index = ci;
      out.references.push_back(std::move(*ref));
    }
    out.degenerate += v - cams.cameras.size();
  }
  return out;
}

}  // namespace scenegen
