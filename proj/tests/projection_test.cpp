#include <gtest/gtest.h>

#include "checks.hpp"

namespace {

using namespace scenegen;

CornerPair box(double x0, double y0, double z0, double x1, double y1, double z1) {
  return CornerPair{Vec3I{Interval(x0), Interval(y0), Interval(z0)}, Vec3I{Interval(x1), Interval(y1), Interval(z1)}};
}

TEST(Intrinsics, FocalFromHorizontalFov) {
  const Intrinsics k;
  EXPECT_NEAR(k.focal(), 320.0 / std::tan(kPi / 6), 1e-9);
}

TEST(ProjectBox, OneMeterFaceAtFiveMeters) {
  // Near face 5 m ahead, 1 m wide and tall, centered on the optical axis.
  const CameraPose cam;
  const auto b = project_box(box(5, -0.5, 1.2, 6, 0.5, 2.2), cam);
  ASSERT_TRUE(b);
  EXPECT_NEAR(b->width(), Intrinsics{}.focal() / 5, 1e-9);
  EXPECT_NEAR(b->width(), 110.85, 0.01);
  EXPECT_NEAR((b->x_min + b->x_max) / 2, 320, 1e-9);
  EXPECT_NEAR((b->y_min + b->y_max) / 2, 240, 1e-9);
}

TEST(ProjectBox, RightOfCameraMapsToLargerU) {
  CameraPose cam;
  const auto b = project_box(box(5, -2, 1.2, 6, -1, 2.2), cam);  // -y is to the right when looking along +x
  ASSERT_TRUE(b);
  EXPECT_GT(b->x_min, 320);
}

TEST(ProjectBox, BehindCameraIsInvisible) {
  EXPECT_FALSE(project_box(box(-6, -0.5, 1, -5, 0.5, 2), CameraPose{}));
}

TEST(ProjectBox, StraddlingNearPlaneIsClippedNotMirrored) {
  // Starts 2 m behind the camera, ends 6 m ahead, to the right of the axis. The
  // part behind the camera must not wrap around to the left of the image.
  CameraPose cam;
  cam.intrinsics.hfov_deg = 170;
  const auto b = project_box(box(-2, -1.5, 1.2, 6, -1, 2.2), cam, 0.0);
  ASSERT_TRUE(b);
  EXPECT_GT(b->x_min, 320);
  EXPECT_LE(b->x_max, 640);
}

TEST(ProjectBox, EnclosingTheCameraFailsTheVisibilityRule) {
  EXPECT_FALSE(project_box(box(-1, -0.5, 1.2, 1, 0.5, 2.2), CameraPose{}));
}

TEST(ProjectBox, MostlyOutsideTheImageIsDropped) {
  // Far to the side: only a sliver enters the frame.
  const auto sliver = project_box(box(5, 2.86, 1.2, 5.1, 5, 2.2), CameraPose{});
  EXPECT_FALSE(sliver);
}

TEST(Cameras, SampledPosesObeyTheRules) {
  const auto v = checks::vocabulary();
  const Query q = parse_query(checks::kBedroomText, true, v);
  const CompiledScene scene = compile(q, v.objects);
  const SolveResult r = solve(scene, SolverConfig{});
  ASSERT_FALSE(r.solutions.empty());
  const LayoutState layout = sample_layout(r.solutions[0], 0);
  const auto cams = sample_cameras(scene, layout, 8, 42);
  ASSERT_TRUE(cams.complete);
  for (const auto& c : cams.cameras) {
    EXPECT_TRUE(camera_valid(c, scene, layout));
    EXPECT_GT(c.x, 0);
    EXPECT_GT(c.y, 0);
    EXPECT_GE(std::hypot(c.x, c.y), 5 - 1e-9);
    EXPECT_LE(std::hypot(c.x, c.y), 10 + 1e-9);
    EXPECT_DOUBLE_EQ(c.z, 1.7);
  }
}

TEST(References, DeterministicAndLabelled) {
  const auto v = checks::vocabulary();
  const Query q = parse_query("lamp-0 on table-0\nchair-0 front table-0\n", false, v);
  const CompiledScene scene = compile(q, v.objects);
  SolverConfig cfg;
  cfg.K = 3;
  const SolveResult r = solve(scene, cfg);
  const auto a = generate_references(scene, r.solutions, 2, 2, 5);
  const auto b = generate_references(scene, r.solutions, 2, 2, 5);
  EXPECT_EQ(a.layouts.size(), 2u);
  EXPECT_EQ(a.references.size() + a.degenerate, 4u);
  ASSERT_EQ(a.references.size(), b.references.size());
  for (std::size_t i = 0; i < a.references.size(); ++i) {
    ASSERT_EQ(a.references[i].boxes.size(), b.references[i].boxes.size());
    for (std::size_t k = 0; k < a.references[i].boxes.size(); ++k) {
      const auto &x = a.references[i].boxes[k], &y = b.references[i].boxes[k];
      EXPECT_EQ(x.x_min, y.x_min);
      EXPECT_EQ(x.y_max, y.y_max);
      EXPECT_FALSE(x.label.empty());
    }
  }
}

}  // namespace
