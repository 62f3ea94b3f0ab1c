#include <gtest/gtest.h>

#include <algorithm>

#include "crbgate/errors.hpp"
#include "crbgate/search_gate.hpp"

using namespace crbgate;

namespace {

MeasurementFrame frame_at(const Scene& s, const Vec2& xy, double t, std::uint64_t seed) {
  return sample_measurements(s.anchors, {xy}, s.noise, t, seed);
}

}  // namespace

TEST(GateFrame, RegionsForVisibleCameras) {
  const Scene s = default_scene();
  const auto regions = gate_frame(s, frame_at(s, Vec2(10, 10), 0.5, 1), 0.05, s.estimator_config());
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_EQ(regions[0].camera_id, "overhead");
  EXPECT_EQ(regions[1].camera_id, "corner");
  for (const auto& r : regions) {
    EXPECT_EQ(r.frame_t, 0.5);
    EXPECT_EQ(r.level_alpha, 0.05);
    EXPECT_NEAR(r.ellipse.threshold, chi2_quantile(0.05), 1e-12);
    EXPECT_EQ(r.ellipse.center, r.estimate_xy);
    EXPECT_GE(r.polygon_px.size(), 3u);
    for (const auto& p : r.polygon_px) {
      // Unclipped regions: the box bounds the polygon.
      if (!r.box.clipped) EXPECT_TRUE(r.box.contains(p));
    }
  }
}

TEST(GateFrame, EstimateProjectsInsideBox) {
  const Scene s = default_scene();
  const auto regions = gate_frame(s, frame_at(s, Vec2(8, 12), 0, 4), 0.05, s.estimator_config());
  for (const auto& r : regions) {
    const auto& cam = *std::find_if(s.cameras.begin(), s.cameras.end(),
                                    [&](const CameraModel& c) { return c.id() == r.camera_id; });
    EXPECT_TRUE(r.box.contains(project(cam, Vec3(r.estimate_xy.x(), r.estimate_xy.y(), 0)).pixel));
  }
}

TEST(GateFrame, SmallerAlphaGivesLargerRegion) {
  const Scene s = default_scene();
  const auto f = frame_at(s, Vec2(10, 10), 0, 2);
  const auto wide = gate_frame(s, f, 0.01, s.estimator_config());
  const auto narrow = gate_frame(s, f, 0.2, s.estimator_config());
  ASSERT_EQ(wide.size(), narrow.size());
  for (std::size_t k = 0; k < wide.size(); ++k) EXPECT_TRUE(wide[k].box.contains(narrow[k].box));
}

TEST(GateFrame, CameraThatCannotSeeIsSkipped) {
  Scene s = default_scene();
  s.cameras.push_back(CameraModel::look_at("away", Vec3(10, 10, 3), Vec3(10, 40, 3), Vec3(0, 0, 1), 500, 640, 480));
  const auto regions = gate_frame(s, frame_at(s, Vec2(10, 5), 0, 3), 0.05, s.estimator_config());
  for (const auto& r : regions) EXPECT_NE(r.camera_id, "away");
}

TEST(GateFrame, MissingAnchorsStillWork) {
  const Scene s = default_scene();
  auto f = frame_at(s, Vec2(6, 6), 0, 9);
  f.readings.resize(10);
  EXPECT_FALSE(gate_frame(s, f, 0.05, s.estimator_config()).empty());
}

TEST(GateFrame, Errors) {
  const Scene s = default_scene();
  MeasurementFrame few{0, {{"b00", -60}, {"b01", -61}}};
  try {
    gate_frame(s, few, 0.05, s.estimator_config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientAnchors);
  }
  EXPECT_THROW(gate_frame(s, frame_at(s, Vec2(5, 5), 0, 0), 0.0, s.estimator_config()), Error);
}

TEST(GateStream, OneRecordPerFrameWithErrorsInline) {
  const Scene s = default_scene();
  std::vector<MeasurementFrame> frames{frame_at(s, Vec2(5, 5), 0.0, 1),
                                       MeasurementFrame{0.1, {{"b00", -60}}},
                                       frame_at(s, Vec2(6, 5), 0.2, 2)};
  const auto out = gate_stream(s, frames, 0.05, s.estimator_config());
  ASSERT_EQ(out.size(), 3u);
  EXPECT_FALSE(out[0].error);
  ASSERT_TRUE(out[1].error);
  EXPECT_EQ(out[1].error->kind, ErrorKind::InsufficientAnchors);
  EXPECT_TRUE(out[1].regions.empty());
  EXPECT_EQ(out[1].t, 0.1);
  EXPECT_FALSE(out[2].error);
}

TEST(GateStream, UnknownAnchorIsFrameError) {
  const Scene s = default_scene();
  auto f = frame_at(s, Vec2(5, 5), 0.0, 1);
  f.readings.push_back({"nope", -50});
  const std::vector<MeasurementFrame> frames{f};
  const auto out = gate_stream(s, frames, 0.05, s.estimator_config());
  ASSERT_TRUE(out[0].error);
  EXPECT_EQ(out[0].error->kind, ErrorKind::UnknownAnchor);
}

TEST(GateStream, DecreasingTimestampsRejected) {
  const Scene s = default_scene();
  const std::vector<MeasurementFrame> frames{frame_at(s, Vec2(5, 5), 1.0, 1), frame_at(s, Vec2(5, 5), 0.5, 2)};
  try {
    gate_stream(s, frames, 0.05, s.estimator_config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StreamOrderViolation);
  }
  GateStream stream(s, 0.05, s.estimator_config());
  stream.push(frames[0]);
  EXPECT_THROW(stream.push(frames[1]), Error);
  // Equal timestamps are allowed.
  EXPECT_NO_THROW(stream.push(frames[0]));
}

TEST(GateStream, StatelessAcrossFrames) {
  const Scene s = default_scene();
  const auto a = frame_at(s, Vec2(4, 7), 0.0, 10);
  const auto b = frame_at(s, Vec2(12, 9), 0.0, 11);
  auto a1 = a, b1 = b;
  b1.timestamp = 1.0;
  auto b2 = b, a2 = a;
  a2.timestamp = 1.0;
  const std::vector<MeasurementFrame> first{a1, b1};
  const std::vector<MeasurementFrame> second{b2, a2};
  const auto x = gate_stream(s, first, 0.05, s.estimator_config());
  const auto y = gate_stream(s, second, 0.05, s.estimator_config());
  ASSERT_EQ(x[0].regions.size(), y[1].regions.size());
  for (std::size_t k = 0; k < x[0].regions.size(); ++k) {
    EXPECT_EQ(x[0].regions[k].box, y[1].regions[k].box);
    EXPECT_EQ(x[0].regions[k].polygon_px, y[1].regions[k].polygon_px);
  }
}
