#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "crbgate/camera_projection.hpp"

namespace crbgate {

/// Image box as top-left corner plus extent, pixels.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  static Box from_pixel_box(const PixelBox& b) { return {b.x_min, b.y_min, b.width(), b.height()}; }
  bool operator==(const Box&) const = default;
};

struct GtBox {
  std::size_t frame_index = 0;
  Box box;
  bool present = true;
};

double iou(const Box& a, const Box& b);

/// Percentage of present frames whose region contains the ground-truth box
/// centre. Frames without a region count as misses.
double recall_rate(std::span<const std::optional<Box>> regions, std::span<const GtBox> gt);

struct CurvePoint {
  double threshold = 0.0;
  double osr = 0.0;
};

/// 101 thresholds uniform on [0, 1].
std::vector<double> default_thresholds();

/// Fraction of present frames whose IoU exceeds each threshold.
std::vector<CurvePoint> success_curve(std::span<const std::optional<Box>> predictions,
                                      std::span<const GtBox> gt, std::span<const double> thresholds);

/// Trapezoidal area under the curve divided by its threshold span.
double auc(std::span<const CurvePoint> curve);

}  // namespace crbgate
