#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "crbgate/geometry.hpp"
#include "crbgate/wireless_model.hpp"

namespace crbgate {

struct EstimatorConfig {
  int max_iterations = 100;
  double step_tolerance = 1e-9;       // meters
  double residual_tolerance = 1e-12;  // relative decrease of the squared residual
  int multistart_count = 5;
  double damping_init = 1e-3;
  /// Box covered by the coarse initialization grid. Defaults to the anchors'
  /// xy bounding box.
  std::optional<Rect> grid_extent;
  /// Transmitter height used for every candidate position.
  double z_fixed = 0.0;
};

/// Throws InvalidArgument when counts or tolerances are out of range.
void validate(const EstimatorConfig& config);

struct PositionEstimate {
  Vec2 xy = Vec2::Zero();
  double residual_norm = 0.0;  // dBm
  int iterations = 0;
  bool converged = false;
  std::size_t start_index = 0;
};

/// Readings paired with the anchors they came from, in frame order.
struct ResolvedFrame {
  std::vector<Anchor> anchors;
  Eigen::VectorXd rss;
};

/// Throws UnknownAnchor for ids absent from `anchors`.
ResolvedFrame resolve_frame(std::span<const Anchor> anchors, const MeasurementFrame& frame);

/// observed - predicted, one entry per reading in frame order.
Eigen::VectorXd residuals(std::span<const Anchor> anchors, const MeasurementFrame& frame,
                          const TargetState& target);

/// Deterministic multi-start points:
///   0. xy of the anchor with the strongest reading;
///   1. centroid weighted by the inverse of each path-loss-inverted distance;
///   2+. best centres of an 8x8 grid over the grid extent, by objective.
std::vector<Vec2> initial_guesses(std::span<const Anchor> anchors, const MeasurementFrame& frame,
                                  const EstimatorConfig& config);

/// Least-squares (Gaussian ML) position via damped Gauss-Newton from every
/// initial guess; the lowest final residual wins, ties to the lower index.
/// Throws InsufficientAnchors below three readings.
PositionEstimate solve(std::span<const Anchor> anchors, const MeasurementFrame& frame,
                       const EstimatorConfig& config = {});

}  // namespace crbgate
