#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crbgate/camera_projection.hpp"
#include "crbgate/crb_region.hpp"
#include "crbgate/errors.hpp"
#include "crbgate/montecarlo_sim.hpp"
#include "crbgate/position_estimator.hpp"

namespace crbgate {

/// Per-camera search area handed to a visual tracker for one frame.
struct SearchRegion {
  double frame_t = 0.0;
  std::string camera_id;
  Vec2 estimate_xy = Vec2::Zero();
  ConfidenceEllipse ellipse;
  std::vector<Vec2> polygon_px;
  PixelBox box;
  double level_alpha = 0.05;
};

/// Estimate the position, build the plug-in confidence ellipse at level
/// alpha and project it into every camera that sees the estimate. Cameras
/// whose projection fails are skipped.
std::vector<SearchRegion> gate_frame(const Scene& scene, const MeasurementFrame& frame, double alpha,
                                     const EstimatorConfig& config);

struct GateFailure {
  ErrorKind kind;
  std::string message;

  bool operator==(const GateFailure&) const = default;
};

/// One output record per input frame; exactly one of regions/error is
/// meaningful.
struct GateResult {
  double t = 0.0;
  std::vector<SearchRegion> regions;
  std::optional<GateFailure> error;
};

/// Maps gate_frame over the frames in order. Frame-level failures become
/// error records. Throws StreamOrderViolation if timestamps decrease.
std::vector<GateResult> gate_stream(const Scene& scene, std::span<const MeasurementFrame> frames,
                                    double alpha, const EstimatorConfig& config);

/// Incremental form of gate_stream for line-by-line processing.
class GateStream {
 public:
  GateStream(const Scene& scene, double alpha, EstimatorConfig config);

  GateResult push(const MeasurementFrame& frame);

 private:
  const Scene& scene_;
  double alpha_;
  EstimatorConfig config_;
  double i_v_;
  std::optional<double> last_t_;
};

}  // namespace crbgate
