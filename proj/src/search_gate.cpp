#include "crbgate/search_gate.hpp"

#include <array>
#include <cmath>

namespace crbgate {

namespace {

std::vector<SearchRegion> gate_with(const Scene& scene, const MeasurementFrame& frame, double alpha,
                                    const EstimatorConfig& config, double i_v) {
  chi2_quantile(alpha);
  const PositionEstimate est = solve(scene.anchors, frame, config);
  const TargetState at_estimate{est.xy, config.z_fixed};
  const ResolvedFrame rf = resolve_frame(scene.anchors, frame);
  // Information from the anchors that actually reported, at the estimate.
  const Fim2 info = fim(jacobian(rf.anchors, at_estimate), i_v);
  const ConfidenceEllipse ellipse = confidence_ellipse(est.xy, info, alpha);

  const std::array<double, 2> z_levels{0.0, scene.person_height};
  const Vec3 ground(est.xy.x(), est.xy.y(), 0.0);
  std::vector<SearchRegion> out;
  for (const auto& cam : scene.cameras) {
    try {
      const Projection centre = project(cam, ground);
      const PixelBox image{0.0, 0.0, static_cast<double>(cam.width()),
                           static_cast<double>(cam.height()), false};
      if (!image.contains(centre.pixel)) continue;
      ProjectedRegion region = project_region(cam, ellipse, z_levels);
      out.push_back({frame.timestamp, cam.id(), est.xy, ellipse, std::move(region.polygon),
                     region.box, alpha});
    } catch (const Error&) {
      // This camera does not see the region.
    }
  }
  return out;
}

}  // namespace

std::vector<SearchRegion> gate_frame(const Scene& scene, const MeasurementFrame& frame, double alpha,
                                     const EstimatorConfig& config) {
  return gate_with(scene, frame, alpha, config, scene_noise_information(scene));
}

GateStream::GateStream(const Scene& scene, double alpha, EstimatorConfig config)
    : scene_(scene), alpha_(alpha), config_(std::move(config)), i_v_(scene_noise_information(scene)) {
  chi2_quantile(alpha);
}

GateResult GateStream::push(const MeasurementFrame& frame) {
  if (last_t_ && frame.timestamp < *last_t_) {
    throw Error(ErrorKind::StreamOrderViolation,
                "frame timestamp " + std::to_string(frame.timestamp) + " precedes " +
                    std::to_string(*last_t_));
  }
  last_t_ = frame.timestamp;
  GateResult result;
  result.t = frame.timestamp;
  try {
    result.regions = gate_with(scene_, frame, alpha_, config_, i_v_);
  } catch (const Error& e) {
    result.error = GateFailure{e.kind(), e.what()};
  }
  return result;
}

std::vector<GateResult> gate_stream(const Scene& scene, std::span<const MeasurementFrame> frames,
                                    double alpha, const EstimatorConfig& config) {
  for (std::size_t k = 1; k < frames.size(); ++k) {
    if (frames[k].timestamp < frames[k - 1].timestamp) {
      throw Error(ErrorKind::StreamOrderViolation,
                  "frame " + std::to_string(k) + " has a decreasing timestamp");
    }
  }
  GateStream stream(scene, alpha, config);
  std::vector<GateResult> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(stream.push(f));
  return out;
}

}  // namespace crbgate
