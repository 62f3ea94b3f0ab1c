#include "crbgate/wireless_model.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "crbgate/errors.hpp"

namespace crbgate {

namespace {

constexpr double kScoreStep = 1e-6;
const double kGradientScale = 10.0 / std::numbers::ln10;

double checked_distance(const Anchor& anchor, const Vec3& p) {
  const double d = (p - anchor.position).norm();
  if (!(d >= kMinDistance)) {
    throw DegenerateDistanceError(anchor.id, d);
  }
  return d;
}

}  // namespace

void validate(const Anchor& anchor) {
  if (!anchor.position.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "anchor '" + anchor.id + "' has a non-finite position");
  }
  if (!std::isfinite(anchor.path_loss_a) || !std::isfinite(anchor.path_loss_b)) {
    throw Error(ErrorKind::InvalidArgument, "anchor '" + anchor.id + "' has non-finite A or B");
  }
  if (anchor.path_loss_b == 0.0) {
    throw Error(ErrorKind::InvalidArgument,
                "anchor '" + anchor.id + "' has B = 0, which carries no position information");
  }
}

void validate(const MeasurementFrame& frame) {
  std::set<std::string_view> seen;
  for (const auto& r : frame.readings) {
    if (!seen.insert(r.anchor_id).second) {
      throw Error(ErrorKind::InvalidArgument,
                  "anchor '" + r.anchor_id + "' appears twice in one frame");
    }
  }
}

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::InvalidArgument, "Gaussian noise needs a finite sigma > 0");
  }
  NoiseModel m;
  m.gaussian_ = true;
  m.sigma_ = sigma;
  return m;
}

NoiseModel NoiseModel::empirical(LogDensity log_density, Sampler sampler, LogDensity score) {
  if (!log_density || !sampler) {
    throw Error(ErrorKind::InvalidArgument, "empirical noise needs a log density and a sampler");
  }
  NoiseModel m;
  m.gaussian_ = false;
  m.log_density_ = std::move(log_density);
  m.sampler_ = std::move(sampler);
  m.score_ = std::move(score);
  return m;
}

double NoiseModel::draw(RandomEngine& rng) const {
  if (gaussian_) {
    // Scaled standard normal, so equal seeds give noise proportional to sigma.
    std::normal_distribution<double> unit(0.0, 1.0);
    return sigma_ * unit(rng);
  }
  return sampler_(rng);
}

double NoiseModel::log_density(double v) const {
  if (gaussian_) {
    constexpr double kHalfLog2Pi = 0.91893853320467274178;
    const double z = v / sigma_;
    return -0.5 * z * z - std::log(sigma_) - kHalfLog2Pi;
  }
  return log_density_(v);
}

double NoiseModel::score(double v) const {
  if (gaussian_) return -v / (sigma_ * sigma_);
  if (score_) return score_(v);
  return (log_density_(v + kScoreStep) - log_density_(v - kScoreStep)) / (2.0 * kScoreStep);
}

double predict_rss(const Anchor& anchor, const TargetState& target) {
  const double d = checked_distance(anchor, target.position());
  return anchor.path_loss_a + 10.0 * anchor.path_loss_b * std::log10(d);
}

Eigen::VectorXd predict_all(std::span<const Anchor> anchors, const TargetState& target) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(anchors.size()));
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = predict_rss(anchors[i], target);
  }
  return out;
}

Jacobian jacobian(std::span<const Anchor> anchors, const TargetState& target) {
  const Vec3 p = target.position();
  Jacobian jac(2, static_cast<Eigen::Index>(anchors.size()));
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto& a = anchors[i];
    const double d = checked_distance(a, p);
    const Vec3 diff = p - a.position;
    jac.col(static_cast<Eigen::Index>(i)) = kGradientScale * a.path_loss_b * diff.head<2>() / (d * d);
  }
  return jac;
}

double noise_information(const NoiseModel& noise, std::size_t mc_samples, std::uint64_t seed) {
  if (noise.is_gaussian()) {
    return 1.0 / (noise.sigma() * noise.sigma());
  }
  if (mc_samples == 0) {
    throw Error(ErrorKind::InvalidArgument, "Monte Carlo noise information needs mc_samples >= 1");
  }
  RandomEngine rng(seed);
  double sum = 0.0;
  for (std::size_t k = 0; k < mc_samples; ++k) {
    const double v = noise.draw(rng);
    const double s = noise.score(v);
    if (!std::isfinite(s)) {
      throw Error(ErrorKind::NonFiniteDensity,
                  "log density is not finite near sampled value " + std::to_string(v));
    }
    sum += s * s;
  }
  return sum / static_cast<double>(mc_samples);
}

MeasurementFrame sample_measurements(std::span<const Anchor> anchors, const TargetState& target,
                                     const NoiseModel& noise, double timestamp,
                                     std::uint64_t seed) {
  const Eigen::VectorXd mean = predict_all(anchors, target);
  RandomEngine rng(seed);
  MeasurementFrame frame;
  frame.timestamp = timestamp;
  frame.readings.reserve(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    frame.readings.push_back({anchors[i].id, mean[static_cast<Eigen::Index>(i)] + noise.draw(rng)});
  }
  return frame;
}

}  // namespace crbgate
