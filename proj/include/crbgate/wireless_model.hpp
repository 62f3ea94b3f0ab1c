#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crbgate/geometry.hpp"

namespace crbgate {

/// Singularity guard for the 1/d^2 pole of the path-loss gradient.
inline constexpr double kMinDistance = 0.01;

/// Wireless sensor at a surveyed position with calibrated log-distance
/// parameters: rss = path_loss_a + 10 * path_loss_b * log10(d).
struct Anchor {
  std::string id;
  Vec3 position = Vec3::Zero();
  double path_loss_a = -45.0;  // dBm at 1 m
  double path_loss_b = -2.0;   // negative: attenuation with distance

  bool operator==(const Anchor&) const = default;
};

/// Throws InvalidArgument for non-finite positions or a zero slope.
void validate(const Anchor& anchor);

/// Transmitter position. Distances are taken in 3D at height z_fixed;
/// derivatives only with respect to xy.
struct TargetState {
  Vec2 xy = Vec2::Zero();
  double z_fixed = 0.0;

  Vec3 position() const { return {xy.x(), xy.y(), z_fixed}; }
};

using RandomEngine = std::mt19937_64;

/// I.i.d. measurement noise density: Gaussian in closed form, or an
/// arbitrary density given by its log and a sampler.
class NoiseModel {
 public:
  using LogDensity = std::function<double(double)>;
  using Sampler = std::function<double(RandomEngine&)>;

  static NoiseModel gaussian(double sigma);
  /// `score` is d/dv log p(v); when empty, a centered finite difference of
  /// `log_density` is used.
  static NoiseModel empirical(LogDensity log_density, Sampler sampler,
                              LogDensity score = {});

  bool is_gaussian() const { return gaussian_; }
  /// Only meaningful for the Gaussian variant.
  double sigma() const { return sigma_; }

  double draw(RandomEngine& rng) const;
  double log_density(double v) const;
  /// d/dv log p(v).
  double score(double v) const;

 private:
  NoiseModel() = default;

  bool gaussian_ = true;
  double sigma_ = 1.0;
  LogDensity log_density_;
  Sampler sampler_;
  LogDensity score_;
};

struct Reading {
  std::string anchor_id;
  double rss = 0.0;  // dBm

  bool operator==(const Reading&) const = default;
};

/// RSS readings collected at one instant. Anchors may be missing.
struct MeasurementFrame {
  double timestamp = 0.0;
  std::vector<Reading> readings;

  bool operator==(const MeasurementFrame&) const = default;
};

/// Throws InvalidArgument on duplicated anchor ids.
void validate(const MeasurementFrame& frame);

/// 2 x N matrix; column i is the xy-gradient of anchor i's predicted RSS.
using Jacobian = Eigen::Matrix<double, 2, Eigen::Dynamic>;

double predict_rss(const Anchor& anchor, const TargetState& target);

Eigen::VectorXd predict_all(std::span<const Anchor> anchors, const TargetState& target);

/// Closed-form gradient (10 / ln 10) * B_i * (p - p_i) / d_i^2, xy rows only.
Jacobian jacobian(std::span<const Anchor> anchors, const TargetState& target);

/// Expected squared score E[(d/dv log p(v))^2]. Exactly 1/sigma^2 for the
/// Gaussian variant; a Monte Carlo mean over `mc_samples` draws otherwise.
double noise_information(const NoiseModel& noise, std::size_t mc_samples, std::uint64_t seed);

/// One frame of noisy readings, ordered as `anchors`. Pure in (inputs, seed).
MeasurementFrame sample_measurements(std::span<const Anchor> anchors, const TargetState& target,
                                     const NoiseModel& noise, double timestamp,
                                     std::uint64_t seed);

}  // namespace crbgate
