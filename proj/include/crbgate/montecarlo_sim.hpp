#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "crbgate/camera_projection.hpp"
#include "crbgate/geometry.hpp"
#include "crbgate/position_estimator.hpp"
#include "crbgate/wireless_model.hpp"

namespace crbgate {

/// A deployment: anchors, cameras and noise over a floor area.
struct Scene {
  std::vector<Anchor> anchors;
  std::vector<CameraModel> cameras;
  NoiseModel noise = NoiseModel::gaussian(3.0);
  Rect bounds;
  double person_height = kDefaultPersonHeight;

  /// Same scene with Gaussian noise of the given standard deviation.
  Scene with_sigma(double sigma) const;
  /// Estimator settings tied to this scene (grid over the bounds).
  EstimatorConfig estimator_config() const;
};

/// Throws InvalidArgument on invalid anchors, duplicate ids, degenerate
/// bounds or cameras with duplicate ids.
void validate(const Scene& scene);

/// 32 anchors evenly spaced along the perimeter of a 20 m x 20 m room at
/// 2.5 m height (A = -45 dBm, B = -6), Gaussian noise sigma = 3 dBm, an
/// overhead camera and a corner camera.
Scene default_scene();

/// Four fixed evaluation points at relative positions (0.5, 0.5),
/// (0.25, 0.25), (0.7, 0.35) and (0.3, 0.75) of the bounds.
std::vector<Vec2> default_targets(const Rect& bounds);

struct SigmaRow {
  double sigma = 0.0;        // dBm
  double rmse_m = 0.0;       // empirical, over successful trials
  double crb_rmse_m = 0.0;   // sqrt of the mean trace(F^-1) at the true points
  double coverage = 0.0;     // fraction of 95% plug-in regions holding the truth
  double mse_standard_error = 0.0;  // standard error of the empirical MSE
  std::size_t trials = 0;
  std::size_t failures = 0;
};

struct SimReport {
  std::vector<SigmaRow> per_sigma;
  std::uint64_t seed = 0;
};

inline constexpr double kReportAlpha = 0.05;

/// Seed of trial i: a mix of the base seed, xor i. Trials are independent
/// and can run in any order.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);

/// For each sigma: trial i draws a frame at targets[i % targets.size()] with
/// trial_seed(seed, i), solves, and accumulates squared error. Seeds are shared across
/// sigmas, so rows differ only through the noise scale. Failed trials are
/// counted and excluded.
SimReport run_mse(const Scene& scene, std::span<const double> sigmas, std::size_t trials_per_sigma,
                  std::span<const Vec2> targets, std::uint64_t seed);

struct CoverageResult {
  double fraction = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
};

/// Fraction of trials whose plug-in region (FIM at the estimate) at level
/// alpha contains the generating position.
CoverageResult run_coverage(const Scene& scene, double alpha, std::size_t trials,
                            std::span<const Vec2> targets, std::uint64_t seed);

/// Best achievable RMSE at cell centres; empty cells are unlocalizable.
struct Heatmap {
  std::size_t nx = 0;
  std::size_t ny = 0;
  Rect bounds;
  std::vector<std::optional<double>> values;  // row-major, index = j * nx + i

  Vec2 cell_center(std::size_t i, std::size_t j) const;
  const std::optional<double>& at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
};

Heatmap crb_heatmap(const Scene& scene, std::size_t nx, std::size_t ny);

struct TrajectorySample {
  double t = 0.0;
  Vec2 xy = Vec2::Zero();
};

/// Constant-speed walk along the polyline, sampled at `rate` Hz from t = 0.
std::vector<TrajectorySample> gen_trajectory(std::span<const Vec2> waypoints, double speed, double rate);

/// Samples used when the scene noise is not Gaussian.
inline constexpr std::size_t kNoiseInformationSamples = 100000;

double scene_noise_information(const Scene& scene);

}  // namespace crbgate
