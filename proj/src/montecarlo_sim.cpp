#include "crbgate/montecarlo_sim.hpp"

#include <cmath>
#include <set>

#include "crbgate/crb_region.hpp"
#include "crbgate/errors.hpp"

namespace crbgate {

namespace {

void require_study_inputs(const Scene& scene, std::size_t trials, std::span<const Vec2> targets) {
  validate(scene);
  if (scene.anchors.size() < 3) {
    throw Error(ErrorKind::InsufficientAnchors, "simulation needs at least 3 anchors");
  }
  if (trials == 0) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
  if (targets.empty()) throw Error(ErrorKind::InvalidArgument, "at least one target is required");
  for (const auto& t : targets) {
    if (!scene.bounds.contains(t)) {
      throw Error(ErrorKind::InvalidArgument, "simulation target lies outside the scene bounds");
    }
  }
}

MeasurementFrame trial_frame(const Scene& scene, const Vec2& truth, std::uint64_t base,
                             std::size_t trial) {
  return sample_measurements(scene.anchors, TargetState{truth, 0.0}, scene.noise, 0.0,
                             trial_seed(base, trial));
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  // splitmix64 finalizer: distinct base seeds map to unrelated trial ranges.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z ^ static_cast<std::uint64_t>(trial);
}

Scene Scene::with_sigma(double sigma) const {
  Scene s = *this;
  s.noise = NoiseModel::gaussian(sigma);
  return s;
}

EstimatorConfig Scene::estimator_config() const {
  EstimatorConfig c;
  c.grid_extent = bounds;
  return c;
}

void validate(const Scene& scene) {
  std::set<std::string_view> ids;
  for (const auto& a : scene.anchors) {
    validate(a);
    if (!ids.insert(a.id).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate anchor id '" + a.id + "'");
    }
  }
  std::set<std::string_view> cams;
  for (const auto& c : scene.cameras) {
    if (!cams.insert(c.id()).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate camera id '" + c.id() + "'");
    }
  }
  const Rect& b = scene.bounds;
  if (!(std::isfinite(b.x0) && std::isfinite(b.y0) && std::isfinite(b.x1) && std::isfinite(b.y1)) ||
      !(b.width() > 0.0 && b.height() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "scene bounds must be a non-degenerate rectangle");
  }
  if (!(scene.person_height >= 0.0) || !std::isfinite(scene.person_height)) {
    throw Error(ErrorKind::InvalidArgument, "person height must be finite and >= 0");
  }
}

Scene default_scene() {
  constexpr double kSide = 20.0;
  constexpr double kMountHeight = 2.5;
  constexpr int kAnchors = 32;
  // Obstructed-indoor slope; puts the sigma = 3 dBm accuracy near half a metre.
  constexpr double kSlope = -6.0;
  Scene s;
  s.bounds = {0.0, 0.0, kSide, kSide};
  s.noise = NoiseModel::gaussian(3.0);
  s.person_height = kDefaultPersonHeight;
  const double spacing = 4.0 * kSide / kAnchors;
  for (int k = 0; k < kAnchors; ++k) {
    const double arc = k * spacing;
    Vec2 xy;
    if (arc < kSide) {
      xy = {arc, 0.0};
    } else if (arc < 2 * kSide) {
      xy = {kSide, arc - kSide};
    } else if (arc < 3 * kSide) {
      xy = {3 * kSide - arc, kSide};
    } else {
      xy = {0.0, 4 * kSide - arc};
    }
    const std::string id = (k < 10 ? "b0" : "b") + std::to_string(k);
    s.anchors.push_back({id, Vec3(xy.x(), xy.y(), kMountHeight), -45.0, kSlope});
  }
  s.cameras.push_back(CameraModel::look_at("overhead", {10.0, 10.0, 12.0}, {10.0, 10.0, 0.0},
                                           {0.0, 1.0, 0.0}, 400.0, 1280, 960));
  s.cameras.push_back(CameraModel::look_at("corner", {-1.0, -1.0, 3.5}, {10.0, 10.0, 0.9},
                                           {0.0, 0.0, 1.0}, 900.0, 1920, 1080));
  return s;
}

std::vector<Vec2> default_targets(const Rect& b) {
  const std::vector<Vec2> rel{{0.5, 0.5}, {0.25, 0.25}, {0.7, 0.35}, {0.3, 0.75}};
  std::vector<Vec2> out;
  out.reserve(rel.size());
  for (const auto& r : rel) out.emplace_back(b.x0 + r.x() * b.width(), b.y0 + r.y() * b.height());
  return out;
}

double scene_noise_information(const Scene& scene) {
  return noise_information(scene.noise, kNoiseInformationSamples, 0);
}

SimReport run_mse(const Scene& scene, std::span<const double> sigmas, std::size_t trials_per_sigma,
                  std::span<const Vec2> targets, std::uint64_t seed) {
  require_study_inputs(scene, trials_per_sigma, targets);
  const EstimatorConfig config = scene.estimator_config();
  const double threshold = chi2_quantile(kReportAlpha);

  SimReport report;
  report.seed = seed;
  for (double sigma : sigmas) {
    const Scene noisy = scene.with_sigma(sigma);
    const double i_v = 1.0 / (sigma * sigma);

    std::vector<double> target_crb(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
      target_crb[t] = crb(fim(jacobian(scene.anchors, TargetState{targets[t], 0.0}), i_v)).trace();
    }

    double sum_sq = 0.0;
    double sum_sq2 = 0.0;
    double sum_crb = 0.0;
    std::size_t ok = 0;
    std::size_t covered = 0;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < trials_per_sigma; ++i) {
      const std::size_t t = i % targets.size();
      try {
        const auto frame = trial_frame(noisy, targets[t], seed, i);
        const auto est = solve(scene.anchors, frame, config);
        const double err2 = (est.xy - targets[t]).squaredNorm();
        const Fim2 plug_in = fim(jacobian(scene.anchors, TargetState{est.xy, 0.0}), i_v);
        const Vec2 e = targets[t] - est.xy;
        const bool inside = plug_in.is_positive_definite() &&
                            e.dot(plug_in.matrix() * e) <= threshold;
        sum_sq += err2;
        sum_sq2 += err2 * err2;
        sum_crb += target_crb[t];
        covered += inside ? 1 : 0;
        ++ok;
      } catch (const Error&) {
        ++failures;
      }
    }

    SigmaRow row;
    row.sigma = sigma;
    row.trials = trials_per_sigma;
    row.failures = failures;
    if (ok > 0) {
      const double n = static_cast<double>(ok);
      const double mse = sum_sq / n;
      row.rmse_m = std::sqrt(mse);
      row.crb_rmse_m = std::sqrt(sum_crb / n);
      row.coverage = static_cast<double>(covered) / n;
      const double var = ok > 1 ? std::max(0.0, (sum_sq2 - n * mse * mse) / (n - 1.0)) : 0.0;
      row.mse_standard_error = std::sqrt(var / n);
    }
    report.per_sigma.push_back(row);
  }
  return report;
}

CoverageResult run_coverage(const Scene& scene, double alpha, std::size_t trials,
                            std::span<const Vec2> targets, std::uint64_t seed) {
  require_study_inputs(scene, trials, targets);
  chi2_quantile(alpha);  // validates alpha before any work
  const double i_v = scene_noise_information(scene);
  const EstimatorConfig config = scene.estimator_config();

  CoverageResult out;
  out.trials = trials;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const Vec2& truth = targets[i % targets.size()];
    try {
      const auto frame = trial_frame(scene, truth, seed, i);
      const auto est = solve(scene.anchors, frame, config);
      const Fim2 plug_in = fim(jacobian(scene.anchors, TargetState{est.xy, 0.0}), i_v);
      const auto region = confidence_ellipse(est.xy, plug_in, alpha);
      covered += contains(region, truth) ? 1 : 0;
    } catch (const Error&) {
      ++out.failures;
    }
  }
  const std::size_t ok = trials - out.failures;
  out.fraction = ok > 0 ? static_cast<double>(covered) / static_cast<double>(ok) : 0.0;
  return out;
}

Vec2 Heatmap::cell_center(std::size_t i, std::size_t j) const {
  return {bounds.x0 + (static_cast<double>(i) + 0.5) * bounds.width() / static_cast<double>(nx),
          bounds.y0 + (static_cast<double>(j) + 0.5) * bounds.height() / static_cast<double>(ny)};
}

Heatmap crb_heatmap(const Scene& scene, std::size_t nx, std::size_t ny) {
  validate(scene);
  if (nx < 2 || ny < 2) {
    throw Error(ErrorKind::InvalidArgument, "heatmap grid needs at least 2 x 2 cells");
  }
  if (scene.anchors.empty()) {
    throw Error(ErrorKind::InsufficientAnchors, "heatmap needs at least one anchor");
  }
  const double i_v = scene_noise_information(scene);
  Heatmap h{nx, ny, scene.bounds, std::vector<std::optional<double>>(nx * ny)};
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      try {
        const Fim2 f = fim(jacobian(scene.anchors, TargetState{h.cell_center(i, j), 0.0}), i_v);
        h.values[j * nx + i] = best_rmse(f);
      } catch (const Error&) {
        // Singular information or a cell on top of an anchor.
      }
    }
  }
  return h;
}

std::vector<TrajectorySample> gen_trajectory(std::span<const Vec2> waypoints, double speed, double rate) {
  if (waypoints.size() < 2) {
    throw Error(ErrorKind::DegenerateWaypoints, "a trajectory needs at least two waypoints");
  }
  if (!(speed > 0.0) || !(rate > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "trajectory speed and rate must be > 0");
  }
  std::vector<double> cumulative{0.0};
  for (std::size_t k = 1; k < waypoints.size(); ++k) {
    cumulative.push_back(cumulative.back() + (waypoints[k] - waypoints[k - 1]).norm());
  }
  const double length = cumulative.back();
  if (!(length > 0.0)) {
    throw Error(ErrorKind::DegenerateWaypoints, "trajectory has zero length");
  }
  const double duration = length / speed;
  const auto count = static_cast<std::size_t>(std::floor(duration * rate + 1e-9)) + 1;

  std::vector<TrajectorySample> out;
  out.reserve(count);
  std::size_t seg = 1;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / rate;
    const double s = std::min(speed * t, length);
    while (seg + 1 < cumulative.size() && cumulative[seg] < s) ++seg;
    const double seg_len = cumulative[seg] - cumulative[seg - 1];
    const double u = seg_len > 0.0 ? (s - cumulative[seg - 1]) / seg_len : 0.0;
    out.push_back({t, waypoints[seg - 1] + u * (waypoints[seg] - waypoints[seg - 1])});
  }
  return out;
}

}  // namespace crbgate
