#include "crbgate/position_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <Eigen/Cholesky>

#include "crbgate/errors.hpp"

namespace crbgate {

namespace {

constexpr int kGridCells = 8;
constexpr double kMaxDamping = 1e16;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Sum of squared residuals, +inf where the model is undefined.
double objective(const ResolvedFrame& rf, const TargetState& target) {
  double sum = 0.0;
  const Vec3 p = target.position();
  for (std::size_t i = 0; i < rf.anchors.size(); ++i) {
    const auto& a = rf.anchors[i];
    const double d = (p - a.position).norm();
    if (!(d >= kMinDistance)) return kInf;
    const double r = rf.rss[static_cast<Eigen::Index>(i)] - a.path_loss_a -
                     10.0 * a.path_loss_b * std::log10(d);
    sum += r * r;
  }
  return sum;
}

Rect default_extent(std::span<const Anchor> anchors) {
  Rect r{kInf, kInf, -kInf, -kInf};
  for (const auto& a : anchors) {
    r.x0 = std::min(r.x0, a.position.x());
    r.y0 = std::min(r.y0, a.position.y());
    r.x1 = std::max(r.x1, a.position.x());
    r.y1 = std::max(r.y1, a.position.y());
  }
  // Collinear or single-anchor layouts still get a 2D grid.
  if (r.width() < 1.0) { r.x0 -= 0.5; r.x1 += 0.5; }
  if (r.height() < 1.0) { r.y0 -= 0.5; r.y1 += 0.5; }
  return r;
}

std::vector<Vec2> guesses_for(const ResolvedFrame& rf, std::span<const Anchor> scene_anchors,
                              const EstimatorConfig& config) {
  std::vector<Vec2> out;
  const auto count = static_cast<std::size_t>(config.multistart_count);
  if (rf.anchors.empty()) return out;

  Eigen::Index strongest = 0;
  rf.rss.maxCoeff(&strongest);
  out.push_back(rf.anchors[static_cast<std::size_t>(strongest)].position.head<2>());
  if (out.size() >= count) return out;

  Vec2 weighted = Vec2::Zero();
  double total = 0.0;
  for (std::size_t i = 0; i < rf.anchors.size(); ++i) {
    const auto& a = rf.anchors[i];
    const double exponent = (rf.rss[static_cast<Eigen::Index>(i)] - a.path_loss_a) / (10.0 * a.path_loss_b);
    const double w = 1.0 / std::max(std::pow(10.0, exponent), kMinDistance);
    if (!std::isfinite(w)) continue;
    weighted += w * a.position.head<2>();
    total += w;
  }
  out.push_back(total > 0.0 ? Vec2(weighted / total) : out.front());
  if (out.size() >= count) return out;

  const Rect ext = config.grid_extent.value_or(default_extent(scene_anchors));
  struct Cell {
    Vec2 center;
    double value;
    int index;
  };
  std::vector<Cell> cells;
  cells.reserve(kGridCells * kGridCells);
  for (int j = 0; j < kGridCells; ++j) {
    for (int i = 0; i < kGridCells; ++i) {
      const Vec2 c(ext.x0 + (i + 0.5) * ext.width() / kGridCells,
                   ext.y0 + (j + 0.5) * ext.height() / kGridCells);
      cells.push_back({c, objective(rf, TargetState{c, config.z_fixed}), j * kGridCells + i});
    }
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& a, const Cell& b) { return a.value < b.value; });
  for (const auto& c : cells) {
    if (out.size() >= count) break;
    out.push_back(c.center);
  }
  return out;
}

struct Descent {
  Vec2 xy;
  double cost;
  int iterations;
  bool converged;
};

Descent descend(const ResolvedFrame& rf, const Vec2& start, const EstimatorConfig& config) {
  TargetState target{start, config.z_fixed};
  double cost = objective(rf, target);
  if (!std::isfinite(cost)) return {start, kInf, 0, false};

  double lambda = config.damping_init;
  int it = 0;
  bool converged = cost == 0.0;
  while (!converged && it < config.max_iterations) {
    ++it;
    const Jacobian jac = jacobian(rf.anchors, target);
    const Eigen::VectorXd r = rf.rss - predict_all(rf.anchors, target);
    const Eigen::Matrix2d normal = jac * jac.transpose();
    const Vec2 gradient = jac * r;

    bool accepted = false;
    while (lambda <= kMaxDamping) {
      const Eigen::Matrix2d damped = normal + lambda * Eigen::Matrix2d::Identity();
      const Vec2 step = damped.ldlt().solve(gradient);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const TargetState trial{target.xy + step, config.z_fixed};
      const double trial_cost = objective(rf, trial);
      if (trial_cost < cost) {
        const double decrease = (cost - trial_cost) / cost;
        target = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-300);
        accepted = true;
        converged = step.norm() <= config.step_tolerance ||
                    decrease <= config.residual_tolerance || cost == 0.0;
        break;
      }
      // No decrease possible even with a step below tolerance: stationary.
      if (step.norm() <= config.step_tolerance) {
        converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted && !converged) break;
  }
  return {target.xy, cost, it, converged};
}

}  // namespace

void validate(const EstimatorConfig& config) {
  if (config.max_iterations < 1 || config.multistart_count < 1) {
    throw Error(ErrorKind::InvalidArgument, "estimator counts must be >= 1");
  }
  if (!(config.step_tolerance > 0.0) || !(config.residual_tolerance > 0.0) ||
      !(config.damping_init > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "estimator tolerances and damping must be > 0");
  }
  if (config.grid_extent &&
      !(config.grid_extent->width() > 0.0 && config.grid_extent->height() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "estimator grid extent must be non-degenerate");
  }
}

ResolvedFrame resolve_frame(std::span<const Anchor> anchors, const MeasurementFrame& frame) {
  validate(frame);
  std::unordered_map<std::string_view, std::size_t> by_id;
  for (std::size_t i = 0; i < anchors.size(); ++i) by_id.emplace(anchors[i].id, i);

  ResolvedFrame rf;
  rf.anchors.reserve(frame.readings.size());
  rf.rss.resize(static_cast<Eigen::Index>(frame.readings.size()));
  for (std::size_t k = 0; k < frame.readings.size(); ++k) {
    const auto& reading = frame.readings[k];
    const auto found = by_id.find(reading.anchor_id);
    if (found == by_id.end()) {
      throw Error(ErrorKind::UnknownAnchor, "reading references unknown anchor '" + reading.anchor_id + "'");
    }
    if (!std::isfinite(reading.rss)) {
      throw Error(ErrorKind::InvalidArgument, "reading for anchor '" + reading.anchor_id + "' is not finite");
    }
    rf.anchors.push_back(anchors[found->second]);
    rf.rss[static_cast<Eigen::Index>(k)] = reading.rss;
  }
  return rf;
}

Eigen::VectorXd residuals(std::span<const Anchor> anchors, const MeasurementFrame& frame,
                          const TargetState& target) {
  const ResolvedFrame rf = resolve_frame(anchors, frame);
  return rf.rss - predict_all(rf.anchors, target);
}

std::vector<Vec2> initial_guesses(std::span<const Anchor> anchors, const MeasurementFrame& frame,
                                  const EstimatorConfig& config) {
  validate(config);
  return guesses_for(resolve_frame(anchors, frame), anchors, config);
}

PositionEstimate solve(std::span<const Anchor> anchors, const MeasurementFrame& frame,
                       const EstimatorConfig& config) {
  validate(config);
  const ResolvedFrame rf = resolve_frame(anchors, frame);
  if (rf.anchors.size() < 3) {
    throw Error(ErrorKind::InsufficientAnchors,
                "position estimation needs at least 3 readings, got " +
                    std::to_string(rf.anchors.size()));
  }

  const auto starts = guesses_for(rf, anchors, config);
  PositionEstimate best;
  double best_cost = kInf;
  bool have_best = false;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const Descent d = descend(rf, starts[k], config);
    if (!have_best || d.cost < best_cost) {
      best = {d.xy, std::sqrt(d.cost), d.iterations, d.converged, k};
      best_cost = d.cost;
      have_best = true;
    }
  }
  return best;
}

}  // namespace crbgate
