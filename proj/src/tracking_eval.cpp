#include "crbgate/tracking_eval.hpp"

#include <algorithm>
#include <string>

#include "crbgate/errors.hpp"

namespace crbgate {

namespace {

void require_aligned(std::size_t predictions, std::size_t gt) {
  if (predictions != gt) {
    throw Error(ErrorKind::LengthMismatch, "got " + std::to_string(predictions) +
                                               " predicted frames for " + std::to_string(gt) +
                                               " ground-truth frames");
  }
}

void require_extent(const Box& b) {
  if (!(b.w >= 0.0) || !(b.h >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "box extents must be non-negative");
  }
}

}  // namespace

double iou(const Box& a, const Box& b) {
  require_extent(a);
  require_extent(b);
  const double iw = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double ih = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double recall_rate(std::span<const std::optional<Box>> regions, std::span<const GtBox> gt) {
  require_aligned(regions.size(), gt.size());
  std::size_t present = 0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (!gt[k].present) continue;
    ++present;
    if (!regions[k]) continue;
    const Box& r = *regions[k];
    const double cx = gt[k].box.x + 0.5 * gt[k].box.w;
    const double cy = gt[k].box.y + 0.5 * gt[k].box.h;
    if (cx >= r.x && cx <= r.x + r.w && cy >= r.y && cy <= r.y + r.h) ++hits;
  }
  return present > 0 ? 100.0 * static_cast<double>(hits) / static_cast<double>(present) : 0.0;
}

std::vector<double> default_thresholds() {
  std::vector<double> t(101);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k) / 100.0;
  return t;
}

std::vector<CurvePoint> success_curve(std::span<const std::optional<Box>> predictions,
                                      std::span<const GtBox> gt, std::span<const double> thresholds) {
  require_aligned(predictions.size(), gt.size());
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw Error(ErrorKind::InvalidArgument, "thresholds must be sorted ascending");
  }
  std::vector<double> scores;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (!gt[k].present) continue;
    scores.push_back(predictions[k] ? iou(*predictions[k], gt[k].box) : 0.0);
  }
  std::vector<CurvePoint> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto above = std::count_if(scores.begin(), scores.end(), [t](double s) { return s > t; });
    const double osr = scores.empty() ? 0.0 : static_cast<double>(above) / static_cast<double>(scores.size());
    curve.push_back({t, osr});
  }
  return curve;
}

double auc(std::span<const CurvePoint> curve) {
  if (curve.empty()) throw Error(ErrorKind::EmptyCurve, "cannot integrate an empty curve");
  if (curve.size() == 1) return curve.front().osr;
  double area = 0.0;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    const double dt = curve[k].threshold - curve[k - 1].threshold;
    if (dt < 0.0) throw Error(ErrorKind::InvalidArgument, "curve thresholds must be ascending");
    area += 0.5 * dt * (curve[k].osr + curve[k - 1].osr);
  }
  const double span = curve.back().threshold - curve.front().threshold;
  return span > 0.0 ? area / span : curve.front().osr;
}

}  // namespace crbgate
