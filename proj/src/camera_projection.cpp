#include "crbgate/camera_projection.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "crbgate/errors.hpp"

namespace crbgate {

namespace {

constexpr double kMinDepth = 1e-9;
constexpr double kRotationTolerance = 1e-9;

Projection divide(const Eigen::Vector3d& h) {
  if (!(h.z() > kMinDepth)) {
    throw Error(ErrorKind::BehindCamera, "point projects at or behind the optical centre");
  }
  return {Vec2(h.x() / h.z(), h.y() / h.z()), h.z()};
}

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

CameraModel::CameraModel(std::string id, const Eigen::Matrix3d& intrinsics,
                         const Eigen::Matrix3d& rotation, const Vec3& translation, int width,
                         int height)
    : id_(std::move(id)), k_(intrinsics), r_(rotation), t_(translation), width_(width), height_(height) {
  if (!k_.allFinite() || !r_.allFinite() || !t_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "camera '" + id_ + "' has non-finite parameters");
  }
  const double ortho = (r_.transpose() * r_ - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > kRotationTolerance || std::abs(r_.determinant() - 1.0) > kRotationTolerance) {
    throw Error(ErrorKind::InvalidArgument, "camera '" + id_ + "': R is not a proper rotation");
  }
  if (k_(1, 0) != 0.0 || k_(2, 0) != 0.0 || k_(2, 1) != 0.0 || !(k_(0, 0) > 0.0) ||
      !(k_(1, 1) > 0.0) || !(k_(2, 2) > 0.0)) {
    throw Error(ErrorKind::InvalidArgument,
                "camera '" + id_ + "': K must be upper triangular with a positive diagonal");
  }
  if (width_ <= 0 || height_ <= 0) {
    throw Error(ErrorKind::InvalidArgument, "camera '" + id_ + "': image size must be positive");
  }
}

CameraModel CameraModel::look_at(std::string id, const Vec3& eye, const Vec3& target,
                                 const Vec3& up, double focal_px, int width, int height) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "look_at: up vector is parallel to the view direction");
  }
  right.normalize();
  const Vec3 down = forward.cross(right);
  Eigen::Matrix3d r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  k(0, 0) = focal_px;
  k(1, 1) = focal_px;
  k(0, 2) = width / 2.0;
  k(1, 2) = height / 2.0;
  return CameraModel(std::move(id), k, r, -r * eye, width, height);
}

Eigen::Matrix<double, 3, 4> CameraModel::projection_matrix() const {
  Eigen::Matrix<double, 3, 4> rt;
  rt.leftCols<3>() = r_;
  rt.col(3) = t_;
  return k_ * rt;
}

Projection project(const CameraModel& camera, const Vec3& world_point) {
  return divide(camera.intrinsics() * (camera.rotation() * world_point + camera.translation()));
}

Projection project(const CameraModel& camera, const Eigen::Vector4d& homogeneous_point) {
  if (!(homogeneous_point.w() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "homogeneous point needs a positive last coordinate");
  }
  // Normalise first so that s keeps its metric meaning.
  return project(camera, Vec3(homogeneous_point.head<3>() / homogeneous_point.w()));
}

Vec3 unproject(const CameraModel& camera, const Vec2& pixel, double depth) {
  const Vec3 h(pixel.x() * depth, pixel.y() * depth, depth);
  const Vec3 cam = camera.intrinsics().triangularView<Eigen::Upper>().solve(h);
  return camera.rotation().transpose() * (cam - camera.translation());
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

ProjectedRegion project_region(const CameraModel& camera, const ConfidenceEllipse& e,
                               std::span<const double> z_levels, std::size_t n_points) {
  if (z_levels.empty()) {
    throw Error(ErrorKind::InvalidArgument, "project_region needs at least one z level");
  }
  const auto boundary = ellipse_boundary(e, n_points);
  std::vector<Vec2> pixels;
  pixels.reserve(boundary.size() * z_levels.size());
  for (double z : z_levels) {
    for (const auto& p : boundary) {
      try {
        pixels.push_back(project(camera, Vec3(p.x(), p.y(), z)).pixel);
      } catch (const Error&) {
        // Behind the camera; the rest of the region may still be visible.
      }
    }
  }
  if (pixels.empty()) {
    throw Error(ErrorKind::BehindCamera, "confidence region lies entirely behind camera '" + camera.id() + "'");
  }

  ProjectedRegion out;
  out.polygon = convex_hull(pixels);
  PixelBox raw{pixels.front().x(), pixels.front().y(), pixels.front().x(), pixels.front().y(), false};
  for (const auto& q : pixels) {
    raw.x_min = std::min(raw.x_min, q.x());
    raw.y_min = std::min(raw.y_min, q.y());
    raw.x_max = std::max(raw.x_max, q.x());
    raw.y_max = std::max(raw.y_max, q.y());
  }
  const double w = camera.width();
  const double h = camera.height();
  if (raw.x_max < 0.0 || raw.y_max < 0.0 || raw.x_min > w || raw.y_min > h) {
    throw Error(ErrorKind::RegionOutsideImage,
                "confidence region projects outside the image of camera '" + camera.id() + "'");
  }
  out.box = {std::clamp(raw.x_min, 0.0, w), std::clamp(raw.y_min, 0.0, h),
             std::clamp(raw.x_max, 0.0, w), std::clamp(raw.y_max, 0.0, h), false};
  out.box.clipped = out.box.x_min != raw.x_min || out.box.y_min != raw.y_min ||
                    out.box.x_max != raw.x_max || out.box.y_max != raw.y_max;
  return out;
}

}  // namespace crbgate
