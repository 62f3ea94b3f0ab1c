#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crbgate/crb_region.hpp"
#include "crbgate/geometry.hpp"

namespace crbgate {

/// Calibrated pinhole camera: pixel ~ K [R | T] world. No lens distortion.
class CameraModel {
 public:
  /// Validates that R is a proper rotation (R^T R = I within 1e-9, det = +1)
  /// and that K is upper triangular with a positive diagonal.
  CameraModel(std::string id, const Eigen::Matrix3d& intrinsics, const Eigen::Matrix3d& rotation,
              const Vec3& translation, int width, int height);

  /// Camera at `eye` looking at `target`, with `up` roughly pointing up in the
  /// image; principal point at the image centre.
  static CameraModel look_at(std::string id, const Vec3& eye, const Vec3& target, const Vec3& up,
                             double focal_px, int width, int height);

  const std::string& id() const { return id_; }
  const Eigen::Matrix3d& intrinsics() const { return k_; }
  const Eigen::Matrix3d& rotation() const { return r_; }
  const Vec3& translation() const { return t_; }
  int width() const { return width_; }
  int height() const { return height_; }

  /// K [R | T], 3x4.
  Eigen::Matrix<double, 3, 4> projection_matrix() const;

  bool operator==(const CameraModel&) const = default;

 private:
  std::string id_;
  Eigen::Matrix3d k_;
  Eigen::Matrix3d r_;
  Vec3 t_;
  int width_;
  int height_;
};

struct Projection {
  Vec2 pixel;
  double depth;  // s, the third homogeneous coordinate
};

/// Throws BehindCamera when s <= 1e-9.
Projection project(const CameraModel& camera, const Vec3& world_point);
/// Homogeneous input (x, y, z, w); invariant to positive scaling.
Projection project(const CameraModel& camera, const Eigen::Vector4d& homogeneous_point);

/// Inverse of project for a known depth s.
Vec3 unproject(const CameraModel& camera, const Vec2& pixel, double depth);

struct PixelBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  bool clipped = false;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool contains(const Vec2& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
  bool contains(const PixelBox& other) const {
    return other.x_min >= x_min && other.x_max <= x_max && other.y_min >= y_min &&
           other.y_max <= y_max;
  }
  bool operator==(const PixelBox&) const = default;
};

struct ProjectedRegion {
  std::vector<Vec2> polygon;  // convex hull, counterclockwise in pixel axes
  PixelBox box;
};

inline constexpr double kDefaultPersonHeight = 1.8;

/// Projects the ellipse boundary lifted to each z level, returns the convex
/// hull of all points in front of the camera and its bounding box clamped to
/// the image. Throws BehindCamera if no point is in front, RegionOutsideImage
/// if the box misses the image entirely.
ProjectedRegion project_region(const CameraModel& camera, const ConfidenceEllipse& e,
                               std::span<const double> z_levels,
                               std::size_t n_points = kDefaultBoundaryPoints);

/// Monotone-chain hull; collinear points dropped. Degenerate inputs return
/// the distinct extreme points.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

}  // namespace crbgate
