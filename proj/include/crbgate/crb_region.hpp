#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "crbgate/geometry.hpp"
#include "crbgate/wireless_model.hpp"

namespace crbgate {

/// 2x2 Fisher information of the xy position. Symmetric positive
/// semidefinite; the constructor symmetrizes and rejects anything else.
class Fim2 {
 public:
  explicit Fim2(const Eigen::Matrix2d& entries);

  const Eigen::Matrix2d& matrix() const { return m_; }
  double trace() const { return m_.trace(); }
  double determinant() const { return m_.determinant(); }
  /// Ascending.
  std::array<double, 2> eigenvalues() const;
  /// min eigenvalue > 1e-10 * trace.
  bool is_positive_definite() const;

  bool operator==(const Fim2&) const = default;

 private:
  Eigen::Matrix2d m_;
};

/// i_v * jac * jac^T.
Fim2 fim(const Jacobian& jac, double i_v);

/// Covariance lower bound F^-1. Throws SingularFimError unless F is PD.
Eigen::Matrix2d crb(const Fim2& f);

/// sqrt(trace(F^-1)), meters.
double best_rmse(const Fim2& f);

/// Upper-alpha quantile of chi-squared with 2 degrees of freedom, -2 ln(alpha).
double chi2_quantile(double alpha);

/// {p : (p - center)^T F (p - center) <= threshold}, the (1 - alpha) region.
struct ConfidenceEllipse {
  Vec2 center = Vec2::Zero();
  Fim2 fim{Eigen::Matrix2d::Identity()};
  double level_alpha = 0.05;
  double threshold = 0.0;

  double quadratic_form(const Vec2& p) const;
  /// pi * threshold / sqrt(det F).
  double area() const;
  /// Semi-axis vectors (minor first): eigenvectors of F scaled by
  /// sqrt(threshold / lambda).
  std::array<Vec2, 2> semi_axes() const;
};

ConfidenceEllipse confidence_ellipse(const Vec2& center, const Fim2& f, double alpha);

inline constexpr std::size_t kDefaultBoundaryPoints = 64;

/// Counterclockwise boundary points, uniformly spaced in the angular parameter.
std::vector<Vec2> ellipse_boundary(const ConfidenceEllipse& e,
                                   std::size_t n_points = kDefaultBoundaryPoints);

/// Membership with a 1e-9 relative slack on the threshold so that boundary
/// points count as inside.
bool contains(const ConfidenceEllipse& e, const Vec2& point);

}  // namespace crbgate
