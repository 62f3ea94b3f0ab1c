#include "crbgate/crb_region.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "crbgate/errors.hpp"

namespace crbgate {

namespace {

constexpr double kPsdTolerance = 1e-12;
constexpr double kPdTolerance = 1e-10;
constexpr double kBoundarySlack = 1e-9;

void require_pd(const Fim2& f) {
  if (!f.is_positive_definite()) throw SingularFimError(f.eigenvalues());
}

}  // namespace

Fim2::Fim2(const Eigen::Matrix2d& entries) : m_(0.5 * (entries + entries.transpose())) {
  if (!m_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "Fisher information has non-finite entries");
  }
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  if (asym > 1e-9 * scale) {
    throw Error(ErrorKind::InvalidArgument, "Fisher information must be symmetric");
  }
  const auto ev = eigenvalues();
  if (ev[0] < -kPsdTolerance * std::max(std::abs(m_.trace()), 1e-300)) {
    throw Error(ErrorKind::InvalidArgument, "Fisher information must be positive semidefinite");
  }
}

std::array<double, 2> Fim2::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m_, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()[0], es.eigenvalues()[1]};
}

bool Fim2::is_positive_definite() const {
  const double tr = m_.trace();
  return tr > 0.0 && eigenvalues()[0] > kPdTolerance * tr;
}

Fim2 fim(const Jacobian& jac, double i_v) {
  if (!(i_v > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "noise information must be > 0");
  }
  if (jac.cols() == 0) {
    throw Error(ErrorKind::InvalidArgument, "Fisher information needs at least one anchor");
  }
  const Eigen::Matrix2d f = i_v * (jac * jac.transpose());
  return Fim2(f);
}

Eigen::Matrix2d crb(const Fim2& f) {
  require_pd(f);
  const Eigen::Matrix2d inv = f.matrix().inverse();
  return 0.5 * (inv + inv.transpose());
}

double best_rmse(const Fim2& f) { return std::sqrt(crb(f).trace()); }

double chi2_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::DomainError, "alpha must lie in (0, 1)");
  }
  return -2.0 * std::log(alpha);
}

double ConfidenceEllipse::quadratic_form(const Vec2& p) const {
  const Vec2 d = p - center;
  return d.dot(fim.matrix() * d);
}

double ConfidenceEllipse::area() const {
  require_pd(fim);
  return std::numbers::pi * threshold / std::sqrt(fim.determinant());
}

std::array<Vec2, 2> ConfidenceEllipse::semi_axes() const {
  require_pd(fim);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(fim.matrix());
  Eigen::Matrix2d vecs = es.eigenvectors();
  // Keep a right-handed basis so the parametrization runs counterclockwise.
  if (vecs.determinant() < 0.0) vecs.col(1) = -vecs.col(1);
  // Largest eigenvalue -> shortest axis.
  const Vec2 minor = vecs.col(1) * std::sqrt(threshold / es.eigenvalues()[1]);
  const Vec2 major = vecs.col(0) * std::sqrt(threshold / es.eigenvalues()[0]);
  return {minor, major};
}

ConfidenceEllipse confidence_ellipse(const Vec2& center, const Fim2& f, double alpha) {
  require_pd(f);
  if (!center.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "ellipse center must be finite");
  }
  return ConfidenceEllipse{center, f, alpha, chi2_quantile(alpha)};
}

std::vector<Vec2> ellipse_boundary(const ConfidenceEllipse& e, std::size_t n_points) {
  if (n_points < 3) {
    throw Error(ErrorKind::InvalidArgument, "ellipse boundary needs at least 3 points");
  }
  require_pd(e.fim);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(e.fim.matrix());
  Eigen::Matrix2d vecs = es.eigenvectors();
  if (vecs.determinant() < 0.0) vecs.col(1) = -vecs.col(1);
  const double a = std::sqrt(e.threshold / es.eigenvalues()[0]);
  const double b = std::sqrt(e.threshold / es.eigenvalues()[1]);

  std::vector<Vec2> pts;
  pts.reserve(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_points);
    pts.push_back(e.center + vecs.col(0) * (a * std::cos(t)) + vecs.col(1) * (b * std::sin(t)));
  }
  return pts;
}

bool contains(const ConfidenceEllipse& e, const Vec2& point) {
  return e.quadratic_form(point) <= e.threshold * (1.0 + kBoundarySlack);
}

}  // namespace crbgate
