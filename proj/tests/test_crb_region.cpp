#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "crbgate/crb_region.hpp"
#include "crbgate/errors.hpp"
#include "oracles.hpp"

using namespace crbgate;

namespace {

Fim2 diag(double a, double c) { return Fim2((Eigen::Matrix2d() << a, 0, 0, c).finished()); }

Fim2 sym(double a, double b, double c) { return Fim2((Eigen::Matrix2d() << a, b, b, c).finished()); }

std::vector<Anchor> square(double half = 5.0) {
  return {{"a", Vec3(-half, -half, 0), -45, -2},
          {"b", Vec3(half, -half, 0), -45, -2},
          {"c", Vec3(half, half, 0), -45, -2},
          {"d", Vec3(-half, half, 0), -45, -2}};
}

}  // namespace

TEST(Fim, MatchesOuterProductLoop) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const auto anchors = oracle::random_anchors(rng, 6);
    const TargetState t{Vec2(0.3, -0.2), 0.0};
    const double i_v = 1.0 / 9.0;
    const Fim2 f = fim(jacobian(anchors, t), i_v);
    std::vector<std::array<double, 2>> grads;
    for (const auto& a : anchors) {
      const double dx = t.xy.x() - a.position.x(), dy = t.xy.y() - a.position.y(), dz = -a.position.z();
      const double d2 = dx * dx + dy * dy + dz * dz;
      const double s = 10.0 / std::log(10.0) * a.path_loss_b / d2;
      grads.push_back({s * dx, s * dy});
    }
    const auto ref = oracle::fim_sum(grads, i_v);
    const double scale = std::abs(ref.a) + std::abs(ref.c);
    EXPECT_NEAR(f.matrix()(0, 0), ref.a, 1e-12 * scale);
    EXPECT_NEAR(f.matrix()(0, 1), ref.b, 1e-12 * scale);
    EXPECT_NEAR(f.matrix()(1, 0), ref.b, 1e-12 * scale);
    EXPECT_NEAR(f.matrix()(1, 1), ref.c, 1e-12 * scale);
  }
}

TEST(Fim, ScalesLinearlyWithNoiseInformation) {
  const Jacobian j = jacobian(square(), {Vec2(1, 2)});
  const Fim2 f1 = fim(j, 1.0);
  const Fim2 f4 = fim(j, 4.0);
  EXPECT_TRUE(f4.matrix().isApprox(4.0 * f1.matrix(), 1e-14));
  EXPECT_NEAR(best_rmse(f4), best_rmse(f1) / 2.0, 1e-12);
}

TEST(Fim, AddingAnchorNeverIncreasesBound) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    auto anchors = oracle::random_anchors(rng, 4);
    const TargetState t{Vec2(0.5, 0.5), 0.0};
    const Fim2 before = fim(jacobian(anchors, t), 1.0);
    if (!before.is_positive_definite()) continue;
    anchors.push_back(oracle::random_anchors(rng, 1).front());
    anchors.back().id = "extra";
    const Fim2 after = fim(jacobian(anchors, t), 1.0);
    EXPECT_LE(best_rmse(after), best_rmse(before) * (1 + 1e-12));
  }
}

TEST(Fim, SymmetricSquareIsIsotropic) {
  const Fim2 f = fim(jacobian(square(), {Vec2(0, 0)}), 1.0);
  EXPECT_NEAR(f.matrix()(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(f.matrix()(0, 0), f.matrix()(1, 1), 1e-14);
}

TEST(Fim, RejectsAsymmetricOrIndefinite) {
  EXPECT_THROW(Fim2((Eigen::Matrix2d() << 1, 0.5, 0, 1).finished()), Error);
  EXPECT_THROW(sym(1, 0, -1), Error);
  EXPECT_NO_THROW(sym(1, 1, 1));  // PSD, singular
}

TEST(Fim, EigenvaluesMatchClosedForm) {
  const Fim2 f = sym(3.0, 1.2, 0.7);
  const auto ref = oracle::eig2({3.0, 1.2, 0.7});
  const auto ev = f.eigenvalues();
  EXPECT_NEAR(ev[0], ref[0], 1e-14);
  EXPECT_NEAR(ev[1], ref[1], 1e-14);
}

TEST(Crb, InverseOfDiagonalAndAdjugate) {
  const auto c = crb(diag(4.0, 1.0 / 9.0));
  EXPECT_DOUBLE_EQ(c(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(c(1, 1), 9.0);
  EXPECT_DOUBLE_EQ(best_rmse(diag(4.0, 1.0 / 9.0)), std::sqrt(9.25));

  const auto inv = oracle::inv2({2.0, 0.3, 1.5});
  const auto c2 = crb(sym(2.0, 0.3, 1.5));
  EXPECT_NEAR(c2(0, 0), inv.a, 1e-14);
  EXPECT_NEAR(c2(0, 1), inv.b, 1e-14);
  EXPECT_NEAR(c2(1, 1), inv.c, 1e-14);
}

TEST(Crb, CollinearAnchorsAreSingular) {
  // Anchors and target on the x axis: every gradient has zero y component.
  const std::vector<Anchor> line{{"a", Vec3(-5, 0, 0), -45, -2},
                                 {"b", Vec3(3, 0, 0), -45, -2},
                                 {"c", Vec3(9, 0, 0), -45, -2}};
  const Fim2 f = fim(jacobian(line, {Vec2(0, 0)}), 1.0);
  EXPECT_FALSE(f.is_positive_definite());
  try {
    crb(f);
    FAIL();
  } catch (const SingularFimError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularFim);
    EXPECT_NEAR(e.eigenvalues()[0], 0.0, 1e-12);
    EXPECT_GT(e.eigenvalues()[1], 0.0);
  }
  EXPECT_THROW(best_rmse(f), SingularFimError);
  EXPECT_THROW(confidence_ellipse(Vec2::Zero(), f, 0.05), SingularFimError);
}

TEST(Crb, PdThresholdIsRelativeToTrace) {
  EXPECT_FALSE(diag(1.0, 1e-11).is_positive_definite());
  EXPECT_TRUE(diag(1.0, 1e-9).is_positive_definite());
  EXPECT_TRUE(diag(1e-20, 1e-20).is_positive_definite());
}

TEST(Chi2, ClosedFormValues) {
  EXPECT_NEAR(chi2_quantile(0.05), 5.991464547107979, 1e-12);
  EXPECT_NEAR(chi2_quantile(std::exp(-1.0)), 2.0, 1e-12);
  EXPECT_NEAR(chi2_quantile(0.01), 9.210340371976184, 1e-12);
}

TEST(Chi2, MatchesBisectionOfSurvivalFunction) {
  // 2-dof survival function exp(-x/2), inverted numerically.
  for (double alpha : {0.001, 0.05, 0.1, 0.5, 0.9, 0.999}) {
    const double x = oracle::bisect([alpha](double v) { return std::exp(-v / 2) - alpha; }, 0.0, 100.0);
    EXPECT_NEAR(chi2_quantile(alpha), x, 1e-9);
  }
}

TEST(Chi2, RejectsOutOfRange) {
  for (double alpha : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
    try {
      chi2_quantile(alpha);
      FAIL() << alpha;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DomainError);
    }
  }
}

TEST(Ellipse, AreaAndAxesForDiagonalFim) {
  const auto e = confidence_ellipse(Vec2(1, 2), diag(4.0, 1.0), 0.05);
  const double q = chi2_quantile(0.05);
  EXPECT_NEAR(e.area(), std::numbers::pi * q / 2.0, 1e-12);
  const auto axes = e.semi_axes();
  EXPECT_NEAR(axes[0].norm(), std::sqrt(q / 4.0), 1e-12);  // minor along x
  EXPECT_NEAR(std::abs(axes[0].x()), axes[0].norm(), 1e-12);
  EXPECT_NEAR(axes[1].norm(), std::sqrt(q), 1e-12);
}

TEST(Ellipse, BoundaryPointsLieOnLevelSet) {
  const auto e = confidence_ellipse(Vec2(-3, 7), sym(2.0, 0.8, 0.9), 0.1);
  const auto pts = ellipse_boundary(e, 200);
  ASSERT_EQ(pts.size(), 200u);
  for (const auto& p : pts) {
    EXPECT_NEAR(e.quadratic_form(p), e.threshold, 1e-12 * e.threshold);
    EXPECT_TRUE(contains(e, p));
  }
}

TEST(Ellipse, BoundaryIsCounterclockwiseAndPolygonAreaConverges) {
  const auto e = confidence_ellipse(Vec2(0, 0), sym(1.0, -0.4, 3.0), 0.05);
  const auto poly = ellipse_boundary(e, 4096);
  const double a = oracle::shoelace(poly);
  EXPECT_GT(a, 0.0);
  EXPECT_NEAR(a, e.area(), 1e-5 * e.area());
}

TEST(Ellipse, AreaShrinksWithAlphaGrowth) {
  const Fim2 f = sym(2.0, 0.1, 1.0);
  double last = std::numeric_limits<double>::infinity();
  for (double alpha : {0.01, 0.05, 0.1, 0.3, 0.6}) {
    const double area = confidence_ellipse(Vec2::Zero(), f, alpha).area();
    EXPECT_LT(area, last);
    last = area;
  }
}

TEST(Ellipse, ContainsCenterNotFarPoint) {
  const auto e = confidence_ellipse(Vec2(5, 5), diag(1.0, 1.0), 0.05);
  EXPECT_TRUE(contains(e, Vec2(5, 5)));
  EXPECT_TRUE(contains(e, Vec2(5 + 2.4, 5)));
  EXPECT_FALSE(contains(e, Vec2(5 + 2.5, 5)));
}

TEST(Ellipse, RejectsTooFewPoints) {
  const auto e = confidence_ellipse(Vec2::Zero(), diag(1, 1), 0.05);
  EXPECT_THROW(ellipse_boundary(e, 2), Error);
  EXPECT_NO_THROW(ellipse_boundary(e, 3));
}
