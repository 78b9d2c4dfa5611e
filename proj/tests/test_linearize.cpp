#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cdsmooth/linearize.hpp"
#include "cdsmooth/models.hpp"
#include "oracles.hpp"
#include "toy_models.hpp"

using namespace cdsmooth;

namespace {

const GaussianMarginal kStdNormal(Vector::Zero(1), Matrix::Identity(1, 1));

double identity(double x) { return x; }

}  // namespace

TEST(SlrDrift, AffineDriftConstantDiffusion) {
  Matrix F(2, 2);
  F << -1.0, 0.5, 0.2, -0.3;
  const Vector c = (Vector(2) << 0.4, -0.1).finished();
  Matrix S(2, 1);
  S << 0.3, 0.7;
  ModelSpec m;
  m.state_dim = 2;
  m.noise_dim = 1;
  m.drift = [&](double, const Vector& x) -> Vector { return F * x + c; };
  m.diffusion = [&](double, const Vector&) -> Matrix { return S; };
  Matrix P(2, 2);
  P << 2.0, 0.3, 0.3, 0.5;
  const GaussianMarginal g((Vector(2) << 1.0, -2.0).finished(), P);
  for (const auto kind : {DiffusionKind::First, DiffusionKind::Second}) {
    for (const auto approx : {MomentApproximator::cubature(), MomentApproximator::taylor1()}) {
      const LinearDrift ld = slr_drift(m, g, 0.0, kind, approx);
      EXPECT_LT((ld.A - F).norm(), 1e-7);
      EXPECT_LT((ld.b - c).norm(), 1e-7);
      EXPECT_LT((ld.Qbar - S * S.transpose()).norm(), 1e-12);
      EXPECT_EQ(ld.kind, kind);
    }
  }
}

TEST(SlrDrift, CubicUnderCubatureIsOne) {
  const ModelSpec m = toy::scalar([](double x) { return x * x * x; }, [](double) { return 1.0; },
                                  identity, 1.0, 0.0, 1.0);
  const LinearDrift ld = slr_drift(m, kStdNormal, 0.0, DiffusionKind::First,
                                   MomentApproximator::cubature());
  EXPECT_NEAR(ld.A(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(ld.b[0], 0.0, 1e-14);
}

TEST(SlrDrift, CubicUnderExactMomentsIsThree) {
  // Exact Gaussian regression coefficient for comparison with the two-point rule.
  const auto e = oracle::gh_expectation(
      [](const Eigen::VectorXd& x) {
        return (Eigen::VectorXd(2) << x[0] * x[0] * x[0], x[0] * x[0] * x[0] * x[0]).finished();
      },
      Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  EXPECT_NEAR(e[1] / 1.0, 3.0, 1e-12);  // A = ℂ[x³, x]/𝕍[x] = 𝔼x⁴
  EXPECT_NEAR(e[0], 0.0, 1e-12);        // b = 𝔼x³
}

TEST(SlrDrift, StateProportionalDiffusionKinds) {
  const ModelSpec m = toy::scalar([](double) { return 0.0; }, identity, identity, 1.0, 0.0, 1.0);
  const auto cub = MomentApproximator::cubature();
  EXPECT_NEAR(slr_drift(m, kStdNormal, 0.0, DiffusionKind::First, cub).Qbar(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(slr_drift(m, kStdNormal, 0.0, DiffusionKind::Second, cub).Qbar(0, 0), 0.0, 1e-15);
}

TEST(SlrDrift, Taylor1KindsCoincide) {
  const ModelSpec m = toy::scalar([](double x) { return std::sin(x); },
                                  [](double x) { return 1.0 + x * x; }, identity, 1.0, 0.0, 1.0);
  const GaussianMarginal g(Vector::Constant(1, 0.4), Matrix::Constant(1, 1, 0.7));
  const auto t1 = MomentApproximator::taylor1();
  const LinearDrift a = slr_drift(m, g, 0.0, DiffusionKind::First, t1);
  const LinearDrift b = slr_drift(m, g, 0.0, DiffusionKind::Second, t1);
  EXPECT_EQ(a.Qbar, b.Qbar);
  EXPECT_NEAR(a.Qbar(0, 0), std::pow(1.0 + 0.16, 2), 1e-14);
}

TEST(SlrDrift, MatchesLeastSquaresOnSamples) {
  // Regression coefficients minimize 𝔼(μ(X) − A X − b)²; compare with an
  // ordinary least-squares fit to Gaussian samples.
  const auto mu = [](double x) { return std::sin(2.0 * x) + 0.3 * x * x; };
  const double m0 = 0.3, p0 = 0.4;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z(m0, std::sqrt(p0));
  const int n = 100000;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) {
    const double x = z(rng);
    X(i, 0) = x;
    X(i, 1) = 1.0;
    Y[i] = mu(x);
  }
  const Eigen::Vector2d ls = X.colPivHouseholderQr().solve(Y);
  // Exact Gaussian regression, so only sampling error remains.
  const auto e = oracle::gh_expectation(
      [&](const Eigen::VectorXd& x) {
        return (Eigen::VectorXd(2) << mu(x[0]), (x[0] - m0) * mu(x[0])).finished();
      },
      Eigen::VectorXd::Constant(1, m0), Eigen::MatrixXd::Constant(1, 1, p0), 40);
  const double a = e[1] / p0;
  EXPECT_NEAR(ls[0], a, 1e-2);
  EXPECT_NEAR(ls[1], e[0] - a * m0, 1e-2);
}

TEST(SlrMeasurement, AffineIsExact) {
  Matrix H(2, 3);
  H << 1, 0, 2, 0, -1, 1;
  const Vector c = (Vector(2) << 3.0, -1.0).finished();
  ModelSpec m;
  m.state_dim = 3;
  m.meas_dim = 2;
  m.measurement = [&](double, const Vector& x) -> Vector { return H * x + c; };
  m.meas_noise = (Vector(2) << 0.5, 0.2).finished().asDiagonal();
  const GaussianMarginal g(Vector::Ones(3), 0.3 * Matrix::Identity(3, 3));
  const LinearMeasurement lm = slr_measurement(m, g, 0.0, MomentApproximator::cubature());
  EXPECT_LT((lm.C - H).norm(), 1e-12);
  EXPECT_LT((lm.d - c).norm(), 1e-12);
  EXPECT_LT((lm.Delta - m.meas_noise).norm(), 1e-12);
}

TEST(SlrMeasurement, SquareUnderCubature) {
  const ModelSpec m = toy::scalar([](double) { return 0.0; }, [](double) { return 1.0; },
                                  [](double x) { return x * x; }, 0.3, 0.0, 1.0);
  const LinearMeasurement lm = slr_measurement(m, kStdNormal, 0.0, MomentApproximator::cubature());
  EXPECT_NEAR(lm.C(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(lm.d[0], 1.0, 1e-15);
  EXPECT_NEAR(lm.Delta(0, 0), 0.3, 1e-15);
}

TEST(SlrMeasurement, ZeroCovarianceRaises) {
  const ModelSpec m = toy::scalar([](double) { return 0.0; }, [](double) { return 1.0; },
                                  identity, 0.3, 0.0, 1.0);
  const GaussianMarginal g(Vector::Zero(1), Matrix::Zero(1, 1));
  EXPECT_THROW(slr_measurement(m, g, 0.0, MomentApproximator::cubature()), DegenerateCovariance);
}

TEST(SlrMeasurement, DeltaDominatesR) {
  const models::CoordTurnParams p;
  const ModelSpec m = models::coordturn_model(p);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  for (int i = 0; i < 50; ++i) {
    Vector mean = m.prior.mean();
    for (int k = 0; k < 3; ++k) mean[k] += 500.0 * z(rng);
    const GaussianMarginal g(mean, m.prior.cov());
    const LinearMeasurement lm = slr_measurement(m, g, 0.0, MomentApproximator::cubature());
    const double lmin =
        Eigen::SelfAdjointEigenSolver<Matrix>(lm.Delta - m.meas_noise).eigenvalues().minCoeff();
    EXPECT_GE(lmin, -1e-8);
  }
}

TEST(SlrMeasurement, UnwrapsBearingAcrossBranchCut) {
  // Target straddling the negative x axis: bearings near ±π.
  const ModelSpec m = models::reentry_model();
  ModelSpec wrapped = m;
  wrapped.measurement = [](double, const Vector& u) {
    Vector y(2);
    y << std::hypot(u[0] - 6374.0, u[1]), std::atan2(u[1], u[0] - 6374.0);
    return y;
  };
  Vector mean = Vector::Zero(5);
  mean[0] = 6374.0 - 100.0;  // 100 km on the far side of the radar
  mean[1] = 0.0;
  Matrix cov = 1e-6 * Matrix::Identity(5, 5);
  cov(1, 1) = 4.0;  // ±2 km across the axis
  const GaussianMarginal g(mean, cov);
  const LinearMeasurement lm = slr_measurement(wrapped, g, 0.0, MomentApproximator::cubature());
  // Bearing ≈ π − y/100, so ∂bearing/∂y ≈ −1/100 and 𝔼 bearing ≈ ±π.
  EXPECT_NEAR(lm.C(1, 1), -0.01, 1e-4);
  EXPECT_NEAR(std::abs(lm.C(1, 1) * mean[1] + lm.d[1]), std::numbers::pi, 1e-3);
  EXPECT_LT(lm.Delta(1, 1), 1.7e-3 + 1e-6);
}

TEST(TraceGap, StateIndependentIsZero) {
  const ModelSpec m = models::reentry_model();
  EXPECT_EQ(trace_gap(m, m.prior, 0.0, MomentApproximator::cubature()), 0.0);
}

TEST(TraceGap, ProportionalDiffusion) {
  const ModelSpec m = toy::scalar([](double) { return 0.0; }, identity, identity, 1.0, 0.0, 1.0);
  EXPECT_NEAR(trace_gap(m, kStdNormal, 0.0, MomentApproximator::cubature()), 1.0, 1e-15);
  // Exact moments agree: 𝔼x² − (𝔼x)² = 1.
  const GaussianMarginal tight(Vector::Constant(1, 0.5), Matrix::Constant(1, 1, 1e-10));
  EXPECT_NEAR(trace_gap(m, tight, 0.0, MomentApproximator::cubature()), 0.0, 1e-9);
}
