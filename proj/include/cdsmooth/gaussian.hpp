#pragma once

#include <functional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "cdsmooth/errors.hpp"

namespace cdsmooth {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// (M + Mᵀ) / 2.
inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Symmetrizes `m` and clips negative eigenvalues to zero.
///
/// The eigendecomposition is only taken when a Cholesky factorization of the
/// symmetric part fails, so well-conditioned inputs come back unchanged apart
/// from the symmetrization.
Matrix symmetrize_psd(const Matrix& m);

/// Cholesky factor of a symmetric matrix together with the diagonal jitter
/// that had to be added for the factorization to succeed.
struct JitteredCholesky {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;

  template <typename Rhs>
  typename Rhs::PlainObject solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    return llt.solve(rhs);
  }
  Matrix lower() const { return llt.matrixL(); }
};

/// Cholesky with the library-wide jitter schedule: on failure add
/// 1e-12·tr(M)/d to the diagonal and retry up to 6 times, doubling the jitter.
///
/// Throws DegenerateCovariance when every attempt fails.
JitteredCholesky robust_cholesky(const Matrix& m, std::ptrdiff_t node = -1);

/// Mean and covariance of a Gaussian state marginal.
///
/// The covariance is passed through symmetrize_psd on construction, so an
/// instance is always symmetric positive semidefinite.
class GaussianMarginal {
 public:
  GaussianMarginal() = default;
  GaussianMarginal(Vector mean, const Matrix& cov);

  const Vector& mean() const noexcept { return mean_; }
  const Matrix& cov() const noexcept { return cov_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

 private:
  Vector mean_;
  Matrix cov_;
};

struct WeightedPoint {
  double weight;
  Vector point;
};

/// Spherical-radial cubature points: mean ± √d·Lⱼ with equal weights 1/(2d).
///
/// A zero covariance yields 2d copies of the mean.
std::vector<WeightedPoint> cubature_points(const GaussianMarginal& g);

using VectorFunction = std::function<Vector(const Vector&)>;
using JacobianFunction = std::function<Matrix(const Vector&)>;

/// Gaussian moments of y = f(x), x ~ g.
struct Moments {
  Vector mean;   ///< 𝔼[f]
  Matrix cross;  ///< ℂ[x, f], dim(x) × dim(f)
  Matrix cov;    ///< 𝕍[f]
};

/// Central finite-difference Jacobian with step 1e-6·(1 + |xᵢ|).
Matrix numerical_jacobian(const VectorFunction& f, const Vector& x);

enum class ApproximatorKind { Cubature, Taylor1 };

/// Pluggable approximation of Gaussian expectations.
///
/// Cubature uses the 2d-point spherical-radial rule. Taylor1 linearizes at the
/// mean; its Jacobian comes from the caller if one is supplied, otherwise from
/// numerical_jacobian. Instances are stateless.
class MomentApproximator {
 public:
  constexpr MomentApproximator() = default;
  constexpr explicit MomentApproximator(ApproximatorKind kind) : kind_(kind) {}

  static constexpr MomentApproximator cubature() {
    return MomentApproximator(ApproximatorKind::Cubature);
  }
  static constexpr MomentApproximator taylor1() {
    return MomentApproximator(ApproximatorKind::Taylor1);
  }

  ApproximatorKind kind() const noexcept { return kind_; }

  /// Evaluation points for expectations of non-differentiated quantities.
  /// Cubature: the cubature rule. Taylor1: the mean with weight 1.
  std::vector<WeightedPoint> points(const GaussianMarginal& g) const;

  /// 𝔼[f], ℂ[x,f], 𝕍[f]. Throws NumericalFault on a non-finite evaluation.
  Moments moments(const VectorFunction& f, const GaussianMarginal& g,
                  const JacobianFunction& jacobian = {}) const;

 private:
  ApproximatorKind kind_ = ApproximatorKind::Cubature;
};

const char* to_string(ApproximatorKind kind);

}  // namespace cdsmooth
