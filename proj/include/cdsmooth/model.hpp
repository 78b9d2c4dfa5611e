#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cdsmooth/gaussian.hpp"

namespace cdsmooth {

using TimeVectorFunction = std::function<Vector(double, const Vector&)>;
using TimeMatrixFunction = std::function<Matrix(double, const Vector&)>;

/// Discretely observed SDE
///   dX = μ(t, X) dt + σ(t, X) dW,   Y(t_k) = h(t_k, X(t_k)) + V(t_k),  V ~ N(0, R).
struct ModelSpec {
  std::string name;
  int state_dim = 0;
  int noise_dim = 0;
  int meas_dim = 0;

  TimeVectorFunction drift;       ///< μ(t, x) ∈ ℝ^d
  TimeMatrixFunction diffusion;   ///< σ(t, x) ∈ ℝ^{d×d_W}
  TimeVectorFunction measurement; ///< h(t, x) ∈ ℝ^{d_Y}
  Matrix meas_noise;              ///< R
  GaussianMarginal prior;         ///< (x̄(0⁻), Σ(0⁻))

  /// Measurement components holding angles; innovations on these are wrapped to (−π, π].
  std::vector<int> angular_channels;

  /// σ does not depend on the state, so 𝔼[σσᵀ] = 𝔼[σ]𝔼[σ]ᵀ = σσᵀ exactly.
  bool state_independent_diffusion = false;

  /// Optional analytic Jacobians; empty means finite differences.
  TimeMatrixFunction drift_jacobian;
  TimeMatrixFunction meas_jacobian;

  /// Checks dimensional consistency of all callables at the prior mean and
  /// that R is symmetric positive definite. Throws InvalidArgument.
  void validate() const;
};

/// Wraps an angle to (−π, π].
double wrap_angle(double a);

}  // namespace cdsmooth
