#pragma once

#include "cdsmooth/gaussian.hpp"
#include "cdsmooth/model.hpp"

namespace cdsmooth {

/// Which effective diffusion a statistical linear regression of the SDE uses.
///
/// First: Q̄ = 𝔼[σσᵀ] (limit of discrete-time regression).
/// Second: Q̄ = 𝔼[σ]𝔼[σ]ᵀ (minimizer of the integrated squared-error functional).
enum class DiffusionKind { First = 1, Second = 2 };

const char* to_string(DiffusionKind kind);

/// Affine drift A·x + b with effective diffusion Q̄, frozen on one mesh substep.
/// Only Q̄ = σ̄σ̄ᵀ is kept; the square root is never needed downstream.
struct LinearDrift {
  Matrix A;
  Vector b;
  Matrix Qbar;
  DiffusionKind kind = DiffusionKind::First;
};

/// Affine measurement C·x + d with residual covariance Δ (which includes R).
struct LinearMeasurement {
  Matrix C;
  Vector d;
  Matrix Delta;
};

/// Gaussian statistics of the drift and diffusion under one marginal.
struct DriftStatistics {
  Vector mean;   ///< 𝔼[μ]
  Matrix cross;  ///< ℂ[X, μ], d × d
  Matrix Qbar;   ///< effective diffusion per kind
};

/// 𝔼[μ], ℂ[X,μ] and Q̄ under `g`.
DriftStatistics drift_statistics(const ModelSpec& model, const GaussianMarginal& g, double t,
                                 DiffusionKind kind, const MomentApproximator& approx);

/// Statistical linear regression of drift and diffusion with respect to `g`:
/// A = ℂ[μ,X]𝕍[X]⁻¹, b = 𝔼[μ] − A𝔼[X], Q̄ per `kind`.
LinearDrift slr_drift(const ModelSpec& model, const GaussianMarginal& g, double t,
                      DiffusionKind kind, const MomentApproximator& approx);

/// Statistical linear regression of the measurement function with respect to `g`:
/// C = ℂ[h,X]𝕍[X]⁻¹, d = 𝔼[h] − C𝔼[X], Δ = 𝕍[h] + R − C𝕍[X]Cᵀ.
///
/// Angular channels are unwrapped around h(mean) before the moments are taken.
LinearMeasurement slr_measurement(const ModelSpec& model, const GaussianMarginal& g,
                                  double t, const MomentApproximator& approx);

/// tr 𝔼[σσᵀ] − tr 𝔼[σ]𝔼[σ]ᵀ under `g`; nonnegative by Jensen's inequality.
double trace_gap(const ModelSpec& model, const GaussianMarginal& g, double t,
                 const MomentApproximator& approx);

}  // namespace cdsmooth
