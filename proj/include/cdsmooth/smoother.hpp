#pragma once

#include <span>
#include <vector>

#include "cdsmooth/filter.hpp"

namespace cdsmooth {

/// Formulation of the backward smoothing pass.
///
/// TypeIStar: backward ODE re-linearized at the current smoothing moments.
/// TypeII: backward ODE driven by the filter linearization.
/// TypeIII: forward gain H' = H·Aᵀ with discrete corrections; no backward ODE.
enum class SmootherType { TypeIStar, TypeII, TypeIII };

const char* to_string(SmootherType type);

/// Smoothing moments (x̂, Ω) on every mesh node.
struct SmoothTrajectory {
  std::vector<double> times;
  std::vector<GaussianMarginal> smoothed;
  SmootherType type = SmootherType::TypeII;
  DiffusionKind kind = DiffusionKind::First;
  int iteration = 0;
  /// Nodes where a filter covariance needed diagonal jitter to be factorized.
  std::vector<std::size_t> jittered_nodes;
};

/// Gain of one Type III step: H = Σ(t_l)·Φᵀ, G = H·Σ⁻¹(t⁻_{l+1}).
struct GainSegment {
  Matrix H;
  Matrix G;
};

/// Gain of the forward-ODE formulation across one frozen-coefficient step with
/// transition matrix `transition` (the value of exp(A·δt)).
GainSegment type3_gain(const GaussianMarginal& filtered_left, const Matrix& transition,
                       const GaussianMarginal& predicted_right, std::ptrdiff_t node = -1);

/// Linear smoothing ODEs
///   x̂' = A x̂ + b + Q̄ Σ⁻¹ (x̂ − x̄)
///   Ω' = (A + Q̄Σ⁻¹) Ω + Ω (A + Q̄Σ⁻¹)ᵀ − Q̄
/// integrated backward with RK4 on the mesh. `drifts` gives (A, b, Q̄) per
/// substep; filter moments inside a substep come from exact half-step
/// propagation under the filter's own frozen linearization.
SmoothTrajectory smooth_linear(const FilterTrajectory& ft, std::span<const LinearDrift> drifts);

/// Type I*: backward RK4 where 𝔼[μ], ℂ[μ,X] and Q̄ are recomputed at every
/// stage from the current smoothing moments.
SmoothTrajectory smooth_type1star(const FilterTrajectory& ft, const ModelSpec& model,
                                  DiffusionKind kind, const MomentApproximator& approx);

/// Type II with the regression recomputed at the stored filter moments of the
/// left node of each substep.
SmoothTrajectory smooth_type2(const FilterTrajectory& ft, const ModelSpec& model,
                              DiffusionKind kind, const MomentApproximator& approx);

/// Type II driven by given per-substep linearizations. Inside a substep the
/// filter statistics are 𝔼[μ] = A x̄ + b and ℂ[μ,X] = A Σ.
SmoothTrajectory smooth_type2(const FilterTrajectory& ft, std::span<const LinearDrift> drifts);

/// Type III using the transitions recorded by the filter.
SmoothTrajectory smooth_type3(const FilterTrajectory& ft);

/// Type III with transitions exp(A·δt) recomputed from `drifts`.
SmoothTrajectory smooth_type3(const FilterTrajectory& ft, std::span<const LinearDrift> drifts);

}  // namespace cdsmooth
