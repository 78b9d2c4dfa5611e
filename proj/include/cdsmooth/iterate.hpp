#pragma once

#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "cdsmooth/smoother.hpp"

namespace cdsmooth {

struct IterationConfig {
  int max_iters = 4;
  double tol = 1e-6;
  SmootherType smoother_type = SmootherType::TypeIII;
  DiffusionKind kind = DiffusionKind::First;
  MomentApproximator approx = MomentApproximator::cubature();
  /// Growth of delta by more than this factor on two consecutive iterations
  /// (while above tol) is reported as divergence.
  double divergence_factor = 10.0;

  void validate() const;
};

/// One iterate of the posterior-linearization loop.
struct IterationState {
  int j = 0;
  std::vector<LinearDrift> drifts;             ///< per substep, used by this iterate's filter
  std::vector<LinearMeasurement> meas;         ///< per measurement, used by this iterate's filter
  FilterTrajectory filter;
  SmoothTrajectory smooth;
  /// Max over nodes of ‖Δx̂‖∞ and ‖ΔΩ‖_F/‖Ω_prev‖_F; +∞ for the initialization.
  double delta = std::numeric_limits<double>::infinity();
  /// Consecutive iterations whose delta grew by more than the divergence factor.
  int growth_streak = 0;
};

/// Raised when the iteration diverges; carries every iterate computed so far.
class Diverged : public Error {
 public:
  Diverged(const std::string& what, std::vector<IterationState> partial)
      : Error(what),
        partial_(std::make_shared<const std::vector<IterationState>>(std::move(partial))) {}

  const std::vector<IterationState>& partial() const noexcept { return *partial_; }

 private:
  std::shared_ptr<const std::vector<IterationState>> partial_;
};

/// Change between two smoothing trajectories on the same mesh.
double smoothing_delta(const SmoothTrajectory& previous, const SmoothTrajectory& current);

/// j = 0: on-the-fly filter followed by the configured smoother under the
/// filter linearization.
IterationState init_iteration(const ModelSpec& model, const Mesh& mesh,
                              std::span<const Vector> measurements, const IterationConfig& cfg);

/// Re-linearizes drift, diffusion and measurements at the current smoothing
/// marginals, reruns the linear filter and the configured smoother.
/// Throws Diverged (with the previous state attached) per the growth rule.
IterationState iterate_once(const IterationState& state, const ModelSpec& model,
                            const Mesh& mesh, std::span<const Vector> measurements,
                            const IterationConfig& cfg);

/// Initialization followed by iterations until j = max_iters or delta < tol.
std::vector<IterationState> run_iterated(const ModelSpec& model, const Mesh& mesh,
                                         std::span<const Vector> measurements,
                                         const IterationConfig& cfg);

}  // namespace cdsmooth
