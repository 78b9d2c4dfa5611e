#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cdsmooth/discretize.hpp"
#include "cdsmooth/linearize.hpp"
#include "cdsmooth/model.hpp"

namespace cdsmooth {

struct KalmanUpdateReport {
  Matrix S;           ///< innovation covariance
  Matrix K;           ///< gain
  Vector innovation;  ///< y − C·x̄⁻ − d, angular channels wrapped
  double loglik_term = 0.0;
};

/// Discrete Kalman update of a predicted marginal with an affine measurement.
///
/// Innovation components listed in `angular_channels` are wrapped to (−π, π].
/// Throws DegenerateInnovation if S is not positive definite after flooring.
std::pair<GaussianMarginal, KalmanUpdateReport> kalman_update(
    const GaussianMarginal& predicted, const LinearMeasurement& lm, const Vector& y,
    std::span<const int> angular_channels = {});

/// Where the filter takes its linearizations from.
///
/// On the fly: drift regression at the current filter moments of every
/// substep, measurement regression at the predicted moments of every update.
/// Provided: fixed per-substep drifts and per-measurement linearizations
/// (the purely linear filter used inside the iteration).
class LinearizationSource {
 public:
  static LinearizationSource on_the_fly() { return {}; }
  static LinearizationSource provided(std::span<const LinearDrift> drifts,
                                      std::span<const LinearMeasurement> measurements = {}) {
    LinearizationSource s;
    s.provided_ = true;
    s.drifts_ = drifts;
    s.measurements_ = measurements;
    return s;
  }

  bool is_provided() const noexcept { return provided_; }
  std::span<const LinearDrift> drifts() const noexcept { return drifts_; }
  std::span<const LinearMeasurement> measurements() const noexcept { return measurements_; }

 private:
  bool provided_ = false;
  std::span<const LinearDrift> drifts_;
  std::span<const LinearMeasurement> measurements_;
};

/// Result of predicting across consecutive substeps.
struct IntervalPrediction {
  std::vector<GaussianMarginal> moments;    ///< one per substep end node
  std::vector<LinearDrift> drifts;          ///< drift used on each substep
  std::vector<DiscreteAffine> transitions;  ///< its zero-order-hold transition
};

/// Predicts from node `first` to node `last` of `mesh`, starting from `g` at
/// node `first`. With a provided source, `source.drifts()` is indexed by
/// global substep number.
IntervalPrediction predict_interval(const GaussianMarginal& g, const ModelSpec& model,
                                    const Mesh& mesh, std::size_t first, std::size_t last,
                                    DiffusionKind kind, const MomentApproximator& approx,
                                    const LinearizationSource& source);

/// Filter moments on the whole mesh plus the linearizations that produced them.
struct FilterTrajectory {
  std::vector<double> times;
  std::vector<GaussianMarginal> predicted;  ///< x̄(t⁻), Σ(t⁻)
  std::vector<GaussianMarginal> updated;    ///< x̄(t), Σ(t); equal to predicted off measurement nodes
  std::vector<LinearDrift> drifts;          ///< per substep
  std::vector<DiscreteAffine> transitions;  ///< per substep
  std::vector<LinearMeasurement> measurement_linearizations;  ///< per measurement
  std::vector<KalmanUpdateReport> reports;                    ///< per measurement
  DiffusionKind kind = DiffusionKind::First;

  std::size_t num_nodes() const noexcept { return times.size(); }
};

/// Continuous-discrete Gaussian filter from the model prior over `mesh`.
/// `measurements[k]` is the observation at `mesh.measurement_times()[k]`.
FilterTrajectory run_filter(const ModelSpec& model, const Mesh& mesh,
                            std::span<const Vector> measurements, DiffusionKind kind,
                            const MomentApproximator& approx,
                            const LinearizationSource& source = LinearizationSource::on_the_fly());

}  // namespace cdsmooth
