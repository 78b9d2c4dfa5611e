#include "cdsmooth/filter.hpp"

#include <cmath>
#include <numbers>

namespace cdsmooth {

std::pair<GaussianMarginal, KalmanUpdateReport> kalman_update(
    const GaussianMarginal& predicted, const LinearMeasurement& lm, const Vector& y,
    std::span<const int> angular_channels) {
  const Matrix& P = predicted.cov();
  const Matrix PCt = P * lm.C.transpose();

  KalmanUpdateReport report;
  report.S = symmetrize(lm.C * PCt + lm.Delta);

  Eigen::LLT<Matrix> llt(report.S);
  if (llt.info() != Eigen::Success) {
    Matrix floored = report.S;
    const double dy = static_cast<double>(report.S.rows());
    floored.diagonal().array() += 1e-12 * report.S.trace() / dy;
    llt.compute(floored);
    if (llt.info() != Eigen::Success || !(report.S.trace() > 0.0)) {
      throw DegenerateInnovation("innovation covariance is not positive definite");
    }
    report.S = floored;
  }

  report.innovation = y - lm.C * predicted.mean() - lm.d;
  for (int c : angular_channels) report.innovation[c] = wrap_angle(report.innovation[c]);

  report.K = llt.solve(PCt.transpose()).transpose();
  Vector mean = predicted.mean() + report.K * report.innovation;
  Matrix cov = symmetrize(P - report.K * report.S * report.K.transpose());

  const Vector whitened = llt.matrixL().solve(report.innovation);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  report.loglik_term = -0.5 * (whitened.squaredNorm() + log_det +
                               static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi));

  return {GaussianMarginal(std::move(mean), cov), std::move(report)};
}

IntervalPrediction predict_interval(const GaussianMarginal& g, const ModelSpec& model,
                                    const Mesh& mesh, std::size_t first, std::size_t last,
                                    DiffusionKind kind, const MomentApproximator& approx,
                                    const LinearizationSource& source) {
  if (first > last || last >= mesh.num_nodes()) {
    throw InvalidArgument("predict_interval: node range outside the mesh");
  }
  if (source.is_provided() && source.drifts().size() < last) {
    throw InvalidArgument("predict_interval: provided drifts do not cover the interval");
  }
  IntervalPrediction out;
  const std::size_t n = last - first;
  out.moments.reserve(n);
  out.drifts.reserve(n);
  out.transitions.reserve(n);

  GaussianMarginal current = g;
  for (std::size_t s = first; s < last; ++s) {
    const double t = mesh.nodes()[s];
    LinearDrift drift = source.is_provided() ? source.drifts()[s]
                                             : slr_drift(model, current, t, kind, approx);
    DiscreteAffine step = zoh_discretize(drift, mesh.substep_width(s));
    current = propagate_moments(current, step);
    out.moments.push_back(current);
    out.drifts.push_back(std::move(drift));
    out.transitions.push_back(std::move(step));
  }
  return out;
}

FilterTrajectory run_filter(const ModelSpec& model, const Mesh& mesh,
                            std::span<const Vector> measurements, DiffusionKind kind,
                            const MomentApproximator& approx, const LinearizationSource& source) {
  if (measurements.size() != mesh.num_measurements()) {
    throw InvalidArgument("run_filter: measurement count does not match the mesh");
  }
  if (source.is_provided() && source.measurements().size() != mesh.num_measurements()) {
    throw InvalidArgument("run_filter: provided measurement linearizations do not match the mesh");
  }

  FilterTrajectory ft;
  ft.kind = kind;
  ft.times = mesh.nodes();
  const std::size_t nodes = mesh.num_nodes();
  ft.predicted.reserve(nodes);
  ft.updated.reserve(nodes);
  ft.drifts.reserve(mesh.num_substeps());
  ft.transitions.reserve(mesh.num_substeps());

  auto update_at = [&](std::size_t node, const GaussianMarginal& pred) {
    const auto k = mesh.measurement_at(node);
    if (!k) return pred;
    const LinearMeasurement lm = source.is_provided()
                                     ? source.measurements()[*k]
                                     : slr_measurement(model, pred, ft.times[node], approx);
    auto [post, report] = kalman_update(pred, lm, measurements[*k], model.angular_channels);
    ft.measurement_linearizations.push_back(lm);
    ft.reports.push_back(std::move(report));
    return post;
  };

  ft.predicted.push_back(model.prior);
  ft.updated.push_back(update_at(0, model.prior));

  // Predict and update one measurement interval at a time.
  std::size_t node = 0;
  while (node + 1 < nodes) {
    std::size_t next = node + 1;
    while (next + 1 < nodes && !mesh.measurement_at(next)) ++next;
    IntervalPrediction pred =
        predict_interval(ft.updated.back(), model, mesh, node, next, kind, approx, source);
    for (std::size_t i = 0; i < pred.moments.size(); ++i) {
      const std::size_t at = node + 1 + i;
      ft.predicted.push_back(pred.moments[i]);
      ft.updated.push_back(at == next ? update_at(at, pred.moments[i]) : pred.moments[i]);
    }
    std::move(pred.drifts.begin(), pred.drifts.end(), std::back_inserter(ft.drifts));
    std::move(pred.transitions.begin(), pred.transitions.end(),
              std::back_inserter(ft.transitions));
    node = next;
  }
  return ft;
}

}  // namespace cdsmooth
