#include "cdsmooth/discretize.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace cdsmooth {

Mesh::Mesh(std::vector<double> measurement_times, int substeps, double horizon)
    : measurement_times_(std::move(measurement_times)), substeps_(substeps) {
  if (substeps_ < 1) throw InvalidArgument("Mesh: substeps must be >= 1");
  for (std::size_t k = 0; k < measurement_times_.size(); ++k) {
    const double t = measurement_times_[k];
    if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("Mesh: invalid measurement time");
    if (k > 0 && !(t > measurement_times_[k - 1])) {
      throw InvalidArgument("Mesh: measurement times must be strictly increasing");
    }
  }

  nodes_.push_back(0.0);
  node_to_measurement_.push_back(-1);
  auto add_interval = [&](double t0, double t1) {
    for (int i = 1; i <= substeps_; ++i) {
      const double t = (i == substeps_) ? t1 : t0 + (t1 - t0) * i / substeps_;
      nodes_.push_back(t);
      node_to_measurement_.push_back(-1);
    }
  };

  if (measurement_times_.empty()) {
    if (!(horizon > 0.0)) throw InvalidArgument("Mesh: empty mesh needs a positive horizon");
    add_interval(0.0, horizon);
    return;
  }
  double previous = 0.0;
  for (std::size_t k = 0; k < measurement_times_.size(); ++k) {
    const double t = measurement_times_[k];
    if (t > previous) add_interval(previous, t);
    measurement_nodes_.push_back(nodes_.size() - 1);
    node_to_measurement_.back() = static_cast<long>(k);
    previous = t;
  }
  if (horizon > previous) add_interval(previous, horizon);
}

DiscreteAffine zoh_discretize(const LinearDrift& drift, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("zoh_discretize: dt must be positive");
  const Eigen::Index d = drift.A.rows();
  Matrix block = Matrix::Zero(2 * d + 1, 2 * d + 1);
  block.topLeftCorner(d, d) = drift.A;
  block.block(0, d, d, d) = drift.Qbar;
  block.block(d, d, d, d) = -drift.A.transpose();
  block.block(0, 2 * d, d, 1) = drift.b;
  block *= dt;
  const Matrix expm = block.exp();
  if (!expm.allFinite()) throw NumericalFault("zoh_discretize: non-finite matrix exponential");

  DiscreteAffine out;
  out.F = expm.topLeftCorner(d, d);
  out.u = expm.block(0, 2 * d, d, 1);
  out.Qd = symmetrize_psd(expm.block(0, d, d, d) * out.F.transpose());
  return out;
}

GaussianMarginal propagate_moments(const GaussianMarginal& g, const DiscreteAffine& step) {
  Vector mean = step.F * g.mean() + step.u;
  Matrix cov = symmetrize(step.F * g.cov() * step.F.transpose() + step.Qd);
  if (!mean.allFinite() || !cov.allFinite()) {
    throw NumericalFault("propagate_moments: non-finite propagation");
  }
  return GaussianMarginal(std::move(mean), cov);
}

}  // namespace cdsmooth
