#include "cdsmooth/linearize.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace cdsmooth {

namespace {

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalFault(std::string("non-finite ") + what);
}

// Cubature points built from an existing factor so the regression solve uses
// exactly the covariance the points represent.
std::vector<WeightedPoint> points_from_factor(const Vector& mean, const Matrix& lower) {
  const Eigen::Index d = mean.size();
  const double w = 1.0 / (2.0 * static_cast<double>(d));
  const Matrix scaled = std::sqrt(static_cast<double>(d)) * lower;
  std::vector<WeightedPoint> pts;
  pts.reserve(static_cast<std::size_t>(2 * d));
  for (Eigen::Index j = 0; j < d; ++j) pts.push_back({w, mean + scaled.col(j)});
  for (Eigen::Index j = 0; j < d; ++j) pts.push_back({w, mean - scaled.col(j)});
  return pts;
}

struct DiffusionMoments {
  Matrix second;  // 𝔼[σσᵀ]
  Matrix first;   // 𝔼[σ]
};

DiffusionMoments diffusion_moments(const ModelSpec& model, const std::vector<WeightedPoint>& pts,
                                   double t) {
  DiffusionMoments out;
  out.second = Matrix::Zero(model.state_dim, model.state_dim);
  out.first = Matrix::Zero(model.state_dim, model.noise_dim);
  for (const auto& p : pts) {
    const Matrix s = model.diffusion(t, p.point);
    check_finite(s, "diffusion value");
    out.second.noalias() += p.weight * s * s.transpose();
    out.first += p.weight * s;
  }
  return out;
}

Matrix effective_diffusion(const ModelSpec& model, const GaussianMarginal& g,
                           const std::vector<WeightedPoint>& pts, double t, DiffusionKind kind) {
  if (model.state_independent_diffusion) {
    const Matrix s = model.diffusion(t, g.mean());
    check_finite(s, "diffusion value");
    return symmetrize(s * s.transpose());
  }
  const DiffusionMoments dm = diffusion_moments(model, pts, t);
  if (kind == DiffusionKind::First) return symmetrize_psd(dm.second);
  return symmetrize_psd(dm.first * dm.first.transpose());
}

DriftStatistics drift_statistics_impl(const ModelSpec& model, const GaussianMarginal& g,
                                      double t, DiffusionKind kind,
                                      const MomentApproximator& approx,
                                      const JitteredCholesky& chol) {
  DriftStatistics out;
  if (approx.kind() == ApproximatorKind::Taylor1) {
    JacobianFunction jac;
    if (model.drift_jacobian) jac = [&](const Vector& x) { return model.drift_jacobian(t, x); };
    Moments m = approx.moments([&](const Vector& x) { return model.drift(t, x); }, g, jac);
    out.mean = std::move(m.mean);
    out.cross = std::move(m.cross);
    // Both kinds evaluate σ at the mean under a first-order expansion.
    const Matrix s = model.diffusion(t, g.mean());
    check_finite(s, "diffusion value");
    out.Qbar = symmetrize(s * s.transpose());
    return out;
  }

  const auto pts = points_from_factor(g.mean(), chol.lower());
  std::vector<Vector> values;
  values.reserve(pts.size());
  out.mean = Vector::Zero(model.state_dim);
  for (const auto& p : pts) {
    Vector v = model.drift(t, p.point);
    check_finite(v, "drift value");
    out.mean += p.weight * v;
    values.push_back(std::move(v));
  }
  out.cross = Matrix::Zero(g.dim(), model.state_dim);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.cross.noalias() +=
        pts[i].weight * (pts[i].point - g.mean()) * (values[i] - out.mean).transpose();
  }
  out.Qbar = effective_diffusion(model, g, pts, t, kind);
  return out;
}

}  // namespace

const char* to_string(DiffusionKind kind) {
  return kind == DiffusionKind::First ? "first" : "second";
}

DriftStatistics drift_statistics(const ModelSpec& model, const GaussianMarginal& g, double t,
                                 DiffusionKind kind, const MomentApproximator& approx) {
  return drift_statistics_impl(model, g, t, kind, approx, robust_cholesky(g.cov()));
}

LinearDrift slr_drift(const ModelSpec& model, const GaussianMarginal& g, double t,
                      DiffusionKind kind, const MomentApproximator& approx) {
  const JitteredCholesky chol = robust_cholesky(g.cov());
  DriftStatistics stats = drift_statistics_impl(model, g, t, kind, approx, chol);
  LinearDrift out;
  out.kind = kind;
  out.A = chol.solve(stats.cross).transpose();
  out.b = stats.mean - out.A * g.mean();
  out.Qbar = std::move(stats.Qbar);
  return out;
}

LinearMeasurement slr_measurement(const ModelSpec& model, const GaussianMarginal& g, double t,
                                  const MomentApproximator& approx) {
  const JitteredCholesky chol = robust_cholesky(g.cov());
  const Vector at_mean = model.measurement(t, g.mean());
  check_finite(at_mean, "measurement value");

  auto h = [&](const Vector& x) {
    Vector y = model.measurement(t, x);
    for (int c : model.angular_channels) y[c] = at_mean[c] + wrap_angle(y[c] - at_mean[c]);
    return y;
  };
  JacobianFunction jac;
  if (model.meas_jacobian) jac = [&](const Vector& x) { return model.meas_jacobian(t, x); };

  Moments m;
  if (approx.kind() == ApproximatorKind::Cubature) {
    const auto pts = points_from_factor(g.mean(), chol.lower());
    m.mean = Vector::Zero(model.meas_dim);
    std::vector<Vector> values;
    values.reserve(pts.size());
    for (const auto& p : pts) {
      Vector v = h(p.point);
      check_finite(v, "measurement value");
      m.mean += p.weight * v;
      values.push_back(std::move(v));
    }
    m.cross = Matrix::Zero(g.dim(), model.meas_dim);
    m.cov = Matrix::Zero(model.meas_dim, model.meas_dim);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vector df = values[i] - m.mean;
      m.cross.noalias() += pts[i].weight * (pts[i].point - g.mean()) * df.transpose();
      m.cov.noalias() += pts[i].weight * df * df.transpose();
    }
  } else {
    m = approx.moments(h, g, jac);
  }

  LinearMeasurement out;
  const Matrix gain_t = chol.solve(m.cross);  // 𝕍[X]⁻¹ ℂ[X,h]
  out.C = gain_t.transpose();
  out.d = m.mean - out.C * g.mean();
  Matrix delta = symmetrize(m.cov - m.cross.transpose() * gain_t + model.meas_noise);

  // Floor the spectrum of Δ relative to the smallest eigenvalue of R.
  Eigen::SelfAdjointEigenSolver<Matrix> r_eig(model.meas_noise, Eigen::EigenvaluesOnly);
  const double floor = 1e-9 * r_eig.eigenvalues().minCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> d_eig(delta);
  if (d_eig.eigenvalues().minCoeff() < floor) {
    const Vector clipped = d_eig.eigenvalues().cwiseMax(floor);
    delta = symmetrize(d_eig.eigenvectors() * clipped.asDiagonal() *
                       d_eig.eigenvectors().transpose());
  }
  out.Delta = delta;
  return out;
}

double trace_gap(const ModelSpec& model, const GaussianMarginal& g, double t,
                 const MomentApproximator& approx) {
  robust_cholesky(g.cov());
  if (model.state_independent_diffusion) return 0.0;
  const auto pts = approx.points(g);
  const DiffusionMoments dm = diffusion_moments(model, pts, t);
  return dm.second.trace() - (dm.first * dm.first.transpose()).trace();
}

}  // namespace cdsmooth
