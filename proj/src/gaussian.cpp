#include "cdsmooth/gaussian.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cdsmooth {

namespace {

constexpr double kJitterScale = 1e-12;
constexpr int kJitterRetries = 6;

bool all_finite(const Matrix& m) { return m.allFinite(); }

std::string describe(const Vector& x) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << "]";
  return os.str();
}

}  // namespace

Matrix symmetrize_psd(const Matrix& m) {
  Matrix sym = symmetrize(m);
  if (sym.size() == 0) return sym;
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) return sym;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) return sym;
  Vector values = eig.eigenvalues();
  if (values.minCoeff() >= 0.0) return sym;
  values = values.cwiseMax(0.0);
  const Matrix& vecs = eig.eigenvectors();
  return symmetrize(vecs * values.asDiagonal() * vecs.transpose());
}

JitteredCholesky robust_cholesky(const Matrix& m, std::ptrdiff_t node) {
  JitteredCholesky out;
  if (!all_finite(m)) {
    throw DegenerateCovariance("covariance contains non-finite entries", node);
  }
  out.llt.compute(m);
  if (out.llt.info() == Eigen::Success) return out;

  const double d = static_cast<double>(m.rows());
  double jitter = kJitterScale * m.trace() / d;
  if (jitter > 0.0) {
    for (int attempt = 0; attempt < kJitterRetries; ++attempt, jitter *= 2.0) {
      Matrix jittered = m;
      jittered.diagonal().array() += jitter;
      out.llt.compute(jittered);
      if (out.llt.info() == Eigen::Success) {
        out.jitter = jitter;
        return out;
      }
    }
  }
  throw DegenerateCovariance("Cholesky factorization failed after jitter", node);
}

GaussianMarginal::GaussianMarginal(Vector mean, const Matrix& cov)
    : mean_(std::move(mean)) {
  if (cov.rows() != mean_.size() || cov.cols() != mean_.size()) {
    throw InvalidArgument("GaussianMarginal: covariance dimension mismatch");
  }
  cov_ = symmetrize_psd(cov);
}

std::vector<WeightedPoint> cubature_points(const GaussianMarginal& g) {
  const Eigen::Index d = g.dim();
  const double weight = 1.0 / (2.0 * static_cast<double>(d));
  std::vector<WeightedPoint> out;
  out.reserve(static_cast<std::size_t>(2 * d));

  Matrix scaled;
  if (g.cov().isZero(0.0)) {
    scaled = Matrix::Zero(d, d);
  } else {
    scaled = std::sqrt(static_cast<double>(d)) * robust_cholesky(g.cov()).lower();
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    out.push_back({weight, g.mean() + scaled.col(j)});
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    out.push_back({weight, g.mean() - scaled.col(j)});
  }
  return out;
}

Matrix numerical_jacobian(const VectorFunction& f, const Vector& x) {
  const Vector f0 = f(x);
  Matrix jac(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x[i]));
    Vector xp = x;
    Vector xm = x;
    xp[i] += h;
    xm[i] -= h;
    jac.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

std::vector<WeightedPoint> MomentApproximator::points(const GaussianMarginal& g) const {
  if (kind_ == ApproximatorKind::Cubature) return cubature_points(g);
  return {WeightedPoint{1.0, g.mean()}};
}

Moments MomentApproximator::moments(const VectorFunction& f, const GaussianMarginal& g,
                                    const JacobianFunction& jacobian) const {
  Moments out;
  if (kind_ == ApproximatorKind::Taylor1) {
    out.mean = f(g.mean());
    if (!out.mean.allFinite()) {
      throw NumericalFault("non-finite function value at " + describe(g.mean()));
    }
    const Matrix jac = jacobian ? jacobian(g.mean()) : numerical_jacobian(f, g.mean());
    if (!jac.allFinite()) {
      throw NumericalFault("non-finite Jacobian at " + describe(g.mean()));
    }
    out.cross = g.cov() * jac.transpose();
    out.cov = symmetrize(jac * g.cov() * jac.transpose());
    return out;
  }

  const auto pts = cubature_points(g);
  std::vector<Vector> values;
  values.reserve(pts.size());
  for (const auto& p : pts) {
    Vector v = f(p.point);
    if (!v.allFinite()) {
      throw NumericalFault("non-finite function value at " + describe(p.point));
    }
    values.push_back(std::move(v));
  }
  const Eigen::Index m = values.front().size();
  out.mean = Vector::Zero(m);
  for (std::size_t i = 0; i < pts.size(); ++i) out.mean += pts[i].weight * values[i];

  out.cross = Matrix::Zero(g.dim(), m);
  out.cov = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vector df = values[i] - out.mean;
    const Vector dx = pts[i].point - g.mean();
    out.cross.noalias() += pts[i].weight * dx * df.transpose();
    out.cov.noalias() += pts[i].weight * df * df.transpose();
  }
  out.cov = symmetrize_psd(out.cov);
  return out;
}

const char* to_string(ApproximatorKind kind) {
  return kind == ApproximatorKind::Cubature ? "cubature" : "taylor1";
}

}  // namespace cdsmooth
