#include "cdsmooth/smoother.hpp"

#include <algorithm>

#include <unsupported/Eigen/MatrixFunctions>

namespace cdsmooth {

namespace {

struct StageFilter {
  const Vector* mean;
  const Matrix* cov;
  JitteredCholesky chol;
};

struct Derivative {
  Vector mean;
  Matrix cov;
};

// f(substep, t, filter moments at t, x̂, Ω) -> (dx̂/dt, dΩ/dt)
using BackwardField = std::function<Derivative(std::size_t, double, const StageFilter&,
                                               const Vector&, const Matrix&)>;

void check_drifts(const FilterTrajectory& ft, std::span<const LinearDrift> drifts) {
  if (ft.num_nodes() == 0) throw InvalidArgument("smoother: empty filter trajectory");
  if (drifts.size() != ft.num_nodes() - 1) {
    throw InvalidArgument("smoother: drifts must cover every substep");
  }
}

SmoothTrajectory rk4_backward(const FilterTrajectory& ft, SmootherType type,
                              const BackwardField& field) {
  const std::size_t nodes = ft.num_nodes();
  if (nodes == 0) throw InvalidArgument("smoother: empty filter trajectory");
  if (ft.drifts.size() != nodes - 1) {
    throw InvalidArgument("smoother: filter trajectory lacks per-substep drifts");
  }
  SmoothTrajectory out;
  out.type = type;
  out.kind = ft.kind;
  out.times = ft.times;
  out.smoothed.resize(nodes);
  out.smoothed[nodes - 1] = ft.updated[nodes - 1];

  auto factor = [&](const GaussianMarginal& g, std::size_t node) {
    StageFilter s{&g.mean(), &g.cov(), robust_cholesky(g.cov(), static_cast<std::ptrdiff_t>(node))};
    if (s.chol.jitter > 0.0) out.jittered_nodes.push_back(node);
    return s;
  };

  Vector x = ft.updated[nodes - 1].mean();
  Matrix om = ft.updated[nodes - 1].cov();
  for (std::size_t n = nodes - 1; n-- > 0;) {
    const double t0 = ft.times[n];
    const double t1 = ft.times[n + 1];
    const double dt = t1 - t0;
    const double h = -dt;
    const double tm = t0 + 0.5 * dt;

    const GaussianMarginal mid =
        propagate_moments(ft.updated[n], zoh_discretize(ft.drifts[n], 0.5 * dt));
    const StageFilter right = factor(ft.predicted[n + 1], n + 1);
    const StageFilter middle = factor(mid, n);
    const StageFilter left = factor(ft.updated[n], n);

    const Derivative k1 = field(n, t1, right, x, om);
    const Derivative k2 =
        field(n, tm, middle, x + 0.5 * h * k1.mean, symmetrize(om + 0.5 * h * k1.cov));
    const Derivative k3 =
        field(n, tm, middle, x + 0.5 * h * k2.mean, symmetrize(om + 0.5 * h * k2.cov));
    const Derivative k4 = field(n, t0, left, x + h * k3.mean, symmetrize(om + h * k3.cov));

    x += (h / 6.0) * (k1.mean + 2.0 * k2.mean + 2.0 * k3.mean + k4.mean);
    om = symmetrize(om + (h / 6.0) * (k1.cov + 2.0 * k2.cov + 2.0 * k3.cov + k4.cov));
    if (!x.allFinite() || !om.allFinite()) {
      throw NumericalFault("smoother: non-finite backward integration at node " +
                           std::to_string(n));
    }
    out.smoothed[n] = GaussianMarginal(x, om);
    om = out.smoothed[n].cov();
  }
  std::sort(out.jittered_nodes.begin(), out.jittered_nodes.end());
  out.jittered_nodes.erase(std::unique(out.jittered_nodes.begin(), out.jittered_nodes.end()),
                           out.jittered_nodes.end());
  return out;
}

// Q̄Σ⁻¹ for symmetric Q̄ and Σ.
Matrix q_sigma_inv(const Matrix& qbar, const StageFilter& f) {
  return f.chol.solve(qbar).transpose();
}

BackwardField type2_field(std::span<const LinearDrift> drifts) {
  return [drifts](std::size_t n, double, const StageFilter& f, const Vector& x, const Matrix& om) {
    const LinearDrift& ld = drifts[n];
    const Vector expected = ld.A * *f.mean + ld.b;  // 𝔼[μ] under the frozen linearization
    const Matrix cross = ld.A * *f.cov;            // ℂ[μ,X]
    const Matrix gain = f.chol.solve((cross + ld.Qbar).transpose()).transpose();
    Derivative d;
    d.mean = gain * (x - *f.mean) + expected;
    d.cov = gain * om + om * gain.transpose() - ld.Qbar;
    return d;
  };
}

}  // namespace

const char* to_string(SmootherType type) {
  switch (type) {
    case SmootherType::TypeIStar:
      return "type1star";
    case SmootherType::TypeII:
      return "type2";
    case SmootherType::TypeIII:
      return "type3";
  }
  return "unknown";
}

GainSegment type3_gain(const GaussianMarginal& filtered_left, const Matrix& transition,
                       const GaussianMarginal& predicted_right, std::ptrdiff_t node) {
  GainSegment seg;
  seg.H = filtered_left.cov() * transition.transpose();
  const JitteredCholesky chol = robust_cholesky(predicted_right.cov(), node);
  seg.G = chol.solve(seg.H.transpose()).transpose();
  return seg;
}

SmoothTrajectory smooth_linear(const FilterTrajectory& ft, std::span<const LinearDrift> drifts) {
  check_drifts(ft, drifts);
  // Labelled TypeII: with given linearizations the two are the same equations.
  return rk4_backward(
      ft, SmootherType::TypeII,
      [drifts](std::size_t n, double, const StageFilter& f, const Vector& x, const Matrix& om) {
        const LinearDrift& ld = drifts[n];
        const Matrix qs = q_sigma_inv(ld.Qbar, f);
        const Matrix a = ld.A + qs;
        Derivative d;
        d.mean = ld.A * x + ld.b + qs * (x - *f.mean);
        d.cov = a * om + om * a.transpose() - ld.Qbar;
        return d;
      });
}

SmoothTrajectory smooth_type1star(const FilterTrajectory& ft, const ModelSpec& model,
                                  DiffusionKind kind, const MomentApproximator& approx) {
  SmoothTrajectory out = rk4_backward(
      ft, SmootherType::TypeIStar,
      [&](std::size_t, double t, const StageFilter& f, const Vector& x, const Matrix& om) {
        const DriftStatistics stats =
            drift_statistics(model, GaussianMarginal(x, om), t, kind, approx);
        const Matrix qs = q_sigma_inv(stats.Qbar, f);
        const Matrix c = stats.cross.transpose();  // ℂ[μ,X]
        Derivative d;
        d.mean = stats.mean + qs * (x - *f.mean);
        d.cov = qs * om + om * qs.transpose() - stats.Qbar + c + c.transpose();
        return d;
      });
  out.kind = kind;
  return out;
}

SmoothTrajectory smooth_type2(const FilterTrajectory& ft, const ModelSpec& model,
                              DiffusionKind kind, const MomentApproximator& approx) {
  std::vector<LinearDrift> drifts;
  drifts.reserve(ft.num_nodes() - 1);
  for (std::size_t n = 0; n + 1 < ft.num_nodes(); ++n) {
    drifts.push_back(slr_drift(model, ft.updated[n], ft.times[n], kind, approx));
  }
  SmoothTrajectory out = rk4_backward(ft, SmootherType::TypeII, type2_field(drifts));
  out.kind = kind;
  return out;
}

SmoothTrajectory smooth_type2(const FilterTrajectory& ft, std::span<const LinearDrift> drifts) {
  check_drifts(ft, drifts);
  return rk4_backward(ft, SmootherType::TypeII, type2_field(drifts));
}

namespace {

SmoothTrajectory type3_pass(const FilterTrajectory& ft,
                            const std::function<Matrix(std::size_t)>& transition) {
  const std::size_t nodes = ft.num_nodes();
  SmoothTrajectory out;
  out.type = SmootherType::TypeIII;
  out.kind = ft.kind;
  out.times = ft.times;
  out.smoothed.resize(nodes);
  out.smoothed[nodes - 1] = ft.updated[nodes - 1];

  for (std::size_t n = nodes - 1; n-- > 0;) {
    const GaussianMarginal& filt = ft.updated[n];
    const GaussianMarginal& pred = ft.predicted[n + 1];
    const GainSegment seg =
        type3_gain(filt, transition(n), pred, static_cast<std::ptrdiff_t>(n + 1));
    const GaussianMarginal& next = out.smoothed[n + 1];
    Vector mean = filt.mean() + seg.G * (next.mean() - pred.mean());
    Matrix cov = seg.G * (next.cov() - pred.cov()) * seg.G.transpose() + filt.cov();
    out.smoothed[n] = GaussianMarginal(std::move(mean), cov);
  }
  return out;
}

}  // namespace

SmoothTrajectory smooth_type3(const FilterTrajectory& ft) {
  if (ft.num_nodes() == 0) throw InvalidArgument("smoother: empty filter trajectory");
  if (ft.transitions.size() != ft.num_nodes() - 1) {
    throw InvalidArgument("smooth_type3: filter trajectory lacks transitions");
  }
  return type3_pass(ft, [&](std::size_t n) -> Matrix { return ft.transitions[n].F; });
}

SmoothTrajectory smooth_type3(const FilterTrajectory& ft, std::span<const LinearDrift> drifts) {
  check_drifts(ft, drifts);
  return type3_pass(ft, [&](std::size_t n) -> Matrix {
    const double dt = ft.times[n + 1] - ft.times[n];
    return Matrix(drifts[n].A * dt).exp();
  });
}

}  // namespace cdsmooth
