#include "cdsmooth/iterate.hpp"

#include <algorithm>

namespace cdsmooth {

namespace {

SmoothTrajectory run_smoother(const FilterTrajectory& ft, const ModelSpec& model,
                              const IterationConfig& cfg) {
  switch (cfg.smoother_type) {
    case SmootherType::TypeIStar:
      return smooth_type1star(ft, model, cfg.kind, cfg.approx);
    case SmootherType::TypeII:
      return smooth_type2(ft, ft.drifts);
    case SmootherType::TypeIII:
      return smooth_type3(ft);
  }
  throw InvalidArgument("unknown smoother type");
}

}  // namespace

void IterationConfig::validate() const {
  if (max_iters < 0) throw InvalidArgument("iterations must be >= 0");
  if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
  if (!(divergence_factor > 0.0)) throw InvalidArgument("divergence_factor must be > 0");
}

double smoothing_delta(const SmoothTrajectory& previous, const SmoothTrajectory& current) {
  if (previous.smoothed.size() != current.smoothed.size()) {
    throw InvalidArgument("smoothing_delta: trajectories on different meshes");
  }
  double delta = 0.0;
  for (std::size_t n = 0; n < current.smoothed.size(); ++n) {
    const auto& a = previous.smoothed[n];
    const auto& b = current.smoothed[n];
    delta = std::max(delta, (b.mean() - a.mean()).lpNorm<Eigen::Infinity>());
    const double scale = a.cov().norm();
    const double dcov = (b.cov() - a.cov()).norm();
    delta = std::max(delta, scale > 0.0 ? dcov / scale : dcov);
  }
  return delta;
}

IterationState init_iteration(const ModelSpec& model, const Mesh& mesh,
                              std::span<const Vector> measurements, const IterationConfig& cfg) {
  cfg.validate();
  IterationState state;
  state.j = 0;
  state.filter = run_filter(model, mesh, measurements, cfg.kind, cfg.approx);
  state.drifts = state.filter.drifts;
  state.meas = state.filter.measurement_linearizations;
  state.smooth = run_smoother(state.filter, model, cfg);
  state.smooth.kind = cfg.kind;
  state.smooth.iteration = 0;
  return state;
}

IterationState iterate_once(const IterationState& state, const ModelSpec& model,
                            const Mesh& mesh, std::span<const Vector> measurements,
                            const IterationConfig& cfg) {
  const auto& nodes = mesh.nodes();
  const auto& marginals = state.smooth.smoothed;
  if (marginals.size() != mesh.num_nodes()) {
    throw InvalidArgument("iterate_once: state does not match the mesh");
  }

  IterationState next;
  next.j = state.j + 1;
  next.drifts.reserve(mesh.num_substeps());
  for (std::size_t n = 0; n < mesh.num_substeps(); ++n) {
    next.drifts.push_back(slr_drift(model, marginals[n], nodes[n], cfg.kind, cfg.approx));
  }
  next.meas.reserve(mesh.num_measurements());
  for (std::size_t k = 0; k < mesh.num_measurements(); ++k) {
    const std::size_t node = mesh.measurement_node(k);
    next.meas.push_back(slr_measurement(model, marginals[node], nodes[node], cfg.approx));
  }

  next.filter = run_filter(model, mesh, measurements, cfg.kind, cfg.approx,
                           LinearizationSource::provided(next.drifts, next.meas));
  next.smooth = run_smoother(next.filter, model, cfg);
  next.smooth.kind = cfg.kind;
  next.smooth.iteration = next.j;
  next.delta = smoothing_delta(state.smooth, next.smooth);

  const bool grew = std::isfinite(state.delta) && next.delta > cfg.tol &&
                    next.delta > cfg.divergence_factor * state.delta;
  next.growth_streak = grew ? state.growth_streak + 1 : 0;
  if (next.growth_streak >= 2) {
    std::vector<IterationState> partial;
    partial.push_back(next);
    throw Diverged("iteration diverged at j = " + std::to_string(next.j), std::move(partial));
  }
  return next;
}

std::vector<IterationState> run_iterated(const ModelSpec& model, const Mesh& mesh,
                                         std::span<const Vector> measurements,
                                         const IterationConfig& cfg) {
  std::vector<IterationState> states;
  states.push_back(init_iteration(model, mesh, measurements, cfg));
  while (states.back().j < cfg.max_iters && !(states.back().delta < cfg.tol)) {
    try {
      states.push_back(iterate_once(states.back(), model, mesh, measurements, cfg));
    } catch (const Diverged& e) {
      std::vector<IterationState> partial = std::move(states);
      partial.insert(partial.end(), e.partial().begin(), e.partial().end());
      throw Diverged(e.what(), std::move(partial));
    }
  }
  return states;
}

}  // namespace cdsmooth
