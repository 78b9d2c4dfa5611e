#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "cdsmooth/discretize.hpp"
#include "cdsmooth/model.hpp"

namespace cdsmooth {

/// Random stream purposes within one Monte Carlo trial.
enum class StreamPurpose : std::uint32_t { Prior = 0, Process = 1, Measurement = 2 };

/// Seed of the stream keyed by (seed, trial, purpose). Independent of the
/// order in which trials are scheduled.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial, StreamPurpose purpose);

/// Engine seeded from a single 64-bit value through std::seed_seq.
std::mt19937_64 make_engine(std::uint64_t seed);

/// Fine-grid sample path of the SDE.
struct SimPath {
  std::vector<double> times;   ///< t_n = n·dt
  std::vector<Vector> states;  ///< x_n
  std::uint64_t seed = 0;
  double dt = 0.0;

  /// State at the grid point nearest to t.
  const Vector& state_at(double t) const;
};

/// Euler–Maruyama path on [0, T] with round(T/dt) steps:
///   x_{n+1} = x_n + μ(t_n, x_n)·dt + σ(t_n, x_n)·√dt·z_n.
/// Throws NumericalFault on a non-finite state.
SimPath euler_maruyama(const ModelSpec& model, const Vector& x0, double dt, double T,
                       std::uint64_t seed);

/// One draw from the model prior.
Vector sample_prior(const ModelSpec& model, std::uint64_t seed);

/// y_k = h(t_k, x(t_k)) + chol(R)·z_k at the mesh measurement times, using the
/// nearest fine-grid state. Angular channels are left unwrapped.
std::vector<Vector> sample_measurements(const SimPath& path, const ModelSpec& model,
                                        const Mesh& mesh, std::uint64_t seed);

}  // namespace cdsmooth
