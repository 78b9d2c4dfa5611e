#include "cdsmooth/simulate.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "cdsmooth/errors.hpp"

namespace cdsmooth {

namespace {

Vector standard_normal(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> z;
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = z(rng);
  return out;
}

// Lower factor of a PSD matrix; zero rows and columns are allowed.
Matrix psd_factor(const Matrix& m) {
  Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() != Eigen::Success) throw NumericalFault("cannot factor covariance");
  const Vector d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Matrix l = ldlt.matrixL();
  Matrix out = ldlt.transpositionsP().transpose() * l * d.asDiagonal();
  return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial, StreamPurpose purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                    static_cast<std::uint32_t>(purpose)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::mt19937_64 make_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

const Vector& SimPath::state_at(double t) const {
  if (states.empty()) throw InvalidArgument("empty sample path");
  const long n = std::lround(t / dt);
  if (n < 0 || static_cast<std::size_t>(n) >= states.size()) {
    throw InvalidArgument("time outside the simulated horizon");
  }
  return states[static_cast<std::size_t>(n)];
}

SimPath euler_maruyama(const ModelSpec& model, const Vector& x0, double dt, double T,
                       std::uint64_t seed) {
  if (!(dt > 0.0)) throw InvalidArgument("euler_maruyama: dt must be > 0");
  if (!(T >= 0.0)) throw InvalidArgument("euler_maruyama: T must be >= 0");
  if (x0.size() != model.state_dim) throw InvalidArgument("euler_maruyama: x0 dimension");
  const long steps = std::lround(T / dt);
  std::mt19937_64 rng = make_engine(seed);
  const double sqdt = std::sqrt(dt);

  SimPath path;
  path.seed = seed;
  path.dt = dt;
  path.times.reserve(static_cast<std::size_t>(steps) + 1);
  path.states.reserve(static_cast<std::size_t>(steps) + 1);
  path.times.push_back(0.0);
  path.states.push_back(x0);
  Vector x = x0;
  for (long n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    const Vector z = standard_normal(rng, model.noise_dim);
    x += model.drift(t, x) * dt + model.diffusion(t, x) * (sqdt * z);
    if (!x.allFinite()) {
      throw NumericalFault("euler_maruyama: non-finite state at step " + std::to_string(n + 1));
    }
    path.times.push_back(static_cast<double>(n + 1) * dt);
    path.states.push_back(x);
  }
  return path;
}

Vector sample_prior(const ModelSpec& model, std::uint64_t seed) {
  std::mt19937_64 rng = make_engine(seed);
  return model.prior.mean() + psd_factor(model.prior.cov()) * standard_normal(rng, model.state_dim);
}

std::vector<Vector> sample_measurements(const SimPath& path, const ModelSpec& model,
                                        const Mesh& mesh, std::uint64_t seed) {
  std::mt19937_64 rng = make_engine(seed);
  const Matrix l = psd_factor(model.meas_noise);
  std::vector<Vector> ys;
  ys.reserve(mesh.num_measurements());
  for (double t : mesh.measurement_times()) {
    const Vector z = standard_normal(rng, model.meas_dim);
    ys.push_back(model.measurement(t, path.state_at(t)) + l * z);
  }
  return ys;
}

}  // namespace cdsmooth
