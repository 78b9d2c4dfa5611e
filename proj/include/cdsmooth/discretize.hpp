#pragma once

#include <optional>
#include <vector>

#include "cdsmooth/gaussian.hpp"
#include "cdsmooth/linearize.hpp"

namespace cdsmooth {

/// Time grid shared by the filter and the smoothers.
///
/// Every inter-measurement interval (and [0, t₁] when t₁ > 0) is split into
/// `substeps` equal substeps. Measurement times are always nodes.
class Mesh {
 public:
  /// When `horizon` exceeds the last measurement time the mesh is extended to
  /// it with one more interval; an empty measurement list requires horizon > 0.
  Mesh(std::vector<double> measurement_times, int substeps, double horizon = 0.0);

  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& measurement_times() const noexcept { return measurement_times_; }
  int substeps() const noexcept { return substeps_; }

  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_substeps() const noexcept { return nodes_.size() - 1; }
  std::size_t num_measurements() const noexcept { return measurement_times_.size(); }

  /// Node index of measurement k.
  std::size_t measurement_node(std::size_t k) const { return measurement_nodes_.at(k); }
  const std::vector<std::size_t>& measurement_nodes() const noexcept { return measurement_nodes_; }

  /// Measurement index attached to a node, if any.
  std::optional<std::size_t> measurement_at(std::size_t node) const {
    const long k = node_to_measurement_.at(node);
    if (k < 0) return std::nullopt;
    return static_cast<std::size_t>(k);
  }

  double substep_width(std::size_t substep) const {
    return nodes_.at(substep + 1) - nodes_.at(substep);
  }

 private:
  std::vector<double> measurement_times_;
  int substeps_;
  std::vector<double> nodes_;
  std::vector<std::size_t> measurement_nodes_;
  std::vector<long> node_to_measurement_;
};

/// Exact discrete-time transition of a frozen affine SDE over one step:
/// x' = F·x + u + w,  w ~ N(0, Qd).
struct DiscreteAffine {
  Matrix F;
  Vector u;
  Matrix Qd;
};

/// Zeroth-order-hold discretization of (A, b, Q̄) over `dt`.
///
/// A single exponential of the block matrix
///   [ A  Q̄   b ]
///   [ 0 −Aᵀ  0 ] · dt
///   [ 0  0   0 ]
/// gives F = M₁₁, u = M₁₃ and, by the matrix fraction decomposition,
/// Qd = M₁₂·M₂₂⁻¹ = M₁₂·M₁₁ᵀ.
DiscreteAffine zoh_discretize(const LinearDrift& drift, double dt);

/// mean' = F·mean + u, cov' = F·cov·Fᵀ + Qd.
GaussianMarginal propagate_moments(const GaussianMarginal& g, const DiscreteAffine& step);

}  // namespace cdsmooth
