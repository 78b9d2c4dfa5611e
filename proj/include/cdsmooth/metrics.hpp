#pragma once

#include <span>
#include <vector>

#include "cdsmooth/gaussian.hpp"

namespace cdsmooth {

/// Normalized estimation error squared (x − x̂)ᵀ Ω⁻¹ (x − x̂).
/// Throws DegenerateCovariance if Ω cannot be factored even with jitter.
double nees(const Vector& x_true, const GaussianMarginal& g);

/// Root of the mean over trials and nodes of ‖x_block − x̂_block‖².
/// `truths[i][n]` and `estimates[i][n]` must be aligned. An empty block gives 0.
double block_rmse(const std::vector<std::vector<Vector>>& truths,
                  const std::vector<std::vector<Vector>>& estimates, std::span<const int> block);

struct Chi2Band {
  double lo = 0.0;
  double hi = 0.0;
};

/// Two-sided band for the mean of `trials` iid χ²_dof variables, which is
/// Gamma(shape = trials·dof/2, scale = 2/trials).
Chi2Band chi2_average_band(int dof, int trials, double level = 0.95);

}  // namespace cdsmooth
