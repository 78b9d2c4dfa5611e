#pragma once

#include <numbers>
#include <string>

#include "cdsmooth/model.hpp"

namespace cdsmooth::models {

// ---------------------------------------------------------------------------
// Linear-Gaussian test model
// ---------------------------------------------------------------------------

/// 4-state damped rotating-velocity model observed through its position,
/// with affine offsets in both drift and measurement. Used as an exact oracle
/// target since all smoothers are exact on it.
ModelSpec linear_model();

// ---------------------------------------------------------------------------
// Reentry vehicle
// ---------------------------------------------------------------------------

/// State u = [x, y, ẋ, ẏ, ψ] in km, km/s and a log ballistic parameter.
struct ReentryParams {
  double beta0 = -0.59783;
  double H0 = 13.406;
  double Gm0 = 3.9860e5;
  double R0 = 6374.0;
  /// Diagonal of σ acting on (ẋ, ẏ, ψ).
  double sigma_vel = std::sqrt(2.4064) * std::pow(10.0, -2.5);
  double sigma_psi = 1e-3;
  double r_range = 1e-3;
  double r_bearing = 1.7e-3;
  /// Radar position; defaults to the surface point (R0, 0).
  double radar_x = 6374.0;
  double radar_y = 0.0;
};

Vector reentry_drift(const ReentryParams& p, const Vector& u);
Vector reentry_meas(const ReentryParams& p, const Vector& u);
ModelSpec reentry_model(const ReentryParams& p = {});

// ---------------------------------------------------------------------------
// Radar-tracked 3D coordinated turn
// ---------------------------------------------------------------------------

/// State u = [x, y, z, ẋ, ẏ, ż, ψ] in m, m/s and rad/s.
struct CoordTurnParams {
  double sigma_par = 10.0;              // √100
  double sigma_h = std::sqrt(0.2);
  double sigma_v = std::sqrt(0.2);
  double sigma_psi = 7e-3;
  double sigma_range = 50.0;
  double sigma_angle = 0.1 * std::numbers::pi / 180.0;
  /// Prior variance of ψ; the benchmark value is 100²·π/(180·100²) = π/180.
  double psi_prior_var = std::numbers::pi / 180.0;
  double meas_interval = 6.0;
  int num_measurements = 26;
};

Vector coordturn_drift(const Vector& u);
Matrix coordturn_drift_jacobian(const Vector& u);
Matrix coordturn_diffusion(const CoordTurnParams& p, const Vector& u);
Vector radar_meas(const Vector& u);
ModelSpec coordturn_model(const CoordTurnParams& p = {});

/// Markdown description of every constant of a model: "linear", "reentry" or
/// "coordturn". Throws InvalidArgument for an unknown name.
std::string model_card(const std::string& name);

}  // namespace cdsmooth::models
