#include "cdsmooth/models.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

namespace cdsmooth {

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  double w = std::remainder(a, 2.0 * pi);  // [−π, π]
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

void ModelSpec::validate() const {
  auto fail = [&](const std::string& what) { throw InvalidArgument(name + ": " + what); };
  if (state_dim <= 0 || noise_dim <= 0 || meas_dim <= 0) fail("dimensions must be positive");
  if (!drift || !diffusion || !measurement) fail("missing model callable");
  if (prior.dim() != state_dim) fail("prior dimension mismatch");
  const Vector& m = prior.mean();
  if (drift(0.0, m).size() != state_dim) fail("drift dimension mismatch");
  const Matrix s = diffusion(0.0, m);
  if (s.rows() != state_dim || s.cols() != noise_dim) fail("diffusion dimension mismatch");
  if (measurement(0.0, m).size() != meas_dim) fail("measurement dimension mismatch");
  if (meas_noise.rows() != meas_dim || meas_noise.cols() != meas_dim) fail("R dimension mismatch");
  if (!meas_noise.isApprox(meas_noise.transpose())) fail("R is not symmetric");
  if (Eigen::LLT<Matrix>(meas_noise).info() != Eigen::Success) fail("R is not positive definite");
  for (int c : angular_channels) {
    if (c < 0 || c >= meas_dim) fail("angular channel out of range");
  }
  if (drift_jacobian) {
    const Matrix j = drift_jacobian(0.0, m);
    if (j.rows() != state_dim || j.cols() != state_dim) fail("drift Jacobian dimension mismatch");
  }
  if (meas_jacobian) {
    const Matrix j = meas_jacobian(0.0, m);
    if (j.rows() != meas_dim || j.cols() != state_dim) fail("measurement Jacobian dimension mismatch");
  }
}

namespace models {

namespace {

Matrix linear_A() {
  Matrix a = Matrix::Zero(4, 4);
  a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  a(2, 2) = -0.2;
  a(2, 3) = 0.5;
  a(3, 2) = -0.5;
  a(3, 3) = -0.2;
  return a;
}

Matrix linear_sigma() {
  Matrix s = Matrix::Zero(4, 2);
  s(2, 0) = 0.4;
  s(3, 0) = 0.1;
  s(3, 1) = 0.3;
  return s;
}

Matrix linear_H() {
  Matrix h = Matrix::Zero(2, 4);
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  h(1, 2) = 0.2;
  return h;
}

}  // namespace

ModelSpec linear_model() {
  const Matrix A = linear_A();
  const Vector b = (Vector(4) << 0.0, 0.0, 0.2, -0.1).finished();
  const Matrix S = linear_sigma();
  const Matrix H = linear_H();
  const Vector c = (Vector(2) << 0.5, -0.5).finished();

  ModelSpec m;
  m.name = "linear";
  m.state_dim = 4;
  m.noise_dim = 2;
  m.meas_dim = 2;
  m.drift = [A, b](double, const Vector& x) -> Vector { return A * x + b; };
  m.diffusion = [S](double, const Vector&) -> Matrix { return S; };
  m.measurement = [H, c](double, const Vector& x) -> Vector { return H * x + c; };
  m.drift_jacobian = [A](double, const Vector&) -> Matrix { return A; };
  m.meas_jacobian = [H](double, const Vector&) -> Matrix { return H; };
  m.meas_noise = 0.05 * Matrix::Identity(2, 2);
  m.prior = GaussianMarginal((Vector(4) << 0.0, 0.0, 1.0, 0.0).finished(),
                             Vector((Vector(4) << 0.5, 0.5, 0.2, 0.2).finished()).asDiagonal());
  m.state_independent_diffusion = true;
  return m;
}

Vector reentry_drift(const ReentryParams& p, const Vector& u) {
  const double x = u[0], y = u[1], vx = u[2], vy = u[3], psi = u[4];
  const double r = std::hypot(x, y);
  if (!(r > 0.0)) throw NumericalFault("reentry drift: position at the origin");
  const double g = -p.Gm0 / (r * r * r);
  // Drag: beta0 < 0 makes D a deceleration.
  const double d = p.beta0 * std::exp(psi + (p.R0 - r) / p.H0) * std::hypot(vx, vy);
  Vector out(5);
  out << vx, vy, g * x + d * vx, g * y + d * vy, 0.0;
  return out;
}

Vector reentry_meas(const ReentryParams& p, const Vector& u) {
  const double dx = u[0] - p.radar_x;
  const double dy = u[1] - p.radar_y;
  const double range = std::hypot(dx, dy);
  if (!(range > 0.0)) throw NumericalFault("reentry measurement: zero range");
  Vector out(2);
  out << range, std::atan2(dy, dx);
  return out;
}

ModelSpec reentry_model(const ReentryParams& p) {
  ModelSpec m;
  m.name = "reentry";
  m.state_dim = 5;
  m.noise_dim = 3;
  m.meas_dim = 2;
  m.drift = [p](double, const Vector& u) { return reentry_drift(p, u); };
  Matrix sigma = Matrix::Zero(5, 3);
  sigma(2, 0) = p.sigma_vel;
  sigma(3, 1) = p.sigma_vel;
  sigma(4, 2) = p.sigma_psi;
  m.diffusion = [sigma](double, const Vector&) -> Matrix { return sigma; };
  m.state_independent_diffusion = true;
  m.measurement = [p](double, const Vector& u) { return reentry_meas(p, u); };
  m.meas_noise = Vector((Vector(2) << p.r_range, p.r_bearing).finished()).asDiagonal();
  m.angular_channels = {1};
  Vector mean(5);
  mean << 6500.4, 349.14, -1.8093, -6.7967, 0.6932;
  Vector var(5);
  var << 1e-6, 1e-6, 1e-6, 1e-6, 1.0;
  m.prior = GaussianMarginal(mean, var.asDiagonal());
  return m;
}

Vector coordturn_drift(const Vector& u) {
  Vector out(7);
  out << u[3], u[4], u[5], -u[6] * u[4], u[6] * u[3], 0.0, 0.0;
  return out;
}

Matrix coordturn_drift_jacobian(const Vector& u) {
  Matrix j = Matrix::Zero(7, 7);
  j(0, 3) = 1.0;
  j(1, 4) = 1.0;
  j(2, 5) = 1.0;
  j(3, 4) = -u[6];
  j(3, 6) = -u[4];
  j(4, 3) = u[6];
  j(4, 6) = u[3];
  return j;
}

Matrix coordturn_diffusion(const CoordTurnParams& p, const Vector& u) {
  const double x = u[0], y = u[1], z = u[2], vx = u[3], vy = u[4], vz = u[5];
  const double xi = std::sqrt(x * x + y * y + z * z);
  const double eta = std::hypot(vx, vy);
  if (!(xi > 0.0)) throw NumericalFault("coordinated-turn diffusion: xi(u) = 0");
  if (!(eta > 0.0)) throw NumericalFault("coordinated-turn diffusion: zero planar speed");
  Matrix s = Matrix::Zero(7, 4);
  s(3, 0) = vx / xi;
  s(4, 0) = vy / xi;
  s(5, 0) = vz / xi;
  s(3, 1) = vy / eta;
  s(4, 1) = -vx / eta;
  s(3, 2) = vx * vz / (xi * eta);
  s(4, 2) = vy * vz / (xi * eta);
  s(5, 2) = -eta / xi;
  s(6, 3) = 1.0;
  s.col(0) *= p.sigma_par;
  s.col(1) *= p.sigma_h;
  s.col(2) *= p.sigma_v;
  s.col(3) *= p.sigma_psi;
  return s;
}

Vector radar_meas(const Vector& u) {
  const double x = u[0], y = u[1], z = u[2];
  const double rho = std::hypot(x, y);
  const double range = std::sqrt(x * x + y * y + z * z);
  if (!(range > 0.0)) throw NumericalFault("radar measurement: zero range");
  Vector out(3);
  out << range, std::atan2(y, x), std::atan2(z, rho);
  return out;
}

ModelSpec coordturn_model(const CoordTurnParams& p) {
  ModelSpec m;
  m.name = "coordturn";
  m.state_dim = 7;
  m.noise_dim = 4;
  m.meas_dim = 3;
  m.drift = [](double, const Vector& u) { return coordturn_drift(u); };
  m.drift_jacobian = [](double, const Vector& u) { return coordturn_drift_jacobian(u); };
  m.diffusion = [p](double, const Vector& u) { return coordturn_diffusion(p, u); };
  m.measurement = [](double, const Vector& u) { return radar_meas(u); };
  const double a2 = p.sigma_angle * p.sigma_angle;
  m.meas_noise =
      Vector((Vector(3) << p.sigma_range * p.sigma_range, a2, a2).finished()).asDiagonal();
  m.angular_channels = {1, 2};
  constexpr double pi = std::numbers::pi;
  Vector mean(7);
  mean << 1000.0, 0.0, 2650.0, 200.0, 0.0, 150.0, 6.0 * pi / 180.0;
  Vector var = Vector::Constant(7, 100.0 * 100.0);
  var[6] = p.psi_prior_var;
  m.prior = GaussianMarginal(mean, var.asDiagonal());
  return m;
}

std::string model_card(const std::string& name) {
  std::ostringstream os;
  os.precision(10);
  if (name == "linear") {
    os << "# linear\n\n"
       << "Affine 4-state test model: dX = (A X + b) dt + S dW, Y = H X + c + V.\n\n"
       << "| constant | value | provenance |\n|---|---|---|\n"
       << "| A | [[0,0,1,0],[0,0,0,1],[0,0,-0.2,0.5],[0,0,-0.5,-0.2]] | project default |\n"
       << "| b | [0, 0, 0.2, -0.1] | project default |\n"
       << "| S (4x2) | rows [0,0],[0,0],[0.4,0],[0.1,0.3] | project default |\n"
       << "| H | [[1,0,0,0],[0,1,0.2,0]] | project default |\n"
       << "| c | [0.5, -0.5] | project default |\n"
       << "| R | 0.05 I2 | project default |\n"
       << "| prior mean | [0, 0, 1, 0] | project default |\n"
       << "| prior cov | diag[0.5, 0.5, 0.2, 0.2] | project default |\n"
       << "| measurement times | 1, 2, ..., 10 | project default |\n"
       << "\nAnalytic Jacobians are supplied; the diffusion is state independent.\n";
    return os.str();
  }
  if (name == "reentry") {
    const ReentryParams p;
    os << "# reentry\n\n"
       << "State [x, y, xdot, ydot, psi] (km, km/s). Drift [xdot, ydot, G x + D xdot, "
          "G y + D ydot, 0] with G = -Gm0 / r^3 and\n"
       << "D = beta0 exp(psi + (R0 - r)/H0) |v|, r = |(x, y)|. Noise enters (xdot, ydot, psi).\n"
       << "Measurement: range and bearing atan2(y - s_y, x - s_x) to the radar; bearing is "
          "angular.\n\n"
       << "| constant | value | provenance |\n|---|---|---|\n"
       << "| beta0 | " << p.beta0 << " | benchmark definition |\n"
       << "| H0 | " << p.H0 << " | benchmark definition |\n"
       << "| Gm0 | " << p.Gm0 << " | benchmark definition |\n"
       << "| R0 | " << p.R0 << " | benchmark definition |\n"
       << "| sigma (xdot, ydot) | sqrt(2.4064)*10^(-5/2) = " << p.sigma_vel
       << " (variance 2.4064e-5) | benchmark definition |\n"
       << "| sigma (psi) | " << p.sigma_psi << " | benchmark definition |\n"
       << "| R | diag[1e-3, 1.7e-3] | benchmark definition |\n"
       << "| prior mean | [6500.4, 349.14, -1.8093, -6.7967, 0.6932] | benchmark definition |\n"
       << "| prior cov | diag[1e-6, 1e-6, 1e-6, 1e-6, 1] | benchmark definition |\n"
       << "| radar (s_x, s_y) | (" << p.radar_x << ", " << p.radar_y
       << ") | project default, overridable (radar_x, radar_y) |\n"
       << "| measurement times | 1, 2, ..., 200 s | benchmark definition (once per second) |\n"
       << "| truth simulation step | 1/1000 s | benchmark definition |\n"
       << "| smoother step | 1/100 s | benchmark definition |\n"
       << "\nThe drag term uses D = beta0 exp(...)|v| with beta0 < 0 so that D decelerates; "
          "the opposite sign makes the trajectory diverge within 40 s.\n";
    return os.str();
  }
  if (name == "coordturn") {
    const CoordTurnParams p;
    os << "# coordturn\n\n"
       << "State [x, y, z, xdot, ydot, zdot, psi] (m, m/s, rad/s). Drift [xdot, ydot, zdot, "
          "-psi ydot, psi xdot, 0, 0].\n"
       << "Diffusion sigma(u) is 7x4 with rows 1-3 zero, xi(u) = sqrt(x^2+y^2+z^2), "
          "eta(u) = sqrt(xdot^2+ydot^2):\n\n"
       << "    [ xdot/xi   ydot/eta   xdot zdot/(xi eta)  0 ]\n"
       << "    [ ydot/xi  -xdot/eta   ydot zdot/(xi eta)  0 ]\n"
       << "    [ zdot/xi   0         -eta/xi              0 ]\n"
       << "    [ 0         0          0                   1 ]  (rows 4-7)\n\n"
       << "times diag(sigma_par, sigma_h, sigma_v, sigma_psi). Measurement [range, atan2(y, x), "
          "atan2(z, sqrt(x^2+y^2))]; channels 1 and 2 are angular.\n\n"
       << "| constant | value | provenance |\n|---|---|---|\n"
       << "| sigma_par | sqrt(100) | benchmark definition |\n"
       << "| sigma_h | sqrt(0.2) | benchmark definition |\n"
       << "| sigma_v | sqrt(0.2) | benchmark definition |\n"
       << "| sigma_psi | 7e-3 rad/s | benchmark definition |\n"
       << "| sigma_range | 50 m | benchmark definition |\n"
       << "| sigma_azimuth = sigma_elevation | 0.1 pi/180 rad | benchmark definition |\n"
       << "| prior mean | [1000, 0, 2650, 200, 0, 150, 6 pi/180] | benchmark definition |\n"
       << "| prior cov | 100^2 diag[1,1,1,1,1,1, pi/(180*100^2)] | benchmark definition; "
          "psi entry overridable (psi_prior_var) |\n"
       << "| measurement interval | " << p.meas_interval << " s | benchmark definition |\n"
       << "| measurements | " << p.num_measurements << ", first at t = 0 | benchmark definition |\n"
       << "| truth simulation step | 5/1000 s | benchmark definition |\n"
       << "| smoother step | 5/100 s | benchmark definition |\n"
       << "\nAn analytic drift Jacobian is supplied. The diffusion is undefined at zero planar "
          "speed; evaluation there raises NumericalFault.\n";
    return os.str();
  }
  throw InvalidArgument("unknown model: " + name);
}

}  // namespace models
}  // namespace cdsmooth
