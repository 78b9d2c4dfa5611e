#include "cdsmooth/metrics.hpp"

#include <cmath>

#include <boost/math/distributions/gamma.hpp>

#include "cdsmooth/errors.hpp"

namespace cdsmooth {

double nees(const Vector& x_true, const GaussianMarginal& g) {
  if (x_true.size() != g.dim()) throw InvalidArgument("nees: dimension mismatch");
  const Vector e = x_true - g.mean();
  const JitteredCholesky chol = robust_cholesky(g.cov());
  return e.dot(chol.solve(e));
}

double block_rmse(const std::vector<std::vector<Vector>>& truths,
                  const std::vector<std::vector<Vector>>& estimates, std::span<const int> block) {
  if (truths.size() != estimates.size()) throw InvalidArgument("block_rmse: trial count mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i].size() != estimates[i].size()) {
      throw InvalidArgument("block_rmse: grid mismatch");
    }
    for (std::size_t n = 0; n < truths[i].size(); ++n) {
      for (int c : block) sum += std::pow(truths[i][n][c] - estimates[i][n][c], 2);
      ++count;
    }
  }
  if (count == 0) throw InvalidArgument("block_rmse: no samples");
  return std::sqrt(sum / static_cast<double>(count));
}

Chi2Band chi2_average_band(int dof, int trials, double level) {
  if (dof <= 0 || trials <= 0) throw InvalidArgument("chi2_average_band: dof and trials must be > 0");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("chi2_average_band: level in (0, 1)");
  const double k = static_cast<double>(trials);
  const boost::math::gamma_distribution<double> dist(0.5 * k * dof, 2.0 / k);
  const double tail = 0.5 * (1.0 - level);
  return {boost::math::quantile(dist, tail), boost::math::quantile(dist, 1.0 - tail)};
}

}  // namespace cdsmooth
