#include <cmath>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "cdsmooth/experiment.hpp"
#include "cdsmooth/metrics.hpp"
#include "cdsmooth/models.hpp"
#include "cdsmooth/simulate.hpp"
#include "toy_models.hpp"

using namespace cdsmooth;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cdsmooth_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Seeds, StreamsAreDistinctAndStable) {
  EXPECT_EQ(derive_seed(7, 3, StreamPurpose::Process), derive_seed(7, 3, StreamPurpose::Process));
  EXPECT_NE(derive_seed(7, 3, StreamPurpose::Process), derive_seed(7, 3, StreamPurpose::Measurement));
  EXPECT_NE(derive_seed(7, 3, StreamPurpose::Prior), derive_seed(7, 4, StreamPurpose::Prior));
  EXPECT_NE(derive_seed(7, 3, StreamPurpose::Prior), derive_seed(8, 3, StreamPurpose::Prior));
}

TEST(EulerMaruyama, DeterministicStep) {
  const ModelSpec m = toy::scalar([](double x) { return -x; }, [](double) { return 0.0; },
                                  [](double x) { return x; }, 1.0, 0.0, 1.0, true);
  const SimPath path = euler_maruyama(m, Vector::Constant(1, 1.0), 0.1, 0.1, 0);
  ASSERT_EQ(path.states.size(), 2u);
  EXPECT_DOUBLE_EQ(path.states[1][0], 0.9);
}

TEST(EulerMaruyama, BrownianVariance) {
  const double q = 0.7, T = 1.0;
  const ModelSpec m = toy::scalar([](double) { return 0.0; }, [=](double) { return q; },
                                  [](double x) { return x; }, 1.0, 0.0, 1.0, true);
  const int paths = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < paths; ++i) {
    const double x = euler_maruyama(m, Vector::Zero(1), 0.1, T, static_cast<std::uint64_t>(i)).states.back()[0];
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / paths;
  const double var = sum2 / paths - mean * mean;
  const double expected = q * q * T;
  // Standard error of the sample variance of a Gaussian: σ²·√(2/(n−1)).
  EXPECT_NEAR(var, expected, 3.0 * expected * std::sqrt(2.0 / (paths - 1)));
}

TEST(EulerMaruyama, SameSeedSamePath) {
  const ModelSpec m = models::reentry_model();
  const SimPath a = euler_maruyama(m, m.prior.mean(), 0.01, 2.0, 42);
  const SimPath b = euler_maruyama(m, m.prior.mean(), 0.01, 2.0, 42);
  ASSERT_EQ(a.states.size(), 201u);
  for (std::size_t n = 0; n < a.states.size(); ++n) EXPECT_EQ(a.states[n], b.states[n]);
  EXPECT_EQ(&a.state_at(1.004), &a.states[100]);
}

TEST(SampleMeasurements, ZeroNoiseGivesExactValues) {
  ModelSpec m = models::linear_model();
  m.meas_noise = Matrix::Zero(2, 2);
  const SimPath path = euler_maruyama(m, m.prior.mean(), 0.01, 3.0, 5);
  const Mesh mesh({1.0, 2.0, 3.0}, 4);
  const auto ys = sample_measurements(path, m, mesh, 9);
  ASSERT_EQ(ys.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    const double t = mesh.measurement_times()[k];
    EXPECT_LT((ys[k] - m.measurement(t, path.state_at(t))).norm(), 1e-15);
  }
}

TEST(SampleMeasurements, CountAndReproducibility) {
  const ModelSpec m = models::linear_model();
  const SimPath path = euler_maruyama(m, m.prior.mean(), 0.01, 1.0, 5);
  const Mesh mesh({1.0}, 4);
  const auto a = sample_measurements(path, m, mesh, 9);
  const auto b = sample_measurements(path, m, mesh, 9);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], b[0]);
}

TEST(Nees, Examples) {
  const GaussianMarginal g1(Vector::Zero(1), Matrix::Identity(1, 1));
  EXPECT_DOUBLE_EQ(nees(Vector::Zero(1), g1), 0.0);
  EXPECT_DOUBLE_EQ(nees(Vector::Constant(1, 1.0), g1), 1.0);
  const GaussianMarginal g2(Vector::Zero(2), Matrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(nees(Vector::Ones(2), g2), 2.0);
  EXPECT_THROW(nees(Vector::Ones(2), GaussianMarginal(Vector::Zero(2), Matrix::Zero(2, 2))),
               DegenerateCovariance);
}

TEST(BlockRmse, Examples) {
  const std::vector<int> block{0};
  const std::vector<std::vector<Vector>> truth{{Vector::Zero(2), Vector::Zero(2)}};
  EXPECT_DOUBLE_EQ(block_rmse(truth, truth, block), 0.0);
  std::vector<std::vector<Vector>> est{{Vector::Constant(2, 1.5), Vector::Constant(2, 1.5)}};
  EXPECT_DOUBLE_EQ(block_rmse(truth, est, block), 1.5);
  est = {{Vector::Zero(2), Vector::Constant(2, 2.0)}};
  EXPECT_DOUBLE_EQ(block_rmse(truth, est, block), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(block_rmse(truth, est, std::vector<int>{}), 0.0);
}

TEST(Chi2Band, SingleTrialMatchesChiSquareQuantiles) {
  // χ²₂ has CDF 1 − exp(−x/2), so its quantiles are closed form.
  const Chi2Band b = chi2_average_band(2, 1);
  EXPECT_NEAR(b.lo, -2.0 * std::log(0.975), 1e-10);
  EXPECT_NEAR(b.hi, -2.0 * std::log(0.025), 1e-10);
}

TEST(Chi2Band, NarrowsWithTrials) {
  const Chi2Band b = chi2_average_band(4, 100);
  EXPECT_LT(b.lo, 4.0);
  EXPECT_GT(b.hi, 4.0);
  // Normal approximation: 4 ± 1.96·√(2·4/100).
  EXPECT_NEAR(b.hi - b.lo, 2 * 1.96 * std::sqrt(0.08), 0.02);
}

TEST(Config, ParsesAndValidates) {
  const ExperimentConfig c = ExperimentConfig::from_json_text(
      R"({"model":"reentry","kind":2,"smoother":"type2","approximator":"taylor1",)"
      R"("iterations":2,"mc_runs":3,"seed":11,"radar_x":6375.0})");
  EXPECT_EQ(c.model, "reentry");
  EXPECT_EQ(c.kind, DiffusionKind::Second);
  EXPECT_EQ(c.smoother, SmootherType::TypeII);
  EXPECT_EQ(c.approximator, ApproximatorKind::Taylor1);
  EXPECT_EQ(c.mc_runs, 3);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.radar_x, 6375.0);
  const ExperimentConfig back = ExperimentConfig::from_json_text(c.to_json_text());
  EXPECT_EQ(back.to_json_text(), c.to_json_text());
}

TEST(Config, RejectsBadInput) {
  for (const char* text : {
           R"({"model":"pendulum"})",
           R"({"modle":"linear"})",
           R"({"kind":3})",
           R"({"smoother":"type4"})",
           R"({"iterations":-1})",
           R"({"mc_runs":0})",
           R"({"tol":0})",
           R"({"model":"linear","radar_x":1.0})",
           R"({"model":"reentry","psi_prior_var":1.0})",
           R"({"model":"coordturn","psi_prior_var":-1.0})",
           R"({"kind":"one"})",
           R"([1,2])",
           R"({not json)",
       }) {
    EXPECT_THROW(ExperimentConfig::from_json_text(text), InvalidArgument) << text;
  }
  EXPECT_THROW(ExperimentConfig::from_file("/nonexistent/config.json"), InvalidArgument);
}

TEST(Setup, ModelDefaults) {
  ExperimentConfig c;
  c.model = "reentry";
  ExperimentSetup s = make_setup(c);
  EXPECT_EQ(s.measurement_times.size(), 200u);
  EXPECT_EQ(s.substeps, 100);
  EXPECT_EQ(s.par_block, std::vector<int>{4});
  c.model = "coordturn";
  s = make_setup(c);
  EXPECT_EQ(s.measurement_times.size(), 26u);
  EXPECT_DOUBLE_EQ(s.measurement_times.back(), 150.0);
  EXPECT_EQ(s.pos_block, (std::vector<int>{0, 1, 2}));
  c.model = "linear";
  c.dt_integration = 0.25;
  s = make_setup(c);
  EXPECT_EQ(s.substeps, 4);
}

TEST(Experiment, SingleTrialNoIterationStructure) {
  ExperimentConfig c;
  c.model = "linear";
  c.iterations = 0;
  c.mc_runs = 1;
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.trials.size(), 1u);
  ASSERT_EQ(r.trials[0].iterations.size(), 1u);
  EXPECT_EQ(r.summary.size(), 1u);
  EXPECT_EQ(r.chi2.size(), r.measurement_times.size());
  const auto dir = scratch_dir("structure");
  write_outputs(r, dir);
  const std::string trials = slurp(dir / "trials.csv");
  EXPECT_EQ(std::count(trials.begin(), trials.end(), '\n'), 2);
  std::filesystem::remove_all(dir);
}

TEST(Experiment, OutputsAreByteDeterministic) {
  ExperimentConfig c;
  c.model = "reentry";
  c.iterations = 1;
  c.mc_runs = 3;
  c.substeps = 10;
  c.seed = 5;
  const auto da = scratch_dir("det_a");
  const auto db = scratch_dir("det_b");
  c.threads = 1;
  write_outputs(run_experiment(c), da);
  c.threads = 3;
  write_outputs(run_experiment(c), db);
  for (const char* f : {"trials.csv", "summary.csv", "chi2_timeseries.csv"}) {
    EXPECT_EQ(slurp(da / f), slurp(db / f)) << f;
  }
  std::filesystem::remove_all(da);
  std::filesystem::remove_all(db);
}

TEST(Experiment, LinearChiSquareAverageNearDimension) {
  ExperimentConfig c;
  c.model = "linear";
  c.iterations = 0;
  c.mc_runs = 100;
  c.seed = 1;
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.trials.size(), 100u);
  EXPECT_GE(r.summary[0].chi2_avg, 3.0);
  EXPECT_LE(r.summary[0].chi2_avg, 5.0);
}
