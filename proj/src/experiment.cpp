#include "cdsmooth/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cdsmooth/models.hpp"
#include "cdsmooth/simulate.hpp"

namespace cdsmooth {

namespace {

using nlohmann::json;

SmootherType parse_smoother(const std::string& s) {
  if (s == "type1star") return SmootherType::TypeIStar;
  if (s == "type2") return SmootherType::TypeII;
  if (s == "type3") return SmootherType::TypeIII;
  throw InvalidArgument("config: smoother must be type1star, type2 or type3, got '" + s + "'");
}

ApproximatorKind parse_approximator(const std::string& s) {
  if (s == "cubature") return ApproximatorKind::Cubature;
  if (s == "taylor1") return ApproximatorKind::Taylor1;
  throw InvalidArgument("config: approximator must be cubature or taylor1, got '" + s + "'");
}

std::vector<double> uniform_times(double first, double step, int count) {
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) t[static_cast<std::size_t>(k)] = first + step * k;
  return t;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

IterationMetrics evaluate(const ExperimentSetup& setup, const Mesh& mesh,
                          const std::vector<Vector>& truths, const SmoothTrajectory& s, int j) {
  std::vector<Vector> est;
  est.reserve(mesh.num_measurements());
  IterationMetrics m;
  m.iteration = j;
  double chi2 = 0.0;
  for (std::size_t k = 0; k < mesh.num_measurements(); ++k) {
    const GaussianMarginal& g = s.smoothed[mesh.measurement_node(k)];
    est.push_back(g.mean());
    m.nees.push_back(nees(truths[k], g));
    chi2 += m.nees.back();
  }
  const std::vector<std::vector<Vector>> tv{truths};
  const std::vector<std::vector<Vector>> ev{est};
  m.rmse_pos = block_rmse(tv, ev, setup.pos_block);
  m.rmse_vel = block_rmse(tv, ev, setup.vel_block);
  m.rmse_par = block_rmse(tv, ev, setup.par_block);
  m.chi2_avg = chi2 / static_cast<double>(mesh.num_measurements());
  return m;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");

  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "model") c.model = v.get<std::string>();
      else if (key == "kind") {
        const int k = v.get<int>();
        if (k != 1 && k != 2) throw InvalidArgument("config: kind must be 1 or 2");
        c.kind = static_cast<DiffusionKind>(k);
      } else if (key == "smoother") c.smoother = parse_smoother(v.get<std::string>());
      else if (key == "approximator") c.approximator = parse_approximator(v.get<std::string>());
      else if (key == "iterations") c.iterations = v.get<int>();
      else if (key == "tol") c.tol = v.get<double>();
      else if (key == "dt_integration") c.dt_integration = v.get<double>();
      else if (key == "substeps") c.substeps = v.get<int>();
      else if (key == "mc_runs") c.mc_runs = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "sim_dt") c.sim_dt = v.get<double>();
      else if (key == "radar_x") c.radar_x = v.get<double>();
      else if (key == "radar_y") c.radar_y = v.get<double>();
      else if (key == "psi_prior_var") c.psi_prior_var = v.get<double>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "threads") c.threads = v.get<int>();
      else throw InvalidArgument("config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["model"] = model;
  j["kind"] = static_cast<int>(kind);
  j["smoother"] = to_string(smoother);
  j["approximator"] = to_string(approximator);
  j["iterations"] = iterations;
  j["tol"] = tol;
  if (dt_integration) j["dt_integration"] = *dt_integration;
  if (substeps) j["substeps"] = *substeps;
  j["mc_runs"] = mc_runs;
  j["seed"] = seed;
  if (sim_dt) j["sim_dt"] = *sim_dt;
  if (radar_x) j["radar_x"] = *radar_x;
  if (radar_y) j["radar_y"] = *radar_y;
  if (psi_prior_var) j["psi_prior_var"] = *psi_prior_var;
  j["out_dir"] = out_dir;
  return j.dump(2);
}

void ExperimentConfig::validate() const {
  if (model != "linear" && model != "reentry" && model != "coordturn") {
    throw InvalidArgument("config: model must be linear, reentry or coordturn");
  }
  if (iterations < 0) throw InvalidArgument("config: iterations must be >= 0");
  if (!(tol > 0.0)) throw InvalidArgument("config: tol must be > 0");
  if (dt_integration && !(*dt_integration > 0.0)) {
    throw InvalidArgument("config: dt_integration must be > 0");
  }
  if (substeps && *substeps < 1) throw InvalidArgument("config: substeps must be >= 1");
  if (mc_runs < 1) throw InvalidArgument("config: mc_runs must be >= 1");
  if (sim_dt && !(*sim_dt > 0.0)) throw InvalidArgument("config: sim_dt must be > 0");
  if ((radar_x || radar_y) && model != "reentry") {
    throw InvalidArgument("config: radar_x/radar_y only apply to the reentry model");
  }
  if (psi_prior_var && (model != "coordturn" || !(*psi_prior_var > 0.0))) {
    throw InvalidArgument("config: psi_prior_var must be > 0 and only applies to coordturn");
  }
  if (out_dir.empty()) throw InvalidArgument("config: out_dir must not be empty");
  if (threads < 0) throw InvalidArgument("config: threads must be >= 0");
}

ExperimentSetup make_setup(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentSetup s;
  double interval = 1.0;
  double default_dt = 0.1;
  if (cfg.model == "linear") {
    s.model = models::linear_model();
    s.measurement_times = uniform_times(1.0, 1.0, 100);
    default_dt = 0.1;
    s.sim_dt = 1e-3;
    s.pos_block = {0, 1};
    s.vel_block = {2, 3};
  } else if (cfg.model == "reentry") {
    models::ReentryParams p;
    if (cfg.radar_x) p.radar_x = *cfg.radar_x;
    if (cfg.radar_y) p.radar_y = *cfg.radar_y;
    s.model = models::reentry_model(p);
    s.measurement_times = uniform_times(1.0, 1.0, 200);
    default_dt = 1.0 / 100.0;
    s.sim_dt = 1.0 / 1000.0;
    s.pos_block = {0, 1};
    s.vel_block = {2, 3};
    s.par_block = {4};
  } else {
    models::CoordTurnParams p;
    if (cfg.psi_prior_var) p.psi_prior_var = *cfg.psi_prior_var;
    s.model = models::coordturn_model(p);
    interval = p.meas_interval;
    s.measurement_times = uniform_times(0.0, p.meas_interval, p.num_measurements);
    default_dt = 5.0 / 100.0;
    s.sim_dt = 5.0 / 1000.0;
    s.pos_block = {0, 1, 2};
    s.vel_block = {3, 4, 5};
    s.par_block = {6};
  }
  s.model.validate();
  if (cfg.sim_dt) s.sim_dt = *cfg.sim_dt;
  const double dt = cfg.dt_integration.value_or(default_dt);
  s.substeps = cfg.substeps.value_or(static_cast<int>(std::lround(interval / dt)));
  if (s.substeps < 1) throw InvalidArgument("config: dt_integration exceeds the measurement interval");

  s.iteration.max_iters = cfg.iterations;
  s.iteration.tol = cfg.tol;
  s.iteration.smoother_type = cfg.smoother;
  s.iteration.kind = cfg.kind;
  s.iteration.approx = MomentApproximator(cfg.approximator);
  s.iteration.validate();
  return s;
}

TrialReport run_trial(const ExperimentSetup& setup, std::uint64_t seed, int trial) {
  const auto start = std::chrono::steady_clock::now();
  const auto tr = static_cast<std::uint64_t>(trial);
  const Mesh mesh(setup.measurement_times, setup.substeps);
  const Vector x0 = sample_prior(setup.model, derive_seed(seed, tr, StreamPurpose::Prior));
  const SimPath path = euler_maruyama(setup.model, x0, setup.sim_dt, mesh.nodes().back(),
                                      derive_seed(seed, tr, StreamPurpose::Process));
  const std::vector<Vector> ys =
      sample_measurements(path, setup.model, mesh, derive_seed(seed, tr, StreamPurpose::Measurement));
  std::vector<Vector> truths;
  truths.reserve(mesh.num_measurements());
  for (double t : mesh.measurement_times()) truths.push_back(path.state_at(t));

  const std::vector<IterationState> states = run_iterated(setup.model, mesh, ys, setup.iteration);

  TrialReport report;
  report.trial = trial;
  for (const IterationState& st : states) {
    report.iterations.push_back(evaluate(setup, mesh, truths, st.smooth, st.j));
    if (report.converged_at < 0 && st.delta < setup.iteration.tol) report.converged_at = st.j;
  }
  while (static_cast<int>(report.iterations.size()) <= setup.iteration.max_iters) {
    IterationMetrics pad = report.iterations.back();
    pad.iteration = static_cast<int>(report.iterations.size());
    report.iterations.push_back(std::move(pad));
  }
  report.wall_seconds = seconds_since(start);
  return report;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentSetup setup = make_setup(cfg);
  const int n = cfg.mc_runs;

  std::vector<std::optional<TrialReport>> reports(static_cast<std::size_t>(n));
  std::vector<std::string> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        reports[static_cast<std::size_t>(i)] = run_trial(setup, cfg.seed, i);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(i)] = e.what();
      }
    }
  };
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int workers = std::min(n, cfg.threads > 0 ? cfg.threads : hw);
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  ExperimentResult result;
  result.config = cfg;
  result.measurement_times = setup.measurement_times;
  for (int i = 0; i < n; ++i) {
    auto& r = reports[static_cast<std::size_t>(i)];
    if (r) result.trials.push_back(std::move(*r));
    else result.failures.push_back({i, errors[static_cast<std::size_t>(i)]});
  }
  if (10 * result.failures.size() > static_cast<std::size_t>(n)) {
    std::string msg = std::to_string(result.failures.size()) + " of " + std::to_string(n) +
                      " trials failed (limit 10%); first: " + result.failures.front().message;
    throw Error(msg);
  }

  const auto ok = static_cast<double>(result.trials.size());
  const int dof = setup.model.state_dim;
  const Chi2Band band = chi2_average_band(dof, static_cast<int>(result.trials.size()));
  for (int j = 0; j <= cfg.iterations; ++j) {
    SummaryRow row;
    row.iteration = j;
    for (const TrialReport& t : result.trials) {
      const IterationMetrics& m = t.iterations[static_cast<std::size_t>(j)];
      row.rmse_pos += m.rmse_pos / ok;
      row.rmse_vel += m.rmse_vel / ok;
      row.rmse_par += m.rmse_par / ok;
      row.chi2_avg += m.chi2_avg / ok;
    }
    result.summary.push_back(row);
    for (std::size_t k = 0; k < setup.measurement_times.size(); ++k) {
      Chi2Row c;
      c.time = setup.measurement_times[k];
      c.iteration = j;
      for (const TrialReport& t : result.trials) {
        c.chi2_mean += t.iterations[static_cast<std::size_t>(j)].nees[k] / ok;
      }
      c.band = band;
      result.chi2.push_back(c);
    }
  }
  result.wall_seconds = seconds_since(start);
  return result;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  std::string trials = "trial,iteration,rmse_pos,rmse_vel,rmse_par,chi2_avg\n";
  for (const TrialReport& t : result.trials) {
    for (const IterationMetrics& m : t.iterations) {
      trials += std::to_string(t.trial) + "," + std::to_string(m.iteration) + "," +
                fmt(m.rmse_pos) + "," + fmt(m.rmse_vel) + "," + fmt(m.rmse_par) + "," +
                fmt(m.chi2_avg) + "\n";
    }
  }
  write_file(out_dir / "trials.csv", trials);

  std::string chi2 = "time,iteration,chi2_mean,band_lo,band_hi\n";
  for (const Chi2Row& c : result.chi2) {
    chi2 += fmt(c.time) + "," + std::to_string(c.iteration) + "," + fmt(c.chi2_mean) + "," +
            fmt(c.band.lo) + "," + fmt(c.band.hi) + "\n";
  }
  write_file(out_dir / "chi2_timeseries.csv", chi2);

  std::string summary = "iteration,rmse_pos,rmse_vel,rmse_par,chi2_avg\n";
  for (const SummaryRow& r : result.summary) {
    summary += std::to_string(r.iteration) + "," + fmt(r.rmse_pos) + "," + fmt(r.rmse_vel) + "," +
               fmt(r.rmse_par) + "," + fmt(r.chi2_avg) + "\n";
  }
  write_file(out_dir / "summary.csv", summary);

  // Resolved settings, so a run can be interpreted without the config file.
  const ExperimentSetup setup = make_setup(result.config);
  nlohmann::ordered_json meta;
  meta["config"] = nlohmann::json::parse(result.config.to_json_text());
  meta["state_dim"] = setup.model.state_dim;
  meta["substeps"] = setup.substeps;
  meta["sim_dt"] = setup.sim_dt;
  meta["num_measurements"] = setup.measurement_times.size();
  if (result.config.model == "coordturn") {
    meta["psi_prior_var"] = setup.model.prior.cov()(6, 6);
  }
  if (result.config.model == "reentry") {
    const models::ReentryParams p;
    meta["radar_x"] = result.config.radar_x.value_or(p.radar_x);
    meta["radar_y"] = result.config.radar_y.value_or(p.radar_y);
  }
  meta["trials_ok"] = result.trials.size();
  meta["trials_failed"] = result.failures.size();
  nlohmann::ordered_json fails = nlohmann::ordered_json::array();
  for (const TrialFailure& f : result.failures) fails.push_back({{"trial", f.trial}, {"error", f.message}});
  meta["failures"] = fails;
  write_file(out_dir / "metadata.json", meta.dump(2) + "\n");
}

}  // namespace cdsmooth
