#include "puflearn/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "puflearn/errors.hpp"
#include "puflearn/experiments.hpp"
#include "puflearn/io.hpp"
#include "puflearn/lwe.hpp"
#include "puflearn/parallel.hpp"

namespace puflearn::cli {

namespace {

using nlohmann::json;

/// Flat JSON config; values act as defaults, explicit flags win.
struct ConfigSource {
  json values;
  bool present = false;

  template <typename T>
  void apply(const std::string& key, T& var) const {
    if (present && values.contains(key)) var = values.at(key).get<T>();
  }
};

ConfigSource load_config(const std::vector<std::string>& args) {
  ConfigSource cfg;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open " + path);
  try {
    in >> cfg.values;
  } catch (const json::exception& e) {
    throw InvalidArgument("config: " + std::string(e.what()));
  }
  if (!cfg.values.is_object()) throw InvalidArgument("config: expected a JSON object");
  cfg.present = true;
  return cfg;
}

std::string digest_of(const json& effective) { return hex64(fnv1a64(effective.dump())); }

// Shared PUF/noise/distribution parameters.
struct PufArgs {
  std::int64_t n_mask = 8;
  std::int64_t n_detector = 4;
  std::uint64_t seed = 1;
  std::string dist = "uniform";
  double q = 0.5;
  std::string noise = "none";
  double noise_a = 0.05;
  double noise_sigma = 0.05;
  double noise_alpha = 0.1;
  std::vector<double> eta;  // nonempty: nonlinear token

  void from_config(const ConfigSource& cfg) {
    cfg.apply("N", n_mask);
    cfg.apply("M", n_detector);
    cfg.apply("seed", seed);
    cfg.apply("dist", dist);
    cfg.apply("q", q);
    cfg.apply("noise", noise);
    cfg.apply("noise-a", noise_a);
    cfg.apply("noise-sigma", noise_sigma);
    cfg.apply("noise-alpha", noise_alpha);
    cfg.apply("eta", eta);
  }

  void add_options(CLI::App& app) {
    app.add_option("--N", n_mask, "mask pixels")->capture_default_str();
    app.add_option("--M", n_detector, "detector pixels")->capture_default_str();
    app.add_option("--seed", seed, "root seed")->capture_default_str();
    app.add_option("--dist", dist, "challenge distribution: uniform|binary|bernoulli")
        ->capture_default_str();
    app.add_option("--q", q, "Bernoulli parameter")->capture_default_str();
    app.add_option("--noise", noise, "noise model: none|uniform|tgauss")->capture_default_str();
    app.add_option("--noise-a", noise_a, "bounded uniform half width")->capture_default_str();
    app.add_option("--noise-sigma", noise_sigma, "truncated Gaussian sigma")->capture_default_str();
    app.add_option("--noise-alpha", noise_alpha, "truncated Gaussian band")->capture_default_str();
    app.add_option("--eta", eta, "nonlinear strengths (empty: linear token)");
  }

  ChallengeDist make_dist() const {
    if (dist == "uniform") return ChallengeDist::uniform();
    if (dist == "binary") return ChallengeDist::binary();
    if (dist == "bernoulli") return ChallengeDist::bernoulli(q);
    throw InvalidArgument("unknown challenge distribution: " + dist);
  }

  NoiseModel make_noise() const {
    if (noise == "none") return NoiseModel::none();
    if (noise == "uniform") return NoiseModel::bounded_uniform(noise_a);
    if (noise == "tgauss") return NoiseModel::truncated_gaussian(noise_sigma, noise_alpha);
    throw InvalidArgument("unknown noise model: " + noise);
  }

  AnyPuf make_puf() const {
    if (eta.empty()) return new_linear_puf(n_mask, n_detector, derive_seed(seed, 0));
    return new_nonlinear_puf(n_mask, n_detector, eta, derive_seed(seed, 0));
  }

  void echo(json& j) const {
    j["N"] = n_mask;
    j["M"] = n_detector;
    j["seed"] = seed;
    j["dist"] = dist;
    j["q"] = q;
    j["noise"] = noise;
    j["noise-a"] = noise_a;
    j["noise-sigma"] = noise_sigma;
    j["noise-alpha"] = noise_alpha;
    j["eta"] = eta;
  }
};

int cmd_simulate(const PufArgs& puf_args, std::int64_t count, const std::string& out,
                 const std::string& puf_out, const json& effective) {
  const std::string digest = digest_of(effective);
  const AnyPuf puf = puf_args.make_puf();
  Rng rng = derive_stream(puf_args.seed, 2);
  const CrpSet crps =
      collect_crps(puf, puf_args.make_dist(), count, puf_args.make_noise(), rng);

  CsvWriter csv(out);
  write_standard_header(csv, "simulate", effective.dump(), digest);
  std::vector<std::string> cols;
  for (Index j = 0; j < crps.challenges.cols(); ++j) cols.push_back("challenge_" + std::to_string(j));
  cols.push_back("pixel");
  cols.push_back("response");
  csv.columns(cols);
  for (Index i = 0; i < crps.challenges.rows(); ++i) {
    for (Index pix = 0; pix < crps.responses.cols(); ++pix) {
      std::vector<std::string> cells;
      for (Index j = 0; j < crps.challenges.cols(); ++j)
        cells.push_back(format_double(crps.challenges(i, j)));
      cells.push_back(std::to_string(pix));
      cells.push_back(format_double(crps.responses(i, pix)));
      csv.row(cells);
    }
  }

  if (!puf_out.empty()) {
    std::ofstream f(puf_out);
    if (!f) throw InvalidArgument("cannot open " + puf_out);
    json j = json::parse(puf_to_json(puf));
    j["config_digest"] = digest;
    f << j.dump() << "\n";
  }
  return 0;
}

int cmd_attack(const PufArgs& puf_args, AttackSetup setup, const std::string& model_out,
               const std::string& metrics_out, const std::string& puf_out, const json& effective) {
  const std::string digest = digest_of(effective);
  setup.n_mask = puf_args.n_mask;
  setup.n_detector = puf_args.n_detector;
  setup.dist = puf_args.make_dist();
  setup.noise = puf_args.make_noise();
  setup.eta = puf_args.eta;

  const AttackOutcome outcome = run_attack(setup, puf_args.seed);

  if (!model_out.empty()) {
    std::ofstream f(model_out);
    if (!f) throw InvalidArgument("cannot open " + model_out);
    f << model_to_json(outcome.model,
                       {{"config_digest", digest}, {"config", effective.dump()}, {"version", kToolVersion}})
      << "\n";
  }

  CsvWriter csv(metrics_out);
  write_standard_header(csv, "attack", effective.dump(), digest);
  csv.comment("wall-ms: " + format_double(outcome.wall_ms));
  csv.columns({"m", "n_features", "kept", "xi_hat", "xi_analytic", "max_err", "certificate_max",
               "pass"});
  const std::string cert =
      outcome.pac.certificate ? format_double(outcome.pac.certificate->maxCoeff()) : std::string();
  csv.row({std::to_string(outcome.m_used), std::to_string(outcome.model.basis.size()),
           std::to_string(outcome.model.whitening.kept_dim()), format_double(outcome.xi_hat),
           format_double(outcome.xi_analytic), format_double(outcome.pac.max_err), cert,
           outcome.pac.pass ? "1" : "0"});

  if (!puf_out.empty()) {
    std::ofstream f(puf_out);
    if (!f) throw InvalidArgument("cannot open " + puf_out);
    json j = json::parse(puf_to_json(puf_args.make_puf()));
    j["config_digest"] = digest;
    f << j.dump() << "\n";
  }
  return 0;
}

int cmd_sweep(const PufArgs& puf_args, AttackSetup setup, const std::string& vary,
              const std::vector<double>& grid, std::int64_t trials, const std::string& out,
              const json& effective) {
  const std::string digest = digest_of(effective);
  setup.n_mask = puf_args.n_mask;
  setup.n_detector = puf_args.n_detector;
  setup.dist = puf_args.make_dist();
  setup.noise = puf_args.make_noise();
  setup.eta = puf_args.eta;

  SweepParam param;
  if (vary == "m") param = SweepParam::SampleCount;
  else if (vary == "N") param = SweepParam::MaskPixels;
  else if (vary == "taue") param = SweepParam::NoiseTau;
  else throw InvalidArgument("sweep: --vary must be m, N, or taue");

  const auto points = run_sweep(setup, param, grid, trials, puf_args.seed);

  CsvWriter csv(out);
  write_standard_header(csv, "sweep", effective.dump(), digest);
  csv.columns({"param", "value", "trials", "success_rate", "median_max_err", "m_bound"});
  for (const auto& p : points)
    csv.row({vary, format_double(p.value), std::to_string(p.trials), format_double(p.success_rate),
             format_double(p.median_max_err), format_double(p.m_bound)});
  return 0;
}

int cmd_bounds(std::int64_t n, std::int64_t n_mask, std::int64_t n_detector, int degree,
               double epsilon, double delta, double tau_e, double xi, double eta_override,
               const std::string& out, const json& effective) {
  const std::string digest = digest_of(effective);
  BoundInputs inputs;
  inputs.n = n > 0 ? n : feature_dim(static_cast<int>(n_mask), degree);
  inputs.n_mask = n_mask;
  inputs.n_detector = n_detector;
  inputs.epsilon = epsilon;
  inputs.delta = delta;
  inputs.tau_e = tau_e;
  inputs.xi = xi;
  inputs.order = degree >= 6 ? (degree - 2) / 4 : 0;
  if (eta_override > 0) inputs.eta = eta_override;

  const BoundReport report = sample_bound(inputs);
  json j;
  j["n"] = inputs.n;
  j["m_eigen"] = report.m_eigen;
  j["m_error"] = report.m_error;
  j["m_required"] = report.m_required;
  j["eta"] = report.eta;
  j["chernoff_fail"] = report.chernoff_fail;
  j["time_estimate"] = report.time_estimate;
  j["config_digest"] = digest;
  std::cout << j.dump() << "\n";
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw InvalidArgument("cannot open " + out);
    f << j.dump() << "\n";
  }
  return 0;
}

int cmd_chernoff(std::int64_t n_mask, const std::string& dist, double q, std::uint64_t seed,
                 int degree, std::int64_t m, double eta, std::int64_t trials,
                 const std::string& out, const json& effective) {
  const std::string digest = digest_of(effective);
  ChallengeDist challenge_dist;
  if (dist == "uniform") challenge_dist = ChallengeDist::uniform();
  else if (dist == "binary") challenge_dist = ChallengeDist::binary();
  else if (dist == "bernoulli") challenge_dist = ChallengeDist::bernoulli(q);
  else throw InvalidArgument("unknown challenge distribution: " + dist);

  ChernoffSpec spec{challenge_dist, static_cast<Index>(n_mask), degree};
  if (m <= 0) {
    const MonomialBasis basis(static_cast<int>(n_mask), degree);
    const auto whitening = whiten(analytic_second_moment(basis, spec.dist));
    m = static_cast<std::int64_t>(std::ceil(m_min_eigen_floor(basis.size(), whitening.xi_hat, eta)));
  }
  const ChernoffResult result = chernoff_validate(spec, m, trials, seed);

  CsvWriter csv(out);
  write_standard_header(csv, "chernoff", effective.dump(), digest);
  csv.columns({"m", "trials", "failures", "empirical_rate", "bound", "xi", "n", "kept"});
  csv.row({std::to_string(m), std::to_string(result.trials), std::to_string(result.failures),
           format_double(result.empirical_rate), format_double(result.bound),
           format_double(result.xi), std::to_string(result.n), std::to_string(result.kept_dim)});
  return 0;
}

int cmd_lwe(std::int64_t n, std::int64_t p, double sigma, std::int64_t m, std::int64_t seeds,
            const std::string& modular, double heldout, std::uint64_t root_seed,
            const std::string& out, const json& effective) {
  const std::string digest = digest_of(effective);
  if (m <= 0) m = 50 * n;
  std::vector<bool> modes;
  if (modular == "both") modes = {false, true};
  else if (modular == "on") modes = {true};
  else if (modular == "off") modes = {false};
  else throw InvalidArgument("lwe-demo: --modular must be both, on, or off");

  struct Row {
    std::int64_t seed;
    bool modular;
    bool recovered;
    double median;
  };
  std::vector<Row> rows(modes.size() * static_cast<std::size_t>(seeds));
  parallel_for(rows.size(), [&](std::size_t flat) {
    const std::size_t mode_idx = flat / static_cast<std::size_t>(seeds);
    const auto seed_idx = static_cast<std::int64_t>(flat % static_cast<std::size_t>(seeds));
    LweParams params{static_cast<int>(n), p, static_cast<Index>(m), sigma, modes[mode_idx]};
    const auto set = gen_lwe(params, derive_seed(root_seed, flat));
    const auto result = ls_attack_lwe(set, heldout);
    rows[flat] = {seed_idx, modes[mode_idx], result.recovered, result.median_centered_residual};
  });

  CsvWriter csv(out);
  write_standard_header(csv, "lwe-demo", effective.dump(), digest);
  csv.columns({"seed", "modular", "recovered", "median_heldout_residual"});
  for (const auto& r : rows)
    csv.row({std::to_string(r.seed), r.modular ? "1" : "0", r.recovered ? "1" : "0",
             format_double(r.median)});
  return 0;
}

int cmd_orientations(double side, double pos_err, double ang_err, const std::string& out,
                     const std::string& poses_out, const json& effective) {
  const std::string digest = digest_of(effective);
  const OrientationGrid grid{side, pos_err, ang_err};
  const auto counts = orientation_lattice_counts(grid);
  const double bound = orientation_bound(grid);

  CsvWriter csv(out);
  write_standard_header(csv, "orientations", effective.dump(), digest);
  csv.columns({"L", "ell", "alpha", "positions_per_axis", "angles_per_axis", "lattice_count",
               "bound"});
  csv.row({format_double(side), format_double(pos_err), format_double(ang_err),
           std::to_string(counts.per_axis_position), std::to_string(counts.per_axis_angle),
           std::to_string(counts.total), format_double(bound)});

  if (!poses_out.empty()) {
    CsvWriter poses(poses_out);
    write_standard_header(poses, "orientations", effective.dump(), digest);
    poses.columns({"x", "y", "theta", "phi"});
    for (const auto& pose : enumerate_orientations(grid))
      poses.row({format_double(pose[0]), format_double(pose[1]), format_double(pose[2]),
                 format_double(pose[3])});
  }
  return 0;
}

int dispatch(const std::vector<std::string>& args) {
  const ConfigSource cfg = load_config(args);

  CLI::App app{"Optical PUF simulation, least-squares modeling attack, and bound validation"};
  app.set_version_flag("--version", std::string("puflearn ") + kToolVersion);
  app.require_subcommand(1);

  std::string config_path;  // consumed by load_config; registered so parsing accepts it

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "emit a challenge/response dump for a seeded token");
  PufArgs sim_puf;
  sim_puf.from_config(cfg);
  std::int64_t sim_count = 100;
  std::string sim_out = "crps.csv", sim_puf_out;
  cfg.apply("count", sim_count);
  cfg.apply("out", sim_out);
  cfg.apply("puf-out", sim_puf_out);
  sim_puf.add_options(*sim);
  sim->add_option("--config", config_path, "JSON config file");
  sim->add_option("--count", sim_count, "number of challenges")->capture_default_str();
  sim->add_option("--out", sim_out, "CRP CSV path")->capture_default_str();
  sim->add_option("--puf-out", sim_puf_out, "token JSON path (optional)");

  // --- attack ---
  auto* atk = app.add_subcommand("attack", "run the least-squares attack and accuracy check");
  PufArgs atk_puf;
  atk_puf.from_config(cfg);
  AttackSetup atk_setup;
  std::string atk_model_out = "model.json", atk_metrics_out = "metrics.csv", atk_puf_out;
  std::int64_t atk_m = 0, atk_pilot = 0, atk_pac = 1000;
  int atk_degree = 2;
  cfg.apply("degree", atk_degree);
  cfg.apply("epsilon", atk_setup.epsilon);
  cfg.apply("delta", atk_setup.delta);
  cfg.apply("m", atk_m);
  cfg.apply("pilot", atk_pilot);
  cfg.apply("pac-samples", atk_pac);
  cfg.apply("threshold-scale", atk_setup.threshold_scale);
  cfg.apply("model-out", atk_model_out);
  cfg.apply("metrics-out", atk_metrics_out);
  cfg.apply("puf-out", atk_puf_out);
  atk_puf.add_options(*atk);
  atk->add_option("--config", config_path, "JSON config file");
  atk->add_option("--degree", atk_degree, "feature degree")->capture_default_str();
  atk->add_option("--epsilon", atk_setup.epsilon, "target accuracy")->capture_default_str();
  atk->add_option("--delta", atk_setup.delta, "failure budget")->capture_default_str();
  atk->add_option("--m", atk_m, "CRP count (0: from the sample bound)")->capture_default_str();
  atk->add_option("--pilot", atk_pilot, "pilot challenges (0: max(10n, 10^4))")
      ->capture_default_str();
  atk->add_option("--pac-samples", atk_pac, "accuracy probe count")->capture_default_str();
  atk->add_option("--threshold-scale", atk_setup.threshold_scale, "eigenvalue drop scale")
      ->capture_default_str();
  atk->add_option("--model-out", atk_model_out, "model JSON path")->capture_default_str();
  atk->add_option("--metrics-out", atk_metrics_out, "metrics CSV path")->capture_default_str();
  atk->add_option("--puf-out", atk_puf_out, "token JSON path (optional)");

  // --- sweep ---
  auto* swp = app.add_subcommand("sweep", "learning curve over m, N, or the noise level");
  PufArgs swp_puf;
  swp_puf.from_config(cfg);
  AttackSetup swp_setup;
  std::string swp_vary = "m", swp_out = "sweep.csv";
  std::vector<double> swp_grid;
  std::int64_t swp_trials = 20, swp_m = 0, swp_pac = 1000;
  int swp_degree = 2;
  cfg.apply("degree", swp_degree);
  cfg.apply("epsilon", swp_setup.epsilon);
  cfg.apply("delta", swp_setup.delta);
  cfg.apply("vary", swp_vary);
  cfg.apply("grid", swp_grid);
  cfg.apply("trials", swp_trials);
  cfg.apply("m", swp_m);
  cfg.apply("pac-samples", swp_pac);
  cfg.apply("out", swp_out);
  swp_puf.add_options(*swp);
  swp->add_option("--config", config_path, "JSON config file");
  swp->add_option("--degree", swp_degree, "feature degree")->capture_default_str();
  swp->add_option("--epsilon", swp_setup.epsilon, "target accuracy")->capture_default_str();
  swp->add_option("--delta", swp_setup.delta, "failure budget")->capture_default_str();
  swp->add_option("--vary", swp_vary, "parameter to vary: m|N|taue")->capture_default_str();
  swp->add_option("--grid", swp_grid, "values of the varied parameter");
  swp->add_option("--trials", swp_trials, "trials per grid point")->capture_default_str();
  swp->add_option("--m", swp_m, "fixed CRP count when not varying m")->capture_default_str();
  swp->add_option("--pac-samples", swp_pac, "accuracy probe count")->capture_default_str();
  swp->add_option("--out", swp_out, "sweep CSV path")->capture_default_str();

  // --- bounds ---
  auto* bnd = app.add_subcommand("bounds", "evaluate the closed-form sample-size bounds");
  std::int64_t bnd_n = 0, bnd_N = 8, bnd_M = 4;
  int bnd_degree = 2;
  double bnd_eps = 0.1, bnd_delta = 0.1, bnd_tau = 0.05, bnd_xi = 0.01, bnd_eta = 0;
  std::string bnd_out;
  cfg.apply("n", bnd_n);
  cfg.apply("N", bnd_N);
  cfg.apply("M", bnd_M);
  cfg.apply("degree", bnd_degree);
  cfg.apply("epsilon", bnd_eps);
  cfg.apply("delta", bnd_delta);
  cfg.apply("tau-e", bnd_tau);
  cfg.apply("xi", bnd_xi);
  cfg.apply("eta", bnd_eta);
  cfg.apply("out", bnd_out);
  bnd->add_option("--config", config_path, "JSON config file");
  bnd->add_option("--N", bnd_N, "mask pixels")->capture_default_str();
  bnd->add_option("--M", bnd_M, "detector pixels")->capture_default_str();
  bnd->add_option("--n", bnd_n, "feature dimension (0: binomial(N+degree, degree))")
      ->capture_default_str();
  bnd->add_option("--degree", bnd_degree, "feature degree")->capture_default_str();
  bnd->add_option("--epsilon", bnd_eps, "target accuracy")->capture_default_str();
  bnd->add_option("--delta", bnd_delta, "failure budget")->capture_default_str();
  bnd->add_option("--tau-e", bnd_tau, "noise subgaussian parameter")->capture_default_str();
  bnd->add_option("--xi", bnd_xi, "minimum retained eigenvalue")->capture_default_str();
  bnd->add_option("--eta", bnd_eta, "explicit exponent (0: ln(2M/delta))")->capture_default_str();
  bnd->add_option("--out", bnd_out, "also write the report JSON here");

  // --- chernoff ---
  auto* chf = app.add_subcommand("chernoff", "Monte Carlo check of the eigenvalue tail bound");
  std::int64_t chf_N = 4, chf_m = 0, chf_trials = 200;
  std::uint64_t chf_seed = 1;
  int chf_degree = 2;
  double chf_eta = 2.0, chf_q = 0.5;
  std::string chf_dist = "uniform", chf_out = "chernoff.csv";
  cfg.apply("N", chf_N);
  cfg.apply("dist", chf_dist);
  cfg.apply("q", chf_q);
  cfg.apply("seed", chf_seed);
  cfg.apply("degree", chf_degree);
  cfg.apply("m", chf_m);
  cfg.apply("trials", chf_trials);
  cfg.apply("eta", chf_eta);
  cfg.apply("out", chf_out);
  chf->add_option("--config", config_path, "JSON config file");
  chf->add_option("--N", chf_N, "mask pixels")->capture_default_str();
  chf->add_option("--dist", chf_dist, "challenge distribution: uniform|binary|bernoulli")
      ->capture_default_str();
  chf->add_option("--q", chf_q, "Bernoulli parameter")->capture_default_str();
  chf->add_option("--seed", chf_seed, "root seed")->capture_default_str();
  chf->add_option("--degree", chf_degree, "feature degree")->capture_default_str();
  chf->add_option("--m", chf_m, "challenges per trial (0: eigen floor at --eta)")
      ->capture_default_str();
  chf->add_option("--trials", chf_trials, "Monte Carlo trials")->capture_default_str();
  chf->add_option("--eta", chf_eta, "exponent for the auto sample count")->capture_default_str();
  chf->add_option("--out", chf_out, "rate-vs-bound CSV path")->capture_default_str();

  // --- lwe-demo ---
  auto* lwe = app.add_subcommand("lwe-demo", "least squares vs modular reduction");
  std::int64_t lwe_n = 32, lwe_p = 97, lwe_m = 0, lwe_seeds = 100;
  double lwe_sigma = 2.0, lwe_heldout = 0.2;
  std::uint64_t lwe_seed = 1;
  std::string lwe_modular = "both", lwe_out = "lwe.csv";
  cfg.apply("n", lwe_n);
  cfg.apply("p", lwe_p);
  cfg.apply("m", lwe_m);
  cfg.apply("sigma", lwe_sigma);
  cfg.apply("seeds", lwe_seeds);
  cfg.apply("modular", lwe_modular);
  cfg.apply("heldout-fraction", lwe_heldout);
  cfg.apply("seed", lwe_seed);
  cfg.apply("out", lwe_out);
  lwe->add_option("--config", config_path, "JSON config file");
  lwe->add_option("--n", lwe_n, "secret dimension")->capture_default_str();
  lwe->add_option("--p", lwe_p, "modulus")->capture_default_str();
  lwe->add_option("--m", lwe_m, "samples per instance (0: 50n)")->capture_default_str();
  lwe->add_option("--sigma", lwe_sigma, "error width")->capture_default_str();
  lwe->add_option("--seeds", lwe_seeds, "instances per mode")->capture_default_str();
  lwe->add_option("--modular", lwe_modular, "both|on|off")->capture_default_str();
  lwe->add_option("--heldout-fraction", lwe_heldout, "held-out share")->capture_default_str();
  lwe->add_option("--seed", lwe_seed, "root seed")->capture_default_str();
  lwe->add_option("--out", lwe_out, "results CSV path")->capture_default_str();

  // --- orientations ---
  auto* ori = app.add_subcommand("orientations", "pose lattice count vs the closed-form cap");
  double ori_side = 1.0, ori_pos = 0.05, ori_ang = 0.05;
  std::string ori_out = "orientations.csv", ori_poses_out;
  cfg.apply("L", ori_side);
  cfg.apply("ell", ori_pos);
  cfg.apply("alpha", ori_ang);
  cfg.apply("out", ori_out);
  cfg.apply("poses-out", ori_poses_out);
  ori->add_option("--config", config_path, "JSON config file");
  ori->add_option("--L", ori_side, "illuminable side length")->capture_default_str();
  ori->add_option("--ell", ori_pos, "positional uncertainty")->capture_default_str();
  ori->add_option("--alpha", ori_ang, "angular uncertainty")->capture_default_str();
  ori->add_option("--out", ori_out, "summary CSV path")->capture_default_str();
  ori->add_option("--poses-out", ori_poses_out, "also list every pose here");

  std::vector<const char*> argv;
  argv.push_back("puflearn");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse diagnostic
    return code == 0 ? 0 : 2;
  }

  if (sim->parsed()) {
    json effective;
    sim_puf.echo(effective);
    effective["command"] = "simulate";
    effective["count"] = sim_count;
    return cmd_simulate(sim_puf, sim_count, sim_out, sim_puf_out, effective);
  }
  if (atk->parsed()) {
    atk_setup.degree = atk_degree;
    atk_setup.m = atk_m;
    atk_setup.pilot = atk_pilot;
    atk_setup.pac_samples = atk_pac;
    json effective;
    atk_puf.echo(effective);
    effective["command"] = "attack";
    effective["degree"] = atk_degree;
    effective["epsilon"] = atk_setup.epsilon;
    effective["delta"] = atk_setup.delta;
    effective["m"] = atk_m;
    effective["pilot"] = atk_pilot;
    effective["pac-samples"] = atk_pac;
    effective["threshold-scale"] = atk_setup.threshold_scale;
    return cmd_attack(atk_puf, atk_setup, atk_model_out, atk_metrics_out, atk_puf_out, effective);
  }
  if (swp->parsed()) {
    swp_setup.degree = swp_degree;
    swp_setup.m = swp_m;
    swp_setup.pac_samples = swp_pac;
    json effective;
    swp_puf.echo(effective);
    effective["command"] = "sweep";
    effective["degree"] = swp_degree;
    effective["epsilon"] = swp_setup.epsilon;
    effective["delta"] = swp_setup.delta;
    effective["vary"] = swp_vary;
    effective["grid"] = swp_grid;
    effective["trials"] = swp_trials;
    effective["m"] = swp_m;
    effective["pac-samples"] = swp_pac;
    return cmd_sweep(swp_puf, swp_setup, swp_vary, swp_grid, swp_trials, swp_out, effective);
  }
  if (bnd->parsed()) {
    json effective;
    effective["command"] = "bounds";
    effective["n"] = bnd_n;
    effective["N"] = bnd_N;
    effective["M"] = bnd_M;
    effective["degree"] = bnd_degree;
    effective["epsilon"] = bnd_eps;
    effective["delta"] = bnd_delta;
    effective["tau-e"] = bnd_tau;
    effective["xi"] = bnd_xi;
    effective["eta"] = bnd_eta;
    return cmd_bounds(bnd_n, bnd_N, bnd_M, bnd_degree, bnd_eps, bnd_delta, bnd_tau, bnd_xi,
                      bnd_eta, bnd_out, effective);
  }
  if (chf->parsed()) {
    json effective;
    effective["command"] = "chernoff";
    effective["N"] = chf_N;
    effective["dist"] = chf_dist;
    effective["q"] = chf_q;
    effective["seed"] = chf_seed;
    effective["degree"] = chf_degree;
    effective["m"] = chf_m;
    effective["trials"] = chf_trials;
    effective["eta"] = chf_eta;
    return cmd_chernoff(chf_N, chf_dist, chf_q, chf_seed, chf_degree, chf_m, chf_eta, chf_trials,
                        chf_out, effective);
  }
  if (lwe->parsed()) {
    json effective;
    effective["command"] = "lwe-demo";
    effective["n"] = lwe_n;
    effective["p"] = lwe_p;
    effective["m"] = lwe_m;
    effective["sigma"] = lwe_sigma;
    effective["seeds"] = lwe_seeds;
    effective["modular"] = lwe_modular;
    effective["heldout-fraction"] = lwe_heldout;
    effective["seed"] = lwe_seed;
    return cmd_lwe(lwe_n, lwe_p, lwe_sigma, lwe_m, lwe_seeds, lwe_modular, lwe_heldout, lwe_seed,
                   lwe_out, effective);
  }
  if (ori->parsed()) {
    json effective;
    effective["command"] = "orientations";
    effective["L"] = ori_side;
    effective["ell"] = ori_pos;
    effective["alpha"] = ori_ang;
    return cmd_orientations(ori_side, ori_pos, ori_ang, ori_out, ori_poses_out, effective);
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace puflearn::cli
