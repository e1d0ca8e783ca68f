#pragma once

#include <chrono>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "steerfair/analytics.hpp"
#include "steerfair/config.hpp"
#include "steerfair/constraints.hpp"
#include "steerfair/impossibility.hpp"
#include "steerfair/io.hpp"
#include "steerfair/manifolds.hpp"
#include "steerfair/markets.hpp"
#include "steerfair/population.hpp"
#include "steerfair/solver.hpp"
#include "steerfair/svg.hpp"

#ifndef STEERFAIR_VERSION
#define STEERFAIR_VERSION "0.1.0"
#endif

namespace steerfair {

// ---------------------------------------------------------------------------
// Typed configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  ModelSpec population;
  SolverConfig solver;
  std::optional<double> nu;  // absent: kappa / sqrt(min group count)
  double nu_kappa = 2.0;
  double dual_bound = 10.0;            // B for the ex-post system (alg1)
  double dual_bound_baselines = 200.0; // B for the ex-ante baseline systems
  std::optional<double> eps_baselines; // saddle tolerance for baseline runs
  bool randomized_baselines = true;    // baselines deploy the iterate mixture
  std::vector<std::string> methods;
  Eigen::Index n_train = 500, n_test = 500;  // per-group sample counts
  std::uint64_t seed_train = 0, seed_test = 1;
  bool plots = true;
};

struct FeasibilityConfig {
  ModelSpec population;
  std::string kind = "exante";  // "exante" or "cost"
  int n_points = 100;
  std::uint64_t seed = 0;
  double k1 = 1.0, k2 = 0.0;
  double null_scale = 1.0;
};

struct DemoConfig {
  std::string kind = "continuous";  // "continuous" or "coate_loury"
  DiscriminationForm form = DiscriminationForm::SkillGap;
  int n_workers = 20000;
  int grid_points = 101;
  std::uint64_t seed = 0;
  ContinuousMarket1D continuous;
  CoateLouryMarket coate_loury;
};

namespace detail {

inline Eigen::VectorXd vector_field(const toml::Table& t, const std::string& key, int dim) {
  if (!t.has(key)) throw ConfigError("missing config key: " + key);
  // Scalar shorthand: a constant vector of length dim.
  try {
    const double scalar = t.get_double(key);
    return Eigen::VectorXd::Constant(dim, scalar);
  } catch (const ConfigError&) {
  }
  const std::vector<double> vals = t.get_double_array(key);
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

}  // namespace detail

inline ModelSpec load_model_spec(const toml::Table& t, const std::string& section = "population") {
  auto key = [&](const char* k) { return section + "." + k; };
  ModelSpec spec;
  spec.dim = static_cast<int>(t.get_int(key("d")));
  spec.mu_a = detail::vector_field(t, key("mu_a"), spec.dim);
  spec.mu_d = detail::vector_field(t, key("mu_d"), spec.dim);
  spec.beta = detail::vector_field(t, key("beta"), spec.dim);
  spec.cost_a = t.get_double(key("cost_a"));
  spec.cost_d = t.get_double(key("cost_d"));
  if (t.has(key("mask"))) spec.mask = detail::vector_field(t, key("mask"), spec.dim);
  if (t.has(key("lambda_a"))) spec.lambda_a = t.get_double(key("lambda_a"));
  spec.variant = t.get_string_or(key("variant"), "direct");
  if (t.has(key("loading"))) {
    const std::string loading = t.get_string(key("loading"));
    if (loading != "identity")
      throw ConfigError("only loading = \"identity\" is supported in config files");
    spec.loading = Eigen::MatrixXd::Identity(spec.dim, spec.dim);
  }
  spec.reg_weight = t.get_double_or(key("reg_weight"), 1.0);
  spec.reg_weighted_by_group = t.get_bool_or(key("reg_weighted_by_group"), true);
  return spec;
}

inline SolverConfig load_solver_config(const toml::Table& t) {
  SolverConfig s;
  s.eps = t.get_double_or("solver.eps", 0.05);
  s.max_iters = static_cast<int>(t.get_int_or("solver.max_iters", 2000));
  s.eta_scale = t.get_double_or("solver.eta_scale", 1.0);
  s.rho = t.get_double_or("solver.rho", 1.0);
  s.randomized = t.get_bool_or("solver.randomized", false);
  s.check_stride = static_cast<int>(t.get_int_or("solver.check_stride", 10));
  s.fresh_restart_stride =
      static_cast<int>(t.get_int_or("solver.fresh_restart_stride", 10));
  s.warm_steps = static_cast<int>(t.get_int_or("solver.warm_steps", 0));
  s.oracle.restarts = static_cast<int>(t.get_int_or("solver.oracle_restarts", 5));
  s.oracle.steps = static_cast<int>(t.get_int_or("solver.oracle_steps", 500));
  s.oracle.step_size = t.get_double_or("solver.oracle_step_size", 1.0);
  s.oracle.seed = static_cast<std::uint64_t>(t.get_int_or("solver.oracle_seed", 0));
  s.oracle.theta_max = t.get_double_or("solver.theta_max", 10.0);
  return s;
}


namespace detail {

/// Strictness: a key that parsed but was never consumed is a typo or a
/// misplaced setting; surface it instead of silently defaulting.
inline void reject_unread_keys(const toml::Table& t) {
  const auto unread = t.unread_keys();
  if (unread.empty()) return;
  std::string msg = "unknown config key(s):";
  for (const auto& k : unread) msg += " " + k;
  throw ConfigError(msg);
}

}  // namespace detail

inline ExperimentConfig load_experiment_config(const toml::Table& t) {
  ExperimentConfig c;
  c.population = load_model_spec(t);
  c.solver = load_solver_config(t);
  if (t.has("constraints.nu")) c.nu = t.get_double("constraints.nu");
  c.nu_kappa = t.get_double_or("constraints.kappa", 2.0);
  c.dual_bound = t.get_double_or("constraints.B", 10.0);
  c.dual_bound_baselines = t.get_double_or("constraints.B_baselines", 200.0);
  if (t.has("solver.eps_baselines"))
    c.eps_baselines = t.get_double("solver.eps_baselines");
  c.randomized_baselines = t.get_bool_or("experiment.randomized_baselines", true);
  if (!t.has("experiment.methods")) throw ConfigError("missing config key: experiment.methods");
  c.methods = t.get_string_array("experiment.methods");
  if (c.methods.empty()) throw ConfigError("experiment.methods must not be empty");
  c.n_train = t.get_int_or("experiment.n_train", 500);
  c.n_test = t.get_int_or("experiment.n_test", 500);
  c.seed_train = static_cast<std::uint64_t>(t.get_int_or("experiment.seed_train", 0));
  c.seed_test = static_cast<std::uint64_t>(t.get_int_or("experiment.seed_test", 1));
  c.plots = t.get_bool_or("output.plots", true);
  for (const std::string& m : c.methods)
    if (m != "alg1" && m != "exante_dp" && m != "exante_fpr" && m != "exante_fnr" &&
        m != "exante_suff")
      throw ConfigError("unknown method: " + m);
  detail::reject_unread_keys(t);
  return c;
}

inline FeasibilityConfig load_feasibility_config(const toml::Table& t) {
  FeasibilityConfig c;
  c.population = load_model_spec(t);
  c.kind = t.get_string_or("feasibility.case", "exante");
  if (c.kind != "exante" && c.kind != "cost")
    throw ConfigError("feasibility.case must be \"exante\" or \"cost\"");
  c.n_points = static_cast<int>(t.get_int_or("feasibility.n_points", 100));
  c.seed = static_cast<std::uint64_t>(t.get_int_or("feasibility.seed", 0));
  c.k1 = t.get_double_or("feasibility.k1", 1.0);
  c.k2 = t.get_double_or("feasibility.k2", 0.0);
  c.null_scale = t.get_double_or("feasibility.null_scale", 1.0);
  detail::reject_unread_keys(t);
  return c;
}

inline DemoConfig load_demo_config(const toml::Table& t) {
  DemoConfig c;
  c.kind = t.get_string_or("demo.kind", "continuous");
  c.n_workers = static_cast<int>(t.get_int_or("demo.n_workers", 20000));
  c.grid_points = static_cast<int>(t.get_int_or("demo.grid_points", 101));
  c.seed = static_cast<std::uint64_t>(t.get_int_or("demo.seed", 0));
  if (c.kind == "continuous") {
    const std::string form = t.get_string_or("demo.discrimination", "skill_gap");
    if (form == "skill_gap")
      c.form = DiscriminationForm::SkillGap;
    else if (form == "cost_gap")
      c.form = DiscriminationForm::CostGap;
    else
      throw ConfigError("demo.discrimination must be \"skill_gap\" or \"cost_gap\"");
    ContinuousMarket1D m;
    m.wage = t.get_double_or("market.wage", 2.0);
    m.cost_a = t.get_double_or("market.cost_a", 6.0);
    m.cost_d = t.get_double_or("market.cost_d", 6.0);
    m.m0 = t.get_double_or("market.m0", 0.0);
    m.m1 = t.get_double_or("market.m1", 2.0);
    m.skill_mean_a = t.get_double_or("market.skill_mean_a", 1.0);
    m.skill_mean_d = t.get_double_or("market.skill_mean_d", 0.0);
    m.skill_sd_a = t.get_double_or("market.skill_sd_a", 1.0);
    m.skill_sd_d = t.get_double_or("market.skill_sd_d", 1.0);
    m.s_span = t.get_double_or("market.s_span", 10.0);
    c.continuous = make_continuous_market(m);
  } else if (c.kind == "coate_loury") {
    CoateLouryMarket m;
    m.wage = t.get_double_or("market.wage", 1.0);
    const std::string family = t.get_string_or("market.cost_family", "exponential");
    const double pa = t.get_double_or("market.cost_param_a", 2.0);
    const double pd = t.get_double_or("market.cost_param_d", 1.0);
    if (family == "exponential") {
      m.cost_a = CostFamily::exponential(pa);
      m.cost_d = CostFamily::exponential(pd);
    } else if (family == "uniform") {
      m.cost_a = CostFamily::uniform(pa);
      m.cost_d = CostFamily::uniform(pd);
    } else {
      throw ConfigError("market.cost_family must be \"exponential\" or \"uniform\"");
    }
    m.m0 = t.get_double_or("market.m0", 0.0);
    m.m1 = t.get_double_or("market.m1", 2.0);
    m.pi_a = t.get_double_or("market.pi_a", 0.5);
    m.pi_d = t.get_double_or("market.pi_d", 0.5);
    m.p_plus = t.get_double_or("market.p_plus", 1.0);
    m.p_minus = t.get_double_or("market.p_minus", 1.0);
    c.coate_loury = make_coate_loury_market(m);
  } else {
    throw ConfigError("demo.kind must be \"continuous\" or \"coate_loury\"");
  }
  detail::reject_unread_keys(t);
  return c;
}

// ---------------------------------------------------------------------------
// Experiment pipeline
// ---------------------------------------------------------------------------

struct RunOptions {
  bool no_plots = false;
  int threads = 1;
  std::optional<std::uint64_t> seed_override;  // replaces train seed; test gets +1
};

inline ConstraintSystem system_for_method(const std::string& method, double nu, double bound) {
  if (method == "alg1") return build_expost_system(nu, bound);
  if (method == "exante_dp") return build_baseline_system(ConstraintMode::ExAnteDP, nu, bound);
  if (method == "exante_fpr") return build_baseline_system(ConstraintMode::ExAnteFPR, nu, bound);
  if (method == "exante_fnr") return build_baseline_system(ConstraintMode::ExAnteFNR, nu, bound);
  if (method == "exante_suff")
    return build_baseline_system(ConstraintMode::ExAnteSuff, nu, bound);
  throw ConfigError("unknown method: " + method);
}

/// Raw ex-post moment violation ||A mu_hat||_inf against c = 0: the
/// cross-method comparable fairness-violation number.
inline double raw_expost_violation(const SampleSet& samples, const PolicyPair& theta,
                                   const PopulationModel& model) {
  const ConstraintSystem sys = build_expost_system(0.0, 1.0);
  return violation(sys, plugin_moments(samples, theta, model)).max_violation;
}

inline double raw_expost_violation(const SampleSet& samples,
                                   std::span<const PolicyPair> mixture,
                                   const PopulationModel& model) {
  const ConstraintSystem sys = build_expost_system(0.0, 1.0);
  return violation(sys, plugin_moments(samples, mixture, model)).max_violation;
}

struct MethodOutcome {
  std::string name;
  ReductionResult result;
  bool mixture_deployed = false;  // metrics evaluate the randomized mixture
  FairnessReport train_report, test_report;
  double train_epr = 0.0, test_epr = 0.0;
  double train_violation_raw = 0.0, test_violation_raw = 0.0;
  double train_violation_relaxed = 0.0;  // against the method's own c_hat
};

struct ExperimentOutcome {
  PopulationModel model;
  SampleSet train, test;
  double nu = 0.0;
  std::vector<MethodOutcome> methods;
  bool all_certified = true;
  double wall_seconds = 0.0;
};

namespace detail {

inline MethodOutcome run_method(const std::string& name, const ExperimentConfig& cfg,
                                const PopulationModel& model, const SampleSet& train,
                                const SampleSet& test, double nu) {
  MethodOutcome out;
  out.name = name;
  const bool baseline = name != "alg1";
  const double bound = baseline ? cfg.dual_bound_baselines : cfg.dual_bound;
  const ConstraintSystem system = system_for_method(name, nu, bound);
  SolverConfig solver = cfg.solver;
  if (baseline && cfg.randomized_baselines) solver.randomized = true;
  if (baseline && cfg.eps_baselines) solver.eps = *cfg.eps_baselines;
  out.result = run_reduction(train, model, system, solver);

  out.mixture_deployed = out.result.randomized.has_value();
  if (out.mixture_deployed) {
    const std::span<const PolicyPair> mix(out.result.randomized->support);
    out.train_report = fairness_report(train, mix, model);
    out.test_report = fairness_report(test, mix, model);
    out.train_epr = plugin_epr(train, mix, model);
    out.test_epr = plugin_epr(test, mix, model);
    out.train_violation_raw = raw_expost_violation(train, mix, model);
    out.test_violation_raw = raw_expost_violation(test, mix, model);
    detail::LagrangianEvaluator eval(train, model, system);
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(system.arity());
    for (const PolicyPair& p : mix) avg += eval.constraint_moments(p);
    avg /= static_cast<double>(mix.size());
    out.train_violation_relaxed = violation(system, avg).max_violation;
  } else {
    const PolicyPair& policy = out.result.policy;
    out.train_report = fairness_report(train, policy, model);
    out.test_report = fairness_report(test, policy, model);
    out.train_epr = plugin_epr(train, policy, model);
    out.test_epr = plugin_epr(test, policy, model);
    out.train_violation_raw = raw_expost_violation(train, policy, model);
    out.test_violation_raw = raw_expost_violation(test, policy, model);
    detail::LagrangianEvaluator eval(train, model, system);
    out.train_violation_relaxed =
        violation(system, eval.constraint_moments(policy)).max_violation;
  }
  return out;
}

inline void write_mixture_csv(const std::filesystem::path& path,
                              const RandomizedPolicy& mixture) {
  CsvWriter csv(path);
  if (mixture.support.empty()) return;
  const Eigen::Index dim = mixture.support.front().theta_a.size();
  std::vector<std::string> header{"t", "group"};
  for (Eigen::Index i = 0; i < dim; ++i) header.push_back("theta_" + std::to_string(i));
  csv.row(header);
  for (std::size_t t = 0; t < mixture.support.size(); ++t) {
    for (Group g : kGroups) {
      std::vector<std::string> row{std::to_string(t + 1), group_name(g)};
      const Eigen::VectorXd& th = mixture.support[t][g];
      for (Eigen::Index i = 0; i < th.size(); ++i) row.push_back(format_double(th[i]));
      csv.row(row);
    }
  }
}

inline std::vector<PolicyPair> read_mixture_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mixture file: " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<PolicyPair> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    cells.push_back(cur);
    if (cells.size() < 3) throw ConfigError("malformed mixture file");
    Eigen::VectorXd theta(static_cast<Eigen::Index>(cells.size() - 2));
    for (std::size_t i = 2; i < cells.size(); ++i)
      theta[static_cast<Eigen::Index>(i - 2)] = std::stod(cells[i]);
    if (cells[1] == "A")
      out.emplace_back(theta, theta);
    else
      out.back().theta_d = theta;
  }
  return out;
}

inline void write_trace_csv(const std::filesystem::path& path, const ReductionTrace& trace) {
  CsvWriter csv(path);
  if (trace.iterations.empty()) return;
  const auto& first = trace.iterations.front();
  std::vector<std::string> header{"t"};
  for (Eigen::Index k = 0; k < first.lambda.size(); ++k)
    header.push_back("lambda_" + std::to_string(k));
  for (Eigen::Index i = 0; i < first.theta.theta_a.size(); ++i)
    header.push_back("theta_a_" + std::to_string(i));
  for (Eigen::Index i = 0; i < first.theta.theta_d.size(); ++i)
    header.push_back("theta_d_" + std::to_string(i));
  for (Eigen::Index i = 0; i < first.moments.size(); ++i)
    header.push_back("moment_" + std::to_string(i));
  header.insert(header.end(), {"violation_max", "epr", "primal_gap", "dual_gap"});
  csv.row(header);
  for (const auto& rec : trace.iterations) {
    std::vector<std::string> row{std::to_string(rec.t)};
    for (Eigen::Index k = 0; k < rec.lambda.size(); ++k)
      row.push_back(format_double(rec.lambda[k]));
    for (Eigen::Index i = 0; i < rec.theta.theta_a.size(); ++i)
      row.push_back(format_double(rec.theta.theta_a[i]));
    for (Eigen::Index i = 0; i < rec.theta.theta_d.size(); ++i)
      row.push_back(format_double(rec.theta.theta_d[i]));
    for (Eigen::Index i = 0; i < rec.moments.size(); ++i)
      row.push_back(format_double(rec.moments[i]));
    row.push_back(format_double(rec.max_violation));
    row.push_back(format_double(rec.epr));
    row.push_back(format_double(rec.primal_gap));
    row.push_back(format_double(rec.dual_gap));
    csv.row(row);
  }
}

inline void write_metrics_csv(const std::filesystem::path& path,
                              const ExperimentOutcome& outcome,
                              const ExperimentConfig& cfg) {
  CsvWriter csv(path);
  csv.row({"method", "split", "group", "m_res", "m_par", "m_fpr", "m_fnr", "m_ppv",
           "m_npv", "err_rate", "epr", "violation_inf", "seed"});
  for (const MethodOutcome& m : outcome.methods) {
    for (const char* split : {"train", "test"}) {
      const bool is_train = std::string(split) == "train";
      const FairnessReport& r = is_train ? m.train_report : m.test_report;
      const double epr = is_train ? m.train_epr : m.test_epr;
      const double viol = is_train ? m.train_violation_raw : m.test_violation_raw;
      const std::uint64_t seed = is_train ? cfg.seed_train : cfg.seed_test;
      for (Group g : kGroups) {
        csv.row({m.name, split, group_name(g), format_double(r.response[g]),
                 format_double(r.parity[g]), format_double(r.fpr[g]),
                 format_double(r.fnr[g]), format_double(r.ppv[g]),
                 format_double(r.npv[g]), format_double(r.err_rate[g]),
                 format_double(epr), format_double(viol), std::to_string(seed)});
      }
    }
  }
}

inline void write_policies_csv(const std::filesystem::path& path,
                               const std::vector<MethodOutcome>& methods) {
  CsvWriter csv(path);
  if (methods.empty()) return;
  const Eigen::Index dim = methods.front().result.policy.theta_a.size();
  std::vector<std::string> header{"method", "group"};
  for (Eigen::Index i = 0; i < dim; ++i) header.push_back("theta_" + std::to_string(i));
  csv.row(header);
  for (const MethodOutcome& m : methods) {
    for (Group g : kGroups) {
      std::vector<std::string> row{m.name, group_name(g)};
      const Eigen::VectorXd& th = m.result.policy[g];
      for (Eigen::Index i = 0; i < th.size(); ++i) row.push_back(format_double(th[i]));
      csv.row(row);
    }
  }
}

inline void write_figure(const std::filesystem::path& path,
                         const std::vector<MethodOutcome>& methods) {
  std::vector<std::string> labels;
  for (const auto& m : methods) labels.push_back(m.name);
  BarPanel suff{"sufficiency gap (test)", labels, {}};
  BarPanel sep{"separation gap (test)", labels, {}};
  BarPanel resp{"response gap (test)", labels, {}};
  BarPanel err{"error-rate gap (test)", labels, {}};
  for (const auto& m : methods) {
    suff.values.push_back(m.test_report.sufficiency_gap());
    sep.values.push_back(m.test_report.separation_gap());
    resp.values.push_back(m.test_report.response_gap);
    err.values.push_back(m.test_report.err_rate_gap);
  }
  write_bar_figure(path, {suff, sep, resp, err});
}

inline void echo_config(ManifestWriter& manifest, const toml::Table* table) {
  if (!table) return;
  for (const auto& [key, value] : table->entries()) {
    std::string rendered;
    if (value.is_string())
      rendered = "\"" + std::get<std::string>(value.data) + "\"";
    else if (value.is_int())
      rendered = std::to_string(std::get<std::int64_t>(value.data));
    else if (value.is_float())
      rendered = format_double(std::get<double>(value.data));
    else if (value.is_bool())
      rendered = std::get<bool>(value.data) ? "true" : "false";
    else
      rendered = "\"<array>\"";
    manifest.raw("config." + key + " = " + rendered);
  }
}

}  // namespace detail

/// Runs the configured methods end to end: sample, solve, evaluate both
/// splits, and write metrics.csv, per-method traces, policies.csv, the run
/// manifest and (optionally) the gap figure. Deterministic given the config;
/// methods may run in parallel threads without changing any output byte.
inline ExperimentOutcome run_experiment(const ExperimentConfig& config_in,
                                        const std::filesystem::path& out_dir,
                                        const RunOptions& options = {},
                                        const toml::Table* config_echo = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = config_in;
  if (options.seed_override) {
    cfg.seed_train = *options.seed_override;
    cfg.seed_test = *options.seed_override + 1;
  }
  if (cfg.methods.empty()) throw ConfigError("no methods configured");
  // Unset group proportion defaults to the sampled proportion n_A/(n_A+n_D).
  if (!cfg.population.lambda_a)
    cfg.population.lambda_a = static_cast<double>(cfg.n_train) /
                              static_cast<double>(cfg.n_train + cfg.n_train);

  ExperimentOutcome outcome;
  outcome.model = validate_model(cfg.population);
  outcome.train = sample_population(outcome.model, cfg.n_train, cfg.n_train, cfg.seed_train);
  outcome.test = sample_population(outcome.model, cfg.n_test, cfg.n_test, cfg.seed_test);
  outcome.nu = cfg.nu ? *cfg.nu : default_nu(cfg.n_train, cfg.n_train, cfg.nu_kappa);

  std::filesystem::create_directories(out_dir);

  const int threads = std::max(1, options.threads);
  outcome.methods.resize(cfg.methods.size());
  if (threads == 1 || cfg.methods.size() == 1) {
    for (std::size_t i = 0; i < cfg.methods.size(); ++i)
      outcome.methods[i] = detail::run_method(cfg.methods[i], cfg, outcome.model,
                                              outcome.train, outcome.test, outcome.nu);
  } else {
    std::vector<std::future<MethodOutcome>> futures;
    futures.reserve(cfg.methods.size());
    for (std::size_t i = 0; i < cfg.methods.size(); ++i)
      futures.push_back(std::async(std::launch::async, [&, i] {
        return detail::run_method(cfg.methods[i], cfg, outcome.model, outcome.train,
                                  outcome.test, outcome.nu);
      }));
    for (std::size_t i = 0; i < futures.size(); ++i) outcome.methods[i] = futures[i].get();
  }

  for (const MethodOutcome& m : outcome.methods) {
    outcome.all_certified = outcome.all_certified && m.result.succeeded();
    const auto method_dir = out_dir / m.name;
    std::filesystem::create_directories(method_dir);
    detail::write_trace_csv(method_dir / "trace.csv", m.result.trace);
    if (m.mixture_deployed)
      detail::write_mixture_csv(method_dir / "mixture.csv", *m.result.randomized);
  }
  detail::write_metrics_csv(out_dir / "metrics.csv", outcome, cfg);
  detail::write_policies_csv(out_dir / "policies.csv", outcome.methods);
  if (cfg.plots && !options.no_plots)
    detail::write_figure(out_dir / "figure.svg", outcome.methods);

  outcome.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ManifestWriter manifest(out_dir / "manifest.txt");
  manifest.set("tool_version", std::string(STEERFAIR_VERSION));
  manifest.set("generator_name", std::string(kGeneratorName));
  manifest.set("seed_train", static_cast<std::int64_t>(cfg.seed_train));
  manifest.set("seed_test", static_cast<std::int64_t>(cfg.seed_test));
  manifest.set("nu", outcome.nu);
  manifest.set("dual_bound", cfg.dual_bound);
  manifest.set("dual_bound_baselines", cfg.dual_bound_baselines);
  manifest.set("all_certified", outcome.all_certified);
  // Resolved model fields, including defaulted ones (effort mask, group
  // proportion) that the config may have left unset.
  {
    std::string mask;
    for (int i = 0; i < outcome.model.dim; ++i) {
      if (i) mask += ',';
      mask += outcome.model.mask[i] == 1.0 ? '1' : '0';
    }
    manifest.set("resolved.mask", mask);
    manifest.set("resolved.lambda_a", outcome.model.lambda_a);
    manifest.set("resolved.reg_weight", outcome.model.reg_weight);
    manifest.set("resolved.reg_weighted_by_group", outcome.model.reg_weighted_by_group);
    manifest.set("resolved.variant",
                 std::string(outcome.model.is_latent() ? "latent" : "direct"));
  }
  for (const MethodOutcome& m : outcome.methods) {
    const std::string p = "method." + m.name + ".";
    manifest.set(p + "iterations", static_cast<std::int64_t>(m.result.iterations));
    manifest.set(p + "certified", m.result.succeeded());
    manifest.set(p + "randomized", m.mixture_deployed);
    manifest.set(p + "primal_gap", m.result.trace.certificate.primal_gap);
    manifest.set(p + "dual_gap", m.result.trace.certificate.dual_gap);
    manifest.set(p + "realized_rho", m.result.trace.certificate.realized_rho);
    manifest.set(p + "train_violation_raw", m.train_violation_raw);
    manifest.set(p + "test_violation_raw", m.test_violation_raw);
    manifest.set(p + "train_violation_relaxed", m.train_violation_relaxed);
  }
  manifest.set("wall_time_seconds", outcome.wall_seconds);
  detail::echo_config(manifest, config_echo);
  return outcome;
}

/// Writes the two sample matrices of a split as CSV (group column + features).
inline void write_samples_csv(const std::filesystem::path& path, const SampleSet& samples) {
  CsvWriter csv(path);
  std::vector<std::string> header{"group"};
  for (Eigen::Index j = 0; j < samples.rows_a.cols(); ++j)
    header.push_back("x_" + std::to_string(j));
  csv.row(header);
  for (Group g : kGroups) {
    const Eigen::MatrixXd& rows = samples.rows(g);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      std::vector<std::string> row{group_name(g)};
      for (Eigen::Index j = 0; j < rows.cols(); ++j)
        row.push_back(format_double(rows(i, j)));
      csv.row(row);
    }
  }
}

/// Loads policies.csv written by run_experiment (method, group, theta columns).
inline std::vector<std::pair<std::string, PolicyPair>> read_policies_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policies file: " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::pair<std::string, PolicyPair>> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    cells.push_back(cur);
    if (cells.size() < 3) throw ConfigError("malformed policies file");
    Eigen::VectorXd theta(static_cast<Eigen::Index>(cells.size() - 2));
    for (std::size_t i = 2; i < cells.size(); ++i)
      theta[static_cast<Eigen::Index>(i - 2)] = std::stod(cells[i]);
    if (out.empty() || out.back().first != cells[0] || cells[1] == "A") {
      out.emplace_back(cells[0], PolicyPair(theta, theta));
    }
    if (cells[1] == "A")
      out.back().second.theta_a = theta;
    else
      out.back().second.theta_d = theta;
  }
  return out;
}

/// Re-evaluates saved policies on freshly generated splits; writes metrics.csv.
/// A method with a persisted mixture (<out>/<method>/mixture.csv) is evaluated
/// as the mixture, reproducing the training run's metrics exactly.
inline void evaluate_policies(const ExperimentConfig& cfg,
                              const std::vector<std::pair<std::string, PolicyPair>>& policies,
                              const std::filesystem::path& out_dir) {
  ExperimentConfig resolved = cfg;
  if (!resolved.population.lambda_a) resolved.population.lambda_a = 0.5;
  ExperimentOutcome outcome;
  outcome.model = validate_model(resolved.population);
  outcome.train =
      sample_population(outcome.model, resolved.n_train, resolved.n_train, resolved.seed_train);
  outcome.test =
      sample_population(outcome.model, resolved.n_test, resolved.n_test, resolved.seed_test);
  for (const auto& [name, policy] : policies) {
    MethodOutcome m;
    m.name = name;
    m.result.policy = policy;
    const auto mixture_path = out_dir / name / "mixture.csv";
    if (std::filesystem::exists(mixture_path)) {
      const std::vector<PolicyPair> support = detail::read_mixture_csv(mixture_path);
      const std::span<const PolicyPair> mix(support);
      m.mixture_deployed = true;
      m.train_report = fairness_report(outcome.train, mix, outcome.model);
      m.test_report = fairness_report(outcome.test, mix, outcome.model);
      m.train_epr = plugin_epr(outcome.train, mix, outcome.model);
      m.test_epr = plugin_epr(outcome.test, mix, outcome.model);
      m.train_violation_raw = raw_expost_violation(outcome.train, mix, outcome.model);
      m.test_violation_raw = raw_expost_violation(outcome.test, mix, outcome.model);
    } else {
      m.train_report = fairness_report(outcome.train, policy, outcome.model);
      m.test_report = fairness_report(outcome.test, policy, outcome.model);
      m.train_epr = plugin_epr(outcome.train, policy, outcome.model);
      m.test_epr = plugin_epr(outcome.test, policy, outcome.model);
      m.train_violation_raw = raw_expost_violation(outcome.train, policy, outcome.model);
      m.test_violation_raw = raw_expost_violation(outcome.test, policy, outcome.model);
    }
    outcome.methods.push_back(std::move(m));
  }
  std::filesystem::create_directories(out_dir);
  detail::write_metrics_csv(out_dir / "metrics.csv", outcome, resolved);
}

struct FeasibilityOutcome {
  std::vector<ManifoldPoint> points;
  double worst_gap = 0.0;
};

inline FeasibilityOutcome run_feasibility(const FeasibilityConfig& cfg,
                                          const std::filesystem::path& out_dir,
                                          const toml::Table* config_echo = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const PopulationModel model = validate_model(cfg.population);
  FeasibilityOutcome outcome;
  if (cfg.kind == "exante")
    outcome.points = construct_exante_feasible(model, cfg.seed, cfg.n_points, cfg.null_scale);
  else
    outcome.points = construct_cost_feasible(model, cfg.k1, cfg.k2, cfg.seed, cfg.n_points);

  std::filesystem::create_directories(out_dir);
  CsvWriter csv(out_dir / "points.csv");
  std::vector<std::string> header{"point"};
  const int dim = static_cast<int>(outcome.points.front().theta.theta_a.size());
  for (int i = 0; i < dim; ++i) header.push_back("theta_a_" + std::to_string(i));
  for (int i = 0; i < dim; ++i) header.push_back("theta_d_" + std::to_string(i));
  header.insert(header.end(), {"residual_max", "mean_gap", "cov_gap", "max_gap"});
  csv.row(header);
  for (std::size_t i = 0; i < outcome.points.size(); ++i) {
    const ManifoldPoint& pt = outcome.points[i];
    std::vector<std::string> row{std::to_string(i)};
    for (int j = 0; j < dim; ++j) row.push_back(format_double(pt.theta.theta_a[j]));
    for (int j = 0; j < dim; ++j) row.push_back(format_double(pt.theta.theta_d[j]));
    const ResidualVector res = residuals(pt.theta, model);
    const EqualityCheck check = verify_equality(pt.theta, model, 1e-8);
    row.push_back(format_double(res.max_abs()));
    row.push_back(format_double(check.mean_gap));
    row.push_back(format_double(check.cov_gap));
    row.push_back(format_double(check.max_gap()));
    outcome.worst_gap = std::max(outcome.worst_gap, check.max_gap());
    csv.row(row);
  }

  ManifestWriter manifest(out_dir / "manifest.txt");
  manifest.set("tool_version", std::string(STEERFAIR_VERSION));
  manifest.set("generator_name", std::string(kGeneratorName));
  manifest.set("case", cfg.kind);
  manifest.set("n_points", static_cast<std::int64_t>(cfg.n_points));
  manifest.set("seed", static_cast<std::int64_t>(cfg.seed));
  manifest.set("worst_gap", outcome.worst_gap);
  manifest.set("wall_time_seconds",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  detail::echo_config(manifest, config_echo);
  return outcome;
}

inline void run_demo(const DemoConfig& cfg, const std::filesystem::path& out_dir,
                     const toml::Table* config_echo = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);
  CsvWriter csv(out_dir / "sweep.csv");
  if (cfg.kind == "continuous") {
    const auto grid =
        default_threshold_grid(cfg.continuous.m0, cfg.continuous.m1, cfg.grid_points);
    const auto rows =
        continuous_gap_sweep(cfg.continuous, grid, cfg.form, cfg.n_workers, cfg.seed);
    csv.row({"threshold", "response_a", "response_d", "gap", "positive_incentive"});
    for (const auto& r : rows)
      csv.row({format_double(r.threshold), format_double(r.response_a),
               format_double(r.response_d), format_double(r.gap),
               r.positive_incentive ? "1" : "0"});
  } else {
    const auto grid =
        default_threshold_grid(cfg.coate_loury.m0, cfg.coate_loury.m1, cfg.grid_points);
    const auto rows = coate_loury_equal_treatment_scan(cfg.coate_loury, grid);
    csv.row({"theta_a", "theta_d", "tpr_a", "fpr_a", "tpr_d", "fpr_d", "pi_a", "pi_d",
             "equal_treatment"});
    for (const auto& r : rows)
      csv.row({format_double(r.theta_a), format_double(r.theta_d), format_double(r.tpr_a),
               format_double(r.fpr_a), format_double(r.tpr_d), format_double(r.fpr_d),
               format_double(r.pi_a), format_double(r.pi_d),
               r.equal_treatment ? "1" : "0"});
  }
  ManifestWriter manifest(out_dir / "manifest.txt");
  manifest.set("tool_version", std::string(STEERFAIR_VERSION));
  manifest.set("kind", cfg.kind);
  manifest.set("seed", static_cast<std::int64_t>(cfg.seed));
  // The assessment-signal family is a modeling choice; record it.
  manifest.set("signal_family", std::string("normal-unit-variance"));
  if (cfg.kind == "continuous") {
    manifest.set("signal_m0", cfg.continuous.m0);
    manifest.set("signal_m1", cfg.continuous.m1);
    manifest.set("discrimination", std::string(to_string(cfg.form)));
  } else {
    manifest.set("signal_m0", cfg.coate_loury.m0);
    manifest.set("signal_m1", cfg.coate_loury.m1);
    manifest.set("cost_family_a",
                 std::string(cfg.coate_loury.cost_a.kind == CostFamily::Kind::Exponential
                                 ? "exponential"
                                 : "uniform"));
    manifest.set("cost_param_a", cfg.coate_loury.cost_a.param);
    manifest.set("cost_param_d", cfg.coate_loury.cost_d.param);
  }
  manifest.set("wall_time_seconds",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  detail::echo_config(manifest, config_echo);
}

}  // namespace steerfair
