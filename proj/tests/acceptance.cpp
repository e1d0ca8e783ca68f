// Acceptance suite: every exit criterion of the project, one pass/fail line
// each, quantitative where a closed form or bound is available and
// property/threshold based for the end-to-end runs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "steerfair/experiment.hpp"

using namespace steerfair;

namespace {

int failures = 0;

class Criterion {
 public:
  explicit Criterion(std::string name) : name_(std::move(name)) {
    start_ = std::chrono::steady_clock::now();
  }

  void check(bool ok, const std::string& detail) {
    ok_ = ok_ && ok;
    if (!ok && detail_.empty()) detail_ = detail;
  }

  ~Criterion() {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::printf("[%s] %s (%.1fs)%s%s\n", ok_ ? "PASS" : "FAIL", name_.c_str(), secs,
                detail_.empty() ? "" : " -- ", detail_.c_str());
    std::fflush(stdout);
    if (!ok_) ++failures;
  }

 private:
  std::string name_;
  bool ok_ = true;
  std::string detail_;
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion_1_best_response() {
  Criterion c("1 closed-form best response vs brute-force utility argmax (100 cases, <= 1e-6)");
  std::mt19937_64 engine(1001);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> dim_dist(1, 3);
  std::uniform_real_distribution<double> cost_dist(0.5, 4.0);
  std::bernoulli_distribution coin(0.7);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = dim_dist(engine);
    ModelSpec spec;
    spec.dim = d;
    spec.mu_a = spec.mu_d = Eigen::VectorXd::Zero(d);
    spec.beta = Eigen::VectorXd::Ones(d);
    spec.cost_a = spec.cost_d = cost_dist(engine);
    Eigen::VectorXd mask(d);
    for (int i = 0; i < d; ++i) mask[i] = coin(engine) ? 1.0 : 0.0;
    spec.mask = mask;
    const PopulationModel m = validate_model(spec);
    Eigen::VectorXd theta(d), x(d);
    for (int i = 0; i < d; ++i) theta[i] = 2.0 * normal(engine);
    for (int i = 0; i < d; ++i) x[i] = normal(engine);
    const Eigen::VectorXd closed = best_response_action(theta, Group::A, m);
    const double radius = theta.cwiseAbs().maxCoeff() / m.cost_a + 0.5;
    const Eigen::VectorXd brute = oracles::brute_force_action(theta, x, mask, m.cost_a, radius);
    worst = std::max(worst, (closed - brute).cwiseAbs().maxCoeff());
  }
  c.check(worst <= 1e-6, fmt("max abs error %.3g", worst));
}

void criterion_2_gradient() {
  Criterion c("2 analytic Lagrangian gradient vs central differences (20 triples, rel <= 1e-5)");
  const PopulationModel m = helpers::benchmark_model();
  const ConstraintSystem sys = build_expost_system(0.05, 5.0);
  std::mt19937_64 engine(2002);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const SampleSet s = sample_population(m, 40, 40, 3000 + trial);
    PolicyPair theta = PolicyPair::zero(10);
    for (int i = 0; i < 10; ++i) theta.theta_a[i] = 0.8 * normal(engine);
    for (int i = 0; i < 10; ++i) theta.theta_d[i] = 0.8 * normal(engine);
    Eigen::VectorXd lambda(6);
    for (int i = 0; i < 6; ++i) lambda[i] = uniform(engine);
    lambda *= 4.0 / lambda.sum();
    const PolicyPair grad = lagrangian_grad(theta, lambda, s, m, sys);
    for (Group g : kGroups) {
      const Eigen::VectorXd numeric = oracles::central_difference(
          [&](const Eigen::VectorXd& th) {
            PolicyPair p = theta;
            p[g] = th;
            return lagrangian(p, lambda, s, m, sys);
          },
          theta[g], 1e-5);
      const double scale = std::max(numeric.cwiseAbs().maxCoeff(), 1e-8);
      worst = std::max(worst, (grad[g] - numeric).cwiseAbs().maxCoeff() / scale);
    }
  }
  c.check(worst <= 1e-5, fmt("max relative error %.3g", worst));
}

void criterion_3_analytic_moments() {
  Criterion c("3 analytic ex-post summaries vs Monte Carlo at n = 1e6 (4 standard errors)");
  const long n = 1000000;
  std::mt19937_64 engine(3003);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto check_model = [&](const PopulationModel& m, const char* label) {
    PolicyPair theta = PolicyPair::zero(m.feature_dim());
    for (Eigen::Index i = 0; i < theta.theta_a.size(); ++i) theta.theta_a[i] = normal(engine);
    for (Eigen::Index i = 0; i < theta.theta_d.size(); ++i) theta.theta_d[i] = normal(engine);
    for (Group g : kGroups) {
      const GaussianSummary s = analytic_summary(theta, g, m);
      const auto mc = oracles::monte_carlo_pair(m, g, theta[g], n, 9000 + engine() % 1000);
      for (int i = 0; i < 2; ++i)
        c.check(std::abs(s.mean[i] - mc.mean[i]) <= 4.0 * mc.mean_se[i],
                std::string(label) + fmt(": mean entry off by %.3g (4se = %.3g)",
                                         std::abs(s.mean[i] - mc.mean[i]), 4.0 * mc.mean_se[i]));
      for (int r = 0; r < 2; ++r)
        for (int col = 0; col < 2; ++col)
          c.check(std::abs(s.cov(r, col) - mc.cov(r, col)) <= 4.0 * mc.cov_se(r, col),
                  std::string(label) + fmt(": cov entry off by %.3g (4se = %.3g)",
                                           std::abs(s.cov(r, col) - mc.cov(r, col)),
                                           4.0 * mc.cov_se(r, col)));
    }
  };

  check_model(helpers::benchmark_model(), "direct");
  check_model(helpers::latent_benchmark_model(Eigen::MatrixXd::Identity(10, 10)),
              "latent identity");

  Eigen::MatrixXd loading = Eigen::MatrixXd::Identity(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) loading(i, j) += 0.2 * normal(engine);
  check_model(helpers::latent_benchmark_model(loading), "latent full-rank");
}

void criterion_4_estimator_rate() {
  Criterion c("4 plug-in moment error decays at the root-n rate (log-log slope in [-0.65,-0.35])");
  const PopulationModel m = helpers::benchmark_model();
  std::mt19937_64 engine(4004);
  std::normal_distribution<double> normal(0.0, 1.0);
  PolicyPair theta = PolicyPair::zero(10);
  for (int i = 0; i < 10; ++i) theta.theta_a[i] = 0.6 * normal(engine);
  for (int i = 0; i < 10; ++i) theta.theta_d[i] = 0.6 * normal(engine);

  // 1e7-per-group reference, accumulated in chunks over disjoint seeds.
  const int chunks = 100;
  const Eigen::Index chunk_n = 100000;
  Eigen::Matrix<double, 6, 1> reference = Eigen::Matrix<double, 6, 1>::Zero();
  for (int k = 0; k < chunks; ++k) {
    const SampleSet s = sample_population(m, chunk_n, chunk_n, 50000 + k);
    reference += plugin_moments(s, theta, m).as_vector();
  }
  reference /= static_cast<double>(chunks);

  std::vector<double> log_n, log_err;
  for (int k = 0; k <= 10; ++k) {
    const Eigen::Index n = 100L << k;
    double mean_err = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const SampleSet s = sample_population(m, n, n, 60000 + 100 * k + rep);
      const Eigen::Matrix<double, 6, 1> mu = plugin_moments(s, theta, m).as_vector();
      mean_err += (mu - reference).cwiseAbs().maxCoeff();
    }
    mean_err /= 20.0;
    log_n.push_back(std::log(static_cast<double>(n)));
    log_err.push_back(std::log(mean_err));
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double cnt = static_cast<double>(log_n.size());
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    sx += log_n[i];
    sy += log_err[i];
    sxx += log_n[i] * log_n[i];
    sxy += log_n[i] * log_err[i];
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  c.check(slope >= -0.65 && slope <= -0.35, fmt("slope %.3f", slope));
}

void criterion_5_mirror_ascent_bound() {
  Criterion c("5 averaged iterates meet 2 rho B sqrt((log 6 + 1)/T) on exact-oracle games");
  const PopulationModel m = helpers::benchmark_model();
  std::mt19937_64 engine(5005);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int instance = 0; instance < 3; ++instance) {
    const SampleSet s = sample_population(m, 40, 40, 7000 + instance);
    OracleConfig oracle;
    for (int i = 0; i < 12; ++i) {
      PolicyPair p = PolicyPair::zero(10);
      for (int j = 0; j < 10; ++j) p.theta_a[j] = 0.5 * normal(engine);
      for (int j = 0; j < 10; ++j) p.theta_d[j] = 0.5 * normal(engine);
      oracle.candidates.push_back(std::move(p));
    }
    for (double bound : {1.0, 5.0}) {
      const ConstraintSystem sys = build_expost_system(0.0, bound);
      detail::LagrangianEvaluator eval(s, m, sys);
      double rho = 0.0;
      for (const auto& f : oracle.candidates) {
        const Eigen::VectorXd viol = sys.matrix * eval.constraint_moments(f) - sys.c_hat();
        rho = std::max(rho, viol.cwiseAbs().maxCoeff());
      }
      for (int horizon : {10, 100, 1000}) {
        SolverConfig cfg;
        cfg.eps = 1e-12;  // run exactly `horizon` iterations
        cfg.max_iters = horizon;
        cfg.check_stride = horizon;
        cfg.rho = rho;
        cfg.randomized = true;
        cfg.oracle = oracle;
        const ReductionResult r = run_reduction(s, m, sys, cfg);
        const double eps_t = 2.0 * rho * bound * std::sqrt((std::log(6.0) + 1.0) / horizon);
        c.check(r.trace.certificate.max_gap() <= eps_t,
                fmt("gap %.4g > bound %.4g", r.trace.certificate.max_gap(), eps_t));
      }
    }
  }
}

void criterion_6_manifolds() {
  Criterion c("6 constructed manifolds: verification, residuals, Monte Carlo gaps, dimension");
  // Ex-ante case: equal costs, group A stronger.
  ModelSpec exante_spec = helpers::benchmark_spec();
  exante_spec.cost_a = exante_spec.cost_d = 1.0;
  const PopulationModel exante_model = validate_model(exante_spec);
  const auto exante_points = construct_exante_feasible(exante_model, 601, 100);

  // Cost case: zero means, group D pays more.
  ModelSpec cost_spec = helpers::benchmark_spec();
  cost_spec.mu_a = cost_spec.mu_d = Eigen::VectorXd::Zero(10);
  const PopulationModel cost_model = validate_model(cost_spec);
  const auto cost_points = construct_cost_feasible(cost_model, 1.5, 0.4, 602, 100);

  c.check(exante_points.size() == 100 && cost_points.size() == 100, "construction count");

  const Eigen::Index n = 100000;
  const SampleSet exante_samples = sample_population(exante_model, n, n, 603);
  const SampleSet cost_samples = sample_population(cost_model, n, n, 604);

  auto check_case = [&](const std::vector<ManifoldPoint>& points,
                        const PopulationModel& model, const SampleSet& samples,
                        const char* label) {
    for (const auto& pt : points) {
      const EqualityCheck chk = verify_equality(pt.theta, model, 1e-8);
      c.check(chk.pass, std::string(label) + fmt(": verification gap %.3g", chk.max_gap()));
      const double res = residuals(pt.theta, model).max_abs();
      c.check(res <= 1e-8, std::string(label) + fmt(": residual %.3g", res));
    }
    // Monte Carlo moment gaps with per-entry standard errors (centered
    // variances: the saturated entries cancel catastrophically otherwise).
    for (const auto& pt : points) {
      PerGroup<std::array<double, 3>> means;
      PerGroup<std::array<double, 3>> vars;
      for (Group g : kGroups) {
        const auto args = detail::expost_args(samples.rows(g), pt.theta[g], g, model);
        const Eigen::ArrayXd f = sigmoid(args.accept);
        const Eigen::ArrayXd y = sigmoid(args.outcome);
        const Eigen::ArrayXd fy = f * y;
        means[g] = {y.mean(), f.mean(), fy.mean()};
        vars[g] = {(y - means[g][0]).square().mean(),
                   (f - means[g][1]).square().mean(),
                   (fy - means[g][2]).square().mean()};
      }
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t e = 0; e < 3; ++e) {
        const double gap = means.a[e] - means.d[e];
        const double se = std::sqrt((vars.a[e] + vars.d[e]) * inv_n);
        // Resolution floor: below ~1e-9 both the gap and its standard error
        // sit at double-precision accumulation noise.
        c.check(std::abs(gap) <= std::max(4.0 * se, 1e-9),
                std::string(label) + fmt(": MC gap %.3g > 4se %.3g", std::abs(gap), 4.0 * se));
      }
    }
  };
  check_case(exante_points, exante_model, exante_samples, "exante");
  check_case(cost_points, cost_model, cost_samples, "cost");

  // Dimension witness, ex-ante case: the two-row block system for the stored
  // U has nullity d_blk - 2 (free directions of the affine stratum).
  const Eigen::VectorXd beta_m = exante_model.beta.head(5);
  const Eigen::VectorXd mu_a_m = exante_model.mu_a.head(5);
  const Eigen::VectorXd mu_d_m = exante_model.mu_d.head(5);
  for (std::size_t i = 0; i < 10; ++i) {
    const Eigen::MatrixXd& u = exante_points[i].exante->u_manip;
    Eigen::MatrixXd a(2, 5);
    a.row(0) = (u.transpose() * beta_m - beta_m).transpose();
    a.row(1) = (u.transpose() * mu_a_m - mu_d_m).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    int rank = 0;
    for (int k = 0; k < svd.singularValues().size(); ++k)
      if (svd.singularValues()[k] > 1e-10) ++rank;
    c.check(rank == 2, "exante block system rank != 2");
  }
  // Dimension witness, cost case: the sampled directions orthogonal to beta
  // span the full (d_blk - 1)-dimensional complement (sphere dim d_blk - 2).
  Eigen::MatrixXd dirs(static_cast<Eigen::Index>(cost_points.size()), 5);
  for (std::size_t i = 0; i < cost_points.size(); ++i)
    dirs.row(static_cast<Eigen::Index>(i)) = cost_points[i].cost->normal_manip.d.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> dir_svd(dirs);
  int dir_rank = 0;
  for (int k = 0; k < dir_svd.singularValues().size(); ++k)
    if (dir_svd.singularValues()[k] > 1e-10) ++dir_rank;
  c.check(dir_rank == 4, fmt("cost direction span rank %g != d_m - 1", dir_rank));
  for (const auto& pt : cost_points)
    c.check(std::abs(pt.cost->normal_manip.d.dot(beta_m)) <= 1e-10,
            "cost direction not orthogonal to beta");
}

void criterion_7_impossibility() {
  Criterion c("7 impossibility demos: positive response gaps; dominance in the discrete market");
  // (a) continuous sweeps under both discrimination forms.
  {
    ContinuousMarket1D market;
    market.wage = 2.0;
    market.cost_a = market.cost_d = 6.0;
    market.m0 = 0.0;
    market.m1 = 2.0;
    market.skill_mean_a = 1.0;
    market.skill_mean_d = 0.0;
    const auto rows = continuous_gap_sweep(make_continuous_market(market),
                                           default_threshold_grid(0.0, 2.0, 101),
                                           DiscriminationForm::SkillGap, 20000, 70);
    for (const auto& r : rows)
      if (r.positive_incentive)
        c.check(r.gap > 0.0,
                fmt("skill-gap sweep: gap %.3g at threshold %.3g", r.gap, r.threshold));
  }
  {
    ContinuousMarket1D market;
    market.wage = 2.0;
    market.cost_a = 4.0;
    market.cost_d = 10.0;
    market.m0 = 0.0;
    market.m1 = 2.0;
    const auto rows = continuous_gap_sweep(make_continuous_market(market),
                                           default_threshold_grid(0.0, 2.0, 101),
                                           DiscriminationForm::CostGap, 20000, 71);
    for (const auto& r : rows)
      if (r.positive_incentive)
        c.check(r.gap > 0.0,
                fmt("cost-gap sweep: gap %.3g at threshold %.3g", r.gap, r.threshold));
  }
  // (b) discrete-market scan; extreme thresholds make the equal-response
  // clause non-vacuous (there the net hiring benefit vanishes).
  {
    CoateLouryMarket market;
    market.wage = 1.0;
    market.cost_a = CostFamily::exponential(2.0);
    market.cost_d = CostFamily::exponential(1.0);
    market.m0 = 0.0;
    market.m1 = 2.0;
    auto grid = default_threshold_grid(0.0, 2.0, 101);
    grid.push_back(40.0);
    grid.push_back(-40.0);
    const auto rows = coate_loury_equal_treatment_scan(make_coate_loury_market(market), grid);
    int equal_response_rows = 0;
    for (const auto& r : rows) {
      if (!r.equal_treatment) continue;
      const double net = market.wage * (r.tpr_a - r.fpr_a);
      if (net > 1e-9)
        c.check(r.pi_a > r.pi_d, fmt("dominance fails at theta %.3g", r.theta_a));
      if (std::abs(r.pi_a - r.pi_d) <= 1e-9) {
        ++equal_response_rows;
        c.check(r.pi_a <= 1e-6 && r.pi_d <= 1e-6,
                fmt("equal responses with pi %.3g", std::max(r.pi_a, r.pi_d)));
      }
    }
    c.check(equal_response_rows > 0, "no equal-treatment-and-equal-response rows on the grid");
  }
}

void criterion_8_end_to_end() {
  Criterion c("8 end-to-end benchmark: train violation <= 1e-3 and figure-panel orderings");
  const auto t0 = std::chrono::steady_clock::now();
  const auto table =
      toml::Table::parse_file(std::string(ACCEPTANCE_CONFIG_DIR) + "/benchmark.toml");
  const ExperimentConfig cfg = load_experiment_config(table);
  RunOptions options;
  options.threads = 4;
  const auto out_dir = std::filesystem::temp_directory_path() / "steerfair_acceptance_run";
  std::filesystem::remove_all(out_dir);
  const ExperimentOutcome outcome = run_experiment(cfg, out_dir, options, &table);

  const MethodOutcome* alg1 = nullptr;
  for (const auto& m : outcome.methods)
    if (m.name == "alg1") alg1 = &m;
  c.check(alg1 != nullptr, "alg1 missing from the run");
  if (alg1) {
    c.check(alg1->train_violation_raw <= 1e-3,
            fmt("alg1 train violation %.3g > 1e-3", alg1->train_violation_raw));
    c.check(alg1->result.succeeded(), "alg1 not certified");

    auto panel = [](const FairnessReport& r, int which) {
      switch (which) {
        case 0: return r.sufficiency_gap().value_or(1e9);
        case 1: return r.separation_gap().value_or(1e9);
        case 2: return r.response_gap;
        default: return r.err_rate_gap;
      }
    };
    const char* names[4] = {"sufficiency", "separation", "response", "error-rate"};
    for (int p = 0; p < 4; ++p) {
      double baseline_max = 0.0;
      for (const auto& m : outcome.methods)
        if (m.name != "alg1") baseline_max = std::max(baseline_max, panel(m.test_report, p));
      const double own = panel(alg1->test_report, p);
      c.check(own < baseline_max,
              std::string(names[p]) +
                  fmt(" panel: alg1 %.4f !< baseline max %.4f", own, baseline_max));
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.check(secs < 300.0, fmt("runtime %.1fs >= 300s", secs));
  std::filesystem::remove_all(out_dir);
}

void criterion_9_generalization() {
  Criterion c("9 generalization: median test violation trend and the saddle bound");
  ModelSpec spec = helpers::benchmark_spec();
  spec.reg_weight = 0.01;
  spec.lambda_a = 0.5;
  const PopulationModel model = validate_model(spec);

  SolverConfig solver;
  solver.eps = 0.5;
  solver.max_iters = 2000;
  solver.check_stride = 50;
  solver.fresh_restart_stride = 25;
  solver.oracle.restarts = 1;
  solver.oracle.steps = 300;
  solver.warm_steps = 80;
  solver.oracle.theta_max = 10.0;
  const double bound = 100.0;

  auto run_one = [&](Eigen::Index n, std::uint64_t seed) {
    const SampleSet train = sample_population(model, n, n, seed);
    const SampleSet test = sample_population(model, n, n, seed + 1000);
    const double nu = default_nu(n, n);  // kappa = 2 over sqrt(min group count)
    const ConstraintSystem sys = build_expost_system(nu, bound);
    const ReductionResult r = run_reduction(train, model, sys, solver);
    c.check(r.succeeded(), fmt("run at n=%g not certified", static_cast<double>(n)));
    return raw_expost_violation(test, r.policy, model);
  };

  std::vector<double> small, large;
  for (int s = 0; s < 10; ++s) {
    small.push_back(run_one(200, 100 + static_cast<std::uint64_t>(s)));
    large.push_back(run_one(2000, 300 + static_cast<std::uint64_t>(s)));
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[4] + v[5]);
  };
  const double med_small = median(small), med_large = median(large);
  c.check(med_large <= med_small,
          fmt("median at n=2000 (%.4f) > median at n=200 (%.4f)", med_large, med_small));
  const double eps = solver.eps;
  for (int s = 0; s < 10; ++s) {
    const double cap_small = (1.0 + 2.0 * eps) / bound + 10.0 / std::sqrt(200.0);
    const double cap_large = (1.0 + 2.0 * eps) / bound + 10.0 / std::sqrt(2000.0);
    c.check(small[static_cast<std::size_t>(s)] <= cap_small,
            fmt("n=200 violation %.4f > cap %.4f", small[static_cast<std::size_t>(s)],
                cap_small));
    c.check(large[static_cast<std::size_t>(s)] <= cap_large,
            fmt("n=2000 violation %.4f > cap %.4f", large[static_cast<std::size_t>(s)],
                cap_large));
  }
}

}  // namespace

int main() {
  criterion_1_best_response();
  criterion_2_gradient();
  criterion_3_analytic_moments();
  criterion_4_estimator_rate();
  criterion_5_mirror_ascent_bound();
  criterion_6_manifolds();
  criterion_7_impossibility();
  criterion_8_end_to_end();
  criterion_9_generalization();
  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
