#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "steerfair/analytics.hpp"
#include "steerfair/constraints.hpp"
#include "steerfair/population.hpp"
#include "steerfair/response.hpp"
#include "steerfair/rng.hpp"

namespace steerfair {

/// Best-decision oracle settings. With a non-empty candidate list the oracle
/// is exact enumeration over that list; otherwise it runs projected gradient
/// descent with `restarts` seeded initializations over the box
/// ||theta_g||_inf <= theta_max.
struct OracleConfig {
  int restarts = 5;
  int steps = 500;
  double step_size = 1.0;  // initial Armijo trial step
  std::uint64_t seed = 0;
  double theta_max = 10.0;
  std::vector<PolicyPair> candidates;

  bool enumeration() const { return !candidates.empty(); }
};

struct SolverConfig {
  double eps = 0.05;       // saddle tolerance
  int max_iters = 2000;
  double eta_scale = 1.0;  // multiplies the sqrt(log K + 1)/(rho sqrt t) schedule
  double rho = 1.0;        // violation bound entering the step size
  OracleConfig oracle;
  bool randomized = false;
  int check_stride = 10;        // saddle certificate every this many iterations
  int fresh_restart_stride = 10;  // multi-start refresh cadence inside the loop
  int warm_steps = 0;           // descent budget for warm-started iterations (0: oracle.steps)
};

/// Dual coordinates before and after the exponentiated scaling.
struct DualState {
  Eigen::VectorXd v;
  Eigen::VectorXd lambda;
};

/// lambda_k = B e^{v_k} / (1 + sum_j e^{v_j}), max-shifted so no finite v can
/// overflow. Always satisfies lambda >= 0 and ||lambda||_1 < B; when the
/// shifted slack term underflows the sum is nudged off the budget by one ulp.
inline Eigen::VectorXd scale_dual(const Eigen::VectorXd& v, double bound) {
  const double shift = std::max(0.0, v.size() ? v.maxCoeff() : 0.0);
  Eigen::ArrayXd e = (v.array() - shift).exp();
  const double denom = std::exp(-shift) + e.sum();
  Eigen::VectorXd lambda = (bound / denom) * e.matrix();
  if (lambda.sum() >= bound)
    lambda *= 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
  return lambda;
}

namespace detail {

/// Value-and-gradient engine for the sample Lagrangian
///   L(theta, lambda) = EPR_hat(theta) + lambda^T (A mu_hat(theta) - c_hat).
/// Shares the estimator formulas with the analytics module and adds their
/// exact derivatives through the closed-form response.
class LagrangianEvaluator {
 public:
  LagrangianEvaluator(const SampleSet& samples, const PopulationModel& model,
                      const ConstraintSystem& system)
      : samples_(samples), model_(model), system_(system) {
    detail::require_nonempty(samples);
    for (Group g : kGroups) {
      const Eigen::MatrixXd& rows = samples.rows(g);
      PerSample& ps = per_[g == Group::A ? 0 : 1];
      ps.outcome_base = (rows * model.beta).array();
      if (system.mode != ConstraintMode::ExPostAll)
        ps.exante_outcome = sigmoid(ps.outcome_base);
    }
    if (model.is_latent()) {
      const Eigen::MatrixXd& lam = *model.loading;
      quad_ = lam * model.mask.asDiagonal() * lam.transpose();
      outcome_dir_ = lam * model.masked(model.beta);
    } else {
      quad_ = Eigen::MatrixXd(model.mask.asDiagonal());
      outcome_dir_ = model.masked(model.beta);
    }
  }

  int policy_dim() const { return model_.feature_dim(); }
  const ConstraintSystem& system() const { return system_; }

  /// Moment vector the constraint matrix applies to (arity depends on mode).
  Eigen::VectorXd constraint_moments(const PolicyPair& theta) const {
    switch (system_.mode) {
      case ConstraintMode::ExPostAll:
        return plugin_moments(samples_, theta, model_).as_vector();
      case ConstraintMode::ExAnteDP:
        return exante_pair(theta, ExAnteMetric::DP);
      case ConstraintMode::ExAnteFPR:
        return exante_pair(theta, ExAnteMetric::FPR);
      case ConstraintMode::ExAnteFNR:
        return exante_pair(theta, ExAnteMetric::FNR);
      case ConstraintMode::ExAnteSuff: {
        Eigen::VectorXd out(4);
        out.head<2>() = exante_pair(theta, ExAnteMetric::PPV);
        out.tail<2>() = exante_pair(theta, ExAnteMetric::NPV);
        return out;
      }
    }
    return {};
  }

  double epr(const PolicyPair& theta) const { return plugin_epr(samples_, theta, model_); }

  double value(const PolicyPair& theta, const Eigen::VectorXd& lambda) const {
    check_lambda(lambda);
    const Eigen::VectorXd viol =
        system_.matrix * constraint_moments(theta) - system_.c_hat();
    return epr(theta) + lambda.dot(viol);
  }

  /// Analytic gradient of the Lagrangian with respect to (theta_A, theta_D).
  PolicyPair gradient(const PolicyPair& theta, const Eigen::VectorXd& lambda) const {
    check_lambda(lambda);
    const Eigen::VectorXd coef = system_.matrix.transpose() * lambda;
    PolicyPair grad = PolicyPair::zero(policy_dim());
    for (Group g : kGroups) grad[g] = group_gradient(theta, g, coef);
    return grad;
  }

 private:
  struct PerSample {
    Eigen::ArrayXd outcome_base;    // beta^T x_i
    Eigen::ArrayXd exante_outcome;  // sigma(beta^T x_i), baseline modes only
  };

  void check_lambda(const Eigen::VectorXd& lambda) const {
    if (lambda.size() != system_.rows())
      throw ArityMismatch("dual vector arity does not match the constraint system");
  }

  Eigen::VectorXd exante_pair(const PolicyPair& theta, ExAnteMetric metric) const {
    Eigen::VectorXd out(2);
    for (Group g : kGroups) {
      const int j = g == Group::A ? 0 : 1;
      const Eigen::ArrayXd f =
          sigmoid((samples_.rows(g) * theta[g]).array());
      out[j] = guarded_ratio(f, per_[j].exante_outcome, metric);
    }
    return out;
  }

  // Ratio metric with the denominator clamped at the guard so optimization
  // stays finite; the public exante_moments op reports such metrics as errors.
  static double guarded_ratio(const Eigen::ArrayXd& f, const Eigen::ArrayXd& y,
                              ExAnteMetric m) {
    double num = 0.0, den = 1.0;
    switch (m) {
      case ExAnteMetric::DP:
        return f.mean();
      case ExAnteMetric::FPR:
        num = ((1.0 - y) * f).mean();
        den = (1.0 - y).mean();
        break;
      case ExAnteMetric::FNR:
        num = (y * (1.0 - f)).mean();
        den = y.mean();
        break;
      case ExAnteMetric::PPV:
        num = (y * f).mean();
        den = f.mean();
        break;
      case ExAnteMetric::NPV:
        num = ((1.0 - y) * (1.0 - f)).mean();
        den = (1.0 - f).mean();
        break;
    }
    return num / std::max(den, kDenominatorGuard);
  }

  Eigen::VectorXd group_gradient(const PolicyPair& theta, Group g,
                                 const Eigen::VectorXd& coef) const {
    const int j = g == Group::A ? 0 : 1;
    const Eigen::MatrixXd& rows = samples_.rows(g);
    const Eigen::VectorXd& th = theta[g];
    const double n = static_cast<double>(rows.rows());
    const double prop = model_.proportion(g);
    const double inv_c = 1.0 / model_.cost(g);

    Eigen::VectorXd grad;
    if (system_.mode == ConstraintMode::ExPostAll) {
      const auto args = detail::expost_args(rows, th, g, model_);
      const Eigen::ArrayXd su = sigmoid(args.accept);
      const Eigen::ArrayXd sv = sigmoid(args.outcome);
      const Eigen::ArrayXd du = su * (1.0 - su);
      const Eigen::ArrayXd dv = sv * (1.0 - sv);

      // d(accept arg)/d theta = x_i + (2/c) Q theta, shared across samples up
      // to the x_i term; d(outcome arg)/d theta = (1/c) * outcome_dir.
      const Eigen::VectorXd q_theta = (2.0 * inv_c) * (quad_ * th);
      const Eigen::VectorXd g_v = inv_c * outcome_dir_;

      const double c_y = coef[j];
      const double c_f = coef[2 + j];
      const double c_fy = coef[4 + j];

      Eigen::ArrayXd wx = prop * du * (1.0 - 2.0 * sv) + c_f * du + c_fy * du * sv;
      const double s_q = wx.mean();
      const double s_v = (prop * dv * (1.0 - 2.0 * su) + c_y * dv + c_fy * su * dv).mean();
      grad = rows.transpose() * (wx / n).matrix() + s_q * q_theta + s_v * g_v;
    } else {
      const Eigen::ArrayXd u = (rows * th).array();
      const Eigen::ArrayXd su = sigmoid(u);
      const Eigen::ArrayXd du = su * (1.0 - su);
      const Eigen::ArrayXd& y = per_[j].exante_outcome;

      // Constraint part: d metric / d theta for the active metric rows.
      Eigen::ArrayXd wx_c = Eigen::ArrayXd::Zero(u.size());
      switch (system_.mode) {
        case ConstraintMode::ExAnteDP:
          wx_c = coef[j] * du;
          break;
        case ConstraintMode::ExAnteFPR:
          wx_c = coef[j] * ((1.0 - y) * du) / std::max((1.0 - y).mean(), kDenominatorGuard);
          break;
        case ConstraintMode::ExAnteFNR:
          wx_c = -coef[j] * (y * du) / std::max(y.mean(), kDenominatorGuard);
          break;
        case ConstraintMode::ExAnteSuff: {
          const double d_ppv = std::max(su.mean(), kDenominatorGuard);
          const double n_ppv = (y * su).mean();
          wx_c += coef[j] * ((y * du) / d_ppv - (n_ppv / (d_ppv * d_ppv)) * du);
          const double d_npv = std::max((1.0 - su).mean(), kDenominatorGuard);
          const double n_npv = ((1.0 - y) * (1.0 - su)).mean();
          wx_c += coef[2 + j] *
                  (-((1.0 - y) * du) / d_npv + (n_npv / (d_npv * d_npv)) * du);
          break;
        }
        default:
          break;
      }

      // EPR part still measures ex-post disagreement.
      const auto args = detail::expost_args(rows, th, g, model_);
      const Eigen::ArrayXd su_p = sigmoid(args.accept);
      const Eigen::ArrayXd sv_p = sigmoid(args.outcome);
      const Eigen::ArrayXd du_p = su_p * (1.0 - su_p);
      const Eigen::ArrayXd dv_p = sv_p * (1.0 - sv_p);
      const Eigen::VectorXd q_theta = (2.0 * inv_c) * (quad_ * th);
      const Eigen::VectorXd g_v = inv_c * outcome_dir_;
      const Eigen::ArrayXd wx_e = prop * du_p * (1.0 - 2.0 * sv_p);
      const double s_q = wx_e.mean();
      const double s_v = (prop * dv_p * (1.0 - 2.0 * su_p)).mean();

      grad = rows.transpose() * ((wx_c + wx_e) / n).matrix() + s_q * q_theta + s_v * g_v;
    }

    const double reg_w = model_.reg_weighted_by_group ? prop : 1.0;
    grad += (2.0 * model_.reg_weight * reg_w) * th;
    return grad;
  }

  const SampleSet& samples_;
  const PopulationModel& model_;
  const ConstraintSystem& system_;
  std::array<PerSample, 2> per_;
  Eigen::MatrixXd quad_;        // M (direct) or Loading M Loading^T (latent)
  Eigen::VectorXd outcome_dir_;  // M beta (direct) or Loading M beta (latent)
};

inline void clamp_to_box(Eigen::VectorXd& z, double radius) {
  z = z.cwiseMax(-radius).cwiseMin(radius);
}

/// Projected gradient descent with Armijo backtracking inside the policy box.
inline PolicyPair projected_descent(const LagrangianEvaluator& eval,
                                    const Eigen::VectorXd& lambda, PolicyPair theta,
                                    const OracleConfig& cfg, int steps, double* value_out) {
  const double radius = cfg.theta_max;
  clamp_to_box(theta.theta_a, radius);
  clamp_to_box(theta.theta_d, radius);
  double value = eval.value(theta, lambda);
  double alpha = cfg.step_size;
  for (int it = 0; it < steps; ++it) {
    const PolicyPair grad = eval.gradient(theta, lambda);
    bool accepted = false;
    alpha = std::min(alpha * 2.0, cfg.step_size * 4.0);
    for (int bt = 0; bt < 40; ++bt) {
      PolicyPair trial(theta.theta_a - alpha * grad.theta_a,
                       theta.theta_d - alpha * grad.theta_d);
      clamp_to_box(trial.theta_a, radius);
      clamp_to_box(trial.theta_d, radius);
      const double directional = grad.theta_a.dot(trial.theta_a - theta.theta_a) +
                                 grad.theta_d.dot(trial.theta_d - theta.theta_d);
      const double trial_value = eval.value(trial, lambda);
      if (trial_value <= value + 1e-4 * directional) {
        const double move = std::max((trial.theta_a - theta.theta_a).cwiseAbs().maxCoeff(),
                                     (trial.theta_d - theta.theta_d).cwiseAbs().maxCoeff());
        const double gain = value - trial_value;
        theta = std::move(trial);
        value = trial_value;
        accepted = true;
        // Converged: the step or its payoff is negligible.
        if (move <= 1e-9 * (1.0 + radius) || gain <= 1e-11 * (1.0 + std::abs(value)))
          it = steps;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no descent step found at the smallest trial
  }
  if (value_out) *value_out = value;
  return theta;
}

inline PolicyPair random_start(const OracleConfig& cfg, int dim, std::uint64_t stream_tag) {
  std::mt19937_64 engine(substream_seed(cfg.seed, stream_tag));
  auto draw = [&engine, &cfg]() {
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    return (2.0 * u - 1.0) * cfg.theta_max;
  };
  PolicyPair p = PolicyPair::zero(dim);
  for (int i = 0; i < dim; ++i) p.theta_a[i] = draw();
  for (int i = 0; i < dim; ++i) p.theta_d[i] = draw();
  return p;
}

/// Approximate argmin of the Lagrangian at fixed dual. Enumeration mode is an
/// exact list-argmin; the continuous mode keeps the best of the (optional)
/// warm start plus `restarts` seeded descents. Deterministic given the seed.
inline PolicyPair best_policy(const LagrangianEvaluator& eval,
                              const Eigen::VectorXd& lambda, const OracleConfig& cfg,
                              const PolicyPair* warm, int restarts,
                              double* value_out = nullptr, int warm_step_budget = 0) {
  if (cfg.enumeration()) {
    double best_value = std::numeric_limits<double>::infinity();
    const PolicyPair* best = nullptr;
    for (const PolicyPair& p : cfg.candidates) {
      const double v = eval.value(p, lambda);
      if (v < best_value) {
        best_value = v;
        best = &p;
      }
    }
    if (value_out) *value_out = best_value;
    return *best;
  }
  PolicyPair best;
  double best_value = std::numeric_limits<double>::infinity();
  auto consider = [&](PolicyPair start, int steps) {
    double v = 0.0;
    PolicyPair trial = projected_descent(eval, lambda, std::move(start), cfg, steps, &v);
    if (v < best_value) {
      best_value = v;
      best = std::move(trial);
    }
  };
  if (warm) consider(*warm, warm_step_budget > 0 ? warm_step_budget : cfg.steps);
  for (int r = 0; r < restarts; ++r)
    consider(random_start(cfg, eval.policy_dim(), static_cast<std::uint64_t>(r)), cfg.steps);
  if (value_out) *value_out = best_value;
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

inline double lagrangian(const PolicyPair& theta, const Eigen::VectorXd& lambda,
                         const SampleSet& samples, const PopulationModel& model,
                         const ConstraintSystem& system) {
  return detail::LagrangianEvaluator(samples, model, system).value(theta, lambda);
}

inline PolicyPair lagrangian_grad(const PolicyPair& theta, const Eigen::VectorXd& lambda,
                                  const SampleSet& samples, const PopulationModel& model,
                                  const ConstraintSystem& system) {
  return detail::LagrangianEvaluator(samples, model, system).gradient(theta, lambda);
}

inline PolicyPair oracle_best_policy(const Eigen::VectorXd& lambda,
                                     const SampleSet& samples, const PopulationModel& model,
                                     const ConstraintSystem& system,
                                     const OracleConfig& oracle) {
  detail::LagrangianEvaluator eval(samples, model, system);
  return detail::best_policy(eval, lambda, oracle, nullptr, oracle.restarts);
}

/// epsilon-saddle certificate for a primal/dual pair.
struct SaddleCertificate {
  double primal_gap = 0.0;
  double dual_gap = 0.0;
  double eps = 0.0;
  bool succeeded = false;
  double realized_rho = 0.0;

  double max_gap() const { return std::max(primal_gap, dual_gap); }
};

inline SaddleCertificate saddle_gaps(const PolicyPair& theta, const Eigen::VectorXd& lambda,
                                     const SampleSet& samples, const PopulationModel& model,
                                     const ConstraintSystem& system,
                                     const OracleConfig& oracle, double eps = 0.0) {
  detail::LagrangianEvaluator eval(samples, model, system);
  const Eigen::VectorXd viol = system.matrix * eval.constraint_moments(theta) - system.c_hat();
  const double value = eval.epr(theta) + lambda.dot(viol);
  double best_value = 0.0;
  detail::best_policy(eval, lambda, oracle, &theta, oracle.restarts, &best_value);
  SaddleCertificate cert;
  cert.primal_gap = std::max(0.0, value - best_value);
  cert.dual_gap =
      std::max(0.0, eval.epr(theta) + dual_support_max(viol, system.bound).value - value);
  cert.eps = eps;
  cert.succeeded = cert.max_gap() <= eps;
  cert.realized_rho = viol.cwiseAbs().maxCoeff();
  return cert;
}

/// One row of the solver trace.
struct IterationRecord {
  int t = 0;
  Eigen::VectorXd lambda;
  PolicyPair theta;
  Eigen::VectorXd moments;
  double max_violation = 0.0;
  double epr = 0.0;
  std::optional<double> primal_gap, dual_gap;
};

struct ReductionTrace {
  std::vector<IterationRecord> iterations;
  SaddleCertificate certificate;
};

/// Uniformly weighted mixture of the policy iterates plus the averaged dual.
struct RandomizedPolicy {
  std::vector<PolicyPair> support;  // uniform weights over the iterates
  Eigen::VectorXd lambda_bar;
};

struct ReductionResult {
  ReductionTrace trace;
  PolicyPair policy;  // last iterate (the deployed, non-randomized policy)
  Eigen::VectorXd lambda;
  std::optional<RandomizedPolicy> randomized;
  int iterations = 0;
  bool succeeded() const { return trace.certificate.succeeded; }
};

/// Dual mirror ascent over the scaled simplex with a best-decision oracle.
///
/// Updates v <- v + eta_t (A mu_hat(f_t) - c_hat) with
/// eta_t = eta_scale sqrt(log K + 1) / (rho sqrt t), t starting at 1, and
/// certifies an epsilon-saddle every check_stride iterations. In randomized
/// mode the certificate covers the averaged pair (Q_t, lambda_bar_t), whose
/// moments are averages of the iterate moments (linearity of the estimators
/// in the policy mixture).
inline ReductionResult run_reduction(const SampleSet& samples, const PopulationModel& model,
                                     const ConstraintSystem& system, const SolverConfig& cfg) {
  if (!(cfg.eps > 0.0)) throw ConfigError("solver eps must be positive");
  if (!(cfg.oracle.theta_max > 0.0)) throw ConfigError("theta_max must be positive");
  if (!(cfg.rho > 0.0)) throw ConfigError("rho must be positive");
  if (cfg.max_iters < 1) throw ConfigError("max_iters must be >= 1");

  detail::LagrangianEvaluator eval(samples, model, system);
  const int rows = system.rows();
  const double bound = system.bound;
  const Eigen::VectorXd c_hat = system.c_hat();
  const double eta_base = cfg.eta_scale * std::sqrt(std::log(static_cast<double>(rows)) + 1.0) / cfg.rho;

  ReductionResult result;
  result.trace.iterations.reserve(static_cast<std::size_t>(cfg.max_iters));

  Eigen::VectorXd v = Eigen::VectorXd::Zero(rows);
  std::optional<PolicyPair> warm;
  Eigen::VectorXd sum_lambda = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd sum_moments = Eigen::VectorXd::Zero(system.arity());
  double sum_epr = 0.0;
  std::vector<PolicyPair> support;
  if (cfg.randomized) support.reserve(static_cast<std::size_t>(cfg.max_iters));

  double realized_rho = 0.0;
  bool certified = false;

  for (int t = 1; t <= cfg.max_iters; ++t) {
    const Eigen::VectorXd lambda = scale_dual(v, bound);

    // Line 3: best decision at the current dual. Warm-started descent each
    // iteration; the multi-start refresh guards against basin changes.
    const bool fresh = cfg.oracle.enumeration() || t == 1 ||
                       (cfg.fresh_restart_stride > 0 && t % cfg.fresh_restart_stride == 0);
    const int restarts = fresh ? cfg.oracle.restarts : 0;
    PolicyPair f_t = detail::best_policy(eval, lambda, cfg.oracle, warm ? &*warm : nullptr,
                                         restarts, nullptr, cfg.warm_steps);
    warm = f_t;

    const Eigen::VectorXd moments = eval.constraint_moments(f_t);
    const Eigen::VectorXd viol = system.matrix * moments - c_hat;
    const double epr_t = eval.epr(f_t);
    realized_rho = std::max(realized_rho, viol.cwiseAbs().maxCoeff());

    sum_lambda += lambda;
    sum_moments += moments;
    sum_epr += epr_t;
    if (cfg.randomized) support.push_back(f_t);

    IterationRecord rec;
    rec.t = t;
    rec.lambda = lambda;
    rec.theta = f_t;
    rec.moments = moments;
    rec.max_violation = viol.maxCoeff();
    rec.epr = epr_t;

    const bool check = (cfg.check_stride > 0 && t % cfg.check_stride == 0) ||
                       t == cfg.max_iters;
    if (check) {
      double primal_gap = 0.0, dual_gap = 0.0;
      if (cfg.randomized) {
        const double inv_t = 1.0 / static_cast<double>(t);
        const Eigen::VectorXd lambda_bar = inv_t * sum_lambda;
        const Eigen::VectorXd avg_moments = inv_t * sum_moments;
        const Eigen::VectorXd avg_viol = system.matrix * avg_moments - c_hat;
        const double avg_epr = inv_t * sum_epr;
        const double mixture_value = avg_epr + lambda_bar.dot(avg_viol);
        double best_value = 0.0;
        detail::best_policy(eval, lambda_bar, cfg.oracle, warm ? &*warm : nullptr,
                            cfg.oracle.restarts, &best_value);
        primal_gap = std::max(0.0, mixture_value - best_value);
        dual_gap = std::max(
            0.0, avg_epr + dual_support_max(avg_viol, bound).value - mixture_value);
      } else {
        const double value = epr_t + lambda.dot(viol);
        double best_value = 0.0;
        detail::best_policy(eval, lambda, cfg.oracle, &f_t, cfg.oracle.restarts,
                            &best_value);
        primal_gap = std::max(0.0, value - best_value);
        dual_gap = std::max(0.0, epr_t + dual_support_max(viol, bound).value - value);
      }
      rec.primal_gap = primal_gap;
      rec.dual_gap = dual_gap;
      result.trace.certificate.primal_gap = primal_gap;
      result.trace.certificate.dual_gap = dual_gap;
      certified = std::max(primal_gap, dual_gap) <= cfg.eps;
    }

    result.trace.iterations.push_back(std::move(rec));
    result.policy = f_t;
    result.lambda = lambda;
    result.iterations = t;
    if (certified) break;

    const double eta_t = eta_base / std::sqrt(static_cast<double>(t));
    v += eta_t * viol;
  }

  result.trace.certificate.eps = cfg.eps;
  result.trace.certificate.succeeded = certified;
  result.trace.certificate.realized_rho = realized_rho;
  if (cfg.randomized) {
    RandomizedPolicy q;
    q.support = std::move(support);
    q.lambda_bar = sum_lambda / static_cast<double>(result.iterations);
    result.randomized = std::move(q);
  }
  return result;
}

}  // namespace steerfair
