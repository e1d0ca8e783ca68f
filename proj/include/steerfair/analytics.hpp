#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <span>

#include "steerfair/math.hpp"
#include "steerfair/population.hpp"
#include "steerfair/response.hpp"

namespace steerfair {

/// Analytic law of the ex-post pair (theta_g^T X', beta^T X') for the direct
/// variant, resp. (theta_g^T X', beta^T S') for the latent variant.
struct GaussianSummary {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};

inline GaussianSummary analytic_summary(const PolicyPair& theta, Group g,
                                        const PopulationModel& model) {
  const Eigen::VectorXd& th = theta[g];
  const Eigen::VectorXd& mu = model.mu(g);
  const Eigen::VectorXd& beta = model.beta;
  const double inv_c = 1.0 / model.cost(g);
  GaussianSummary s;
  if (!model.is_latent()) {
    const Eigen::VectorXd m_th = model.masked(th);
    s.mean[0] = th.dot(mu) + inv_c * th.dot(m_th);
    s.mean[1] = beta.dot(mu) + inv_c * beta.dot(m_th);
    s.cov(0, 0) = th.squaredNorm();
    s.cov(0, 1) = s.cov(1, 0) = th.dot(beta);
    s.cov(1, 1) = beta.squaredNorm();
  } else {
    const Eigen::MatrixXd& lam = *model.loading;
    const Eigen::VectorXd lam_t_th = lam.transpose() * th;  // effective direction
    const Eigen::VectorXd m_lam_t_th = model.masked(lam_t_th);
    s.mean[0] = lam_t_th.dot(mu) + inv_c * lam_t_th.dot(m_lam_t_th);
    s.mean[1] = beta.dot(mu) + inv_c * beta.dot(m_lam_t_th);
    s.cov(0, 0) = lam_t_th.squaredNorm() + th.squaredNorm();
    s.cov(0, 1) = s.cov(1, 0) = beta.dot(lam_t_th);
    s.cov(1, 1) = beta.squaredNorm();
  }
  return s;
}

namespace detail {

/// Per-sample logit arguments of the ex-post acceptance and outcome
/// probabilities for one group. Single source of the estimator formulas; the
/// solver's gradients differentiate exactly these expressions.
struct ExPostArgs {
  Eigen::ArrayXd accept;   // theta_g^T x_i' per sample
  Eigen::ArrayXd outcome;  // beta^T x_i' (direct) / beta^T s_i' (latent proxy)
};

inline ExPostArgs expost_args(const Eigen::MatrixXd& rows, const Eigen::VectorXd& th,
                              Group g, const PopulationModel& model) {
  const double inv_c = 1.0 / model.cost(g);
  ExPostArgs a;
  if (!model.is_latent()) {
    const Eigen::VectorXd m_th = model.masked(th);
    a.accept = (rows * th).array() + inv_c * th.dot(m_th);
    a.outcome = (rows * model.beta).array() + inv_c * model.beta.dot(m_th);
  } else {
    if (!model.square_loading())
      throw ArityMismatch("sample-level latent estimation needs a square loading");
    const Eigen::MatrixXd& lam = *model.loading;
    const Eigen::VectorXd m_lam_t_th = model.masked(lam.transpose() * th);
    a.accept = (rows * th).array() + inv_c * th.dot(lam * m_lam_t_th);
    a.outcome = (rows * model.beta).array() + inv_c * model.beta.dot(m_lam_t_th);
  }
  return a;
}

inline Eigen::ArrayXd exante_accept_args(const Eigen::MatrixXd& rows,
                                         const Eigen::VectorXd& th) {
  return (rows * th).array();
}

inline void require_nonempty(const SampleSet& samples) {
  if (samples.rows_a.rows() < 1 || samples.rows_d.rows() < 1)
    throw EmptyGroup("sample set has an empty group");
}

}  // namespace detail

/// The six conditional moments, in the fixed order
/// [E[Y'|A], E[Y'|D], E[f|A], E[f|D], E[f Y'|A], E[f Y'|D]].
struct MomentVector {
  std::array<double, 6> v{};

  double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
  Eigen::Matrix<double, 6, 1> as_vector() const {
    Eigen::Matrix<double, 6, 1> out;
    for (int i = 0; i < 6; ++i) out[i] = v[static_cast<std::size_t>(i)];
    return out;
  }
};

/// Group-conditional plug-in averages of the ex-post probabilities. Averages
/// sigma values rather than sampled labels: same expectation, lower variance,
/// deterministic given the sample.
inline MomentVector plugin_moments(const SampleSet& samples, const PolicyPair& theta,
                                   const PopulationModel& model) {
  detail::require_nonempty(samples);
  MomentVector m;
  for (Group g : kGroups) {
    const auto args = detail::expost_args(samples.rows(g), theta[g], g, model);
    const Eigen::ArrayXd f = sigmoid(args.accept);
    const Eigen::ArrayXd y = sigmoid(args.outcome);
    const int j = g == Group::A ? 0 : 1;
    m.v[static_cast<std::size_t>(j)] = y.mean();
    m.v[static_cast<std::size_t>(2 + j)] = f.mean();
    m.v[static_cast<std::size_t>(4 + j)] = (f * y).mean();
  }
  return m;
}

namespace detail {

inline double regularizer(const PolicyPair& theta, const PopulationModel& model) {
  double reg = 0.0;
  for (Group g : kGroups) {
    const double w = model.reg_weighted_by_group ? model.proportion(g) : 1.0;
    reg += w * theta[g].squaredNorm();
  }
  return model.reg_weight * reg;
}

}  // namespace detail

/// Ex-post risk estimate: proportion-weighted disagreement probability plus
/// the ||theta_g||^2 regularizer.
inline double plugin_epr(const SampleSet& samples, const PolicyPair& theta,
                         const PopulationModel& model) {
  detail::require_nonempty(samples);
  double err = 0.0;
  for (Group g : kGroups) {
    const auto args = detail::expost_args(samples.rows(g), theta[g], g, model);
    const Eigen::ArrayXd f = sigmoid(args.accept);
    const Eigen::ArrayXd y = sigmoid(args.outcome);
    err += model.proportion(g) * (f * (1.0 - y) + (1.0 - f) * y).mean();
  }
  return err + detail::regularizer(theta, model);
}

/// Metric choices for the ex-ante (no response) baselines.
enum class ExAnteMetric { DP, FPR, FNR, PPV, NPV };

inline const char* to_string(ExAnteMetric m) {
  switch (m) {
    case ExAnteMetric::DP: return "dp";
    case ExAnteMetric::FPR: return "fpr";
    case ExAnteMetric::FNR: return "fnr";
    case ExAnteMetric::PPV: return "ppv";
    case ExAnteMetric::NPV: return "npv";
  }
  return "?";
}

inline constexpr double kDenominatorGuard = 1e-12;

namespace detail {

/// Ratio metric from plug-in acceptance/outcome probability arrays.
inline std::optional<double> ratio_metric(const Eigen::ArrayXd& f,
                                          const Eigen::ArrayXd& y, ExAnteMetric m) {
  double num = 0.0, den = 0.0;
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
  if (den < kDenominatorGuard) return std::nullopt;
  return num / den;
}

}  // namespace detail

/// The per-group value of one ex-ante metric (x' = x, no response applied).
/// Throws DegenerateDenominator when a denominator falls below the guard.
inline Eigen::Vector2d exante_moments(const SampleSet& samples, const PolicyPair& theta,
                                      const PopulationModel& model, ExAnteMetric metric) {
  detail::require_nonempty(samples);
  Eigen::Vector2d out;
  for (Group g : kGroups) {
    const Eigen::MatrixXd& rows = samples.rows(g);
    const Eigen::ArrayXd f = sigmoid(detail::exante_accept_args(rows, theta[g]));
    const Eigen::ArrayXd y = sigmoid((rows * model.beta).array());
    const auto value = detail::ratio_metric(f, y, metric);
    if (!value)
      throw DegenerateDenominator(std::string("ex-ante metric ") + to_string(metric) +
                                  " undefined for group " + group_name(g));
    out[g == Group::A ? 0 : 1] = *value;
  }
  return out;
}

namespace detail {

/// Group-conditional sums of the ex-post probability products for one policy,
/// the shared raw material of moments, risk and the fairness report. For a
/// policy mixture these sums are averaged across the support (the estimators
/// are linear in the mixture).
struct GroupStats {
  double f = 0.0;    // E[f | g]
  double y = 0.0;    // E[Y' | g]
  double fy = 0.0;   // E[f Y' | g]
  double err = 0.0;  // E[f(1-Y') + (1-f)Y' | g]
  double reg = 0.0;  // ||theta_g||^2

  GroupStats& operator+=(const GroupStats& o) {
    f += o.f;
    y += o.y;
    fy += o.fy;
    err += o.err;
    reg += o.reg;
    return *this;
  }
  GroupStats& operator/=(double k) {
    f /= k;
    y /= k;
    fy /= k;
    err /= k;
    reg /= k;
    return *this;
  }
};

inline GroupStats group_stats(const Eigen::MatrixXd& rows, const Eigen::VectorXd& theta,
                              Group g, const PopulationModel& model) {
  const ExPostArgs args = expost_args(rows, theta, g, model);
  const Eigen::ArrayXd f = sigmoid(args.accept);
  const Eigen::ArrayXd y = sigmoid(args.outcome);
  GroupStats s;
  s.f = f.mean();
  s.y = y.mean();
  s.fy = (f * y).mean();
  s.err = (f * (1.0 - y) + (1.0 - f) * y).mean();
  s.reg = theta.squaredNorm();
  return s;
}

inline PerGroup<GroupStats> mixture_stats(const SampleSet& samples,
                                          std::span<const PolicyPair> mixture,
                                          const PopulationModel& model) {
  require_nonempty(samples);
  if (mixture.empty()) throw EmptyGroup("empty policy mixture");
  PerGroup<GroupStats> out;
  for (Group g : kGroups) {
    for (const PolicyPair& theta : mixture)
      out[g] += group_stats(samples.rows(g), theta[g], g, model);
    out[g] /= static_cast<double>(mixture.size());
  }
  return out;
}

}  // namespace detail

/// Moments of a uniformly weighted policy mixture: entrywise averages of the
/// per-policy moments.
inline MomentVector plugin_moments(const SampleSet& samples,
                                   std::span<const PolicyPair> mixture,
                                   const PopulationModel& model) {
  const auto stats = detail::mixture_stats(samples, mixture, model);
  MomentVector m;
  for (Group g : kGroups) {
    const int j = g == Group::A ? 0 : 1;
    m.v[static_cast<std::size_t>(j)] = stats[g].y;
    m.v[static_cast<std::size_t>(2 + j)] = stats[g].f;
    m.v[static_cast<std::size_t>(4 + j)] = stats[g].fy;
  }
  return m;
}

/// Ex-post risk of a mixture: the average of the per-policy risks.
inline double plugin_epr(const SampleSet& samples, std::span<const PolicyPair> mixture,
                         const PopulationModel& model) {
  const auto stats = detail::mixture_stats(samples, mixture, model);
  double out = 0.0;
  for (Group g : kGroups) {
    const double reg_w = model.reg_weighted_by_group ? model.proportion(g) : 1.0;
    out += model.proportion(g) * stats[g].err + model.reg_weight * reg_w * stats[g].reg;
  }
  return out;
}

/// Every long-term fairness metric per group, with absolute between-group
/// gaps. Ratio metrics with a denominator under the guard are reported as
/// undefined (absent), never as 0 or infinity.
struct FairnessReport {
  PerGroup<double> response;       // E[Y' | g]
  PerGroup<double> parity;         // E[f | g]
  PerGroup<std::optional<double>> fpr, fnr, ppv, npv;
  PerGroup<double> err_rate;       // P(f != Y' | g)
  PerGroup<double> epr;            // err_rate + reg ||theta_g||^2
  double epr_total = 0.0;          // proportion-weighted aggregate

  double response_gap = 0.0;
  double parity_gap = 0.0;
  std::optional<double> fpr_gap, fnr_gap, ppv_gap, npv_gap;
  double err_rate_gap = 0.0;
  double epr_gap = 0.0;

  std::optional<double> separation_gap() const {  // max of FPR/FNR gaps
    if (!fpr_gap || !fnr_gap) return std::nullopt;
    return std::max(*fpr_gap, *fnr_gap);
  }
  std::optional<double> sufficiency_gap() const {  // max of PPV/NPV gaps
    if (!ppv_gap || !npv_gap) return std::nullopt;
    return std::max(*ppv_gap, *npv_gap);
  }
};

namespace detail {

inline std::optional<double> opt_gap(const PerGroup<std::optional<double>>& v) {
  if (!v.a || !v.d) return std::nullopt;
  return std::abs(*v.a - *v.d);
}

inline std::optional<double> guarded(double num, double den) {
  if (den < kDenominatorGuard) return std::nullopt;
  return num / den;
}

inline FairnessReport report_from_stats(const PerGroup<GroupStats>& stats,
                                        const PopulationModel& model) {
  FairnessReport r;
  for (Group g : kGroups) {
    const GroupStats& s = stats[g];
    r.response[g] = s.y;
    r.parity[g] = s.f;
    r.fpr[g] = guarded(s.f - s.fy, 1.0 - s.y);
    r.fnr[g] = guarded(s.y - s.fy, s.y);
    r.ppv[g] = guarded(s.fy, s.f);
    r.npv[g] = guarded(1.0 - s.f - s.y + s.fy, 1.0 - s.f);
    r.err_rate[g] = s.err;
    r.epr[g] = s.err + model.reg_weight * s.reg;
    const double reg_w = model.reg_weighted_by_group ? model.proportion(g) : 1.0;
    r.epr_total += model.proportion(g) * s.err + model.reg_weight * reg_w * s.reg;
  }
  r.response_gap = std::abs(r.response.a - r.response.d);
  r.parity_gap = std::abs(r.parity.a - r.parity.d);
  r.fpr_gap = opt_gap(r.fpr);
  r.fnr_gap = opt_gap(r.fnr);
  r.ppv_gap = opt_gap(r.ppv);
  r.npv_gap = opt_gap(r.npv);
  r.err_rate_gap = std::abs(r.err_rate.a - r.err_rate.d);
  r.epr_gap = std::abs(r.epr.a - r.epr.d);
  return r;
}

}  // namespace detail

inline FairnessReport fairness_report(const SampleSet& samples, const PolicyPair& theta,
                                      const PopulationModel& model) {
  detail::require_nonempty(samples);
  PerGroup<detail::GroupStats> stats;
  for (Group g : kGroups)
    stats[g] = detail::group_stats(samples.rows(g), theta[g], g, model);
  return detail::report_from_stats(stats, model);
}

/// Fairness report of a uniformly weighted policy mixture. Every numerator
/// and denominator is linear in the mixture, so ratios use the averaged sums.
inline FairnessReport fairness_report(const SampleSet& samples,
                                      std::span<const PolicyPair> mixture,
                                      const PopulationModel& model) {
  return detail::report_from_stats(detail::mixture_stats(samples, mixture, model), model);
}

}  // namespace steerfair
