#pragma once

#include <cmath>
#include <string>

#include "steerfair/common.hpp"
#include "steerfair/math.hpp"

namespace steerfair {

/// One-dimensional hiring market. Worker skill S is scalar; productivity is
/// Y|S ~ Ber(sigma(S)); the interview signal is X|Y=y ~ N(m_y, 1); workers may
/// raise their skill at quadratic cost (c_g/2) [s' - s]_+^2.
struct ContinuousMarket1D {
  double wage = 1.0;
  double cost_a = 1.0, cost_d = 1.0;
  double m0 = 0.0, m1 = 1.0;  // signal means for Y = 0 / 1, unit noise
  double skill_mean_a = 0.0, skill_mean_d = 0.0;
  double skill_sd_a = 1.0, skill_sd_d = 1.0;
  double s_span = 10.0;  // search bracket [s, s + s_span]

  double cost(Group g) const { return g == Group::A ? cost_a : cost_d; }
  double skill_mean(Group g) const { return g == Group::A ? skill_mean_a : skill_mean_d; }
  double skill_sd(Group g) const { return g == Group::A ? skill_sd_a : skill_sd_d; }

  /// P{X <= x | Y = y}.
  double signal_cdf(double x, int y) const {
    return normal_cdf(x - (y == 1 ? m1 : m0));
  }

  /// Survival of the assessment given skill: P{X > t | S = s}.
  double survival(double t, double s) const {
    const double p1 = 1.0 - signal_cdf(t, 1);
    const double p0 = 1.0 - signal_cdf(t, 0);
    const double q = sigmoid(s);
    return q * p1 + (1.0 - q) * p0;
  }
};

/// Constructs the market, checking m1 > m0 and that the costs keep the scalar
/// best-response objective strictly concave for any threshold (the sigmoid's
/// curvature times the wage must stay below min_g c_g).
inline ContinuousMarket1D make_continuous_market(const ContinuousMarket1D& params) {
  if (!(params.m1 > params.m0))
    throw ConfigError("continuous market requires m1 > m0");
  if (!(params.wage >= 0.0) || !(params.cost_a > 0.0) || !(params.cost_d > 0.0) ||
      !(params.skill_sd_a > 0.0) || !(params.skill_sd_d > 0.0) || !(params.s_span > 0.0))
    throw ConfigError("continuous market has non-positive parameters");
  const double min_cost = std::min(params.cost_a, params.cost_d);
  if (!(min_cost > params.wage * kSigmoidCurvatureBound))
    throw NonConcaveObjective(
        "cost coefficients too small for a strictly concave best response");
  return params;
}

/// Parametric worker cost-of-qualification family for the discrete market.
struct CostFamily {
  enum class Kind { Exponential, Uniform };
  Kind kind = Kind::Exponential;
  double param = 1.0;  // rate for Exponential, upper end b for Uniform(0, b)

  /// CDF evaluated at x; nondecreasing with range [0, 1], support on [0, inf).
  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    switch (kind) {
      case Kind::Exponential: return 1.0 - std::exp(-param * x);
      case Kind::Uniform: return x >= param ? 1.0 : x / param;
    }
    return 0.0;
  }

  static CostFamily exponential(double rate) { return {Kind::Exponential, rate}; }
  static CostFamily uniform(double b) { return {Kind::Uniform, b}; }
};

/// Discrete two-group hiring market: workers invest in a binary qualification
/// when the wage-weighted hiring benefit exceeds their drawn cost.
struct CoateLouryMarket {
  double wage = 1.0;
  CostFamily cost_a, cost_d;
  double m0 = 0.0, m1 = 1.0;  // signal X|Y=y ~ N(m_y, 1)
  double pi_a = 0.5, pi_d = 0.5;  // prior qualification rates
  double p_plus = 1.0, p_minus = 1.0;  // firm payoff for good/bad hires

  const CostFamily& cost(Group g) const { return g == Group::A ? cost_a : cost_d; }

  double signal_cdf(double x, int y) const {
    return normal_cdf(x - (y == 1 ? m1 : m0));
  }
  double tpr(double threshold) const { return 1.0 - signal_cdf(threshold, 1); }
  double fpr(double threshold) const { return 1.0 - signal_cdf(threshold, 0); }
};

inline CoateLouryMarket make_coate_loury_market(const CoateLouryMarket& params) {
  if (!(params.m1 > params.m0))
    throw ConfigError("discrete market requires m1 > m0 (stochastic order of signals)");
  if (!(params.wage > 0.0) || !(params.p_plus > 0.0) || !(params.p_minus > 0.0))
    throw ConfigError("discrete market has non-positive payoffs");
  if (!(params.pi_a >= 0.0 && params.pi_a <= 1.0 && params.pi_d >= 0.0 && params.pi_d <= 1.0))
    throw ConfigError("prior qualification rates must lie in [0,1]");
  return params;
}

}  // namespace steerfair
