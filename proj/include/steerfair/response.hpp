#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "steerfair/markets.hpp"
#include "steerfair/math.hpp"
#include "steerfair/population.hpp"

namespace steerfair {

/// Policy parameters for both groups. Vectors live in R^d for the direct
/// variant and R^p (interview space) for the latent variant.
struct PolicyPair {
  Eigen::VectorXd theta_a, theta_d;

  PolicyPair() = default;
  PolicyPair(Eigen::VectorXd a, Eigen::VectorXd d)
      : theta_a(std::move(a)), theta_d(std::move(d)) {}

  const Eigen::VectorXd& operator[](Group g) const {
    return g == Group::A ? theta_a : theta_d;
  }
  Eigen::VectorXd& operator[](Group g) { return g == Group::A ? theta_a : theta_d; }

  static PolicyPair zero(int dim) {
    return PolicyPair(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim));
  }
};

/// Utility-maximizing action of an agent facing policy theta_g.
///
/// Closed form of the quadratic-cost problem: a = (1/c_g) M theta_g for the
/// direct variant; the latent variant responds to the effective direction
/// Loading^T theta_g, so a = (1/c_g) M Loading^T theta_g.
inline Eigen::VectorXd best_response_action(const Eigen::VectorXd& theta_g, Group g,
                                            const PopulationModel& model) {
  const double inv_cost = 1.0 / model.cost(g);
  if (!model.is_latent()) return inv_cost * model.masked(theta_g);
  return inv_cost * model.masked(model.loading->transpose() * theta_g);
}

/// Everything the ex-post distribution map produces for one agent.
struct ResponseOutcome {
  Eigen::VectorXd action;           // a(theta_g)
  Eigen::VectorXd expost_features;  // x'
  Eigen::VectorXd expost_skills;    // s' (latent variant; empty for direct)
  double outcome_prob = 0.0;        // sigma(beta^T x') resp. sigma(beta^T s')
  double accept_prob = 0.0;         // sigma(theta_g^T x')
};

/// Maps one ex-ante feature row through the best response.
///
/// Latent variant: the interview outcome x is used as the proxy for the
/// unobserved skill s (the decision maker never sees s), so
/// s' = x + M a  and  x' = x + Loading M a. Requires a square loading.
inline ResponseOutcome expost_point(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& theta_g, Group g,
                                    const PopulationModel& model) {
  ResponseOutcome out;
  out.action = best_response_action(theta_g, g, model);
  if (!model.is_latent()) {
    out.expost_features = x + model.masked(out.action);
    out.outcome_prob = sigmoid(model.beta.dot(out.expost_features));
  } else {
    if (!model.square_loading())
      throw ArityMismatch("sample-level latent estimation needs a square loading");
    const Eigen::VectorXd shift = model.masked(out.action);
    out.expost_skills = x + shift;
    out.expost_features = x + (*model.loading) * shift;
    out.outcome_prob = sigmoid(model.beta.dot(out.expost_skills));
  }
  out.accept_prob = sigmoid(theta_g.dot(out.expost_features));
  return out;
}

/// Best response of a worker with scalar skill s to a threshold policy:
/// argmax over s* in [s, s + span] of  w P{X > t | s*} - (c_g/2)[s* - s]_+^2.
///
/// The objective is strictly concave on the bracket whenever
/// c_g > w (I(t|0) - I(t|1)) sup|sigma''|; violations raise NonConcaveObjective.
/// Solved by golden-section search to absolute tolerance 1e-8; s' >= s always.
inline double continuous_skill_response(double s, Group g,
                                        const ContinuousMarket1D& market,
                                        double threshold) {
  const double p1 = 1.0 - market.signal_cdf(threshold, 1);
  const double p0 = 1.0 - market.signal_cdf(threshold, 0);
  const double gain = market.wage * (p1 - p0);  // w * (I(t|0) - I(t|1)) >= 0
  if (gain <= 0.0) return s;                    // no incentive to invest

  const double c = market.cost(g);
  if (!(c > gain * kSigmoidCurvatureBound))
    throw NonConcaveObjective("best-response objective not concave on the bracket");

  const auto objective = [&](double sp) {
    const double d = sp - s;
    return gain * sigmoid(sp) - 0.5 * c * d * d;
  };

  // Golden-section on [s, s + span]; the concavity check above guarantees a
  // single interior maximum (or the boundary point s itself).
  double lo = s, hi = s + market.s_span;
  const double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (hi - lo > 1e-8) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    }
  }
  const double sp = 0.5 * (lo + hi);
  // Never move below the ex-ante skill; the quadratic cost vanishes there.
  return std::max(sp, s);
}

/// Long-run qualified fraction of group g under threshold theta_g:
/// pi_g = E_g( w (TPR - FPR) ). The cost CDFs have nonnegative support, so the
/// argument is clamped at zero (non-positive net benefit means nobody invests).
inline double coate_loury_pi(double theta_g, Group g, const CoateLouryMarket& market) {
  const double net = market.wage * (market.tpr(theta_g) - market.fpr(theta_g));
  return market.cost(g).cdf(std::max(0.0, net));
}

}  // namespace steerfair
