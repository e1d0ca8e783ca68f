#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "steerfair/markets.hpp"
#include "steerfair/response.hpp"

using namespace steerfair;

namespace {

PopulationModel small_model(int d, double cost, const Eigen::VectorXd& mask) {
  ModelSpec spec;
  spec.dim = d;
  spec.mu_a = Eigen::VectorXd::Zero(d);
  spec.mu_d = Eigen::VectorXd::Zero(d);
  spec.beta = Eigen::VectorXd::Ones(d);
  spec.cost_a = spec.cost_d = cost;
  spec.mask = mask;
  return validate_model(spec);
}

}  // namespace

TEST_CASE("closed-form action on a masked two-dimensional problem") {
  const PopulationModel m = small_model(2, 2.0, Eigen::Vector2d(1.0, 0.0));
  const Eigen::VectorXd a = best_response_action(Eigen::Vector2d(3.0, 4.0), Group::A, m);
  CHECK(a[0] == Catch::Approx(1.5).margin(1e-15));
  CHECK(a[1] == 0.0);
}

TEST_CASE("zero policy induces zero action") {
  const PopulationModel m = helpers::benchmark_model();
  const Eigen::VectorXd a = best_response_action(Eigen::VectorXd::Zero(10), Group::D, m);
  CHECK(a.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("closed-form action matches the brute-force utility argmax") {
  std::mt19937_64 engine(42);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> dim_dist(1, 3);
  std::uniform_real_distribution<double> cost_dist(0.5, 4.0);
  std::bernoulli_distribution coin(0.7);

  for (int trial = 0; trial < 25; ++trial) {
    const int d = dim_dist(engine);
    Eigen::VectorXd mask(d);
    for (int i = 0; i < d; ++i) mask[i] = coin(engine) ? 1.0 : 0.0;
    const double cost = cost_dist(engine);
    const PopulationModel m = small_model(d, cost, mask);
    Eigen::VectorXd theta(d), x(d);
    for (int i = 0; i < d; ++i) theta[i] = 2.0 * normal(engine);
    for (int i = 0; i < d; ++i) x[i] = normal(engine);

    const Eigen::VectorXd closed = best_response_action(theta, Group::A, m);
    const double radius = theta.cwiseAbs().maxCoeff() / cost + 0.5;
    const Eigen::VectorXd brute =
        oracles::brute_force_action(theta, x, mask, cost, radius);
    CHECK((closed - brute).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("ex-post point evaluation, direct variant") {
  const PopulationModel m = small_model(1, 1.0, Eigen::VectorXd::Ones(1));
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd e1 = Eigen::VectorXd::Ones(1);
  const ResponseOutcome out = expost_point(x, e1, Group::A, m);
  CHECK(out.expost_features[0] == Catch::Approx(1.0).margin(1e-15));
  CHECK(out.outcome_prob == Catch::Approx(0.731059).margin(1e-6));
  CHECK(out.accept_prob == Catch::Approx(0.731059).margin(1e-6));
}

TEST_CASE("all-zero mask disables the response") {
  const PopulationModel m = small_model(3, 1.0, Eigen::Vector3d::Zero());
  const Eigen::VectorXd x = Eigen::Vector3d(0.3, -0.2, 1.0);
  const Eigen::VectorXd theta = Eigen::Vector3d(5.0, 5.0, 5.0);
  const ResponseOutcome out = expost_point(x, theta, Group::D, m);
  CHECK(out.expost_features == x);
}

TEST_CASE("latent identity-loading proxy response") {
  ModelSpec spec;
  spec.dim = 3;
  spec.mu_a = spec.mu_d = Eigen::Vector3d::Zero();
  spec.beta = Eigen::Vector3d::Ones();
  spec.cost_a = spec.cost_d = 2.0;
  spec.mask = Eigen::Vector3d(1.0, 1.0, 0.0);
  spec.variant = "latent";
  spec.loading = Eigen::MatrixXd::Identity(3, 3);
  const PopulationModel m = validate_model(spec);
  const Eigen::VectorXd x = Eigen::Vector3d(0.5, 0.0, -0.5);
  const Eigen::VectorXd theta = Eigen::Vector3d(2.0, 0.0, 4.0);
  const ResponseOutcome out = expost_point(x, theta, Group::A, m);
  // s' = x + (1/c) M Loading^T theta
  CHECK(out.expost_skills[0] == Catch::Approx(0.5 + 1.0).margin(1e-14));
  CHECK(out.expost_skills[1] == Catch::Approx(0.0).margin(1e-14));
  CHECK(out.expost_skills[2] == Catch::Approx(-0.5).margin(1e-14));
}

TEST_CASE("worker response: no wage means no investment") {
  ContinuousMarket1D market;
  market.wage = 0.0;
  market.cost_a = market.cost_d = 4.0;
  market.m0 = 0.0;
  market.m1 = 2.0;
  CHECK(continuous_skill_response(0.3, Group::A, market, 1.0) == 0.3);
}

TEST_CASE("worker response: unreachable threshold means no investment") {
  ContinuousMarket1D market;
  market.wage = 2.0;
  market.cost_a = market.cost_d = 4.0;
  market.m0 = 0.0;
  market.m1 = 2.0;
  CHECK(continuous_skill_response(0.0, Group::A, market, 1e9) == 0.0);
}

TEST_CASE("worker response matches a dense-grid argmax") {
  ContinuousMarket1D market;
  market.wage = 2.0;
  market.cost_a = market.cost_d = 4.0;
  market.m0 = 0.0;
  market.m1 = 2.0;
  const double threshold = 1.0, s = 0.0;
  const double got = continuous_skill_response(s, Group::A, market, threshold);

  const double p1 = 1.0 - market.signal_cdf(threshold, 1);
  const double p0 = 1.0 - market.signal_cdf(threshold, 0);
  const auto objective = [&](double sp) {
    const double q = sigmoid(sp);
    const double d = std::max(sp - s, 0.0);
    return market.wage * (q * p1 + (1.0 - q) * p0) - 0.5 * market.cost_a * d * d;
  };
  const double grid = oracles::grid_skill_response(s, 5.0, 1e-5, objective);
  CHECK(std::abs(got - grid) <= 1e-4);
  CHECK(got >= s);
}

TEST_CASE("worker response is nondecreasing in the ex-ante skill") {
  ContinuousMarket1D market;
  market.wage = 2.0;
  market.cost_a = market.cost_d = 6.0;
  market.m0 = 0.0;
  market.m1 = 2.0;
  double prev = -1e300;
  for (int i = 0; i < 100; ++i) {
    const double s = -3.0 + 6.0 * i / 99.0;
    const double sp = continuous_skill_response(s, Group::D, market, 1.0);
    CHECK(sp >= prev - 1e-7);
    prev = sp;
  }
}

TEST_CASE("non-concave worker objective is rejected") {
  ContinuousMarket1D market;
  market.wage = 50.0;
  market.cost_a = market.cost_d = 0.5;
  market.m0 = 0.0;
  market.m1 = 2.0;
  CHECK_THROWS_AS(continuous_skill_response(0.0, Group::A, market, 1.0),
                  NonConcaveObjective);
  CHECK_THROWS_AS(make_continuous_market(market), NonConcaveObjective);
}

TEST_CASE("qualified-fraction update against exponential cost CDFs") {
  CoateLouryMarket market;
  market.wage = 1.0;
  market.cost_a = CostFamily::exponential(2.0);
  market.cost_d = CostFamily::exponential(1.0);
  market.m0 = 0.0;
  // theta = m1/2 gives TPR - FPR = 2 Phi(m1/2) - 1 = 0.5 at this m1.
  market.m1 = 2.0 * 0.674489750196082;
  const double theta = market.m1 / 2.0;
  CHECK(market.tpr(theta) - market.fpr(theta) == Catch::Approx(0.5).margin(1e-9));

  const double pi_a = coate_loury_pi(theta, Group::A, market);
  const double pi_d = coate_loury_pi(theta, Group::D, market);
  CHECK(pi_a == Catch::Approx(1.0 - std::exp(-1.0)).margin(1e-6));   // 0.632121
  CHECK(pi_d == Catch::Approx(1.0 - std::exp(-0.5)).margin(1e-6));   // 0.393469
  CHECK(pi_a > pi_d);
}

TEST_CASE("qualified fraction is zero without net benefit") {
  CoateLouryMarket market;
  market.wage = 1.0;
  market.cost_a = CostFamily::exponential(2.0);
  market.cost_d = CostFamily::exponential(1.0);
  market.m0 = 0.0;
  market.m1 = 1.0;
  // At huge thresholds TPR and FPR both vanish.
  CHECK(coate_loury_pi(1e9, Group::A, market) == 0.0);
  CHECK(coate_loury_pi(1e9, Group::D, market) == 0.0);
}

TEST_CASE("qualified fraction decays beyond the benefit peak and dominance holds") {
  CoateLouryMarket market;
  market.wage = 1.5;
  market.cost_a = CostFamily::exponential(3.0);
  market.cost_d = CostFamily::exponential(1.0);
  market.m0 = 0.0;
  market.m1 = 2.0;

  // argmax of TPR - FPR for unit-variance normals is the midpoint.
  const double peak = 0.5 * (market.m0 + market.m1);
  double prev = coate_loury_pi(peak, Group::A, market);
  for (int i = 1; i <= 40; ++i) {
    const double theta = peak + 0.2 * i;
    const double cur = coate_loury_pi(theta, Group::A, market);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
  // Stochastic dominance of costs: pi_A >= pi_D everywhere, strict when the
  // net benefit is positive.
  for (int i = 0; i <= 40; ++i) {
    const double theta = -2.0 + 0.2 * i;
    const double pa = coate_loury_pi(theta, Group::A, market);
    const double pd = coate_loury_pi(theta, Group::D, market);
    CHECK(pa >= pd);
    if (market.wage * (market.tpr(theta) - market.fpr(theta)) > 1e-9) CHECK(pa > pd);
  }
}
