#include <catch2/catch_amalgamated.hpp>

#include "steerfair/config.hpp"
#include "steerfair/experiment.hpp"

using namespace steerfair;

namespace {

const char* kExperimentToml = R"(
# benchmark configuration
[population]
d = 10
mu_a = 0.5
mu_d = 0.1
beta = 1.0
cost_a = 4.0
cost_d = 10.0
variant = "direct"

[solver]
eps = 0.5
max_iters = 100
theta_max = 8.0
oracle_restarts = 2
oracle_steps = 50

[constraints]
nu = 0.0
B = 25.0

[experiment]
methods = ["alg1", "exante_dp"]
n_train = 40
n_test = 40
seed_train = 0
seed_test = 1

[output]
plots = false
)";

}  // namespace

TEST_CASE("TOML subset: scalars, arrays, comments, strings") {
  const auto t = toml::Table::parse(R"(
top = 3
[a]
x = 1.5   # trailing comment
y = -2
flag = true
name = "hash # inside"
vec = [1, 2.5, 3]
words = ["p", "q"]
[a.b]
z = 1e-3
)");
  CHECK(t.get_int("top") == 3);
  CHECK(t.get_double("a.x") == 1.5);
  CHECK(t.get_int("a.y") == -2);
  CHECK(t.get_bool("a.flag"));
  CHECK(t.get_string("a.name") == "hash # inside");
  const auto vec = t.get_double_array("a.vec");
  REQUIRE(vec.size() == 3);
  CHECK(vec[1] == 2.5);
  CHECK(t.get_string_array("a.words")[1] == "q");
  CHECK(t.get_double("a.b.z") == Catch::Approx(1e-3));
  CHECK(t.get_double("a.y") == -2.0);  // ints read as doubles
}

TEST_CASE("TOML subset: malformed input raises ConfigError") {
  CHECK_THROWS_AS(toml::Table::parse("no equals sign"), ConfigError);
  CHECK_THROWS_AS(toml::Table::parse("[unterminated"), ConfigError);
  CHECK_THROWS_AS(toml::Table::parse("x = "), ConfigError);
  CHECK_THROWS_AS(toml::Table::parse("x = [1, 2"), ConfigError);
  CHECK_THROWS_AS(toml::Table::parse("x = 1\nx = 2"), ConfigError);
  CHECK_THROWS_AS(toml::Table::parse("bad key! = 1"), ConfigError);
}

TEST_CASE("experiment config loads with defaults") {
  const auto t = toml::Table::parse(kExperimentToml);
  const ExperimentConfig cfg = load_experiment_config(t);
  CHECK(cfg.population.dim == 10);
  CHECK(cfg.population.mu_a == Eigen::VectorXd::Constant(10, 0.5));
  CHECK(cfg.solver.oracle.theta_max == 8.0);
  CHECK(cfg.dual_bound == 25.0);
  REQUIRE(cfg.nu.has_value());
  CHECK(*cfg.nu == 0.0);
  CHECK(cfg.methods.size() == 2);
  CHECK(cfg.n_train == 40);
  CHECK(!cfg.plots);
}

TEST_CASE("empty method list is a config error") {
  std::string text = kExperimentToml;
  const auto pos = text.find("methods = [\"alg1\", \"exante_dp\"]");
  text.replace(pos, std::string("methods = [\"alg1\", \"exante_dp\"]").size(),
               "methods = []");
  const auto t = toml::Table::parse(text);
  CHECK_THROWS_AS(load_experiment_config(t), ConfigError);
}

TEST_CASE("unknown method is a config error") {
  std::string text = kExperimentToml;
  const auto pos = text.find("\"exante_dp\"");
  text.replace(pos, 11, "\"mystery\"");
  const auto t = toml::Table::parse(text);
  CHECK_THROWS_AS(load_experiment_config(t), ConfigError);
}

TEST_CASE("unknown config keys are rejected") {
  std::string text = kExperimentToml;
  text += "\n[solver]\n";  // duplicate section header is fine; duplicate keys are not
  text.replace(text.find("[solver]"), 8, "[solver]\noracle_restars = 9");
  const auto t = toml::Table::parse(text);
  try {
    load_experiment_config(t);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("oracle_restars") != std::string::npos);
  }
}

TEST_CASE("vector fields accept explicit arrays") {
  const auto t = toml::Table::parse(R"(
[population]
d = 3
mu_a = [0.1, 0.2, 0.3]
mu_d = 0.0
beta = [1, 1, 0]
cost_a = 1.0
cost_d = 1.0
mask = [1, 0, 1]
)");
  const ModelSpec spec = load_model_spec(t);
  CHECK(spec.mu_a[2] == 0.3);
  CHECK(spec.beta[2] == 0.0);
  REQUIRE(spec.mask.has_value());
  CHECK((*spec.mask)[1] == 0.0);
}

TEST_CASE("feasibility and demo configs load") {
  const auto tf = toml::Table::parse(R"(
[population]
d = 10
mu_a = 0.5
mu_d = 0.1
beta = 1.0
cost_a = 1.0
cost_d = 1.0
[feasibility]
case = "exante"
n_points = 7
seed = 3
)");
  const FeasibilityConfig fc = load_feasibility_config(tf);
  CHECK(fc.kind == "exante");
  CHECK(fc.n_points == 7);

  const auto td = toml::Table::parse(R"(
[demo]
kind = "coate_loury"
grid_points = 11
[market]
wage = 1.0
cost_family = "exponential"
cost_param_a = 2.0
cost_param_d = 1.0
m0 = 0.0
m1 = 2.0
)");
  const DemoConfig dc = load_demo_config(td);
  CHECK(dc.kind == "coate_loury");
  CHECK(dc.grid_points == 11);
  CHECK(dc.coate_loury.cost_a.cdf(1.0) == Catch::Approx(1.0 - std::exp(-2.0)));
}

TEST_CASE("loading other than identity is rejected in config files") {
  const auto t = toml::Table::parse(R"(
[population]
d = 2
mu_a = 0.0
mu_d = 0.0
beta = 1.0
cost_a = 1.0
cost_d = 1.0
variant = "latent"
loading = "random"
)");
  CHECK_THROWS_AS(load_model_spec(t), ConfigError);
}
