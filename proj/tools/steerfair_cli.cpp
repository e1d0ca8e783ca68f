// Command-line driver for the steerfair library: configuration-driven
// experiment runs, feasibility constructions, and impossibility demos.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "steerfair/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitInfeasible = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  bool no_plots = false;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", args.config_path, "path to a TOML config file");
  if (needs_config) opt->required();
  cmd->add_option("--out", args.out_dir, "artifact output directory");
  cmd->add_option("--seed-override", args.seed_override,
                  "replace the configured seeds (train = value, test = value + 1)");
  cmd->add_flag("--no-plots", args.no_plots, "skip SVG figure output");
  cmd->add_option("--threads", args.threads, "parallel method runs")
      ->check(CLI::Range(1, 64));
}

steerfair::RunOptions options_from(const CommonArgs& args) {
  steerfair::RunOptions opt;
  opt.no_plots = args.no_plots;
  opt.threads = args.threads;
  opt.seed_override = args.seed_override;
  return opt;
}

void print_report(const steerfair::FairnessReport& r, const char* split) {
  auto opt = [](const std::optional<double>& v) {
    return v ? steerfair::format_double(*v) : std::string("undefined");
  };
  std::printf("%s split:\n", split);
  std::printf("  %-12s %-22s %-22s %s\n", "metric", "group A", "group D", "gap");
  std::printf("  %-12s %-22s %-22s %s\n", "response",
              steerfair::format_double(r.response.a).c_str(),
              steerfair::format_double(r.response.d).c_str(),
              steerfair::format_double(r.response_gap).c_str());
  std::printf("  %-12s %-22s %-22s %s\n", "parity",
              steerfair::format_double(r.parity.a).c_str(),
              steerfair::format_double(r.parity.d).c_str(),
              steerfair::format_double(r.parity_gap).c_str());
  std::printf("  %-12s %-22s %-22s %s\n", "fpr", opt(r.fpr.a).c_str(), opt(r.fpr.d).c_str(),
              opt(r.fpr_gap).c_str());
  std::printf("  %-12s %-22s %-22s %s\n", "fnr", opt(r.fnr.a).c_str(), opt(r.fnr.d).c_str(),
              opt(r.fnr_gap).c_str());
  std::printf("  %-12s %-22s %-22s %s\n", "ppv", opt(r.ppv.a).c_str(), opt(r.ppv.d).c_str(),
              opt(r.ppv_gap).c_str());
  std::printf("  %-12s %-22s %-22s %s\n", "npv", opt(r.npv.a).c_str(), opt(r.npv.d).c_str(),
              opt(r.npv_gap).c_str());
  std::printf("  %-12s %-22s %-22s %s\n", "err_rate",
              steerfair::format_double(r.err_rate.a).c_str(),
              steerfair::format_double(r.err_rate.d).c_str(),
              steerfair::format_double(r.err_rate_gap).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steerfair: long-term group fairness for strategy-responsive populations"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, eval_args, feas_args, demo_args, report_args;
  auto* gen = app.add_subcommand("gen", "generate train/test sample sets");
  add_common(gen, gen_args);
  auto* train = app.add_subcommand("train", "run the configured methods end to end");
  add_common(train, train_args);
  auto* eval = app.add_subcommand("eval", "re-evaluate saved policies onto metrics.csv");
  add_common(eval, eval_args);
  auto* feas = app.add_subcommand("feasibility", "construct equality-of-treatment manifolds");
  add_common(feas, feas_args);
  auto* demo = app.add_subcommand("demo", "run an impossibility demonstration sweep");
  add_common(demo, demo_args);
  auto* report = app.add_subcommand("report", "print fairness reports for saved policies");
  add_common(report, report_args);

  CLI11_PARSE(app, argc, argv);

  try {
    using namespace steerfair;
    if (gen->parsed()) {
      const auto table = toml::Table::parse_file(gen_args.config_path);
      ExperimentConfig cfg = load_experiment_config(table);
      const auto opt = options_from(gen_args);
      if (opt.seed_override) {
        cfg.seed_train = *opt.seed_override;
        cfg.seed_test = *opt.seed_override + 1;
      }
      if (!cfg.population.lambda_a) cfg.population.lambda_a = 0.5;
      const PopulationModel model = validate_model(cfg.population);
      std::filesystem::create_directories(gen_args.out_dir);
      write_samples_csv(std::filesystem::path(gen_args.out_dir) / "train_samples.csv",
                        sample_population(model, cfg.n_train, cfg.n_train, cfg.seed_train));
      write_samples_csv(std::filesystem::path(gen_args.out_dir) / "test_samples.csv",
                        sample_population(model, cfg.n_test, cfg.n_test, cfg.seed_test));
      ManifestWriter manifest(std::filesystem::path(gen_args.out_dir) / "manifest.txt");
      manifest.set("tool_version", std::string(STEERFAIR_VERSION));
      manifest.set("generator_name", std::string(kGeneratorName));
      manifest.set("seed_train", static_cast<std::int64_t>(cfg.seed_train));
      manifest.set("seed_test", static_cast<std::int64_t>(cfg.seed_test));
      return kExitOk;
    }
    if (train->parsed()) {
      const auto table = toml::Table::parse_file(train_args.config_path);
      const ExperimentConfig cfg = load_experiment_config(table);
      const auto outcome =
          run_experiment(cfg, train_args.out_dir, options_from(train_args), &table);
      for (const auto& m : outcome.methods)
        std::printf("%-12s iters=%-5d certified=%d train_violation=%.3e test_violation=%.3e\n",
                    m.name.c_str(), m.result.iterations, m.result.succeeded() ? 1 : 0,
                    m.train_violation_raw, m.test_violation_raw);
      if (!outcome.all_certified) {
        std::fprintf(stderr, "solver failed to certify an eps-saddle for some method\n");
        return kExitSolver;
      }
      return kExitOk;
    }
    if (eval->parsed()) {
      const auto table = toml::Table::parse_file(eval_args.config_path);
      ExperimentConfig cfg = load_experiment_config(table);
      const auto opt = options_from(eval_args);
      if (opt.seed_override) {
        cfg.seed_train = *opt.seed_override;
        cfg.seed_test = *opt.seed_override + 1;
      }
      const auto policies =
          read_policies_csv(std::filesystem::path(eval_args.out_dir) / "policies.csv");
      evaluate_policies(cfg, policies, eval_args.out_dir);
      return kExitOk;
    }
    if (feas->parsed()) {
      const auto table = toml::Table::parse_file(feas_args.config_path);
      const FeasibilityConfig cfg = load_feasibility_config(table);
      const auto outcome = run_feasibility(cfg, feas_args.out_dir, &table);
      std::printf("constructed %zu points, worst equality gap %.3e\n",
                  outcome.points.size(), outcome.worst_gap);
      return kExitOk;
    }
    if (demo->parsed()) {
      const auto table = toml::Table::parse_file(demo_args.config_path);
      const DemoConfig cfg = load_demo_config(table);
      run_demo(cfg, demo_args.out_dir, &table);
      std::printf("sweep written to %s\n", demo_args.out_dir.c_str());
      return kExitOk;
    }
    if (report->parsed()) {
      const auto table = toml::Table::parse_file(report_args.config_path);
      ExperimentConfig cfg = load_experiment_config(table);
      if (!cfg.population.lambda_a) cfg.population.lambda_a = 0.5;
      const PopulationModel model = validate_model(cfg.population);
      const SampleSet train =
          sample_population(model, cfg.n_train, cfg.n_train, cfg.seed_train);
      const SampleSet test = sample_population(model, cfg.n_test, cfg.n_test, cfg.seed_test);
      const auto policies =
          read_policies_csv(std::filesystem::path(report_args.out_dir) / "policies.csv");
      for (const auto& [name, policy] : policies) {
        std::printf("== method %s ==\n", name.c_str());
        print_report(fairness_report(train, policy, model), "train");
        print_report(fairness_report(test, policy, model), "test");
      }
      return kExitOk;
    }
  } catch (const steerfair::InfeasibleConstruction& e) {
    std::fprintf(stderr, "infeasible construction: %s\n", e.what());
    return kExitInfeasible;
  } catch (const steerfair::SolverFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const steerfair::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const steerfair::ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
