// contention: codebook, sweep, simulate, example and verify subcommands.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "contention/cli/commands.hpp"
#include "contention/cli/verify.hpp"
#include "contention/strategies.hpp"
#include "contention/version.hpp"

namespace {

using contention::cli::ExperimentConfig;

void add_seed(CLI::App* app, ExperimentConfig& c) {
  app->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
}
void add_slots(CLI::App* app, ExperimentConfig& c) {
  app->add_option("--slots", c.slots, "Slots to simulate")->capture_default_str();
}
void add_k(CLI::App* app, ExperimentConfig& c) {
  app->add_option("--max-minislots,-K", c.max_minislots, "Probe budget per slot (K)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}
void add_code(CLI::App* app, ExperimentConfig& c) {
  app->add_option("--epsilon", c.epsilon, "Codebook mass cutoff")->capture_default_str();
  app->add_option("--max-entries", c.max_entries, "Codebook entry budget")->capture_default_str();
}
void add_output(CLI::App* app, ExperimentConfig& c, const std::string& default_format) {
  // Bound to an empty string; main() fills in the command's default.
  app->add_option("--format", c.format, "Output format: csv | json")
      ->default_str(default_format)
      ->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--out,-o", c.out, "Output file (default stdout)");
}
void add_workers(CLI::App* app, ExperimentConfig& c) {
  app->add_option("--workers", c.workers, "Worker threads (0 = all cores); results do not depend on it")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opportunistic contention resolution: threshold codes and slot simulator"};
  app.set_version_flag("--version", std::string(contention::kVersion));
  app.require_subcommand(1);

  ExperimentConfig cfg;

  auto* codebook = app.add_subcommand("codebook", "Build the MPA threshold code for N users");
  codebook->add_option("--n-users,-n", cfg.n_users, "Number of users")
      ->capture_default_str()
      ->check(CLI::Range(2, 4096));
  add_code(codebook, cfg);

  auto* simulate = app.add_subcommand("simulate", "Run one strategy over many slots");
  simulate->add_option("--n-users,-n", cfg.n_users, "Number of users (iid and constant channels)")
      ->capture_default_str()
      ->check(CLI::Range(2, 4096));
  simulate->add_option("--channel", cfg.channel, "iid | constant | correlated | chain-<k>")
      ->capture_default_str();
  simulate->add_option("--channel-epsilon", cfg.channel_epsilon,
                       "Probability skew of the correlated and chain channels")
      ->capture_default_str();
  simulate->add_option("--strategy", cfg.strategy)
      ->capture_default_str()
      ->check(CLI::IsMember(contention::strategy_names()));
  simulate->add_option("--trace", cfg.trace, "Write per-slot traces as JSON lines to this file");
  simulate->add_option("--trace-limit", cfg.trace_limit, "Slots to trace (0 = all)")
      ->capture_default_str();
  add_slots(simulate, cfg);
  add_k(simulate, cfg);
  add_seed(simulate, cfg);
  add_code(simulate, cfg);
  add_workers(simulate, cfg);

  auto* sweep = app.add_subcommand("sweep", "OSA and MPA delay for a range of user counts");
  sweep->add_option("--n-min", cfg.n_min)->capture_default_str()->check(CLI::Range(2, 4096));
  sweep->add_option("--n-max", cfg.n_max)->capture_default_str()->check(CLI::Range(2, 4096));
  sweep->add_option("--svg", cfg.svg, "Also write a delay-vs-users plot to this file");
  add_slots(sweep, cfg);
  add_k(sweep, cfg);
  add_seed(sweep, cfg);
  add_code(sweep, cfg);
  add_workers(sweep, cfg);

  auto* example = app.add_subcommand("example", "Worked examples: constant3 or correlated");
  example->add_option("name", cfg.example, "constant3 | correlated")
      ->capture_default_str()
      ->check(CLI::IsMember({"constant3", "correlated"}));
  example->add_option("--channel-epsilon", cfg.channel_epsilon,
                      "Probability skew of the correlated channel")
      ->capture_default_str();
  add_slots(example, cfg);
  add_k(example, cfg);
  add_seed(example, cfg);
  add_workers(example, cfg);

  contention::cli::VerifyOptions vopt;
  bool verbose = false;
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->add_option("--seed", vopt.seed, "Seed for the Monte-Carlo criteria")->capture_default_str();
  verify->add_option("--slots", vopt.slots, "Slots per simulated batch")->capture_default_str();
  verify->add_option("--only", vopt.only, "Criterion ids to run")
      ->check(CLI::Range(1, contention::cli::kCriterionCount));
  verify->add_flag("--verbose,-v", verbose, "Show every check, not only failures");
  verify->add_option("--workers", vopt.workers, "Worker threads (0 = all cores)")
      ->capture_default_str();

  std::string verify_format = "text";
  verify->add_option("--format", verify_format)
      ->capture_default_str()
      ->check(CLI::IsMember({"text", "json"}));

  add_output(codebook, cfg, "json");
  add_output(simulate, cfg, "csv");
  add_output(example, cfg, "csv");
  add_output(sweep, cfg, "csv");

  cfg.format.clear();
  CLI11_PARSE(app, argc, argv);
  if (cfg.format.empty()) cfg.format = *codebook ? "json" : "csv";

  try {
    if (*codebook) {
      cfg.command = "codebook";
      contention::cli::write_output(cfg, cfg.out, contention::cli::codebook_report(cfg));
    } else if (*simulate) {
      cfg.command = "simulate";
      contention::cli::write_output(cfg, cfg.out, contention::cli::simulate_report(cfg));
    } else if (*sweep) {
      cfg.command = "sweep";
      const auto out = contention::cli::sweep_report(cfg);
      contention::cli::write_output(cfg, cfg.out, out.table);
      if (!cfg.svg.empty()) contention::cli::write_output(cfg, cfg.svg, out.svg);
    } else if (*example) {
      cfg.command = "example";
      const auto out = contention::cli::example_report(cfg);
      contention::cli::write_output(cfg, cfg.out, out.text);
      if (!out.assertion_holds) {
        std::cerr << "contention: assertion failed: " << out.assertion << "\n";
        return 3;
      }
    } else if (*verify) {
      const auto results = contention::cli::run_acceptance(vopt);
      bool ok = true;
      nlohmann::json report = nlohmann::json::array();
      for (const auto& r : results) {
        ok = ok && r.passed;
        if (verify_format == "json") {
          report.push_back(contention::cli::to_json(r));
        } else {
          std::cout << contention::cli::format_result(r, verbose) << std::endl;
        }
      }
      if (verify_format == "json") {
        nlohmann::json j{{"tool", "contention"},
                         {"tool_version", contention::kVersion},
                         {"seed", vopt.seed},
                         {"config", {{"command", "verify"}, {"slots", vopt.slots}, {"seed", vopt.seed}}},
                         {"passed", ok},
                         {"criteria", report}};
        std::cout << j.dump(2) << "\n";
      } else {
        std::size_t passed = 0;
        for (const auto& r : results) passed += r.passed;
        std::cout << passed << "/" << results.size() << " criteria passed\n";
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& ex) {
    std::cerr << "contention: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
