#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "synth/commands.hpp"

namespace {

using nlohmann::json;

void handle_signal(int) { synth::cli::interrupt_flag().store(true); }

int default_workers() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

struct SynthArgs {
  std::string method = "sa";
  std::string mode = "baseline";
  std::string dataset;
  std::string opponent = "ga";
  std::string score = "o";
  std::string out_dir;
  uint64_t seed = 1;
  int workers = default_workers();
  double alpha = 0.9, beta = 200.0, t_initial = 100.0, epsilon = 1.0;
  double k_explore = 10.0;
  int depth_limit = 15;
  int psi_matches = 1000, psi_matches_sketch = 200;
  int64_t log_every = 100, checkpoint_every = 500;
  double budget_seconds = 0.0;
  int64_t budget_iterations = 0;
  double sketch_budget_seconds = 0.0;
  int64_t sketch_budget_iterations = 0;
};

void add_config_option(CLI::App* cmd) {
  cmd->set_config("--config", "", "config file (flag values override it)");
  cmd->allow_config_extras(false);
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);

  CLI::App app{"grammar-guided strategy synthesis for Can't Stop"};
  app.require_subcommand(1);

  // synth
  SynthArgs sa;
  CLI::App* synth_cmd = app.add_subcommand("synth", "run a synthesis pipeline");
  synth_cmd->add_option("--method", sa.method)->check(CLI::IsMember({"sa", "uct"}));
  synth_cmd->add_option("--mode", sa.mode)
      ->check(CLI::IsMember({"baseline", "sketch-a", "sketch-o", "bc-only", "lexi"}));
  synth_cmd->add_option("--dataset", sa.dataset, "demonstration dataset (jsonl)");
  synth_cmd->add_option("--opponent", sa.opponent, "ga | random | program file");
  synth_cmd->add_option("--score", sa.score, "cloning score for bc-only/lexi")
      ->check(CLI::IsMember({"a", "o"}));
  synth_cmd->add_option("--out-dir", sa.out_dir)->required();
  synth_cmd->add_option("--seed", sa.seed);
  synth_cmd->add_option("--workers", sa.workers)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--alpha", sa.alpha)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--beta", sa.beta)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--t-initial", sa.t_initial)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--epsilon", sa.epsilon)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--k-explore", sa.k_explore)->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--depth-limit", sa.depth_limit)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--psi-matches", sa.psi_matches)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--psi-matches-sketch", sa.psi_matches_sketch)
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--log-every", sa.log_every)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--checkpoint-every", sa.checkpoint_every)
      ->check(CLI::PositiveNumber);
  auto* opt_bs = synth_cmd->add_option("--budget-seconds", sa.budget_seconds)
                     ->check(CLI::PositiveNumber);
  auto* opt_bi = synth_cmd->add_option("--budget-iterations", sa.budget_iterations)
                     ->check(CLI::PositiveNumber);
  opt_bs->excludes(opt_bi);
  auto* opt_sbs =
      synth_cmd->add_option("--sketch-budget-seconds", sa.sketch_budget_seconds)
          ->check(CLI::PositiveNumber);
  auto* opt_sbi =
      synth_cmd->add_option("--sketch-budget-iterations", sa.sketch_budget_iterations)
          ->check(CLI::PositiveNumber);
  opt_sbs->excludes(opt_sbi);
  add_config_option(synth_cmd);

  // eval
  std::string eval_a = "random", eval_b = "ga";
  int eval_n = 1000;
  uint64_t eval_seed = 1;
  int eval_workers = default_workers();
  CLI::App* eval_cmd = app.add_subcommand("eval", "win rate of one strategy vs another");
  eval_cmd->add_option("--a", eval_a, "ga | random | program file");
  eval_cmd->add_option("--b", eval_b, "ga | random | program file");
  eval_cmd->add_option("--n,--matches", eval_n)->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval_seed);
  eval_cmd->add_option("--workers", eval_workers)->check(CLI::PositiveNumber);
  add_config_option(eval_cmd);

  // dataset
  std::string ds_a = "ga", ds_b = "ga", ds_mode = "self-play-winner", ds_out, ds_label;
  int ds_n = 3;
  uint64_t ds_seed = 1;
  CLI::App* dataset_cmd = app.add_subcommand("dataset", "generate demonstration data");
  dataset_cmd->add_option("--a", ds_a);
  dataset_cmd->add_option("--b", ds_b);
  dataset_cmd->add_option("--mode", ds_mode)
      ->check(CLI::IsMember({"self-play-winner", "versus-keep-a"}));
  dataset_cmd->add_option("--n,--matches", ds_n)->check(CLI::PositiveNumber);
  dataset_cmd->add_option("--seed", ds_seed);
  dataset_cmd->add_option("--label", ds_label);
  dataset_cmd->add_option("--out", ds_out)->required();
  add_config_option(dataset_cmd);

  // record
  std::string rec_opponent = "ga", rec_out, rec_label = "recorded";
  int rec_n = 3;
  uint64_t rec_seed = 1;
  CLI::App* record_cmd =
      app.add_subcommand("record", "play interactively and record a dataset");
  record_cmd->add_option("--opponent", rec_opponent);
  record_cmd->add_option("--n,--matches", rec_n)->check(CLI::PositiveNumber);
  record_cmd->add_option("--seed", rec_seed);
  record_cmd->add_option("--label", rec_label);
  record_cmd->add_option("--out", rec_out)->required();
  add_config_option(record_cmd);

  // replay
  std::string replay_input;
  CLI::App* replay_cmd = app.add_subcommand("replay", "verify a trace or dataset file");
  replay_cmd->add_option("--input,input", replay_input)->required();
  add_config_option(replay_cmd);

  // report
  std::vector<std::string> report_inputs;
  std::string report_out;
  CLI::App* report_cmd =
      app.add_subcommand("report", "merge trajectory CSVs into one table");
  report_cmd->add_option("--inputs,inputs", report_inputs)->required();
  report_cmd->add_option("--out", report_out)->required();
  add_config_option(report_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return synth::cli::kExitUsage;
  }

  json config;
  std::string command;
  if (synth_cmd->parsed()) {
    command = "synth";
    config = {{"method", sa.method},
              {"mode", sa.mode},
              {"opponent", sa.opponent},
              {"score", sa.score},
              {"out_dir", sa.out_dir},
              {"seed", sa.seed},
              {"workers", sa.workers},
              {"alpha", sa.alpha},
              {"beta", sa.beta},
              {"t_initial", sa.t_initial},
              {"epsilon", sa.epsilon},
              {"k_explore", sa.k_explore},
              {"depth_limit", sa.depth_limit},
              {"psi_matches", sa.psi_matches},
              {"psi_matches_sketch", sa.psi_matches_sketch},
              {"log_every", sa.log_every},
              {"checkpoint_every", sa.checkpoint_every}};
    if (!sa.dataset.empty()) config["dataset"] = sa.dataset;
    if (opt_bi->count() > 0) config["budget_iterations"] = sa.budget_iterations;
    else config["budget_seconds"] = opt_bs->count() > 0 ? sa.budget_seconds : 3600.0;
    if (opt_sbs->count() > 0) config["sketch_budget_seconds"] = sa.sketch_budget_seconds;
    if (opt_sbi->count() > 0)
      config["sketch_budget_iterations"] = sa.sketch_budget_iterations;
  } else if (eval_cmd->parsed()) {
    command = "eval";
    config = {{"a", eval_a},
              {"b", eval_b},
              {"n", eval_n},
              {"seed", eval_seed},
              {"workers", eval_workers}};
  } else if (dataset_cmd->parsed()) {
    command = "dataset";
    config = {{"a", ds_a},     {"b", ds_b},       {"mode", ds_mode}, {"n", ds_n},
              {"seed", ds_seed}, {"label", ds_label}, {"out", ds_out}};
  } else if (record_cmd->parsed()) {
    command = "record";
    config = {{"opponent", rec_opponent},
              {"n", rec_n},
              {"seed", rec_seed},
              {"label", rec_label},
              {"out", rec_out}};
  } else if (replay_cmd->parsed()) {
    command = "replay";
    config = {{"input", replay_input}};
  } else if (report_cmd->parsed()) {
    command = "report";
    config = {{"inputs", report_inputs}, {"out", report_out}};
  }

  synth::cli::Manifest manifest = synth::cli::make_manifest(command, config);
  return synth::cli::run(manifest, std::cin, std::cout, std::cerr);
}
