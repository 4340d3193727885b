#include "synth/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "synth/cloning.hpp"
#include "synth/dsl.hpp"
#include "synth/evaluation.hpp"
#include "synth/io.hpp"
#include "synth/sa.hpp"
#include "synth/uct.hpp"

namespace synth::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fnv1a_hex(const std::string& data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string now_string() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
  return buf;
}

std::atomic<bool> g_interrupted{false};

void write_text_file(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw io::IoError("cannot write: " + path.string());
    out << content;
  }
  fs::rename(tmp, path);
}

Program load_program_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::IoError("cannot open program file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Program p = parse_sexpr(dsl::cantstop_grammar(), buf.str());
  if (!p.complete()) throw io::IoError("program file holds an incomplete program");
  return p;
}

struct BudgetPair {
  Budget sketch = Budget::of_seconds(600);
  Budget br = Budget::of_seconds(3000);
};

// Splits the total budget across the phases: an explicit sketch budget wins,
// otherwise the sketch phase gets a sixth of the total. bc-only runs
// entirely in the sketch phase; baseline and lexi entirely in the BR phase.
BudgetPair resolve_budgets(const json& cfg, Mode mode) {
  bool has_seconds = cfg.contains("budget_seconds");
  bool has_iterations = cfg.contains("budget_iterations");
  if (has_seconds == has_iterations)
    throw ContractViolation("set exactly one of --budget-seconds / --budget-iterations");
  BudgetPair out;
  if (mode == Mode::Baseline || mode == Mode::Lexicographic) {
    out.br = has_seconds ? Budget::of_seconds(cfg.at("budget_seconds").get<double>())
                         : Budget::of_iterations(cfg.at("budget_iterations").get<int64_t>());
    out.sketch = out.br;
    return out;
  }
  if (mode == Mode::BcOnly) {
    out.sketch = has_seconds
                     ? Budget::of_seconds(cfg.at("budget_seconds").get<double>())
                     : Budget::of_iterations(cfg.at("budget_iterations").get<int64_t>());
    out.br = out.sketch;
    return out;
  }
  if (has_seconds) {
    double total = cfg.at("budget_seconds").get<double>();
    double sketch = cfg.contains("sketch_budget_seconds")
                        ? cfg.at("sketch_budget_seconds").get<double>()
                        : total / 6.0;
    if (sketch >= total)
      throw ContractViolation("sketch budget must be smaller than the total budget");
    out.sketch = Budget::of_seconds(sketch);
    out.br = Budget::of_seconds(total - sketch);
  } else {
    int64_t total = cfg.at("budget_iterations").get<int64_t>();
    int64_t sketch = cfg.contains("sketch_budget_iterations")
                         ? cfg.at("sketch_budget_iterations").get<int64_t>()
                         : std::max<int64_t>(1, total / 6);
    if (sketch >= total)
      throw ContractViolation("sketch budget must be smaller than the total budget");
    out.sketch = Budget::of_iterations(sketch);
    out.br = Budget::of_iterations(total - sketch);
  }
  return out;
}

int cmd_synth(const Manifest& manifest, std::ostream& out) {
  const json& cfg = manifest.config;
  const Grammar& g = dsl::cantstop_grammar();

  fs::path out_dir = cfg.at("out_dir").get<std::string>();
  fs::create_directories(out_dir);
  write_text_file(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");

  auto mode = mode_from_name(cfg.at("mode").get<std::string>());
  if (!mode) throw ContractViolation("unknown mode");
  std::string method = cfg.at("method").get<std::string>();
  uint64_t seed = cfg.at("seed").get<uint64_t>();
  int workers = cfg.at("workers").get<int>();

  auto opponent = resolve_strategy(cfg.at("opponent").get<std::string>(),
                                   derive_seed(seed, 0x0bb));
  uint64_t psi_seed = derive_seed(seed, 0x951);
  PsiFn psi_fn = [&opponent, psi_seed, workers](const Program& p, int n) {
    auto candidate = dsl::make_program_strategy(p);
    return psi(*candidate, *opponent, n, psi_seed, workers);
  };

  std::optional<DataSet> dataset;
  std::optional<CloneFn> clone_fn;
  if (*mode != Mode::Baseline) {
    if (!cfg.contains("dataset"))
      throw ContractViolation("mode requires --dataset");
    dataset = io::read_dataset_file(cfg.at("dataset").get<std::string>());
    io::verify_dataset(*dataset);
    bool observation;  // bc-only and lexi pick their score via --score
    if (*mode == Mode::SketchAction) observation = false;
    else if (*mode == Mode::SketchObservation) observation = true;
    else observation = cfg.value("score", "o") == "o";
    clone_fn = [&dataset, observation](const Program& p) {
      auto s = dsl::make_program_strategy(p);
      return observation ? observation_score(*dataset, *s).value
                         : action_score(*dataset, *s).value;
    };
  }

  sa::PipelineConfig pipeline;
  pipeline.params.alpha = cfg.at("alpha").get<double>();
  pipeline.params.beta = cfg.at("beta").get<double>();
  pipeline.params.t_initial = cfg.at("t_initial").get<double>();
  pipeline.params.epsilon = cfg.at("epsilon").get<double>();
  pipeline.mode = *mode;
  BudgetPair budgets = resolve_budgets(cfg, *mode);
  pipeline.sketch_budget = budgets.sketch;
  pipeline.br_budget = budgets.br;
  pipeline.seed = seed;
  pipeline.depth_limit = cfg.at("depth_limit").get<int>();
  pipeline.psi_matches_full = cfg.at("psi_matches").get<int>();
  pipeline.psi_matches_sketch = cfg.at("psi_matches_sketch").get<int>();
  pipeline.log_every = cfg.at("log_every").get<int64_t>();
  pipeline.checkpoint_every = cfg.at("checkpoint_every").get<int64_t>();
  pipeline.interrupted = &g_interrupted;

  CheckpointHook checkpoint = [&](const Program& best, double score,
                                  int64_t iteration, const char* phase) {
    std::ostringstream text;
    text << "; manifest " << manifest.id << "\n; phase " << phase << " iteration "
         << iteration << " score " << format_double(score) << "\n"
         << to_sexpr(g, best) << "\n";
    write_text_file(out_dir / "checkpoint.sexpr", text.str());
  };

  SynthResult result;
  uct::TreeStats tree_stats;
  if (method == "sa") {
    result = sa::synthesize(g, pipeline, psi_fn, clone_fn ? &*clone_fn : nullptr,
                            &checkpoint);
  } else if (method == "uct") {
    uct::Config uct_config;
    uct_config.k_explore = cfg.at("k_explore").get<double>();
    uct_config.depth_limit = pipeline.depth_limit;
    result = uct::synthesize(g, pipeline, uct_config, psi_fn,
                             clone_fn ? &*clone_fn : nullptr, &checkpoint,
                             &tree_stats);
    json stats = {{"nodes", tree_stats.nodes},
                  {"max_depth", tree_stats.max_depth},
                  {"cache_hits", tree_stats.cache_hits},
                  {"cache_size", tree_stats.cache_size},
                  {"iterations", tree_stats.iterations}};
    write_text_file(out_dir / "tree_stats.json", stats.dump(2) + "\n");
  } else {
    throw ContractViolation("unknown method: " + method);
  }

  {
    std::ostringstream csv;
    result.trajectory.write_csv(csv, manifest.id);
    write_text_file(out_dir / "trajectory.csv", csv.str());
  }
  {
    std::ostringstream text;
    text << "; manifest " << manifest.id << "\n; psi " << format_double(result.best_psi)
         << " (" << pipeline.psi_matches_full << " matches)\n; mode "
         << mode_name(*mode) << " method " << method << "\n"
         << to_sexpr(g, result.best) << "\n";
    write_text_file(out_dir / "best_program.sexpr", text.str());
  }

  out << "method=" << method << " mode=" << mode_name(*mode)
      << " iterations=" << result.stats.iterations
      << " psi_evals=" << result.stats.psi_evaluations
      << " best_psi=" << format_double(result.best_psi)
      << " best_c=" << format_double(result.best_c) << "\n";
  out << "best program: " << to_text(g, result.best) << "\n";
  out << "outputs in " << out_dir.string() << "\n";
  if (g_interrupted.load()) out << "interrupted; latest checkpoint flushed\n";
  return kExitOk;
}

int cmd_eval(const Manifest& manifest, std::ostream& out) {
  const json& cfg = manifest.config;
  uint64_t seed = cfg.at("seed").get<uint64_t>();
  auto a = resolve_strategy(cfg.at("a").get<std::string>(), derive_seed(seed, 0xa));
  auto b = resolve_strategy(cfg.at("b").get<std::string>(), derive_seed(seed, 0xb));
  int n = cfg.at("n").get<int>();
  int workers = cfg.at("workers").get<int>();
  PsiResult r = psi_detailed(*a, *b, n, seed, workers);
  out << "win_rate " << cfg.at("a").get<std::string>() << " vs "
      << cfg.at("b").get<std::string>() << ": " << format_double(r.rate) << " ("
      << r.wins << "/" << r.n_matches << " wins, " << r.candidate_faults
      << " faults)\n";
  return kExitOk;
}

int cmd_dataset(const Manifest& manifest, std::ostream& out) {
  const json& cfg = manifest.config;
  std::string mode_name = cfg.at("mode").get<std::string>();
  DatasetMode mode;
  if (mode_name == "self-play-winner") {
    mode = DatasetMode::SelfPlayWinnerOnly;
    if (cfg.at("a").get<std::string>() != cfg.at("b").get<std::string>())
      throw ContractViolation("self-play-winner requires identical strategies");
  } else if (mode_name == "versus-keep-a") {
    mode = DatasetMode::VersusKeepA;
  } else {
    throw ContractViolation("unknown dataset mode: " + mode_name);
  }
  uint64_t seed = cfg.at("seed").get<uint64_t>();
  auto a = resolve_strategy(cfg.at("a").get<std::string>(), derive_seed(seed, 0xa));
  auto b = resolve_strategy(cfg.at("b").get<std::string>(), derive_seed(seed, 0xb));
  DataSet data = generate_dataset(*a, *b, cfg.at("n").get<int>(), mode, seed,
                                  cfg.value("label", ""));
  io::verify_dataset(data);
  fs::path out_path = cfg.at("out").get<std::string>();
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  std::ofstream file(out_path);
  if (!file) throw io::IoError("cannot write: " + out_path.string());
  io::write_dataset(file, data, manifest.id);
  write_text_file(out_path.string() + ".manifest.json",
                  manifest.to_json().dump(2) + "\n");
  out << "wrote " << data.matches.size() << " matches (" << data.pair_count()
      << " pairs) to " << out_path.string() << "\n";
  return kExitOk;
}

// Reads tokens until one names a legal action; every prompt lists the
// choices, so an illegal entry can only re-prompt.
cantstop::Action prompt_action(const cantstop::GameState& state,
                               const cantstop::ActionList& actions, std::istream& in,
                               std::ostream& out) {
  for (;;) {
    out << cantstop::render_board(state);
    if (state.phase == cantstop::Phase::YesNoDecision) {
      out << "roll again? [y/n]: " << std::flush;
    } else {
      out << "actions:\n";
      for (int i = 0; i < actions.size(); ++i) {
        out << "  [" << i << "] advance " << cantstop::to_string(actions[i]);
        bool places_new = false;
        for (int c = 0; c < actions[i].n_cols; ++c)
          places_new |= cantstop::is_new_neutral(state, actions[i], actions[i].cols[c]) != 0;
        if (places_new) out << "  (places a neutral)";
        out << "\n";
      }
      out << "your choice (index): " << std::flush;
    }
    std::string token;
    if (!(in >> token)) throw io::IoError("input ended during recording");
    if (state.phase == cantstop::Phase::YesNoDecision) {
      if (token == "y") return cantstop::Action::yes();
      if (token == "n") return cantstop::Action::no();
    } else {
      try {
        size_t pos = 0;
        int index = std::stoi(token, &pos);
        if (pos == token.size() && index >= 0 && index < actions.size())
          return actions[index];
      } catch (const std::exception&) {
      }
    }
    out << "not a legal choice: " << token << "\n";
  }
}

int cmd_record(const Manifest& manifest, std::istream& in, std::ostream& out) {
  const json& cfg = manifest.config;
  uint64_t seed = cfg.at("seed").get<uint64_t>();
  int n_matches = cfg.at("n").get<int>();
  auto opponent = resolve_strategy(cfg.at("opponent").get<std::string>(),
                                   derive_seed(seed, 0xbb));
  DataSet data;
  data.label = cfg.value("label", "recorded");
  int human_wins = 0;
  for (int m = 0; m < n_matches; ++m) {
    uint64_t match_seed = derive_seed(seed, static_cast<uint64_t>(m));
    Rng dice_rng(derive_seed(match_seed, kDiceStreamTag));
    auto opp = opponent->clone();
    opp->reseed(derive_seed(match_seed, kPlayer1StreamTag));
    int starter = m % 2;
    out << "== match " << (m + 1) << " of " << n_matches << ", you are player 0, "
        << (starter == 0 ? "you start" : "opponent starts") << " ==\n";
    cantstop::GameState state = cantstop::initial_state(starter, dice_rng);
    DataSetMatch match;
    match.demonstrator = 0;
    match.seed = match_seed;
    match.starter = starter;
    int decisions = 0;
    while (!cantstop::is_terminal(state) && decisions < kMaxDecisionsPerMatch) {
      cantstop::ActionList actions = cantstop::legal_actions(state);
      cantstop::Action action;
      if (state.to_move == 0) {
        action = prompt_action(state, actions, in, out);
        match.pairs.push_back({state, action});
      } else {
        action = opp->choose(state);
        out << "opponent plays " << cantstop::to_string(action) << "\n";
      }
      state = cantstop::apply_action(state, action, dice_rng);
      ++decisions;
    }
    match.end_state = state;
    auto w = cantstop::winner(state);
    match.winner = w ? *w : (state.to_move ^ 1);  // decision cap: mover loses
    human_wins += match.winner == 0;
    out << "match " << (m + 1) << " won by player " << match.winner << "\n";
    data.matches.push_back(std::move(match));
  }
  io::verify_dataset(data);
  fs::path out_path = cfg.at("out").get<std::string>();
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  std::ofstream file(out_path);
  if (!file) throw io::IoError("cannot write: " + out_path.string());
  io::write_dataset(file, data, manifest.id);
  write_text_file(out_path.string() + ".manifest.json",
                  manifest.to_json().dump(2) + "\n");
  out << "recorded " << n_matches << " matches (" << human_wins
      << " won) to " << out_path.string() << "\n";
  return kExitOk;
}

int cmd_replay(const Manifest& manifest, std::ostream& out) {
  std::string path = manifest.config.at("input").get<std::string>();
  io::verify_file(path);
  out << "ok: " << path << " verified\n";
  return kExitOk;
}

int cmd_report(const Manifest& manifest, std::ostream& out) {
  const json& cfg = manifest.config;
  fs::path out_path = cfg.at("out").get<std::string>();
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  std::ofstream file(out_path);
  if (!file) throw io::IoError("cannot write: " + out_path.string());
  file << "# manifest " << manifest.id << "\nsource," << TrajectoryLog::header()
       << "\n";
  int rows = 0;
  for (const auto& input : cfg.at("inputs")) {
    std::string path = input.get<std::string>();
    std::ifstream in(path);
    if (!in) throw io::IoError("cannot open trajectory: " + path);
    std::string source = fs::path(path).stem().string();
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!saw_header) {
        if (line != TrajectoryLog::header())
          throw io::IoError("unexpected trajectory header in " + path);
        saw_header = true;
        continue;
      }
      file << source << ',' << line << "\n";
      ++rows;
    }
    if (!saw_header) throw io::IoError("no trajectory header in " + path);
  }
  out << "merged " << rows << " rows into " << out_path.string() << "\n";
  return kExitOk;
}

}  // namespace

json Manifest::to_json() const {
  return {{"format", "manifest/1"},
          {"id", id},
          {"command", command},
          {"created", created},
          {"config", config}};
}

Manifest make_manifest(const std::string& command, const json& config) {
  Manifest m;
  m.command = command;
  m.config = config;
  m.id = fnv1a_hex(command + "\n" + config.dump());
  m.created = now_string();
  return m;
}

std::unique_ptr<Strategy> resolve_strategy(const std::string& spec, uint64_t seed) {
  if (spec == "ga") return dsl::make_ga_strategy();
  if (spec == "random") return dsl::make_random_strategy(seed);
  return dsl::make_program_strategy(load_program_file(spec));
}

std::atomic<bool>& interrupt_flag() { return g_interrupted; }

int run(const Manifest& manifest, std::istream& in, std::ostream& out,
        std::ostream& err) {
  try {
    if (manifest.command == "synth") return cmd_synth(manifest, out);
    if (manifest.command == "eval") return cmd_eval(manifest, out);
    if (manifest.command == "dataset") return cmd_dataset(manifest, out);
    if (manifest.command == "record") return cmd_record(manifest, in, out);
    if (manifest.command == "replay") return cmd_replay(manifest, out);
    if (manifest.command == "report") return cmd_report(manifest, out);
    err << "unknown command: " << manifest.command << "\n";
    return kExitUsage;
  } catch (const io::IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace synth::cli
