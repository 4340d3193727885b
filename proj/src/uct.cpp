#include "synth/uct.hpp"

#include <cmath>

#include "synth/dsl.hpp"

namespace synth::uct {

int select_child(std::span<const int64_t> child_visits,
                 std::span<const double> child_means, int64_t parent_visits,
                 double k_explore) {
  if (child_visits.empty()) throw ContractViolation("select_child: leaf node");
  for (size_t j = 0; j < child_visits.size(); ++j)
    if (child_visits[j] == 0) return static_cast<int>(j);
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  double log_n = std::log(static_cast<double>(parent_visits));
  for (size_t j = 0; j < child_visits.size(); ++j) {
    double value = child_means[j] +
                   k_explore * std::sqrt(log_n / static_cast<double>(child_visits[j]));
    if (value > best_value) {
      best_value = value;
      best = static_cast<int>(j);
    }
  }
  return best;
}

double EvalCache::operator()(const Program& p) {
  std::string key = to_sexpr(*grammar_, p);
  auto it = values_.find(key);
  if (it != values_.end()) {
    ++hits_;
    return it->second;
  }
  double v = fn_(p);
  values_.emplace(std::move(key), v);
  return v;
}

void EvalCache::prime(const Program& p, double value) {
  values_.emplace(to_sexpr(*grammar_, p), value);
}

SimResult simulate(const Grammar& g, const Program& partial, const Config& config,
                   EvalCache& eval, Rng& rng) {
  if (partial.complete()) return {partial, eval(partial)};
  sa::RunOptions options;
  options.restrict_prefix = &partial;
  options.depth_limit = config.depth_limit;
  options.iteration_cap = config.rollout_iteration_cap;
  options.validate_prefix = config.validate_prefix;
  RunControl control(Budget::of_iterations(config.rollout_iteration_cap));
  EvalFn cached = [&eval](const Program& p) { return eval(p); };
  sa::RunResult r = sa::sa_run(g, cached, config.rollout_params, rng, control, options);
  return {r.best, r.best_score};
}

UctSearch::UctSearch(const Grammar& g, EvalFn eval, const Config& config,
                     uint64_t seed, std::optional<InitialBranch> branch)
    : grammar_(&g),
      config_(config),
      eval_(g, std::move(eval)),
      rng_(derive_seed(seed, 0x0C7)) {
  config_.validate();
  make_node(Program::hole(g), 0);
  if (!branch) return;

  // Pre-build the branch's node chain and backpropagate its value once:
  // every branch node ends up with one visit and every branch edge with the
  // provided mean.
  int node_id = 0;
  Program current = Program::hole(g);
  for (const DerivationStep& step : branch->derivation) {
    nodes_[node_id].visits += 1;
    if (step.production < 0 ||
        step.production >= static_cast<int>(nodes_[node_id].child_node.size()))
      throw ContractViolation("uct: initial branch step out of range");
    current = expand_leftmost(g, current, step.production);
    int child = make_node(current, nodes_[node_id].depth + 1);
    nodes_[node_id].child_node[step.production] = child;
    nodes_[node_id].child_visits[step.production] = 1;
    nodes_[node_id].child_value_sum[step.production] = branch->value;
    node_id = child;
  }
  nodes_[node_id].visits += 1;
  if (!nodes_[node_id].complete)
    throw ContractViolation("uct: initial branch does not end at a complete program");
  // remember the provided value so the program is not evaluated again
  eval_.prime(nodes_[node_id].program, branch->value);
  best_ = nodes_[node_id].program;
  best_score_ = branch->value;
  has_best_ = true;
}

int UctSearch::make_node(Program p, int depth) {
  Node n;
  n.complete = p.complete();
  n.depth = depth;
  if (!n.complete) {
    // children correspond 1:1 to the productions of the leftmost hole
    int count = 0;
    for (const NodePath& path : hole_paths(p)) {
      const ProgramNode* hole = node_at(p, path);
      count = grammar_->production_count(hole->symbol);
      break;
    }
    n.child_node.assign(count, -1);
    n.child_visits.assign(count, 0);
    n.child_value_sum.assign(count, 0.0);
  }
  n.program = std::move(p);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

double UctSearch::child_mean(int id, int j) const {
  const Node& n = nodes_[id];
  if (n.child_visits[j] == 0) return 0.0;
  return n.child_value_sum[j] / static_cast<double>(n.child_visits[j]);
}

void UctSearch::step() {
  std::vector<std::pair<int, int>> path;  // (node, child index)
  int node_id = 0;
  double value = 0.0;
  for (;;) {
    Node& node = nodes_[node_id];
    if (node.complete) {
      // no expansion; the cached value backs propagation
      value = eval_(node.program);
      last_sim_ = node.program;
      break;
    }
    std::vector<double> means(node.child_node.size());
    for (size_t j = 0; j < means.size(); ++j)
      means[j] = child_mean(node_id, static_cast<int>(j));
    int j = select_child(node.child_visits, means, node.visits, config_.k_explore);
    path.emplace_back(node_id, j);
    if (node.child_node[j] < 0) {
      // expansion: materialize the child, then simulate from it
      Program child_program = expand_leftmost(*grammar_, node.program, j);
      int child = make_node(std::move(child_program), node.depth + 1);
      nodes_[node_id].child_node[j] = child;
      SimResult sim = simulate(*grammar_, nodes_[child].program, config_, eval_, rng_);
      value = sim.best_score;
      last_sim_ = sim.best;
      break;
    }
    node_id = node.child_node[j];
  }

  for (auto [id, j] : path) {
    nodes_[id].visits += 1;
    nodes_[id].child_visits[j] += 1;
    nodes_[id].child_value_sum[j] += value;
  }
  last_value_ = value;
  if (last_sim_.complete() && (!has_best_ || value > best_score_)) {
    has_best_ = true;
    best_ = last_sim_;
    best_score_ = value;
  }
  ++iterations_;
}

void UctSearch::check_visit_conservation() const {
  for (size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    if (n.complete || n.visits == 0) continue;
    int64_t sum = 0;
    for (int64_t v : n.child_visits) sum += v;
    if (n.visits != sum)
      throw ContractViolation("uct: visit conservation violated at node " +
                              std::to_string(id));
  }
}

TreeStats UctSearch::stats() const {
  TreeStats s;
  s.nodes = static_cast<int64_t>(nodes_.size());
  for (const Node& n : nodes_) s.max_depth = std::max(s.max_depth, n.depth);
  s.cache_hits = eval_.hits();
  s.cache_size = eval_.size();
  s.iterations = iterations_;
  return s;
}

UctRunResult uct_search(const Grammar& g, const EvalFn& eval, const Config& config,
                        uint64_t seed, RunControl& control,
                        std::optional<InitialBranch> branch, const StepHook* hook) {
  UctSearch search(g, eval, config, seed, std::move(branch));
  while (!control.exhausted()) {
    search.step();
    control.count_iteration();
    if (hook != nullptr) (*hook)(search, search.iterations());
  }
  UctRunResult r;
  r.best = search.best();
  r.best_score = search.best_score();
  r.iterations = search.iterations();
  r.stats = search.stats();
  return r;
}

SynthResult synthesize(const Grammar& g, const sa::PipelineConfig& pipeline,
                       const Config& config, const PsiFn& psi_fn,
                       const CloneFn* clone_fn, const CheckpointHook* checkpoint,
                       TreeStats* stats_out) {
  const bool needs_clone = pipeline.mode != Mode::Baseline;
  if (needs_clone && clone_fn == nullptr)
    throw ContractViolation("synthesize: mode requires a cloning function");

  SynthResult result;
  double best_psi_global = 0.0;

  auto run_phase = [&](const char* phase_name, const Budget& budget, const EvalFn& eval,
                       std::optional<InitialBranch> branch,
                       auto&& on_improvement) -> UctRunResult {
    RunControl control(budget, pipeline.interrupted);
    double phase_best = -std::numeric_limits<double>::infinity();
    bool has_phase_best = false;
    StepHook hook = [&](const UctSearch& search, int64_t iteration) {
      bool improved = search.has_best() &&
                      (!has_phase_best || search.best_score() > phase_best);
      std::optional<double> c_value;
      std::optional<double> psi_value;
      if (improved) {
        has_phase_best = true;
        phase_best = search.best_score();
        on_improvement(search.best(), phase_best, c_value, psi_value);
      }
      if (improved || iteration % pipeline.log_every == 0) {
        TrajectoryRow row;
        row.elapsed_s = control.elapsed_for_log();
        row.iteration = iteration;
        row.phase = phase_name;
        row.c_score = c_value;
        row.psi_score = psi_value;
        row.best_psi = best_psi_global;
        row.program_len = node_count(search.last_simulated());
        result.trajectory.append(std::move(row));
      }
      if (checkpoint != nullptr && iteration % pipeline.checkpoint_every == 0 &&
          search.has_best())
        (*checkpoint)(search.best(), search.best_score(), iteration, phase_name);
    };
    UctRunResult r = uct_search(g, eval, config, pipeline.seed, control,
                                std::move(branch), &hook);
    result.stats.iterations += r.iterations;
    if (stats_out != nullptr) *stats_out = r.stats;
    if (checkpoint != nullptr && r.iterations > 0)
      (*checkpoint)(r.best, r.best_score, r.iterations, phase_name);
    return r;
  };

  if (pipeline.mode == Mode::Baseline || pipeline.mode == Mode::Lexicographic) {
    EvalFn eval;
    if (pipeline.mode == Mode::Baseline) {
      eval = [&](const Program& p) {
        ++result.stats.psi_evaluations;
        return psi_fn(p, pipeline.psi_matches_full);
      };
    } else {
      eval = [&](const Program& p) {
        ++result.stats.psi_evaluations;
        return psi_fn(p, pipeline.psi_matches_full) + 1e-7 * (*clone_fn)(p);
      };
    }
    UctRunResult r = run_phase(
        pipeline.mode == Mode::Baseline ? "baseline" : "lexi", pipeline.br_budget,
        eval, std::nullopt,
        [&](const Program&, double score, std::optional<double>&,
            std::optional<double>& psi_value) {
          double u = std::min(score, 1.0);
          best_psi_global = std::max(best_psi_global, u);
          psi_value = u;
        });
    result.best = r.best;
    result.best_psi = psi_fn(result.best, pipeline.psi_matches_full);
    return result;
  }

  // Sketch phase on the cloning score.
  std::optional<Program> psi_best_program;
  double psi_best_value = 0.0;
  std::optional<Program> c_best_program;

  EvalFn c_eval = [&](const Program& p) { return (*clone_fn)(p); };
  run_phase("sketch", pipeline.sketch_budget, c_eval, std::nullopt,
            [&](const Program& p, double c_value, std::optional<double>& c_out,
                std::optional<double>& psi_out) {
              c_best_program = p;
              result.best_c = std::max(result.best_c, c_value);
              c_out = c_value;
              if (pipeline.mode != Mode::BcOnly) {
                ++result.stats.psi_evaluations;
                double u = psi_fn(p, pipeline.psi_matches_sketch);
                psi_out = u;
                if (!psi_best_program || u > psi_best_value) {
                  psi_best_program = p;
                  psi_best_value = u;
                }
                best_psi_global = std::max(best_psi_global, u);
              }
            });

  if (!c_best_program)
    throw ContractViolation("synthesize: sketch phase produced no program");

  if (pipeline.mode == Mode::BcOnly) {
    result.best = *c_best_program;
    result.best_psi = psi_fn(result.best, pipeline.psi_matches_full);
    return result;
  }

  // BR phase, branch-initialized with the complete utility-best sketch
  // program (not a truncated prefix) and its full-fidelity value.
  Program seed = (psi_best_program && psi_best_value > 0.0) ? *psi_best_program
                                                            : *c_best_program;
  result.br_seed = seed;
  double seed_psi = psi_fn(seed, pipeline.psi_matches_full);
  ++result.stats.psi_evaluations;
  best_psi_global = std::max(best_psi_global, seed_psi);

  InitialBranch branch{derivation_sequence(seed), seed_psi};
  EvalFn psi_eval = [&](const Program& p) {
    ++result.stats.psi_evaluations;
    return psi_fn(p, pipeline.psi_matches_full);
  };
  UctRunResult br = run_phase("br", pipeline.br_budget, psi_eval, branch,
                              [&](const Program&, double score, std::optional<double>&,
                                  std::optional<double>& psi_out) {
                                best_psi_global = std::max(best_psi_global, score);
                                psi_out = score;
                              });

  if (br.iterations > 0 && br.best_score >= seed_psi) {
    result.best = br.best;
    result.best_psi = br.best_score;
  } else {
    result.best = seed;
    result.best_psi = seed_psi;
  }
  return result;
}

}  // namespace synth::uct
