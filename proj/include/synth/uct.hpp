#pragma once

#include <span>
#include <unordered_map>

#include "synth/sa.hpp"

namespace synth::uct {

struct Config {
  double k_explore = 10.0;
  sa::Params rollout_params;            // short schedule for the simulation policy
  int64_t rollout_iteration_cap = 200;
  int depth_limit = 15;
  bool validate_prefix = false;

  void validate() const {
    if (k_explore < 0) throw ContractViolation("uct: K must be >= 0");
    rollout_params.validate();
  }
};

// UCB child choice: any unvisited child wins over all visited ones (ties by
// enumeration order); otherwise argmax of mean + K * sqrt(ln(parent)/visits),
// first index on ties.
int select_child(std::span<const int64_t> child_visits,
                 std::span<const double> child_means, int64_t parent_visits,
                 double k_explore);

// Memoizes an evaluation by canonical program text. Complete programs are
// evaluated at most once per search.
class EvalCache {
 public:
  EvalCache(const Grammar& g, EvalFn fn) : grammar_(&g), fn_(std::move(fn)) {}
  double operator()(const Program& p);
  // Seeds the cache with an externally known value.
  void prime(const Program& p, double value);
  int64_t hits() const { return hits_; }
  int64_t size() const { return static_cast<int64_t>(values_.size()); }

 private:
  const Grammar* grammar_;
  EvalFn fn_;
  std::unordered_map<std::string, double> values_;
  int64_t hits_ = 0;
};

struct SimResult {
  Program best;
  double best_score = 0.0;
};

// Simulation policy: completes the partial program at random, then runs one
// leaf-restricted annealing pass whose mutation sites are the partial's
// holes; every candidate shares the partial's derivation prefix. A complete
// input is returned unchanged with its (cached) score.
SimResult simulate(const Grammar& g, const Program& partial, const Config& config,
                   EvalCache& eval, Rng& rng);

// A complete program plus its known value; pre-builds the derivation's node
// chain and backpropagates the value once before the first iteration.
struct InitialBranch {
  Derivation derivation;
  double value = 0.0;
};

struct TreeStats {
  int64_t nodes = 0;
  int max_depth = 0;
  int64_t cache_hits = 0;
  int64_t cache_size = 0;
  int64_t iterations = 0;
};

class UctSearch {
 public:
  UctSearch(const Grammar& g, EvalFn eval, const Config& config, uint64_t seed,
            std::optional<InitialBranch> branch = std::nullopt);

  // One selection/expansion/simulation/backpropagation cycle. Reports the
  // simulated program and value through the optional hook slots.
  void step();

  bool has_best() const { return has_best_; }
  const Program& best() const { return best_; }
  double best_score() const { return best_score_; }
  int64_t iterations() const { return iterations_; }
  TreeStats stats() const;

  // Introspection (tests, sidecar stats).
  int root_id() const { return 0; }
  int64_t node_visits(int id) const { return nodes_[id].visits; }
  int64_t node_count() const { return static_cast<int64_t>(nodes_.size()); }
  std::span<const int64_t> child_visits(int id) const { return nodes_[id].child_visits; }
  int child_node(int id, int j) const { return nodes_[id].child_node[j]; }
  double child_mean(int id, int j) const;
  bool node_complete(int id) const { return nodes_[id].complete; }
  const Program& node_program(int id) const { return nodes_[id].program; }
  // visits == sum(child visits) at every expanded internal node; the
  // pre-built branch leaf carries its initialization visit.
  void check_visit_conservation() const;

  // Most recent step's simulation outcome.
  const Program& last_simulated() const { return last_sim_; }
  double last_value() const { return last_value_; }

 private:
  struct Node {
    Program program;
    bool complete = false;
    int depth = 0;
    int64_t visits = 0;
    std::vector<int> child_node;        // -1 until expanded
    std::vector<int64_t> child_visits;
    std::vector<double> child_value_sum;
  };

  int make_node(Program p, int depth);

  const Grammar* grammar_;
  Config config_;
  EvalCache eval_;
  Rng rng_;
  std::vector<Node> nodes_;
  Program best_;
  double best_score_ = 0.0;
  bool has_best_ = false;
  int64_t iterations_ = 0;
  Program last_sim_;
  double last_value_ = 0.0;
};

struct UctRunResult {
  Program best;
  double best_score = 0.0;
  int64_t iterations = 0;
  TreeStats stats;
};

using StepHook = std::function<void(const UctSearch&, int64_t iteration)>;

// Runs UCT until the budget elapses; returns the best program among all
// programs evaluated during search.
UctRunResult uct_search(const Grammar& g, const EvalFn& eval, const Config& config,
                        uint64_t seed, RunControl& control,
                        std::optional<InitialBranch> branch = std::nullopt,
                        const StepHook* hook = nullptr);

// Pipeline over UCT: same modes as the annealing pipeline except that the
// BR-search starts from a tree pre-built with the derivation branch of the
// sketch phase's utility-best complete program.
SynthResult synthesize(const Grammar& g, const sa::PipelineConfig& pipeline,
                       const Config& config, const PsiFn& psi_fn,
                       const CloneFn* clone_fn,
                       const CheckpointHook* checkpoint = nullptr,
                       TreeStats* stats_out = nullptr);

}  // namespace synth::uct
