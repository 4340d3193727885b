#pragma once

#include "synth/search.hpp"

namespace synth::sa {

struct Params {
  double alpha = 0.9;
  double beta = 200.0;
  double t_initial = 100.0;
  double epsilon = 1.0;

  void validate() const {
    if (alpha <= 0 || beta <= 0 || t_initial <= 0 || epsilon <= 0 ||
        t_initial <= epsilon)
      throw ContractViolation("sa params: require alpha, beta > 0 and t_initial > epsilon > 0");
  }
};

// min(1, exp(beta * (candidate - current) / temperature)); candidates at
// least as good as the incumbent are always accepted.
double accept_probability(double score_current, double score_candidate,
                          double temperature, double beta);

// t_initial / (1 + alpha * j); iteration indexing starts at j = 0 so the
// first iteration runs at exactly t_initial.
double temperature(double t_initial, double alpha, int64_t iteration);

struct RunOptions {
  std::optional<Program> initial;  // start program; a fresh random one if absent
  // When set, mutation sites are exactly the holes of this partial program;
  // the run starts from a random completion of it and never alters its
  // derivation prefix (the UCT rollout constraint).
  const Program* restrict_prefix = nullptr;
  int depth_limit = 15;
  std::optional<int64_t> iteration_cap;  // per-run cap (rollouts)
  bool validate_prefix = false;          // assert the constraint per candidate
};

struct IterationInfo {
  int64_t iteration = 0;  // within the current run
  double temperature = 0.0;
  const Program* candidate = nullptr;
  double candidate_score = 0.0;
  bool accepted = false;
  const Program* best = nullptr;
  double best_score = 0.0;
};
using IterationHook = std::function<void(const IterationInfo&)>;

struct RunResult {
  Program best;
  double best_score = 0.0;
  Program last;          // program held when the run stopped
  double last_score = 0.0;
  int64_t iterations = 0;
  int64_t eval_faults = 0;
};

// One annealing run: starts from the configured program, iterates
// neighbor/accept, stops when the temperature drops below epsilon (or the
// budget/cap runs out) and returns the best-by-eval program ever seen.
RunResult sa_run(const Grammar& g, const EvalFn& eval, const Params& params,
                 Rng& rng, RunControl& control, const RunOptions& options = {},
                 const IterationHook* hook = nullptr);

// Repeats sa_run until the budget elapses, seeding each run with the program
// the previous run returned; returns the global incumbent.
RunResult sa_restarting(const Grammar& g, const EvalFn& eval, const Params& params,
                        Rng& rng, RunControl& control, const RunOptions& options = {},
                        const IterationHook* hook = nullptr,
                        int64_t* restarts = nullptr);

struct PipelineConfig {
  Params params;
  Mode mode = Mode::Baseline;
  Budget sketch_budget = Budget::of_seconds(3600);  // sketch & bc phases
  Budget br_budget = Budget::of_seconds(3600);      // br, baseline & lexi phases
  uint64_t seed = 1;
  int depth_limit = 15;
  int psi_matches_sketch = 200;  // reduced fidelity for sketch-phase checks
  int psi_matches_full = 1000;
  int64_t log_every = 100;
  int64_t checkpoint_every = 500;
  const std::atomic<bool>* interrupted = nullptr;
};

// Full synthesis pipeline. Sketch modes run a sketch-search on the cloning
// score (evaluating each new incumbent with the reduced-fidelity utility)
// and seed a BR-search on the utility with the best of those; bc-only stops
// after the sketch-search and returns the cloning-score incumbent;
// lexicographic orders candidates by (psi, c) in a single phase. clone_fn
// may be null only for Baseline.
SynthResult synthesize(const Grammar& g, const PipelineConfig& config,
                       const PsiFn& psi_fn, const CloneFn* clone_fn,
                       const CheckpointHook* checkpoint = nullptr);

}  // namespace synth::sa
