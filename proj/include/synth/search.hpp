#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>

#include "synth/grammar.hpp"
#include "synth/trajectory.hpp"

namespace synth {

// Score of a complete program, in [0, 1] for the game evaluations. May throw
// dsl::EvalError for synthetic evaluators; searches score that as -inf.
using EvalFn = std::function<double(const Program&)>;

// Game utility bound to an opponent and base seed; n_matches selects the
// evaluation fidelity.
using PsiFn = std::function<double(const Program&, int n_matches)>;

// Cloning score bound to a dataset.
using CloneFn = std::function<double(const Program&)>;

// Wall-clock or iteration budget; exactly one must be set. Iteration budgets
// make runs reproducible bit-for-bit.
struct Budget {
  std::optional<double> seconds;
  std::optional<int64_t> iterations;

  static Budget of_seconds(double s) { return {s, std::nullopt}; }
  static Budget of_iterations(int64_t n) { return {std::nullopt, n}; }
  bool valid() const { return seconds.has_value() != iterations.has_value(); }
};

// Tracks one phase's budget across runs. Iteration-budget mode never
// consults the clock, so control flow is deterministic.
class RunControl {
 public:
  explicit RunControl(const Budget& budget,
                      const std::atomic<bool>* interrupted = nullptr)
      : budget_(budget),
        interrupted_(interrupted),
        start_(std::chrono::steady_clock::now()) {
    if (!budget.valid())
      throw ContractViolation("budget: set exactly one of seconds or iterations");
  }

  bool exhausted() const {
    if (interrupted_ != nullptr && interrupted_->load(std::memory_order_relaxed))
      return true;
    if (budget_.iterations) return used_ >= *budget_.iterations;
    return wall_seconds() >= *budget_.seconds;
  }
  void count_iteration() { ++used_; }
  int64_t used_iterations() const { return used_; }

  // Trajectory timestamps: wall clock in seconds mode, 0 in iteration mode
  // so that outputs are byte-identical across reruns.
  double elapsed_for_log() const {
    return budget_.iterations ? 0.0 : wall_seconds();
  }

 private:
  double wall_seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }
  Budget budget_;
  const std::atomic<bool>* interrupted_;
  std::chrono::steady_clock::time_point start_;
  int64_t used_ = 0;
};

enum class Mode { Baseline, SketchAction, SketchObservation, BcOnly, Lexicographic };

const char* mode_name(Mode m);
std::optional<Mode> mode_from_name(std::string_view name);

// Incumbent/checkpoint notifications shared by the searches.
using IncumbentHook = std::function<void(const Program&, double score, int64_t iteration)>;
using CheckpointHook = std::function<void(const Program& best, double best_score,
                                          int64_t iteration, const char* phase)>;

struct SynthStats {
  int64_t iterations = 0;
  int64_t restarts = 0;
  int64_t eval_faults = 0;
  int64_t psi_evaluations = 0;
};

struct SynthResult {
  Program best;
  double best_psi = 0.0;   // full-fidelity evaluation of `best`
  double best_c = 0.0;     // best cloning score seen (sketch modes)
  std::optional<Program> br_seed;  // program that seeded the BR phase
  TrajectoryLog trajectory;
  SynthStats stats;
};

}  // namespace synth
