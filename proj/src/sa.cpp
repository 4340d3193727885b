#include "synth/sa.hpp"

#include <cmath>
#include <limits>

#include "synth/dsl.hpp"

namespace synth {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Baseline: return "baseline";
    case Mode::SketchAction: return "sketch-a";
    case Mode::SketchObservation: return "sketch-o";
    case Mode::BcOnly: return "bc-only";
    case Mode::Lexicographic: return "lexi";
  }
  return "?";
}

std::optional<Mode> mode_from_name(std::string_view name) {
  if (name == "baseline") return Mode::Baseline;
  if (name == "sketch-a") return Mode::SketchAction;
  if (name == "sketch-o") return Mode::SketchObservation;
  if (name == "bc-only") return Mode::BcOnly;
  if (name == "lexi") return Mode::Lexicographic;
  return std::nullopt;
}

namespace sa {

namespace {
constexpr double kFaultScore = -std::numeric_limits<double>::infinity();
}

double accept_probability(double score_current, double score_candidate,
                          double temperature, double beta) {
  if (temperature <= 0) throw ContractViolation("accept_probability: temperature <= 0");
  if (score_candidate >= score_current) return 1.0;
  double p = std::exp(beta * (score_candidate - score_current) / temperature);
  return std::min(1.0, p);
}

double temperature(double t_initial, double alpha, int64_t iteration) {
  return t_initial / (1.0 + alpha * static_cast<double>(iteration));
}

namespace {

double guarded_eval(const EvalFn& eval, const Program& p, int64_t& faults) {
  try {
    return eval(p);
  } catch (const dsl::EvalError&) {
    ++faults;
    return kFaultScore;
  }
}

}  // namespace

RunResult sa_run(const Grammar& g, const EvalFn& eval, const Params& params,
                 Rng& rng, RunControl& control, const RunOptions& options,
                 const IterationHook* hook) {
  params.validate();
  RunResult r;
  std::vector<NodePath> sites;
  if (options.restrict_prefix != nullptr) {
    sites = hole_paths(*options.restrict_prefix);
    r.last = random_completion(g, *options.restrict_prefix, rng, options.depth_limit);
  } else if (options.initial) {
    r.last = *options.initial;
  } else {
    r.last = random_program(g, rng, options.depth_limit);
  }
  r.last_score = guarded_eval(eval, r.last, r.eval_faults);
  r.best = r.last;
  r.best_score = r.last_score;

  for (int64_t j = 0;; ++j) {
    double t = temperature(params.t_initial, params.alpha, j);
    if (t < params.epsilon) break;
    if (options.iteration_cap && j >= *options.iteration_cap) break;
    if (control.exhausted()) break;
    if (options.restrict_prefix != nullptr && sites.empty()) break;  // nothing to mutate

    Program candidate =
        options.restrict_prefix != nullptr
            ? regenerate_at(g, r.last, sites, rng, options.depth_limit)
            : neighbor(g, r.last, rng, /*leaf_restricted=*/false, options.depth_limit);
    if (options.validate_prefix && options.restrict_prefix != nullptr &&
        !shares_prefix(candidate, *options.restrict_prefix))
      throw ContractViolation("sa: rollout candidate altered the derivation prefix");

    double score = guarded_eval(eval, candidate, r.eval_faults);
    bool accepted = rng.uniform01() < accept_probability(r.last_score, score, t, params.beta);
    if (accepted) {
      r.last = candidate;
      r.last_score = score;
    }
    if (score > r.best_score || (r.best_score == kFaultScore && score >= r.best_score)) {
      r.best = candidate;
      r.best_score = score;
    }
    ++r.iterations;
    control.count_iteration();
    if (hook != nullptr) {
      IterationInfo info;
      info.iteration = j;
      info.temperature = t;
      info.candidate = &candidate;
      info.candidate_score = score;
      info.accepted = accepted;
      info.best = &r.best;
      info.best_score = r.best_score;
      (*hook)(info);
    }
  }
  return r;
}

RunResult sa_restarting(const Grammar& g, const EvalFn& eval, const Params& params,
                        Rng& rng, RunControl& control, const RunOptions& options,
                        const IterationHook* hook, int64_t* restarts) {
  RunResult incumbent;
  bool first = true;
  RunOptions run_options = options;
  while (first || !control.exhausted()) {
    RunResult r = sa_run(g, eval, params, rng, control, run_options, hook);
    if (first || r.best_score > incumbent.best_score) {
      incumbent.best = r.best;
      incumbent.best_score = r.best_score;
    }
    incumbent.last = r.last;
    incumbent.last_score = r.last_score;
    incumbent.iterations += r.iterations;
    incumbent.eval_faults += r.eval_faults;
    if (!first && restarts != nullptr) ++*restarts;
    first = false;
    // the next run starts from the program this run returned
    run_options.initial = incumbent.best;
  }
  return incumbent;
}

namespace {

struct PhaseLogger {
  TrajectoryLog* log;
  RunControl* control;
  const char* phase;
  double* best_psi;  // global across phases
  std::optional<double> last_c;
  std::optional<double> last_psi;

  void row(int64_t iteration, std::optional<double> temp, std::optional<double> c,
           std::optional<double> psi_val, int program_len) {
    TrajectoryRow r;
    r.elapsed_s = control->elapsed_for_log();
    r.iteration = iteration;
    r.phase = phase;
    r.temperature = temp;
    r.c_score = c;
    r.psi_score = psi_val;
    r.best_psi = *best_psi;
    r.program_len = program_len;
    log->append(std::move(r));
  }
};

}  // namespace

SynthResult synthesize(const Grammar& g, const PipelineConfig& config,
                       const PsiFn& psi_fn, const CloneFn* clone_fn,
                       const CheckpointHook* checkpoint) {
  config.params.validate();
  const bool needs_clone = config.mode != Mode::Baseline;
  if (needs_clone && clone_fn == nullptr)
    throw ContractViolation("synthesize: mode requires a cloning function");

  SynthResult result;
  Rng rng(derive_seed(config.seed, 0xA11C));
  double best_psi_global = 0.0;

  // Wraps an eval into fault counting + trajectory/checkpoint plumbing.
  struct PhaseState {
    Program best_program;
    double best_eval = kFaultScore;
    bool has_best = false;
  };

  auto run_phase = [&](const char* phase_name, const Budget& budget,
                       const EvalFn& eval, const RunOptions& options,
                       auto&& on_improvement) -> RunResult {
    RunControl control(budget, config.interrupted);
    PhaseLogger logger{&result.trajectory, &control, phase_name, &best_psi_global,
                       std::nullopt, std::nullopt};
    PhaseState phase;
    int64_t global_iter = 0;
    IterationHook hook = [&](const IterationInfo& info) {
      ++global_iter;
      bool improved = !phase.has_best || info.best_score > phase.best_eval;
      if (improved) {
        phase.has_best = true;
        phase.best_eval = info.best_score;
        phase.best_program = *info.best;
        on_improvement(phase.best_program, phase.best_eval, global_iter, logger);
      }
      if (improved || global_iter % config.log_every == 0) {
        logger.row(global_iter, info.temperature, logger.last_c, logger.last_psi,
                   node_count(*info.candidate));
        logger.last_c.reset();
        logger.last_psi.reset();
      }
      if (checkpoint != nullptr && global_iter % config.checkpoint_every == 0)
        (*checkpoint)(phase.has_best ? phase.best_program : *info.best,
                      phase.best_eval, global_iter, phase_name);
    };
    RunResult r = sa_restarting(g, eval, config.params, rng, control, options, &hook,
                                &result.stats.restarts);
    result.stats.iterations += r.iterations;
    result.stats.eval_faults += r.eval_faults;
    if (checkpoint != nullptr)
      (*checkpoint)(r.best, r.best_score, global_iter, phase_name);
    return r;
  };

  RunOptions options;
  options.depth_limit = config.depth_limit;

  if (config.mode == Mode::Baseline || config.mode == Mode::Lexicographic) {
    EvalFn eval;
    if (config.mode == Mode::Baseline) {
      eval = [&](const Program& p) {
        ++result.stats.psi_evaluations;
        return psi_fn(p, config.psi_matches_full);
      };
    } else {
      // utility first, cloning score breaking ties at equal utility
      eval = [&](const Program& p) {
        ++result.stats.psi_evaluations;
        double u = psi_fn(p, config.psi_matches_full);
        return u + 1e-7 * (*clone_fn)(p);
      };
    }
    RunResult r = run_phase(
        config.mode == Mode::Baseline ? "baseline" : "lexi", config.br_budget, eval,
        options,
        [&](const Program& p, double score, int64_t, PhaseLogger& logger) {
          best_psi_global = std::max(best_psi_global, std::min(score, 1.0));
          logger.last_psi = std::min(score, 1.0);
          (void)p;
        });
    result.best = r.best;
    result.best_psi = psi_fn(result.best, config.psi_matches_full);
    return result;
  }

  // Sketch phase: optimize the cloning score. Outside bc-only, every new
  // C-incumbent is also checked with the reduced-fidelity utility and the
  // utility-best of them becomes the BR seed.
  std::optional<Program> psi_best_program;
  double psi_best_value = 0.0;
  std::optional<Program> c_best_program;
  double c_best_value = kFaultScore;

  EvalFn c_eval = [&](const Program& p) { return (*clone_fn)(p); };
  run_phase("sketch", config.sketch_budget, c_eval, options,
            [&](const Program& p, double c_value, int64_t, PhaseLogger& logger) {
              c_best_program = p;
              c_best_value = c_value;
              result.best_c = std::max(result.best_c, c_value);
              logger.last_c = c_value;
              if (config.mode != Mode::BcOnly) {
                ++result.stats.psi_evaluations;
                double u = psi_fn(p, config.psi_matches_sketch);
                logger.last_psi = u;
                if (!psi_best_program || u > psi_best_value) {
                  psi_best_program = p;
                  psi_best_value = u;
                }
                best_psi_global = std::max(best_psi_global, u);
              }
            });

  if (!c_best_program)
    throw ContractViolation("synthesize: sketch phase produced no program");

  if (config.mode == Mode::BcOnly) {
    result.best = *c_best_program;
    result.best_psi = psi_fn(result.best, config.psi_matches_full);
    return result;
  }

  // The BR seed is the utility-best sketch candidate; if none ever won a
  // match, fall back to the cloning-score incumbent.
  Program seed = (psi_best_program && psi_best_value > 0.0) ? *psi_best_program
                                                            : *c_best_program;
  result.br_seed = seed;
  double seed_psi = psi_fn(seed, config.psi_matches_full);
  ++result.stats.psi_evaluations;
  best_psi_global = std::max(best_psi_global, seed_psi);

  EvalFn psi_eval = [&](const Program& p) {
    ++result.stats.psi_evaluations;
    return psi_fn(p, config.psi_matches_full);
  };
  options.initial = seed;
  RunResult br = run_phase("br", config.br_budget, psi_eval, options,
                           [&](const Program&, double score, int64_t, PhaseLogger& logger) {
                             best_psi_global = std::max(best_psi_global, score);
                             logger.last_psi = score;
                           });

  if (br.best_score >= seed_psi) {
    result.best = br.best;
    result.best_psi = br.best_score;
  } else {
    result.best = seed;
    result.best_psi = seed_psi;
  }
  return result;
}

}  // namespace sa
}  // namespace synth
