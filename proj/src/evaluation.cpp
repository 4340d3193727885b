#include "synth/evaluation.hpp"

#include <atomic>
#include <thread>

namespace synth {

namespace {

struct MatchDriver {
  std::unique_ptr<Strategy> players[2];
  Rng dice_rng;
  cantstop::GameState state;
  int winner = -1;
  std::array<bool, 2> faulted{false, false};
  bool hit_cap = false;

  MatchDriver(const Strategy& p0, const Strategy& p1, uint64_t seed, int starter)
      : dice_rng(derive_seed(seed, kDiceStreamTag)),
        state(cantstop::initial_state(starter, dice_rng)) {
    players[0] = p0.clone();
    players[1] = p1.clone();
    players[0]->reseed(derive_seed(seed, kPlayer0StreamTag));
    players[1]->reseed(derive_seed(seed, kPlayer1StreamTag));
  }

  // Returns false when the match ended.
  template <typename OnDecision>
  void run(OnDecision&& on_decision) {
    int decisions = 0;
    while (true) {
      if (auto w = cantstop::winner(state)) {
        winner = *w;
        return;
      }
      if (decisions >= kMaxDecisionsPerMatch) {
        hit_cap = true;
        winner = state.to_move ^ 1;
        return;
      }
      int mover = state.to_move;
      cantstop::Action action;
      try {
        action = players[mover]->choose(state);
        if (!cantstop::legal_actions(state).contains(action))
          throw StrategyFault("illegal action " + cantstop::to_string(action));
      } catch (const StrategyFault&) {
        faulted[mover] = true;
        winner = mover ^ 1;
        return;
      }
      on_decision(state, action, mover);
      state = cantstop::apply_action(state, action, dice_rng);
      ++decisions;
    }
  }
};

}  // namespace

MatchTrace play_match(const Strategy& p0, const Strategy& p1, uint64_t seed,
                      int starter) {
  MatchDriver driver(p0, p1, seed, starter);
  MatchTrace trace;
  trace.seed = seed;
  trace.starter = starter;
  driver.run([&trace](const cantstop::GameState& s, const cantstop::Action& a,
                      int mover) {
    trace.records.push_back({s, a, static_cast<uint8_t>(mover)});
  });
  trace.final_state = driver.state;
  trace.winner = driver.winner;
  trace.faulted = driver.faulted;
  trace.hit_decision_cap = driver.hit_cap;
  return trace;
}

int play_match_winner(const Strategy& p0, const Strategy& p1, uint64_t seed,
                      int starter) {
  MatchDriver driver(p0, p1, seed, starter);
  driver.run([](const cantstop::GameState&, const cantstop::Action&, int) {});
  return driver.winner;
}

PsiResult psi_detailed(const Strategy& candidate, const Strategy& opponent,
                       int n_matches, uint64_t base_seed, int workers) {
  if (n_matches < 1) throw ContractViolation("psi: n_matches must be >= 1");
  if (workers < 1) workers = 1;
  if (workers > n_matches) workers = n_matches;

  std::vector<uint8_t> won(n_matches, 0);
  std::vector<uint8_t> faulted(n_matches, 0);
  auto play_range = [&](int begin, int step) {
    for (int m = begin; m < n_matches; m += step) {
      uint64_t seed = derive_seed(base_seed, static_cast<uint64_t>(m));
      int starter = m % 2;  // candidate (player 0) starts on even matches
      MatchDriver driver(candidate, opponent, seed, starter);
      driver.run([](const cantstop::GameState&, const cantstop::Action&, int) {});
      won[m] = driver.winner == 0;
      faulted[m] = driver.faulted[0];
    }
  };

  if (workers == 1) {
    play_range(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(play_range, w, workers);
    for (auto& t : pool) t.join();
  }

  PsiResult r;
  r.n_matches = n_matches;
  for (int m = 0; m < n_matches; ++m) {
    r.wins += won[m];
    r.candidate_faults += faulted[m];
  }
  r.rate = static_cast<double>(r.wins) / n_matches;
  return r;
}

double psi(const Strategy& candidate, const Strategy& opponent, int n_matches,
           uint64_t base_seed, int workers) {
  return psi_detailed(candidate, opponent, n_matches, base_seed, workers).rate;
}

DataSetMatch dataset_match_from_trace(const MatchTrace& trace, int demonstrator) {
  DataSetMatch out;
  out.demonstrator = demonstrator;
  out.winner = trace.winner;
  out.seed = trace.seed;
  out.starter = trace.starter;
  out.end_state = trace.final_state;
  for (const MatchRecord& r : trace.records)
    if (r.mover == demonstrator) out.pairs.push_back({r.state, r.action});
  return out;
}

DataSet generate_dataset(const Strategy& a, const Strategy& b, int n_matches,
                         DatasetMode mode, uint64_t base_seed,
                         const std::string& label) {
  DataSet out;
  out.label = label;
  out.matches.reserve(n_matches);
  for (int m = 0; m < n_matches; ++m) {
    uint64_t seed = derive_seed(base_seed, static_cast<uint64_t>(m));
    MatchTrace trace = play_match(a, b, seed, m % 2);
    int demonstrator = mode == DatasetMode::SelfPlayWinnerOnly ? trace.winner : 0;
    out.matches.push_back(dataset_match_from_trace(trace, demonstrator));
  }
  return out;
}

}  // namespace synth
