#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "synth/cantstop.hpp"
#include "synth/strategy.hpp"

namespace synth {

// Matches longer than this many decisions score as a loss for the player to
// move; degenerate never-stopping programs must not hang the search.
inline constexpr int kMaxDecisionsPerMatch = 10'000;

// Per-match stream tags: the dice stream and each player's private stream
// derive from the match seed with these. Replays depend on them.
inline constexpr uint64_t kDiceStreamTag = 1;
inline constexpr uint64_t kPlayer0StreamTag = 2;
inline constexpr uint64_t kPlayer1StreamTag = 3;

struct MatchRecord {
  cantstop::GameState state;
  cantstop::Action action;
  uint8_t mover;
};

struct MatchTrace {
  std::vector<MatchRecord> records;
  cantstop::GameState final_state;
  int winner = -1;
  uint64_t seed = 0;
  int starter = 0;
  std::array<bool, 2> faulted{false, false};
  bool hit_decision_cap = false;
};

// Plays one seeded match, player 0 = `p0`. Strategy faults (exceptions or
// illegal actions) score as a loss for the faulting side; both outcomes are
// recorded on the trace rather than surfaced.
MatchTrace play_match(const Strategy& p0, const Strategy& p1, uint64_t seed,
                      int starter);

// Same transition sequence as play_match without building the trace.
int play_match_winner(const Strategy& p0, const Strategy& p1, uint64_t seed,
                      int starter);

struct PsiResult {
  double rate = 0.0;
  int wins = 0;
  int n_matches = 0;
  int candidate_faults = 0;
};

// Candidate win rate over n seeded matches against the opponent. Per-match
// seeds derive from the base seed and the starting player alternates
// match-by-match, candidate first; the result does not depend on worker
// count or scheduling.
PsiResult psi_detailed(const Strategy& candidate, const Strategy& opponent,
                       int n_matches, uint64_t base_seed, int workers = 1);
double psi(const Strategy& candidate, const Strategy& opponent, int n_matches,
           uint64_t base_seed, int workers = 1);

struct DemoPair {
  cantstop::GameState state;
  cantstop::Action action;
};

struct DataSetMatch {
  std::vector<DemoPair> pairs;  // demonstrator decisions only, in order
  cantstop::GameState end_state;
  int demonstrator = 0;
  int winner = -1;
  uint64_t seed = 0;
  int starter = 0;
};

struct DataSet {
  std::vector<DataSetMatch> matches;
  std::string label;

  int pair_count() const {
    int n = 0;
    for (const auto& m : matches) n += static_cast<int>(m.pairs.size());
    return n;
  }
};

enum class DatasetMode {
  SelfPlayWinnerOnly,  // keep the winner's pairs; requires a == b
  VersusKeepA,         // keep player 0's pairs regardless of outcome
};

DataSet generate_dataset(const Strategy& a, const Strategy& b, int n_matches,
                         DatasetMode mode, uint64_t base_seed,
                         const std::string& label);

// Extracts one dataset match from a finished trace.
DataSetMatch dataset_match_from_trace(const MatchTrace& trace, int demonstrator);

}  // namespace synth
