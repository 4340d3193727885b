#include "synth/cloning.hpp"

#include <algorithm>

namespace synth {

namespace {

constexpr uint64_t kCloneStream = 0xC70;

// Marker effects of one strategy action on the shadow board. Placement and
// advancement follow the shadow's own configuration; rows cap at the column
// top.
struct ShadowBoard {
  std::array<int, cantstop::kNumColumns> permanent{};
  std::array<int, cantstop::kNumColumns> neutral{};  // row, 0 = none

  int neutral_count() const {
    int n = 0;
    for (int r : neutral) n += r > 0;
    return n;
  }

  void advance(int column) {
    int idx = column - 2;
    int height = cantstop::column_height(column);
    if (neutral[idx] > 0) {
      neutral[idx] = std::min(neutral[idx] + 1, height);
    } else if (neutral_count() < cantstop::kNumNeutrals) {
      neutral[idx] = std::min(permanent[idx] + 1, height);
    }
    // with three shadow neutrals already out the occurrence has no effect
  }

  void apply(const cantstop::Action& a) {
    switch (a.kind) {
      case cantstop::Action::Kind::Columns:
        for (int i = 0; i < a.n_cols; ++i) advance(a.cols[i]);
        break;
      case cantstop::Action::Kind::No:
        for (int idx = 0; idx < cantstop::kNumColumns; ++idx) {
          if (neutral[idx] > 0) permanent[idx] = neutral[idx];
          neutral[idx] = 0;
        }
        break;
      case cantstop::Action::Kind::Yes:
        break;
    }
  }

  void clear_neutrals() { neutral.fill(0); }
};

std::array<int, cantstop::kNumColumns> demonstrator_markers(const DataSetMatch& m) {
  std::array<int, cantstop::kNumColumns> out{};
  for (int idx = 0; idx < cantstop::kNumColumns; ++idx)
    out[idx] = m.end_state.permanent[m.demonstrator][idx];
  return out;
}

void require_nonempty(const DataSet& L, const char* op) {
  if (L.matches.empty())
    throw ContractViolation(std::string(op) + ": empty dataset");
}

std::unique_ptr<Strategy> match_clone(const Strategy& strategy, size_t match_index) {
  auto s = strategy.clone();
  s->reseed(derive_seed(kCloneStream, match_index));
  return s;
}

}  // namespace

double secured_cell_overlap(const std::array<int, cantstop::kNumColumns>& a,
                            const std::array<int, cantstop::kNumColumns>& b) {
  int intersection = 0;
  int unions = 0;
  for (int idx = 0; idx < cantstop::kNumColumns; ++idx) {
    intersection += std::min(a[idx], b[idx]);
    unions += std::max(a[idx], b[idx]);
  }
  if (unions == 0) return 1.0;
  return static_cast<double>(intersection) / unions;
}

CloneScore action_score(const DataSet& L, const Strategy& strategy) {
  require_nonempty(L, "action_score");
  CloneScore out;
  int64_t matched_total = 0;
  int64_t pairs_total = 0;
  for (size_t mi = 0; mi < L.matches.size(); ++mi) {
    const DataSetMatch& match = L.matches[mi];
    auto s = match_clone(strategy, mi);
    int64_t matched = 0;
    try {
      for (const DemoPair& pair : match.pairs)
        matched += s->choose(pair.state) == pair.action;
    } catch (const StrategyFault&) {
      matched = 0;
    }
    matched_total += matched;
    pairs_total += static_cast<int64_t>(match.pairs.size());
    out.per_match.push_back(match.pairs.empty()
                                ? 1.0
                                : static_cast<double>(matched) / match.pairs.size());
  }
  out.value = pairs_total == 0 ? 1.0
                               : static_cast<double>(matched_total) / pairs_total;
  return out;
}

CloneScore observation_score(const DataSet& L, const Strategy& strategy) {
  require_nonempty(L, "observation_score");
  CloneScore out;
  double total = 0.0;
  for (size_t mi = 0; mi < L.matches.size(); ++mi) {
    const DataSetMatch& match = L.matches[mi];
    auto s = match_clone(strategy, mi);
    ShadowBoard shadow;
    double score = 0.0;
    try {
      for (size_t j = 0; j < match.pairs.size(); ++j) {
        const DemoPair& pair = match.pairs[j];
        shadow.apply(s->choose(pair.state));
        // A recorded roll-again followed by a fresh-turn state means the
        // demonstrator busted; the same dice bust the shadow's run.
        bool recorded_bust =
            pair.action.kind == cantstop::Action::Kind::Yes &&
            j + 1 < match.pairs.size() &&
            match.pairs[j + 1].state.neutral_count() == 0;
        if (recorded_bust) shadow.clear_neutrals();
      }
      std::array<int, cantstop::kNumColumns> shadow_markers{};
      for (int idx = 0; idx < cantstop::kNumColumns; ++idx)
        shadow_markers[idx] = shadow.permanent[idx];
      score = secured_cell_overlap(shadow_markers, demonstrator_markers(match));
    } catch (const StrategyFault&) {
      score = 0.0;
    }
    out.per_match.push_back(score);
    total += score;
  }
  out.value = total / static_cast<double>(L.matches.size());
  return out;
}

}  // namespace synth
