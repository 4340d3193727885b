#pragma once

#include <array>
#include <vector>

#include "synth/evaluation.hpp"

namespace synth {

struct CloneScore {
  double value = 0.0;                // mean of per_match
  std::vector<double> per_match;
};

// Fraction of recorded pairs whose action the strategy reproduces, pooled
// across matches. per_match carries the per-match fractions. A strategy
// fault scores the whole affected match as mismatched.
CloneScore action_score(const DataSet& L, const Strategy& strategy);

// Per match: replay the recorded demonstrator states in order, applying the
// marker effects of the strategy's chosen actions to an initially empty
// shadow board (busts recorded in the trace clear the shadow neutrals), then
// score the secured-cell overlap between the shadow board and the recorded
// end-game markers of the demonstrator. Returns the mean across matches.
CloneScore observation_score(const DataSet& L, const Strategy& strategy);

// |intersection| / |union| of the secured-cell sets of two marker boards
// (index = column-2, value = cells secured). Two empty boards overlap fully.
double secured_cell_overlap(const std::array<int, cantstop::kNumColumns>& a,
                            const std::array<int, cantstop::kNumColumns>& b);

}  // namespace synth
