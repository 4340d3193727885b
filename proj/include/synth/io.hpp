#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "synth/evaluation.hpp"

namespace synth::io {

// Unreadable, missing, or malformed input files. Maps to exit status 3 at
// the CLI boundary.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kDatasetFormat = "cantstop.dataset/1";
inline constexpr const char* kTraceFormat = "cantstop.trace/1";

nlohmann::json state_to_json(const cantstop::GameState& s);
cantstop::GameState state_from_json(const nlohmann::json& j);

nlohmann::json action_to_json(const cantstop::Action& a);
cantstop::Action action_from_json(const nlohmann::json& j);

// JSON-lines: one file-header object, then per match one header object
// (seed, players, winner, end state) followed by one object per
// (state, action) pair.
void write_dataset(std::ostream& out, const DataSet& data,
                   const std::string& manifest_id);
DataSet read_dataset(std::istream& in);
DataSet read_dataset_file(const std::string& path);

void write_traces(std::ostream& out, const std::vector<MatchTrace>& traces,
                  const std::string& manifest_id);
std::vector<MatchTrace> read_traces(std::istream& in);

// Replays the recorded actions from the recorded seed and checks that every
// intermediate state, the final state, and the winner match. Throws IoError
// with a description on the first mismatch.
void verify_trace(const MatchTrace& trace);

// Checks that every recorded action was legal at its recorded state and that
// all recorded states satisfy the game invariants.
void verify_dataset(const DataSet& data);

// Dispatches on the file-header format tag.
void verify_file(const std::string& path);

}  // namespace synth::io
