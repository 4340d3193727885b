#include "synth/io.hpp"

#include <fstream>
#include <sstream>

namespace synth::io {

using nlohmann::json;

json state_to_json(const cantstop::GameState& s) {
  json j;
  j["permanent"] = {std::vector<int>(s.permanent[0].begin(), s.permanent[0].end()),
                    std::vector<int>(s.permanent[1].begin(), s.permanent[1].end())};
  json neutral = json::array();
  for (int i = 0; i < cantstop::kNumNeutrals; ++i)
    if (s.neutral_col[i] != 0)
      neutral.push_back({int(s.neutral_col[i]), int(s.neutral_row[i])});
  j["neutral"] = neutral;
  j["conquered"] = std::vector<int>(s.conquered.begin(), s.conquered.end());
  json dice = json::array();
  if (s.dice[0] != 0)
    for (int i = 0; i < 4; ++i) dice.push_back(int(s.dice[i]));
  j["dice"] = dice;
  j["phase"] = s.phase == cantstop::Phase::ColumnDecision ? "column" : "yes_no";
  j["to_move"] = int(s.to_move);
  return j;
}

cantstop::GameState state_from_json(const json& j) {
  cantstop::GameState s;
  try {
    for (int p = 0; p < 2; ++p)
      for (int c = 0; c < cantstop::kNumColumns; ++c)
        s.permanent[p][c] = static_cast<uint8_t>(j.at("permanent").at(p).at(c).get<int>());
    int slot = 0;
    for (const auto& n : j.at("neutral")) {
      s.neutral_col[slot] = static_cast<uint8_t>(n.at(0).get<int>());
      s.neutral_row[slot] = static_cast<uint8_t>(n.at(1).get<int>());
      ++slot;
    }
    for (int c = 0; c < cantstop::kNumColumns; ++c)
      s.conquered[c] = static_cast<int8_t>(j.at("conquered").at(c).get<int>());
    const auto& dice = j.at("dice");
    for (size_t i = 0; i < dice.size(); ++i)
      s.dice[i] = static_cast<uint8_t>(dice.at(i).get<int>());
    s.phase = j.at("phase").get<std::string>() == "column"
                  ? cantstop::Phase::ColumnDecision
                  : cantstop::Phase::YesNoDecision;
    s.to_move = static_cast<uint8_t>(j.at("to_move").get<int>());
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed state record: ") + e.what());
  }
  return s;
}

json action_to_json(const cantstop::Action& a) {
  switch (a.kind) {
    case cantstop::Action::Kind::Yes: return "y";
    case cantstop::Action::Kind::No: return "n";
    default: {
      json cols = json::array();
      for (int i = 0; i < a.n_cols; ++i) cols.push_back(int(a.cols[i]));
      return cols;
    }
  }
}

cantstop::Action action_from_json(const json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "y") return cantstop::Action::yes();
    if (s == "n") return cantstop::Action::no();
    throw IoError("malformed action: " + s);
  }
  if (j.is_array() && j.size() == 1) return cantstop::Action::columns(j.at(0).get<int>());
  if (j.is_array() && j.size() == 2)
    return cantstop::Action::columns(j.at(0).get<int>(), j.at(1).get<int>());
  throw IoError("malformed action record: " + j.dump());
}

namespace {

json parse_line(const std::string& line, int number) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw IoError("line " + std::to_string(number) + ": " + e.what());
  }
}

json read_header(std::istream& in, const char* expected_format) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty file");
  json header = parse_line(line, 1);
  if (header.value("format", "") != expected_format)
    throw IoError("unexpected format tag: " + header.value("format", "<missing>"));
  return header;
}

}  // namespace

void write_dataset(std::ostream& out, const DataSet& data,
                   const std::string& manifest_id) {
  json header = {{"format", kDatasetFormat},
                 {"label", data.label},
                 {"manifest", manifest_id},
                 {"matches", data.matches.size()}};
  out << header.dump() << "\n";
  for (size_t m = 0; m < data.matches.size(); ++m) {
    const DataSetMatch& match = data.matches[m];
    json mh = {{"match", m},           {"seed", match.seed},
               {"starter", match.starter}, {"demonstrator", match.demonstrator},
               {"winner", match.winner},   {"end_state", state_to_json(match.end_state)}};
    out << mh.dump() << "\n";
    for (const DemoPair& pair : match.pairs) {
      json pj = {{"match", m},
                 {"state", state_to_json(pair.state)},
                 {"action", action_to_json(pair.action)}};
      out << pj.dump() << "\n";
    }
  }
}

DataSet read_dataset(std::istream& in) {
  json header = read_header(in, kDatasetFormat);
  DataSet data;
  data.label = header.value("label", "");
  std::string line;
  int number = 1;
  try {
    while (std::getline(in, line)) {
      ++number;
      if (line.empty()) continue;
      json j = parse_line(line, number);
      if (j.contains("end_state")) {
        DataSetMatch match;
        match.seed = j.at("seed").get<uint64_t>();
        match.starter = j.at("starter").get<int>();
        match.demonstrator = j.at("demonstrator").get<int>();
        match.winner = j.at("winner").get<int>();
        match.end_state = state_from_json(j.at("end_state"));
        data.matches.push_back(std::move(match));
      } else {
        if (data.matches.empty()) throw IoError("pair record before match header");
        size_t m = j.at("match").get<size_t>();
        if (m >= data.matches.size()) throw IoError("pair record for unknown match");
        data.matches[m].pairs.push_back(
            {state_from_json(j.at("state")), action_from_json(j.at("action"))});
      }
    }
  } catch (const json::exception& e) {
    throw IoError("line " + std::to_string(number) + ": " + e.what());
  }
  if (data.matches.empty()) throw IoError("dataset holds no matches");
  return data;
}

DataSet read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  return read_dataset(in);
}

void write_traces(std::ostream& out, const std::vector<MatchTrace>& traces,
                  const std::string& manifest_id) {
  json header = {{"format", kTraceFormat},
                 {"manifest", manifest_id},
                 {"matches", traces.size()}};
  out << header.dump() << "\n";
  for (size_t m = 0; m < traces.size(); ++m) {
    const MatchTrace& t = traces[m];
    json mh = {{"match", m},
               {"seed", t.seed},
               {"starter", t.starter},
               {"winner", t.winner},
               {"faulted", {t.faulted[0], t.faulted[1]}},
               {"hit_cap", t.hit_decision_cap},
               {"final_state", state_to_json(t.final_state)}};
    out << mh.dump() << "\n";
    for (const MatchRecord& r : t.records) {
      json rj = {{"match", m},
                 {"mover", int(r.mover)},
                 {"state", state_to_json(r.state)},
                 {"action", action_to_json(r.action)}};
      out << rj.dump() << "\n";
    }
  }
}

std::vector<MatchTrace> read_traces(std::istream& in) {
  json header = read_header(in, kTraceFormat);
  std::vector<MatchTrace> traces;
  std::string line;
  int number = 1;
  try {
    while (std::getline(in, line)) {
      ++number;
      if (line.empty()) continue;
      json j = parse_line(line, number);
      if (j.contains("final_state")) {
        MatchTrace t;
        t.seed = j.at("seed").get<uint64_t>();
        t.starter = j.at("starter").get<int>();
        t.winner = j.at("winner").get<int>();
        t.faulted = {j.at("faulted").at(0).get<bool>(), j.at("faulted").at(1).get<bool>()};
        t.hit_decision_cap = j.at("hit_cap").get<bool>();
        t.final_state = state_from_json(j.at("final_state"));
        traces.push_back(std::move(t));
      } else {
        if (traces.empty()) throw IoError("record before match header");
        size_t m = j.at("match").get<size_t>();
        if (m >= traces.size()) throw IoError("record for unknown match");
        traces[m].records.push_back({state_from_json(j.at("state")),
                                     action_from_json(j.at("action")),
                                     static_cast<uint8_t>(j.at("mover").get<int>())});
      }
    }
  } catch (const json::exception& e) {
    throw IoError("line " + std::to_string(number) + ": " + e.what());
  }
  return traces;
}

void verify_trace(const MatchTrace& trace) {
  Rng dice_rng(derive_seed(trace.seed, kDiceStreamTag));
  cantstop::GameState state = cantstop::initial_state(trace.starter, dice_rng);
  for (size_t i = 0; i < trace.records.size(); ++i) {
    const MatchRecord& r = trace.records[i];
    if (!(r.state == state))
      throw IoError("trace diverges at record " + std::to_string(i));
    if (r.mover != state.to_move)
      throw IoError("trace mover mismatch at record " + std::to_string(i));
    cantstop::check_invariants(state);
    if (!cantstop::legal_actions(state).contains(r.action))
      throw IoError("illegal recorded action at record " + std::to_string(i));
    state = cantstop::apply_action(state, r.action, dice_rng);
  }
  if (!(state == trace.final_state)) throw IoError("trace final state mismatch");
  auto w = cantstop::winner(state);
  if (w && *w != trace.winner) throw IoError("trace winner mismatch");
  if (!w && !trace.faulted[0] && !trace.faulted[1] && !trace.hit_decision_cap)
    throw IoError("trace ends before the game without a recorded fault");
}

void verify_dataset(const DataSet& data) {
  for (size_t m = 0; m < data.matches.size(); ++m) {
    const DataSetMatch& match = data.matches[m];
    cantstop::check_invariants(match.end_state);
    for (size_t i = 0; i < match.pairs.size(); ++i) {
      const DemoPair& pair = match.pairs[i];
      try {
        cantstop::check_invariants(pair.state);
        if (pair.state.to_move != match.demonstrator)
          throw ContractViolation("recorded state not the demonstrator's move");
        if (!cantstop::legal_actions(pair.state).contains(pair.action))
          throw ContractViolation("recorded action illegal at its state");
      } catch (const ContractViolation& e) {
        throw IoError("match " + std::to_string(m) + " pair " + std::to_string(i) +
                      ": " + e.what());
      }
    }
  }
}

void verify_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::string first;
  if (!std::getline(in, first)) throw IoError("empty file: " + path);
  json header = parse_line(first, 1);
  std::string format = header.value("format", "");
  in.seekg(0);
  if (format == kDatasetFormat) {
    verify_dataset(read_dataset(in));
  } else if (format == kTraceFormat) {
    for (const MatchTrace& t : read_traces(in)) verify_trace(t);
  } else {
    throw IoError("unknown format tag: " + format);
  }
}

}  // namespace synth::io
