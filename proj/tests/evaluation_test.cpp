#include <doctest.h>

#include <sstream>

#include "synth/dsl.hpp"
#include "synth/evaluation.hpp"
#include "synth/io.hpp"

using namespace synth;
using cantstop::Action;
using cantstop::GameState;

namespace {

// always rolls again; never makes progress permanent
class NeverStop final : public Strategy {
 public:
  Action choose(const GameState& s) override {
    if (s.phase == cantstop::Phase::YesNoDecision) return Action::yes();
    return cantstop::legal_actions(s)[0];
  }
  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<NeverStop>();
  }
  std::string name() const override { return "never-stop"; }
};

class AlwaysFaults final : public Strategy {
 public:
  Action choose(const GameState&) override { throw StrategyFault("scripted fault"); }
  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<AlwaysFaults>();
  }
  std::string name() const override { return "faulty"; }
};

class IllegalMove final : public Strategy {
 public:
  Action choose(const GameState& s) override {
    if (s.phase == cantstop::Phase::YesNoDecision) return Action::yes();
    return Action::columns(7, 7);  // rarely legal
  }
  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<IllegalMove>();
  }
  std::string name() const override { return "illegal"; }
};

}  // namespace

TEST_CASE("psi: self-play symmetry under alternating starts") {
  auto ga = dsl::make_ga_strategy();
  PsiResult r = psi_detailed(*ga, *ga, 10'000, 17, 2);
  CHECK(std::abs(r.rate - 0.5) < 0.02);
  CHECK(r.candidate_faults == 0);
}

TEST_CASE("psi rejects an empty match budget") {
  auto ga = dsl::make_ga_strategy();
  CHECK_THROWS_AS(psi(*ga, *ga, 0, 1), ContractViolation);
}

TEST_CASE("psi equals the documented per-match protocol") {
  auto ga = dsl::make_ga_strategy();
  auto random0 = dsl::make_random_strategy();
  const int n = 400;
  int wins = 0;
  for (int m = 0; m < n; ++m)
    wins += play_match_winner(*random0, *ga, derive_seed(9, m), m % 2) == 0;
  PsiResult r = psi_detailed(*random0, *ga, n, 9, 1);
  CHECK(r.wins == wins);
  CHECK(r.rate == doctest::Approx(static_cast<double>(wins) / n));
}

TEST_CASE("psi is identical under serial and parallel execution") {
  auto ga = dsl::make_ga_strategy();
  auto random0 = dsl::make_random_strategy();
  PsiResult serial = psi_detailed(*random0, *ga, 1'000, 31, 1);
  PsiResult parallel = psi_detailed(*random0, *ga, 1'000, 31, 4);
  CHECK(serial.wins == parallel.wins);
  CHECK(serial.rate == parallel.rate);
  CHECK(serial.candidate_faults == parallel.candidate_faults);
}

TEST_CASE("candidate wins plus opponent wins cover every match") {
  auto ga = dsl::make_ga_strategy();
  auto random0 = dsl::make_random_strategy();
  PsiResult a = psi_detailed(*random0, *ga, 500, 77, 2);
  // no draws: the complementary seat count must be exact
  CHECK(a.wins >= 0);
  CHECK(a.n_matches - a.wins >= 0);
  CHECK(a.rate == doctest::Approx(a.wins / 500.0));
}

TEST_CASE("strategy faults score as losses for the faulting side") {
  auto ga = dsl::make_ga_strategy();
  AlwaysFaults faulty;
  PsiResult r = psi_detailed(faulty, *ga, 50, 3, 1);
  CHECK(r.wins == 0);
  CHECK(r.candidate_faults == 50);

  MatchTrace t = play_match(faulty, *ga, 5, 0);
  CHECK(t.winner == 1);
  CHECK(t.faulted[0]);
  CHECK(!t.faulted[1]);
  CHECK(t.records.empty());

  IllegalMove illegal;
  MatchTrace t2 = play_match(illegal, *ga, 6, 0);
  CHECK(t2.winner == 1);
  CHECK(t2.faulted[0]);
}

TEST_CASE("the decision cap breaks never-ending matches") {
  NeverStop stubborn;
  MatchTrace t = play_match(stubborn, stubborn, 11, 0);
  CHECK(t.hit_decision_cap);
  CHECK(static_cast<int>(t.records.size()) == kMaxDecisionsPerMatch);
  CHECK((t.winner == 0 || t.winner == 1));
  CHECK(!cantstop::is_terminal(t.final_state));  // the loss came from the cap
}

TEST_CASE("dataset generation: self-play keeps only the winner's pairs") {
  auto random0 = dsl::make_random_strategy();
  DataSet data = generate_dataset(*random0, *random0, 3,
                                  DatasetMode::SelfPlayWinnerOnly, 1234, "rnd");
  REQUIRE(data.matches.size() == 3);
  CHECK(data.label == "rnd");
  for (const DataSetMatch& m : data.matches) {
    CHECK(m.demonstrator == m.winner);
    CHECK(!m.pairs.empty());
    for (const DemoPair& p : m.pairs) CHECK(p.state.to_move == m.demonstrator);
  }
  io::verify_dataset(data);  // every kept action legal at its kept state
}

TEST_CASE("dataset generation: versus mode keeps player 0 regardless of outcome") {
  auto random0 = dsl::make_random_strategy();
  auto ga = dsl::make_ga_strategy();
  DataSet data =
      generate_dataset(*random0, *ga, 4, DatasetMode::VersusKeepA, 99, "rnd-vs-ga");
  REQUIRE(data.matches.size() == 4);
  bool random_lost_some = false;
  for (const DataSetMatch& m : data.matches) {
    CHECK(m.demonstrator == 0);
    random_lost_some |= m.winner != 0;
  }
  CHECK(random_lost_some);  // and such matches are still kept
  io::verify_dataset(data);
}

TEST_CASE("dataset and trace files round-trip as JSON lines") {
  auto ga = dsl::make_ga_strategy();
  auto random0 = dsl::make_random_strategy();

  DataSet data = generate_dataset(*ga, *ga, 2, DatasetMode::SelfPlayWinnerOnly,
                                  2024, "ga-self");
  std::stringstream buf;
  io::write_dataset(buf, data, "test");
  DataSet back = io::read_dataset(buf);
  REQUIRE(back.matches.size() == data.matches.size());
  CHECK(back.label == data.label);
  for (size_t m = 0; m < data.matches.size(); ++m) {
    CHECK(back.matches[m].end_state == data.matches[m].end_state);
    CHECK(back.matches[m].winner == data.matches[m].winner);
    CHECK(back.matches[m].demonstrator == data.matches[m].demonstrator);
    REQUIRE(back.matches[m].pairs.size() == data.matches[m].pairs.size());
    for (size_t i = 0; i < data.matches[m].pairs.size(); ++i) {
      CHECK(back.matches[m].pairs[i].state == data.matches[m].pairs[i].state);
      CHECK(back.matches[m].pairs[i].action == data.matches[m].pairs[i].action);
    }
  }

  std::vector<MatchTrace> traces;
  traces.push_back(play_match(*random0, *ga, 7, 0));
  traces.push_back(play_match(*random0, *ga, 8, 1));
  std::stringstream tbuf;
  io::write_traces(tbuf, traces, "test");
  auto traces_back = io::read_traces(tbuf);
  REQUIRE(traces_back.size() == 2);
  for (size_t i = 0; i < traces.size(); ++i) {
    CHECK(traces_back[i].winner == traces[i].winner);
    CHECK(traces_back[i].final_state == traces[i].final_state);
    CHECK(traces_back[i].records.size() == traces[i].records.size());
    io::verify_trace(traces_back[i]);  // replays to the recorded end
  }
}

TEST_CASE("trace verification catches tampering") {
  auto ga = dsl::make_ga_strategy();
  auto random0 = dsl::make_random_strategy();
  MatchTrace t = play_match(*random0, *ga, 21, 1);
  io::verify_trace(t);

  MatchTrace wrong_winner = t;
  wrong_winner.winner ^= 1;
  CHECK_THROWS_AS(io::verify_trace(wrong_winner), io::IoError);

  MatchTrace wrong_seed = t;
  wrong_seed.seed += 1;
  CHECK_THROWS_AS(io::verify_trace(wrong_seed), io::IoError);

  REQUIRE(!t.records.empty());
  MatchTrace dropped = t;
  dropped.records.pop_back();
  CHECK_THROWS_AS(io::verify_trace(dropped), io::IoError);
}

TEST_CASE("malformed files raise IO errors") {
  std::stringstream empty;
  CHECK_THROWS_AS(io::read_dataset(empty), io::IoError);
  std::stringstream wrong("{\"format\":\"other/1\"}\n");
  CHECK_THROWS_AS(io::read_dataset(wrong), io::IoError);
  std::stringstream garbled("{\"format\":\"cantstop.dataset/1\"}\nnot json\n");
  CHECK_THROWS_AS(io::read_dataset(garbled), io::IoError);
}
