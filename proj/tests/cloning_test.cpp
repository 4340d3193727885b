#include <doctest.h>

#include "synth/cloning.hpp"
#include "synth/dsl.hpp"
#include "synth/io.hpp"

using namespace synth;
using cantstop::Action;
using cantstop::GameState;
using cantstop::Phase;

namespace {

// replays a fixed action list; the marker cell permanent[1][10] of the
// observed state selects which script (test datasets set it per match)
class Scripted final : public Strategy {
 public:
  explicit Scripted(std::vector<std::vector<Action>> scripts)
      : scripts_(std::move(scripts)) {}

  Action choose(const GameState& s) override {
    size_t which = s.permanent[1][10];
    REQUIRE(which < scripts_.size());
    REQUIRE(index_[which] < scripts_[which].size());
    return scripts_[which][index_[which]++];
  }
  void reseed(uint64_t) override { index_.assign(8, 0); }
  std::unique_ptr<Strategy> clone() const override {
    auto c = std::make_unique<Scripted>(scripts_);
    c->index_.assign(8, 0);
    return c;
  }
  std::string name() const override { return "scripted"; }

 private:
  std::vector<std::vector<Action>> scripts_;
  std::vector<size_t> index_ = std::vector<size_t>(8, 0);
};

GameState demo_state(int script_id, Phase phase, bool with_neutral) {
  GameState s;
  s.phase = phase;
  s.permanent[1][10] = static_cast<uint8_t>(script_id);
  if (phase == Phase::ColumnDecision) s.dice = {1, 1, 1, 1};
  if (with_neutral) {
    s.neutral_col[0] = 2;
    s.neutral_row[0] = 1;
  }
  return s;
}

// a single-turn demonstrator record: column move, roll-again, ..., stop;
// mid-turn states carry a neutral so the roll-agains do not read as busts
DataSetMatch make_match(int script_id, int n_column_steps,
                        std::vector<std::pair<int, int>> end_markers) {
  DataSetMatch m;
  m.demonstrator = 0;
  m.winner = 0;
  for (int i = 0; i < n_column_steps; ++i) {
    m.pairs.push_back(
        {demo_state(script_id, Phase::ColumnDecision, i > 0), Action::columns(2)});
    m.pairs.push_back(
        {demo_state(script_id, Phase::YesNoDecision, true), Action::yes()});
  }
  m.pairs.back().action = Action::no();
  m.end_state = GameState{};
  for (auto [col, cells] : end_markers)
    m.end_state.permanent[0][col - 2] = static_cast<uint8_t>(cells);
  return m;
}

}  // namespace

TEST_CASE("secured-cell overlap reproduces the worked end-game example") {
  std::array<int, cantstop::kNumColumns> demonstrator{};
  demonstrator[2 - 2] = 3;   // conquered column 2
  demonstrator[3 - 2] = 5;   // conquered column 3
  demonstrator[7 - 2] = 13;  // conquered column 7
  demonstrator[12 - 2] = 1;  // one marker on column 12
  std::array<int, cantstop::kNumColumns> shadow{};
  shadow[2 - 2] = 3;
  shadow[3 - 2] = 5;
  shadow[8 - 2] = 1;
  double score = secured_cell_overlap(shadow, demonstrator);
  CHECK(score == doctest::Approx(8.0 / 23.0).epsilon(1e-12));

  CHECK(secured_cell_overlap(demonstrator, demonstrator) == 1.0);
  std::array<int, cantstop::kNumColumns> empty{};
  CHECK(secured_cell_overlap(empty, empty) == 1.0);
  CHECK(secured_cell_overlap(empty, demonstrator) == 0.0);
}

TEST_CASE("action score counts reproduced pairs, pooled across matches") {
  auto ga = dsl::make_ga_strategy();
  auto random0 = dsl::make_random_strategy();
  DataSet data = generate_dataset(*ga, *ga, 2, DatasetMode::SelfPlayWinnerOnly,
                                  555, "ga-self");

  // the deterministic demonstrator reproduces itself exactly
  CloneScore perfect = action_score(data, *ga);
  CHECK(perfect.value == 1.0);
  for (double v : perfect.per_match) CHECK(v == 1.0);

  // flip 3 of the first 10 recorded actions: score on those 10 pairs is 0.7
  DataSet ten;
  ten.label = "ten";
  DataSetMatch m;
  m.demonstrator = data.matches[0].demonstrator;
  m.winner = data.matches[0].winner;
  m.end_state = data.matches[0].end_state;
  REQUIRE(data.matches[0].pairs.size() >= 10);
  for (int i = 0; i < 10; ++i) m.pairs.push_back(data.matches[0].pairs[i]);
  int flipped = 0;
  for (int i = 0; i < 10 && flipped < 3; ++i) {
    cantstop::ActionList legal = cantstop::legal_actions(m.pairs[i].state);
    for (const Action& alt : legal) {
      if (!(alt == m.pairs[i].action)) {
        m.pairs[i].action = alt;
        ++flipped;
        break;
      }
    }
  }
  REQUIRE(flipped == 3);
  ten.matches.push_back(std::move(m));
  CHECK(action_score(ten, *ga).value == doctest::Approx(0.7));

  // appending fully matched pairs never lowers the pooled score
  DataSet extended = ten;
  extended.matches.push_back(data.matches[1]);
  CHECK(action_score(extended, *ga).value >= action_score(ten, *ga).value);

  DataSet empty;
  CHECK_THROWS_AS(action_score(empty, *ga), ContractViolation);
  CHECK_THROWS_AS(observation_score(empty, *ga), ContractViolation);
}

TEST_CASE("observation score replays a shadow board and averages matches") {
  // script 0: advance column 2 once, stop -> shadow {2:1}
  // script 1: advance 2 twice, then 3 once, stop -> shadow {2:2, 3:1}
  Scripted strategy({{Action::columns(2), Action::no()},
                     {Action::columns(2), Action::yes(), Action::columns(2),
                      Action::yes(), Action::columns(3), Action::no()}});

  DataSet data;
  data.label = "scripted";
  // demonstrator end {2:1, 3:4}: intersection 1, union 5 -> 0.2
  data.matches.push_back(make_match(0, 1, {{2, 1}, {3, 4}}));
  // demonstrator end {2:2, 3:1, 4:2}: intersection 3, union 5 -> 0.6
  data.matches.push_back(make_match(1, 3, {{2, 2}, {3, 1}, {4, 2}}));

  CloneScore score = observation_score(data, strategy);
  REQUIRE(score.per_match.size() == 2);
  CHECK(score.per_match[0] == doctest::Approx(0.2));
  CHECK(score.per_match[1] == doctest::Approx(0.6));
  CHECK(score.value == doctest::Approx(0.4));
}

TEST_CASE("observation score is 1 when the strategy reproduces the demonstrator") {
  auto ga = dsl::make_ga_strategy();
  DataSet data = generate_dataset(*ga, *ga, 3, DatasetMode::SelfPlayWinnerOnly,
                                  4242, "ga-self");
  CloneScore score = observation_score(data, *ga);
  CHECK(score.value == 1.0);
  for (double v : score.per_match) CHECK(v == 1.0);
}

TEST_CASE("observation score ignores the opponent's markers entirely") {
  auto ga = dsl::make_ga_strategy();
  auto random0 = dsl::make_random_strategy();
  DataSet data =
      generate_dataset(*ga, *random0, 3, DatasetMode::VersusKeepA, 777, "ga-vs-rnd");
  double base = observation_score(data, *ga).value;

  DataSet doctored = data;
  for (DataSetMatch& m : doctored.matches) {
    int opponent = 1 - m.demonstrator;
    for (int c = 0; c < cantstop::kNumColumns; ++c)
      m.end_state.permanent[opponent][c] = static_cast<uint8_t>(c % 3);
  }
  CHECK(observation_score(doctored, *ga).value == base);
}

TEST_CASE("a recorded bust clears the shadow neutrals") {
  // demonstrator: advance 2, roll again, busted (next state fresh), then
  // advance 3 and stop
  DataSetMatch m;
  m.demonstrator = 0;
  m.winner = 0;
  m.pairs.push_back({demo_state(0, Phase::ColumnDecision, false), Action::columns(2)});
  m.pairs.push_back({demo_state(0, Phase::YesNoDecision, true), Action::yes()});
  // next recorded state has no neutrals: the roll-again busted
  m.pairs.push_back({demo_state(0, Phase::ColumnDecision, false), Action::columns(3)});
  m.pairs.push_back({demo_state(0, Phase::YesNoDecision, true), Action::no()});
  m.end_state = GameState{};
  m.end_state.permanent[0][3 - 2] = 1;
  DataSet data;
  data.matches.push_back(m);

  Scripted strategy({{Action::columns(2), Action::yes(), Action::columns(3),
                      Action::no()}});
  CloneScore score = observation_score(data, strategy);
  // the shadow's column-2 progress was wiped by the bust: boards match exactly
  CHECK(score.value == doctest::Approx(1.0));
}

TEST_CASE("a faulting strategy scores zero on the affected match") {
  auto ga = dsl::make_ga_strategy();
  DataSet data = generate_dataset(*ga, *ga, 2, DatasetMode::SelfPlayWinnerOnly,
                                  31337, "ga-self");
  // a program whose yes-no side always faults (sum over the action list)
  auto faulty = dsl::make_program_strategy(dsl::build::pair(
      dsl::build::a_sum(dsl::build::l_l3()), dsl::build::a_sum(dsl::build::l_l2())));
  CloneScore a = action_score(data, *faulty);
  CHECK(a.value == 0.0);
  CloneScore o = observation_score(data, *faulty);
  CHECK(o.value == 0.0);
}
