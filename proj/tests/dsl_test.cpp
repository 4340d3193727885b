#include <doctest.h>

#include <map>

#include "synth/dsl.hpp"
#include "synth/evaluation.hpp"

using namespace synth;
using namespace synth::dsl;
using cantstop::Action;
using cantstop::ActionList;
using cantstop::GameState;
using cantstop::Phase;

namespace {

void place_neutral(GameState& s, int col, int row) {
  for (int i = 0; i < cantstop::kNumNeutrals; ++i) {
    if (s.neutral_col[i] == 0) {
      s.neutral_col[i] = static_cast<uint8_t>(col);
      s.neutral_row[i] = static_cast<uint8_t>(row);
      return;
    }
  }
  REQUIRE(false);
}

Program wrap_a(ProgramNode a) {
  Program p;
  p.root() = std::move(a);
  return p;
}

int64_t eval_on(const Program& p, const GameState& s, const ActionList* actions,
                std::optional<int> column = std::nullopt,
                const Action* action = nullptr) {
  EvalContext ctx;
  ctx.state = &s;
  ctx.actions = actions;
  if (column) {
    ctx.has_bound_column = true;
    ctx.bound_column = *column;
  }
  ctx.bound_action = action;
  return eval_int(p, ctx);
}

// builds an E node evaluating to the given constant from the 0/1 literals
ProgramNode e_const(int v) {
  using namespace build;
  if (v == 0) return e_n(0);
  if (v == 1) return e_n(1);
  if (v % 2 == 0) return e_arith(e_const(v / 2), '*', e_const(2));
  return e_arith(e_const(v - 1), '+', e_n(1));
}

}  // namespace

TEST_CASE("grammar shape of the strategy language") {
  const Grammar& g = cantstop_grammar();
  CHECK(g.name(g.start()) == "S");
  CHECK(g.production_count(g.symbol("S")) == 1);
  CHECK(g.production_count(g.symbol("A")) == 4);
  CHECK(g.production_count(g.symbol("B")) == 2);
  CHECK(g.production_count(g.symbol("E")) == 5);
  CHECK(g.production_count(g.symbol("L")) == 3);
  CHECK(g.production_count(g.symbol("LAM")) == 3);
  CHECK(g.production_count(g.symbol("F2")) == 6);
  CHECK(g.production_count(g.symbol("L1")) == 2);
  CHECK(g.production_count(g.symbol("L2")) == 2);
  CHECK(g.production_count(g.symbol("N")) == 2);
  CHECK(g.production_count(g.symbol("OP")) == 3);
}

TEST_CASE("weight table lookups index by the bound column") {
  GameState s;
  Program l4 = wrap_a(build::a_arith(build::e_weight(4), '+', build::e_n(0)));
  CHECK(eval_on(l4, s, nullptr, 2) == 7);
  CHECK(eval_on(l4, s, nullptr, 7) == 1);
  CHECK(eval_on(l4, s, nullptr, 12) == 7);
  Program l5 = wrap_a(build::a_arith(build::e_weight(5), '+', build::e_n(0)));
  CHECK(eval_on(l5, s, nullptr, 2) == 7);
  CHECK(eval_on(l5, s, nullptr, 6) == 4);
  CHECK(eval_on(l5, s, nullptr, 3) == 0);
  CHECK_THROWS_AS(eval_on(l4, s, nullptr), EvalError);       // no binding
  CHECK_THROWS_AS(eval_on(l4, s, nullptr, 42), EvalError);   // out of range
}

TEST_CASE("difficulty score default formula") {
  GameState s;
  CHECK(difficulty_score(s) == 0);  // no neutrals
  place_neutral(s, 6, 1);
  place_neutral(s, 7, 1);
  place_neutral(s, 8, 1);
  CHECK(difficulty_score(s) == 0);  // mixed parity, straddles 7

  GameState odd_low;
  place_neutral(odd_low, 3, 1);
  place_neutral(odd_low, 5, 2);
  CHECK(difficulty_score(odd_low) == 6);  // all odd (+2), all below 7 (+4)

  GameState even_high;
  place_neutral(even_high, 8, 1);
  place_neutral(even_high, 10, 1);
  CHECK(difficulty_score(even_high) == 2);  // all even (-2), all above 7 (+4)

  GameState seven;
  place_neutral(seven, 7, 4);
  CHECK(difficulty_score(seven) == 2);  // odd, neither side of 7
}

TEST_CASE("rule-based yes-no expression evaluates as the worked sum") {
  GameState s;
  s.phase = Phase::YesNoDecision;
  place_neutral(s, 6, 1);
  place_neutral(s, 7, 1);
  place_neutral(s, 8, 1);
  ActionList actions = cantstop::legal_actions(s);

  StrategyPair pair = split_pair(ga_program());
  EvalContext ctx;
  ctx.state = &s;
  ctx.actions = &actions;
  // (f1+1) * l4 over neutral columns {6,7,8}: 2*2 + 2*1 + 2*2 = 10, plus f5
  CHECK(eval_int(pair.yes_no, ctx) == 10 + difficulty_score(s));
}

TEST_CASE("rule-based column expression is the argmax of the documented sum") {
  GameState s;
  s.phase = Phase::ColumnDecision;
  s.dice = {1, 2, 3, 4};
  s.permanent[0][5 - 2] = 1;
  place_neutral(s, 7, 3);
  ActionList actions = cantstop::legal_actions(s);
  REQUIRE(actions.size() >= 2);

  int best_index = 0;
  int64_t best = 0;
  for (int i = 0; i < actions.size(); ++i) {
    int64_t value = 0;
    for (int c = 0; c < actions[i].n_cols; ++c) {
      int col = actions[i].cols[c];
      value += cantstop::advanced_by_action(s, actions[i], col) * kMoveValue[col - 2] -
               6 * cantstop::is_new_neutral(s, actions[i], col);
    }
    if (i == 0 || value > best) {
      best = value;
      best_index = i;
    }
  }

  StrategyPair pair = split_pair(ga_program());
  EvalContext ctx;
  ctx.state = &s;
  ctx.actions = &actions;
  CHECK(eval_int(pair.column, ctx) == best_index);
}

TEST_CASE("strategy skeleton gates and threshold") {
  // column program that will never be used in these yes-no states
  ProgramNode column = build::a_sum(build::l_l2());

  GameState winning;
  winning.phase = Phase::YesNoDecision;
  winning.permanent[0][2 - 2] = 3;
  winning.conquered[2 - 2] = 0;
  winning.permanent[0][3 - 2] = 5;
  winning.conquered[3 - 2] = 0;
  place_neutral(winning, 12, 3);

  auto low = make_program_strategy(
      build::pair(build::a_arith(e_const(0), '+', build::e_n(0)), column));
  CHECK(low->choose(winning) == Action::no());  // winning commit beats any score

  GameState fresh;
  fresh.phase = Phase::YesNoDecision;
  place_neutral(fresh, 5, 1);
  CHECK(low->choose(fresh) == Action::yes());  // free tokens remain: keep rolling

  GameState parked;  // three tokens out, no winning commit
  parked.phase = Phase::YesNoDecision;
  place_neutral(parked, 5, 1);
  place_neutral(parked, 6, 1);
  place_neutral(parked, 7, 1);

  auto at29 = make_program_strategy(
      build::pair(build::a_arith(e_const(29), '+', build::e_n(0)), column));
  auto at28 = make_program_strategy(
      build::pair(build::a_arith(e_const(28), '+', build::e_n(0)), column));
  CHECK(at29->choose(parked) == Action::no());   // score >= 29 stops
  CHECK(at28->choose(parked) == Action::yes());  // score < 29 rolls on

  // out-of-range column index wraps module the action count
  GameState col_state;
  col_state.phase = Phase::ColumnDecision;
  col_state.dice = {1, 2, 3, 4};
  auto wild = make_program_strategy(
      build::pair(build::a_arith(e_const(29), '+', build::e_n(0)),
                  build::a_arith(e_const(7), '+', build::e_n(0))));
  ActionList actions = cantstop::legal_actions(col_state);
  Action chosen = wild->choose(col_state);
  CHECK(chosen == actions[7 % actions.size()]);
  CHECK(clamped_index_count(*wild) == 1);
}

TEST_CASE("type errors are evaluation faults, and the skeleton reports them") {
  GameState s;
  s.phase = Phase::ColumnDecision;
  s.dice = {1, 2, 3, 4};
  ActionList actions = cantstop::legal_actions(s);

  // sum over the action list: elements are actions, not integers
  Program bad_sum = wrap_a(build::a_sum(build::l_l3()));
  CHECK_THROWS_AS(eval_on(bad_sum, s, &actions), EvalError);

  // locallist outside an action binding
  Program bare_l1 = wrap_a(build::a_sum(build::l_l1()));
  CHECK_THROWS_AS(eval_on(bare_l1, s, &actions), EvalError);

  // f1 needs a bound column
  Program bare_f1 = wrap_a(build::a_arith(build::e_f(1), '+', build::e_n(0)));
  CHECK_THROWS_AS(eval_on(bare_f1, s, &actions), EvalError);

  // argmax over an empty list: no neutrals on the board
  Program empty_argmax = wrap_a(build::a_argmax(build::l_l2()));
  CHECK_THROWS_AS(eval_on(empty_argmax, s, &actions), EvalError);

  // the skeleton surfaces evaluation faults as strategy faults
  auto faulty = make_program_strategy(
      build::pair(build::a_sum(build::l_l2()), build::a_sum(build::l_l3())));
  CHECK_THROWS_AS(faulty->choose(s), StrategyFault);
}

TEST_CASE("arithmetic saturates instead of overflowing") {
  GameState s;
  Program big = wrap_a(build::a_arith(
      build::e_arith(e_const(1 << 17), '*', e_const(1 << 17)), '*',
      e_const(1 << 17)));
  CHECK(eval_on(big, s, nullptr) == (int64_t{1} << 31));
  Program neg = wrap_a(build::a_arith(
      build::e_n(0), '-',
      build::e_arith(e_const(1 << 17), '*',
                     build::e_arith(e_const(1 << 17), '*', e_const(4)))));
  CHECK(eval_on(neg, s, nullptr) == -(int64_t{1} << 31));
}

TEST_CASE("runaway evaluations hit the step budget") {
  GameState s;
  s.phase = Phase::ColumnDecision;
  s.dice = {1, 2, 3, 4};
  place_neutral(s, 2, 1);
  place_neutral(s, 12, 1);
  ActionList actions = cantstop::legal_actions(s);
  REQUIRE(actions.size() == 5);  // split pairings fan out the map below

  ProgramNode lam = build::lam_arith(build::e_n(1), '+', build::e_n(1));
  for (int depth = 0; depth < 10; ++depth) lam = build::lam_map(std::move(lam), build::l_l3());
  Program runaway = wrap_a(build::a_sum(build::l_map(std::move(lam), build::l_l3())));
  CHECK_THROWS_AS(eval_on(runaway, s, &actions), EvalError);
}

TEST_CASE("interpreted rule-based program reproduces the native opponent") {
  auto native = make_ga_strategy();
  auto interpreted = make_program_strategy(ga_program());
  auto random0 = make_random_strategy();

  int states_checked = 0;
  for (int m = 0; m < 300; ++m) {
    MatchTrace t = play_match(*native, *random0, derive_seed(0x6A, m), m % 2);
    for (const MatchRecord& r : t.records) {
      Action a = native->choose(r.state);
      Action b = interpreted->choose(r.state);
      REQUIRE(a == b);
      ++states_checked;
    }
  }
  CHECK(states_checked > 10'000);
}

TEST_CASE("random strategy picks the stop action half the time") {
  GameState s;
  s.phase = Phase::YesNoDecision;
  place_neutral(s, 5, 1);
  auto random0 = make_random_strategy(99);
  int yes = 0;
  for (int i = 0; i < 10'000; ++i) yes += random0->choose(s) == Action::yes();
  CHECK(std::abs(yes / 10'000.0 - 0.5) < 0.02);
}

TEST_CASE("program sexpr round-trips, including the rule-based opponent") {
  const Grammar& g = cantstop_grammar();
  CHECK(parse_sexpr(g, to_sexpr(g, ga_program())) == ga_program());
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    Program p = random_program(g, rng);
    CHECK(parse_sexpr(g, to_sexpr(g, p)) == p);
  }
}

TEST_CASE("fuzz: random programs either evaluate or fault, deterministically") {
  const Grammar& g = cantstop_grammar();

  // a pool of reachable states of both phases
  std::vector<GameState> pool;
  auto a = make_random_strategy();
  auto b = make_random_strategy();
  for (int m = 0; m < 40; ++m) {
    MatchTrace t = play_match(*a, *b, derive_seed(0xF00D, m), m % 2);
    for (size_t i = 0; i < t.records.size(); i += 7) pool.push_back(t.records[i].state);
  }
  REQUIRE(pool.size() > 500);

  Rng rng(123);
  int64_t faults = 0;
  const int64_t kPrograms = 100'000;
  for (int64_t i = 0; i < kPrograms; ++i) {
    Program p = random_program(g, rng, 8);
    const GameState& s = pool[static_cast<size_t>(rng.index(static_cast<int>(pool.size())))];
    ActionList actions = cantstop::legal_actions(s);
    StrategyPair pair = split_pair(p);
    const Program& side = s.phase == Phase::YesNoDecision ? pair.yes_no : pair.column;
    auto run_once = [&]() -> std::pair<bool, int64_t> {
      EvalContext ctx;
      ctx.state = &s;
      ctx.actions = &actions;
      try {
        return {true, eval_int(side, ctx)};
      } catch (const EvalError&) {
        return {false, 0};
      }
    };
    auto [ok1, v1] = run_once();
    auto [ok2, v2] = run_once();  // interpreter is a pure function of (p, ctx)
    REQUIRE(ok1 == ok2);
    REQUIRE(v1 == v2);
    faults += !ok1;
  }
  double fault_rate = static_cast<double>(faults) / kPrograms;
  MESSAGE("fuzz fault rate: ", fault_rate);
  CHECK(fault_rate < 0.9);  // the language is mostly evaluable
  CHECK(fault_rate > 0.0);  // and the fault cases exist and are caught
}
