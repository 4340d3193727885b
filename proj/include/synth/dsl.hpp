#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "synth/cantstop.hpp"
#include "synth/grammar.hpp"
#include "synth/strategy.hpp"

namespace synth::dsl {

// A generable program evaluated outside its type discipline (e.g. sum over a
// list of actions, an action-bound terminal without a bound column-move).
// Such programs are scored as faults by the harnesses, never crashes.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The strategy-synthesis grammar: S -> A A, where the first A is the yes-no
// score expression and the second the column-index expression.
const Grammar& cantstop_grammar();

// Column weight tables, indexed by column-2. kProgressValue backs l4,
// kMoveValue backs l5.
inline constexpr std::array<int, 11> kProgressValue = {7, 7, 3, 2, 2, 1, 2, 2, 3, 7, 7};
inline constexpr std::array<int, 11> kMoveValue = {7, 0, 2, 0, 4, 3, 4, 0, 2, 0, 7};

// f5. The exact formula is swappable; the default scores +2 when every
// placed neutral sits on an odd column, -2 when every one sits on an even
// column, +4 when all sit below column 7 and +4 when all sit above it.
// An empty neutral set scores 0.
using DifficultyFn = int64_t (*)(const cantstop::GameState&);
int64_t difficulty_score(const cantstop::GameState& s);
void set_difficulty_fn(DifficultyFn fn);  // nullptr restores the default
std::string difficulty_description();

// Tagged runtime value: integer, action reference, or list.
struct DslValue {
  enum class Kind : uint8_t { Int, Action, List };
  Kind kind = Kind::Int;
  int64_t int_value = 0;
  cantstop::Action action;
  std::vector<DslValue> list;

  static DslValue integer(int64_t v) {
    DslValue x;
    x.kind = Kind::Int;
    x.int_value = v;
    return x;
  }
  static DslValue of_action(const cantstop::Action& a) {
    DslValue x;
    x.kind = Kind::Action;
    x.action = a;
    return x;
  }
  static DslValue of_list(std::vector<DslValue> items) {
    DslValue x;
    x.kind = Kind::List;
    x.list = std::move(items);
    return x;
  }
};

struct EvalContext {
  const cantstop::GameState* state = nullptr;
  const cantstop::ActionList* actions = nullptr;
  // lambda bindings; map() binds the element here for the body evaluation
  const cantstop::Action* bound_action = nullptr;
  bool has_bound_column = false;
  int64_t bound_column = 0;
  int64_t ops = 0;  // step counter; a runaway evaluation faults
};

DslValue eval(const Program& p, EvalContext& ctx);
int64_t eval_int(const Program& p, EvalContext& ctx);

struct StrategyPair {
  Program yes_no;
  Program column;
};
// Splits a complete S-program into its two decision programs.
StrategyPair split_pair(const Program& s_program);

// The fixed decision skeleton's stop threshold.
inline constexpr int kStopThreshold = 29;

// Wraps a complete S-program into a full strategy via the fixed skeleton:
// yes-no phase computes the score, answers n on a winning commit, y while
// free tokens remain placeable, otherwise n iff score >= kStopThreshold;
// column phase indexes the legal-action list with the evaluated index,
// wrapped modulo the list length.
std::unique_ptr<Strategy> make_program_strategy(Program s_program);

// Hand-written implementation of the same rule-based opponent the DSL
// version of ga_program() encodes; used as the fixed opponent.
std::unique_ptr<Strategy> make_ga_strategy();

// Chooses uniformly among the legal actions with its own seed stream.
std::unique_ptr<Strategy> make_random_strategy(uint64_t seed = 0);

// The rule-based opponent written as a DSL program.
Program ga_program();

// Program strategies count column indices that had to be wrapped into
// range; exposed for diagnostics.
int64_t clamped_index_count(const Strategy& s);

// Typed node builders over cantstop_grammar(), for writing programs in code.
namespace build {
ProgramNode a_if(ProgramNode b1, ProgramNode b2, ProgramNode then_a, ProgramNode else_a);
ProgramNode a_argmax(ProgramNode l);
ProgramNode a_sum(ProgramNode l);
ProgramNode a_arith(ProgramNode e1, char op, ProgramNode e2);
ProgramNode b_n(int v);
ProgramNode b_arith(ProgramNode e1, char op, ProgramNode e2);
ProgramNode e_arith(ProgramNode e1, char op, ProgramNode e2);
ProgramNode e_n(int v);
ProgramNode e_sum(ProgramNode l);
ProgramNode e_weight(int table);  // 4 -> l4, 5 -> l5
ProgramNode e_f(int i);           // f1..f6
ProgramNode l_map(ProgramNode lam, ProgramNode l);
ProgramNode l_l1();
ProgramNode l_l2();
ProgramNode l_l3();
ProgramNode lam_sum(ProgramNode l);
ProgramNode lam_map(ProgramNode lam, ProgramNode l);
ProgramNode lam_arith(ProgramNode e1, char op, ProgramNode e2);
Program pair(ProgramNode yes_no_a, ProgramNode column_a);
}  // namespace build

}  // namespace synth::dsl
