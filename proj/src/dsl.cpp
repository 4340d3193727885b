#include "synth/dsl.hpp"

#include <algorithm>

namespace synth::dsl {

using cantstop::Action;
using cantstop::ActionList;
using cantstop::GameState;

const Grammar& cantstop_grammar() {
  static const Grammar g({
      {"S", {{"A", "A"}}},
      {"A",
       {{"if", "(", "B", "<", "B", ")", "then", "A", "else", "A"},
        {"argmax", "(", "L", ")"},
        {"sum", "(", "L", ")"},
        {"E", "OP", "E"}}},
      {"B", {{"N"}, {"E", "OP", "E"}}},
      {"E", {{"E", "OP", "E"}, {"N"}, {"sum", "(", "L", ")"}, {"L2"}, {"F2"}}},
      {"L", {{"map", "(", "LAM", ",", "L", ")"}, {"L1"}, {"l1"}}},
      {"LAM",
       {{"sum", "(", "L", ")"}, {"map", "(", "LAM", ",", "L", ")"}, {"E", "OP", "E"}}},
      {"F2", {{"f1"}, {"f2"}, {"f3"}, {"f4"}, {"f5"}, {"f6"}}},
      {"L1", {{"l2"}, {"l3"}}},
      {"L2", {{"l4"}, {"l5"}}},
      {"N", {{"0"}, {"1"}}},
      {"OP", {{"+"}, {"-"}, {"*"}}},
  });
  return g;
}

namespace {

int64_t default_difficulty(const GameState& s) {
  int placed = 0, odd = 0, below = 0, above = 0;
  for (int i = 0; i < cantstop::kNumNeutrals; ++i) {
    int col = s.neutral_col[i];
    if (col == 0) continue;
    ++placed;
    odd += col % 2;
    below += col < 7;
    above += col > 7;
  }
  if (placed == 0) return 0;
  int64_t score = 0;
  if (odd == placed) score += 2;
  if (odd == 0) score -= 2;
  if (below == placed) score += 4;
  if (above == placed) score += 4;
  return score;
}

DifficultyFn g_difficulty = &default_difficulty;

constexpr int64_t kSaturation = int64_t{1} << 31;
constexpr int64_t kOpBudget = 1'000'000;

int64_t saturate(int64_t v) { return std::clamp(v, -kSaturation, kSaturation); }

// Resolved symbol ids of the grammar, computed once.
struct Symbols {
  SymbolId S, A, B, E, L, LAM, F2, L1, L2, N, OP;
  Symbols() {
    const Grammar& g = cantstop_grammar();
    S = g.symbol("S");
    A = g.symbol("A");
    B = g.symbol("B");
    E = g.symbol("E");
    L = g.symbol("L");
    LAM = g.symbol("LAM");
    F2 = g.symbol("F2");
    L1 = g.symbol("L1");
    L2 = g.symbol("L2");
    N = g.symbol("N");
    OP = g.symbol("OP");
  }
};

const Symbols& symbols() {
  static const Symbols s;
  return s;
}

[[noreturn]] void type_error(const std::string& what) { throw EvalError(what); }

struct Interp {
  EvalContext& ctx;

  void tick() {
    if (++ctx.ops > kOpBudget) type_error("evaluation step budget exceeded");
  }

  int64_t require_column() const {
    if (!ctx.has_bound_column) type_error("column terminal outside a column binding");
    if (ctx.bound_column < 2 || ctx.bound_column > 12)
      type_error("bound column out of range");
    return ctx.bound_column;
  }

  const Action& require_column_action() const {
    if (ctx.bound_action == nullptr)
      type_error("action terminal outside an action binding");
    if (!ctx.bound_action->is_columns())
      type_error("action terminal bound to a yes/no action");
    return *ctx.bound_action;
  }

  int64_t arith(const ProgramNode& lhs, const ProgramNode& op, const ProgramNode& rhs) {
    int64_t a = eval_int_node(lhs);
    int64_t b = eval_int_node(rhs);
    switch (op.production) {
      case 0: return saturate(a + b);
      case 1: return saturate(a - b);
      default: return saturate(a * b);
    }
  }

  int64_t domain_fn(int index) {
    const GameState& s = *ctx.state;
    switch (index) {
      case 0: return cantstop::advanced_this_round(s, static_cast<int>(require_column()));
      case 1:
        return cantstop::advanced_by_action(s, require_column_action(),
                                            static_cast<int>(require_column()));
      case 2: return cantstop::secured(s, s.to_move, static_cast<int>(require_column()));
      case 3: return cantstop::secured(s, s.to_move ^ 1, static_cast<int>(require_column()));
      case 4: return g_difficulty(s);
      default:
        return cantstop::is_new_neutral(s, require_column_action(),
                                        static_cast<int>(require_column()));
    }
  }

  DslValue list_terminal(int which) {
    // 0: l1, 1: l2, 2: l3
    std::vector<DslValue> items;
    if (which == 0) {
      const Action& a = require_column_action();
      for (int i = 0; i < a.n_cols; ++i) items.push_back(DslValue::integer(a.cols[i]));
    } else if (which == 1) {
      std::array<int, cantstop::kNumNeutrals> cols{};
      int n = 0;
      for (int i = 0; i < cantstop::kNumNeutrals; ++i)
        if (ctx.state->neutral_col[i] != 0) cols[n++] = ctx.state->neutral_col[i];
      std::sort(cols.begin(), cols.begin() + n);
      for (int i = 0; i < n; ++i) items.push_back(DslValue::integer(cols[i]));
    } else {
      if (ctx.actions == nullptr) type_error("l3 without an action list in context");
      for (const Action& a : *ctx.actions) items.push_back(DslValue::of_action(a));
    }
    return DslValue::of_list(std::move(items));
  }

  DslValue map_over(const ProgramNode& lam, const ProgramNode& list_node) {
    DslValue input = eval_node(list_node);
    if (input.kind != DslValue::Kind::List) type_error("map over a non-list");
    std::vector<DslValue> out;
    out.reserve(input.list.size());
    const Action* saved_action = ctx.bound_action;
    bool saved_has_col = ctx.has_bound_column;
    int64_t saved_col = ctx.bound_column;
    for (const DslValue& element : input.list) {
      if (element.kind == DslValue::Kind::Int) {
        ctx.has_bound_column = true;
        ctx.bound_column = element.int_value;
      } else if (element.kind == DslValue::Kind::Action) {
        ctx.bound_action = &element.action;
      }
      // list elements bind nothing; the body may still be closed
      out.push_back(eval_node(lam));
      ctx.bound_action = saved_action;
      ctx.has_bound_column = saved_has_col;
      ctx.bound_column = saved_col;
    }
    return DslValue::of_list(std::move(out));
  }

  int64_t sum_list(const ProgramNode& list_node) {
    DslValue v = eval_node(list_node);
    if (v.kind != DslValue::Kind::List) type_error("sum over a non-list");
    int64_t total = 0;
    for (const DslValue& e : v.list) {
      if (e.kind != DslValue::Kind::Int) type_error("sum over non-integer elements");
      total = saturate(total + e.int_value);
    }
    return total;
  }

  int64_t argmax_list(const ProgramNode& list_node) {
    DslValue v = eval_node(list_node);
    if (v.kind != DslValue::Kind::List) type_error("argmax over a non-list");
    if (v.list.empty()) type_error("argmax over an empty list");
    int64_t best_index = 0;
    int64_t best = 0;
    for (size_t i = 0; i < v.list.size(); ++i) {
      if (v.list[i].kind != DslValue::Kind::Int)
        type_error("argmax over non-integer elements");
      if (i == 0 || v.list[i].int_value > best) {
        best = v.list[i].int_value;
        best_index = static_cast<int64_t>(i);
      }
    }
    return best_index;
  }

  int64_t eval_int_node(const ProgramNode& n) {
    DslValue v = eval_node(n);
    if (v.kind != DslValue::Kind::Int) type_error("expected an integer value");
    return v.int_value;
  }

  DslValue eval_node(const ProgramNode& n) {
    tick();
    const Symbols& sym = symbols();
    if (!n.expanded()) {
      if (n.nonterminal) type_error("evaluation reached an unexpanded hole");
      type_error("evaluation reached a bare terminal");
    }
    SymbolId s = n.symbol;
    int p = n.production;
    if (s == sym.A) {
      switch (p) {
        case 0: {
          int64_t lhs = eval_int_node(n.children[2]);
          int64_t rhs = eval_int_node(n.children[4]);
          return eval_node(lhs < rhs ? n.children[7] : n.children[9]);
        }
        case 1: return DslValue::integer(argmax_list(n.children[2]));
        case 2: return DslValue::integer(sum_list(n.children[2]));
        default: return DslValue::integer(arith(n.children[0], n.children[1], n.children[2]));
      }
    }
    if (s == sym.E) {
      switch (p) {
        case 0: return DslValue::integer(arith(n.children[0], n.children[1], n.children[2]));
        case 1: return eval_node(n.children[0]);
        case 2: return DslValue::integer(sum_list(n.children[2]));
        case 3: return eval_node(n.children[0]);
        default: return eval_node(n.children[0]);
      }
    }
    if (s == sym.B) {
      if (p == 0) return eval_node(n.children[0]);
      return DslValue::integer(arith(n.children[0], n.children[1], n.children[2]));
    }
    if (s == sym.L) {
      switch (p) {
        case 0: return map_over(n.children[2], n.children[4]);
        case 1: return eval_node(n.children[0]);
        default: return list_terminal(0);  // l1
      }
    }
    if (s == sym.LAM) {
      switch (p) {
        case 0: return DslValue::integer(sum_list(n.children[2]));
        case 1: return map_over(n.children[2], n.children[4]);
        default: return DslValue::integer(arith(n.children[0], n.children[1], n.children[2]));
      }
    }
    if (s == sym.F2) return DslValue::integer(domain_fn(p));
    if (s == sym.L1) return list_terminal(p == 0 ? 1 : 2);  // l2 / l3
    if (s == sym.L2) {
      int64_t col = require_column();
      const auto& table = p == 0 ? kProgressValue : kMoveValue;
      return DslValue::integer(table[col - 2]);
    }
    if (s == sym.N) return DslValue::integer(p);
    type_error("no evaluation rule for symbol " + cantstop_grammar().name(s));
  }
};

}  // namespace

int64_t difficulty_score(const GameState& s) { return g_difficulty(s); }

void set_difficulty_fn(DifficultyFn fn) {
  g_difficulty = fn != nullptr ? fn : &default_difficulty;
}

std::string difficulty_description() {
  if (g_difficulty == &default_difficulty)
    return "default: +2 if all placed neutrals sit on odd columns, -2 if all on "
           "even columns, +4 if all below column 7, +4 if all above column 7";
  return "custom difficulty function";
}

DslValue eval(const Program& p, EvalContext& ctx) {
  if (ctx.state == nullptr) throw ContractViolation("eval: context without a state");
  Interp interp{ctx};
  return interp.eval_node(p.root());
}

int64_t eval_int(const Program& p, EvalContext& ctx) {
  DslValue v = eval(p, ctx);
  if (v.kind != DslValue::Kind::Int)
    throw EvalError("program did not evaluate to an integer");
  return v.int_value;
}

StrategyPair split_pair(const Program& s_program) {
  const ProgramNode& root = s_program.root();
  if (root.symbol != symbols().S || !root.expanded())
    throw ContractViolation("split_pair: not an expanded S program");
  StrategyPair out;
  out.yes_no.root() = root.children[0];
  out.column.root() = root.children[1];
  return out;
}

namespace {

// Shared fixed skeleton around the two decision programs; the score and
// column expressions are the only parts that differ between the interpreted
// and the native opponent implementations.
template <typename ScoreFn, typename ColumnFn>
Action skeleton_choose(const GameState& s, ScoreFn&& score_fn, ColumnFn&& column_fn) {
  ActionList actions = cantstop::legal_actions(s);
  if (s.phase == cantstop::Phase::YesNoDecision) {
    int64_t score = score_fn(s, actions);
    if (cantstop::win_after_n(s)) return Action::no();
    if (cantstop::available_columns(s)) return Action::yes();
    return score >= kStopThreshold ? Action::no() : Action::yes();
  }
  return column_fn(s, actions);
}

class ProgramStrategy final : public Strategy {
 public:
  explicit ProgramStrategy(Program s_program)
      : program_(std::move(s_program)), pair_(split_pair(program_)) {}

  Action choose(const GameState& s) override {
    try {
      return skeleton_choose(
          s,
          [this](const GameState& st, const ActionList& actions) {
            EvalContext ctx;
            ctx.state = &st;
            ctx.actions = &actions;
            return eval_int(pair_.yes_no, ctx);
          },
          [this](const GameState& st, const ActionList& actions) {
            EvalContext ctx;
            ctx.state = &st;
            ctx.actions = &actions;
            int64_t index = eval_int(pair_.column, ctx);
            int64_t n = actions.size();
            int64_t wrapped = ((index % n) + n) % n;
            if (wrapped != index) ++clamped_;
            return actions[static_cast<int>(wrapped)];
          });
    } catch (const EvalError& e) {
      throw StrategyFault(e.what());
    }
  }

  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<ProgramStrategy>(program_);
  }
  std::string name() const override { return "program"; }
  int64_t clamped() const { return clamped_; }

 private:
  Program program_;
  StrategyPair pair_;
  int64_t clamped_ = 0;
};

class GaStrategy final : public Strategy {
 public:
  Action choose(const GameState& s) override {
    return skeleton_choose(
        s,
        [](const GameState& st, const ActionList&) {
          int64_t score = 0;
          for (int col = 2; col <= 12; ++col) {
            if (st.neutral_row_in(col) == 0) continue;
            score += (cantstop::advanced_this_round(st, col) + 1) *
                     kProgressValue[col - 2];
          }
          return score + difficulty_score(st);
        },
        [](const GameState& st, const ActionList& actions) {
          int best_index = 0;
          int64_t best = 0;
          for (int i = 0; i < actions.size(); ++i) {
            int64_t value = 0;
            const Action& a = actions[i];
            for (int j = 0; j < a.n_cols; ++j) {
              int col = a.cols[j];
              value += cantstop::advanced_by_action(st, a, col) * kMoveValue[col - 2] -
                       6 * cantstop::is_new_neutral(st, a, col);
            }
            if (i == 0 || value > best) {
              best = value;
              best_index = i;
            }
          }
          return actions[best_index];
        });
  }

  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<GaStrategy>();
  }
  std::string name() const override { return "ga"; }
};

class RandomStrategy final : public Strategy {
 public:
  explicit RandomStrategy(uint64_t seed) : rng_(seed) {}

  Action choose(const GameState& s) override {
    ActionList actions = cantstop::legal_actions(s);
    if (actions.empty()) throw StrategyFault("no legal actions");
    return actions[rng_.index(actions.size())];
  }
  void reseed(uint64_t seed) override { rng_ = Rng(seed); }
  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<RandomStrategy>(0);
  }
  std::string name() const override { return "random"; }

 private:
  Rng rng_;
};

}  // namespace

std::unique_ptr<Strategy> make_program_strategy(Program s_program) {
  return std::make_unique<ProgramStrategy>(std::move(s_program));
}

std::unique_ptr<Strategy> make_ga_strategy() { return std::make_unique<GaStrategy>(); }

std::unique_ptr<Strategy> make_random_strategy(uint64_t seed) {
  return std::make_unique<RandomStrategy>(seed);
}

int64_t clamped_index_count(const Strategy& s) {
  if (const auto* p = dynamic_cast<const ProgramStrategy*>(&s)) return p->clamped();
  return 0;
}

namespace build {

namespace {

ProgramNode make(const char* head, int production, std::vector<ProgramNode> operands) {
  const Grammar& g = cantstop_grammar();
  SymbolId nt = g.symbol(head);
  const auto& rhs = g.production(nt, production);
  ProgramNode n;
  n.symbol = nt;
  n.nonterminal = true;
  n.production = production;
  size_t next = 0;
  for (SymbolId s : rhs) {
    if (g.is_nonterminal(s)) {
      if (next >= operands.size() || operands[next].symbol != s)
        throw ContractViolation("builder: operand mismatch for " + std::string(head));
      n.children.push_back(std::move(operands[next++]));
    } else {
      ProgramNode t;
      t.symbol = s;
      n.children.push_back(std::move(t));
    }
  }
  if (next != operands.size())
    throw ContractViolation("builder: too many operands for " + std::string(head));
  return n;
}

ProgramNode op_node(char op) {
  int production = op == '+' ? 0 : op == '-' ? 1 : 2;
  return make("OP", production, {});
}

ProgramNode n_node(int v) { return make("N", v == 0 ? 0 : 1, {}); }

}  // namespace

ProgramNode a_if(ProgramNode b1, ProgramNode b2, ProgramNode then_a, ProgramNode else_a) {
  return make("A", 0,
              {std::move(b1), std::move(b2), std::move(then_a), std::move(else_a)});
}
ProgramNode a_argmax(ProgramNode l) { return make("A", 1, {std::move(l)}); }
ProgramNode a_sum(ProgramNode l) { return make("A", 2, {std::move(l)}); }
ProgramNode a_arith(ProgramNode e1, char op, ProgramNode e2) {
  return make("A", 3, {std::move(e1), op_node(op), std::move(e2)});
}
ProgramNode b_n(int v) { return make("B", 0, {n_node(v)}); }
ProgramNode b_arith(ProgramNode e1, char op, ProgramNode e2) {
  return make("B", 1, {std::move(e1), op_node(op), std::move(e2)});
}
ProgramNode e_arith(ProgramNode e1, char op, ProgramNode e2) {
  return make("E", 0, {std::move(e1), op_node(op), std::move(e2)});
}
ProgramNode e_n(int v) { return make("E", 1, {n_node(v)}); }
ProgramNode e_sum(ProgramNode l) { return make("E", 2, {std::move(l)}); }
ProgramNode e_weight(int table) {
  return make("E", 3, {make("L2", table == 4 ? 0 : 1, {})});
}
ProgramNode e_f(int i) { return make("E", 4, {make("F2", i - 1, {})}); }
ProgramNode l_map(ProgramNode lam, ProgramNode l) {
  return make("L", 0, {std::move(lam), std::move(l)});
}
ProgramNode l_l1() { return make("L", 2, {}); }
ProgramNode l_l2() { return make("L", 1, {make("L1", 0, {})}); }
ProgramNode l_l3() { return make("L", 1, {make("L1", 1, {})}); }
ProgramNode lam_sum(ProgramNode l) { return make("LAM", 0, {std::move(l)}); }
ProgramNode lam_map(ProgramNode lam, ProgramNode l) {
  return make("LAM", 1, {std::move(lam), std::move(l)});
}
ProgramNode lam_arith(ProgramNode e1, char op, ProgramNode e2) {
  return make("LAM", 2, {std::move(e1), op_node(op), std::move(e2)});
}
Program pair(ProgramNode yes_no_a, ProgramNode column_a) {
  Program p;
  p.root() = make("S", 0, {std::move(yes_no_a), std::move(column_a)});
  return p;
}

}  // namespace build

Program ga_program() {
  using namespace build;
  // yes-no: sum(map(lambda: (f1 + 1) * l4, l2)) + f5
  ProgramNode yes_no = a_arith(
      e_sum(l_map(lam_arith(e_arith(e_f(1), '+', e_n(1)), '*', e_weight(4)), l_l2())),
      '+', e_f(5));
  // column: argmax(map(lambda: sum(map(lambda: f2 * l5 - 6 * f6, l1)), l3))
  ProgramNode six =
      e_arith(e_arith(e_n(1), '+', e_n(1)), '*',
              e_arith(e_n(1), '+', e_arith(e_n(1), '+', e_n(1))));
  ProgramNode column = a_argmax(l_map(
      lam_sum(l_map(lam_arith(e_arith(e_f(2), '*', e_weight(5)), '-',
                              e_arith(std::move(six), '*', e_f(6))),
                    l_l1())),
      l_l3()));
  return pair(std::move(yes_no), std::move(column));
}

}  // namespace synth::dsl
