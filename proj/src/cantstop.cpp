#include "synth/cantstop.hpp"

#include <algorithm>
#include <sstream>

namespace synth::cantstop {

namespace {
constexpr std::array<int, kNumColumns> kHeights = {3, 5, 7, 9, 11, 13, 11, 9, 7, 5, 3};
}

int column_height(int column) {
  if (column < 2 || column > 12)
    throw ContractViolation("column_height: column out of range");
  return kHeights[column - 2];
}

std::string to_string(const Action& a) {
  switch (a.kind) {
    case Action::Kind::Yes: return "y";
    case Action::Kind::No: return "n";
    case Action::Kind::Columns: {
      std::string s = std::to_string(a.cols[0]);
      if (a.n_cols == 2) s += "+" + std::to_string(a.cols[1]);
      return s;
    }
  }
  return "?";
}

std::array<int, 4> roll_dice(Rng& rng) {
  std::array<int, 4> d;
  for (int& v : d) v = rng.uniform_int(1, 6);
  return d;
}

std::optional<int> winner(const GameState& s) {
  for (int p = 0; p < 2; ++p)
    if (s.conquered_count(p) >= kColumnsToWin) return p;
  return std::nullopt;
}

namespace {

// Whether the mover can make progress in `column`, and how: advancing an
// existing neutral or placing a new one.
struct ColumnUse {
  bool playable = false;
  bool places_new = false;
};

ColumnUse column_use(const GameState& s, int column, int free_neutrals) {
  ColumnUse u;
  if (s.conquered[column - 2] >= 0) return u;
  int row = s.neutral_row_in(column);
  if (row > 0) {
    u.playable = row < column_height(column);
  } else if (free_neutrals > 0) {
    // placement lands at the first row above the permanent marker, which
    // exists because the column is not conquered
    u.playable = true;
    u.places_new = true;
  }
  return u;
}

// Jointly playable: both occurrences applied in sequence.
bool pair_playable(const GameState& s, int a, int b) {
  int free_neutrals = kNumNeutrals - s.neutral_count();
  if (a == b) {
    if (s.conquered[a - 2] >= 0) return false;
    int row = s.neutral_row_in(a);
    if (row > 0) return row + 2 <= column_height(a);
    if (free_neutrals == 0) return false;
    return s.permanent[s.to_move][a - 2] + 2 <= column_height(a);
  }
  ColumnUse ua = column_use(s, a, free_neutrals);
  ColumnUse ub = column_use(s, b, free_neutrals);
  if (!ua.playable || !ub.playable) return false;
  if (ua.places_new && ub.places_new && free_neutrals < 2) return false;
  return true;
}

void add_pairing_actions(const GameState& s, int a, int b, ActionList& out) {
  auto push_unique = [&out](const Action& act) {
    if (!out.contains(act)) out.push(act);
  };
  if (pair_playable(s, a, b)) {
    push_unique(Action::columns(a, b));
    return;
  }
  int free_neutrals = kNumNeutrals - s.neutral_count();
  if (column_use(s, a, free_neutrals).playable) push_unique(Action::columns(a));
  if (b != a && column_use(s, b, free_neutrals).playable)
    push_unique(Action::columns(b));
}

// Advance or place one step in `column` on behalf of the mover. Caller
// guarantees feasibility.
void advance_column(GameState& s, int column) {
  for (int i = 0; i < kNumNeutrals; ++i) {
    if (s.neutral_col[i] == column) {
      s.neutral_row[i]++;
      return;
    }
  }
  for (int i = 0; i < kNumNeutrals; ++i) {
    if (s.neutral_col[i] == 0) {
      s.neutral_col[i] = static_cast<uint8_t>(column);
      s.neutral_row[i] = static_cast<uint8_t>(s.permanent[s.to_move][column - 2] + 1);
      return;
    }
  }
  throw ContractViolation("apply_action: no free neutral token");
}

void clear_neutrals(GameState& s) {
  s.neutral_col.fill(0);
  s.neutral_row.fill(0);
}

void clear_dice(GameState& s) { s.dice.fill(0); }

void set_dice(GameState& s, const std::array<int, 4>& d) {
  for (int i = 0; i < 4; ++i) s.dice[i] = static_cast<uint8_t>(d[i]);
}

// Roll for the player to move; a turn-start bust (no playable pairing)
// passes the turn and rerolls for the opponent.
void enter_turn(GameState& s, Rng& dice_rng) {
  for (;;) {
    s.phase = Phase::ColumnDecision;
    set_dice(s, roll_dice(dice_rng));
    if (!legal_actions(s).empty()) return;
    clear_neutrals(s);
    s.to_move ^= 1;
  }
}

void commit_neutrals(GameState& s) {
  for (int i = 0; i < kNumNeutrals; ++i) {
    if (s.neutral_col[i] == 0) continue;
    int col = s.neutral_col[i];
    s.permanent[s.to_move][col - 2] = s.neutral_row[i];
    if (s.neutral_row[i] == column_height(col))
      s.conquered[col - 2] = static_cast<int8_t>(s.to_move);
  }
  clear_neutrals(s);
}

}  // namespace

GameState initial_state(int starter, Rng& dice_rng) {
  GameState s;
  s.to_move = static_cast<uint8_t>(starter);
  enter_turn(s, dice_rng);
  return s;
}

ActionList legal_actions(const GameState& s) {
  if (is_terminal(s)) throw ContractViolation("legal_actions: terminal state");
  ActionList out;
  if (s.phase == Phase::YesNoDecision) {
    out.push(Action::yes());
    out.push(Action::no());
    return out;
  }
  const auto& d = s.dice;
  add_pairing_actions(s, d[0] + d[1], d[2] + d[3], out);
  add_pairing_actions(s, d[0] + d[2], d[1] + d[3], out);
  add_pairing_actions(s, d[0] + d[3], d[1] + d[2], out);
  return out;
}

GameState apply_action(const GameState& s, const Action& a, Rng& dice_rng) {
  if (!legal_actions(s).contains(a))
    throw ContractViolation("apply_action: illegal action " + to_string(a));
  GameState out = s;
  switch (a.kind) {
    case Action::Kind::Columns:
      for (int i = 0; i < a.n_cols; ++i) advance_column(out, a.cols[i]);
      out.phase = Phase::YesNoDecision;
      clear_dice(out);
      break;
    case Action::Kind::Yes: {
      out.phase = Phase::ColumnDecision;
      set_dice(out, roll_dice(dice_rng));
      if (legal_actions(out).empty()) {  // bust: lose the neutral tokens
        clear_neutrals(out);
        out.to_move ^= 1;
        enter_turn(out, dice_rng);
      }
      break;
    }
    case Action::Kind::No:
      commit_neutrals(out);
      clear_dice(out);
      if (!is_terminal(out)) {
        out.to_move ^= 1;
        enter_turn(out, dice_rng);
      } else {
        out.phase = Phase::YesNoDecision;
      }
      break;
  }
  return out;
}

int advanced_this_round(const GameState& s, int column) {
  if (column < 2 || column > 12) throw ContractViolation("column out of range");
  int row = s.neutral_row_in(column);
  if (row == 0) return 0;
  return row - s.permanent[s.to_move][column - 2];
}

int advanced_by_action(const GameState& s, const Action& a, int column) {
  (void)s;
  if (column < 2 || column > 12) throw ContractViolation("column out of range");
  if (!a.is_columns()) return 0;
  int n = 0;
  for (int i = 0; i < a.n_cols; ++i) n += a.cols[i] == column;
  return n;
}

int secured(const GameState& s, int player, int column) {
  if (column < 2 || column > 12) throw ContractViolation("column out of range");
  return s.permanent[player][column - 2];
}

int is_new_neutral(const GameState& s, const Action& a, int column) {
  if (column < 2 || column > 12) throw ContractViolation("column out of range");
  if (!a.is_columns()) return 0;
  bool uses = false;
  for (int i = 0; i < a.n_cols; ++i) uses |= a.cols[i] == column;
  return uses && s.neutral_row_in(column) == 0 ? 1 : 0;
}

bool win_after_n(const GameState& s) {
  GameState sim = s;
  commit_neutrals(sim);
  return sim.conquered_count(s.to_move) >= kColumnsToWin;
}

bool available_columns(const GameState& s) {
  if (s.neutral_count() >= kNumNeutrals) return false;
  for (int col = 2; col <= 12; ++col)
    if (s.conquered[col - 2] < 0 && s.neutral_row_in(col) == 0) return true;
  return false;
}

void check_invariants(const GameState& s) {
  auto fail = [](const std::string& what) {
    throw ContractViolation("state invariant: " + what);
  };
  int neutrals = 0;
  for (int i = 0; i < kNumNeutrals; ++i) {
    if (s.neutral_col[i] == 0) {
      if (s.neutral_row[i] != 0) fail("unused neutral slot with a row");
      continue;
    }
    ++neutrals;
    int col = s.neutral_col[i];
    if (col < 2 || col > 12) fail("neutral column out of range");
    if (s.neutral_row[i] < 1 || s.neutral_row[i] > column_height(col))
      fail("neutral row out of range");
    if (s.conquered[col - 2] >= 0) fail("neutral on a conquered column");
    if (s.neutral_row[i] <= s.permanent[s.to_move][col - 2])
      fail("neutral at or below the permanent marker");
    for (int j = i + 1; j < kNumNeutrals; ++j)
      if (s.neutral_col[j] == s.neutral_col[i]) fail("two neutrals in one column");
  }
  if (neutrals > kNumNeutrals) fail("too many neutrals");
  for (int col = 2; col <= 12; ++col) {
    int idx = col - 2;
    for (int p = 0; p < 2; ++p)
      if (s.permanent[p][idx] > column_height(col)) fail("permanent above column top");
    int owner = s.conquered[idx];
    if (owner >= 0) {
      if (s.permanent[owner][idx] != column_height(col))
        fail("conquered column without a full permanent marker");
    } else {
      for (int p = 0; p < 2; ++p)
        if (s.permanent[p][idx] == column_height(col))
          fail("full permanent marker without conquest");
    }
  }
  bool has_dice = s.dice[0] != 0;
  for (int i = 0; i < 4; ++i) {
    if (s.dice[i] > 6) fail("die out of range");
    if ((s.dice[i] != 0) != has_dice) fail("partial dice");
  }
  if (!is_terminal(s)) {
    if ((s.phase == Phase::ColumnDecision) != has_dice)
      fail("dice present iff column phase");
  }
  if (s.to_move > 1) fail("bad player id");
}

std::string render_board(const GameState& s) {
  std::ostringstream out;
  auto pad = [&out](const std::string& label) { out << label; };
  pad("col:       ");
  for (int col = 2; col <= 12; ++col) out << col << (col < 10 ? "    " : "   ");
  out << "\n";
  for (int p = 0; p < 2; ++p) {
    out << "p" << p << (p == s.to_move ? " (move): " : ":        ");
    for (int col = 2; col <= 12; ++col) {
      std::string cell = std::to_string(s.permanent[p][col - 2]) + "/" +
                         std::to_string(column_height(col));
      out << cell << std::string(col < 10 ? 6 - cell.size() : 5 - cell.size(), ' ');
    }
    out << "\n";
  }
  out << "neutral:  ";
  for (int i = 0; i < kNumNeutrals; ++i)
    if (s.neutral_col[i] != 0)
      out << " " << static_cast<int>(s.neutral_col[i]) << ":"
          << static_cast<int>(s.neutral_row[i]);
  out << "\nconquered:";
  for (int col = 2; col <= 12; ++col)
    if (s.conquered[col - 2] >= 0)
      out << " " << col << "(p" << static_cast<int>(s.conquered[col - 2]) << ")";
  out << "\n";
  if (s.phase == Phase::ColumnDecision) {
    out << "dice:     ";
    for (int i = 0; i < 4; ++i) out << " " << static_cast<int>(s.dice[i]);
    out << "\n";
  }
  return out.str();
}

}  // namespace synth::cantstop
