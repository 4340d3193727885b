#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "synth/grammar.hpp"
#include "synth/rng.hpp"

namespace synth::cantstop {

// Columns are numbered 2..12 and stored at index column-2.
inline constexpr int kNumColumns = 11;
inline constexpr int kColumnsToWin = 3;
inline constexpr int kNumNeutrals = 3;

int column_height(int column);

enum class Phase : uint8_t { ColumnDecision, YesNoDecision };

// Either the yes/no answer of the roll-again decision or the playable column
// multiset of one dice pairing (columns sorted, possibly equal).
struct Action {
  enum class Kind : uint8_t { Yes, No, Columns };
  Kind kind = Kind::Yes;
  std::array<uint8_t, 2> cols{0, 0};
  uint8_t n_cols = 0;

  static Action yes() { return Action{Kind::Yes, {0, 0}, 0}; }
  static Action no() { return Action{Kind::No, {0, 0}, 0}; }
  static Action columns(int a) {
    return Action{Kind::Columns, {static_cast<uint8_t>(a), 0}, 1};
  }
  static Action columns(int a, int b) {
    if (a > b) std::swap(a, b);
    return Action{Kind::Columns, {static_cast<uint8_t>(a), static_cast<uint8_t>(b)}, 2};
  }
  bool is_columns() const { return kind == Kind::Columns; }
  friend bool operator==(const Action&, const Action&) = default;
};

std::string to_string(const Action& a);

struct ActionList {
  std::array<Action, 8> items{};
  int count = 0;

  void push(const Action& a) { items[count++] = a; }
  bool contains(const Action& a) const {
    for (int i = 0; i < count; ++i)
      if (items[i] == a) return true;
    return false;
  }
  const Action* begin() const { return items.data(); }
  const Action* end() const { return items.data() + count; }
  const Action& operator[](int i) const { return items[i]; }
  int size() const { return count; }
  bool empty() const { return count == 0; }
};

struct GameState {
  // cells secured per player per column
  std::array<std::array<uint8_t, kNumColumns>, 2> permanent{};
  // conquered column owner, -1 if open
  std::array<int8_t, kNumColumns> conquered;
  // neutral tokens of the player to move: column (0 = slot unused) and row
  std::array<uint8_t, kNumNeutrals> neutral_col{0, 0, 0};
  std::array<uint8_t, kNumNeutrals> neutral_row{0, 0, 0};
  std::array<uint8_t, 4> dice{0, 0, 0, 0};  // present only in ColumnDecision
  Phase phase = Phase::ColumnDecision;
  uint8_t to_move = 0;

  GameState() { conquered.fill(-1); }

  int neutral_count() const {
    int n = 0;
    for (uint8_t c : neutral_col) n += c != 0;
    return n;
  }
  // row of the neutral token in `column`, 0 if none
  int neutral_row_in(int column) const {
    for (int i = 0; i < kNumNeutrals; ++i)
      if (neutral_col[i] == column) return neutral_row[i];
    return 0;
  }
  int secured(int player, int column) const {
    return permanent[player][column - 2];
  }
  int conquered_count(int player) const {
    int n = 0;
    for (int8_t o : conquered) n += o == player;
    return n;
  }
  friend bool operator==(const GameState&, const GameState&) = default;
};

std::array<int, 4> roll_dice(Rng& rng);

// Fresh game: `starter` to move, first roll already made (never a bust on an
// empty board), ColumnDecision phase.
GameState initial_state(int starter, Rng& dice_rng);

std::optional<int> winner(const GameState& s);
inline bool is_terminal(const GameState& s) { return winner(s).has_value(); }

// YesNoDecision: exactly [y, n]. ColumnDecision: deduplicated column actions
// over the 3 dice pairings; a pairing whose both sums are jointly playable
// contributes the both-columns action, otherwise each individually playable
// sum as its own action. Empty iff the roll is a bust.
ActionList legal_actions(const GameState& s);

// Transition. Column moves advance/place neutrals and enter YesNoDecision.
// 'y' rerolls; a bust discards the neutrals and passes the turn (rolling for
// the opponent, cascading over turn-start busts). 'n' commits neutrals to
// permanent markers, conquers full columns, and passes the turn unless the
// game is won.
GameState apply_action(const GameState& s, const Action& a, Rng& dice_rng);

// DSL helper queries; pure reads of the state.
int advanced_this_round(const GameState& s, int column);
int advanced_by_action(const GameState& s, const Action& a, int column);
int secured(const GameState& s, int player, int column);
int is_new_neutral(const GameState& s, const Action& a, int column);
// True when committing the current neutrals wins the game for the mover.
bool win_after_n(const GameState& s);
// True when the mover still has a free neutral token and some open column
// carries no neutral yet.
bool available_columns(const GameState& s);

// Throws ContractViolation describing the first violated state invariant.
void check_invariants(const GameState& s);

std::string render_board(const GameState& s);

}  // namespace synth::cantstop
