#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "synth/rng.hpp"

namespace synth {

// Violated precondition or broken internal contract. Maps to exit status 4
// at the CLI boundary.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

using SymbolId = int;

// Immutable context-free grammar. Symbols are interned; a symbol is a
// nonterminal iff it appears as the head of a rule. Construction validates
// that every nonterminal has at least one production and can derive a
// terminal-only string.
class Grammar {
 public:
  // One rule: head name plus its ordered productions (each a symbol-name
  // sequence). The first rule's head is the start symbol.
  using RuleSpec = std::pair<std::string, std::vector<std::vector<std::string>>>;

  explicit Grammar(const std::vector<RuleSpec>& rules);

  // Text format: one rule per line, "NT -> sym sym ... | sym ...",
  // '#' starts a comment, first rule's head is the start symbol.
  static Grammar parse(std::string_view text);
  static Grammar from_file(const std::string& path);

  SymbolId start() const { return start_; }
  int symbol_count() const { return static_cast<int>(names_.size()); }
  bool is_nonterminal(SymbolId s) const { return productions_index_[s] >= 0; }
  const std::string& name(SymbolId s) const { return names_[s]; }
  SymbolId symbol(std::string_view name) const;  // throws on unknown name
  bool has_symbol(std::string_view name) const;

  int production_count(SymbolId nt) const;
  const std::vector<SymbolId>& production(SymbolId nt, int index) const;

  // Minimal number of production applications to derive a terminal-only
  // string from `s` (0 for terminals).
  int min_depth(SymbolId s) const { return min_depth_[s]; }
  // 1 + max over the production's symbols of min_depth.
  int production_cost(SymbolId nt, int index) const;
  // Production indices of `nt` with minimal cost, in grammar order.
  const std::vector<int>& cheapest_productions(SymbolId nt) const;

 private:
  SymbolId intern(const std::string& name);

  std::vector<std::string> names_;
  std::unordered_map<std::string, SymbolId> ids_;
  // per symbol: index into productions_, or -1 for terminals
  std::vector<int> productions_index_;
  std::vector<std::vector<std::vector<SymbolId>>> productions_;
  std::vector<std::vector<int>> cheapest_;
  std::vector<int> min_depth_;
  SymbolId start_ = -1;
};

// AST node. A node is either an expanded nonterminal (production >= 0,
// children match the production's symbol sequence), an unexpanded
// nonterminal leaf (a hole), or a terminal leaf.
struct ProgramNode {
  SymbolId symbol = -1;
  bool nonterminal = false;
  int production = -1;
  std::vector<ProgramNode> children;

  bool expanded() const { return production >= 0; }
  bool hole() const { return nonterminal && production < 0; }
};

// Value-semantics program. All mutating operations return copies.
class Program {
 public:
  Program() = default;
  Program(SymbolId symbol, bool nonterminal) {
    root_.symbol = symbol;
    root_.nonterminal = nonterminal;
  }
  static Program hole(const Grammar& g) { return Program(g.start(), true); }

  const ProgramNode& root() const { return root_; }
  ProgramNode& root() { return root_; }

  bool complete() const;

  friend bool operator==(const Program& a, const Program& b);

 private:
  ProgramNode root_;
};

// Child-index path from the root.
using NodePath = std::vector<int>;

struct DerivationStep {
  SymbolId nonterminal;
  int production;
  friend bool operator==(const DerivationStep&, const DerivationStep&) = default;
};
// Leftmost-order list of applied productions. Replaying it from the start
// symbol via expand_leftmost reproduces the program that produced it.
using Derivation = std::vector<DerivationStep>;

// Uniform random complete program. Every production choice is uniform among
// the productions valid at the node; at depths past `depth_limit` only
// productions of minimal remaining derivation depth are eligible, which
// forces termination.
Program random_program(const Grammar& g, Rng& rng, int depth_limit = 15);

// Fills every hole of `partial` with a fresh random subtree.
Program random_completion(const Grammar& g, const Program& partial, Rng& rng,
                          int depth_limit = 15);

// Replaces the subtree at one uniformly chosen candidate node with a fresh
// random subtree rooted at the same nonterminal. Candidates are all nodes
// carrying nonterminal symbols; with leaf_restricted, only the holes, which
// preserves the existing derivation prefix.
Program neighbor(const Grammar& g, const Program& p, Rng& rng,
                 bool leaf_restricted = false, int depth_limit = 15);

// As neighbor, but the candidate set is the given path list.
Program regenerate_at(const Grammar& g, const Program& p,
                      const std::vector<NodePath>& candidates, Rng& rng,
                      int depth_limit = 15);

// Expands the leftmost (depth-first pre-order) hole with the given
// production of its symbol. The input is unchanged.
Program expand_leftmost(const Grammar& g, const Program& p, int production);

// One program per production of the leftmost hole, in grammar order.
// Empty iff `p` is complete.
std::vector<Program> enumerate_children(const Grammar& g, const Program& p);

Derivation derivation_sequence(const Program& p);
Program program_from_derivation(const Grammar& g, const Derivation& d);

std::vector<NodePath> hole_paths(const Program& p);
std::vector<NodePath> nonterminal_node_paths(const Program& p);
const ProgramNode* node_at(const Program& p, const NodePath& path);

int node_count(const Program& p);
int internal_node_count(const Program& p);

// Canonical textual form: terminals print as their names, holes as
// "?Symbol", expanded nodes as "(Symbol:production child ...)".
// parse_sexpr(to_sexpr(p)) == p.
std::string to_sexpr(const Grammar& g, const Program& p);
Program parse_sexpr(const Grammar& g, std::string_view text);

// Terminal yield with holes rendered as the symbol name; human-readable
// program text for logs.
std::string to_text(const Grammar& g, const Program& p);

// True when `prefix`'s expanded nodes all appear, with the same productions,
// at the same positions in `p`.
bool shares_prefix(const Program& p, const Program& prefix);

}  // namespace synth
