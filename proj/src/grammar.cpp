#include "synth/grammar.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace synth {

namespace {
constexpr int kInf = std::numeric_limits<int>::max() / 4;
}

SymbolId Grammar::intern(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  SymbolId id = static_cast<SymbolId>(names_.size());
  names_.push_back(name);
  ids_.emplace(name, id);
  productions_index_.push_back(-1);
  return id;
}

namespace {

// Heads must read back as plain tokens; '|' is the quote character and
// cannot appear in any symbol name.
void validate_symbol_name(const std::string& name, bool is_head) {
  if (name.empty()) throw ContractViolation("grammar: empty symbol name");
  if (name.find('|') != std::string::npos)
    throw ContractViolation("grammar: '|' not allowed in symbol name: " + name);
  if (!is_head) return;
  if (name.front() == '?')
    throw ContractViolation("grammar: nonterminal name may not start with '?'");
  for (char c : name)
    if (c == '(' || c == ')' || c == ';' || c == ':' ||
        std::isspace(static_cast<unsigned char>(c)))
      throw ContractViolation("grammar: bad character in nonterminal name: " + name);
}

}  // namespace

Grammar::Grammar(const std::vector<RuleSpec>& rules) {
  if (rules.empty()) throw ContractViolation("grammar: no rules");
  for (const auto& [head, prods] : rules) {
    validate_symbol_name(head, true);
    SymbolId h = intern(head);
    if (productions_index_[h] >= 0)
      throw ContractViolation("grammar: duplicate rule head " + head);
    if (prods.empty())
      throw ContractViolation("grammar: nonterminal without productions: " + head);
    productions_index_[h] = static_cast<int>(productions_.size());
    productions_.emplace_back();
  }
  start_ = ids_.at(rules.front().first);
  for (const auto& [head, prods] : rules) {
    auto& out = productions_[productions_index_[ids_.at(head)]];
    for (const auto& prod : prods) {
      if (prod.empty())
        throw ContractViolation("grammar: empty production for " + head);
      std::vector<SymbolId> syms;
      syms.reserve(prod.size());
      for (const auto& s : prod) {
        validate_symbol_name(s, false);
        syms.push_back(intern(s));
      }
      out.push_back(std::move(syms));
    }
  }

  // Minimal derivation depth per symbol, by fixpoint. A symbol that never
  // reaches a finite depth cannot derive a terminal-only string.
  min_depth_.assign(names_.size(), kInf);
  for (SymbolId s = 0; s < symbol_count(); ++s)
    if (!is_nonterminal(s)) min_depth_[s] = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (SymbolId s = 0; s < symbol_count(); ++s) {
      if (!is_nonterminal(s)) continue;
      int best = kInf;
      for (const auto& prod : productions_[productions_index_[s]]) {
        int worst = 0;
        for (SymbolId c : prod) worst = std::max(worst, min_depth_[c]);
        if (worst < kInf) best = std::min(best, 1 + worst);
      }
      if (best < min_depth_[s]) {
        min_depth_[s] = best;
        changed = true;
      }
    }
  }
  for (SymbolId s = 0; s < symbol_count(); ++s)
    if (min_depth_[s] >= kInf)
      throw ContractViolation("grammar: dead nonterminal " + names_[s]);

  cheapest_.resize(names_.size());
  for (SymbolId s = 0; s < symbol_count(); ++s) {
    if (!is_nonterminal(s)) continue;
    int n = production_count(s);
    int best = kInf;
    for (int i = 0; i < n; ++i) best = std::min(best, production_cost(s, i));
    for (int i = 0; i < n; ++i)
      if (production_cost(s, i) == best) cheapest_[s].push_back(i);
  }
}

SymbolId Grammar::symbol(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end())
    throw ContractViolation("grammar: unknown symbol " + std::string(name));
  return it->second;
}

bool Grammar::has_symbol(std::string_view name) const {
  return ids_.count(std::string(name)) > 0;
}

int Grammar::production_count(SymbolId nt) const {
  if (nt < 0 || nt >= symbol_count() || !is_nonterminal(nt))
    throw ContractViolation("grammar: not a nonterminal");
  return static_cast<int>(productions_[productions_index_[nt]].size());
}

const std::vector<SymbolId>& Grammar::production(SymbolId nt, int index) const {
  if (index < 0 || index >= production_count(nt))
    throw ContractViolation("grammar: production index out of range");
  return productions_[productions_index_[nt]][index];
}

int Grammar::production_cost(SymbolId nt, int index) const {
  const auto& prod = production(nt, index);
  int worst = 0;
  for (SymbolId c : prod) worst = std::max(worst, min_depth_[c]);
  return 1 + worst;
}

const std::vector<int>& Grammar::cheapest_productions(SymbolId nt) const {
  if (!is_nonterminal(nt)) throw ContractViolation("grammar: not a nonterminal");
  return cheapest_[nt];
}

Grammar Grammar::parse(std::string_view text) {
  std::vector<RuleSpec> rules;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() < 3 || tokens[1] != "->")
      throw ContractViolation("grammar file: expected 'NT -> ...': " + line);
    RuleSpec rule;
    rule.first = tokens[0];
    std::vector<std::string> current;
    for (size_t i = 2; i < tokens.size(); ++i) {
      if (tokens[i] == "|") {
        rule.second.push_back(current);
        current.clear();
      } else {
        current.push_back(tokens[i]);
      }
    }
    rule.second.push_back(current);
    rules.push_back(std::move(rule));
  }
  return Grammar(rules);
}

Grammar Grammar::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grammar file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

namespace {

bool node_complete(const ProgramNode& n) {
  if (n.hole()) return false;
  for (const auto& c : n.children)
    if (!node_complete(c)) return false;
  return true;
}

bool nodes_equal(const ProgramNode& a, const ProgramNode& b) {
  if (a.symbol != b.symbol || a.production != b.production ||
      a.children.size() != b.children.size())
    return false;
  for (size_t i = 0; i < a.children.size(); ++i)
    if (!nodes_equal(a.children[i], b.children[i])) return false;
  return true;
}

// Expands `node` (a hole) in place using `production`, leaving fresh holes
// for nonterminal children.
void apply_production(const Grammar& g, ProgramNode& node, int production) {
  const auto& rhs = g.production(node.symbol, production);
  node.production = production;
  node.children.clear();
  node.children.reserve(rhs.size());
  for (SymbolId s : rhs) {
    ProgramNode child;
    child.symbol = s;
    child.nonterminal = g.is_nonterminal(s);
    node.children.push_back(std::move(child));
  }
}

void generate_subtree(const Grammar& g, ProgramNode& node, Rng& rng, int depth,
                      int depth_limit) {
  if (!node.nonterminal) return;
  int production;
  if (depth >= depth_limit) {
    const auto& cheap = g.cheapest_productions(node.symbol);
    production = cheap[rng.index(static_cast<int>(cheap.size()))];
  } else {
    production = rng.index(g.production_count(node.symbol));
  }
  apply_production(g, node, production);
  for (auto& c : node.children) generate_subtree(g, c, rng, depth + 1, depth_limit);
}

ProgramNode* node_at_mut(ProgramNode& root, const NodePath& path) {
  ProgramNode* n = &root;
  for (int i : path) {
    if (i < 0 || static_cast<size_t>(i) >= n->children.size()) return nullptr;
    n = &n->children[i];
  }
  return n;
}

void collect_paths(const ProgramNode& n, NodePath& cur, bool holes_only,
                   std::vector<NodePath>& out) {
  if (n.nonterminal && (!holes_only || n.hole())) out.push_back(cur);
  for (size_t i = 0; i < n.children.size(); ++i) {
    cur.push_back(static_cast<int>(i));
    collect_paths(n.children[i], cur, holes_only, out);
    cur.pop_back();
  }
}

ProgramNode* leftmost_hole(ProgramNode& n) {
  if (n.hole()) return &n;
  for (auto& c : n.children)
    if (ProgramNode* h = leftmost_hole(c)) return h;
  return nullptr;
}

void collect_derivation(const ProgramNode& n, Derivation& out) {
  if (n.expanded()) {
    out.push_back({n.symbol, n.production});
    for (const auto& c : n.children) collect_derivation(c, out);
  }
}

int count_nodes(const ProgramNode& n, bool internal_only) {
  int total = internal_only ? (n.expanded() ? 1 : 0) : 1;
  for (const auto& c : n.children) total += count_nodes(c, internal_only);
  return total;
}

}  // namespace

bool Program::complete() const { return node_complete(root_); }

bool operator==(const Program& a, const Program& b) {
  return nodes_equal(a.root(), b.root());
}

Program random_program(const Grammar& g, Rng& rng, int depth_limit) {
  if (depth_limit < g.min_depth(g.start()))
    throw ContractViolation("random_program: depth limit below minimal derivation depth");
  Program p = Program::hole(g);
  generate_subtree(g, p.root(), rng, 0, depth_limit);
  return p;
}

Program random_completion(const Grammar& g, const Program& partial, Rng& rng,
                          int depth_limit) {
  Program p = partial;
  for (const NodePath& path : hole_paths(p)) {
    ProgramNode* n = node_at_mut(p.root(), path);
    generate_subtree(g, *n, rng, 0, depth_limit);
  }
  return p;
}

Program regenerate_at(const Grammar& g, const Program& p,
                      const std::vector<NodePath>& candidates, Rng& rng,
                      int depth_limit) {
  if (candidates.empty())
    throw ContractViolation("neighbor: no candidate nodes");
  const NodePath& path = candidates[rng.index(static_cast<int>(candidates.size()))];
  Program out = p;
  ProgramNode* n = node_at_mut(out.root(), path);
  if (n == nullptr || !n->nonterminal)
    throw ContractViolation("neighbor: invalid candidate path");
  ProgramNode fresh;
  fresh.symbol = n->symbol;
  fresh.nonterminal = true;
  generate_subtree(g, fresh, rng, 0, depth_limit);
  *n = std::move(fresh);
  return out;
}

Program neighbor(const Grammar& g, const Program& p, Rng& rng,
                 bool leaf_restricted, int depth_limit) {
  auto candidates = leaf_restricted ? hole_paths(p) : nonterminal_node_paths(p);
  if (candidates.empty())
    throw ContractViolation("neighbor: leaf-restricted call on a complete program");
  return regenerate_at(g, p, candidates, rng, depth_limit);
}

Program expand_leftmost(const Grammar& g, const Program& p, int production) {
  Program out = p;
  ProgramNode* h = leftmost_hole(out.root());
  if (h == nullptr)
    throw ContractViolation("expand_leftmost: program is complete");
  if (production < 0 || production >= g.production_count(h->symbol))
    throw ContractViolation("expand_leftmost: invalid production index");
  apply_production(g, *h, production);
  return out;
}

std::vector<Program> enumerate_children(const Grammar& g, const Program& p) {
  std::vector<Program> out;
  Program scratch = p;
  ProgramNode* h = leftmost_hole(scratch.root());
  if (h == nullptr) return out;
  int n = g.production_count(h->symbol);
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(expand_leftmost(g, p, i));
  return out;
}

Derivation derivation_sequence(const Program& p) {
  Derivation d;
  collect_derivation(p.root(), d);
  return d;
}

Program program_from_derivation(const Grammar& g, const Derivation& d) {
  Program p = Program::hole(g);
  for (const DerivationStep& step : d) {
    ProgramNode* h = leftmost_hole(p.root());
    if (h == nullptr)
      throw ContractViolation("derivation replay: program already complete");
    if (h->symbol != step.nonterminal)
      throw ContractViolation("derivation replay: leftmost hole symbol mismatch");
    p = expand_leftmost(g, p, step.production);
  }
  return p;
}

std::vector<NodePath> hole_paths(const Program& p) {
  std::vector<NodePath> out;
  NodePath cur;
  collect_paths(p.root(), cur, true, out);
  return out;
}

std::vector<NodePath> nonterminal_node_paths(const Program& p) {
  std::vector<NodePath> out;
  NodePath cur;
  collect_paths(p.root(), cur, false, out);
  return out;
}

const ProgramNode* node_at(const Program& p, const NodePath& path) {
  const ProgramNode* n = &p.root();
  for (int i : path) {
    if (i < 0 || static_cast<size_t>(i) >= n->children.size()) return nullptr;
    n = &n->children[i];
  }
  return n;
}

int node_count(const Program& p) { return count_nodes(p.root(), false); }
int internal_node_count(const Program& p) { return count_nodes(p.root(), true); }

namespace {

// Terminal names may hold characters the reader treats as structure
// (parens, whitespace, ';', '?', ':'); those print pipe-quoted, |(|.
bool needs_quote(const std::string& name) {
  if (name.empty()) return true;
  if (name.front() == '?') return true;
  for (char c : name)
    if (c == '(' || c == ')' || c == ';' || c == ':' ||
        std::isspace(static_cast<unsigned char>(c)))
      return true;
  return false;
}

void print_token(const std::string& name, std::string& out) {
  if (needs_quote(name)) {
    out += '|';
    out += name;
    out += '|';
  } else {
    out += name;
  }
}

void print_node(const Grammar& g, const ProgramNode& n, std::string& out) {
  if (!n.nonterminal) {
    print_token(g.name(n.symbol), out);
    return;
  }
  if (n.hole()) {
    out += '?';
    out += g.name(n.symbol);
    return;
  }
  out += '(';
  out += g.name(n.symbol);
  out += ':';
  out += std::to_string(n.production);
  for (const auto& c : n.children) {
    out += ' ';
    print_node(g, c, out);
  }
  out += ')';
}

struct SexprParser {
  const Grammar& g;
  std::string_view text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() &&
           (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ';')) {
      if (text[pos] == ';') {  // comment to end of line
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else {
        ++pos;
      }
    }
  }

  std::string token() {
    skip_ws();
    if (pos < text.size() && text[pos] == '|') {  // quoted terminal
      size_t close = text.find('|', pos + 1);
      if (close == std::string_view::npos)
        throw ContractViolation("sexpr: unterminated quoted token");
      std::string t(text.substr(pos + 1, close - pos - 1));
      pos = close + 1;
      last_token_quoted = true;
      return t;
    }
    last_token_quoted = false;
    size_t begin = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')')
      ++pos;
    if (begin == pos) throw ContractViolation("sexpr: expected token");
    return std::string(text.substr(begin, pos - begin));
  }

  bool last_token_quoted = false;

  ProgramNode parse_node() {
    skip_ws();
    if (pos >= text.size()) throw ContractViolation("sexpr: unexpected end");
    if (text[pos] == '(') {
      ++pos;
      std::string head = token();
      auto colon = head.rfind(':');
      if (colon == std::string::npos)
        throw ContractViolation("sexpr: expected Symbol:production");
      SymbolId sym = g.symbol(head.substr(0, colon));
      int production = std::stoi(head.substr(colon + 1));
      const auto& rhs = g.production(sym, production);
      ProgramNode n;
      n.symbol = sym;
      n.nonterminal = true;
      n.production = production;
      for (size_t i = 0; i < rhs.size(); ++i) n.children.push_back(parse_node());
      skip_ws();
      if (pos >= text.size() || text[pos] != ')')
        throw ContractViolation("sexpr: expected ')'");
      ++pos;
      // children must match the production's symbol sequence
      for (size_t i = 0; i < rhs.size(); ++i)
        if (n.children[i].symbol != rhs[i])
          throw ContractViolation("sexpr: child symbol mismatch");
      return n;
    }
    std::string t = token();
    ProgramNode n;
    if (!last_token_quoted && t.size() > 1 && t[0] == '?') {
      n.symbol = g.symbol(t.substr(1));
      n.nonterminal = true;
    } else {
      n.symbol = g.symbol(t);
      n.nonterminal = g.is_nonterminal(n.symbol);
      if (n.nonterminal)
        throw ContractViolation("sexpr: bare nonterminal; use ?" + t);
    }
    return n;
  }
};

void yield_node(const Grammar& g, const ProgramNode& n, std::string& out) {
  if (!n.expanded()) {
    if (!out.empty()) out += ' ';
    out += g.name(n.symbol);
    return;
  }
  for (const auto& c : n.children) yield_node(g, c, out);
}

bool prefix_match(const ProgramNode& node, const ProgramNode& prefix) {
  if (prefix.symbol != node.symbol) return false;
  if (!prefix.expanded()) return true;
  if (node.production != prefix.production) return false;
  for (size_t i = 0; i < prefix.children.size(); ++i)
    if (!prefix_match(node.children[i], prefix.children[i])) return false;
  return true;
}

}  // namespace

std::string to_sexpr(const Grammar& g, const Program& p) {
  std::string out;
  print_node(g, p.root(), out);
  return out;
}

Program parse_sexpr(const Grammar& g, std::string_view text) {
  SexprParser parser{g, text};
  Program p;
  p.root() = parser.parse_node();
  parser.skip_ws();
  if (parser.pos != text.size())
    throw ContractViolation("sexpr: trailing input");
  return p;
}

std::string to_text(const Grammar& g, const Program& p) {
  std::string out;
  yield_node(g, p.root(), out);
  return out;
}

bool shares_prefix(const Program& p, const Program& prefix) {
  return prefix_match(p.root(), prefix.root());
}

}  // namespace synth
