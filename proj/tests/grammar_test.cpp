#include <doctest.h>

#include <map>
#include <set>

#include "synth/grammar.hpp"

using namespace synth;

namespace {

const char* kToyGrammar = R"(
# toy strategy language
I -> C | if ( B ) then C
C -> c1 | c2
B -> b1 | b2
)";

Grammar toy() { return Grammar::parse(kToyGrammar); }

Program toy_program(const Grammar& g, std::initializer_list<int> productions) {
  Program p = Program::hole(g);
  for (int production : productions) p = expand_leftmost(g, p, production);
  return p;
}

int depth_of(const ProgramNode& n) {
  int best = 0;
  for (const auto& c : n.children) best = std::max(best, 1 + depth_of(c));
  return best;
}

ProgramNode* mutable_node_at(ProgramNode& root, const NodePath& path) {
  ProgramNode* n = &root;
  for (int i : path) n = &n->children[i];
  return n;
}

// True iff q equals p with exactly one subtree (rooted at some nonterminal
// node of p) swapped out.
bool one_subtree_replacement(const Program& p, const Program& q) {
  if (p == q) return true;
  for (const NodePath& path : nonterminal_node_paths(p)) {
    const ProgramNode* replacement = node_at(q, path);
    if (replacement == nullptr) continue;
    Program r = p;
    *mutable_node_at(r.root(), path) = *replacement;
    if (r == q) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("grammar construction and validation") {
  Grammar g = toy();
  CHECK(g.name(g.start()) == "I");
  CHECK(g.is_nonterminal(g.symbol("I")));
  CHECK(g.is_nonterminal(g.symbol("B")));
  CHECK(!g.is_nonterminal(g.symbol("c1")));
  CHECK(!g.is_nonterminal(g.symbol("if")));
  CHECK(g.production_count(g.symbol("I")) == 2);
  CHECK(g.production(g.symbol("I"), 1).size() == 6);
  CHECK(g.min_depth(g.symbol("c1")) == 0);
  CHECK(g.min_depth(g.symbol("C")) == 1);
  CHECK(g.min_depth(g.symbol("I")) == 2);

  CHECK_THROWS_AS(Grammar::parse("A -> A b"), ContractViolation);  // dead nonterminal
  CHECK_THROWS_AS(Grammar::parse("A -> a\nA -> b"), ContractViolation);
  CHECK_THROWS_AS(Grammar::parse("A = a"), ContractViolation);
  CHECK_THROWS_AS(g.symbol("nope"), ContractViolation);
  CHECK_THROWS_AS(g.production(g.symbol("I"), 7), ContractViolation);
}

TEST_CASE("cheapest productions drive depth-limited termination") {
  Grammar g = Grammar::parse("X -> a | X X");
  SymbolId x = g.symbol("X");
  CHECK(g.min_depth(x) == 1);
  CHECK(g.production_cost(x, 0) == 1);
  CHECK(g.cheapest_productions(x) == std::vector<int>{0});

  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    Program p = random_program(g, rng, 1);
    CHECK(p.complete());
    CHECK(depth_of(p.root()) <= 2);  // past the limit only X -> a is eligible
  }
  CHECK_THROWS_AS(random_program(g, rng, 0), ContractViolation);
}

TEST_CASE("random_program yields complete programs with uniform rule choice") {
  Grammar g = toy();
  Rng rng(7);
  std::map<int, int> top_level;
  for (int i = 0; i < 10'000; ++i) {
    Program p = random_program(g, rng);
    REQUIRE(p.complete());
    top_level[p.root().production]++;
  }
  CHECK(top_level[0] + top_level[1] == 10'000);
  CHECK(std::abs(top_level[0] / 10'000.0 - 0.5) < 0.02);

  Grammar single = Grammar::parse("I -> c1");
  Rng rng2(1);
  for (int i = 0; i < 20; ++i) {
    Program p = random_program(single, rng2);
    CHECK(to_text(single, p) == "c1");
  }
}

TEST_CASE("expand_leftmost follows the worked derivation steps") {
  Grammar g = toy();
  Program partial = toy_program(g, {1});  // if ( B ) then C
  CHECK(to_text(g, partial) == "if ( B ) then C");
  Program expanded = expand_leftmost(g, partial, 0);
  CHECK(to_text(g, expanded) == "if ( b1 ) then C");
  CHECK(to_text(g, partial) == "if ( B ) then C");  // input unchanged

  Program single_step = expand_leftmost(g, Program::hole(g), 0);
  CHECK(to_text(g, single_step) == "C");

  Program complete = toy_program(g, {1, 0, 0});
  CHECK(to_text(g, complete) == "if ( b1 ) then c1");
  CHECK_THROWS_AS(expand_leftmost(g, complete, 0), ContractViolation);
  CHECK_THROWS_AS(expand_leftmost(g, partial, 5), ContractViolation);
}

TEST_CASE("enumerate_children lists one child per production of the leftmost hole") {
  Grammar g = toy();
  Program partial = toy_program(g, {1});
  auto children = enumerate_children(g, partial);
  REQUIRE(children.size() == 2);
  CHECK(to_text(g, children[0]) == "if ( b1 ) then C");
  CHECK(to_text(g, children[1]) == "if ( b2 ) then C");

  CHECK(enumerate_children(g, toy_program(g, {0, 0})).empty());

  auto roots = enumerate_children(g, Program::hole(g));
  REQUIRE(roots.size() == 2);
  CHECK(to_text(g, roots[0]) == "C");
  CHECK(to_text(g, roots[1]) == "if ( B ) then C");
}

TEST_CASE("derivation_sequence round-trips with expand_leftmost") {
  Grammar g = toy();
  Program p = toy_program(g, {1, 0, 0});
  Derivation d = derivation_sequence(p);
  REQUIRE(d.size() == 3);
  CHECK(d[0] == DerivationStep{g.symbol("I"), 1});
  CHECK(d[1] == DerivationStep{g.symbol("B"), 0});
  CHECK(d[2] == DerivationStep{g.symbol("C"), 0});
  CHECK(program_from_derivation(g, d) == p);

  CHECK(derivation_sequence(Program::hole(g)).empty());

  Rng rng(11);
  for (int i = 0; i < 1'000; ++i) {
    Program q = random_program(g, rng);
    Derivation dq = derivation_sequence(q);
    CHECK(static_cast<int>(dq.size()) == internal_node_count(q));
    CHECK(program_from_derivation(g, dq) == q);
  }
}

TEST_CASE("neighbor replaces exactly one subtree, uniformly chosen") {
  Grammar g = toy();
  Program p = toy_program(g, {1, 0, 0});  // if ( b1 ) then c1

  std::set<std::string> seen;
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    Program q = neighbor(g, p, rng);
    CHECK(q.complete());
    CHECK(one_subtree_replacement(p, q));
    seen.insert(to_text(g, q));
  }
  // replacing the C subtree with c2 must occur: "if b1 then c2"
  CHECK(seen.count("if ( b1 ) then c2") == 1);
  // replacing the root can reach the single-command programs
  CHECK(seen.count("c1") + seen.count("c2") > 0);

  // candidate sets: every nonterminal node without the restriction,
  // only the holes with it
  Program partial = toy_program(g, {1});
  CHECK(nonterminal_node_paths(partial).size() == 3);  // I, B, C
  auto holes = hole_paths(partial);
  REQUIRE(holes.size() == 2);
  CHECK(node_at(partial, holes[0])->symbol == g.symbol("B"));
  CHECK(node_at(partial, holes[1])->symbol == g.symbol("C"));

  Rng rng2(5);
  for (int i = 0; i < 100; ++i) {
    Program q = neighbor(g, partial, rng2, /*leaf_restricted=*/true);
    CHECK(q.root().production == 1);  // the prefix I -> if(B) then C survives
    CHECK(shares_prefix(q, partial));
  }
  CHECK_THROWS_AS(neighbor(g, p, rng2, /*leaf_restricted=*/true), ContractViolation);
}

TEST_CASE("toy grammar program space enumerates to exactly 6 programs") {
  Grammar g = toy();
  std::set<std::string> complete;
  std::vector<Program> frontier{Program::hole(g)};
  while (!frontier.empty()) {
    Program p = std::move(frontier.back());
    frontier.pop_back();
    if (p.complete()) {
      complete.insert(to_text(g, p));
      continue;
    }
    for (Program& c : enumerate_children(g, p)) frontier.push_back(std::move(c));
  }
  CHECK(complete == std::set<std::string>{"c1", "c2", "if ( b1 ) then c1",
                                          "if ( b1 ) then c2", "if ( b2 ) then c1",
                                          "if ( b2 ) then c2"});
}

TEST_CASE("sexpr form is canonical and parses back") {
  Grammar g = toy();
  Program p = toy_program(g, {1, 1, 0});
  std::string s = to_sexpr(g, p);
  CHECK(s == "(I:1 if |(| (B:1 b2) |)| then (C:0 c1))");
  CHECK(parse_sexpr(g, s) == p);

  Program partial = toy_program(g, {1});
  std::string sp = to_sexpr(g, partial);
  CHECK(sp == "(I:1 if |(| ?B |)| then ?C)");
  CHECK(parse_sexpr(g, sp) == partial);
  CHECK(parse_sexpr(g, "; comment line\n" + sp) == partial);

  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    Program q = random_program(g, rng);
    CHECK(parse_sexpr(g, to_sexpr(g, q)) == q);
  }

  CHECK_THROWS_AS(parse_sexpr(g, "(I:1 if ("), ContractViolation);
  CHECK_THROWS_AS(parse_sexpr(g, "(I:0 (B:0 b1))"), ContractViolation);
  CHECK_THROWS_AS(parse_sexpr(g, "B"), ContractViolation);
}

TEST_CASE("random completion fills every hole and keeps the prefix") {
  Grammar g = toy();
  Program partial = toy_program(g, {1});
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    Program full = random_completion(g, partial, rng);
    CHECK(full.complete());
    CHECK(shares_prefix(full, partial));
  }
}
