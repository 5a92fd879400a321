#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "treegan/datasets.hpp"
#include "treegan/parse_tree.hpp"

using namespace treegan;

namespace {

const char* kPal = "start P ; term 0 1 ; P -> eps | 0 | 1 | 0 P 0 | 1 P 1 ;";

// The canonical ten-step derivation of "010010": four rule choices plus six
// terminal emissions, parent links pointing at the initiating steps.
ActionSequence canonical_010010(const Grammar& g) {
  ActionVocabulary v = action_vocab(g);
  int t0 = v.terminal_action(g.term_index(g.symbol_id("0")));
  int t1 = v.terminal_action(g.term_index(g.symbol_id("1")));
  ActionSequence seq;
  int actions[10] = {3, t0, 4, t1, 3, t0, 0, t0, t1, t0};
  int parents[10] = {0, 1, 1, 3, 3, 5, 5, 5, 3, 1};
  for (int i = 0; i < 10; ++i) seq.steps.push_back({actions[i], parents[i], -1});
  return seq;
}

std::vector<int> tokens(const Grammar& g, const std::string& s) {
  std::vector<int> out;
  for (char c : s) out.push_back(g.symbol_id(std::string(1, c)));
  return out;
}

std::string concat_yield(const ParseTree& t, const Grammar& g) {
  std::string out;
  for (const auto& tok : yield_texts(t, g)) out += tok;
  return out;
}

}  // namespace

TEST_CASE("the ten-step sequence replays to the 010010 tree") {
  Grammar g = parse_grammar_text(kPal);
  ActionSequence seq = canonical_010010(g);
  ParseTree t = actions_to_tree(seq, g);
  CHECK(validate_tree(t, g).empty());
  CHECK(concat_yield(t, g) == "010010");
  CHECK(yield_of(t, g) == tokens(g, "010010"));

  ActionSequence back = tree_to_actions(t, g);
  REQUIRE(back.steps.size() == 10);
  for (size_t i = 0; i < 10; ++i) {
    CHECK(back.steps[i].action == seq.steps[i].action);
    CHECK(back.steps[i].parent_step == seq.steps[i].parent_step);
  }
}

TEST_CASE("epsilon-only and single-rule trees") {
  Grammar g = parse_grammar_text(kPal);
  ActionSequence eps_seq;
  eps_seq.steps.push_back({0, 0, -1});
  ParseTree t = actions_to_tree(eps_seq, g);
  CHECK(yield_of(t, g).empty());
  CHECK(t.nodes.size() == 2);  // P with an eps leaf materialized

  ActionVocabulary v = action_vocab(g);
  ActionSequence small;
  small.steps.push_back({1, 0, -1});
  small.steps.push_back({v.terminal_action(g.term_index(g.symbol_id("0"))), 1, -1});
  ParseTree t2 = actions_to_tree(small, g);
  CHECK(concat_yield(t2, g) == "0");
  CHECK(tree_to_actions(t2, g).steps[1].parent_step == 1);
}

TEST_CASE("replay rejects truncated and overlong sequences") {
  Grammar g = parse_grammar_text(kPal);
  ActionVocabulary v = action_vocab(g);
  int t0 = v.terminal_action(g.term_index(g.symbol_id("0")));

  ActionSequence truncated;
  truncated.steps.push_back({3, 0, -1});
  truncated.steps.push_back({t0, 1, -1});
  truncated.steps.push_back({0, 1, -1});
  CHECK_THROWS_AS(actions_to_tree(truncated, g), TreeError);

  ActionSequence trailing;
  trailing.steps.push_back({0, 0, -1});
  trailing.steps.push_back({t0, 1, -1});
  CHECK_THROWS_AS(actions_to_tree(trailing, g), TreeError);

  ActionSequence illegal;  // a terminal action where a rule is required
  illegal.steps.push_back({t0, 0, -1});
  CHECK_THROWS_AS(actions_to_tree(illegal, g), TreeError);
}

TEST_CASE("parse_sequence recovers the canonical derivations") {
  Grammar g = parse_grammar_text(kPal);
  ActionSequence want = canonical_010010(g);
  ActionSequence got = parse_sequence(tokens(g, "010010"), g);
  REQUIRE(got.steps.size() == want.steps.size());
  for (size_t i = 0; i < want.steps.size(); ++i) {
    CHECK(got.steps[i].action == want.steps[i].action);
    CHECK(got.steps[i].parent_step == want.steps[i].parent_step);
  }

  ActionSequence empty = parse_sequence({}, g);
  REQUIRE(empty.steps.size() == 1);
  CHECK(empty.steps[0].action == 0);  // P -> eps

  CHECK_THROWS_AS(parse_sequence(tokens(g, "01"), g), ParseError);
  CHECK_THROWS_AS(parse_sequence(tokens(g, "0110101"), g), ParseError);
}

TEST_CASE("validation names broken properties") {
  Grammar g = parse_grammar_text(kPal);
  ParseTree t = actions_to_tree(canonical_010010(g), g);
  CHECK(validate_tree(t, g).empty());

  ParseTree bad = t;
  bad.nodes[1].symbol = g.symbol_id("1");  // leaf now disagrees with the rule
  CHECK_FALSE(validate_tree(bad, g).empty());

  ParseTree wrong_root = t;
  wrong_root.nodes[static_cast<size_t>(wrong_root.root)].symbol = g.symbol_id("0");
  CHECK_FALSE(validate_tree(wrong_root, g).empty());
}

TEST_CASE("corpus roundtrips: string -> actions -> tree -> yield") {
  Rng rng(11);
  PldSpec spec;
  spec.n_train = 300;
  spec.n_test = 10;
  PldData data = gen_pld(spec, rng);
  for (const auto& s : data.train) {
    std::vector<int> toks;
    for (char c : s) toks.push_back(data.grammar.symbol_id(std::string(1, c)));
    ActionSequence seq = parse_sequence(toks, data.grammar);
    ParseTree t = actions_to_tree(seq, data.grammar);
    CHECK(concat_yield(t, data.grammar) == s);
    ActionSequence seq2 = tree_to_actions(t, data.grammar);
    REQUIRE(seq2.steps.size() == seq.steps.size());
    for (size_t i = 0; i < seq.steps.size(); ++i)
      CHECK(seq2.steps[i].action == seq.steps[i].action);
  }
}

TEST_CASE("twist breaks property 4 and reports inapplicability") {
  Rng rng(5);
  Grammar pal = parse_grammar_text(kPal);
  ParseTree pal_tree = actions_to_tree(canonical_010010(pal), pal);
  CHECK_FALSE(twist(pal_tree, pal, rng).has_value());  // single nonterminal

  SqlSpec sql = gen_sql_spec(sql_a_desk_params(), rng);
  std::vector<std::string> corpus = gen_sql_corpus(sql.grammar, sql.schema, 200, rng);
  int twisted = 0;
  for (const auto& line : corpus) {
    std::vector<int> ids;
    for (const auto& tok : sql_tokenize(line)) ids.push_back(sql.grammar.symbol_id(tok));
    ParseTree t = actions_to_tree(parse_sequence(ids, sql.grammar), sql.grammar);
    auto tw = twist(t, sql.grammar, rng);
    if (!tw) continue;
    ++twisted;
    CHECK_FALSE(validate_tree(*tw, sql.grammar).empty());
  }
  CHECK(twisted > 100);  // most SQL trees have two distinct interior labels
}

TEST_CASE("twist_or_corrupt always yields an invalid tree, deterministically") {
  Grammar pal = parse_grammar_text(kPal);
  ParseTree t = actions_to_tree(canonical_010010(pal), pal);
  Rng a(77), b(77);
  ParseTree ta = twist_or_corrupt(t, pal, a);
  ParseTree tb = twist_or_corrupt(t, pal, b);
  CHECK_FALSE(validate_tree(ta, pal).empty());
  REQUIRE(ta.nodes.size() == tb.nodes.size());
  for (size_t i = 0; i < ta.nodes.size(); ++i) CHECK(ta.nodes[i].symbol == tb.nodes[i].symbol);
}
