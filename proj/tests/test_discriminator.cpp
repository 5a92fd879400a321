#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "treegan/discriminator.hpp"
#include "treegan/training.hpp"

using namespace treegan;

namespace {

const char* kPal = "start P ; term 0 1 ; P -> eps | 0 | 1 | 0 P 0 | 1 P 1 ;";

ParseTree tree_of(const Grammar& g, const std::string& text) {
  return actions_to_tree(parse_sequence(tokens_from_text(text, g), g), g);
}

}  // namespace

TEST_CASE("zero parameters score exactly one half") {
  Grammar g = parse_grammar_text(kPal);
  DiscriminatorModel m = DiscriminatorModel::create(g, 4, 5);
  for (const char* s : {"", "0", "0 1 0", "1 0 0 0 1"})
    CHECK(plain_score(m, g, tree_of(g, s)) == doctest::Approx(0.5));
}

TEST_CASE("tape and plain scoring agree bit for bit") {
  Grammar g = parse_grammar_text(kPal);
  DiscriminatorModel m = DiscriminatorModel::create(g, 4, 5);
  Rng rng(7);
  m.params.init_uniform(rng, 0.4);
  for (const char* s : {"", "1", "0 1 1 0", "1 0 1 0 1"}) {
    ParseTree t = tree_of(g, s);
    Tape tape;
    auto score = disc_score(tape, m, g, t);
    CHECK(tape.scalar(score) == plain_score(m, g, t));  // bitwise
  }
}

TEST_CASE("child-sum encoding is invariant to child order without production ids") {
  Grammar g = parse_grammar_text(kPal);
  DiscriminatorModel m = DiscriminatorModel::create(g, 4, 5, /*use_production_ids=*/false);
  Rng rng(11);
  m.params.init_uniform(rng, 0.4);

  ParseTree t = tree_of(g, "0 1 0");
  double original = plain_score(m, g, t);

  ParseTree shuffled = t;
  auto& kids = shuffled.nodes[static_cast<size_t>(shuffled.root)].children;
  REQUIRE(kids.size() == 3);
  std::reverse(kids.begin(), kids.end());
  CHECK(plain_score(m, g, shuffled) == doctest::Approx(original).epsilon(1e-12));
}

TEST_CASE("score gradients pass a finite-difference check") {
  Grammar g = parse_grammar_text(kPal);
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    DiscriminatorModel m = DiscriminatorModel::create(g, 3, 4);
    Rng rng(seed);
    m.params.init_uniform(rng, 0.4);
    ParseTree real = tree_of(g, "1 0 1");
    ParseTree fake = tree_of(g, "0 0 0");
    auto loss_fn = [&]() {
      Tape tape;
      auto l = tape.add(tape.bce_from_prob(disc_score(tape, m, g, real), 1.0),
                        tape.bce_from_prob(disc_score(tape, m, g, fake), 0.0));
      double v = tape.scalar(l);
      tape.backward(l);
      return v;
    };
    auto rep = grad_check(loss_fn, m.params, 1e-5);
    INFO("seed ", seed, " worst ", rep.worst_param);
    CHECK(rep.max_rel_err < 1e-4);
  }
}

TEST_CASE("training separates real palindromes from twisted negatives") {
  Grammar g = parse_grammar_text(kPal);
  DiscriminatorModel m = DiscriminatorModel::create(g, 6, 8);
  Rng rng(19);
  m.params.init_uniform(rng);

  std::vector<ParseTree> reals, fakes;
  for (const char* s : {"0 1 1 0", "1 0 0 1", "0 0 0 0 0", "1 1 0 1 1", "0 1 0 1 0"})
    reals.push_back(tree_of(g, s));
  for (const auto& r : reals) fakes.push_back(twist_or_corrupt(r, g, rng));
  for (const auto& f : fakes) CHECK_FALSE(validate_tree(f, g).empty());

  std::vector<const ParseTree*> rb, fb;
  for (const auto& r : reals) rb.push_back(&r);
  for (const auto& f : fakes) fb.push_back(&f);

  double first = discriminator_step(m, g, rb, fb, 0.2, 5.0);
  double last = first;
  for (int i = 0; i < 400; ++i) last = discriminator_step(m, g, rb, fb, 0.2, 5.0);
  CHECK(last < first);
  for (const auto& r : reals)
    for (const auto& f : fakes) CHECK(plain_score(m, g, r) > plain_score(m, g, f));
}

TEST_CASE("model and grammar must match") {
  Grammar g = parse_grammar_text(kPal);
  DiscriminatorModel m = DiscriminatorModel::create(g, 4, 4);
  Grammar other = parse_grammar_text("start S ; term a b ; S -> a | a S | b S ;");
  CHECK_THROWS(m.check_grammar(other));
}
