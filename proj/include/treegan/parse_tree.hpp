#pragma once

#include <optional>
#include <string>
#include <vector>

#include "treegan/grammar.hpp"
#include "treegan/rng.hpp"

namespace treegan {

struct TreeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  size_t prefix_len;  // longest recognized prefix, in tokens
  ParseError(const std::string& msg, size_t prefix) : std::runtime_error(msg), prefix_len(prefix) {}
};

struct TreeNode {
  int symbol = -1;            // symbol id
  int parent = -1;            // node index, -1 at root
  std::vector<int> children;  // node indices, left to right
};

// Index-based arena; immutable value once built.
struct ParseTree {
  std::vector<TreeNode> nodes;
  int root = 0;

  int add_node(int symbol, int parent) {
    nodes.push_back({symbol, parent, {}});
    int idx = static_cast<int>(nodes.size()) - 1;
    if (parent >= 0) nodes[static_cast<size_t>(parent)].children.push_back(idx);
    return idx;
  }
};

struct ActionStep {
  int action = -1;       // production id, or terminal action (n_productions + slot)
  int parent_step = 0;   // 1-based step that initiated this node; 0 for step 1
  int head = -1;         // symbol id being expanded / emitted
};

struct ActionSequence {
  std::vector<ActionStep> steps;  // steps[0] is step 1
};

// Empty result means valid (parse-tree properties 1-4 hold).
std::vector<std::string> validate_tree(const ParseTree& tree, const Grammar& g);

// Leaf labels left to right, epsilon elided. Throws TreeError naming the
// violated property on a malformed tree.
std::vector<int> yield_of(const ParseTree& tree, const Grammar& g);

std::vector<std::string> yield_texts(const ParseTree& tree, const Grammar& g);
std::string yield_string(const ParseTree& tree, const Grammar& g);

// Depth-first left-to-right linearization (Lemma-1 direction tree -> actions).
ActionSequence tree_to_actions(const ParseTree& tree, const Grammar& g);

// Replay (Lemma-1 direction actions -> tree). Throws TreeError on an illegal
// action, premature end, or trailing actions.
ParseTree actions_to_tree(const ActionSequence& seq, const Grammar& g);

// Earley recognizer + leftmost extraction with lowest-production-id
// tie-breaking. Throws ParseError (with longest recognized prefix) when the
// tokens are not in L(g).
ActionSequence parse_sequence(const std::vector<int>& tokens, const Grammar& g);

// Tokenize a corpus line against g's terminal texts. Throws ParseError for
// unknown tokens.
std::vector<int> tokens_from_text(const std::string& line, const Grammar& g);

// Swap two disjoint interior subtrees with different head labels such that
// property 4 breaks at both splice points. nullopt when no such pair exists
// (e.g. single-nonterminal grammars).
std::optional<ParseTree> twist(const ParseTree& tree, const Grammar& g, Rng& rng);

// Fallback negative for grammars where twist is inapplicable: same-head
// subtree swap (when yields differ) plus a wrong-terminal leaf corruption.
// Always returns a tree failing validation.
ParseTree twist_or_corrupt(const ParseTree& tree, const Grammar& g, Rng& rng);

}  // namespace treegan
