#pragma once

#include "treegan/grammar.hpp"
#include "treegan/neural.hpp"
#include "treegan/parse_tree.hpp"

namespace treegan {

// Child-Sum Tree-LSTM discriminator. Each node's input embeds its label
// symbol; with use_production_ids the production applied at interior nodes
// is embedded too (child-sum encoding is order-invariant, the production id
// restores the ordering information). Twisted splices and leaves use a
// dedicated "none" row.
struct DiscriminatorModel {
  int embed_dim = 0;
  int hidden_dim = 0;
  bool use_production_ids = true;
  int n_symbols = 0;
  int n_productions = 0;
  ParamStore params;

  static DiscriminatorModel create(const Grammar& g, int embed_dim, int hidden_dim,
                                   bool use_production_ids = true);
  void check_grammar(const Grammar& g) const;
};

// Bottom-up encoding; returns the root hidden state node.
Tape::Id disc_encode_tree(Tape& tape, DiscriminatorModel& model, const Grammar& g,
                          const ParseTree& tree);

// Confidence that the tree is a real instance, in (0,1).
Tape::Id disc_score(Tape& tape, DiscriminatorModel& model, const Grammar& g,
                    const ParseTree& tree);

Vec plain_encode_tree(const DiscriminatorModel& model, const Grammar& g, const ParseTree& tree);
double plain_score(const DiscriminatorModel& model, const Grammar& g, const ParseTree& tree);

}  // namespace treegan
