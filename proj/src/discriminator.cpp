#include "treegan/discriminator.hpp"

#include <cmath>

namespace treegan {

DiscriminatorModel DiscriminatorModel::create(const Grammar& g, int embed_dim, int hidden_dim,
                                              bool use_production_ids) {
  DiscriminatorModel m;
  m.embed_dim = embed_dim;
  m.hidden_dim = hidden_dim;
  m.use_production_ids = use_production_ids;
  m.n_symbols = static_cast<int>(g.symbols.size());
  m.n_productions = static_cast<int>(g.productions.size());
  m.params.add("disc.emb_sym", m.n_symbols, embed_dim);
  if (use_production_ids) m.params.add("disc.emb_prod", m.n_productions + 1, embed_dim);
  const int input_dim = use_production_ids ? 2 * embed_dim : embed_dim;
  add_lstm_params(m.params, "disc.tree.", input_dim, hidden_dim);
  m.params.add("disc.head.W", 1, hidden_dim);
  m.params.add("disc.head.b", 1, 1);
  return m;
}

void DiscriminatorModel::check_grammar(const Grammar& g) const {
  if (n_symbols != static_cast<int>(g.symbols.size()) ||
      n_productions != static_cast<int>(g.productions.size()))
    throw NeuralError("discriminator model dimensioned for a different grammar");
}

namespace {

// Production row index for a node: interior nodes map to the production
// matching their children (or the "none" row when nothing matches, as in
// twisted splices); leaves always use the "none" row.
int production_row(const DiscriminatorModel& model, const Grammar& g, const ParseTree& tree,
                   int idx) {
  const TreeNode& n = tree.nodes[static_cast<size_t>(idx)];
  if (n.children.empty() || !g.is_nonterminal(n.symbol)) return model.n_productions;
  std::vector<int> labels;
  for (int c : n.children) labels.push_back(tree.nodes[static_cast<size_t>(c)].symbol);
  int pid = g.find_production(n.symbol, labels);
  return pid < 0 ? model.n_productions : pid;
}

void check_labels(const DiscriminatorModel& model, const ParseTree& tree) {
  for (const TreeNode& n : tree.nodes) {
    if (n.symbol < 0 || n.symbol >= model.n_symbols)
      throw NeuralError("unknown node label id " + std::to_string(n.symbol));
  }
}

// Post-order node indices (children before parents), iterative.
std::vector<int> post_order(const ParseTree& tree) {
  std::vector<int> order;
  std::vector<std::pair<int, size_t>> stack{{tree.root, 0}};
  while (!stack.empty()) {
    auto& [idx, next] = stack.back();
    const TreeNode& n = tree.nodes[static_cast<size_t>(idx)];
    if (next < n.children.size()) {
      stack.emplace_back(n.children[next++], 0);
      continue;
    }
    order.push_back(idx);
    stack.pop_back();
  }
  return order;
}

}  // namespace

Tape::Id disc_encode_tree(Tape& tape, DiscriminatorModel& model, const Grammar& g,
                          const ParseTree& tree) {
  model.check_grammar(g);
  check_labels(model, tree);
  std::vector<TapeState> states(tree.nodes.size());
  for (int idx : post_order(tree)) {
    const TreeNode& n = tree.nodes[static_cast<size_t>(idx)];
    Tape::Id x = tape.param_row(model.params.at("disc.emb_sym"), n.symbol);
    if (model.use_production_ids)
      x = tape.concat(x, tape.param_row(model.params.at("disc.emb_prod"),
                                        production_row(model, g, tree, idx)));
    std::vector<TapeState> children;
    for (int c : n.children) children.push_back(states[static_cast<size_t>(c)]);
    states[static_cast<size_t>(idx)] = treelstm_node(tape, model.params, "disc.tree.", x, children);
  }
  return states[static_cast<size_t>(tree.root)].h;
}

Tape::Id disc_score(Tape& tape, DiscriminatorModel& model, const Grammar& g,
                    const ParseTree& tree) {
  Tape::Id h_r = disc_encode_tree(tape, model, g, tree);
  return affine_sigmoid(tape, model.params, "disc.head.W", "disc.head.b", h_r);
}

Vec plain_encode_tree(const DiscriminatorModel& model, const Grammar& g, const ParseTree& tree) {
  model.check_grammar(g);
  check_labels(model, tree);
  const Param& emb_sym = model.params.at("disc.emb_sym");
  std::vector<PlainState> states(tree.nodes.size());
  for (int idx : post_order(tree)) {
    const TreeNode& n = tree.nodes[static_cast<size_t>(idx)];
    size_t off = static_cast<size_t>(n.symbol) * emb_sym.cols;
    Vec x(emb_sym.value.begin() + static_cast<long>(off),
          emb_sym.value.begin() + static_cast<long>(off + emb_sym.cols));
    if (model.use_production_ids) {
      const Param& emb_prod = model.params.at("disc.emb_prod");
      size_t poff = static_cast<size_t>(production_row(model, g, tree, idx)) * emb_prod.cols;
      x.insert(x.end(), emb_prod.value.begin() + static_cast<long>(poff),
               emb_prod.value.begin() + static_cast<long>(poff + emb_prod.cols));
    }
    std::vector<PlainState> children;
    for (int c : n.children) children.push_back(states[static_cast<size_t>(c)]);
    states[static_cast<size_t>(idx)] = plain_treelstm_node(model.params, "disc.tree.", x, children);
  }
  return states[static_cast<size_t>(tree.root)].h;
}

double plain_score(const DiscriminatorModel& model, const Grammar& g, const ParseTree& tree) {
  Vec h_r = plain_encode_tree(model, g, tree);
  Vec logit = plain_affine(model.params, "disc.head.W", "disc.head.b", h_r);
  return 1.0 / (1.0 + std::exp(-logit[0]));
}

}  // namespace treegan
