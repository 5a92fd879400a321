#include "treegan/parse_tree.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_set>

namespace treegan {

std::vector<std::string> validate_tree(const ParseTree& tree, const Grammar& g) {
  std::vector<std::string> violations;
  if (tree.nodes.empty()) return {"property 1: empty tree"};
  if (tree.nodes[static_cast<size_t>(tree.root)].symbol != g.start)
    violations.push_back("property 1: root node " + std::to_string(tree.root) +
                         " is not labeled by the start symbol");
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& n = tree.nodes[i];
    if (n.children.empty()) {
      if (g.is_nonterminal(n.symbol))
        violations.push_back("property 3: leaf node " + std::to_string(i) +
                             " labeled by nonterminal '" + g.sym(n.symbol).text + "'");
      continue;
    }
    if (!g.is_nonterminal(n.symbol)) {
      violations.push_back("property 2: interior node " + std::to_string(i) +
                           " labeled by terminal");
      continue;
    }
    std::vector<int> child_labels;
    child_labels.reserve(n.children.size());
    for (int c : n.children) child_labels.push_back(tree.nodes[static_cast<size_t>(c)].symbol);
    if (g.find_production(n.symbol, child_labels) < 0)
      violations.push_back("property 4: node " + std::to_string(i) + " ('" +
                           g.sym(n.symbol).text + "') children match no production");
  }
  return violations;
}

namespace {
void require_valid(const ParseTree& tree, const Grammar& g) {
  auto v = validate_tree(tree, g);
  if (!v.empty()) throw TreeError(v.front());
}
}  // namespace

std::vector<int> yield_of(const ParseTree& tree, const Grammar& g) {
  require_valid(tree, g);
  std::vector<int> out;
  std::vector<int> stack{tree.root};
  while (!stack.empty()) {
    int idx = stack.back();
    stack.pop_back();
    const TreeNode& n = tree.nodes[static_cast<size_t>(idx)];
    if (n.children.empty()) {
      if (!g.is_epsilon(n.symbol)) out.push_back(n.symbol);
      continue;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<std::string> yield_texts(const ParseTree& tree, const Grammar& g) {
  std::vector<std::string> out;
  for (int id : yield_of(tree, g)) out.push_back(g.sym(id).text);
  return out;
}

std::string yield_string(const ParseTree& tree, const Grammar& g) {
  std::string out;
  for (int id : yield_of(tree, g)) {
    if (!out.empty()) out += ' ';
    out += g.sym(id).text;
  }
  return out;
}

ActionSequence tree_to_actions(const ParseTree& tree, const Grammar& g) {
  require_valid(tree, g);
  ActionVocabulary vocab = action_vocab(g);
  ActionSequence seq;
  // DFS with explicit (node, parent_step) frames; parent_step is the 1-based
  // step at which the node was initiated.
  std::vector<std::pair<int, int>> stack{{tree.root, 0}};
  while (!stack.empty()) {
    auto [idx, parent_step] = stack.back();
    stack.pop_back();
    const TreeNode& n = tree.nodes[static_cast<size_t>(idx)];
    int step = static_cast<int>(seq.steps.size()) + 1;
    if (n.children.empty()) {
      if (g.is_epsilon(n.symbol)) continue;  // epsilon leaves emit nothing
      seq.steps.push_back({vocab.terminal_action(g.term_index(n.symbol)), parent_step, n.symbol});
      continue;
    }
    std::vector<int> child_labels;
    for (int c : n.children) child_labels.push_back(tree.nodes[static_cast<size_t>(c)].symbol);
    int pid = g.find_production(n.symbol, child_labels);
    seq.steps.push_back({pid, parent_step, n.symbol});
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it)
      stack.emplace_back(*it, step);
  }
  return seq;
}

ParseTree actions_to_tree(const ActionSequence& seq, const Grammar& g) {
  ActionVocabulary vocab = action_vocab(g);
  ParseTree tree;
  tree.root = tree.add_node(g.start, -1);

  struct Slot {
    int node;
    int parent_step;
  };
  std::vector<Slot> pending{{tree.root, 0}};

  for (size_t i = 0; i < seq.steps.size(); ++i) {
    int step = static_cast<int>(i) + 1;
    const ActionStep& st = seq.steps[i];
    if (pending.empty())
      throw TreeError("trailing action at step " + std::to_string(step) + " after completion");
    Slot slot = pending.back();
    pending.pop_back();
    TreeNode& node = tree.nodes[static_cast<size_t>(slot.node)];
    if (st.parent_step != slot.parent_step)
      throw TreeError("step " + std::to_string(step) + ": parent_step " +
                      std::to_string(st.parent_step) + " does not match expected " +
                      std::to_string(slot.parent_step));
    if (st.head >= 0 && st.head != node.symbol)
      throw TreeError("step " + std::to_string(step) + ": head mismatch");
    if (g.is_nonterminal(node.symbol)) {
      if (!vocab.is_production(st.action) ||
          g.productions[static_cast<size_t>(st.action)].head != node.symbol)
        throw TreeError("step " + std::to_string(step) + ": illegal action for pending head '" +
                        g.sym(node.symbol).text + "'");
      const ProductionRule& p = g.productions[static_cast<size_t>(st.action)];
      std::vector<int> child_nodes;
      for (int s : p.rhs) child_nodes.push_back(tree.add_node(s, slot.node));
      for (size_t k = p.rhs.size(); k-- > 0;) {
        if (g.is_epsilon(p.rhs[k])) continue;  // epsilon leaf needs no further action
        pending.push_back({child_nodes[k], step});
      }
    } else {
      int expected = vocab.terminal_action(g.term_index(node.symbol));
      if (st.action != expected)
        throw TreeError("step " + std::to_string(step) + ": illegal action for pending terminal '" +
                        g.sym(node.symbol).text + "'");
    }
  }
  if (!pending.empty())
    throw TreeError("premature end: " + std::to_string(pending.size()) + " pending children");
  return tree;
}

std::vector<int> tokens_from_text(const std::string& line, const Grammar& g) {
  std::vector<int> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    int id = g.symbol_id(tok);
    if (id < 0 || g.is_nonterminal(id))
      throw ParseError("unknown terminal token '" + tok + "'", out.size());
    out.push_back(id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Earley recognizer with leftmost-derivation extraction.

namespace {

struct EarleyGrammar {
  const Grammar& g;
  std::vector<std::vector<int>> rhs;  // production rhs with epsilon removed
  std::vector<bool> nullable;         // by symbol id
  std::vector<int> min_len;           // min yield length by symbol id

  explicit EarleyGrammar(const Grammar& gr) : g(gr) {
    rhs.resize(g.productions.size());
    for (const auto& p : g.productions) {
      for (int s : p.rhs)
        if (!g.is_epsilon(s)) rhs[static_cast<size_t>(p.id)].push_back(s);
    }
    nullable.assign(g.symbols.size(), false);
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& p : g.productions) {
        if (nullable[static_cast<size_t>(p.head)]) continue;
        bool all = true;
        for (int s : rhs[static_cast<size_t>(p.id)]) all = all && nullable[static_cast<size_t>(s)];
        if (all) {
          nullable[static_cast<size_t>(p.head)] = true;
          changed = true;
        }
      }
    }
    constexpr int kInf = 1 << 28;
    min_len.assign(g.symbols.size(), kInf);
    for (int t : g.terminals) min_len[static_cast<size_t>(t)] = g.is_epsilon(t) ? 0 : 1;
    changed = true;
    while (changed) {
      changed = false;
      for (const auto& p : g.productions) {
        long long m = 0;
        for (int s : rhs[static_cast<size_t>(p.id)]) m += min_len[static_cast<size_t>(s)];
        if (m < min_len[static_cast<size_t>(p.head)]) {
          min_len[static_cast<size_t>(p.head)] = static_cast<int>(m);
          changed = true;
        }
      }
    }
  }
};

struct Chart {
  // completed_ends[nt_id][origin] = sorted unique end positions
  std::vector<std::vector<std::vector<int>>> completed_ends;
  size_t recognized_prefix = 0;
  bool accepted = false;
};

Chart run_earley(const EarleyGrammar& eg, const std::vector<int>& tokens) {
  const Grammar& g = eg.g;
  const int n = static_cast<int>(tokens.size());

  struct Item {
    int rule, dot, origin;
  };
  std::vector<std::vector<Item>> sets(static_cast<size_t>(n) + 1);
  std::vector<std::unordered_set<uint64_t>> seen(static_cast<size_t>(n) + 1);
  auto key = [&](const Item& it) {
    return (static_cast<uint64_t>(it.rule) << 40) ^ (static_cast<uint64_t>(it.dot) << 24) ^
           static_cast<uint64_t>(it.origin);
  };
  auto add = [&](int set, Item it) {
    if (seen[static_cast<size_t>(set)].insert(key(it)).second)
      sets[static_cast<size_t>(set)].push_back(it);
  };

  Chart chart;
  chart.completed_ends.assign(g.symbols.size(),
                              std::vector<std::vector<int>>(static_cast<size_t>(n) + 1));
  auto record_complete = [&](int nt, int origin, int end) {
    auto& ends = chart.completed_ends[static_cast<size_t>(nt)][static_cast<size_t>(origin)];
    if (std::find(ends.begin(), ends.end(), end) == ends.end()) ends.push_back(end);
  };

  for (int pid : g.productions_of(g.start)) add(0, {pid, 0, 0});

  for (int pos = 0; pos <= n; ++pos) {
    auto& set = sets[static_cast<size_t>(pos)];
    for (size_t idx = 0; idx < set.size(); ++idx) {
      Item it = set[idx];
      const auto& r = eg.rhs[static_cast<size_t>(it.rule)];
      if (it.dot == static_cast<int>(r.size())) {
        // Completer.
        int head = g.productions[static_cast<size_t>(it.rule)].head;
        record_complete(head, it.origin, pos);
        for (const Item& w : sets[static_cast<size_t>(it.origin)]) {
          const auto& wr = eg.rhs[static_cast<size_t>(w.rule)];
          if (w.dot < static_cast<int>(wr.size()) && wr[static_cast<size_t>(w.dot)] == head)
            add(pos, {w.rule, w.dot + 1, w.origin});
        }
        continue;
      }
      int sym = r[static_cast<size_t>(it.dot)];
      if (g.is_nonterminal(sym)) {
        // Predictor (with the nullable advance).
        for (int pid : g.productions_of(sym)) add(pos, {pid, 0, pos});
        if (eg.nullable[static_cast<size_t>(sym)]) add(pos, {it.rule, it.dot + 1, it.origin});
      } else if (pos < n && tokens[static_cast<size_t>(pos)] == sym) {
        add(pos + 1, {it.rule, it.dot + 1, it.origin});  // scanner
      }
    }
    if (!set.empty()) chart.recognized_prefix = static_cast<size_t>(pos);
  }

  // Nullable completions recorded above only when an item completes; make
  // sure zero-length spans for nullable nonterminals are available at every
  // position touched by prediction (needed by the extractor).
  for (int pos = 0; pos <= n; ++pos) {
    for (const Item& it : sets[static_cast<size_t>(pos)]) {
      const auto& r = eg.rhs[static_cast<size_t>(it.rule)];
      if (it.dot < static_cast<int>(r.size())) {
        int sym = r[static_cast<size_t>(it.dot)];
        if (g.is_nonterminal(sym) && eg.nullable[static_cast<size_t>(sym)])
          record_complete(sym, pos, pos);
      }
    }
  }

  const auto& start_ends = chart.completed_ends[static_cast<size_t>(g.start)][0];
  chart.accepted = std::find(start_ends.begin(), start_ends.end(), n) != start_ends.end() ||
                   (n == 0 && eg.nullable[static_cast<size_t>(g.start)]);
  if (n == 0 && chart.accepted) record_complete(g.start, 0, 0);
  for (auto& per_sym : chart.completed_ends)
    for (auto& ends : per_sym) std::sort(ends.begin(), ends.end());
  return chart;
}

// Builds the leftmost derivation for a recognized span. Completed Earley
// items are sound, so any locally consistent split extends to a full
// derivation; rules are tried in id order, split points in increasing order.
struct Extractor {
  const EarleyGrammar& eg;
  const Chart& chart;
  const std::vector<int>& tokens;

  bool derives(int nt, int i, int j) const {
    const auto& ends = chart.completed_ends[static_cast<size_t>(nt)][static_cast<size_t>(i)];
    return std::binary_search(ends.begin(), ends.end(), j);
  }

  // Splits rhs symbols of `rule` over [i, j); returns per-symbol end points.
  bool match(int rule, size_t k, int pos, int j, std::vector<int>& ends) const {
    const auto& r = eg.rhs[static_cast<size_t>(rule)];
    if (k == r.size()) return pos == j;
    int remaining_min = 0;
    for (size_t q = k + 1; q < r.size(); ++q)
      remaining_min += eg.min_len[static_cast<size_t>(r[q])];
    int sym = r[k];
    if (!eg.g.is_nonterminal(sym)) {
      if (pos < j && tokens[static_cast<size_t>(pos)] == sym) {
        ends.push_back(pos + 1);
        if (match(rule, k + 1, pos + 1, j, ends)) return true;
        ends.pop_back();
      }
      return false;
    }
    const auto& cands = chart.completed_ends[static_cast<size_t>(sym)][static_cast<size_t>(pos)];
    for (int e : cands) {
      if (e > j - remaining_min) break;
      ends.push_back(e);
      if (match(rule, k + 1, e, j, ends)) return true;
      ends.pop_back();
    }
    return false;
  }

  void build(int nt, int i, int j, ParseTree& tree, int node) const {
    const Grammar& g = eg.g;
    for (int pid : g.productions_of(nt)) {
      std::vector<int> ends;
      if (!match(pid, 0, i, j, ends)) continue;
      const ProductionRule& p = g.productions[static_cast<size_t>(pid)];
      int pos = i;
      size_t e_idx = 0;
      for (int s : p.rhs) {
        int child = tree.add_node(s, node);
        if (g.is_epsilon(s)) continue;
        int end = ends[e_idx++];
        if (g.is_nonterminal(s)) build(s, pos, end, tree, child);
        pos = end;
      }
      return;
    }
    throw TreeError("internal: extraction failed on a recognized span");
  }
};

}  // namespace

ActionSequence parse_sequence(const std::vector<int>& tokens, const Grammar& g) {
  EarleyGrammar eg(g);
  Chart chart = run_earley(eg, tokens);
  if (!chart.accepted)
    throw ParseError("sequence not in language; longest recognized prefix = " +
                         std::to_string(chart.recognized_prefix) + " tokens",
                     chart.recognized_prefix);
  ParseTree tree;
  tree.root = tree.add_node(g.start, -1);
  Extractor ex{eg, chart, tokens};
  ex.build(g.start, 0, static_cast<int>(tokens.size()), tree, tree.root);
  return tree_to_actions(tree, g);
}

// ---------------------------------------------------------------------------
// Twisted trees.

namespace {

std::vector<int> ancestors_of(const ParseTree& t, int node) {
  std::vector<int> out;
  for (int p = t.nodes[static_cast<size_t>(node)].parent; p >= 0;
       p = t.nodes[static_cast<size_t>(p)].parent)
    out.push_back(p);
  return out;
}

bool disjoint(const ParseTree& t, int a, int b) {
  auto anc_a = ancestors_of(t, a);
  auto anc_b = ancestors_of(t, b);
  return std::find(anc_a.begin(), anc_a.end(), b) == anc_a.end() &&
         std::find(anc_b.begin(), anc_b.end(), a) == anc_b.end();
}

// Child labels of `parent` with node `at` relabeled to `sym`.
bool swap_breaks(const ParseTree& t, const Grammar& g, int parent, int at, int sym) {
  std::vector<int> labels;
  for (int c : t.nodes[static_cast<size_t>(parent)].children)
    labels.push_back(c == at ? sym : t.nodes[static_cast<size_t>(c)].symbol);
  return g.find_production(t.nodes[static_cast<size_t>(parent)].symbol, labels) < 0;
}

ParseTree swap_subtrees(const ParseTree& t, int a, int b) {
  ParseTree out = t;
  int pa = out.nodes[static_cast<size_t>(a)].parent;
  int pb = out.nodes[static_cast<size_t>(b)].parent;
  auto& ca = out.nodes[static_cast<size_t>(pa)].children;
  auto& cb = out.nodes[static_cast<size_t>(pb)].children;
  // Locate both slots before writing so sibling swaps don't alias.
  auto ia = std::find(ca.begin(), ca.end(), a);
  auto ib = std::find(cb.begin(), cb.end(), b);
  *ia = b;
  *ib = a;
  out.nodes[static_cast<size_t>(a)].parent = pb;
  out.nodes[static_cast<size_t>(b)].parent = pa;
  return out;
}

}  // namespace

std::optional<ParseTree> twist(const ParseTree& tree, const Grammar& g, Rng& rng) {
  std::vector<std::pair<int, int>> pairs;
  const int n = static_cast<int>(tree.nodes.size());
  for (int a = 0; a < n; ++a) {
    if (tree.nodes[static_cast<size_t>(a)].children.empty()) continue;
    for (int b = a + 1; b < n; ++b) {
      if (tree.nodes[static_cast<size_t>(b)].children.empty()) continue;
      if (tree.nodes[static_cast<size_t>(a)].symbol == tree.nodes[static_cast<size_t>(b)].symbol)
        continue;
      if (!disjoint(tree, a, b)) continue;
      int pa = tree.nodes[static_cast<size_t>(a)].parent;
      int pb = tree.nodes[static_cast<size_t>(b)].parent;
      if (pa < 0 || pb < 0) continue;
      int sym_a = tree.nodes[static_cast<size_t>(a)].symbol;
      int sym_b = tree.nodes[static_cast<size_t>(b)].symbol;
      if (pa == pb) {
        // Siblings: the swap hits one child list twice, so judge it jointly.
        std::vector<int> labels;
        for (int c : tree.nodes[static_cast<size_t>(pa)].children)
          labels.push_back(c == a ? sym_b : c == b ? sym_a : tree.nodes[static_cast<size_t>(c)].symbol);
        if (g.find_production(tree.nodes[static_cast<size_t>(pa)].symbol, labels) < 0)
          pairs.emplace_back(a, b);
      } else if (swap_breaks(tree, g, pa, a, sym_b) && swap_breaks(tree, g, pb, b, sym_a)) {
        pairs.emplace_back(a, b);
      }
    }
  }
  if (pairs.empty()) return std::nullopt;
  auto [a, b] = pairs[rng.next_below(pairs.size())];
  return swap_subtrees(tree, a, b);
}

ParseTree twist_or_corrupt(const ParseTree& tree, const Grammar& g, Rng& rng) {
  if (auto t = twist(tree, g, rng)) return *t;

  // Same-head swap when two disjoint subtrees have different yields; keeps
  // the negative structurally interesting even though it stays valid.
  ParseTree base = tree;
  {
    std::vector<std::pair<int, int>> pairs;
    const int n = static_cast<int>(tree.nodes.size());
    for (int a = 0; a < n; ++a) {
      if (tree.nodes[static_cast<size_t>(a)].children.empty()) continue;
      if (tree.nodes[static_cast<size_t>(a)].parent < 0) continue;
      for (int b = a + 1; b < n; ++b) {
        if (tree.nodes[static_cast<size_t>(b)].children.empty()) continue;
        if (tree.nodes[static_cast<size_t>(b)].parent < 0) continue;
        if (tree.nodes[static_cast<size_t>(a)].symbol != tree.nodes[static_cast<size_t>(b)].symbol)
          continue;
        if (disjoint(tree, a, b)) pairs.emplace_back(a, b);
      }
    }
    if (!pairs.empty()) {
      auto [a, b] = pairs[rng.next_below(pairs.size())];
      ParseTree swapped = swap_subtrees(tree, a, b);
      if (yield_of(swapped, g) != yield_of(tree, g)) base = swapped;
    }
  }

  // Corrupt one splice: relabel a leaf with a wrong terminal.
  std::vector<int> leaves;
  for (int i = 0; i < static_cast<int>(base.nodes.size()); ++i)
    if (base.nodes[static_cast<size_t>(i)].children.empty() &&
        base.nodes[static_cast<size_t>(i)].parent >= 0)
      leaves.push_back(i);
  for (int attempt = 0; attempt < 64 && !leaves.empty(); ++attempt) {
    int leaf = leaves[rng.next_below(leaves.size())];
    int wrong = g.terminals[rng.next_below(g.terminals.size())];
    if (wrong == base.nodes[static_cast<size_t>(leaf)].symbol) continue;
    ParseTree out = base;
    out.nodes[static_cast<size_t>(leaf)].symbol = wrong;
    if (!validate_tree(out, g).empty()) return out;
  }
  // Deterministic sweep, then the label-kind corruption of last resort.
  for (int leaf : leaves) {
    for (int wrong : g.terminals) {
      if (wrong == base.nodes[static_cast<size_t>(leaf)].symbol) continue;
      ParseTree out = base;
      out.nodes[static_cast<size_t>(leaf)].symbol = wrong;
      if (!validate_tree(out, g).empty()) return out;
    }
  }
  ParseTree out = base;
  out.nodes[static_cast<size_t>(out.root)].symbol = g.terminals.front();
  if (validate_tree(out, g).empty()) throw TreeError("unable to corrupt tree");
  return out;
}

}  // namespace treegan
