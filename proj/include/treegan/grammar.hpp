#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace treegan {

struct GrammarError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SymbolKind { Nonterminal, Terminal, Epsilon };

struct Symbol {
  int id = -1;
  std::string text;
  SymbolKind kind = SymbolKind::Terminal;
};

struct ProductionRule {
  int id = -1;
  int head = -1;              // symbol id, always a nonterminal
  std::vector<int> rhs;       // symbol ids, length >= 1; {epsilon} only alone
};

// A validated CFG with interned symbols. Symbol ids are dense and assigned in
// first-appearance order; epsilon is always present as the last terminal.
// Immutable after construction.
class Grammar {
 public:
  std::vector<Symbol> symbols;
  std::vector<ProductionRule> productions;
  int start = -1;
  int epsilon = -1;

  std::vector<int> nonterminals;  // symbol ids in id order
  std::vector<int> terminals;     // symbol ids in id order, epsilon last

  const Symbol& sym(int id) const { return symbols.at(static_cast<size_t>(id)); }
  bool is_nonterminal(int id) const { return sym(id).kind == SymbolKind::Nonterminal; }
  bool is_epsilon(int id) const { return id == epsilon; }

  // Dense index of a nonterminal among nonterminals (mask row index).
  int nt_index(int id) const { return nt_index_.at(id); }
  // Dense index of a terminal among terminals (embedding row index).
  int term_index(int id) const { return term_index_.at(id); }

  const std::vector<int>& productions_of(int nonterminal_id) const {
    return prods_by_head_.at(static_cast<size_t>(nt_index(nonterminal_id)));
  }

  int symbol_id(const std::string& text) const {
    auto it = by_text_.find(text);
    return it == by_text_.end() ? -1 : it->second;
  }

  // Finds the production (head, child labels); -1 if none. Epsilon-only rhs
  // is looked up as {epsilon}.
  int find_production(int head, const std::vector<int>& rhs) const;

  void finalize();  // builds indices; called by the loader

 private:
  std::unordered_map<std::string, int> by_text_;
  std::unordered_map<int, int> nt_index_;
  std::unordered_map<int, int> term_index_;
  std::vector<std::vector<int>> prods_by_head_;
};

// Actions 0..|P|-1 are productions; |P|..|P|+|T|-1 are terminals (in
// Grammar::terminals order, epsilon last). Stable for a given grammar.
struct ActionVocabulary {
  int n_productions = 0;
  int n_terminals = 0;
  int size() const { return n_productions + n_terminals; }
  bool is_production(int action) const { return action < n_productions; }
  int production_of(int action) const { return action; }
  int terminal_slot(int action) const { return action - n_productions; }
  int terminal_action(int terminal_slot) const { return n_productions + terminal_slot; }
};

// Row k marks the production actions whose head is nonterminal k; terminal
// columns are always 0.
struct MaskMatrix {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<uint8_t> bits;  // row-major
  bool at(int row, int col) const { return bits[static_cast<size_t>(row) * n_cols + col] != 0; }
};

Grammar parse_grammar_text(const std::string& text);
Grammar load_grammar_file(const std::string& path);

// Canonical rendering; parse_grammar_text(render_grammar(g)) is isomorphic
// to g. Tokens ";", "#", "|", "\" are backslash-escaped.
std::string render_grammar(const Grammar& g);

uint64_t grammar_fingerprint(const Grammar& g);

MaskMatrix build_mask(const Grammar& g);
ActionVocabulary action_vocab(const Grammar& g);

// Minimum number of actions (rule applications + terminal emissions) needed
// to finish a complete subtree from each nonterminal. Keyed by symbol id.
std::unordered_map<int, int> min_completion_cost(const Grammar& g);

// Cost of completing one rhs occurrence of a symbol (terminal: 1, epsilon: 0).
int symbol_completion_cost(const Grammar& g, const std::unordered_map<int, int>& cost, int sym_id);

}  // namespace treegan
