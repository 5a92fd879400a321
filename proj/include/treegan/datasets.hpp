#pragma once

#include <string>
#include <utility>
#include <vector>

#include "treegan/grammar.hpp"
#include "treegan/rng.hpp"

namespace treegan {

enum class ColumnType { Numeric, Text };

struct Column {
  std::string name;
  ColumnType type = ColumnType::Text;
};

struct Schema {
  // Ordered: generation is deterministic under a fixed seed.
  std::vector<std::pair<std::string, std::vector<Column>>> tables;

  const std::vector<Column>* find_table(const std::string& name) const;
  const Column* find_column(const std::string& table, const std::string& col) const;
  void validate() const;
};

std::string schema_to_json(const Schema& s);
Schema schema_from_json(const std::string& text);

// ---- PLD: palindromes over the 52-letter english alphabet ----

struct PldSpec {
  int n_train = 10000;
  int n_test = 1000;
  int max_depth = 8;            // recursion cap during sampling
  double terminal_bias = 2.0;   // weight multiplier for non-recursive rules
};

struct PldData {
  Grammar grammar;  // P -> eps | c | c P c, 105 rules
  std::vector<std::string> train;
  std::vector<std::string> test;
};

PldData gen_pld(const PldSpec& spec, Rng& rng);

// PLD strings carry no separators; every character is one token.
std::vector<std::string> tokenize_chars(const std::string& s);

// ---- SQL: SELECT-statement grammars at a tunable scale ----

struct SqlParams {
  int n_tables = 0;
  int n_numeric_cols = 0;
  int n_text_cols = 0;
  int vocab_size = 0;       // distinct terminals, epsilon excluded
  int n_num_literals = 20;  // numerals 0..n-1
  int n_text_literals = 0;  // multi-word phrases; their words absorb the
                            // vocabulary left over after names and numerals
};

struct SqlSpec {
  Grammar grammar;
  Schema schema;
};

// rules = 15 + tables + columns + numerals + phrases.
SqlSpec gen_sql_spec(const SqlParams& params, Rng& rng);

SqlParams sql_a_params();       // 231 rules, 1000-terminal vocabulary
SqlParams sql_b_params();       // 422 rules, 5000-terminal vocabulary
SqlParams sql_a_desk_params();  // small stand-in with the same shape
SqlParams sql_b_desk_params();

// Schema-consistent sampling: columns drawn from the chosen table,
// comparison literals matched to the column type.
std::vector<std::string> gen_sql_corpus(const Grammar& g, const Schema& schema, int n, Rng& rng);

// Splits on whitespace and the punctuation tokens ( ) , ; plus the
// comparison operators = != > <, so "from Hungary;" tokenizes cleanly.
std::vector<std::string> sql_tokenize(const std::string& s);

struct SchemaCheckResult {
  bool valid = true;
  std::vector<std::string> violations;
};

// Token-level structural check (usable even when the string does not parse):
// (a) the FROM table exists, (b) referenced columns belong to it, (c)
// comparison literals type-match their column, (d) aggregates wrap column
// references, never literals.
SchemaCheckResult schema_check(const std::string& query, const Schema& schema);

}  // namespace treegan
