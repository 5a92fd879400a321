#pragma once

#include <optional>
#include <string>
#include <vector>

#include "treegan/datasets.hpp"
#include "treegan/grammar.hpp"

namespace treegan {

using TokenSeq = std::vector<std::string>;

// Corpus-level BLEU with n <= 3, uniform weights, brevity penalty and add-eps
// smoothing (eps = 1e-9); every candidate is clipped against the full
// reference set, the brevity reference is the closest length (ties shorter).
double bleu3(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references);

// LCS F1: R = LCS/|ref|, P = LCS/|cand|, F = 2PR/(P+R).
double rouge_l(const TokenSeq& candidate, const TokenSeq& reference);
// Mean over candidates of the best reference score.
double rouge_l(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references);

// Exact-match METEOR: alignment maximizes matches then minimizes chunks;
// F_mean = 10PR/(R + 9P), penalty = 0.5 (chunks/matches)^3.
double meteor_exact(const TokenSeq& candidate, const TokenSeq& reference);
double meteor_exact(const std::vector<TokenSeq>& candidates,
                    const std::vector<TokenSeq>& references);

// Fraction of candidates whose token sequence parses under g.
double syntax_rate(const std::vector<TokenSeq>& candidates, const Grammar& g);

// Fraction passing both parse and schema_check.
double schema_rate(const std::vector<TokenSeq>& candidates, const Grammar& g,
                   const Schema& schema);

struct EvalReport {
  double bleu3 = 0.0;
  double meteor = 0.0;
  double rouge_l = 0.0;
  double syntax = 0.0;
  std::optional<double> schema;
  size_t n_candidates = 0;
  size_t n_references = 0;
};

EvalReport evaluate(const std::vector<TokenSeq>& candidates,
                    const std::vector<TokenSeq>& references, const Grammar& g,
                    const Schema* schema = nullptr);

std::string report_to_json(const EvalReport& r);
std::string report_to_table(const EvalReport& r);

}  // namespace treegan
