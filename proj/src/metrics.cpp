#include "treegan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "treegan/parse_tree.hpp"

namespace treegan {

namespace {

constexpr double kEps = 1e-9;

std::map<std::vector<std::string>, int> ngram_counts(const TokenSeq& toks, size_t n) {
  std::map<std::vector<std::string>, int> out;
  if (toks.size() < n) return out;
  for (size_t i = 0; i + n <= toks.size(); ++i)
    ++out[std::vector<std::string>(toks.begin() + static_cast<long>(i),
                                   toks.begin() + static_cast<long>(i + n))];
  return out;
}

size_t lcs_len(const TokenSeq& a, const TokenSeq& b) {
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double bleu3(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references) {
  if (candidates.empty() || references.empty())
    throw std::invalid_argument("bleu3 needs non-empty candidates and references");

  std::vector<std::map<std::vector<std::string>, int>> ref_counts[3];
  for (size_t n = 0; n < 3; ++n)
    for (const auto& r : references) ref_counts[n].push_back(ngram_counts(r, n + 1));

  double log_sum = 0.0;
  for (size_t n = 0; n < 3; ++n) {
    long long num = 0, den = 0;
    for (const auto& c : candidates) {
      auto counts = ngram_counts(c, n + 1);
      den += c.size() >= n + 1 ? static_cast<long long>(c.size() - n) : 0;
      for (const auto& [gram, cnt] : counts) {
        int best = 0;
        for (const auto& rc : ref_counts[n]) {
          auto it = rc.find(gram);
          if (it != rc.end()) best = std::max(best, it->second);
        }
        num += std::min(cnt, best);
      }
    }
    double p = (num > 0 && den > 0) ? static_cast<double>(num) / static_cast<double>(den) : kEps;
    log_sum += std::log(p) / 3.0;
  }

  long long cand_len = 0, ref_len = 0;
  for (const auto& c : candidates) {
    cand_len += static_cast<long long>(c.size());
    // Closest-length brevity reference, ties to the shorter one.
    size_t best = references[0].size();
    for (const auto& r : references) {
      auto diff = [&](size_t len) {
        return std::llabs(static_cast<long long>(len) - static_cast<long long>(c.size()));
      };
      if (diff(r.size()) < diff(best) || (diff(r.size()) == diff(best) && r.size() < best))
        best = r.size();
    }
    ref_len += static_cast<long long>(best);
  }
  if (cand_len == 0) return 0.0;
  double bp = cand_len >= ref_len
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  return bp * std::exp(log_sum);
}

double rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  if (candidate.empty() || reference.empty())
    throw std::invalid_argument("rouge_l needs non-empty token lists");
  double lcs = static_cast<double>(lcs_len(candidate, reference));
  if (lcs == 0.0) return 0.0;
  double r = lcs / static_cast<double>(reference.size());
  double p = lcs / static_cast<double>(candidate.size());
  return 2.0 * p * r / (p + r);
}

double rouge_l(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references) {
  if (candidates.empty() || references.empty())
    throw std::invalid_argument("rouge_l needs non-empty inputs");
  std::vector<double> best(candidates.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(candidates.size()); ++i) {
    const auto& c = candidates[static_cast<size_t>(i)];
    if (c.empty()) continue;
    double b = 0.0;
    for (const auto& r : references)
      if (!r.empty()) b = std::max(b, rouge_l(c, r));
    best[static_cast<size_t>(i)] = b;
  }
  double sum = 0.0;
  for (double b : best) sum += b;
  return sum / static_cast<double>(candidates.size());
}

double meteor_exact(const TokenSeq& candidate, const TokenSeq& reference) {
  if (candidate.empty() || reference.empty())
    throw std::invalid_argument("meteor_exact needs non-empty token lists");

  // Greedy fragment alignment: repeatedly take the longest contiguous run of
  // the candidate that still matches unused reference positions; each run is
  // one chunk.
  std::vector<bool> cand_used(candidate.size(), false), ref_used(reference.size(), false);
  size_t matches = 0, chunks = 0;
  for (size_t i = 0; i < candidate.size(); ++i) {
    if (cand_used[i]) continue;
    size_t best_len = 0, best_at = 0;
    size_t max_len = candidate.size() - i;
    for (size_t j = 0; j < reference.size(); ++j) {
      size_t len = 0;
      while (len < max_len && j + len < reference.size() && !ref_used[j + len] &&
             reference[j + len] == candidate[i + len])
        ++len;
      if (len > best_len) {
        best_len = len;
        best_at = j;
      }
    }
    if (best_len == 0) continue;
    for (size_t k = 0; k < best_len; ++k) {
      cand_used[i + k] = true;
      ref_used[best_at + k] = true;
    }
    matches += best_len;
    ++chunks;
    i += best_len - 1;
  }
  if (matches == 0) return 0.0;
  double m = static_cast<double>(matches);
  double p = m / static_cast<double>(candidate.size());
  double r = m / static_cast<double>(reference.size());
  double f_mean = 10.0 * p * r / (r + 9.0 * p);
  double frag = static_cast<double>(chunks) / m;
  return f_mean * (1.0 - 0.5 * frag * frag * frag);
}

double meteor_exact(const std::vector<TokenSeq>& candidates,
                    const std::vector<TokenSeq>& references) {
  if (candidates.empty() || references.empty())
    throw std::invalid_argument("meteor_exact needs non-empty inputs");
  std::vector<double> best(candidates.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(candidates.size()); ++i) {
    const auto& c = candidates[static_cast<size_t>(i)];
    if (c.empty()) continue;
    double b = 0.0;
    for (const auto& r : references)
      if (!r.empty()) b = std::max(b, meteor_exact(c, r));
    best[static_cast<size_t>(i)] = b;
  }
  double sum = 0.0;
  for (double b : best) sum += b;
  return sum / static_cast<double>(candidates.size());
}

namespace {

bool parses(const TokenSeq& toks, const Grammar& g) {
  std::vector<int> ids;
  ids.reserve(toks.size());
  for (const auto& t : toks) {
    int id = g.symbol_id(t);
    if (id < 0 || g.is_nonterminal(id) || g.is_epsilon(id)) return false;
    ids.push_back(id);
  }
  try {
    parse_sequence(ids, g);
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

}  // namespace

double syntax_rate(const std::vector<TokenSeq>& candidates, const Grammar& g) {
  if (candidates.empty()) throw std::invalid_argument("syntax_rate needs candidates");
  long ok = 0;
#pragma omp parallel for schedule(static) reduction(+ : ok)
  for (long i = 0; i < static_cast<long>(candidates.size()); ++i)
    if (parses(candidates[static_cast<size_t>(i)], g)) ++ok;
  return static_cast<double>(ok) / static_cast<double>(candidates.size());
}

double schema_rate(const std::vector<TokenSeq>& candidates, const Grammar& g,
                   const Schema& schema) {
  if (candidates.empty()) throw std::invalid_argument("schema_rate needs candidates");
  long ok = 0;
#pragma omp parallel for schedule(static) reduction(+ : ok)
  for (long i = 0; i < static_cast<long>(candidates.size()); ++i) {
    const auto& c = candidates[static_cast<size_t>(i)];
    if (!parses(c, g)) continue;
    std::string joined;
    for (size_t k = 0; k < c.size(); ++k) {
      if (k) joined += ' ';
      joined += c[k];
    }
    if (schema_check(joined, schema).valid) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(candidates.size());
}

EvalReport evaluate(const std::vector<TokenSeq>& candidates,
                    const std::vector<TokenSeq>& references, const Grammar& g,
                    const Schema* schema) {
  EvalReport rep;
  rep.n_candidates = candidates.size();
  rep.n_references = references.size();
  rep.bleu3 = bleu3(candidates, references);
  rep.rouge_l = rouge_l(candidates, references);
  rep.meteor = meteor_exact(candidates, references);
  rep.syntax = syntax_rate(candidates, g);
  if (schema) rep.schema = schema_rate(candidates, g, *schema);
  return rep;
}

std::string report_to_json(const EvalReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"bleu3\": " << r.bleu3 << ", \"meteor\": " << r.meteor
      << ", \"rouge_l\": " << r.rouge_l << ", \"syntax\": " << r.syntax;
  if (r.schema) out << ", \"schema\": " << *r.schema;
  out << ", \"n_candidates\": " << r.n_candidates << ", \"n_references\": " << r.n_references
      << "}\n";
  return out.str();
}

std::string report_to_table(const EvalReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  auto row = [&](const char* name, double v) {
    out << std::left << std::setw(10) << name << std::right << std::setw(8) << v << "\n";
  };
  out << std::left << std::setw(10) << "metric" << std::right << std::setw(8) << "score"
      << "\n";
  row("bleu3", r.bleu3);
  row("meteor", r.meteor);
  row("rouge_l", r.rouge_l);
  row("syntax", r.syntax);
  if (r.schema) row("schema", *r.schema);
  return out.str();
}

}  // namespace treegan
