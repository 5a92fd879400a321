// End-to-end acceptance checks. Each numbered criterion prints exactly one
// PASS/FAIL line; the process exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "treegan/datasets.hpp"
#include "treegan/metrics.hpp"
#include "treegan/training.hpp"

using namespace treegan;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s  %2d. %-38s %s\n", ok ? "PASS" : "FAIL", number, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void run(int number, const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    auto [o, d] = fn();
    ok = o;
    detail = d;
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char buf[64];
  std::snprintf(buf, sizeof(buf), "  [%.1fs]", secs);
  report(number, name, ok, detail + buf);
}

const char* kPal = "start P ; term 0 1 ; P -> eps | 0 | 1 | 0 P 0 | 1 P 1 ;";

ActionSequence seq_of(const Grammar& g, const std::vector<int>& tokens) {
  return parse_sequence(tokens, g);
}

std::vector<int> char_tokens(const Grammar& g, const std::string& line) {
  std::vector<int> ids;
  for (const std::string& t : tokenize_chars(line)) {
    int id = g.symbol_id(t);
    if (id < 0) throw std::runtime_error("unknown token " + t);
    ids.push_back(id);
  }
  return ids;
}

std::vector<int> sql_tokens(const Grammar& g, const std::string& line) {
  std::vector<int> ids;
  for (const std::string& t : sql_tokenize(line)) {
    int id = g.symbol_id(t);
    if (id < 0) throw std::runtime_error("unknown token " + t);
    ids.push_back(id);
  }
  return ids;
}

// Palindrome corpus drawn from explicit rule probabilities, used by the MLE
// recovery and REINFORCE criteria. Rules: eps, 0, 1, 0P0, 1P1.
ParseTree sample_pal_tree(const Grammar& g, const std::vector<double>& probs, Rng& rng) {
  for (;;) {
    ParseTree t;
    t.root = t.add_node(g.start, -1);
    std::vector<int> open = {t.root};
    bool ok = true;
    while (!open.empty()) {
      int node = open.back();
      open.pop_back();
      if (t.nodes.size() > 4000) {
        ok = false;
        break;
      }
      double u = rng.next_double(), acc = 0.0;
      size_t pick = probs.size() - 1;
      for (size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
      for (int sym : g.productions[pick].rhs) {
        int child = t.add_node(sym, node);
        if (g.is_nonterminal(sym)) open.push_back(child);
      }
    }
    if (ok) return t;
  }
}

// -------------------------------------------------------------------------

std::pair<bool, std::string> criterion1_syntax_guarantee() {
  const int n = 10000;
  long long bad = 0;
  long long total = 0;

  // PLD-style grammar.
  {
    Rng rng(101);
    PldSpec spec;
    spec.n_train = 400;
    spec.n_test = 10;
    PldData pld = gen_pld(spec, rng);
    MaskMatrix mask = build_mask(pld.grammar);
    std::vector<ActionSequence> corpus;
    for (const auto& s : pld.train)
      corpus.push_back(seq_of(pld.grammar, char_tokens(pld.grammar, s)));
    int budget = default_action_budget(corpus);

    for (int phase = 0; phase < 2; ++phase) {
      GeneratorModel m = GeneratorModel::create(pld.grammar, 8, 16);
      m.params.init_uniform(rng);
      if (phase == 1) {
        TrainConfig cfg;
        cfg.batch_size = 64;
        cfg.pretrain_epochs = 1;
        pretrain_generator(m, pld.grammar, mask, corpus, cfg, rng);
      }
      for (int i = 0; i < n; ++i) {
        ++total;
        ParseTree t = sample_tree(m, pld.grammar, mask, budget, rng);
        if (!validate_tree(t, pld.grammar).empty()) {
          ++bad;
          continue;
        }
        try {
          parse_sequence(yield_of(t, pld.grammar), pld.grammar);
        } catch (const ParseError&) {
          ++bad;
        }
      }
    }
  }

  // SQL-A-style grammar (full scale).
  {
    Rng rng(102);
    SqlSpec sql = gen_sql_spec(sql_a_params(), rng);
    MaskMatrix mask = build_mask(sql.grammar);
    std::vector<ActionSequence> corpus;
    for (const auto& q : gen_sql_corpus(sql.grammar, sql.schema, 200, rng))
      corpus.push_back(seq_of(sql.grammar, sql_tokens(sql.grammar, q)));
    int budget = default_action_budget(corpus);

    for (int phase = 0; phase < 2; ++phase) {
      GeneratorModel m = GeneratorModel::create(sql.grammar, 8, 16);
      m.params.init_uniform(rng);
      if (phase == 1) {
        TrainConfig cfg;
        cfg.batch_size = 64;
        cfg.pretrain_epochs = 1;
        pretrain_generator(m, sql.grammar, mask, corpus, cfg, rng);
      }
      for (int i = 0; i < n; ++i) {
        ++total;
        ParseTree t = sample_tree(m, sql.grammar, mask, budget, rng);
        if (!validate_tree(t, sql.grammar).empty()) {
          ++bad;
          continue;
        }
        try {
          parse_sequence(yield_of(t, sql.grammar), sql.grammar);
        } catch (const ParseError&) {
          ++bad;
        }
      }
    }
  }

  char d[96];
  std::snprintf(d, sizeof(d), "%lld/%lld trees syntactically valid", total - bad, total);
  return {bad == 0, d};
}

std::pair<bool, std::string> criterion2_mask_leakage() {
  long long steps = 0, leaks = 0;
  auto observe_on = [&](const Grammar& g, uint64_t seed, long long quota) {
    MaskMatrix mask = build_mask(g);
    GeneratorModel m = GeneratorModel::create(g, 6, 8);
    Rng rng(seed);
    m.params.init_uniform(rng, 0.5);
    long long taken = 0;
    StepObserver obs = [&](int nt, int action) {
      ++steps;
      ++taken;
      if (nt < 0 || nt >= mask.n_rows || action < 0 || action >= mask.n_cols ||
          !mask.at(nt, action))
        ++leaks;
    };
    while (taken < quota) (void)sample_tree(m, g, mask, 64, rng, obs);
  };

  observe_on(parse_grammar_text(kPal), 201, 34000);
  {
    Rng rng(202);
    PldSpec spec;
    spec.n_train = 1;
    spec.n_test = 1;
    observe_on(gen_pld(spec, rng).grammar, 203, 33000);
  }
  {
    Rng rng(204);
    observe_on(gen_sql_spec(sql_a_desk_params(), rng).grammar, 205, 33000);
  }

  char d[96];
  std::snprintf(d, sizeof(d), "%lld sampled steps, %lld mask violations", steps, leaks);
  return {steps >= 100000 && leaks == 0, d};
}

std::pair<bool, std::string> criterion3_roundtrips() {
  long long failures = 0, total = 0;

  auto roundtrip = [&](const Grammar& g, const std::vector<int>& tokens) {
    ++total;
    ActionSequence seq = parse_sequence(tokens, g);
    ParseTree tree = actions_to_tree(seq, g);
    if (yield_of(tree, g) != tokens) {
      ++failures;
      return;
    }
    ActionSequence back = tree_to_actions(tree, g);
    if (back.steps.size() != seq.steps.size()) {
      ++failures;
      return;
    }
    for (size_t i = 0; i < back.steps.size(); ++i)
      if (back.steps[i].action != seq.steps[i].action ||
          back.steps[i].parent_step != seq.steps[i].parent_step) {
        ++failures;
        return;
      }
    // actions -> tree -> actions -> tree is node-identical.
    ParseTree tree2 = actions_to_tree(back, g);
    if (tree2.nodes.size() != tree.nodes.size()) {
      ++failures;
      return;
    }
    for (size_t i = 0; i < tree.nodes.size(); ++i)
      if (tree.nodes[i].symbol != tree2.nodes[i].symbol ||
          tree.nodes[i].parent != tree2.nodes[i].parent) {
        ++failures;
        return;
      }
  };

  {
    Rng rng(301);
    PldSpec spec;
    spec.n_train = 5000;
    spec.n_test = 10;
    PldData pld = gen_pld(spec, rng);
    for (const auto& s : pld.train) roundtrip(pld.grammar, char_tokens(pld.grammar, s));
  }
  {
    Rng rng(302);
    SqlSpec a = gen_sql_spec(sql_a_params(), rng);
    for (const auto& q : gen_sql_corpus(a.grammar, a.schema, 5000, rng))
      roundtrip(a.grammar, sql_tokens(a.grammar, q));
  }
  {
    Rng rng(303);
    SqlSpec b = gen_sql_spec(sql_b_params(), rng);
    for (const auto& q : gen_sql_corpus(b.grammar, b.schema, 5000, rng))
      roundtrip(b.grammar, sql_tokens(b.grammar, q));
  }

  char d[96];
  std::snprintf(d, sizeof(d), "%lld/%lld strings round-trip exactly", total - failures, total);
  return {failures == 0 && total == 15000, d};
}

std::pair<bool, std::string> criterion4_grad_checks() {
  double worst = 0.0;
  const Grammar g = parse_grammar_text(kPal);
  const MaskMatrix mask = build_mask(g);

  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Rng data_rng(400 + seed);

    {  // LSTM cell chain
      ParamStore store;
      add_lstm_params(store, "g_", 3, 4);
      auto& w = store.add("w", 1, 4);
      auto& b = store.add("b", 1, 1);
      (void)w;
      (void)b;
      Rng rng(seed);
      store.init_uniform(rng, 0.4);
      Vec x0(3), x1(3);
      for (auto* v : {&x0, &x1})
        for (auto& e : *v) e = rng.uniform(-1, 1);
      auto loss_fn = [&]() {
        Tape tape;
        TapeState z{tape.input(Vec(4, 0.0)), tape.input(Vec(4, 0.0))};
        TapeState s = lstm_step(tape, store, "g_", tape.input(x0), z);
        s = lstm_step(tape, store, "g_", tape.input(x1), s);
        auto out = tape.bce_from_prob(affine_sigmoid(tape, store, "w", "b", s.h), 1.0);
        double l = tape.scalar(out);
        tape.backward(out);
        return l;
      };
      worst = std::max(worst, grad_check(loss_fn, store).max_rel_err);
    }

    {  // Tree-LSTM node with two children
      ParamStore store;
      add_lstm_params(store, "t_", 3, 4);
      auto& w = store.add("w", 1, 4);
      auto& b = store.add("b", 1, 1);
      (void)w;
      (void)b;
      Rng rng(seed + 50);
      store.init_uniform(rng, 0.4);
      Vec xa(3), xb(3), xr(3);
      for (auto* v : {&xa, &xb, &xr})
        for (auto& e : *v) e = rng.uniform(-1, 1);
      auto loss_fn = [&]() {
        Tape tape;
        TapeState a = treelstm_node(tape, store, "t_", tape.input(xa), {});
        TapeState bch = treelstm_node(tape, store, "t_", tape.input(xb), {});
        TapeState r = treelstm_node(tape, store, "t_", tape.input(xr), {a, bch});
        auto out = tape.bce_from_prob(affine_sigmoid(tape, store, "w", "b", r.h), 0.0);
        double l = tape.scalar(out);
        tape.backward(out);
        return l;
      };
      worst = std::max(worst, grad_check(loss_fn, store).max_rel_err);
    }

    {  // Generator sequence NLL
      GeneratorModel m = GeneratorModel::create(g, 3, 4);
      Rng rng(seed + 100);
      m.params.init_uniform(rng, 0.4);
      std::vector<std::vector<int>> pool = {
          char_tokens(g, "010"), char_tokens(g, "0110"), char_tokens(g, "101"),
          char_tokens(g, "11")};
      ActionSequence seq = seq_of(g, pool[data_rng.next_below(pool.size())]);
      auto loss_fn = [&]() {
        Tape tape;
        auto logp = sequence_log_prob(tape, m, g, mask, seq);
        double l = -tape.scalar(logp);
        tape.backward(logp, -1.0);
        return l;
      };
      worst = std::max(worst, grad_check(loss_fn, m.params).max_rel_err);
    }

    {  // Discriminator BCE
      DiscriminatorModel m = DiscriminatorModel::create(g, 3, 4);
      Rng rng(seed + 150);
      m.params.init_uniform(rng, 0.4);
      ParseTree real = actions_to_tree(seq_of(g, char_tokens(g, "101")), g);
      ParseTree fake = actions_to_tree(seq_of(g, char_tokens(g, "000")), g);
      auto loss_fn = [&]() {
        Tape tape;
        auto l = tape.add(tape.bce_from_prob(disc_score(tape, m, g, real), 1.0),
                          tape.bce_from_prob(disc_score(tape, m, g, fake), 0.0));
        double v = tape.scalar(l);
        tape.backward(l);
        return v;
      };
      worst = std::max(worst, grad_check(loss_fn, m.params).max_rel_err);
    }
  }

  char d[96];
  std::snprintf(d, sizeof(d), "max relative error %.2e over 80 draws", worst);
  return {worst < 1e-4, d};
}

std::pair<bool, std::string> criterion5_mle_recovery() {
  Grammar g = parse_grammar_text(kPal);
  MaskMatrix mask = build_mask(g);
  const std::vector<double> true_probs = {0.1, 0.1, 0.1, 0.35, 0.35};

  Rng rng(501);
  std::vector<ActionSequence> corpus;
  for (int i = 0; i < 2000; ++i)
    corpus.push_back(tree_to_actions(sample_pal_tree(g, true_probs, rng), g));

  GeneratorModel m = GeneratorModel::create(g, 16, 32);
  m.params.init_uniform(rng);
  TrainConfig cfg;
  cfg.batch_size = 64;
  cfg.pretrain_epochs = 50;
  cfg.gen_lr = 0.2;
  pretrain_generator(m, g, mask, corpus, cfg, rng);

  // Mean per-decision KL(true || model) over fresh replay traces.
  double kl_sum = 0.0;
  long long decisions = 0;
  for (int i = 0; i < 300; ++i) {
    ActionSequence seq = tree_to_actions(sample_pal_tree(g, true_probs, rng), g);
    Replay rep = replay_sequence(m, g, mask, seq);
    for (const auto& step : rep.steps) {
      if (!step.free) continue;
      ++decisions;
      for (size_t k = 0; k < step.allowed.size(); ++k) {
        double q = true_probs[static_cast<size_t>(step.allowed[k])];
        kl_sum += q * std::log(q / step.probs[k]);
      }
    }
  }
  double kl = kl_sum / static_cast<double>(decisions);
  char d[96];
  std::snprintf(d, sizeof(d), "mean per-decision KL %.4f nats (< 0.05)", kl);
  return {kl < 0.05, d};
}

std::pair<bool, std::string> criterion6_disc_pretraining() {
  Rng rng(601);
  SqlSpec sql = gen_sql_spec(sql_a_desk_params(), rng);
  std::vector<ParseTree> pos;
  for (const auto& q : gen_sql_corpus(sql.grammar, sql.schema, 2000, rng))
    pos.push_back(actions_to_tree(seq_of(sql.grammar, sql_tokens(sql.grammar, q)), sql.grammar));
  std::vector<ParseTree> neg = make_twisted_set(pos, sql.grammar, rng);

  DiscriminatorModel m = DiscriminatorModel::create(sql.grammar, 16, 32);
  m.params.init_uniform(rng);
  TrainConfig cfg;
  cfg.batch_size = 64;
  cfg.disc_lr = 0.2;
  cfg.holdout_fraction = 0.2;

  double best = 0.0;
  int epochs_used = 0;
  for (int epoch = 1; epoch <= 50 && best < 0.9; ++epoch) {
    cfg.pretrain_epochs = 1;
    TrainHistory h = pretrain_discriminator(m, sql.grammar, pos, neg, cfg, rng);
    best = std::max(best, h.records.back().holdout_accuracy);
    epochs_used = epoch;
  }
  char d[96];
  std::snprintf(d, sizeof(d), "holdout accuracy %.3f after %d epochs", best, epochs_used);
  return {best >= 0.9, d};
}

std::pair<bool, std::string> criterion7_reinforce_estimator() {
  Grammar g = parse_grammar_text(kPal);
  MaskMatrix mask = build_mask(g);
  const int budget = 4;

  GeneratorModel gen = GeneratorModel::create(g, 4, 4);
  Rng rng(701);
  gen.params.init_uniform(rng, 0.4);

  DiscriminatorModel disc = DiscriminatorModel::create(g, 4, 4);
  disc.params.init_uniform(rng, 0.4);

  // The budget-4 support: epsilon, single letters, and one-level recursions.
  const std::vector<std::string> support = {"", "0", "1", "00", "11"};
  std::vector<ParseTree> trees;
  std::vector<double> probs, rewards;
  std::vector<Vec> grads;
  const size_t dim = gen.params.total_size();
  Vec exact(dim, 0.0);

  for (const auto& s : support) {
    ActionSequence seq = seq_of(g, char_tokens(g, s));
    ParseTree t = actions_to_tree(seq, g);
    gen.params.zero_grad();
    Tape tape;
    auto logp = sequence_log_prob(tape, gen, g, mask, seq, budget);
    double p = std::exp(tape.scalar(logp));
    tape.backward(logp);
    Vec grad = gen.params.flat_grad();
    double r = plain_score(disc, g, t);
    trees.push_back(t);
    probs.push_back(p);
    rewards.push_back(r);
    grads.push_back(grad);
    for (size_t k = 0; k < dim; ++k) exact[k] += p * r * grad[k];
  }
  double mass = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::fabs(mass - 1.0) > 1e-9)
    return {false, "support enumeration incomplete (mass " + std::to_string(mass) + ")"};

  // 200,000 REINFORCE samples. Each sample contributes R(t) grad log p(t);
  // samples are grouped by which of the five support trees they hit.
  const long long n = 200000;
  std::vector<long long> counts(support.size(), 0);
  for (long long i = 0; i < n; ++i) {
    ParseTree t = sample_tree(gen, g, mask, budget, rng);
    std::vector<int> y = yield_of(t, g);
    std::string key;
    for (int id : y) key += g.sym(id).text;
    auto it = std::find(support.begin(), support.end(), key);
    if (it == support.end()) return {false, "sampled tree outside the enumerated support"};
    ++counts[static_cast<size_t>(it - support.begin())];
  }

  long long mismatches = 0;
  double worst_z = 0.0;
  for (size_t k = 0; k < dim; ++k) {
    double mean = 0.0, second = 0.0;
    for (size_t t = 0; t < support.size(); ++t) {
      double f = rewards[t] * grads[t][k];
      double ph = static_cast<double>(counts[t]) / static_cast<double>(n);
      mean += ph * f;
      second += ph * f * f;
    }
    double var = std::max(0.0, second - mean * mean);
    double se = std::sqrt(var / static_cast<double>(n));
    double diff = std::fabs(mean - exact[k]);
    if (se > 0.0) worst_z = std::max(worst_z, diff / se);
    if (diff > 4.0 * se + 1e-9) ++mismatches;
  }
  char d[96];
  std::snprintf(d, sizeof(d), "%lld coords off by > 4 SE (worst z %.2f)", mismatches, worst_z);
  return {mismatches == 0, d};
}

std::pair<bool, std::string> criterion8_adversarial_smoke() {
  Rng data_rng(801);
  PldSpec spec;
  spec.n_train = 500;
  spec.n_test = 100;
  PldData pld = gen_pld(spec, data_rng);
  MaskMatrix mask = build_mask(pld.grammar);
  std::vector<ParseTree> corpus;
  for (const auto& s : pld.train)
    corpus.push_back(
        actions_to_tree(seq_of(pld.grammar, char_tokens(pld.grammar, s)), pld.grammar));

  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.adv_epochs = 5;
  cfg.syntax_sample = 32;
  cfg.convergence_eps = 0.0;

  auto run_once = [&]() {
    GeneratorModel gen = GeneratorModel::create(pld.grammar, 8, 12);
    DiscriminatorModel disc = DiscriminatorModel::create(pld.grammar, 8, 12);
    Rng init(802);
    gen.params.init_uniform(init);
    disc.params.init_uniform(init);
    Rng rng(803);
    return adversarial_train(gen, disc, pld.grammar, mask, corpus, cfg, rng);
  };

  TrainHistory h1 = run_once();
  if (h1.records.size() != 5) return {false, "expected 5 epochs"};
  for (const auto& r : h1.records) {
    if (!std::isfinite(r.gen_loss) || !std::isfinite(r.disc_loss))
      return {false, "non-finite loss"};
    if (!(r.mean_reward > 0.0 && r.mean_reward < 1.0)) return {false, "reward outside (0,1)"};
    if (r.syntax_rate != 1.0) return {false, "syntax rate below 1.0"};
  }
  TrainHistory h2 = run_once();
  for (size_t i = 0; i < h1.records.size(); ++i)
    if (h1.records[i].gen_loss != h2.records[i].gen_loss ||
        h1.records[i].disc_loss != h2.records[i].disc_loss ||
        h1.records[i].mean_reward != h2.records[i].mean_reward)
      return {false, "histories differ between identical seeds"};

  char d[96];
  std::snprintf(d, sizeof(d), "5 epochs, reward %.3f, syntax 1.0, repeat bit-identical",
                h1.records.back().mean_reward);
  return {true, d};
}

// Brute-force metric oracles (independent implementations).
int lcs_brute(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1, 0));
  for (size_t i = 1; i <= a.size(); ++i)
    for (size_t j = 1; j <= b.size(); ++j)
      d[i][j] = a[i - 1] == b[j - 1] ? d[i - 1][j - 1] + 1 : std::max(d[i - 1][j], d[i][j - 1]);
  return d[a.size()][b.size()];
}

double bleu3_brute(const std::vector<TokenSeq>& cands, const std::vector<TokenSeq>& refs) {
  const double eps = 1e-9;
  long long cand_len = 0, ref_len = 0;
  std::vector<double> num(3, 0.0), den(3, 0.0);
  for (const auto& c : cands) {
    cand_len += static_cast<long long>(c.size());
    long long best = static_cast<long long>(refs[0].size());
    auto dist = [&](long long r) { return std::llabs(r - static_cast<long long>(c.size())); };
    for (const auto& r : refs) {
      long long rl = static_cast<long long>(r.size());
      if (dist(rl) < dist(best) || (dist(rl) == dist(best) && rl < best)) best = rl;
    }
    ref_len += best;
    for (int n = 1; n <= 3; ++n) {
      std::map<std::vector<std::string>, int> cc, rc;
      for (size_t i = 0; i + n <= c.size(); ++i)
        ++cc[std::vector<std::string>(c.begin() + i, c.begin() + i + n)];
      for (const auto& r : refs) {
        std::map<std::vector<std::string>, int> one;
        for (size_t i = 0; i + n <= r.size(); ++i)
          ++one[std::vector<std::string>(r.begin() + i, r.begin() + i + n)];
        for (const auto& [gram, cnt] : one) rc[gram] = std::max(rc[gram], cnt);
      }
      for (const auto& [gram, cnt] : cc) {
        auto it = rc.find(gram);
        num[static_cast<size_t>(n - 1)] += std::min(cnt, it == rc.end() ? 0 : it->second);
      }
      den[static_cast<size_t>(n - 1)] +=
          std::max<double>(0.0, static_cast<double>(c.size()) - n + 1);
    }
  }
  double log_sum = 0.0;
  for (int n = 0; n < 3; ++n) {
    size_t i = static_cast<size_t>(n);
    double p = den[i] > 0 ? (num[i] > 0 ? num[i] / den[i] : eps) : eps;
    log_sum += std::log(p) / 3.0;
  }
  double bp = cand_len >= ref_len
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  return bp * std::exp(log_sum);
}

std::pair<bool, std::string> criterion9_metric_oracles() {
  auto close = [](double a, double b, double tol) { return std::fabs(a - b) <= tol; };

  // Worked examples.
  double bleu = bleu3({{"a", "b", "c", "d"}}, {{"a", "b", "c", "e"}});
  if (!close(bleu, std::cbrt(0.75 * (2.0 / 3.0) * 0.5), 1e-9) || !close(bleu, 0.62996, 5e-6))
    return {false, "worked BLEU example failed"};
  if (!close(rouge_l({"a", "c", "e"}, {"a", "b", "c", "d", "e"}), 0.75, 1e-12))
    return {false, "worked ROUGE-L example failed"};
  double met = meteor_exact({"a", "b", "c"}, {"a", "b", "c"});
  if (!close(met, 1.0 - 0.5 / 27.0, 1e-12) || !close(met, 0.98148, 5e-6))
    return {false, "worked METEOR example failed"};

  // 100 random short pairs vs brute force.
  Rng rng(901);
  const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto draw = [&]() {
      TokenSeq s;
      size_t len = 1 + rng.next_below(8);
      for (size_t i = 0; i < len; ++i) s.push_back(words[rng.next_below(words.size())]);
      return s;
    };
    std::vector<TokenSeq> cands = {draw(), draw()};
    std::vector<TokenSeq> refs = {draw(), draw(), draw()};
    worst = std::max(worst, std::fabs(bleu3(cands, refs) - bleu3_brute(cands, refs)));
    for (const auto& c : cands)
      for (const auto& r : refs) {
        int l = lcs_brute(c, r);
        double f = 0.0;
        if (l > 0) {
          double rec = static_cast<double>(l) / static_cast<double>(r.size());
          double prec = static_cast<double>(l) / static_cast<double>(c.size());
          f = 2.0 * prec * rec / (prec + rec);
        }
        worst = std::max(worst, std::fabs(rouge_l(c, r) - f));
      }
  }
  char d[96];
  std::snprintf(d, sizeof(d), "worked examples exact; worst brute-force gap %.1e", worst);
  return {worst <= 1e-9, d};
}

std::pair<bool, std::string> criterion10_schema_discrimination() {
  Rng rng(1001);
  SqlSpec sql = gen_sql_spec(sql_a_params(), rng);
  std::vector<TokenSeq> good;
  for (const auto& q : gen_sql_corpus(sql.grammar, sql.schema, 200, rng))
    good.push_back(sql_tokenize(q));
  double good_rate = schema_rate(good, sql.grammar, sql.schema);

  const std::vector<std::string> malformed = {
      "select count(17), min(acoustically) from;",
      "select max(cookstove), gainfully, min ()), min(buttonhole) from America;",
      "select aalesund from Brazil where hanuman acoustically Hungary;",
  };
  std::vector<TokenSeq> bad;
  for (const auto& q : malformed) bad.push_back(sql_tokenize(q));
  double bad_rate = schema_rate(bad, sql.grammar, sql.schema);

  char d[96];
  std::snprintf(d, sizeof(d), "consistent corpus %.2f, malformed queries %.2f", good_rate,
                bad_rate);
  return {good_rate == 1.0 && bad_rate == 0.0, d};
}

}  // namespace

int main() {
  run(1, "syntax guarantee (10k samples x 4)", criterion1_syntax_guarantee);
  run(2, "mask zero-leakage (100k steps)", criterion2_mask_leakage);
  run(3, "roundtrips (15k strings)", criterion3_roundtrips);
  run(4, "gradient checks (80 draws)", criterion4_grad_checks);
  run(5, "MLE recovery (KL < 0.05)", criterion5_mle_recovery);
  run(6, "discriminator pre-training (>= 0.9)", criterion6_disc_pretraining);
  run(7, "REINFORCE estimator (4 SE)", criterion7_reinforce_estimator);
  run(8, "adversarial smoke (5 epochs)", criterion8_adversarial_smoke);
  run(9, "metric oracles (1e-9)", criterion9_metric_oracles);
  run(10, "schema discrimination (1.0 / 0.0)", criterion10_schema_discrimination);

  if (g_failures == 0) {
    std::printf("all 10 criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", g_failures);
  return 1;
}
