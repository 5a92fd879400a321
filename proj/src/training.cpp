#include "treegan/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace treegan {

void TrainConfig::validate() const {
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (pretrain_epochs < 0 || adv_epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (gen_lr <= 0 || disc_lr <= 0) throw std::invalid_argument("learning rates must be positive");
  if (g_steps < 0 || d_steps < 0) throw std::invalid_argument("g_steps/d_steps must be non-negative");
  if (baseline_decay < 0 || baseline_decay >= 1)
    throw std::invalid_argument("baseline_decay must lie in [0, 1)");
  if (holdout_fraction < 0 || holdout_fraction >= 1)
    throw std::invalid_argument("holdout_fraction must lie in [0, 1)");
  if (convergence_window <= 0) throw std::invalid_argument("convergence_window must be positive");
}

std::string history_to_jsonl(const TrainHistory& h) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& r : h.records) {
    out << "{\"epoch\": " << r.epoch << ", \"gen_loss\": " << r.gen_loss
        << ", \"disc_loss\": " << r.disc_loss << ", \"mean_reward\": " << r.mean_reward
        << ", \"syntax_rate\": " << r.syntax_rate
        << ", \"holdout_accuracy\": " << r.holdout_accuracy << "}\n";
  }
  return out.str();
}

int default_action_budget(const std::vector<ActionSequence>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("cannot derive a budget from an empty corpus");
  std::vector<size_t> lens;
  lens.reserve(corpus.size());
  for (const auto& s : corpus) lens.push_back(s.steps.size());
  std::sort(lens.begin(), lens.end());
  size_t idx = (lens.size() * 95 + 99) / 100;  // ceil(0.95 n), 1-based
  if (idx == 0) idx = 1;
  return static_cast<int>(4 * lens[idx - 1]);
}

static std::vector<size_t> shuffled_indices(size_t n, Rng& rng) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  for (size_t i = n; i > 1; --i) {
    size_t j = rng.next_below(i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

static size_t free_step_count(const ActionSequence& seq, const ActionVocabulary& vocab) {
  size_t n = 0;
  for (const auto& step : seq.steps)
    if (vocab.is_production(step.action)) ++n;
  return n;
}

TrainHistory pretrain_generator(GeneratorModel& model, const Grammar& g, const MaskMatrix& mask,
                                const std::vector<ActionSequence>& corpus, const TrainConfig& cfg,
                                Rng& rng) {
  cfg.validate();
  model.check_grammar(g);
  if (corpus.empty()) throw std::invalid_argument("empty training corpus");
  ActionVocabulary vocab = action_vocab(g);

  TrainHistory history;
  for (int epoch = 1; epoch <= cfg.pretrain_epochs; ++epoch) {
    std::vector<size_t> order = shuffled_indices(corpus.size(), rng);
    double epoch_nll = 0.0;
    size_t epoch_free = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      size_t batch_free = 0;
      for (size_t k = start; k < end; ++k) batch_free += free_step_count(corpus[order[k]], vocab);
      if (batch_free == 0) continue;
      model.params.zero_grad();
      for (size_t k = start; k < end; ++k) {
        const ActionSequence& seq = corpus[order[k]];
        Tape tape;
        Tape::Id logp;
        try {
          logp = sequence_log_prob(tape, model, g, mask, seq);
        } catch (const std::exception& e) {
          throw std::runtime_error("sequence " + std::to_string(order[k]) + ": " + e.what());
        }
        // Batch loss is the mean NLL per free step: seed each -logp with 1/F.
        tape.backward(logp, -1.0 / static_cast<double>(batch_free));
        epoch_nll -= tape.scalar(logp);
      }
      epoch_free += batch_free;
      model.params.sgd_step(cfg.gen_lr, cfg.grad_clip);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.gen_loss = epoch_nll / static_cast<double>(epoch_free);
    history.records.push_back(rec);
  }
  return history;
}

std::vector<ParseTree> make_twisted_set(const std::vector<ParseTree>& trees, const Grammar& g,
                                        Rng& rng) {
  std::vector<ParseTree> out;
  out.reserve(trees.size());
  for (const auto& t : trees) {
    ParseTree bad = twist_or_corrupt(t, g, rng);
    if (validate_tree(bad, g).empty())
      throw std::logic_error("twist produced a tree that still validates");
    out.push_back(std::move(bad));
  }
  return out;
}

static double disc_batch_loss(DiscriminatorModel& model, const Grammar& g,
                              const std::vector<const ParseTree*>& real_batch,
                              const std::vector<const ParseTree*>& fake_batch, bool step,
                              double lr, double clip) {
  if (real_batch.empty() || fake_batch.empty())
    throw std::invalid_argument("discriminator batches must be non-empty");
  Tape tape;
  std::vector<Tape::Id> terms;
  for (const ParseTree* t : real_batch)
    terms.push_back(tape.scale(tape.bce_from_prob(disc_score(tape, model, g, *t), 1.0),
                               1.0 / static_cast<double>(real_batch.size())));
  for (const ParseTree* t : fake_batch)
    terms.push_back(tape.scale(tape.bce_from_prob(disc_score(tape, model, g, *t), 0.0),
                               1.0 / static_cast<double>(fake_batch.size())));
  Tape::Id loss = tape.sum(terms);
  double value = tape.scalar(loss);
  if (step) {
    model.params.zero_grad();
    tape.backward(loss);
    model.params.sgd_step(lr, clip);
  }
  return value;
}

double discriminator_step(DiscriminatorModel& model, const Grammar& g,
                          const std::vector<const ParseTree*>& real_batch,
                          const std::vector<const ParseTree*>& fake_batch, double lr, double clip) {
  return disc_batch_loss(model, g, real_batch, fake_batch, true, lr, clip);
}

TrainHistory pretrain_discriminator(DiscriminatorModel& model, const Grammar& g,
                                    const std::vector<ParseTree>& positives,
                                    const std::vector<ParseTree>& negatives,
                                    const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  model.check_grammar(g);
  if (positives.empty() || negatives.empty())
    throw std::invalid_argument("need positives and negatives");

  // Labelled pool: (tree, label). Held-out split is taken once, up front.
  std::vector<std::pair<const ParseTree*, bool>> pool;
  for (const auto& t : positives) pool.emplace_back(&t, true);
  for (const auto& t : negatives) pool.emplace_back(&t, false);
  std::vector<size_t> order = shuffled_indices(pool.size(), rng);
  size_t n_hold = static_cast<size_t>(static_cast<double>(pool.size()) * cfg.holdout_fraction);
  std::vector<std::pair<const ParseTree*, bool>> hold, train;
  for (size_t k = 0; k < order.size(); ++k)
    (k < n_hold ? hold : train).push_back(pool[order[k]]);
  if (train.empty()) throw std::invalid_argument("holdout_fraction leaves no training data");

  TrainHistory history;
  for (int epoch = 1; epoch <= cfg.pretrain_epochs; ++epoch) {
    std::vector<size_t> perm = shuffled_indices(train.size(), rng);
    double epoch_loss = 0.0;
    size_t n_batches = 0;
    for (size_t start = 0; start < perm.size(); start += static_cast<size_t>(cfg.batch_size)) {
      size_t end = std::min(perm.size(), start + static_cast<size_t>(cfg.batch_size));
      std::vector<const ParseTree*> real_batch, fake_batch;
      for (size_t k = start; k < end; ++k)
        (train[perm[k]].second ? real_batch : fake_batch).push_back(train[perm[k]].first);
      if (real_batch.empty() || fake_batch.empty()) continue;
      epoch_loss += discriminator_step(model, g, real_batch, fake_batch, cfg.disc_lr, cfg.grad_clip);
      ++n_batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.disc_loss = n_batches ? epoch_loss / static_cast<double>(n_batches) : 0.0;
    size_t correct = 0;
    const auto& eval_set = hold.empty() ? train : hold;
    for (const auto& [t, label] : eval_set)
      if ((plain_score(model, g, *t) > 0.5) == label) ++correct;
    rec.holdout_accuracy = static_cast<double>(correct) / static_cast<double>(eval_set.size());
    history.records.push_back(rec);
  }
  return history;
}

PolicyStepResult policy_gradient_step(GeneratorModel& gen, const DiscriminatorModel& disc,
                                      const Grammar& g, const MaskMatrix& mask,
                                      const TrainConfig& cfg, int budget, Rng& rng,
                                      double& baseline) {
  std::vector<ParseTree> trees;
  std::vector<double> rewards;
  trees.reserve(static_cast<size_t>(cfg.batch_size));
  for (int i = 0; i < cfg.batch_size; ++i) {
    trees.push_back(sample_tree(gen, g, mask, budget, rng));
    rewards.push_back(plain_score(disc, g, trees.back()));
  }
  double mean_reward =
      std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(cfg.batch_size);

  gen.params.zero_grad();
  double policy_loss = 0.0;
  for (int i = 0; i < cfg.batch_size; ++i) {
    ActionSequence seq = tree_to_actions(trees[static_cast<size_t>(i)], g);
    Tape tape;
    Tape::Id logp = sequence_log_prob(tape, gen, g, mask, seq, budget);
    double advantage = rewards[static_cast<size_t>(i)] - baseline;
    policy_loss -= advantage * tape.scalar(logp) / static_cast<double>(cfg.batch_size);
    tape.backward(logp, -advantage / static_cast<double>(cfg.batch_size));
  }
  gen.params.sgd_step(cfg.gen_lr, cfg.grad_clip);

  baseline = cfg.baseline_decay * baseline + (1.0 - cfg.baseline_decay) * mean_reward;
  return {mean_reward, policy_loss};
}

static double measure_syntax_rate(const GeneratorModel& gen, const Grammar& g,
                                  const MaskMatrix& mask, int budget, int n, Rng& rng) {
  if (n <= 0) return 1.0;
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    ParseTree t = sample_tree(gen, g, mask, budget, rng);
    if (!validate_tree(t, g).empty()) continue;
    try {
      parse_sequence(yield_of(t, g), g);
      ++ok;
    } catch (const ParseError&) {
    }
  }
  return static_cast<double>(ok) / static_cast<double>(n);
}

TrainHistory adversarial_train(GeneratorModel& gen, DiscriminatorModel& disc, const Grammar& g,
                               const MaskMatrix& mask, const std::vector<ParseTree>& corpus,
                               const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  gen.check_grammar(g);
  disc.check_grammar(g);
  if (corpus.empty()) throw std::invalid_argument("empty training corpus");

  int budget = cfg.action_budget;
  if (budget <= 0) {
    std::vector<ActionSequence> seqs;
    seqs.reserve(corpus.size());
    for (const auto& t : corpus) seqs.push_back(tree_to_actions(t, g));
    budget = default_action_budget(seqs);
  }

  TrainHistory history;
  double baseline = 0.0;
  for (int epoch = 1; epoch <= cfg.adv_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;

    for (int s = 0; s < cfg.g_steps; ++s) {
      PolicyStepResult r = policy_gradient_step(gen, disc, g, mask, cfg, budget, rng, baseline);
      rec.gen_loss = r.policy_loss;
      rec.mean_reward = r.mean_reward;
    }
    for (int s = 0; s < cfg.d_steps; ++s) {
      std::vector<const ParseTree*> real_batch;
      for (int i = 0; i < cfg.batch_size; ++i)
        real_batch.push_back(&corpus[rng.next_below(corpus.size())]);
      std::vector<ParseTree> fakes;
      fakes.reserve(static_cast<size_t>(cfg.batch_size));
      std::vector<const ParseTree*> fake_batch;
      for (int i = 0; i < cfg.batch_size; ++i) {
        fakes.push_back(sample_tree(gen, g, mask, budget, rng));
        fake_batch.push_back(&fakes.back());
      }
      rec.disc_loss = discriminator_step(disc, g, real_batch, fake_batch, cfg.disc_lr,
                                         cfg.grad_clip);
    }
    rec.syntax_rate = measure_syntax_rate(gen, g, mask, budget, cfg.syntax_sample, rng);
    history.records.push_back(rec);

    // Early stop once the policy loss settles: every change across the last
    // `convergence_window` epochs below convergence_eps.
    size_t w = static_cast<size_t>(cfg.convergence_window);
    if (history.records.size() > w) {
      bool settled = true;
      for (size_t k = history.records.size() - w; k < history.records.size(); ++k)
        if (std::fabs(history.records[k].gen_loss - history.records[k - 1].gen_loss) >=
            cfg.convergence_eps)
          settled = false;
      if (settled) break;
    }
  }
  return history;
}

}  // namespace treegan
