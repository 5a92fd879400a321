#pragma once

#include "treegan/discriminator.hpp"
#include "treegan/generator.hpp"

namespace treegan {

struct TrainConfig {
  int batch_size = 64;
  int pretrain_epochs = 50;
  int adv_epochs = 50;
  double gen_lr = 0.01;
  double disc_lr = 0.01;
  int g_steps = 1;  // policy-gradient batches per adversarial epoch
  int d_steps = 1;  // discriminator batches per adversarial epoch
  int action_budget = 0;  // 0 = 4x the 95th-percentile corpus action length
  uint64_t seed = 0;
  double baseline_decay = 0.9;  // beta in [0,1)
  double grad_clip = 5.0;
  double convergence_eps = 1e-4;
  int convergence_window = 3;
  int syntax_sample = 64;        // trees sampled per epoch for the syntax-rate column
  double holdout_fraction = 0.2;  // discriminator pre-training

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double gen_loss = 0.0;   // NLL per free step (pre-training) or policy loss
  double disc_loss = 0.0;
  double mean_reward = 0.0;
  double syntax_rate = 0.0;
  double holdout_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> records;
};

std::string history_to_jsonl(const TrainHistory& h);

int default_action_budget(const std::vector<ActionSequence>& corpus);

// MLE pre-training: minimizes the mean negative log-likelihood of free steps
// by mini-batch SGD. Unreplayable sequences are reported with their index.
TrainHistory pretrain_generator(GeneratorModel& model, const Grammar& g, const MaskMatrix& mask,
                                const std::vector<ActionSequence>& corpus, const TrainConfig& cfg,
                                Rng& rng);

// One syntactically broken negative per positive (twist with the
// single-nonterminal fallback); every output fails validation.
std::vector<ParseTree> make_twisted_set(const std::vector<ParseTree>& trees, const Grammar& g,
                                        Rng& rng);

TrainHistory pretrain_discriminator(DiscriminatorModel& model, const Grammar& g,
                                    const std::vector<ParseTree>& positives,
                                    const std::vector<ParseTree>& negatives,
                                    const TrainConfig& cfg, Rng& rng);

// One gradient step on the GAN objective for the discriminator; returns the
// batch loss -mean log D(real) - mean log(1 - D(fake)).
double discriminator_step(DiscriminatorModel& model, const Grammar& g,
                          const std::vector<const ParseTree*>& real_batch,
                          const std::vector<const ParseTree*>& fake_batch, double lr, double clip);

struct PolicyStepResult {
  double mean_reward = 0.0;
  double policy_loss = 0.0;
};

// REINFORCE over a batch of freshly sampled trees with whole-tree reward
// D(tree) and a moving-average baseline (updated in place).
PolicyStepResult policy_gradient_step(GeneratorModel& gen, const DiscriminatorModel& disc,
                                      const Grammar& g, const MaskMatrix& mask,
                                      const TrainConfig& cfg, int budget, Rng& rng,
                                      double& baseline);

TrainHistory adversarial_train(GeneratorModel& gen, DiscriminatorModel& disc, const Grammar& g,
                               const MaskMatrix& mask, const std::vector<ParseTree>& corpus,
                               const TrainConfig& cfg, Rng& rng);

}  // namespace treegan
