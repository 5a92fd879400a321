#pragma once

#include <functional>
#include <unordered_map>

#include "treegan/grammar.hpp"
#include "treegan/neural.hpp"
#include "treegan/parse_tree.hpp"
#include "treegan/rng.hpp"

namespace treegan {

// Masked recurrent tree generator. The LSTM input is the concatenation of
// the previous action embedding and the parent action embedding (2E); the
// output head produces one logit per action.
struct GeneratorModel {
  int embed_dim = 0;
  int hidden_dim = 0;
  int n_productions = 0;
  int n_terminals = 0;
  int n_actions = 0;
  ParamStore params;

  static GeneratorModel create(const Grammar& g, int embed_dim, int hidden_dim);
  void check_grammar(const Grammar& g) const;
};

// A pending expansion slot; the parent and children stacks move in lockstep
// (one parent record per rhs symbol), so one stack of records carries both.
struct PendingSlot {
  int symbol = -1;
  int parent_step = 0;    // 1-based step that initiated this node, 0 for root
  int parent_action = -1;  // production taken at parent_step, -1 for pseudo-root R
  int node = -1;           // tree arena index
};

struct GeneratorState {
  std::vector<PendingSlot> stack;  // back = top; the sentinel is implicit
  PlainState lstm;
  int last_action = -1;  // -1 = learned start pseudo-action
  int step = 1;
  ActionSequence emitted;
  ParseTree tree;

  bool done() const { return stack.empty(); }
  // Both stacks include the unpoppable sentinel.
  size_t parent_stack_size() const { return stack.size() + 1; }
  size_t children_stack_size() const { return stack.size() + 1; }
};

using CostMap = std::unordered_map<int, int>;

GeneratorState init_state(const GeneratorModel& model, const Grammar& g);

// Productions of `head` that can still finish within `remaining` actions
// given `rest_cost` pending elsewhere; remaining < 0 disables the budget.
std::vector<int> allowed_productions(const Grammar& g, const CostMap& costs, int head,
                                     int rest_cost, int remaining);

// Called at every free (sampled) step with (mask row index, sampled action).
using StepObserver = std::function<void(int nt_index, int action)>;

// One generation step: pops a slot, emits a forced terminal or samples a
// masked production. Returns the action taken.
int generator_step(GeneratorState& state, const GeneratorModel& model, const Grammar& g,
                   const MaskMatrix& mask, Rng& rng, const CostMap& costs, int budget_remaining,
                   const StepObserver& observer = nullptr);

// Samples one complete tree within `budget` actions; the result always
// satisfies parse-tree properties 1-4. Throws NeuralError when budget is
// below min_completion_cost(start) + 1.
ParseTree sample_tree(const GeneratorModel& model, const Grammar& g, const MaskMatrix& mask,
                      int budget, Rng& rng, const StepObserver& observer = nullptr);

struct ReplayStep {
  bool free = false;
  int action = -1;
  int head = -1;               // symbol id
  std::vector<int> allowed;    // free steps only, ascending action ids
  Vec probs;                   // aligned with allowed
  double logp = 0.0;           // 0 for forced steps
};

struct Replay {
  std::vector<ReplayStep> steps;
  double total_logp = 0.0;
};

// Teacher-forced replay on the tape; returns the scalar sum of free-step log
// probabilities. budget <= 0 disables budget-restricted masking; when given
// it must match the budget the sequence was sampled under. `trace`, when
// non-null, receives per-step distributions.
Tape::Id sequence_log_prob(Tape& tape, GeneratorModel& model, const Grammar& g,
                           const MaskMatrix& mask, const ActionSequence& seq, int budget = 0,
                           Replay* trace = nullptr);

// Per-step log probabilities (forced terminal steps contribute 0).
std::vector<double> action_log_probs(GeneratorModel& model, const Grammar& g,
                                     const MaskMatrix& mask, const ActionSequence& seq,
                                     int budget = 0);

Replay replay_sequence(GeneratorModel& model, const Grammar& g, const MaskMatrix& mask,
                       const ActionSequence& seq, int budget = 0);

}  // namespace treegan
