#include "treegan/generator.hpp"

#include <algorithm>

#include <cmath>

namespace treegan {

GeneratorModel GeneratorModel::create(const Grammar& g, int embed_dim, int hidden_dim) {
  GeneratorModel m;
  m.embed_dim = embed_dim;
  m.hidden_dim = hidden_dim;
  m.n_productions = static_cast<int>(g.productions.size());
  m.n_terminals = static_cast<int>(g.terminals.size());
  m.n_actions = m.n_productions + m.n_terminals;
  m.params.add("gen.emb_prod", m.n_productions, embed_dim);
  m.params.add("gen.emb_term", m.n_terminals, embed_dim);
  m.params.add("gen.emb_start", 1, embed_dim);
  add_lstm_params(m.params, "gen.lstm.", 2 * embed_dim, hidden_dim);
  m.params.add("gen.head.W", m.n_actions, hidden_dim);
  m.params.add("gen.head.b", m.n_actions, 1);
  return m;
}

void GeneratorModel::check_grammar(const Grammar& g) const {
  if (n_productions != static_cast<int>(g.productions.size()) ||
      n_terminals != static_cast<int>(g.terminals.size()))
    throw NeuralError("generator model dimensioned for a different grammar (|P|=" +
                      std::to_string(n_productions) + ", |T|=" + std::to_string(n_terminals) +
                      " vs grammar " + std::to_string(g.productions.size()) + ", " +
                      std::to_string(g.terminals.size()) + ")");
}

GeneratorState init_state(const GeneratorModel& model, const Grammar& g) {
  model.check_grammar(g);
  GeneratorState st;
  st.tree.root = st.tree.add_node(g.start, -1);
  st.stack.push_back({g.start, 0, -1, st.tree.root});
  st.lstm.h.assign(static_cast<size_t>(model.hidden_dim), 0.0);
  st.lstm.c.assign(static_cast<size_t>(model.hidden_dim), 0.0);
  return st;
}

std::vector<int> allowed_productions(const Grammar& g, const CostMap& costs, int head,
                                     int rest_cost, int remaining) {
  std::vector<int> out;
  for (int pid : g.productions_of(head)) {
    if (remaining >= 0) {
      int need = 1 + rest_cost;
      for (int s : g.productions[static_cast<size_t>(pid)].rhs)
        need += symbol_completion_cost(g, costs, s);
      if (need > remaining) continue;
    }
    out.push_back(pid);
  }
  return out;
}

namespace {

Vec embedding_of(const GeneratorModel& model, const ActionVocabulary& vocab, int action) {
  const Param* table;
  int row;
  if (action < 0) {
    table = &model.params.at("gen.emb_start");
    row = 0;
  } else if (vocab.is_production(action)) {
    table = &model.params.at("gen.emb_prod");
    row = action;
  } else {
    table = &model.params.at("gen.emb_term");
    row = vocab.terminal_slot(action);
  }
  const size_t off = static_cast<size_t>(row) * table->cols;
  return Vec(table->value.begin() + static_cast<long>(off),
             table->value.begin() + static_cast<long>(off + table->cols));
}

int stack_rest_cost(const Grammar& g, const CostMap& costs, const std::vector<PendingSlot>& stack) {
  int total = 0;
  for (const PendingSlot& s : stack) total += symbol_completion_cost(g, costs, s.symbol);
  return total;
}

}  // namespace

int generator_step(GeneratorState& state, const GeneratorModel& model, const Grammar& g,
                   const MaskMatrix& mask, Rng& rng, const CostMap& costs, int budget_remaining,
                   const StepObserver& observer) {
  if (state.done()) throw NeuralError("generator_step on exhausted stacks");
  ActionVocabulary vocab = action_vocab(g);
  PendingSlot slot = state.stack.back();
  state.stack.pop_back();

  if (!g.is_nonterminal(slot.symbol)) {
    // Terminal head: generated directly, no sampling, no stack pushes; the
    // LSTM is not advanced, only last_action.
    int action = vocab.terminal_action(g.term_index(slot.symbol));
    state.emitted.steps.push_back({action, slot.parent_step, slot.symbol});
    state.last_action = action;
    ++state.step;
    return action;
  }

  const int row = g.nt_index(slot.symbol);
  const int rest = stack_rest_cost(g, costs, state.stack);
  std::vector<int> allowed = allowed_productions(g, costs, slot.symbol, rest, budget_remaining);
  if (allowed.empty()) throw NeuralError("empty allowed set (mask row has no feasible action)");
  for (int a : allowed) {
    if (!mask.at(row, a)) throw NeuralError("internal: allowed action not set in mask");
  }

  Vec x = embedding_of(model, vocab, state.last_action);
  Vec p = embedding_of(model, vocab, slot.parent_action);
  x.insert(x.end(), p.begin(), p.end());
  state.lstm = plain_lstm_step(model.params, "gen.lstm.", x, state.lstm);
  Vec logits = plain_affine(model.params, "gen.head.W", "gen.head.b", state.lstm.h);
  Vec probs = masked_softmax(logits, allowed);

  // Inverse-CDF sampling; ties resolve to the lowest action index because
  // allowed is ascending.
  double r = rng.next_double();
  int action = allowed.back();
  double acc = 0.0;
  for (size_t k = 0; k < allowed.size(); ++k) {
    acc += probs[k];
    if (r < acc) {
      action = allowed[k];
      break;
    }
  }
  if (observer) observer(row, action);

  const int step = state.step;
  state.emitted.steps.push_back({action, slot.parent_step, slot.symbol});
  const ProductionRule& rule = g.productions[static_cast<size_t>(action)];
  std::vector<int> child_nodes;
  for (int s : rule.rhs) child_nodes.push_back(state.tree.add_node(s, slot.node));
  for (size_t k = rule.rhs.size(); k-- > 0;) {
    if (g.is_epsilon(rule.rhs[k])) continue;
    state.stack.push_back({rule.rhs[k], step, action, child_nodes[k]});
  }
  state.last_action = action;
  ++state.step;
  return action;
}

ParseTree sample_tree(const GeneratorModel& model, const Grammar& g, const MaskMatrix& mask,
                      int budget, Rng& rng, const StepObserver& observer) {
  CostMap costs = min_completion_cost(g);
  if (budget < costs.at(g.start) + 1)
    throw NeuralError("sampling budget " + std::to_string(budget) +
                      " below minimum completion cost " + std::to_string(costs.at(g.start) + 1));
  GeneratorState state = init_state(model, g);
  while (!state.done()) {
    int remaining = budget - static_cast<int>(state.emitted.steps.size());
    generator_step(state, model, g, mask, rng, costs, remaining, observer);
  }
  return state.tree;
}

// ---------------------------------------------------------------------------
// Teacher-forced replay.

namespace {
Tape::Id embedding_node(Tape& tape, GeneratorModel& model, const ActionVocabulary& vocab,
                        int action) {
  if (action < 0) return tape.param_row(model.params.at("gen.emb_start"), 0);
  if (vocab.is_production(action)) return tape.param_row(model.params.at("gen.emb_prod"), action);
  return tape.param_row(model.params.at("gen.emb_term"), vocab.terminal_slot(action));
}
}  // namespace

Tape::Id sequence_log_prob(Tape& tape, GeneratorModel& model, const Grammar& g,
                           const MaskMatrix& mask, const ActionSequence& seq, int budget,
                           Replay* trace) {
  model.check_grammar(g);
  ActionVocabulary vocab = action_vocab(g);
  CostMap costs = min_completion_cost(g);

  struct Slot {
    int symbol, parent_step, parent_action;
  };
  std::vector<Slot> stack{{g.start, 0, -1}};
  TapeState lstm{tape.input(Vec(static_cast<size_t>(model.hidden_dim), 0.0)),
                 tape.input(Vec(static_cast<size_t>(model.hidden_dim), 0.0))};
  int last_action = -1;
  std::vector<Tape::Id> logps;

  for (size_t i = 0; i < seq.steps.size(); ++i) {
    const int step = static_cast<int>(i) + 1;
    const ActionStep& st = seq.steps[i];
    if (stack.empty()) throw TreeError("trailing action at step " + std::to_string(step));
    Slot slot = stack.back();
    stack.pop_back();
    if (st.parent_step != slot.parent_step)
      throw TreeError("step " + std::to_string(step) + ": parent_step mismatch");

    if (!g.is_nonterminal(slot.symbol)) {
      int expected = vocab.terminal_action(g.term_index(slot.symbol));
      if (st.action != expected)
        throw TreeError("step " + std::to_string(step) + ": sequence not replayable (terminal)");
      last_action = st.action;
      if (trace) trace->steps.push_back({false, st.action, slot.symbol, {}, {}, 0.0});
      continue;
    }

    int rest = 0;
    for (const Slot& s : stack) rest += symbol_completion_cost(g, costs, s.symbol);
    int remaining = budget > 0 ? budget - static_cast<int>(i) : -1;
    std::vector<int> allowed = allowed_productions(g, costs, slot.symbol, rest, remaining);
    bool legal = vocab.is_production(st.action) &&
                 std::find(allowed.begin(), allowed.end(), st.action) != allowed.end();
    if (!legal)
      throw TreeError("step " + std::to_string(step) + ": action " + std::to_string(st.action) +
                      " illegal for pending head '" + g.sym(slot.symbol).text + "'");
    for (int a : allowed)
      if (!mask.at(g.nt_index(slot.symbol), a))
        throw NeuralError("internal: allowed action not set in mask");

    Tape::Id x = tape.concat(embedding_node(tape, model, vocab, last_action),
                             embedding_node(tape, model, vocab, slot.parent_action));
    lstm = lstm_step(tape, model.params, "gen.lstm.", x, lstm);
    Tape::Id logits = affine_logits(tape, model.params, "gen.head.W", "gen.head.b", lstm.h);
    Tape::Id lp = tape.masked_log_softmax_pick(logits, allowed, st.action);
    logps.push_back(lp);

    if (trace) {
      ReplayStep rs;
      rs.free = true;
      rs.action = st.action;
      rs.head = slot.symbol;
      rs.allowed = allowed;
      rs.probs = masked_softmax(tape.value(logits), allowed);
      rs.logp = tape.scalar(lp);
      trace->steps.push_back(std::move(rs));
    }

    const ProductionRule& rule = g.productions[static_cast<size_t>(st.action)];
    for (size_t k = rule.rhs.size(); k-- > 0;) {
      if (g.is_epsilon(rule.rhs[k])) continue;
      stack.push_back({rule.rhs[k], step, st.action});
    }
    last_action = st.action;
  }
  if (!stack.empty()) throw TreeError("premature end: pending children in replay");

  Tape::Id total = logps.empty() ? tape.input(Vec{0.0}) : tape.sum(logps);
  if (trace) trace->total_logp = tape.scalar(total);
  return total;
}

std::vector<double> action_log_probs(GeneratorModel& model, const Grammar& g,
                                     const MaskMatrix& mask, const ActionSequence& seq,
                                     int budget) {
  Replay trace = replay_sequence(model, g, mask, seq, budget);
  std::vector<double> out;
  for (const ReplayStep& s : trace.steps) out.push_back(s.logp);
  return out;
}

Replay replay_sequence(GeneratorModel& model, const Grammar& g, const MaskMatrix& mask,
                       const ActionSequence& seq, int budget) {
  Tape tape;
  Replay trace;
  sequence_log_prob(tape, model, g, mask, seq, budget, &trace);
  return trace;
}

}  // namespace treegan
