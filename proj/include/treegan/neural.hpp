#pragma once

#include <functional>
#include <string>
#include <vector>

#include "treegan/tensor.hpp"

namespace treegan {

struct TapeState {
  Tape::Id h = -1;
  Tape::Id c = -1;
};

struct PlainState {
  Vec h, c;
};

// Registers the four-gate parameter family under `prefix` ("Wi","Ui","bi",
// "Wf","Uf","bf","Wo","Uo","bo","Wu","Uu","bu").
void add_lstm_params(ParamStore& store, const std::string& prefix, int input_dim, int hidden_dim);

// One step of the sequence LSTM cell. Throws on shape mismatch or non-finite
// input.
TapeState lstm_step(Tape& tape, ParamStore& store, const std::string& prefix, Tape::Id x,
                    const TapeState& prev);

// One Child-Sum Tree-LSTM node. The forget gate uses each child's own hidden
// state; i, o, u use the child sum. Children may be empty (leaf).
TapeState treelstm_node(Tape& tape, ParamStore& store, const std::string& prefix, Tape::Id x,
                        const std::vector<TapeState>& children);

Tape::Id affine_logits(Tape& tape, ParamStore& store, const std::string& w_name,
                       const std::string& b_name, Tape::Id h);
Tape::Id affine_softmax(Tape& tape, ParamStore& store, const std::string& w_name,
                        const std::string& b_name, Tape::Id h);
// Scalar in (0,1); the weight parameter must have one row.
Tape::Id affine_sigmoid(Tape& tape, ParamStore& store, const std::string& w_name,
                        const std::string& b_name, Tape::Id h);

// Tape-free twins for sampling/scoring with frozen parameters; must agree
// with the tape versions bit-for-bit.
PlainState plain_lstm_step(const ParamStore& store, const std::string& prefix, const Vec& x,
                           const PlainState& prev);
PlainState plain_treelstm_node(const ParamStore& store, const std::string& prefix, const Vec& x,
                               const std::vector<PlainState>& children);
Vec plain_affine(const ParamStore& store, const std::string& w_name, const std::string& b_name,
                 const Vec& h);

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central finite differences per parameter coordinate against the analytic
// gradient. `loss_fn` must be a deterministic pure function of `store` that
// records and runs backward exactly once per call, returning the loss.
GradCheckReport grad_check(const std::function<double()>& loss_fn, ParamStore& store,
                           double step = 1e-5);

}  // namespace treegan
