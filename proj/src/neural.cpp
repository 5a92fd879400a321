#include "treegan/neural.hpp"

#include <cmath>

#include "treegan/kernels.hpp"

namespace treegan {

namespace {
void check_finite(const Vec& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw NeuralError(std::string("non-finite input to ") + what);
}
}  // namespace

void add_lstm_params(ParamStore& store, const std::string& prefix, int input_dim, int hidden_dim) {
  for (const char* gate : {"i", "f", "o", "u"}) {
    store.add(prefix + "W" + gate, hidden_dim, input_dim);
    store.add(prefix + "U" + gate, hidden_dim, hidden_dim);
    store.add(prefix + "b" + gate, hidden_dim, 1);
  }
}

TapeState lstm_step(Tape& tape, ParamStore& store, const std::string& prefix, Tape::Id x,
                    const TapeState& prev) {
  check_finite(tape.value(x), "lstm_step");
  auto gate = [&](const char* name) {
    return tape.add(tape.affine(store.at(prefix + "W" + name), x),
                    tape.affine(store.at(prefix + "U" + name), prev.h),
                    tape.param_vector(store.at(prefix + "b" + name)));
  };
  Tape::Id i = tape.sigmoid(gate("i"));
  Tape::Id f = tape.sigmoid(gate("f"));
  Tape::Id o = tape.sigmoid(gate("o"));
  Tape::Id u = tape.tanh_(gate("u"));
  Tape::Id c = tape.add(tape.mul(i, u), tape.mul(f, prev.c));
  Tape::Id h = tape.mul(o, tape.tanh_(c));
  return {h, c};
}

TapeState treelstm_node(Tape& tape, ParamStore& store, const std::string& prefix, Tape::Id x,
                        const std::vector<TapeState>& children) {
  check_finite(tape.value(x), "treelstm_node");
  const int hidden = store.at(prefix + "Ui").rows;
  Tape::Id h_sum;
  if (children.empty()) {
    h_sum = tape.input(Vec(static_cast<size_t>(hidden), 0.0));
  } else {
    std::vector<Tape::Id> hs;
    for (const auto& ch : children) hs.push_back(ch.h);
    h_sum = tape.sum(hs);
  }
  auto gate = [&](const char* name, Tape::Id hterm) {
    return tape.add(tape.affine(store.at(prefix + "W" + name), x),
                    tape.affine(store.at(prefix + "U" + name), hterm),
                    tape.param_vector(store.at(prefix + "b" + name)));
  };
  Tape::Id i = tape.sigmoid(gate("i", h_sum));
  Tape::Id o = tape.sigmoid(gate("o", h_sum));
  Tape::Id u = tape.tanh_(gate("u", h_sum));
  Tape::Id c = tape.mul(i, u);
  for (const auto& ch : children) {
    Tape::Id f_k = tape.sigmoid(gate("f", ch.h));  // per-child forget gate
    c = tape.add(c, tape.mul(f_k, ch.c));
  }
  Tape::Id h = tape.mul(o, tape.tanh_(c));
  return {h, c};
}

Tape::Id affine_logits(Tape& tape, ParamStore& store, const std::string& w_name,
                       const std::string& b_name, Tape::Id h) {
  return tape.add(tape.affine(store.at(w_name), h), tape.param_vector(store.at(b_name)));
}

Tape::Id affine_softmax(Tape& tape, ParamStore& store, const std::string& w_name,
                        const std::string& b_name, Tape::Id h) {
  return tape.softmax(affine_logits(tape, store, w_name, b_name, h));
}

Tape::Id affine_sigmoid(Tape& tape, ParamStore& store, const std::string& w_name,
                        const std::string& b_name, Tape::Id h) {
  if (store.at(w_name).rows != 1) throw NeuralError("affine_sigmoid weight must have one row");
  return tape.sigmoid(affine_logits(tape, store, w_name, b_name, h));
}

// ---------------------------------------------------------------------------
// Plain twins.

namespace {
Vec plain_gate(const ParamStore& store, const std::string& prefix, const char* name, const Vec& x,
               const Vec& hterm) {
  const Param& w = store.at(prefix + "W" + name);
  const Param& u = store.at(prefix + "U" + name);
  const Param& b = store.at(prefix + "b" + name);
  Vec wx(static_cast<size_t>(w.rows)), uh(static_cast<size_t>(u.rows));
  kernels::matvec(w.value.data(), x.data(), wx.data(), w.rows, w.cols);
  kernels::matvec(u.value.data(), hterm.data(), uh.data(), u.rows, u.cols);
  // Same association order as the tape path ((Wx + Uh) + b) so the twins
  // agree bit for bit.
  for (size_t i = 0; i < wx.size(); ++i) wx[i] = (wx[i] + uh[i]) + b.value[i];
  return wx;
}
void apply_sigmoid(Vec& v) {
  for (double& x : v) x = 1.0 / (1.0 + std::exp(-x));
}
void apply_tanh(Vec& v) {
  for (double& x : v) x = std::tanh(x);
}
}  // namespace

PlainState plain_lstm_step(const ParamStore& store, const std::string& prefix, const Vec& x,
                           const PlainState& prev) {
  check_finite(x, "plain_lstm_step");
  Vec i = plain_gate(store, prefix, "i", x, prev.h);
  Vec f = plain_gate(store, prefix, "f", x, prev.h);
  Vec o = plain_gate(store, prefix, "o", x, prev.h);
  Vec u = plain_gate(store, prefix, "u", x, prev.h);
  apply_sigmoid(i);
  apply_sigmoid(f);
  apply_sigmoid(o);
  apply_tanh(u);
  PlainState out;
  out.c.resize(i.size());
  out.h.resize(i.size());
  for (size_t k = 0; k < i.size(); ++k) {
    out.c[k] = i[k] * u[k] + f[k] * prev.c[k];
    out.h[k] = o[k] * std::tanh(out.c[k]);
  }
  return out;
}

PlainState plain_treelstm_node(const ParamStore& store, const std::string& prefix, const Vec& x,
                               const std::vector<PlainState>& children) {
  check_finite(x, "plain_treelstm_node");
  const int hidden = store.at(prefix + "Ui").rows;
  Vec h_sum(static_cast<size_t>(hidden), 0.0);
  for (const auto& ch : children)
    for (size_t k = 0; k < h_sum.size(); ++k) h_sum[k] += ch.h[k];
  Vec i = plain_gate(store, prefix, "i", x, h_sum);
  Vec o = plain_gate(store, prefix, "o", x, h_sum);
  Vec u = plain_gate(store, prefix, "u", x, h_sum);
  apply_sigmoid(i);
  apply_sigmoid(o);
  apply_tanh(u);
  PlainState out;
  out.c.resize(i.size());
  for (size_t k = 0; k < i.size(); ++k) out.c[k] = i[k] * u[k];
  for (const auto& ch : children) {
    Vec f = plain_gate(store, prefix, "f", x, ch.h);
    apply_sigmoid(f);
    for (size_t k = 0; k < f.size(); ++k) out.c[k] += f[k] * ch.c[k];
  }
  out.h.resize(out.c.size());
  for (size_t k = 0; k < out.c.size(); ++k) out.h[k] = o[k] * std::tanh(out.c[k]);
  return out;
}

Vec plain_affine(const ParamStore& store, const std::string& w_name, const std::string& b_name,
                 const Vec& h) {
  const Param& w = store.at(w_name);
  const Param& b = store.at(b_name);
  Vec y(static_cast<size_t>(w.rows));
  kernels::matvec(w.value.data(), h.data(), y.data(), w.rows, w.cols);
  for (size_t i = 0; i < y.size(); ++i) y[i] += b.value[i];
  return y;
}

// ---------------------------------------------------------------------------

GradCheckReport grad_check(const std::function<double()>& loss_fn, ParamStore& store, double step) {
  store.zero_grad();
  loss_fn();
  std::vector<Vec> analytic;
  for (Param* p : store.all()) analytic.push_back(p->grad);

  GradCheckReport report;
  size_t pi = 0;
  for (Param* p : store.all()) {
    for (size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + step;
      store.zero_grad();
      double up = loss_fn();
      p->value[i] = saved - step;
      store.zero_grad();
      double down = loss_fn();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[pi][i];
      // Relative error with a floor so near-zero coordinates are compared on
      // an absolute scale (central-difference roundoff is ~1e-11 here).
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-3});
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = p->name;
        report.worst_index = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
    ++pi;
  }
  // Leave the analytic gradients in place for the caller.
  store.zero_grad();
  loss_fn();
  return report;
}

}  // namespace treegan
