#include "treegan/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "treegan/kernels.hpp"

namespace treegan {

Param& ParamStore::add(const std::string& name, int rows, int cols) {
  if (index_.count(name)) throw NeuralError("duplicate parameter name: " + name);
  if (rows <= 0 || cols <= 0) throw NeuralError("non-positive parameter shape: " + name);
  Param p;
  p.name = name;
  p.rows = rows;
  p.cols = cols;
  p.value.assign(static_cast<size_t>(rows) * cols, 0.0);
  p.grad.assign(p.value.size(), 0.0);
  index_[name] = params_.size();
  names_.push_back(name);
  params_.push_back(std::move(p));
  return params_.back();
}

Param& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw NeuralError("unknown parameter: " + name);
  return params_[it->second];
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw NeuralError("unknown parameter: " + name);
  return params_[it->second];
}

void ParamStore::init_uniform(Rng& rng, double range) {
  for (Param& p : params_)
    for (double& v : p.value) v = rng.uniform(-range, range);
}

void ParamStore::zero_grad() {
  for (Param& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

double ParamStore::grad_norm() const {
  double s = 0.0;
  for (const Param& p : params_)
    for (double g : p.grad) s += g * g;
  return std::sqrt(s);
}

void ParamStore::sgd_step(double lr, double clip) {
  double scale = 1.0;
  if (clip > 0.0) {
    double n = grad_norm();
    if (n > clip) scale = clip / n;
  }
  for (Param& p : params_)
    for (size_t i = 0; i < p.value.size(); ++i) p.value[i] -= lr * scale * p.grad[i];
  ++step_count;
}

size_t ParamStore::total_size() const {
  size_t n = 0;
  for (const Param& p : params_) n += p.size();
  return n;
}

Vec ParamStore::flat_grad() const {
  Vec out;
  out.reserve(total_size());
  for (const Param& p : params_) out.insert(out.end(), p.grad.begin(), p.grad.end());
  return out;
}

std::vector<Param*> ParamStore::all() {
  std::vector<Param*> out;
  for (Param& p : params_) out.push_back(&p);
  return out;
}

// ---------------------------------------------------------------------------

Tape::Id Tape::push(Vec val, std::function<void(Tape&)> back) {
  nodes_.push_back({std::move(val), {}, std::move(back)});
  Node& n = nodes_.back();
  n.grad.assign(n.val.size(), 0.0);
  return static_cast<Id>(nodes_.size()) - 1;
}

Tape::Id Tape::input(Vec v) { return push(std::move(v), nullptr); }

Tape::Id Tape::param_vector(Param& p) {
  Id id = push(p.value, nullptr);
  node(id).back = [id, &p](Tape& t) {
    const Vec& g = t.node(id).grad;
    for (size_t i = 0; i < g.size(); ++i) p.grad[i] += g[i];
  };
  return id;
}

Tape::Id Tape::param_row(Param& p, int row) {
  if (row < 0 || row >= p.rows) throw NeuralError("param_row out of range for " + p.name);
  const size_t off = static_cast<size_t>(row) * p.cols;
  Vec v(p.value.begin() + static_cast<long>(off), p.value.begin() + static_cast<long>(off + p.cols));
  Id id = push(std::move(v), nullptr);
  node(id).back = [id, &p, off](Tape& t) {
    const Vec& g = t.node(id).grad;
    for (size_t i = 0; i < g.size(); ++i) p.grad[off + i] += g[i];
  };
  return id;
}

Tape::Id Tape::affine(Param& w, Id x) {
  const Vec& xv = value(x);
  if (static_cast<size_t>(w.cols) != xv.size())
    throw NeuralError("shape mismatch in affine: " + w.name + " cols=" + std::to_string(w.cols) +
                      " vs x=" + std::to_string(xv.size()));
  Vec y(static_cast<size_t>(w.rows));
  kernels::matvec(w.value.data(), xv.data(), y.data(), w.rows, w.cols);
  Id id = push(std::move(y), nullptr);
  node(id).back = [id, &w, x](Tape& t) {
    const Vec& g = t.node(id).grad;
    const Vec& xv2 = t.value(x);
    kernels::outer_accum(g.data(), xv2.data(), w.grad.data(), w.rows, w.cols);
    kernels::matvec_t_accum(w.value.data(), g.data(), t.node(x).grad.data(), w.rows, w.cols);
  };
  return id;
}

Tape::Id Tape::add(Id a, Id b) {
  const Vec& av = value(a);
  const Vec& bv = value(b);
  if (av.size() != bv.size()) throw NeuralError("shape mismatch in add");
  Vec y(av.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  Id id = push(std::move(y), nullptr);
  node(id).back = [id, a, b](Tape& t) {
    const Vec& g = t.node(id).grad;
    for (size_t i = 0; i < g.size(); ++i) {
      t.node(a).grad[i] += g[i];
      t.node(b).grad[i] += g[i];
    }
  };
  return id;
}

Tape::Id Tape::add(Id a, Id b, Id c) { return add(add(a, b), c); }

Tape::Id Tape::sum(const std::vector<Id>& xs) {
  if (xs.empty()) throw NeuralError("sum of zero nodes");
  Id acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i]);
  return acc;
}

Tape::Id Tape::mul(Id a, Id b) {
  const Vec& av = value(a);
  const Vec& bv = value(b);
  if (av.size() != bv.size()) throw NeuralError("shape mismatch in mul");
  Vec y(av.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  Id id = push(std::move(y), nullptr);
  node(id).back = [id, a, b](Tape& t) {
    const Vec& g = t.node(id).grad;
    const Vec& av2 = t.value(a);
    const Vec& bv2 = t.value(b);
    for (size_t i = 0; i < g.size(); ++i) {
      t.node(a).grad[i] += g[i] * bv2[i];
      t.node(b).grad[i] += g[i] * av2[i];
    }
  };
  return id;
}

Tape::Id Tape::sigmoid(Id x) {
  Vec y = value(x);
  for (double& v : y) v = 1.0 / (1.0 + std::exp(-v));
  Id id = push(std::move(y), nullptr);
  node(id).back = [id, x](Tape& t) {
    const Vec& g = t.node(id).grad;
    const Vec& y2 = t.value(id);
    for (size_t i = 0; i < g.size(); ++i) t.node(x).grad[i] += g[i] * y2[i] * (1.0 - y2[i]);
  };
  return id;
}

Tape::Id Tape::tanh_(Id x) {
  Vec y = value(x);
  for (double& v : y) v = std::tanh(v);
  Id id = push(std::move(y), nullptr);
  node(id).back = [id, x](Tape& t) {
    const Vec& g = t.node(id).grad;
    const Vec& y2 = t.value(id);
    for (size_t i = 0; i < g.size(); ++i) t.node(x).grad[i] += g[i] * (1.0 - y2[i] * y2[i]);
  };
  return id;
}

Tape::Id Tape::exp_(Id x) {
  Vec y = value(x);
  for (double& v : y) v = std::exp(v);
  Id id = push(std::move(y), nullptr);
  node(id).back = [id, x](Tape& t) {
    const Vec& g = t.node(id).grad;
    const Vec& y2 = t.value(id);
    for (size_t i = 0; i < g.size(); ++i) t.node(x).grad[i] += g[i] * y2[i];
  };
  return id;
}

Tape::Id Tape::concat(Id a, Id b) {
  Vec y = value(a);
  y.insert(y.end(), value(b).begin(), value(b).end());
  Id id = push(std::move(y), nullptr);
  const size_t na = value(a).size();
  node(id).back = [id, a, b, na](Tape& t) {
    const Vec& g = t.node(id).grad;
    for (size_t i = 0; i < na; ++i) t.node(a).grad[i] += g[i];
    for (size_t i = na; i < g.size(); ++i) t.node(b).grad[i - na] += g[i];
  };
  return id;
}

Tape::Id Tape::scale(Id x, double c) {
  Vec y = value(x);
  for (double& v : y) v *= c;
  Id id = push(std::move(y), nullptr);
  node(id).back = [id, x, c](Tape& t) {
    const Vec& g = t.node(id).grad;
    for (size_t i = 0; i < g.size(); ++i) t.node(x).grad[i] += g[i] * c;
  };
  return id;
}

Tape::Id Tape::softmax(Id x) {
  const Vec& xv = value(x);
  double m = *std::max_element(xv.begin(), xv.end());
  Vec y(xv.size());
  double z = 0.0;
  for (size_t i = 0; i < xv.size(); ++i) {
    y[i] = std::exp(xv[i] - m);
    z += y[i];
  }
  for (double& v : y) v /= z;
  Id id = push(std::move(y), nullptr);
  node(id).back = [id, x](Tape& t) {
    const Vec& g = t.node(id).grad;
    const Vec& y2 = t.value(id);
    double dot = 0.0;
    for (size_t i = 0; i < g.size(); ++i) dot += g[i] * y2[i];
    for (size_t i = 0; i < g.size(); ++i) t.node(x).grad[i] += y2[i] * (g[i] - dot);
  };
  return id;
}

Vec masked_softmax(const Vec& logits, const std::vector<int>& allowed) {
  if (allowed.empty()) throw NeuralError("masked_softmax with empty mask row");
  double m = logits[static_cast<size_t>(allowed[0])];
  for (int i : allowed) m = std::max(m, logits[static_cast<size_t>(i)]);
  Vec p(allowed.size());
  double z = 0.0;
  for (size_t k = 0; k < allowed.size(); ++k) {
    p[k] = std::exp(logits[static_cast<size_t>(allowed[k])] - m);
    z += p[k];
  }
  for (double& v : p) v /= z;
  return p;
}

Tape::Id Tape::masked_log_softmax_pick(Id logits, const std::vector<int>& allowed, int pick) {
  const Vec& lv = value(logits);
  Vec p = masked_softmax(lv, allowed);
  double logp = 0.0;
  {
    double m = lv[static_cast<size_t>(allowed[0])];
    for (int i : allowed) m = std::max(m, lv[static_cast<size_t>(i)]);
    double z = 0.0;
    for (int i : allowed) z += std::exp(lv[static_cast<size_t>(i)] - m);
    logp = lv[static_cast<size_t>(pick)] - m - std::log(z);
  }
  Id id = push(Vec{logp}, nullptr);
  node(id).back = [id, logits, allowed, pick, p](Tape& t) {
    double g = t.node(id).grad[0];
    for (size_t k = 0; k < allowed.size(); ++k) {
      double ind = allowed[k] == pick ? 1.0 : 0.0;
      t.node(logits).grad[static_cast<size_t>(allowed[k])] += g * (ind - p[k]);
    }
  };
  return id;
}

Tape::Id Tape::bce_from_prob(Id prob_scalar, double label) {
  if (value(prob_scalar).size() != 1) throw NeuralError("bce expects a scalar probability");
  double p = value(prob_scalar)[0];
  const double lo = 1e-7, hi = 1.0 - 1e-7;
  double pc = std::clamp(p, lo, hi);
  double loss = -(label * std::log(pc) + (1.0 - label) * std::log(1.0 - pc));
  Id id = push(Vec{loss}, nullptr);
  bool clamped = p < lo || p > hi;
  node(id).back = [id, prob_scalar, label, pc, clamped](Tape& t) {
    if (clamped) return;
    double g = t.node(id).grad[0];
    t.node(prob_scalar).grad[0] += g * (pc - label) / (pc * (1.0 - pc));
  };
  return id;
}

double Tape::scalar(Id id) const {
  const Vec& v = value(id);
  if (v.size() != 1) throw NeuralError("scalar() on non-scalar node");
  return v[0];
}

void Tape::backward(Id loss, double seed) {
  if (consumed_) throw NeuralError("backward on a consumed tape");
  consumed_ = true;
  if (value(loss).size() != 1) throw NeuralError("backward seed must target a scalar node");
  node(loss).grad[0] = seed;
  for (size_t i = nodes_.size(); i-- > 0;) {
    if (nodes_[i].back) nodes_[i].back(*this);
  }
}

}  // namespace treegan
