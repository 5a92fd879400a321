#pragma once

#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "treegan/rng.hpp"

namespace treegan {

struct NeuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;

struct Param {
  std::string name;
  int rows = 0;
  int cols = 0;  // 1 for vectors
  Vec value;
  Vec grad;
  size_t size() const { return static_cast<size_t>(rows) * cols; }
};

// Named parameters with value and gradient buffers. Insertion order is the
// canonical order for checkpoints and gradient flattening.
class ParamStore {
 public:
  Param& add(const std::string& name, int rows, int cols);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) != 0; }

  void init_uniform(Rng& rng, double range = 0.08);
  void zero_grad();
  double grad_norm() const;
  // One SGD step; gradients rescaled when their global norm exceeds clip
  // (clip <= 0 disables clipping).
  void sgd_step(double lr, double clip = 5.0);

  size_t total_size() const;
  Vec flat_grad() const;

  const std::vector<std::string>& names() const { return names_; }
  std::vector<Param*> all();

  long long step_count = 0;

 private:
  std::deque<Param> params_;  // deque: stable addresses for tape references
  std::unordered_map<std::string, size_t> index_;
  std::vector<std::string> names_;
};

// Reverse-mode tape over vector-valued nodes. One backward pass per forward
// recording; gradients accumulate additively at fan-out and flow into the
// ParamStore buffers of any parameters touched.
class Tape {
 public:
  using Id = int;

  Id input(Vec v);
  Id param_vector(Param& p);
  Id param_row(Param& p, int row);

  Id affine(Param& w, Id x);  // W x
  Id add(Id a, Id b);
  Id add(Id a, Id b, Id c);
  Id sum(const std::vector<Id>& xs);
  Id mul(Id a, Id b);
  Id sigmoid(Id x);
  Id tanh_(Id x);
  Id exp_(Id x);
  Id concat(Id a, Id b);
  Id scale(Id x, double c);
  Id softmax(Id x);

  // log of the masked-renormalized softmax probability of `pick`;
  // `allowed` must be nonempty and contain `pick`.
  Id masked_log_softmax_pick(Id logits, const std::vector<int>& allowed, int pick);

  // Binary cross-entropy with the probability clamped to [1e-7, 1-1e-7].
  Id bce_from_prob(Id prob_scalar, double label);

  const Vec& value(Id id) const { return nodes_[static_cast<size_t>(id)].val; }
  double scalar(Id id) const;
  size_t size() const { return nodes_.size(); }

  void backward(Id loss, double seed = 1.0);

 private:
  struct Node {
    Vec val;
    Vec grad;
    std::function<void(Tape&)> back;  // empty for leaves without params
  };
  std::vector<Node> nodes_;
  bool consumed_ = false;

  Id push(Vec val, std::function<void(Tape&)> back);
  Node& node(Id id) { return nodes_[static_cast<size_t>(id)]; }
};

// Masked softmax over `allowed` entries of `logits` (plain arithmetic, no
// tape); returns probabilities aligned with `allowed`, summing to 1.
Vec masked_softmax(const Vec& logits, const std::vector<int>& allowed);

}  // namespace treegan
