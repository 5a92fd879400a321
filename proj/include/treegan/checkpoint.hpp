#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "treegan/grammar.hpp"
#include "treegan/rng.hpp"
#include "treegan/tensor.hpp"

namespace treegan {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary layout (all integers little-endian u64, values f64 LE):
//   "TGAN1" | grammar fingerprint | epoch | rng state x4 | n_blocks |
//   blocks: name_len, name bytes, rows, cols, rows*cols values.
void save_checkpoint(const std::string& path, const Grammar& g,
                     const std::vector<const ParamStore*>& stores, const Rng& rng,
                     uint64_t epoch);

struct CheckpointMeta {
  uint64_t fingerprint = 0;
  uint64_t epoch = 0;
  std::array<uint64_t, 4> rng_state{};
};

// Fills the stores' existing parameters by name (shapes must match) and
// restores the RNG when given. Throws CheckpointError on bad magic,
// truncation, fingerprint mismatch, or missing/mismatched blocks.
CheckpointMeta load_checkpoint(const std::string& path, const Grammar& g,
                               const std::vector<ParamStore*>& stores, Rng* rng);

}  // namespace treegan
