#include "treegan/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace treegan {

namespace {

constexpr char kMagic[5] = {'T', 'G', 'A', 'N', '1'};

void put_u64(std::ostream& out, uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

uint64_t get_u64(std::istream& in) {
  char buf[8];
  if (!in.read(buf, 8)) throw CheckpointError("truncated checkpoint");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

double get_f64(std::istream& in) {
  uint64_t bits = get_u64(in);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

void save_checkpoint(const std::string& path, const Grammar& g,
                     const std::vector<const ParamStore*>& stores, const Rng& rng,
                     uint64_t epoch) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path + " for writing");
  out.write(kMagic, 5);
  put_u64(out, grammar_fingerprint(g));
  put_u64(out, epoch);
  for (uint64_t s : rng.state()) put_u64(out, s);
  uint64_t n_blocks = 0;
  for (const auto* store : stores) n_blocks += store->names().size();
  put_u64(out, n_blocks);
  for (const auto* store : stores) {
    for (const auto& name : store->names()) {
      const Param& p = store->at(name);
      put_u64(out, name.size());
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      put_u64(out, static_cast<uint64_t>(p.rows));
      put_u64(out, static_cast<uint64_t>(p.cols));
      for (double v : p.value) put_f64(out, v);
    }
  }
  if (!out) throw CheckpointError("write failed for " + path);
}

CheckpointMeta load_checkpoint(const std::string& path, const Grammar& g,
                               const std::vector<ParamStore*>& stores, Rng* rng) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  char magic[5];
  if (!in.read(magic, 5) || std::memcmp(magic, kMagic, 5) != 0)
    throw CheckpointError("bad checkpoint magic in " + path);

  CheckpointMeta meta;
  meta.fingerprint = get_u64(in);
  if (meta.fingerprint != grammar_fingerprint(g))
    throw CheckpointError("grammar fingerprint mismatch in " + path);
  meta.epoch = get_u64(in);
  for (auto& s : meta.rng_state) s = get_u64(in);

  uint64_t n_blocks = get_u64(in);
  size_t filled = 0;
  for (uint64_t b = 0; b < n_blocks; ++b) {
    uint64_t name_len = get_u64(in);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(name_len)))
      throw CheckpointError("truncated checkpoint");
    uint64_t rows = get_u64(in), cols = get_u64(in);
    ParamStore* target = nullptr;
    for (ParamStore* store : stores)
      if (store->has(name)) target = store;
    if (!target) {
      // Extra blocks are skipped: a combined training checkpoint can feed a
      // consumer that only needs one of the models.
      for (uint64_t i = 0; i < rows * cols; ++i) (void)get_f64(in);
      continue;
    }
    Param& p = target->at(name);
    if (static_cast<uint64_t>(p.rows) != rows || static_cast<uint64_t>(p.cols) != cols)
      throw CheckpointError("shape mismatch for " + name);
    for (double& v : p.value) v = get_f64(in);
    ++filled;
  }
  size_t expected = 0;
  for (ParamStore* store : stores) expected += store->names().size();
  if (filled != expected) throw CheckpointError("checkpoint is missing parameter blocks");
  if (rng) rng->set_state(meta.rng_state);
  return meta;
}

}  // namespace treegan
