#include "treegan/corpus_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace treegan {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<ActionSequence> read_action_corpus(const std::string& path) {
  std::vector<ActionSequence> out;
  size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    ActionSequence seq;
    try {
      auto arr = nlohmann::json::parse(line);
      for (const auto& e : arr)
        seq.steps.push_back({e.at("a").get<int>(), e.at("p").get<int>(), -1});
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(std::move(seq));
  }
  return out;
}

void write_action_corpus(const std::string& path, const std::vector<ActionSequence>& corpus) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& seq : corpus) {
    out << '[';
    for (size_t i = 0; i < seq.steps.size(); ++i) {
      if (i) out << ", ";
      out << "{\"a\": " << seq.steps[i].action << ", \"p\": " << seq.steps[i].parent_step << '}';
    }
    out << "]\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace treegan
