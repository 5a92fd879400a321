#pragma once

#include <string>
#include <vector>

#include "treegan/parse_tree.hpp"

namespace treegan {

// One string per line; a trailing newline is required on write and tolerated
// on read. Lines may be empty (the epsilon yield).
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

// Parsed-corpus format: one JSON array per line, entries {"a": action,
// "p": parent step}.
std::vector<ActionSequence> read_action_corpus(const std::string& path);
void write_action_corpus(const std::string& path, const std::vector<ActionSequence>& corpus);

}  // namespace treegan
