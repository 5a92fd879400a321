#include "treegan/grammar.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

namespace treegan {

namespace {

struct Token {
  std::string text;
  int line;
  bool is_punct;  // unescaped ';' '|' or "->" markers kept literal
};

// Tokenizes grammar text: '#' starts a comment; tokens are whitespace
// delimited; '\' escapes the next character so ';' '|' '#' can be terminals.
std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1;
  std::string cur;
  bool cur_escaped = false;
  auto flush = [&]() {
    if (!cur.empty()) {
      out.push_back({cur, line, false});
      cur.clear();
      cur_escaped = false;
    }
  };
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\\' && i + 1 < text.size()) {
      cur += text[++i];
      cur_escaped = true;
      continue;
    }
    if (c == '#') {
      flush();
      while (i < text.size() && text[i] != '\n') ++i;
      --i;
      continue;
    }
    if (c == '\n') {
      flush();
      out.push_back({"\n", line, true});
      ++line;
      continue;
    }
    if (c == ';' || c == '|') {
      flush();
      out.push_back({std::string(1, c), line, true});
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
      continue;
    }
    cur += c;
  }
  flush();
  return out;
}

struct Statement {
  std::vector<std::string> words;  // '|' kept as a word for rule statements
  int line;
};

}  // namespace

int Grammar::find_production(int head, const std::vector<int>& rhs) const {
  for (int pid : productions_of(head)) {
    if (productions[static_cast<size_t>(pid)].rhs == rhs) return pid;
  }
  return -1;
}

void Grammar::finalize() {
  by_text_.clear();
  nt_index_.clear();
  term_index_.clear();
  nonterminals.clear();
  terminals.clear();
  for (const Symbol& s : symbols) {
    by_text_[s.text] = s.id;
    if (s.kind == SymbolKind::Nonterminal) {
      nt_index_[s.id] = static_cast<int>(nonterminals.size());
      nonterminals.push_back(s.id);
    } else {
      term_index_[s.id] = static_cast<int>(terminals.size());
      terminals.push_back(s.id);
    }
  }
  prods_by_head_.assign(nonterminals.size(), {});
  for (const ProductionRule& p : productions) {
    prods_by_head_[static_cast<size_t>(nt_index(p.head))].push_back(p.id);
  }
}

Grammar parse_grammar_text(const std::string& text) {
  std::vector<Token> tokens = tokenize(text);

  // Split into statements at unescaped ';' and newlines.
  std::vector<Statement> stmts;
  Statement cur{{}, 1};
  for (const Token& t : tokens) {
    if (t.is_punct && (t.text == ";" || t.text == "\n")) {
      if (!cur.words.empty()) stmts.push_back(cur);
      cur.words.clear();
      cur.line = t.line + (t.text == "\n" ? 1 : 0);
      continue;
    }
    if (cur.words.empty()) cur.line = t.line;
    cur.words.push_back(t.text);
  }
  if (!cur.words.empty()) stmts.push_back(cur);

  // First pass: classify symbols. Heads and the start symbol are
  // nonterminals, `term` statements declare terminals.
  std::string start_text;
  int start_line = -1;
  std::vector<std::pair<std::string, bool>> declared;  // (text, is_terminal)
  auto declare = [&](const std::string& w, bool is_term, int line) {
    for (auto& [t, k] : declared) {
      if (t == w) {
        if (k != is_term)
          throw GrammarError("line " + std::to_string(line) + ": symbol '" + w +
                             "' declared both terminal and nonterminal");
        return;
      }
    }
    declared.emplace_back(w, is_term);
  };
  for (const Statement& s : stmts) {
    if (s.words[0] == "start") {
      if (s.words.size() != 2)
        throw GrammarError("line " + std::to_string(s.line) + ": start expects one symbol");
      if (!start_text.empty())
        throw GrammarError("line " + std::to_string(s.line) + ": duplicate start statement");
      start_text = s.words[1];
      start_line = s.line;
      declare(start_text, false, s.line);
    } else if (s.words[0] == "term") {
      // An empty list is allowed: a grammar may have no terminal besides eps.
      for (size_t i = 1; i < s.words.size(); ++i) {
        if (s.words[i] == "eps")
          throw GrammarError("line " + std::to_string(s.line) + ": 'eps' is reserved");
        declare(s.words[i], true, s.line);
      }
    } else if (s.words.size() >= 2 && s.words[1] == "->") {
      declare(s.words[0], false, s.line);
    } else {
      throw GrammarError("line " + std::to_string(s.line) + ": cannot parse statement starting '" +
                         s.words[0] + "'");
    }
  }
  if (start_text.empty()) throw GrammarError("no start symbol");

  // Symbol ids in first textual appearance order.
  Grammar g;
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> errors;
  auto intern = [&](const std::string& w, int line) -> int {
    auto it = ids.find(w);
    if (it != ids.end()) return it->second;
    bool found = false, is_term = false;
    for (auto& [t, k] : declared) {
      if (t == w) {
        found = true;
        is_term = k;
        break;
      }
    }
    if (!found) {
      errors.push_back("line " + std::to_string(line) + ": undeclared symbol '" + w + "'");
      return -1;
    }
    Symbol s;
    s.id = static_cast<int>(g.symbols.size());
    s.text = w;
    s.kind = is_term ? SymbolKind::Terminal : SymbolKind::Nonterminal;
    ids[w] = s.id;
    g.symbols.push_back(s);
    return s.id;
  };

  for (const Statement& s : stmts) {
    if (s.words[0] == "start") {
      g.start = intern(start_text, s.line);
    } else if (s.words[0] == "term") {
      for (size_t i = 1; i < s.words.size(); ++i) intern(s.words[i], s.line);
    }
  }

  // Epsilon is a distinguished terminal with empty text, appended after all
  // declared symbols so ids stay dense and deterministic.
  {
    Symbol eps;
    eps.id = static_cast<int>(g.symbols.size());
    eps.text = "";
    eps.kind = SymbolKind::Epsilon;
    g.epsilon = eps.id;
    g.symbols.push_back(eps);
  }

  for (const Statement& s : stmts) {
    if (s.words[0] == "start" || s.words[0] == "term") continue;
    int head = intern(s.words[0], s.line);
    if (head >= 0 && g.symbols[static_cast<size_t>(head)].kind != SymbolKind::Nonterminal) {
      errors.push_back("line " + std::to_string(s.line) + ": terminal '" + s.words[0] +
                       "' on a rule's left side");
      continue;
    }
    std::vector<std::vector<int>> alts;
    std::vector<int> rhs;
    bool saw_eps = false;
    auto close_alt = [&]() {
      if (rhs.empty())
        errors.push_back("line " + std::to_string(s.line) + ": empty alternative");
      else if (saw_eps && rhs.size() > 1)
        errors.push_back("line " + std::to_string(s.line) + ": eps must stand alone");
      else
        alts.push_back(rhs);
      rhs.clear();
      saw_eps = false;
    };
    for (size_t i = 2; i < s.words.size(); ++i) {
      if (s.words[i] == "|") {
        close_alt();
        continue;
      }
      if (s.words[i] == "eps") {
        rhs.push_back(g.epsilon);
        saw_eps = true;
      } else {
        int id = intern(s.words[i], s.line);
        if (id >= 0) rhs.push_back(id);
      }
    }
    close_alt();
    if (head < 0) continue;
    for (auto& a : alts) {
      ProductionRule p;
      p.id = static_cast<int>(g.productions.size());
      p.head = head;
      p.rhs = std::move(a);
      g.productions.push_back(std::move(p));
    }
  }

  g.finalize();

  // Every nonterminal must head at least one rule.
  std::vector<bool> has_rule(g.symbols.size(), false);
  for (const auto& p : g.productions) has_rule[static_cast<size_t>(p.head)] = true;
  for (int nt : g.nonterminals) {
    if (!has_rule[static_cast<size_t>(nt)])
      errors.push_back("nonterminal '" + g.sym(nt).text + "' has no production");
  }

  // Productivity: least fixed point over "derives a finite terminal string".
  std::vector<bool> productive(g.symbols.size(), false);
  for (int t : g.terminals) productive[static_cast<size_t>(t)] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& p : g.productions) {
      if (productive[static_cast<size_t>(p.head)]) continue;
      bool all = true;
      for (int s : p.rhs) all = all && productive[static_cast<size_t>(s)];
      if (all) {
        productive[static_cast<size_t>(p.head)] = true;
        changed = true;
      }
    }
  }
  for (int nt : g.nonterminals) {
    if (has_rule[static_cast<size_t>(nt)] && !productive[static_cast<size_t>(nt)])
      errors.push_back("nonterminal '" + g.sym(nt).text + "' is unproductive");
  }

  // Reachability from start.
  if (g.start >= 0) {
    std::vector<bool> reach(g.symbols.size(), false);
    std::queue<int> q;
    reach[static_cast<size_t>(g.start)] = true;
    q.push(g.start);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      if (g.sym(v).kind != SymbolKind::Nonterminal) continue;
      for (int pid : g.productions_of(v)) {
        for (int s : g.productions[static_cast<size_t>(pid)].rhs) {
          if (!reach[static_cast<size_t>(s)]) {
            reach[static_cast<size_t>(s)] = true;
            q.push(s);
          }
        }
      }
    }
    for (int nt : g.nonterminals) {
      if (!reach[static_cast<size_t>(nt)])
        errors.push_back("nonterminal '" + g.sym(nt).text + "' is unreachable from start");
    }
  }

  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) {
      if (!msg.empty()) msg += "; ";
      msg += e;
    }
    throw GrammarError(msg);
  }
  return g;
}

Grammar load_grammar_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GrammarError("cannot open grammar file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grammar_text(buf.str());
}

namespace {
std::string escape_token(const std::string& t) {
  std::string out;
  for (char c : t) {
    if (c == ';' || c == '|' || c == '#' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}
}  // namespace

std::string render_grammar(const Grammar& g) {
  std::ostringstream out;
  out << "start " << escape_token(g.sym(g.start).text) << " ;\n";
  out << "term";
  for (int t : g.terminals) {
    if (t == g.epsilon) continue;
    out << " " << escape_token(g.sym(t).text);
  }
  out << " ;\n";
  // Group alternatives by head, keeping production-id order within each head
  // and first-production order across heads.
  std::vector<int> head_order;
  for (const auto& p : g.productions) {
    if (std::find(head_order.begin(), head_order.end(), p.head) == head_order.end())
      head_order.push_back(p.head);
  }
  for (int head : head_order) {
    out << escape_token(g.sym(head).text) << " ->";
    bool first = true;
    for (int pid : g.productions_of(head)) {
      if (!first) out << " |";
      first = false;
      for (int s : g.productions[static_cast<size_t>(pid)].rhs) {
        out << " " << (s == g.epsilon ? "eps" : escape_token(g.sym(s).text));
      }
    }
    out << " ;\n";
  }
  return out.str();
}

uint64_t grammar_fingerprint(const Grammar& g) {
  // FNV-1a 64 over the canonical rendering.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : render_grammar(g)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

MaskMatrix build_mask(const Grammar& g) {
  ActionVocabulary vocab = action_vocab(g);
  MaskMatrix m;
  m.n_rows = static_cast<int>(g.nonterminals.size());
  m.n_cols = vocab.size();
  m.bits.assign(static_cast<size_t>(m.n_rows) * m.n_cols, 0);
  for (const auto& p : g.productions) {
    int row = g.nt_index(p.head);
    m.bits[static_cast<size_t>(row) * m.n_cols + p.id] = 1;
  }
  return m;
}

ActionVocabulary action_vocab(const Grammar& g) {
  ActionVocabulary v;
  v.n_productions = static_cast<int>(g.productions.size());
  v.n_terminals = static_cast<int>(g.terminals.size());
  return v;
}

int symbol_completion_cost(const Grammar& g, const std::unordered_map<int, int>& cost, int sym_id) {
  if (g.is_epsilon(sym_id)) return 0;
  if (!g.is_nonterminal(sym_id)) return 1;
  return cost.at(sym_id);
}

std::unordered_map<int, int> min_completion_cost(const Grammar& g) {
  constexpr int kInf = 1 << 28;
  std::unordered_map<int, int> cost;
  for (int nt : g.nonterminals) cost[nt] = kInf;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& p : g.productions) {
      long long c = 1;
      for (int s : p.rhs) {
        if (g.is_epsilon(s))
          continue;
        else if (!g.is_nonterminal(s))
          c += 1;
        else
          c += cost[s];
      }
      if (c < cost[p.head]) {
        cost[p.head] = static_cast<int>(std::min<long long>(c, kInf));
        changed = true;
      }
    }
  }
  // Grammar validity guarantees productivity, hence finiteness.
  for (auto& [nt, c] : cost) {
    if (c >= kInf) throw GrammarError("unproductive nonterminal in validated grammar");
  }
  return cost;
}

}  // namespace treegan
