#include "treegan/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace treegan {

// ---- Schema ----

const std::vector<Column>* Schema::find_table(const std::string& name) const {
  for (const auto& [tname, cols] : tables)
    if (tname == name) return &cols;
  return nullptr;
}

const Column* Schema::find_column(const std::string& table, const std::string& col) const {
  const auto* cols = find_table(table);
  if (!cols) return nullptr;
  for (const auto& c : *cols)
    if (c.name == col) return &c;
  return nullptr;
}

void Schema::validate() const {
  std::unordered_set<std::string> tnames, cnames;
  for (const auto& [tname, cols] : tables) {
    if (!tnames.insert(tname).second) throw std::invalid_argument("duplicate table " + tname);
    if (cols.empty()) throw std::invalid_argument("table " + tname + " has no columns");
    for (const auto& c : cols)
      if (!cnames.insert(c.name).second) throw std::invalid_argument("duplicate column " + c.name);
  }
}

std::string schema_to_json(const Schema& s) {
  nlohmann::ordered_json tables = nlohmann::ordered_json::object();
  for (const auto& [tname, cols] : s.tables) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : cols)
      arr.push_back({{"col", c.name}, {"type", c.type == ColumnType::Numeric ? "numeric" : "text"}});
    tables[tname] = arr;
  }
  return nlohmann::ordered_json{{"tables", tables}}.dump(2) + "\n";
}

Schema schema_from_json(const std::string& text) {
  auto j = nlohmann::ordered_json::parse(text);
  Schema s;
  for (const auto& [tname, cols] : j.at("tables").items()) {
    std::vector<Column> out;
    for (const auto& c : cols) {
      std::string type = c.at("type").get<std::string>();
      if (type != "numeric" && type != "text")
        throw std::invalid_argument("unknown column type " + type);
      out.push_back({c.at("col").get<std::string>(),
                     type == "numeric" ? ColumnType::Numeric : ColumnType::Text});
    }
    s.tables.emplace_back(tname, std::move(out));
  }
  s.validate();
  return s;
}

// ---- PLD ----

static std::string escape_token(const std::string& t) {
  std::string out;
  for (char c : t) {
    if (c == ';' || c == '|' || c == '#' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

PldData gen_pld(const PldSpec& spec, Rng& rng) {
  if (spec.n_train <= 0 || spec.n_test <= 0 || spec.max_depth <= 0 || spec.terminal_bias <= 0)
    throw std::invalid_argument("PLD spec parameters must be positive");

  std::vector<std::string> letters;
  for (char c = 'A'; c <= 'Z'; ++c) letters.emplace_back(1, c);
  for (char c = 'a'; c <= 'z'; ++c) letters.emplace_back(1, c);

  std::ostringstream text;
  text << "start Pal ;\nterm";
  for (const auto& l : letters) text << ' ' << l;
  text << " ;\nPal -> eps";
  for (const auto& l : letters) text << " | " << l;
  for (const auto& l : letters) text << " | " << l << " Pal " << l;
  text << " ;\n";

  PldData data;
  data.grammar = parse_grammar_text(text.str());

  // Pal -> eps | c (weight terminal_bias each) vs Pal -> c Pal c (weight 1).
  double w_stop = spec.terminal_bias * (1.0 + static_cast<double>(letters.size()));
  double w_rec = static_cast<double>(letters.size());
  auto sample_one = [&]() {
    std::string left, right;
    for (int depth = 0; depth < spec.max_depth; ++depth) {
      double u = rng.next_double() * (w_stop + w_rec);
      if (u < w_rec) {
        const std::string& l = letters[rng.next_below(letters.size())];
        left += l;
        right = l + right;
        continue;
      }
      u -= w_rec;
      if (u < spec.terminal_bias) return left + right;  // Pal -> eps
      return left + letters[rng.next_below(letters.size())] + right;
    }
    return left + right;  // depth cap: forced eps
  };

  for (int i = 0; i < spec.n_train; ++i) data.train.push_back(sample_one());
  for (int i = 0; i < spec.n_test; ++i) data.test.push_back(sample_one());
  return data;
}

std::vector<std::string> tokenize_chars(const std::string& s) {
  std::vector<std::string> out;
  out.reserve(s.size());
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out.emplace_back(1, c);
  return out;
}

// ---- SQL ----

namespace {

const char* const kTableBases[] = {
    "America", "Danmark", "Hungary", "Jamaica", "Brazil",  "Canada",  "Norway",  "Iceland",
    "Austria", "Belgium", "Finland", "Georgia", "Ireland", "Jordan",  "Kenya",   "Latvia",
    "Monaco",  "Nepal",   "Oman",    "Panama",  "Qatar",   "Romania", "Senegal", "Tunisia",
};

const char* const kWordBases[] = {
    "authenticated", "alight",      "driftpin",    "deject",      "hedy",        "jacarta",
    "endogenous",    "epigraphical", "aalesund",   "acoustically", "abalone",    "bandwidth",
    "barnacle",      "bellwether",  "bismuth",     "blithe",      "brocade",     "cadence",
    "calyx",         "candor",      "cartography", "catalyst",    "chambray",    "cinder",
    "cobalt",        "coracle",     "cormorant",   "crescent",    "cupola",      "damask",
    "dapple",        "decibel",     "dewpoint",    "dovetail",    "drumlin",     "eiderdown",
    "ember",         "epoch",       "estuary",     "fathom",      "fennel",      "filament",
    "flotsam",       "foxglove",    "freshet",     "furlong",     "gabion",      "galena",
    "gimbal",        "gloaming",    "gossamer",    "granary",     "gyre",        "halcyon",
    "harrow",        "heliotrope",  "hogback",     "hummock",     "icefall",     "ingot",
    "isthmus",       "jackdaw",     "jasper",      "jetsam",      "jonquil",     "katabatic",
    "keelson",       "kestrel",     "kiln",        "knoll",       "lagoon",      "lanyard",
    "lattice",       "leeward",     "lichen",      "lodestone",   "lumen",       "mangrove",
    "marl",          "meridian",    "mica",        "moraine",     "mullion",     "nacre",
    "nadir",         "nimbus",      "obelisk",     "ochre",       "oriel",       "osprey",
    "oxbow",         "palisade",    "parallax",    "pewter",      "pinnace",     "plover",
    "polder",        "portico",     "pumice",      "quagmire",    "quartzite",   "quay",
    "quillon",       "raceme",      "rampart",     "ravelin",     "rime",        "roulade",
    "runnel",        "saltire",     "sandbar",     "scree",       "selvage",     "shale",
    "sizar",         "skerry",      "sluice",      "solstice",    "spindrift",   "spume",
    "stanchion",     "striation",   "sumac",       "taffrail",    "talus",       "tarn",
    "tessera",       "thicket",     "tiller",      "topaz",       "trellis",     "tundra",
    "umber",         "updraft",     "vellum",      "verdigris",   "vortex",      "wainscot",
    "warble",        "weir",        "whetstone",   "windrow",     "wolfram",     "wrack",
    "xebec",         "yardarm",     "yawl",        "zephyr",      "zenith",      "zircon",
};

std::string nth_name(const char* const* bases, size_t n_bases, size_t i) {
  if (i < n_bases) return bases[i];
  return std::string(bases[i % n_bases]) + std::to_string(i / n_bases);
}

struct Pin {
  const char* column;
  const char* table;
  ColumnType type;
};

// Fixed assignments so the bundled demo queries check out against any schema
// large enough to contain them.
const Pin kPins[] = {
    {"authenticated", "America", ColumnType::Text},
    {"alight", "America", ColumnType::Numeric},
    {"driftpin", "Danmark", ColumnType::Text},
    {"deject", "Danmark", ColumnType::Numeric},
    {"hedy", "Hungary", ColumnType::Text},
    {"jacarta", "Jamaica", ColumnType::Text},
    {"endogenous", "Brazil", ColumnType::Text},
    {"epigraphical", "Brazil", ColumnType::Text},
    {"aalesund", "Danmark", ColumnType::Text},
};

constexpr int kKeywordCount = 14;  // select from where count min max ( ) , ; = != > <
constexpr int kFixedRules = 15;

bool is_number_token(const std::string& t) {
  if (t.empty()) return false;
  return std::all_of(t.begin(), t.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

SqlSpec gen_sql_spec(const SqlParams& params, Rng& rng) {
  (void)rng;  // generation is fully determined by the parameters
  int n_cols = params.n_numeric_cols + params.n_text_cols;
  if (params.n_tables <= 0 || params.n_numeric_cols <= 0 || params.n_text_cols <= 0 ||
      params.vocab_size <= 0 || params.n_num_literals <= 0 || params.n_text_literals <= 0)
    throw std::invalid_argument("SQL grammar parameters must be positive");
  if (n_cols < params.n_tables)
    throw std::invalid_argument("need at least one column per table");

  int n_phrase_words = params.vocab_size - kKeywordCount - params.n_tables - n_cols -
                       params.n_num_literals;
  if (n_phrase_words < params.n_text_literals)
    throw std::invalid_argument("insufficient vocabulary for the requested text literals");

  constexpr size_t kNT = sizeof(kTableBases) / sizeof(kTableBases[0]);
  constexpr size_t kNW = sizeof(kWordBases) / sizeof(kWordBases[0]);

  std::vector<std::string> tables;
  for (int i = 0; i < params.n_tables; ++i) tables.push_back(nth_name(kTableBases, kNT, i));
  std::vector<std::string> cols;
  for (int i = 0; i < n_cols; ++i) cols.push_back(nth_name(kWordBases, kNW, i));
  std::vector<std::string> words;
  for (int i = 0; i < n_phrase_words; ++i)
    words.push_back(nth_name(kWordBases, kNW, static_cast<size_t>(n_cols) + i));
  std::vector<std::string> numerals;
  for (int i = 0; i < params.n_num_literals; ++i) numerals.push_back(std::to_string(i));

  std::unordered_map<std::string, const Pin*> pin_of;
  for (const auto& p : kPins) pin_of[p.column] = &p;

  // Types: pins first, then numeric until the quota is met.
  std::unordered_map<std::string, ColumnType> type_of;
  int numeric_left = params.n_numeric_cols;
  for (const auto& c : cols) {
    auto it = pin_of.find(c);
    if (it != pin_of.end()) {
      type_of[c] = it->second->type;
      if (it->second->type == ColumnType::Numeric) --numeric_left;
    }
  }
  for (const auto& c : cols) {
    if (type_of.count(c)) continue;
    type_of[c] = numeric_left > 0 ? ColumnType::Numeric : ColumnType::Text;
    if (numeric_left > 0) --numeric_left;
  }

  // Tables: pinned columns go to their pinned table; the rest to whichever
  // table currently has the fewest columns, so none stays empty.
  Schema schema;
  std::unordered_map<std::string, size_t> table_idx;
  for (const auto& t : tables) {
    table_idx[t] = schema.tables.size();
    schema.tables.emplace_back(t, std::vector<Column>{});
  }
  for (const auto& c : cols) {
    size_t target;
    auto it = pin_of.find(c);
    if (it != pin_of.end() && table_idx.count(it->second->table)) {
      target = table_idx[it->second->table];
    } else {
      target = 0;
      for (size_t k = 1; k < schema.tables.size(); ++k)
        if (schema.tables[k].second.size() < schema.tables[target].second.size()) target = k;
    }
    schema.tables[target].second.push_back({c, type_of[c]});
  }
  schema.validate();

  // Phrase j gets base or base+1 words; lengths sum to n_phrase_words.
  int base_len = n_phrase_words / params.n_text_literals;
  int remainder = n_phrase_words % params.n_text_literals;

  std::ostringstream text;
  text << "start Query ;\nterm select from where count min max ( ) , \\; = != > <";
  for (const auto& t : tables) text << ' ' << escape_token(t);
  for (const auto& c : cols) text << ' ' << escape_token(c);
  for (const auto& n : numerals) text << ' ' << n;
  for (const auto& w : words) text << ' ' << escape_token(w);
  text << " ;\n";
  text << "Query -> select ColList from Table \\; | select ColList from Table where Cond \\; ;\n";
  text << "ColList -> ColItem | ColItem , ColList ;\n";
  text << "ColItem -> ColRef | Agg ( ColRef ) ;\n";
  text << "Agg -> count | min | max ;\n";
  text << "Cond -> ColRef Op NumLit | ColRef Op TextLit ;\n";
  text << "Op -> = | != | > | < ;\n";
  text << "Table ->";
  for (size_t i = 0; i < tables.size(); ++i) text << (i ? " | " : " ") << escape_token(tables[i]);
  text << " ;\nColRef ->";
  for (size_t i = 0; i < cols.size(); ++i) text << (i ? " | " : " ") << escape_token(cols[i]);
  text << " ;\nNumLit ->";
  for (size_t i = 0; i < numerals.size(); ++i) text << (i ? " | " : " ") << numerals[i];
  text << " ;\nTextLit ->";
  size_t next_word = 0;
  for (int j = 0; j < params.n_text_literals; ++j) {
    text << (j ? " |" : "");
    int len = base_len + (j < remainder ? 1 : 0);
    for (int k = 0; k < len; ++k) text << ' ' << escape_token(words[next_word++]);
  }
  text << " ;\n";

  SqlSpec spec;
  spec.grammar = parse_grammar_text(text.str());
  spec.schema = std::move(schema);

  int expect_rules = kFixedRules + params.n_tables + n_cols + params.n_num_literals +
                     params.n_text_literals;
  if (static_cast<int>(spec.grammar.productions.size()) != expect_rules)
    throw std::logic_error("SQL grammar rule count drifted from the construction");
  return spec;
}

SqlParams sql_a_params() { return {5, 65, 65, 1000, 20, 61}; }
SqlParams sql_b_params() { return {10, 140, 140, 5000, 20, 97}; }
SqlParams sql_a_desk_params() { return {5, 6, 6, 120, 10, 8}; }
SqlParams sql_b_desk_params() { return {6, 8, 8, 180, 10, 12}; }

std::vector<std::string> gen_sql_corpus(const Grammar& g, const Schema& schema, int n, Rng& rng) {
  if (n <= 0) throw std::invalid_argument("corpus size must be positive");
  schema.validate();
  int text_lit = g.symbol_id("TextLit");
  int num_lit = g.symbol_id("NumLit");
  if (text_lit < 0 || num_lit < 0) throw std::invalid_argument("grammar lacks SQL literal rules");

  auto pick_rhs = [&](int head) -> const std::vector<int>& {
    const auto& prods = g.productions_of(head);
    return g.productions[static_cast<size_t>(prods[rng.next_below(prods.size())])].rhs;
  };

  std::vector<std::string> out;
  out.reserve(static_cast<size_t>(n));
  const char* aggs[] = {"count", "min", "max"};
  const char* num_ops[] = {"=", "!=", ">", "<"};
  const char* text_ops[] = {"=", "!="};
  for (int i = 0; i < n; ++i) {
    const auto& [tname, tcols] = schema.tables[rng.next_below(schema.tables.size())];
    std::vector<std::string> toks{"select"};
    size_t n_items = 1 + rng.next_below(3);
    for (size_t k = 0; k < n_items; ++k) {
      if (k) toks.push_back(",");
      const Column& col = tcols[rng.next_below(tcols.size())];
      bool agg = rng.next_double() < 0.3;
      if (agg) {
        const char* a = col.type == ColumnType::Numeric ? aggs[rng.next_below(3)] : "count";
        toks.push_back(a);
        toks.push_back("(");
        toks.push_back(col.name);
        toks.push_back(")");
      } else {
        toks.push_back(col.name);
      }
    }
    toks.push_back("from");
    toks.push_back(tname);
    if (rng.next_double() < 0.5) {
      toks.push_back("where");
      const Column& col = tcols[rng.next_below(tcols.size())];
      toks.push_back(col.name);
      if (col.type == ColumnType::Numeric) {
        toks.push_back(num_ops[rng.next_below(4)]);
        toks.push_back(g.sym(pick_rhs(num_lit)[0]).text);
      } else {
        toks.push_back(text_ops[rng.next_below(2)]);
        for (int s : pick_rhs(text_lit)) toks.push_back(g.sym(s).text);
      }
    }
    toks.push_back(";");
    std::string line;
    for (size_t k = 0; k < toks.size(); ++k) {
      if (k) line += ' ';
      line += toks[k];
    }
    out.push_back(std::move(line));
  }
  return out;
}

std::vector<std::string> sql_tokenize(const std::string& s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '!' && i + 1 < s.size() && s[i + 1] == '=') {
      out.emplace_back("!=");
      i += 2;
      continue;
    }
    if (c == '(' || c == ')' || c == ',' || c == ';' || c == '=' || c == '>' || c == '<') {
      out.emplace_back(1, c);
      ++i;
      continue;
    }
    size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) &&
           std::string("(),;=><!").find(s[j]) == std::string::npos)
      ++j;
    if (j == i) {  // lone '!' not followed by '='
      out.emplace_back(1, c);
      ++i;
      continue;
    }
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

SchemaCheckResult schema_check(const std::string& query, const Schema& schema) {
  SchemaCheckResult res;
  auto flag = [&](std::string msg) {
    res.valid = false;
    res.violations.push_back(std::move(msg));
  };
  std::vector<std::string> toks = sql_tokenize(query);
  auto find_tok = [&](const std::string& t) {
    return std::find(toks.begin(), toks.end(), t) - toks.begin();
  };

  // (a) the FROM table exists
  size_t from_pos = static_cast<size_t>(find_tok("from"));
  std::string table;
  const std::vector<Column>* tcols = nullptr;
  if (from_pos >= toks.size()) {
    flag("missing from clause");
  } else if (from_pos + 1 >= toks.size() || toks[from_pos + 1] == ";" ||
             toks[from_pos + 1] == "where") {
    flag("missing table after from");
  } else {
    table = toks[from_pos + 1];
    tcols = schema.find_table(table);
    if (!tcols) flag("unknown table " + table);
  }

  auto check_column = [&](const std::string& name) {
    if (tcols && !schema.find_column(table, name))
      flag("column " + name + " not in table " + table);
  };

  // select list: (b) columns belong to the table, (d) aggregates wrap columns
  size_t sel_end = std::min(from_pos, toks.size());
  for (size_t i = 0; i < sel_end; ++i) {
    const std::string& t = toks[i];
    if (t == "select" || t == "," || t == ")") continue;
    if (t == "count" || t == "min" || t == "max") {
      if (i + 2 < sel_end && toks[i + 1] == "(") {
        const std::string& arg = toks[i + 2];
        if (is_number_token(arg))
          flag("aggregate " + t + " applied to literal " + arg);
        else
          check_column(arg);
        i += 3;  // skip "( arg" and land on ")"
      } else {
        flag("malformed aggregate " + t);
      }
      continue;
    }
    if (t == "(") continue;
    if (is_number_token(t))
      flag("literal " + t + " in select list");
    else
      check_column(t);
  }

  // where clause: (b) again plus (c) literal/column type match
  size_t where_pos = static_cast<size_t>(find_tok("where"));
  if (where_pos < toks.size()) {
    size_t i = where_pos + 1;
    if (i >= toks.size() || toks[i] == ";") {
      flag("missing condition after where");
    } else {
      const std::string& colname = toks[i];
      check_column(colname);
      const Column* col = tcols ? schema.find_column(table, colname) : nullptr;
      ++i;
      if (i >= toks.size() ||
          (toks[i] != "=" && toks[i] != "!=" && toks[i] != ">" && toks[i] != "<")) {
        flag("missing comparison operator after " + colname);
      } else {
        ++i;
        std::vector<std::string> lit;
        for (; i < toks.size() && toks[i] != ";"; ++i) lit.push_back(toks[i]);
        if (lit.empty()) {
          flag("missing literal in comparison with " + colname);
        } else if (col) {
          bool numeric = lit.size() == 1 && is_number_token(lit[0]);
          if (col->type == ColumnType::Numeric && !numeric)
            flag("column " + colname + " is numeric but compared to text");
          if (col->type == ColumnType::Text && numeric)
            flag("column " + colname + " is text but compared to number " + lit[0]);
        }
      }
    }
  }
  return res;
}

}  // namespace treegan
