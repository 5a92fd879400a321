#include "treegan/cli.hpp"

#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "treegan/checkpoint.hpp"
#include "treegan/corpus_io.hpp"
#include "treegan/datasets.hpp"
#include "treegan/discriminator.hpp"
#include "treegan/generator.hpp"
#include "treegan/metrics.hpp"
#include "treegan/training.hpp"

namespace treegan {

namespace {

struct RunConfig {
  TrainConfig train;
  int embed_dim = 16;
  int hidden_dim = 32;
  int disc_embed_dim = 16;
  int disc_hidden_dim = 32;
};

std::vector<std::string> ws_tokenize(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> tokenize_mode(const std::string& line, const std::string& mode) {
  if (mode == "chars") return tokenize_chars(line);
  if (mode == "sql") return sql_tokenize(line);
  return ws_tokenize(line);
}

std::vector<int> to_symbol_ids(const Grammar& g, const std::vector<std::string>& toks) {
  std::vector<int> ids;
  ids.reserve(toks.size());
  for (const auto& t : toks) {
    int id = g.symbol_id(t);
    if (id < 0 || g.is_nonterminal(id) || g.is_epsilon(id))
      throw std::runtime_error("token '" + t + "' is not a terminal of the grammar");
    ids.push_back(id);
  }
  return ids;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Manual "key = value" config handling: values fill any option of the
// subcommand not already given on the command line; unknown keys are usage
// errors. (CLI11 only honours set_config on the top-level app.)
void apply_config_file(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto eq = line.find('=');
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    if (eq == std::string::npos) {
      if (!trim(line).empty())
        throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (!opt) throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;  // command line wins
    opt->add_result(value);
    opt->run_callback();
  }
}

void add_train_flags(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "key = value configuration file");
  cmd->add_option("--batch", cfg.train.batch_size, "mini-batch size");
  cmd->add_option("--epochs", cfg.train.pretrain_epochs, "pre-training epochs");
  cmd->add_option("--adv-epochs", cfg.train.adv_epochs, "adversarial epoch cap");
  cmd->add_option("--gen-lr", cfg.train.gen_lr, "generator learning rate");
  cmd->add_option("--disc-lr", cfg.train.disc_lr, "discriminator learning rate");
  cmd->add_option("--budget", cfg.train.action_budget,
                  "action budget (0 = 4x the 95th-percentile corpus length)");
  cmd->add_option("--seed", cfg.train.seed, "RNG seed");
  cmd->add_option("--baseline-decay", cfg.train.baseline_decay, "reward baseline decay");
  cmd->add_option("--embed", cfg.embed_dim, "generator embedding width");
  cmd->add_option("--hidden", cfg.hidden_dim, "generator hidden width");
  cmd->add_option("--disc-embed", cfg.disc_embed_dim, "discriminator embedding width");
  cmd->add_option("--disc-hidden", cfg.disc_hidden_dim, "discriminator hidden width");
}

void write_history(const std::string& path, const TrainHistory& h) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << history_to_jsonl(h);
}

std::vector<ParseTree> corpus_trees(const std::vector<ActionSequence>& corpus, const Grammar& g) {
  std::vector<ParseTree> trees;
  trees.reserve(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    try {
      trees.push_back(actions_to_tree(corpus[i], g));
    } catch (const std::exception& e) {
      throw std::runtime_error("sequence " + std::to_string(i) + ": " + e.what());
    }
  }
  return trees;
}

int do_grammar_check(const std::string& path) {
  Grammar g = load_grammar_file(path);
  std::cout << "nonterminals " << g.nonterminals.size() << "\nterminals "
            << g.terminals.size() - 1 << " (+ eps)\nproductions " << g.productions.size()
            << "\nfingerprint " << grammar_fingerprint(g) << "\n";
  return 0;
}

int do_corpus_gen(const std::string& preset, uint64_t seed, const std::string& out_dir,
                  int n_train, int n_test) {
  Rng rng(seed);
  std::string base = out_dir.empty() ? std::string(".") : out_dir;
  if (base.back() == '/') base.pop_back();
  std::filesystem::create_directories(base);

  Grammar g;
  std::vector<std::string> train, test;
  bool sql = preset.rfind("sql", 0) == 0;
  if (preset == "pld" || preset == "pld-desk") {
    PldSpec spec;
    if (preset == "pld-desk") {
      spec.n_train = 500;
      spec.n_test = 100;
    }
    if (n_train > 0) spec.n_train = n_train;
    if (n_test > 0) spec.n_test = n_test;
    PldData data = gen_pld(spec, rng);
    g = std::move(data.grammar);
    train = std::move(data.train);
    test = std::move(data.test);
  } else if (sql) {
    SqlParams params;
    int def_train, def_test;
    if (preset == "sql-a") {
      params = sql_a_params();
      def_train = 50000;
      def_test = 5000;
    } else if (preset == "sql-b") {
      params = sql_b_params();
      def_train = 100000;
      def_test = 5000;
    } else if (preset == "sql-a-desk") {
      params = sql_a_desk_params();
      def_train = 500;
      def_test = 100;
    } else if (preset == "sql-b-desk") {
      params = sql_b_desk_params();
      def_train = 500;
      def_test = 100;
    } else {
      throw CLI::ValidationError("--preset", "unknown preset " + preset);
    }
    if (n_train > 0) def_train = n_train;
    if (n_test > 0) def_test = n_test;
    SqlSpec spec = gen_sql_spec(params, rng);
    g = std::move(spec.grammar);
    train = gen_sql_corpus(g, spec.schema, def_train, rng);
    test = gen_sql_corpus(g, spec.schema, def_test, rng);
    std::ofstream schema_out(base + "/schema.json", std::ios::trunc);
    schema_out << schema_to_json(spec.schema);
  } else {
    throw CLI::ValidationError("--preset", "unknown preset " + preset);
  }

  std::ofstream gout(base + "/grammar.g", std::ios::trunc);
  gout << render_grammar(g);
  write_lines(base + "/train.txt", train);
  write_lines(base + "/test.txt", test);
  std::cout << "wrote " << train.size() << " train / " << test.size() << " test lines to " << base
            << "\n";
  return 0;
}

int do_corpus_parse(const std::string& grammar_path, const std::string& in_path,
                    const std::string& out_path, const std::string& tokens) {
  Grammar g = load_grammar_file(grammar_path);
  std::vector<std::string> lines = read_lines(in_path);
  std::vector<ActionSequence> corpus(lines.size());
  std::vector<std::string> errors(lines.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(lines.size()); ++i) {
    size_t k = static_cast<size_t>(i);
    try {
      corpus[k] = parse_sequence(to_symbol_ids(g, tokenize_mode(lines[k], tokens)), g);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  for (size_t k = 0; k < errors.size(); ++k)
    if (!errors[k].empty())
      throw std::runtime_error(in_path + ":" + std::to_string(k + 1) + ": " + errors[k]);
  write_action_corpus(out_path, corpus);
  std::cout << "parsed " << corpus.size() << " lines\n";
  return 0;
}

int do_pretrain_gen(const RunConfig& cfg, const std::string& grammar_path,
                    const std::string& corpus_path, const std::string& ckpt_out,
                    const std::string& history_path) {
  Grammar g = load_grammar_file(grammar_path);
  MaskMatrix mask = build_mask(g);
  std::vector<ActionSequence> corpus = read_action_corpus(corpus_path);
  Rng rng(cfg.train.seed);
  GeneratorModel gen = GeneratorModel::create(g, cfg.embed_dim, cfg.hidden_dim);
  gen.params.init_uniform(rng);
  TrainHistory h = pretrain_generator(gen, g, mask, corpus, cfg.train, rng);
  save_checkpoint(ckpt_out, g, {&gen.params}, rng,
                  static_cast<uint64_t>(cfg.train.pretrain_epochs));
  write_history(history_path, h);
  if (!h.records.empty())
    std::cout << "final NLL/step " << h.records.back().gen_loss << "\n";
  return 0;
}

int do_pretrain_disc(const RunConfig& cfg, const std::string& grammar_path,
                     const std::string& corpus_path, const std::string& ckpt_out,
                     const std::string& history_path) {
  Grammar g = load_grammar_file(grammar_path);
  std::vector<ParseTree> pos = corpus_trees(read_action_corpus(corpus_path), g);
  Rng rng(cfg.train.seed);
  std::vector<ParseTree> neg = make_twisted_set(pos, g, rng);
  DiscriminatorModel disc = DiscriminatorModel::create(g, cfg.disc_embed_dim, cfg.disc_hidden_dim);
  disc.params.init_uniform(rng);
  TrainHistory h = pretrain_discriminator(disc, g, pos, neg, cfg.train, rng);
  save_checkpoint(ckpt_out, g, {&disc.params}, rng,
                  static_cast<uint64_t>(cfg.train.pretrain_epochs));
  write_history(history_path, h);
  if (!h.records.empty())
    std::cout << "held-out accuracy " << h.records.back().holdout_accuracy << "\n";
  return 0;
}

int do_train_adv(const RunConfig& cfg, const std::string& grammar_path,
                 const std::string& corpus_path, const std::string& gen_ckpt,
                 const std::string& disc_ckpt, const std::string& ckpt_out,
                 const std::string& history_path) {
  Grammar g = load_grammar_file(grammar_path);
  MaskMatrix mask = build_mask(g);
  std::vector<ParseTree> corpus = corpus_trees(read_action_corpus(corpus_path), g);
  Rng rng(cfg.train.seed);
  GeneratorModel gen = GeneratorModel::create(g, cfg.embed_dim, cfg.hidden_dim);
  DiscriminatorModel disc = DiscriminatorModel::create(g, cfg.disc_embed_dim, cfg.disc_hidden_dim);
  gen.params.init_uniform(rng);
  disc.params.init_uniform(rng);
  if (!gen_ckpt.empty()) load_checkpoint(gen_ckpt, g, {&gen.params}, nullptr);
  if (!disc_ckpt.empty()) load_checkpoint(disc_ckpt, g, {&disc.params}, nullptr);
  TrainHistory h = adversarial_train(gen, disc, g, mask, corpus, cfg.train, rng);
  save_checkpoint(ckpt_out, g, {&gen.params, &disc.params}, rng, h.records.size());
  write_history(history_path, h);
  if (!h.records.empty())
    std::cout << "epochs " << h.records.size() << ", final reward "
              << h.records.back().mean_reward << ", syntax rate "
              << h.records.back().syntax_rate << "\n";
  return 0;
}

int do_generate(const RunConfig& cfg, const std::string& grammar_path, const std::string& ckpt,
                int n, const std::string& out_path, const std::string& tokens) {
  Grammar g = load_grammar_file(grammar_path);
  MaskMatrix mask = build_mask(g);
  Rng rng(cfg.train.seed);
  GeneratorModel gen = GeneratorModel::create(g, cfg.embed_dim, cfg.hidden_dim);
  gen.params.init_uniform(rng);
  if (!ckpt.empty()) load_checkpoint(ckpt, g, {&gen.params}, nullptr);
  int budget = cfg.train.action_budget > 0 ? cfg.train.action_budget : 64;
  std::vector<std::string> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    ParseTree t = sample_tree(gen, g, mask, budget, rng);
    std::vector<std::string> toks = yield_texts(t, g);
    std::string line;
    for (size_t k = 0; k < toks.size(); ++k) {
      if (k && tokens != "chars") line += ' ';
      line += toks[k];
    }
    out.push_back(std::move(line));
  }
  write_lines(out_path, out);
  std::cout << "wrote " << out.size() << " samples\n";
  return 0;
}

int do_eval(const std::string& grammar_path, const std::string& refs_path,
            const std::string& cands_path, const std::string& schema_path,
            const std::string& tokens) {
  Grammar g = load_grammar_file(grammar_path);
  auto load = [&](const std::string& p) {
    std::vector<TokenSeq> out;
    for (const auto& line : read_lines(p)) out.push_back(tokenize_mode(line, tokens));
    return out;
  };
  std::vector<TokenSeq> refs = load(refs_path), cands = load(cands_path);
  Schema schema;
  bool have_schema = !schema_path.empty();
  if (have_schema) {
    std::ifstream in(schema_path);
    if (!in) throw std::runtime_error("cannot open " + schema_path);
    std::stringstream ss;
    ss << in.rdbuf();
    schema = schema_from_json(ss.str());
  }
  EvalReport rep = evaluate(cands, refs, g, have_schema ? &schema : nullptr);
  std::cout << report_to_json(rep) << report_to_table(rep);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"grammar-constrained adversarial sequence generation"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string grammar_path, in_path, out_path, corpus_path, history_path;
  std::string gen_ckpt, disc_ckpt, schema_path;
  std::string preset, tokens = "ws";
  std::string config_path;
  uint64_t seed = 0;
  int n_train = 0, n_test = 0, n_samples = 100;

  auto* gcmd = app.add_subcommand("grammar", "grammar utilities");
  auto* gcheck = gcmd->add_subcommand("check", "validate a grammar file");
  gcheck->add_option("file", grammar_path, "grammar file")->required();

  auto* ccmd = app.add_subcommand("corpus", "corpus utilities");
  auto* cgen = ccmd->add_subcommand("gen", "generate a preset corpus");
  cgen->add_option("--preset", preset, "pld, sql-a, sql-b (+ -desk)")->required();
  cgen->add_option("--seed", seed, "RNG seed");
  cgen->add_option("--out", out_path, "output directory")->required();
  cgen->add_option("--n-train", n_train, "override training-set size");
  cgen->add_option("--n-test", n_test, "override test-set size");

  auto* cparse = ccmd->add_subcommand("parse", "parse corpus lines into action sequences");
  cparse->add_option("--grammar", grammar_path, "grammar file")->required();
  cparse->add_option("--in", in_path, "input corpus, one string per line")->required();
  cparse->add_option("--out", out_path, "output action corpus")->required();
  cparse->add_option("--tokens", tokens, "tokenizer: ws, chars, sql");

  auto* pgen = app.add_subcommand("pretrain-gen", "MLE pre-training of the generator");
  pgen->add_option("--grammar", grammar_path, "grammar file")->required();
  pgen->add_option("--corpus", corpus_path, "parsed action corpus")->required();
  pgen->add_option("--out", out_path, "checkpoint output")->required();
  pgen->add_option("--history", history_path, "JSON-lines history output");
  add_train_flags(pgen, cfg, config_path);

  auto* pdisc = app.add_subcommand("pretrain-disc", "discriminator pre-training vs twisted trees");
  pdisc->add_option("--grammar", grammar_path, "grammar file")->required();
  pdisc->add_option("--corpus", corpus_path, "parsed action corpus")->required();
  pdisc->add_option("--out", out_path, "checkpoint output")->required();
  pdisc->add_option("--history", history_path, "JSON-lines history output");
  add_train_flags(pdisc, cfg, config_path);

  auto* adv = app.add_subcommand("train-adv", "adversarial training");
  adv->add_option("--grammar", grammar_path, "grammar file")->required();
  adv->add_option("--corpus", corpus_path, "parsed action corpus")->required();
  adv->add_option("--gen-ckpt", gen_ckpt, "pre-trained generator checkpoint");
  adv->add_option("--disc-ckpt", disc_ckpt, "pre-trained discriminator checkpoint");
  adv->add_option("--out", out_path, "combined checkpoint output")->required();
  adv->add_option("--history", history_path, "JSON-lines history output");
  add_train_flags(adv, cfg, config_path);

  auto* gen = app.add_subcommand("generate", "sample strings from a generator checkpoint");
  gen->add_option("--grammar", grammar_path, "grammar file")->required();
  gen->add_option("--ckpt", gen_ckpt, "generator checkpoint");
  gen->add_option("--n", n_samples, "number of samples");
  gen->add_option("--out", out_path, "output file")->required();
  gen->add_option("--tokens", tokens, "join mode: ws or chars");
  add_train_flags(gen, cfg, config_path);

  auto* ev = app.add_subcommand("eval", "score candidates against references");
  ev->add_option("--grammar", grammar_path, "grammar file")->required();
  ev->add_option("--refs", in_path, "reference strings")->required();
  ev->add_option("--cands", corpus_path, "candidate strings")->required();
  ev->add_option("--schema", schema_path, "schema JSON for the schema rate");
  ev->add_option("--tokens", tokens, "tokenizer: ws, chars, sql");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (!config_path.empty()) {
    try {
      for (CLI::App* cmd : {pgen, pdisc, adv, gen})
        if (cmd->parsed()) apply_config_file(cmd, config_path);
    } catch (const UsageError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  try {
    if (gcheck->parsed()) return do_grammar_check(grammar_path);
    if (cgen->parsed()) return do_corpus_gen(preset, seed, out_path, n_train, n_test);
    if (cparse->parsed()) return do_corpus_parse(grammar_path, in_path, out_path, tokens);
    if (pgen->parsed())
      return do_pretrain_gen(cfg, grammar_path, corpus_path, out_path, history_path);
    if (pdisc->parsed())
      return do_pretrain_disc(cfg, grammar_path, corpus_path, out_path, history_path);
    if (adv->parsed())
      return do_train_adv(cfg, grammar_path, corpus_path, gen_ckpt, disc_ckpt, out_path,
                          history_path);
    if (gen->parsed())
      return do_generate(cfg, grammar_path, gen_ckpt, n_samples, out_path, tokens);
    if (ev->parsed()) return do_eval(grammar_path, in_path, corpus_path, schema_path, tokens);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}

}  // namespace treegan
