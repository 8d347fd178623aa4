#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "coordparse/bench.hpp"
#include "coordparse/checkpoint.hpp"
#include "coordparse/corpus.hpp"
#include "coordparse/datagen.hpp"
#include "coordparse/eval.hpp"
#include "coordparse/kernels.hpp"
#include "coordparse/training.hpp"
#include "coordparse/treepattern.hpp"

namespace {

using namespace coordparse;
using nlohmann::json;

// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric/training failure.
constexpr int kUsageError = 2;
constexpr int kDataError = 3;
constexpr int kNumericError = 4;

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<Tag> predict_tags(TaggerModel<float>& model, const std::vector<std::string>& tokens) {
  std::vector<int> ids = model.predict(tokens);
  std::vector<Tag> tags(ids.size());
  for (size_t t = 0; t < ids.size(); ++t) tags[t] = static_cast<Tag>(ids[t]);
  return tags;
}

std::vector<std::string> tokenize_utterance(const std::string& text) {
  std::istringstream ss(text);
  std::vector<std::string> toks;
  std::string t;
  while (ss >> t) {
    for (char& c : t)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    toks.push_back(t);
  }
  return toks;
}

int cmd_generate(const std::string& grammar_dir, int size, std::uint64_t seed,
                 const std::string& out_dir, const std::string& slots,
                 const std::string& conjunction, bool comma, bool unseen, int per_slot,
                 const std::string& train_types, const std::string& out_file) {
  datagen::GenConfig cfg;
  cfg.conjunction = conjunction;
  cfg.corpus_size = size;
  cfg.seed = seed;
  cfg.insert_comma = comma;
  datagen::Grammar grammar = datagen::load_grammar(grammar_dir, split_csv(slots));
  if (unseen) {
    auto data = datagen::generate_unseen_testset(grammar, split_csv(train_types), per_slot, cfg);
    write_corpus(out_file, data);
    std::cout << "{\"written\":" << data.size() << ",\"file\":\"" << out_file << "\"}\n";
    return 0;
  }
  DatasetSplit split = datagen::generate_corpus(grammar, cfg);
  std::filesystem::create_directories(out_dir);
  write_corpus(out_dir + "/train.jsonl", split.train);
  write_corpus(out_dir + "/valid.jsonl", split.validation);
  write_corpus(out_dir + "/test.jsonl", split.test);
  std::cout << "{\"train\":" << split.train.size() << ",\"valid\":" << split.validation.size()
            << ",\"test\":" << split.test.size() << "}\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& train_path,
              const std::string& valid_path, const std::string& out_path,
              const std::string& log_path, std::int64_t seed_override) {
  training::TrainConfig cfg = training::load_train_config(config_path);
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  DatasetSplit data;
  data.train = read_corpus(train_path);
  data.validation = read_corpus(valid_path);

  training::TrainResult res = training::train(cfg, data);
  save_checkpoint(res.model, out_path);

  std::ostringstream log;
  log << "{\"seed\":" << cfg.seed << "}\n";
  for (const auto& rec : res.log) log << rec.to_json() << "\n";
  if (!log_path.empty()) {
    std::ofstream lf(log_path);
    lf << log.str();
  } else {
    std::cout << log.str();
  }
  return 0;
}

int cmd_tag(const std::string& model_path, const std::string& text) {
  TaggerModel<float> model = load_checkpoint(model_path);
  auto emit = [&](const std::string& line) {
    auto tokens = tokenize_utterance(line);
    if (tokens.empty()) throw std::invalid_argument("empty utterance");
    std::vector<Tag> tags = predict_tags(model, tokens);
    json j;
    j["tokens"] = tokens;
    std::vector<std::string> names;
    for (Tag t : tags) names.push_back(tag_name(t));
    j["tags"] = names;
    j["slot_type"] = "";
    json spans = json::array();
    for (const auto& s : decode_bio(tags)) spans.push_back({s.start, s.end});
    j["spans"] = spans;
    std::cout << j.dump() << "\n";
  };
  if (!text.empty()) {
    emit(text);
  } else {
    std::string line;
    while (std::getline(std::cin, line)) {
      if (!line.empty()) emit(line);
    }
  }
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& test_path, bool by_slot,
             const std::string& format) {
  TaggerModel<float> model = load_checkpoint(model_path);
  auto testset = read_corpus(test_path);
  eval::EvalReport rep = eval::evaluate(
      [&](const std::vector<std::string>& toks) { return predict_tags(model, toks); }, testset,
      by_slot);
  std::cout << eval::format_report(rep, format);
  return 0;
}

int cmd_bench(const std::string& model_path, const std::string& corpus_path, int warmup) {
  TaggerModel<float> model = load_checkpoint(model_path);
  auto corpus = read_corpus(corpus_path);
  bench::LatencyReport r = bench::measure_latency(
      [&](const std::vector<std::string>& toks) { (void)model.predict(toks); }, corpus, warmup);
  json j{{"p90_ms", r.p90_ms},
         {"p99_ms", r.p99_ms},
         {"utterances", r.utterances},
         {"hardware", r.hardware_note},
         {"model_size_bytes", model_size(model_path)}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_mine_patterns(const std::string& trees_path, const std::string& gold_path,
                      const std::string& out_path) {
  std::vector<std::string> errors;
  auto trees = treepattern::read_trees(trees_path, &errors);
  for (const auto& e : errors) std::cerr << "{\"warning\":\"" << e << "\"}\n";
  auto gold = read_corpus(gold_path);
  if (trees.size() != gold.size()) {
    throw std::invalid_argument("trees/gold size mismatch: " + std::to_string(trees.size()) +
                                " vs " + std::to_string(gold.size()));
  }
  std::vector<std::pair<const treepattern::ConstituencyTree*, std::vector<ConjunctSpan>>> pairs;
  for (size_t i = 0; i < trees.size(); ++i) {
    pairs.emplace_back(&trees[i], decode_bio(gold[i].tags));
  }
  auto patterns = treepattern::mine_patterns(pairs);
  treepattern::write_patterns(out_path, patterns);
  std::cout << "{\"patterns\":" << patterns.size() << "}\n";
  return 0;
}

int cmd_eval_trees(const std::string& trees_path, const std::string& patterns_path,
                   const std::string& gold_path, const std::string& format) {
  auto trees = treepattern::read_trees(trees_path);
  auto patterns = treepattern::read_patterns(patterns_path);
  auto gold = read_corpus(gold_path);
  if (trees.size() != gold.size()) {
    throw std::invalid_argument("trees/gold size mismatch");
  }
  eval::EvalReport rep;
  for (size_t i = 0; i < trees.size(); ++i) {
    eval::PrfCounts c;
    auto pred = treepattern::match_and_extract(trees[i], patterns);
    eval::conjunct_prf(pred, decode_bio(gold[i].tags), c.tp, c.fp, c.fn);
    // token-level exact match for the baseline: spans plus CC/O reconstruction
    std::vector<int> cc;
    for (size_t t = 0; t < gold[i].tags.size(); ++t) {
      if (gold[i].tags[t] == Tag::CC) cc.push_back(static_cast<int>(t));
    }
    try {
      auto pred_tags = encode_bio(pred, cc, static_cast<int>(gold[i].tags.size()));
      c.exact = eval::exact_match(pred_tags, gold[i].tags);
    } catch (const BioValidationError&) {
      c.exact = 0;  // predicted spans collide with gold CC positions
    }
    c.utterances = 1;
    rep.overall.add(c);
    rep.by_bucket[eval::bucket_key(gold[i].conjunct_count)].add(c);
  }
  std::cout << eval::format_report(rep, format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordination parsing toolkit"};
  app.require_subcommand(1);

  int threads = 1;
  app.add_option("--threads", threads, "OpenMP threads for math kernels");

  // generate
  auto* gen = app.add_subcommand("generate", "synthesize a labeled coordination corpus");
  std::string grammar_dir, out_dir = "corpus", slots, conjunction = "and";
  std::string train_types, out_file = "unseen.jsonl";
  int size = 10000, per_slot = 1000;
  std::uint64_t seed = 0;
  bool comma = false, unseen = false;
  gen->add_option("--grammar", grammar_dir, "grammar directory (catalogs/ + carriers/)")->required();
  gen->add_option("--size", size, "number of utterances");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--out-dir", out_dir, "output directory for train/valid/test splits");
  gen->add_option("--slots", slots, "comma-separated slot type subset");
  gen->add_option("--conjunction", conjunction, "coordinating conjunction token");
  gen->add_flag("--comma", comma, "insert ',' between non-final conjuncts");
  gen->add_flag("--unseen", unseen, "generate an unseen-slot test set instead of splits");
  gen->add_option("--per-slot", per_slot, "utterances per unseen slot type");
  gen->add_option("--train-types", train_types, "training slot types (unseen mode disjointness check)");
  gen->add_option("--out", out_file, "output file (unseen mode)");

  // train
  auto* tr = app.add_subcommand("train", "train a tagger");
  std::string config_path, train_path, valid_path, ckpt_path = "model.ckpt", log_path;
  std::int64_t seed_override = -1;
  tr->add_option("--config", config_path, "JSON training config")->required();
  tr->add_option("--train", train_path, "training corpus")->required();
  tr->add_option("--valid", valid_path, "validation corpus")->required();
  tr->add_option("--out", ckpt_path, "output checkpoint");
  tr->add_option("--log", log_path, "training log file (stdout if omitted)");
  tr->add_option("--seed", seed_override, "override the config seed");

  // tag
  auto* tg = app.add_subcommand("tag", "tag utterances (stdin or --text)");
  std::string tag_model, tag_text;
  tg->add_option("--model", tag_model, "checkpoint")->required();
  tg->add_option("--text", tag_text, "single utterance");

  // eval
  auto* ev = app.add_subcommand("eval", "conjunct-level evaluation");
  std::string eval_model, eval_test, eval_format = "table";
  bool by_slot = false;
  ev->add_option("--model", eval_model, "checkpoint")->required();
  ev->add_option("--test", eval_test, "test corpus")->required();
  ev->add_flag("--by-slot", by_slot, "include per-slot-type metrics");
  ev->add_option("--format", eval_format, "table|records");

  // bench
  auto* be = app.add_subcommand("bench", "latency percentiles + model size");
  std::string bench_model, bench_corpus;
  int warmup = 10;
  be->add_option("--model", bench_model, "checkpoint")->required();
  be->add_option("--corpus", bench_corpus, "corpus to time")->required();
  be->add_option("--warmup", warmup, "warmup inference calls (discarded)");

  // mine-patterns
  auto* mp = app.add_subcommand("mine-patterns", "mine tree patterns from parses + gold spans");
  std::string mp_trees, mp_gold, mp_out = "patterns.txt";
  mp->add_option("--trees", mp_trees, "bracketed parse trees, one per line")->required();
  mp->add_option("--gold", mp_gold, "gold corpus aligned with the trees")->required();
  mp->add_option("--out", mp_out, "pattern output file");

  // eval-trees
  auto* et = app.add_subcommand("eval-trees", "evaluate the tree-pattern baseline");
  std::string et_trees, et_patterns, et_gold, et_format = "table";
  et->add_option("--trees", et_trees, "bracketed parse trees")->required();
  et->add_option("--patterns", et_patterns, "mined pattern file")->required();
  et->add_option("--gold", et_gold, "gold corpus")->required();
  et->add_option("--format", et_format, "table|records");

  CLI11_PARSE(app, argc, argv);
  coordparse::kernels::set_threads(threads);

  try {
    if (*gen)
      return cmd_generate(grammar_dir, size, seed, out_dir, slots, conjunction, comma, unseen,
                          per_slot, train_types, out_file);
    if (*tr) return cmd_train(config_path, train_path, valid_path, ckpt_path, log_path, seed_override);
    if (*tg) return cmd_tag(tag_model, tag_text);
    if (*ev) return cmd_eval(eval_model, eval_test, by_slot, eval_format);
    if (*be) return cmd_bench(bench_model, bench_corpus, warmup);
    if (*mp) return cmd_mine_patterns(mp_trees, mp_gold, mp_out);
    if (*et) return cmd_eval_trees(et_trees, et_patterns, et_gold, et_format);
  } catch (const std::invalid_argument& e) {
    std::cerr << "{\"error\":\"" << e.what() << "\",\"code\":" << kDataError << "}\n";
    return kDataError;
  } catch (const std::runtime_error& e) {
    const bool numeric = std::string(e.what()).find("non-finite") != std::string::npos;
    const int code = numeric ? kNumericError : kDataError;
    std::cerr << "{\"error\":\"" << e.what() << "\",\"code\":" << code << "}\n";
    return code;
  }
  return kUsageError;
}
