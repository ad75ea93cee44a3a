#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "misc/app/config.hpp"
#include "misc/commonsense/blocks.hpp"
#include "misc/corpus/io.hpp"
#include "misc/corpus/preprocess.hpp"
#include "misc/corpus/synthetic.hpp"
#include "misc/corpus/vocabulary.hpp"
#include "misc/decoder/generate.hpp"
#include "misc/evalkit/attention.hpp"
#include "misc/evalkit/report.hpp"
#include "misc/evalkit/stages.hpp"
#include "misc/model.hpp"
#include "misc/numerics/checkpoint.hpp"
#include "misc/numerics/gradcheck.hpp"
#include "misc/training/train.hpp"

namespace misc::app {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- prepare-data

struct PrepareOptions {
  std::optional<std::string> corpus;  // ESConv-format JSONL
  std::size_t synthetic = 0;          // or: generate this many toy dialogues
  std::size_t synthetic_turns = 2;
  std::string out_dir;
  corpus::PreprocessConfig preprocess;
  std::size_t min_freq = 1;
};

struct PrepareResult {
  corpus::Splits splits;
  corpus::Vocabulary vocabulary;
  std::vector<corpus::LineError> errors;
};

inline std::string vocabulary_text(const corpus::Vocabulary& v) {
  std::string out;
  for (const auto& t : v.tokens()) out += t + '\n';
  return out;
}

inline corpus::Vocabulary read_vocabulary(const std::string& path) {
  std::vector<std::string> tokens;
  const std::string text = corpus::read_text_file(path);
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    tokens.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return corpus::Vocabulary::from_tokens(tokens);
}

/// Corpus → train/dev/test JSONL plus a vocabulary built on train.
inline PrepareResult prepare_data(const PrepareOptions& opt) {
  PrepareResult result;
  std::vector<corpus::Dialogue> dialogues;
  if (opt.corpus) {
    auto load = corpus::load_corpus(*opt.corpus);
    dialogues = std::move(load.dialogues);
    result.errors = std::move(load.errors);
  } else if (opt.synthetic > 0) {
    dialogues = corpus::synthetic_dialogues(opt.synthetic, opt.preprocess.seed, opt.synthetic_turns);
  } else {
    throw ContractError("prepare-data needs a corpus file or a synthetic dialogue count");
  }
  result.splits = corpus::preprocess(dialogues, opt.preprocess);
  result.vocabulary = corpus::build_vocab(result.splits.train, opt.min_freq);
  if (!opt.out_dir.empty()) {
    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);
    corpus::write_examples((dir / "train.jsonl").string(), result.splits.train);
    corpus::write_examples((dir / "dev.jsonl").string(), result.splits.dev);
    corpus::write_examples((dir / "test.jsonl").string(), result.splits.test);
    corpus::write_text_file((dir / "vocab.txt").string(), vocabulary_text(result.vocabulary));
    nlohmann::json errors = nlohmann::json::array();
    for (const auto& e : result.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
    const auto& r = result.splits.report;
    nlohmann::json report = {{"dialogues", r.dialogues},
                             {"skipped_no_supporter", r.skipped_no_supporter},
                             {"skipped_no_seeker_context", r.skipped_no_seeker_context},
                             {"examples", r.examples},
                             {"train", result.splits.train.size()},
                             {"dev", result.splits.dev.size()},
                             {"test", result.splits.test.size()},
                             {"vocabulary", result.vocabulary.size()},
                             {"malformed_lines", errors}};
    corpus::write_text_file((dir / "report.json").string(), report.dump(2) + '\n');
  }
  return result;
}

// ----------------------------------------------------------------- build-cache

struct BuildCacheOptions {
  std::vector<std::string> splits;
  std::string vocab;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t tails_per_relation = 3;
};

/// Synthetic tails for every situation and last post in the splits, in
/// first-seen order.
inline commonsense::BlockCache build_cache(const BuildCacheOptions& opt) {
  const auto vocab = read_vocabulary(opt.vocab);
  std::vector<std::string> events;
  std::set<std::string> seen;
  for (const auto& path : opt.splits) {
    for (const auto& ex : corpus::read_examples(path)) {
      for (const auto* e : {&ex.situation, &ex.last_post}) {
        if (seen.insert(*e).second) events.push_back(*e);
      }
    }
  }
  const auto cache = commonsense::SyntheticProvider(opt.seed, vocab, opt.tails_per_relation).materialize(events);
  if (!opt.out.empty()) commonsense::save_cache(cache, opt.out);
  return cache;
}

// ----------------------------------------------------------------------- train

struct TrainOptions {
  RunConfig config;
  std::string data_dir;  // train.jsonl, dev.jsonl, vocab.txt
  std::string checkpoint_out;
  std::string log_out;
  bool verbose = false;
};

struct TrainOutcome {
  training::TrainResult result;
  std::string csv;
  double seconds = 0.0;
};

inline nlohmann::json checkpoint_extra(const RunConfig& rc) {
  return {{"flags", {{"use_g", rc.train.use_g}, {"use_s", rc.train.use_s}, {"use_x", rc.train.use_x}}},
          {"blocks", to_json(rc.blocks)}};
}

inline TrainOutcome run_training(const TrainOptions& opt, std::ostream* progress = nullptr) {
  const fs::path dir(opt.data_dir);
  const auto vocab = read_vocabulary((dir / "vocab.txt").string());
  const auto train_examples = corpus::read_examples((dir / "train.jsonl").string());
  const auto dev_examples = corpus::read_examples((dir / "dev.jsonl").string());
  RunConfig rc = opt.config;
  rc.model.vocab_size = vocab.size();
  const auto provider = make_provider(rc.blocks, vocab);
  const auto train_inputs = prepare_inputs(train_examples, vocab, *provider);
  const auto dev_inputs = prepare_inputs(dev_examples, vocab, *provider);
  MiscModel<float> model(rc.model);
  const auto start = std::chrono::steady_clock::now();
  TrainOutcome out;
  out.result = training::train(rc.train, model, train_inputs, dev_inputs,
                               [&](const training::LogRow& row, const training::LossReport&) {
                                 if (progress && opt.verbose) {
                                   *progress << "step " << row.step << " lr " << row.lr << " L_r " << row.L_r
                                             << " L_g " << row.L_g << " L " << row.L << '\n';
                                 }
                               });
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.csv = training::log_to_csv(out.result.log);
  if (!opt.log_out.empty()) corpus::write_text_file(opt.log_out, out.csv);
  if (!opt.checkpoint_out.empty()) {
    numerics::write_checkpoint(save_model(model, vocab, checkpoint_extra(rc)), opt.checkpoint_out);
  }
  return out;
}

// ------------------------------------------------------------ checkpoint loading

struct LoadedModel {
  std::unique_ptr<MiscModel<float>> model;
  corpus::Vocabulary vocabulary;
  FactorFlags flags;
  BlockSettings blocks;
};

inline LoadedModel load_model(const std::string& path, const std::optional<std::string>& cache_override = std::nullopt) {
  const auto ckpt = numerics::read_checkpoint(path);
  auto meta = parse_checkpoint_metadata(ckpt);
  LoadedModel out;
  out.model = std::make_unique<MiscModel<float>>(meta.config);
  numerics::load_parameters(ckpt, out.model->parameters());
  out.vocabulary = std::move(meta.vocabulary);
  const auto flags = meta.extra.value("flags", nlohmann::json::object());
  out.flags.use_g = flags.value("use_g", true);
  out.flags.use_s = flags.value("use_s", true);
  out.flags.use_x = flags.value("use_x", true);
  out.blocks = block_settings_from_json(meta.extra.value("blocks", nlohmann::json::object()));
  if (cache_override) out.blocks.cache = cache_override;
  return out;
}

// -------------------------------------------------------------------- generate

struct GenerateOptions {
  std::string checkpoint;
  std::string split;
  std::string out;
  std::optional<std::string> cache;
  decoder::GenerationConfig generation;
  std::uint64_t seed = 0;
  std::size_t limit = 0;  // 0: every example
};

/// Each example draws from its own stream, seeded from `seed` and its id.
inline std::vector<evalkit::GenerationRecord> run_generation(const GenerateOptions& opt) {
  auto loaded = load_model(opt.checkpoint, opt.cache);
  const auto provider = make_provider(loaded.blocks, loaded.vocabulary);
  auto examples = corpus::read_examples(opt.split);
  if (opt.limit && examples.size() > opt.limit) examples.resize(opt.limit);
  std::vector<evalkit::GenerationRecord> records;
  for (const auto& ex : examples) {
    const auto input = prepare_input(ex, loaded.vocabulary, *provider);
    const auto g = decoder::generate(*loaded.model, input, opt.generation,
                                     numerics::mix_seed(opt.seed, numerics::stable_hash(ex.id)), loaded.flags);
    records.push_back({ex.id, loaded.vocabulary.decode(g.tokens), ex.response,
                       std::vector<double>(g.strategy_logits.begin(), g.strategy_logits.end())});
  }
  if (!opt.out.empty()) corpus::write_text_file(opt.out, evalkit::generations_to_jsonl(records));
  return records;
}

// -------------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::string generations;
  std::optional<std::string> split;       // gold strategies (and PPL inputs)
  std::optional<std::string> checkpoint;  // enables PPL
  std::optional<std::string> cache;
  std::string out;
  double rouge_beta = 1.0;
};

inline evalkit::MetricReport run_evaluation(const EvaluateOptions& opt) {
  const auto records = evalkit::read_generations(opt.generations);
  std::map<std::string, int> golds;
  std::vector<corpus::Example> examples;
  if (opt.split) {
    examples = corpus::read_examples(*opt.split);
    for (const auto& ex : examples) golds[ex.id] = strategy::code(ex.strategy_label);
  }
  std::optional<double> ppl;
  if (opt.checkpoint) {
    if (!opt.split) throw ContractError("perplexity needs --split alongside --checkpoint");
    auto loaded = load_model(*opt.checkpoint, opt.cache);
    const auto provider = make_provider(loaded.blocks, loaded.vocabulary);
    ppl = evalkit::perplexity(*loaded.model, prepare_inputs(examples, loaded.vocabulary, *provider), loaded.flags);
  }
  auto report = evalkit::evaluate_generations(records, golds, ppl, opt.rouge_beta);
  if (!opt.out.empty()) corpus::write_text_file(opt.out, evalkit::to_json(report).dump(2) + '\n');
  return report;
}

// -------------------------------------------------------------- analyze-stages

struct StageOptions {
  std::optional<std::string> corpus;       // every labelled supporter turn
  std::optional<std::string> split;        // gold labels of examples
  std::optional<std::string> generations;  // with split: predicted labels
  std::size_t bins = 5;
  std::string out;
};

inline evalkit::StageHistogram run_stage_analysis(const StageOptions& opt) {
  std::vector<evalkit::StageRecord> records;
  if (opt.corpus) {
    auto load = corpus::load_corpus(*opt.corpus);
    load.throw_if_errors();
    records = evalkit::stage_records(load.dialogues);
  } else if (opt.split) {
    const auto examples = corpus::read_examples(*opt.split);
    if (opt.generations) {
      std::map<std::string, const corpus::Example*> by_id;
      for (const auto& ex : examples) by_id[ex.id] = &ex;
      for (const auto& g : evalkit::read_generations(*opt.generations)) {
        auto it = by_id.find(g.example_id);
        if (it == by_id.end()) throw ContractError("generation for unknown example " + g.example_id);
        if (g.predicted_strategy_logits.size() != strategy::kNumStrategies) {
          throw ContractError("generation " + g.example_id + " has no strategy logits");
        }
        const auto s = strategy::argmax(std::span<const double>(g.predicted_strategy_logits));
        records.push_back({it->second->progress(), static_cast<strategy::StrategyId>(s)});
      }
    } else {
      records = evalkit::stage_records(examples);
    }
  } else {
    throw ContractError("analyze-stages needs a corpus or a split");
  }
  auto hist = evalkit::stage_distribution(records, opt.bins);
  if (!opt.out.empty()) corpus::write_text_file(opt.out, evalkit::stage_histogram_csv(hist));
  return hist;
}

// ----------------------------------------------------------- inspect-attention

struct InspectOptions {
  std::string checkpoint;
  std::string split;
  std::string example_id;
  std::optional<std::string> cache;
  std::string out;
};

inline evalkit::AttentionDump run_inspection(const InspectOptions& opt) {
  auto loaded = load_model(opt.checkpoint, opt.cache);
  const auto provider = make_provider(loaded.blocks, loaded.vocabulary);
  for (const auto& ex : corpus::read_examples(opt.split)) {
    if (ex.id != opt.example_id) continue;
    auto dump = evalkit::attention_dump(*loaded.model, prepare_input(ex, loaded.vocabulary, *provider), loaded.vocabulary);
    if (!opt.out.empty()) corpus::write_text_file(opt.out, evalkit::to_json(dump).dump(2) + '\n');
    return dump;
  }
  throw ContractError("example " + opt.example_id + " not found in " + opt.split);
}

// ------------------------------------------------------------------ grad-check

struct GradCheckRun {
  numerics::GradCheckReport report;
  double seconds = 0.0;
  std::size_t parameters = 0;
};

/// Double-precision finite-difference check of every parameter through the
/// joint loss on a small synthetic batch (eval mode, all factors on).
inline GradCheckRun model_grad_check(ModelConfig config, const numerics::GradCheckOptions& options,
                                     std::size_t tails_per_relation = 1) {
  const auto start = std::chrono::steady_clock::now();
  const auto dialogues = corpus::synthetic_dialogues(2, config.seed, 4);
  corpus::PreprocessReport report;
  std::vector<corpus::Example> examples;
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    auto ex = corpus::dialogue_examples(dialogues[i], i, {}, report);
    examples.insert(examples.end(), ex.begin(), ex.end());
  }
  const auto vocab = corpus::build_vocab(examples);
  const commonsense::SyntheticProvider provider(config.seed, vocab, tails_per_relation);
  const auto inputs = prepare_inputs(examples, vocab, provider);
  config.vocab_size = vocab.size();
  config.arch.dropout = 0.0;
  MiscModel<double> model(config);
  const numerics::LossBuilder<double> build = [&](Tape<double>& tape) {
    return training::joint_loss<double>(tape, model, inputs, FactorFlags{}).total;
  };
  GradCheckRun run;
  run.report = numerics::grad_check(model.parameters(), build, options);
  run.parameters = model.parameters().size();
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

inline ModelConfig grad_check_default_config() {
  ModelConfig c;
  c.arch.layers = 2;
  c.arch.heads = 2;
  c.arch.model_dim = 32;
  c.arch.ffn_dim = 64;
  c.arch.max_positions = 64;
  c.arch.dropout = 0.0;
  return c;
}

inline nlohmann::json to_json(const GradCheckRun& run, const numerics::GradCheckOptions& options) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : run.report.entries) {
    entries.push_back({{"name", e.name},
                       {"checked", e.checked},
                       {"max_relative_error", e.max_relative_error},
                       {"max_absolute_error", e.max_absolute_error},
                       {"passed", e.passed}});
  }
  return {{"passed", run.report.passed()},
          {"tolerance", options.tolerance},
          {"step", options.h},
          {"denominator_floor", options.denominator_floor},
          {"samples_per_parameter", options.samples_per_parameter},
          {"max_relative_error", run.report.max_relative_error()},
          {"parameters", run.parameters},
          {"seconds", run.seconds},
          {"entries", entries}};
}

}  // namespace misc::app
