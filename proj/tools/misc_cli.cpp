// Command-line front end: data preparation, training, generation,
// evaluation and analysis.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "misc/app/commands.hpp"

namespace {

using namespace misc;

std::optional<std::string> optional_string(const std::string& s) {
  return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

int run(int argc, char** argv) {
  CLI::App cli{"Emotional-support response model: data, training, generation and evaluation"};
  cli.require_subcommand(1);

  std::uint64_t seed = 0;
  auto add_seed = [&seed](CLI::App* cmd) { cmd->add_option("--seed", seed, "Random seed")->capture_default_str(); };

  // prepare-data
  auto* prep = cli.add_subcommand("prepare-data", "Corpus JSONL -> train/dev/test splits and vocabulary");
  std::string prep_corpus, prep_out, chunking = "non-overlapping", split_level = "example";
  std::size_t synthetic = 0, synthetic_turns = 2, window = 10, min_freq = 1;
  prep->add_option("--corpus", prep_corpus, "ESConv-format dialogue file");
  prep->add_option("--synthetic", synthetic, "Generate this many toy dialogues instead of reading a corpus");
  prep->add_option("--synthetic-turns", synthetic_turns, "Utterances per toy dialogue")->capture_default_str();
  prep->add_option("--out", prep_out, "Output directory")->required();
  prep->add_option("--window", window, "Truncation window in utterances")->capture_default_str();
  prep->add_option("--chunking", chunking, "non-overlapping or sliding")
      ->check(CLI::IsMember({"non-overlapping", "sliding"}))->capture_default_str();
  prep->add_option("--split-level", split_level, "example or dialogue")
      ->check(CLI::IsMember({"example", "dialogue"}))->capture_default_str();
  prep->add_option("--min-freq", min_freq, "Minimum token frequency for the vocabulary")->capture_default_str();
  add_seed(prep);

  // build-cache
  auto* cache_cmd = cli.add_subcommand("build-cache", "Block cache utilities");
  std::vector<std::string> cache_splits;
  std::string cache_vocab, cache_out, cache_validate;
  std::size_t tails = 3;
  cache_cmd->add_option("--split", cache_splits, "Split files whose situations and posts are materialized");
  cache_cmd->add_option("--vocab", cache_vocab, "Vocabulary file for synthetic tails");
  cache_cmd->add_option("--out", cache_out, "Cache file to write");
  cache_cmd->add_option("--tails-per-relation", tails, "Synthetic tails per relation")->capture_default_str();
  cache_cmd->add_option("--validate", cache_validate, "Check an existing cache file and print its size");
  add_seed(cache_cmd);

  // train
  auto* train_cmd = cli.add_subcommand("train", "Train from a config file; writes a checkpoint and a loss CSV");
  std::string config_path, data_dir, ckpt_out, log_out, train_cache;
  std::size_t max_steps = 0;
  bool verbose = false;
  train_cmd->add_option("--config", config_path, "Flat JSON training configuration");
  train_cmd->add_option("--data", data_dir, "Directory produced by prepare-data")->required();
  train_cmd->add_option("--checkpoint", ckpt_out, "Checkpoint to write")->required();
  train_cmd->add_option("--log", log_out, "Loss curve CSV to write");
  train_cmd->add_option("--cache", train_cache, "Block cache (default: synthetic provider)");
  train_cmd->add_option("--max-steps", max_steps, "Override the step cap");
  train_cmd->add_flag("--verbose", verbose, "Print every step");
  add_seed(train_cmd);

  // generate
  auto* gen = cli.add_subcommand("generate", "Sample responses for a split");
  app::GenerateOptions gen_opt;
  std::string gen_cache;
  gen->add_option("--checkpoint", gen_opt.checkpoint, "Checkpoint file")->required();
  gen->add_option("--split", gen_opt.split, "Split JSONL")->required();
  gen->add_option("--out", gen_opt.out, "Generations JSONL to write")->required();
  gen->add_option("--cache", gen_cache, "Block cache (default: as trained)");
  gen->add_option("--top-p", gen_opt.generation.top_p, "Nucleus mass")->capture_default_str();
  gen->add_option("--top-k", gen_opt.generation.top_k, "Top-k cutoff")->capture_default_str();
  gen->add_option("--temperature", gen_opt.generation.temperature, "Softmax temperature")->capture_default_str();
  gen->add_option("--repetition-penalty", gen_opt.generation.repetition_penalty, "Repetition penalty")->capture_default_str();
  gen->add_option("--max-length", gen_opt.generation.max_length, "Maximum generated tokens")->capture_default_str();
  gen->add_flag("--greedy", gen_opt.generation.greedy, "Argmax decoding");
  gen->add_option("--limit", gen_opt.limit, "Only the first N examples");
  add_seed(gen);

  // evaluate
  auto* eval = cli.add_subcommand("evaluate", "Metric report for a generations file");
  std::string eval_gens, eval_split, eval_ckpt, eval_cache, eval_out;
  double rouge_beta = 1.0;
  eval->add_option("--generations", eval_gens, "Generations JSONL")->required();
  eval->add_option("--split", eval_split, "Split with gold strategies");
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint for perplexity (needs --split)");
  eval->add_option("--cache", eval_cache, "Block cache for perplexity");
  eval->add_option("--rouge-beta", rouge_beta, "ROUGE-L beta")->capture_default_str();
  eval->add_option("--out", eval_out, "MetricReport JSON to write");
  add_seed(eval);

  // analyze-stages
  auto* stages = cli.add_subcommand("analyze-stages", "Strategy distribution over conversation stages");
  std::string st_corpus, st_split, st_gens, st_out;
  std::size_t bins = 5;
  stages->add_option("--corpus", st_corpus, "Dialogue corpus (every labelled supporter turn)");
  stages->add_option("--split", st_split, "Split file (gold labels, or positions for --generations)");
  stages->add_option("--generations", st_gens, "Generations JSONL (predicted labels)");
  stages->add_option("--bins", bins, "Number of equal-width progress bins")->capture_default_str();
  stages->add_option("--out", st_out, "StageHistogram CSV to write");
  add_seed(stages);

  // inspect-attention
  auto* inspect = cli.add_subcommand("inspect-attention", "Dump block refinement attention for one example");
  app::InspectOptions ins_opt;
  std::string ins_cache;
  inspect->add_option("--checkpoint", ins_opt.checkpoint, "Checkpoint file")->required();
  inspect->add_option("--split", ins_opt.split, "Split JSONL")->required();
  inspect->add_option("--example-id", ins_opt.example_id, "Example id")->required();
  inspect->add_option("--cache", ins_cache, "Block cache (default: as trained)");
  inspect->add_option("--out", ins_opt.out, "AttentionDump JSON to write");
  add_seed(inspect);

  // grad-check
  auto* gc = cli.add_subcommand("grad-check", "Finite-difference check of every parameter gradient");
  std::string gc_config, gc_out;
  numerics::GradCheckOptions gc_opt;
  gc->add_option("--config", gc_config, "Flat JSON model configuration (default: d=32, 2 layers)");
  gc->add_option("--tolerance", gc_opt.tolerance, "Maximum relative error")->capture_default_str();
  gc->add_option("--step", gc_opt.h, "Finite-difference step")->capture_default_str();
  gc->add_option("--floor", gc_opt.denominator_floor, "Relative-error denominator floor")->capture_default_str();
  gc->add_option("--samples", gc_opt.samples_per_parameter, "Entries checked per parameter")->capture_default_str();
  gc->add_option("--out", gc_out, "Report JSON to write");
  add_seed(gc);

  CLI11_PARSE(cli, argc, argv);

  if (prep->parsed()) {
    app::PrepareOptions opt;
    opt.corpus = optional_string(prep_corpus);
    opt.synthetic = synthetic;
    opt.synthetic_turns = synthetic_turns;
    opt.out_dir = prep_out;
    opt.preprocess.window = window;
    opt.preprocess.seed = seed;
    opt.preprocess.chunking = chunking == "sliding" ? corpus::Chunking::Sliding : corpus::Chunking::NonOverlapping;
    opt.preprocess.split_level = split_level == "dialogue" ? corpus::SplitLevel::Dialogue : corpus::SplitLevel::Example;
    opt.min_freq = min_freq;
    const auto r = app::prepare_data(opt);
    for (const auto& e : r.errors) std::cerr << "line " << e.line << ": " << e.message << '\n';
    std::cout << "train " << r.splits.train.size() << " dev " << r.splits.dev.size() << " test "
              << r.splits.test.size() << " vocabulary " << r.vocabulary.size() << '\n';
    return 0;
  }
  if (cache_cmd->parsed()) {
    if (!cache_validate.empty()) {
      const auto cache = commonsense::load_cache(cache_validate);
      std::cout << cache.entries().size() << " entries\n";
      return 0;
    }
    if (cache_splits.empty() || cache_vocab.empty() || cache_out.empty()) {
      std::cerr << "build-cache needs --split, --vocab and --out (or --validate)\n";
      return 2;
    }
    const auto cache = app::build_cache({cache_splits, cache_vocab, cache_out, seed, tails});
    std::cout << cache.entries().size() << " entries written to " << cache_out << '\n';
    return 0;
  }
  if (train_cmd->parsed()) {
    app::TrainOptions opt;
    if (!config_path.empty()) opt.config = app::load_run_config(config_path);
    if (train_cmd->count("--seed")) {
      opt.config.model.seed = seed;
      opt.config.train.seed = seed;
    }
    if (max_steps) opt.config.train.max_steps = max_steps;
    if (!train_cache.empty()) opt.config.blocks.cache = train_cache;
    opt.data_dir = data_dir;
    opt.checkpoint_out = ckpt_out;
    opt.log_out = log_out;
    opt.verbose = verbose;
    const auto out = app::run_training(opt, &std::cout);
    for (const auto& reason : out.result.skip_reasons) std::cerr << "skipped " << reason << '\n';
    std::cout << "steps " << out.result.steps << " final L " << out.result.last.L;
    if (out.result.best_dev_ppl) std::cout << " best dev ppl " << *out.result.best_dev_ppl << " (epoch " << out.result.best_epoch + 1 << ")";
    std::cout << " in " << out.seconds << " s\n";
    return 0;
  }
  if (gen->parsed()) {
    gen_opt.seed = seed;
    gen_opt.cache = optional_string(gen_cache);
    const auto records = app::run_generation(gen_opt);
    std::cout << records.size() << " generations written to " << gen_opt.out << '\n';
    return 0;
  }
  if (eval->parsed()) {
    app::EvaluateOptions opt{eval_gens, optional_string(eval_split), optional_string(eval_ckpt),
                             optional_string(eval_cache), eval_out, rouge_beta};
    std::cout << evalkit::to_json(app::run_evaluation(opt)).dump(2) << '\n';
    return 0;
  }
  if (stages->parsed()) {
    app::StageOptions opt{optional_string(st_corpus), optional_string(st_split), optional_string(st_gens), bins, st_out};
    const auto hist = app::run_stage_analysis(opt);
    if (st_out.empty()) std::cout << evalkit::stage_histogram_csv(hist);
    return 0;
  }
  if (inspect->parsed()) {
    ins_opt.cache = optional_string(ins_cache);
    const auto dump = app::run_inspection(ins_opt);
    if (ins_opt.out.empty()) std::cout << evalkit::to_json(dump).dump(2) << '\n';
    return 0;
  }
  if (gc->parsed()) {
    ModelConfig config = app::grad_check_default_config();
    if (!gc_config.empty()) config = app::load_run_config(gc_config).model;
    config.seed = seed;
    gc_opt.seed = seed;
    const auto result = app::model_grad_check(config, gc_opt);
    const auto report = app::to_json(result, gc_opt);
    if (!gc_out.empty()) corpus::write_text_file(gc_out, report.dump(2) + '\n');
    std::cout << (result.report.passed() ? "PASS" : "FAIL") << " max relative error "
              << result.report.max_relative_error() << " over " << result.parameters << " parameters in "
              << result.seconds << " s\n";
    return result.report.passed() ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const misc::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
  } catch (const misc::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 1;
}
