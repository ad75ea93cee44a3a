#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "misc/corpus/io.hpp"
#include "misc/error.hpp"
#include "misc/evalkit/accuracy.hpp"
#include "misc/evalkit/metrics.hpp"
#include "misc/model.hpp"
#include "misc/training/loss.hpp"

namespace misc::evalkit {

/// One line of a generations file.
struct GenerationRecord {
  std::string example_id;
  std::string generated;
  std::string gold;
  std::vector<double> predicted_strategy_logits;  // 8 values, or empty with the strategy factor off

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

inline nlohmann::json to_json(const GenerationRecord& r) {
  return {{"example_id", r.example_id},
          {"generated", r.generated},
          {"gold", r.gold},
          {"predicted_strategy_logits", r.predicted_strategy_logits}};
}

inline std::string generations_to_jsonl(const std::vector<GenerationRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + '\n';
  return out;
}

inline std::vector<GenerationRecord> parse_generations(const std::string& text) {
  std::vector<GenerationRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("example_id").get<std::string>(), j.at("generated").get<std::string>(),
                     j.at("gold").get<std::string>(), j.at("predicted_strategy_logits").get<std::vector<double>>()});
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(line_no, e.what());
    }
  }
  return out;
}

inline std::vector<GenerationRecord> read_generations(const std::string& path) {
  return parse_generations(corpus::read_text_file(path));
}

struct MetricReport {
  std::size_t examples = 0;
  std::optional<double> acc;
  std::optional<std::array<double, strategy::kNumStrategies>> top_k_acc;
  std::optional<double> ppl;
  double bleu2 = 0.0;
  double bleu4 = 0.0;
  double rouge_l = 0.0;
  double meteor = 0.0;
  double distinct1 = 0.0;
  double distinct2 = 0.0;
  double rouge_beta = 1.0;
  MeteorParams meteor_params;
};

inline nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json j;
  j["variants"] = {{"tokenizer", "corpus tokenizer, lowercased"},
                   {"bleu", "corpus-level, brevity penalty, add-one smoothing for zero-match orders n>=2"},
                   {"rouge_l", {{"measure", "mean per-pair LCS F"}, {"beta", r.rouge_beta}}},
                   {"meteor", {{"matcher", "exact unigram, leftmost"},
                               {"alpha", r.meteor_params.alpha},
                               {"beta", r.meteor_params.beta},
                               {"gamma", r.meteor_params.gamma}}},
                   {"distinct", "unique n-grams / total n-grams over all candidates"}};
  j["examples"] = r.examples;
  j["acc"] = r.acc ? nlohmann::json(*r.acc) : nlohmann::json(nullptr);
  if (r.top_k_acc) {
    nlohmann::json curve = nlohmann::json::object();
    for (std::size_t k = 0; k < r.top_k_acc->size(); ++k) curve[std::to_string(k + 1)] = (*r.top_k_acc)[k];
    j["top_k_acc"] = curve;
  } else {
    j["top_k_acc"] = nullptr;
  }
  j["ppl"] = r.ppl ? nlohmann::json(*r.ppl) : nlohmann::json(nullptr);
  j["bleu2"] = r.bleu2;
  j["bleu4"] = r.bleu4;
  j["rouge_l"] = r.rouge_l;
  j["meteor"] = r.meteor;
  j["distinct1"] = r.distinct1;
  j["distinct2"] = r.distinct2;
  return j;
}

/// Text metrics over generations; strategy accuracy when gold labels are
/// known for every record that carries logits.
inline MetricReport evaluate_generations(const std::vector<GenerationRecord>& records,
                                         const std::map<std::string, int>& gold_strategies = {},
                                         std::optional<double> ppl = std::nullopt, double rouge_beta = 1.0) {
  if (records.empty()) throw ContractError("no generations to evaluate");
  std::vector<Tokens> cands, refs;
  std::vector<std::vector<double>> logits;
  std::vector<int> golds;
  for (const auto& r : records) {
    cands.push_back(corpus::tokenize(r.generated));
    refs.push_back(corpus::tokenize(r.gold));
    auto it = gold_strategies.find(r.example_id);
    if (it != gold_strategies.end() && r.predicted_strategy_logits.size() == strategy::kNumStrategies) {
      logits.push_back(r.predicted_strategy_logits);
      golds.push_back(it->second);
    }
  }
  MetricReport rep;
  rep.examples = records.size();
  rep.rouge_beta = rouge_beta;
  rep.bleu2 = bleu(cands, refs, 2);
  rep.bleu4 = bleu(cands, refs, 4);
  rep.rouge_l = rouge_l(cands, refs, rouge_beta);
  rep.meteor = meteor_lite(cands, refs, rep.meteor_params);
  rep.distinct1 = distinct_n(cands, 1);
  rep.distinct2 = distinct_n(cands, 2);
  if (!logits.empty()) {
    const auto a = strategy_accuracy(logits, golds);
    rep.acc = a.acc;
    rep.top_k_acc = a.top_k;
  }
  rep.ppl = ppl;
  return rep;
}

/// exp(total gold-token NLL / gold-token count), teacher forced in eval mode.
template <typename T>
double perplexity(const MiscModel<T>& model, const std::vector<ModelInput>& inputs, const FactorFlags& flags = {}) {
  return training::score_examples(model, inputs, flags).perplexity();
}

}  // namespace misc::evalkit
