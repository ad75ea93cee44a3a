#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "misc/commonsense/blocks.hpp"
#include "misc/corpus/preprocess.hpp"
#include "misc/corpus/synthetic.hpp"
#include "misc/corpus/vocabulary.hpp"
#include "misc/model.hpp"
#include "misc/numerics/gradcheck.hpp"
#include "misc/numerics/ops.hpp"

namespace misc::testing {

using numerics::ParameterSet;
using numerics::Rng;
using numerics::Shape;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

template <typename T = double>
Tensor<T> random_tensor(const Shape& shape, Rng& rng, double scale = 1.0) {
  Tensor<T> t(shape);
  for (auto& v : t.storage()) v = static_cast<T>(scale * rng.normal());
  return t;
}

/// Checks an op's backward against central differences: the op's output is
/// reduced with fixed random weights so every output entry carries gradient.
inline void expect_op_gradients(const std::vector<Shape>& input_shapes,
                                const std::function<Var<double>(Tape<double>&, const std::vector<Var<double>>&)>& op,
                                std::uint64_t seed, double tolerance = 1e-4) {
  ParameterSet<double> params;
  Rng rng(seed);
  for (std::size_t i = 0; i < input_shapes.size(); ++i) params.add("in" + std::to_string(i), random_tensor(input_shapes[i], rng));
  Tensor<double> weights;
  auto forward = [&](Tape<double>& tape) {
    std::vector<Var<double>> inputs;
    for (std::size_t i = 0; i < params.size(); ++i) inputs.push_back(tape.parameter(params[i]));
    return op(tape, inputs);
  };
  {
    Tape<double> probe(false);
    const auto out = forward(probe).value();
    weights = random_tensor({out.numel(), 1}, rng);
  }
  numerics::LossBuilder<double> build = [&](Tape<double>& tape) {
    Var<double> out = forward(tape);
    Var<double> flat = numerics::reshape(out, {1, out.value().numel()});
    return numerics::matmul(flat, tape.constant(weights));
  };
  numerics::GradCheckOptions options;
  options.tolerance = tolerance;
  options.samples_per_parameter = 1000;
  options.seed = seed;
  options.denominator_floor = 1e-7;
  const auto report = numerics::grad_check(params, build, options);
  for (const auto& e : report.entries) {
    EXPECT_TRUE(e.passed) << e.name << " relative error " << e.max_relative_error << " absolute "
                          << e.max_absolute_error;
  }
}

/// Splits every dialogue into examples without shuffling.
inline std::vector<corpus::Example> examples_of(const std::vector<corpus::Dialogue>& dialogues) {
  corpus::PreprocessReport report;
  std::vector<corpus::Example> out;
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    auto ex = corpus::dialogue_examples(dialogues[i], i, {}, report);
    out.insert(out.end(), ex.begin(), ex.end());
  }
  return out;
}

inline ModelConfig small_config(std::size_t vocab_size, std::uint64_t seed = 1, std::size_t d = 16) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.seed = seed;
  c.arch.layers = 1;
  c.arch.heads = 2;
  c.arch.model_dim = d;
  c.arch.ffn_dim = 2 * d;
  c.arch.max_positions = 48;
  c.arch.dropout = 0.0;
  return c;
}

/// A handful of toy examples with synthetic blocks, ready for the model.
struct ToyData {
  std::vector<corpus::Example> examples;
  corpus::Vocabulary vocab;
  std::vector<ModelInput> inputs;
};

inline ToyData toy_data(std::size_t dialogues, std::uint64_t seed, std::size_t turns = 2, std::size_t tails = 1) {
  ToyData data;
  data.examples = examples_of(corpus::synthetic_dialogues(dialogues, seed, turns));
  data.vocab = corpus::build_vocab(data.examples);
  const commonsense::SyntheticProvider provider(seed, data.vocab, tails);
  data.inputs = prepare_inputs(data.examples, data.vocab, provider);
  return data;
}

enum class Ablation { Strategy, Situation, Post };

/// True for parameters used only by the given factor's path.
inline bool owned_by(const std::string& name, Ablation a) {
  auto has = [&](const char* part) { return name.find(part) != std::string::npos; };
  switch (a) {
    case Ablation::Strategy: return name.rfind("strategy.", 0) == 0 || has(".cross_strategy.");
    case Ablation::Situation: return name.rfind("refine.situation_norm.", 0) == 0 || has(".cross_situation.");
    case Ablation::Post: return name.rfind("refine.post_norm.", 0) == 0 || has(".cross_post.");
  }
  return false;
}

inline FactorFlags without(Ablation a) {
  FactorFlags f;
  (a == Ablation::Strategy ? f.use_g : a == Ablation::Situation ? f.use_s : f.use_x) = false;
  return f;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = info ? std::string(info->test_suite_name()) + "_" + info->name() : "misc";
    path_ = std::filesystem::temp_directory_path() / ("misc_test_" + name + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

}  // namespace misc::testing
