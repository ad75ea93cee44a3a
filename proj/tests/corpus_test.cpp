#include <set>

#include <gtest/gtest.h>

#include "misc/corpus/io.hpp"
#include "misc/corpus/preprocess.hpp"
#include "misc/corpus/synthetic.hpp"
#include "misc/corpus/tokenizer.hpp"
#include "misc/corpus/vocabulary.hpp"
#include "test_support.hpp"

namespace misc::corpus {
namespace {

Utterance seeker(std::string text) { return {Speaker::Seeker, std::move(text), std::nullopt}; }
Utterance supporter(std::string text, StrategyId s) { return {Speaker::Supporter, std::move(text), s}; }

/// Alternating seeker/supporter dialogue of `n` utterances "u0".."u{n-1}".
Dialogue alternating(std::size_t n) {
  Dialogue d;
  d.situation = "situation";
  d.emotion_type = "anxiety";
  for (std::size_t i = 0; i < n; ++i) {
    const std::string text = "u" + std::to_string(i);
    d.utterances.push_back(i % 2 == 0 ? seeker(text) : supporter(text, static_cast<StrategyId>(i % 8)));
  }
  return d;
}

TEST(Tokenizer, HandExample) {
  EXPECT_EQ(tokenize("Hi, can you help?"), (std::vector<std::string>{"hi", ",", "can", "you", "help", "?"}));
  EXPECT_EQ(tokenize("I'm  FINE...\tthanks"), (std::vector<std::string>{"i'm", "fine", ".", ".", ".", "thanks"}));
  EXPECT_TRUE(tokenize("   ").empty());
}

TEST(Tokenizer, DetokenizeInvertsCanonicalText) {
  for (const std::string text : {"hi, can you help?", "i'm here for you.", "one ( two ) three"}) {
    EXPECT_EQ(detokenize(tokenize(text)), text);
  }
}

TEST(Vocabulary, ReservedIdsAreFixed) {
  Vocabulary v;
  EXPECT_EQ(v.size(), static_cast<std::size_t>(kNumReserved));
  EXPECT_EQ(v.id("<pad>"), kPad);
  EXPECT_EQ(v.id("<unk>"), kUnk);
  EXPECT_EQ(v.id("<s>"), kBos);
  EXPECT_EQ(v.id("</s>"), kEos);
  EXPECT_EQ(v.id("<cls>"), kCls);
}

TEST(Vocabulary, UnknownWordMapsToUnk) {
  const auto v = build_vocab_from_texts(std::vector<std::string>{"hello there"});
  EXPECT_EQ(v.encode("hello stranger"), (std::vector<int>{v.id("hello"), kUnk}));
}

TEST(Vocabulary, EncodeDecodeRoundTripsInVocabularyText) {
  const std::vector<std::string> texts = {"Hi, can you help?", "i feel lost at work.", "that sounds hard!"};
  const auto v = build_vocab_from_texts(texts);
  for (const std::string t : {"hi, can you help?", "i feel lost at work.", "that sounds hard!", "work, help?"}) {
    EXPECT_EQ(v.decode(v.encode(t)), t);
  }
}

TEST(Vocabulary, BijectiveAndOrderedByFrequency) {
  const auto v = build_vocab_from_texts(std::vector<std::string>{"b a a c c c"});
  EXPECT_EQ(v.token(kNumReserved), "c");
  EXPECT_EQ(v.token(kNumReserved + 1), "a");
  EXPECT_EQ(v.token(kNumReserved + 2), "b");
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v.id(v.token(static_cast<int>(i))), static_cast<int>(i));
}

TEST(Vocabulary, MinFreqDropsRareTokens) {
  const auto v = build_vocab_from_texts(std::vector<std::string>{"a a b"}, 2);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_FALSE(v.contains("b"));
  EXPECT_EQ(v.id("b"), kUnk);
  EXPECT_THROW(build_vocab_from_texts(std::vector<std::string>{"a"}, 0), ContractError);
}

TEST(Vocabulary, FromTokensValidates) {
  std::vector<std::string> tokens(kReservedTokens.begin(), kReservedTokens.end());
  tokens.push_back("x");
  EXPECT_EQ(Vocabulary::from_tokens(tokens).tokens(), tokens);
  tokens.push_back("x");
  EXPECT_THROW(Vocabulary::from_tokens(tokens), ContractError);
  EXPECT_THROW(Vocabulary::from_tokens({"x"}), ContractError);
  EXPECT_THROW(Vocabulary().token(99), IndexError);
}

class CorpusFile : public ::testing::Test {
 protected:
  std::string write(const std::string& text) {
    const auto path = dir_.file("corpus.jsonl");
    write_text_file(path, text);
    return path;
  }
  testing::TempDir dir_;
};

const char* kGoodLine =
    R"({"situation": "lost my job", "emotion_type": "sadness", "dialog": [)"
    R"({"speaker": "seeker", "text": "I feel  lost."}, )"
    R"({"speaker": "supporter", "text": "What happened?", "strategy": "Question"}]})";

TEST_F(CorpusFile, TwoLineFixtureLoads) {
  const std::string second =
      R"({"situation": "exam", "emotion_type": "anxiety", "dialog": [{"speaker": "seeker", "text": "help"}, )"
      R"({"speaker": "supporter", "text": "You can do it.", "strategy": "Affirmation and Reassurance"}]})";
  const auto load = load_corpus(write(std::string(kGoodLine) + "\n" + second + "\n"));
  EXPECT_TRUE(load.errors.empty());
  ASSERT_EQ(load.dialogues.size(), 2u);
  EXPECT_EQ(load.dialogues[0].utterances[0].text, "I feel lost.");
  EXPECT_EQ(load.dialogues[0].utterances[1].strategy, StrategyId::Question);
  EXPECT_EQ(load.dialogues[1].utterances[1].strategy, StrategyId::AffirmationAndReassurance);
  EXPECT_EQ(load.dialogues[1].emotion_type, "anxiety");
}

TEST_F(CorpusFile, MissingStrategyIsASchemaErrorAtThatLine) {
  const std::string bad =
      R"({"situation": "x", "emotion_type": "y", "dialog": [{"speaker": "seeker", "text": "a"}, )"
      R"({"speaker": "supporter", "text": "b"}]})";
  const auto load = load_corpus(write(std::string(kGoodLine) + "\n" + bad + "\n" + kGoodLine + "\n"));
  EXPECT_EQ(load.dialogues.size(), 2u);
  ASSERT_EQ(load.errors.size(), 1u);
  EXPECT_EQ(load.errors[0].line, 2u);
  EXPECT_NE(load.errors[0].message.find("strategy"), std::string::npos);
  try {
    load.throw_if_errors();
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST_F(CorpusFile, InvalidStrategyNameIsReported) {
  const std::string bad =
      R"({"situation": "x", "emotion_type": "y", "dialog": [{"speaker": "supporter", "text": "b", "strategy": "question"}]})";
  const auto load = load_corpus(write("\n" + bad + "\nnot json\n"));
  ASSERT_EQ(load.errors.size(), 2u);
  EXPECT_EQ(load.errors[0].line, 2u);
  EXPECT_NE(load.errors[0].message.find("invalid strategy"), std::string::npos);
  EXPECT_EQ(load.errors[1].line, 3u);
}

TEST_F(CorpusFile, UnreadableFileIsAnIoError) {
  EXPECT_THROW(load_corpus(dir_.file("absent.jsonl")), IoError);
}

TEST_F(CorpusFile, DialogueJsonRoundTrips) {
  const auto load = load_corpus(write(std::string(kGoodLine) + "\n"));
  ASSERT_EQ(load.dialogues.size(), 1u);
  const auto& d = load.dialogues[0];
  EXPECT_EQ(parse_dialogue(to_json(d), 1), d);
}

TEST(Preprocess, FourUtteranceDialogue) {
  PreprocessReport report;
  const auto examples = dialogue_examples(alternating(4), 0, {}, report);
  ASSERT_EQ(examples.size(), 2u);
  EXPECT_EQ(examples[0].context.size(), 1u);
  EXPECT_EQ(examples[1].context.size(), 3u);
  EXPECT_EQ(examples[1].last_post, "u2");
  EXPECT_EQ(examples[1].response, "u3");
  EXPECT_EQ(examples[1].strategy_label, static_cast<StrategyId>(3));
}

TEST(Preprocess, TwentyFiveUtterancesChunkTenTenFive) {
  PreprocessReport report;
  const auto examples = dialogue_examples(alternating(25), 0, {}, report);
  EXPECT_EQ(examples.size(), 12u);
  for (const auto& ex : examples) {
    const std::size_t chunk_start = ex.turn_index / 10 * 10;
    ASSERT_EQ(ex.context.size(), ex.turn_index - chunk_start);
    EXPECT_EQ(ex.context.front().text, "u" + std::to_string(chunk_start));
    EXPECT_LE(ex.context.size(), 9u);
  }
  std::set<std::size_t> chunks;
  for (const auto& ex : examples) chunks.insert(ex.turn_index / 10);
  EXPECT_EQ(chunks, (std::set<std::size_t>{0, 1, 2}));
}

TEST(Preprocess, SlidingWindowSeesUpToNinePrevious) {
  PreprocessReport report;
  PreprocessConfig config;
  config.chunking = Chunking::Sliding;
  for (const auto& ex : dialogue_examples(alternating(25), 0, config, report)) {
    EXPECT_EQ(ex.context.size(), std::min<std::size_t>(ex.turn_index, 9));
  }
}

TEST(Preprocess, SupporterWithoutSeekerContextIsSkipped) {
  Dialogue d;
  d.situation = "s";
  d.utterances = {supporter("hello", StrategyId::Others), seeker("hi"), supporter("how are you?", StrategyId::Question)};
  PreprocessReport report;
  const auto examples = dialogue_examples(d, 0, {}, report);
  ASSERT_EQ(examples.size(), 1u);
  EXPECT_EQ(report.skipped_no_seeker_context, 1u);
}

TEST(Preprocess, DialogueWithoutSupporterIsCounted) {
  Dialogue lonely;
  lonely.utterances = {seeker("anyone?")};
  const auto splits = preprocess({lonely, alternating(4)}, {});
  EXPECT_EQ(splits.report.skipped_no_supporter, 1u);
  EXPECT_EQ(splits.report.examples, 2u);
}

TEST(Preprocess, WindowBelowTwoIsRejected) {
  PreprocessConfig config;
  config.window = 1;
  EXPECT_THROW(preprocess({alternating(4)}, config), ContractError);
}

TEST(Preprocess, SplitSizesAreEightOneOne) {
  for (std::size_t n : {0u, 1u, 5u, 9u, 10u, 11u, 15u, 99u, 100u, 1234u}) {
    const auto s = split_sizes(n);
    EXPECT_EQ(s[0] + s[1] + s[2], n);
    EXPECT_LE(std::abs(static_cast<double>(s[1]) - n / 10.0), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(s[2]) - n / 10.0), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(s[0]) - 0.8 * n), 1.0);
  }
}

TEST(Preprocess, DeterministicUnderSeedAndSeedMatters) {
  const auto dialogues = synthetic_dialogues(40, 3, 6);
  PreprocessConfig config;
  config.seed = 11;
  const auto a = preprocess(dialogues, config);
  const auto b = preprocess(dialogues, config);
  EXPECT_EQ(examples_to_jsonl(a.train), examples_to_jsonl(b.train));
  EXPECT_EQ(examples_to_jsonl(a.dev), examples_to_jsonl(b.dev));
  EXPECT_EQ(examples_to_jsonl(a.test), examples_to_jsonl(b.test));
  config.seed = 12;
  EXPECT_NE(examples_to_jsonl(preprocess(dialogues, config).train), examples_to_jsonl(a.train));
}

TEST(Preprocess, ExampleInvariantsHold) {
  const auto dialogues = synthetic_dialogues(30, 5, 9);
  const auto splits = preprocess(dialogues, {});
  std::size_t total = 0;
  for (const auto* part : {&splits.train, &splits.dev, &splits.test}) {
    for (const auto& ex : *part) {
      ++total;
      const auto& source = dialogues[ex.dialogue_index].utterances[ex.turn_index];
      EXPECT_EQ(source.speaker, Speaker::Supporter);
      EXPECT_EQ(ex.response, source.text);
      EXPECT_EQ(ex.strategy_label, *source.strategy);
      EXPECT_LE(ex.context.size(), 9u);
      std::size_t last_seeker = ex.context.size();
      for (std::size_t i = 0; i < ex.context.size(); ++i)
        if (ex.context[i].speaker == Speaker::Seeker) last_seeker = i;
      ASSERT_LT(last_seeker, ex.context.size());
      EXPECT_EQ(ex.last_post, ex.context[last_seeker].text);
    }
  }
  EXPECT_EQ(total, 30u * 4u);
  const auto sizes = split_sizes(total);
  EXPECT_EQ(splits.train.size(), sizes[0]);
  EXPECT_EQ(splits.dev.size(), sizes[1]);
  EXPECT_EQ(splits.test.size(), sizes[2]);
}

TEST(Preprocess, DialogueLevelSplitKeepsDialoguesTogether) {
  PreprocessConfig config;
  config.split_level = SplitLevel::Dialogue;
  const auto splits = preprocess(synthetic_dialogues(20, 8, 6), config);
  std::set<std::size_t> train, dev, test;
  for (const auto& ex : splits.train) train.insert(ex.dialogue_index);
  for (const auto& ex : splits.dev) dev.insert(ex.dialogue_index);
  for (const auto& ex : splits.test) test.insert(ex.dialogue_index);
  EXPECT_EQ(train.size(), 16u);
  EXPECT_EQ(dev.size(), 2u);
  EXPECT_EQ(test.size(), 2u);
  for (auto i : dev) {
    EXPECT_FALSE(train.count(i));
    EXPECT_FALSE(test.count(i));
  }
}

TEST(ExampleFiles, JsonlRoundTrip) {
  testing::TempDir dir;
  const auto splits = preprocess(synthetic_dialogues(10, 2, 4), {});
  write_examples(dir.file("train.jsonl"), splits.train);
  EXPECT_EQ(read_examples(dir.file("train.jsonl")), splits.train);
  write_text_file(dir.file("bad.jsonl"), examples_to_jsonl(splits.train) + "{\"id\": 3}\n");
  try {
    read_examples(dir.file("bad.jsonl"));
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), splits.train.size() + 1);
  }
}

TEST(Synthetic, DeterministicAndWellFormed) {
  const auto a = synthetic_dialogues(12, 7, 4);
  EXPECT_EQ(a, synthetic_dialogues(12, 7, 4));
  EXPECT_NE(a, synthetic_dialogues(12, 8, 4));
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].utterances.size(), 4u);
    EXPECT_EQ(a[i].utterances[1].strategy, static_cast<StrategyId>(i % 8));
    EXPECT_EQ(a[i].utterances[3].strategy, static_cast<StrategyId>((i + 1) % 8));
  }
}

}  // namespace
}  // namespace misc::corpus
