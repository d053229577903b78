#include <gtest/gtest.h>

#include <set>

#include "fedshield/data_synth.hpp"
#include "fedshield/dataset_io.hpp"
#include "fedshield/embedder.hpp"
#include "fedshield/logreg.hpp"

namespace fedshield {
namespace {

TEST(SynthPrompts, ReferenceSizedCorpus) {
  const auto ds = synth_prompts(254, 255, 0);
  EXPECT_EQ(ds.size(), 509u);
  EXPECT_EQ(ds.class_count(Label::Benign), 254u);
  EXPECT_EQ(ds.class_count(Label::Malicious), 255u);
  EXPECT_TRUE(validate_dataset(ds).empty());
  EXPECT_EQ(ds.provenance, "synthetic:seed=0");
  // Labels are interleaved, not class-blocked.
  std::size_t first_half_mal = 0;
  for (std::size_t i = 0; i < 254; ++i) first_half_mal += ds.items[i].label == Label::Malicious;
  EXPECT_GT(first_half_mal, 60u);
  EXPECT_LT(first_half_mal, 190u);
}

TEST(SynthPrompts, DeterministicPerSeed) {
  EXPECT_EQ(format_dataset_jsonl(synth_prompts(30, 30, 5)), format_dataset_jsonl(synth_prompts(30, 30, 5)));
  EXPECT_NE(synth_prompts(30, 30, 5), synth_prompts(30, 30, 6));
}

TEST(SynthPrompts, MinimalAndInvalidSizes) {
  const auto ds = synth_prompts(1, 1, 9);
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.class_count(Label::Benign), 1u);
  EXPECT_THROW(synth_prompts(0, 5, 0), Error);
  EXPECT_THROW(synth_prompts(5, 0, 0), Error);
}

TEST(SynthPrompts, TextsAreVaried) {
  const auto ds = synth_prompts(254, 255, 1);
  std::set<std::string> unique;
  for (const auto& it : ds.items) unique.insert(it.text);
  EXPECT_GT(unique.size(), 350u);
}

TEST(SynthPrompts, EmbeddedCorpusIsLearnable) {
  const auto X = embed_dataset({}, synth_prompts(254, 255, 2));
  const auto p = train(X, {});
  std::size_t correct = 0;
  for (std::size_t i = 0; i < X.size(); ++i) correct += classify(p, X.row(i)) == X.label(i);
  EXPECT_GT(static_cast<double>(correct) / X.size(), 0.95);
}

TEST(SynthEmbeddings, ShapeAndNorm) {
  const auto X = synth_embeddings(10, 7, 5, 1.0, 0.5, 3);
  EXPECT_EQ(X.size(), 17u);
  EXPECT_EQ(X.dim(), 5u);
  EXPECT_EQ(X.class_count(Label::Malicious), 7u);
  for (std::size_t i = 0; i < X.size(); ++i) {
    double sq = 0;
    for (double v : X.row(i)) sq += v * v;
    EXPECT_NEAR(sq, 1.0, 1e-12);
  }
  EXPECT_EQ(synth_embeddings(4, 4, 3, 1.0, 0.5, 8), synth_embeddings(4, 4, 3, 1.0, 0.5, 8));
}

TEST(SynthEmbeddings, ZeroNoiseRowsCoincidePerClass) {
  const auto X = synth_embeddings(3, 3, 4, 2.0, 0.0, 1);
  for (std::size_t i = 1; i < 3; ++i) {
    EXPECT_TRUE(std::equal(X.row(i).begin(), X.row(i).end(), X.row(0).begin()));
    EXPECT_TRUE(std::equal(X.row(3 + i).begin(), X.row(3 + i).end(), X.row(3).begin()));
  }
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(X.row(0)[j], -X.row(3)[j]);
}

TEST(SynthEmbeddings, WideMarginIsSeparable) {
  const auto X = synth_embeddings(100, 100, 16, 5.0, 0.1, 4);
  const auto p = train(X, {});
  for (std::size_t i = 0; i < X.size(); ++i) EXPECT_EQ(classify(p, X.row(i)), X.label(i));
}

TEST(SynthEmbeddings, RejectsBadParameters) {
  EXPECT_THROW(synth_embeddings(1, 1, 1, 1.0, 0.1, 0), Error);
  EXPECT_THROW(synth_embeddings(1, 1, 4, 0.0, 0.1, 0), Error);
  EXPECT_THROW(synth_embeddings(1, 1, 4, 1.0, -1.0, 0), Error);
}

}  // namespace
}  // namespace fedshield
