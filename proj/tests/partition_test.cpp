#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "fedshield/data_synth.hpp"
#include "fedshield/partition.hpp"

namespace fedshield {
namespace {

EmbeddingMatrix corpus(std::size_t nb, std::size_t nm, std::uint64_t seed = 1) {
  return synth_embeddings(nb, nm, 8, 1.0, 1.0, seed);
}

ErrorKind error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::IoError;
}

TEST(RoundHalfEven, Examples) {
  EXPECT_EQ(round_half_even(0.5), 0u);
  EXPECT_EQ(round_half_even(1.5), 2u);
  EXPECT_EQ(round_half_even(2.5), 2u);
  EXPECT_EQ(round_half_even(50.8), 51u);
  EXPECT_EQ(round_half_even(50.2), 50u);
  EXPECT_EQ(round_half_even(3.0), 3u);
}

TEST(StratifiedSplit, ReferenceCorpusSizes) {
  const auto X = corpus(254, 255);
  const auto s = stratified_split(X, 0.2, 7);
  EXPECT_EQ(s.test_indices.size(), 102u);
  EXPECT_EQ(s.train_indices.size(), 407u);
  const auto test = X.subset(s.test_indices);
  EXPECT_EQ(test.class_count(Label::Benign), 51u);
  EXPECT_EQ(test.class_count(Label::Malicious), 51u);
}

TEST(StratifiedSplit, BalancedCorpus) {
  const auto s = stratified_split(corpus(255, 255), 0.2, 3);
  EXPECT_EQ(s.test_indices.size(), 102u);
  EXPECT_EQ(s.train_indices.size(), 408u);
}

TEST(StratifiedSplit, DisjointCoveringSortedDeterministic) {
  const auto X = corpus(60, 41);
  const auto a = stratified_split(X, 0.3, 11);
  EXPECT_EQ(a, stratified_split(X, 0.3, 11));
  EXPECT_NE(a, stratified_split(X, 0.3, 12));
  EXPECT_TRUE(std::is_sorted(a.train_indices.begin(), a.train_indices.end()));
  EXPECT_TRUE(std::is_sorted(a.test_indices.begin(), a.test_indices.end()));
  std::vector<std::size_t> all = a.train_indices;
  all.insert(all.end(), a.test_indices.begin(), a.test_indices.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < X.size(); ++i) ASSERT_EQ(all[i], i);
}

TEST(StratifiedSplit, RejectsBadInput) {
  EXPECT_EQ(error_of([] { stratified_split(corpus(5, 5), 1.0, 0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(error_of([] { stratified_split(corpus(5, 5), 0.0, 0); }), ErrorKind::InvalidArgument);
  EmbeddingMatrix one(2);
  const std::vector<double> r{1, 0};
  one.push_back(r, Label::Benign);
  EXPECT_EQ(error_of([&] { stratified_split(one, 0.2, 0); }), ErrorKind::SingleClassData);
}

TEST(PartitionClients, DefaultSpecOnReferenceTrainingSet) {
  const auto X = corpus(254, 255);
  const auto s = stratified_split(X, 0.2, 7);
  const auto train = X.subset(s.train_indices);
  const auto p = partition_clients(train, default_partition_spec(5));
  ASSERT_EQ(p.shards.size(), 3u);
  const std::size_t sizes[] = {203, 101, 103};
  const std::size_t benign[] = {183, 10, 10};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(p.shards[i].client_id, i);
    EXPECT_EQ(p.shards[i].embeddings.size(), sizes[i]);
    EXPECT_EQ(p.shards[i].embeddings.class_count(Label::Benign), benign[i]);
  }
  EXPECT_EQ(p.unassigned.size(), 0u);
}

TEST(PartitionClients, SkewedSpecCompositionAndDisjointness) {
  const auto train = corpus(300, 200);
  const auto spec = parse_clients_spec("0.9:203,0.5:101,0.1:103", 9);
  const auto p = partition_clients(train, spec);
  const std::size_t benign[] = {183, 50, 10};  // 182.7 -> 183, 50.5 -> 50, 10.3 -> 10
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& sh = p.shards[i];
    EXPECT_EQ(sh.embeddings.class_count(Label::Benign), benign[i]);
    EXPECT_EQ(sh.embeddings.size(), spec.clients[i].sample_count);
    EXPECT_TRUE(std::is_sorted(sh.source_indices.begin(), sh.source_indices.end()));
    for (std::size_t k = 0; k < sh.source_indices.size(); ++k) {
      EXPECT_TRUE(seen.insert(sh.source_indices[k]).second);
      const auto a = sh.embeddings.row(k), b = train.row(sh.source_indices[k]);
      EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
      EXPECT_EQ(sh.embeddings.label(k), train.label(sh.source_indices[k]));
    }
  }
  EXPECT_EQ(seen.size() + p.unassigned.size(), train.size());
  for (std::size_t u : p.unassigned) EXPECT_FALSE(seen.count(u));
}

TEST(PartitionClients, DeterministicAndSeedSensitive) {
  const auto train = corpus(100, 100);
  const auto spec = parse_clients_spec("0.5:40,0.5:40", 1);
  const auto a = partition_clients(train, spec);
  const auto b = partition_clients(train, spec);
  EXPECT_EQ(a.shards, b.shards);
  auto other = spec;
  other.seed = 2;
  EXPECT_NE(partition_clients(train, other).shards[0].source_indices, a.shards[0].source_indices);
}

TEST(PartitionClients, SingleClientAllBenign) {
  const auto p = partition_clients(corpus(20, 20), PartitionSpec{{{1.0, 10}}, 0});
  EXPECT_EQ(p.shards[0].embeddings.class_count(Label::Benign), 10u);
  EXPECT_FALSE(p.shards[0].embeddings.has_both_classes());
}

TEST(PartitionClients, InfeasibleSpecNamesClientAndClass) {
  const auto train = corpus(100, 20);
  try {
    partition_clients(train, parse_clients_spec("0.5:30,0.1:30", 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleSpec);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("client 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("malicious"), std::string::npos) << msg;
  }
  EXPECT_EQ(error_of([&] { partition_clients(train, parse_clients_spec("0.5:200", 0)); }),
            ErrorKind::InfeasibleSpec);
}

TEST(ClientsSpec, ParseFormatRoundTripAndErrors) {
  const auto spec = parse_clients_spec("0.9:203,0.1:101", 4);
  EXPECT_EQ(format_clients_spec(spec), "0.9:203,0.1:101");
  EXPECT_EQ(spec.seed, 4u);
  EXPECT_EQ(error_of([] { parse_clients_spec("0.9", 0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(error_of([] { parse_clients_spec("1.5:10", 0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(error_of([] { parse_clients_spec("0.5:0", 0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(error_of([] { parse_clients_spec("", 0); }), ErrorKind::InvalidArgument);
}

TEST(Manifest, ListsEveryIndex) {
  const auto X = corpus(30, 30);
  const auto s = stratified_split(X, 0.2, 1);
  const auto train = X.subset(s.train_indices);
  const auto spec = parse_clients_spec("0.5:10,0.5:10", 2);
  const auto p = partition_clients(train, spec);
  const auto m = partition_manifest(1, 0.2, s, spec, p);
  EXPECT_EQ(m["split"]["test_indices"].get<std::vector<std::size_t>>(), s.test_indices);
  EXPECT_EQ(m["partition"]["clients_spec"], "0.5:10,0.5:10");
  EXPECT_EQ(m["partition"]["clients"][1]["train_indices"].get<std::vector<std::size_t>>(),
            p.shards[1].source_indices);
  EXPECT_EQ(m["unassigned_train_indices"].size(), train.size() - 20);
}

}  // namespace
}  // namespace fedshield
