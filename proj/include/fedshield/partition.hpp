#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fedshield/error.hpp"
#include "fedshield/rng.hpp"
#include "fedshield/text_io.hpp"
#include "fedshield/types.hpp"

namespace fedshield {

/// Round-half-to-even for nonnegative values.
inline std::size_t round_half_even(double x) {
  const double fl = std::floor(x);
  const double diff = x - fl;
  auto base = static_cast<std::size_t>(fl);
  if (diff > 0.5) return base + 1;
  if (diff < 0.5) return base;
  return (base % 2 == 0) ? base : base + 1;
}

struct SplitResult {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;

  friend bool operator==(const SplitResult&, const SplitResult&) = default;
};

namespace detail {
inline std::array<std::vector<std::size_t>, 2> indices_by_class(const EmbeddingMatrix& X) {
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < X.size(); ++i) by_class[label_index(X.label(i))].push_back(i);
  return by_class;
}
}  // namespace detail

/// Per class: shuffle the class's indices (benign first, then malicious, one
/// shared generator) and hold out round_half_even(test_fraction * n_class).
/// Both output lists are sorted ascending.
inline SplitResult stratified_split(const EmbeddingMatrix& X, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "test_fraction must lie in (0,1)");
  }
  if (!X.has_both_classes()) throw Error(ErrorKind::SingleClassData, "split needs both classes present");

  Xoshiro256 rng(seed);
  SplitResult out;
  for (auto& idx : detail::indices_by_class(X)) {
    shuffle(idx, rng);
    const std::size_t n_test = std::min(idx.size(), round_half_even(test_fraction * static_cast<double>(idx.size())));
    out.test_indices.insert(out.test_indices.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train_indices.insert(out.train_indices.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  return out;
}

struct Partition {
  std::vector<ClientShard> shards;
  std::vector<std::size_t> unassigned;  // training rows no client received
};

/// Client i receives round_half_even(benign_fraction * sample_count) benign
/// rows and the remainder malicious, drawn without replacement from per-class
/// pools shuffled once with spec.seed. Clients draw in spec order; rows inside
/// a shard keep ascending training-index order.
inline Partition partition_clients(const EmbeddingMatrix& train, const PartitionSpec& spec) {
  spec.validate();
  if (spec.total_samples() > train.size()) {
    throw Error(ErrorKind::InfeasibleSpec, "spec requests " + std::to_string(spec.total_samples()) +
                                               " samples but the training set has " + std::to_string(train.size()));
  }

  Xoshiro256 rng(spec.seed);
  auto pools = detail::indices_by_class(train);
  for (auto& pool : pools) shuffle(pool, rng);
  std::array<std::size_t, 2> cursor{0, 0};

  Partition out;
  for (std::size_t c = 0; c < spec.clients.size(); ++c) {
    const auto& cs = spec.clients[c];
    const std::size_t n_benign =
        std::min(cs.sample_count, round_half_even(cs.benign_fraction * static_cast<double>(cs.sample_count)));
    const std::array<std::size_t, 2> demand{n_benign, cs.sample_count - n_benign};

    std::vector<std::size_t> picked;
    picked.reserve(cs.sample_count);
    for (Label label : kLabels) {
      const auto k = label_index(label);
      if (cursor[k] + demand[k] > pools[k].size()) {
        throw Error(ErrorKind::InfeasibleSpec,
                    "client " + std::to_string(c) + " needs " + std::to_string(demand[k]) + " " +
                        std::string(to_string(label)) + " samples but only " +
                        std::to_string(pools[k].size() - cursor[k]) + " remain");
      }
      picked.insert(picked.end(), pools[k].begin() + static_cast<std::ptrdiff_t>(cursor[k]),
                    pools[k].begin() + static_cast<std::ptrdiff_t>(cursor[k] + demand[k]));
      cursor[k] += demand[k];
    }
    std::sort(picked.begin(), picked.end());
    out.shards.push_back({static_cast<std::uint32_t>(c), train.subset(picked), std::move(picked)});
  }
  for (std::size_t k = 0; k < 2; ++k) {
    out.unassigned.insert(out.unassigned.end(), pools[k].begin() + static_cast<std::ptrdiff_t>(cursor[k]),
                          pools[k].end());
  }
  std::sort(out.unassigned.begin(), out.unassigned.end());
  return out;
}

/// Three clients sized 203/101/103 with benign shares 0.9/0.1/0.1.
inline PartitionSpec default_partition_spec(std::uint64_t seed) {
  return PartitionSpec{{{0.9, 203}, {0.1, 101}, {0.1, 103}}, seed};
}

/// Parses "frac:count,frac:count,..." e.g. "0.9:203,0.5:101,0.1:103".
inline PartitionSpec parse_clients_spec(std::string_view text_spec, std::uint64_t seed) {
  PartitionSpec spec;
  spec.seed = seed;
  std::size_t pos = 0;
  while (pos <= text_spec.size()) {
    std::size_t end = text_spec.find(',', pos);
    if (end == std::string_view::npos) end = text_spec.size();
    const auto item = text_spec.substr(pos, end - pos);
    const auto colon = item.find(':');
    const auto frac = colon == std::string_view::npos ? std::nullopt : text::parse_double(item.substr(0, colon));
    const auto count =
        colon == std::string_view::npos ? std::nullopt : text::parse_int<std::size_t>(item.substr(colon + 1));
    if (!frac || !count) {
      throw Error(ErrorKind::InvalidArgument, "bad client spec entry '" + std::string(item) + "'");
    }
    spec.clients.push_back({*frac, *count});
    pos = end + 1;
  }
  spec.validate();
  return spec;
}

inline std::string format_clients_spec(const PartitionSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.clients.size(); ++i) {
    if (i) out += ',';
    out += text::format_double(spec.clients[i].benign_fraction) + ":" + std::to_string(spec.clients[i].sample_count);
  }
  return out;
}

/// Replay manifest: seeds, spec and every index list.
inline nlohmann::json partition_manifest(std::uint64_t split_seed, double test_fraction, const SplitResult& split,
                                         const PartitionSpec& spec, const Partition& partition) {
  nlohmann::json clients = nlohmann::json::array();
  for (std::size_t i = 0; i < spec.clients.size(); ++i) {
    const auto& shard = partition.shards[i];
    clients.push_back({{"client_id", shard.client_id},
                       {"benign_fraction", spec.clients[i].benign_fraction},
                       {"sample_count", spec.clients[i].sample_count},
                       {"benign", shard.embeddings.class_count(Label::Benign)},
                       {"malicious", shard.embeddings.class_count(Label::Malicious)},
                       {"train_indices", shard.source_indices}});
  }
  return {{"split", {{"seed", split_seed},
                     {"test_fraction", test_fraction},
                     {"train_indices", split.train_indices},
                     {"test_indices", split.test_indices}}},
          {"partition", {{"seed", spec.seed}, {"clients_spec", format_clients_spec(spec)}, {"clients", clients}}},
          {"unassigned_train_indices", partition.unassigned}};
}

}  // namespace fedshield
