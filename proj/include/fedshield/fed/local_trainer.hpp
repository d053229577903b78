#pragma once

// Client-side half of federated averaging: owns a shard, returns parameters.

#include <cstdint>
#include <optional>
#include <utility>

#include "fedshield/error.hpp"
#include "fedshield/fed/aggregate.hpp"
#include "fedshield/logreg.hpp"
#include "fedshield/types.hpp"

namespace fedshield::fed {

class LocalTrainer {
 public:
  LocalTrainer(ClientShard shard, TrainConfig cfg) : shard_(std::move(shard)), cfg_(cfg) {
    cfg_.validate();
    if (shard_.embeddings.empty()) {
      throw Error(ErrorKind::EmptyDataset, "client " + std::to_string(shard_.client_id) + " has an empty shard");
    }
  }

  std::uint32_t client_id() const { return shard_.client_id; }
  std::size_t sample_count() const { return shard_.embeddings.size(); }
  std::size_t dim() const { return shard_.embeddings.dim(); }
  bool has_both_classes() const { return shard_.embeddings.has_both_classes(); }

  /// Trains warm-started from `global` and stamps the result with `round`.
  LocalUpdate update(const ModelParams& global, std::uint64_t round) const {
    TrainResult res = fit(shard_.embeddings, cfg_, global);
    res.params.round = round;
    return {shard_.client_id, std::move(res.params), res.loss, sample_count()};
  }

 private:
  ClientShard shard_;
  TrainConfig cfg_;
};

}  // namespace fedshield::fed
