#pragma once

// Federation configuration and telemetry shared by the in-process engine and
// the networked server.

#include <cstdint>
#include <optional>
#include <vector>

#include "fedshield/error.hpp"
#include "fedshield/fed/aggregate.hpp"
#include "fedshield/logreg.hpp"
#include "fedshield/types.hpp"

namespace fedshield::fed {

enum class SingleClassPolicy { Fail, SkipClient };

class FedConfig {
 public:
  FedConfig() = default;

  explicit FedConfig(std::size_t rounds, TrainConfig train_cfg = {},
                     Aggregation aggregation = Aggregation::UnweightedMean,
                     SingleClassPolicy on_single_class = SingleClassPolicy::Fail)
      : rounds_(rounds), train_cfg_(train_cfg), aggregation_(aggregation), on_single_class_(on_single_class) {
    if (rounds_ == 0) throw Error(ErrorKind::InvalidArgument, "rounds must be at least 1");
    train_cfg_.validate();
  }

  std::size_t rounds() const { return rounds_; }
  const TrainConfig& train_cfg() const { return train_cfg_; }
  Aggregation aggregation() const { return aggregation_; }
  SingleClassPolicy on_single_class_shard() const { return on_single_class_; }

  // Clients of a round train on separate threads; results are unchanged.
  bool concurrent_clients() const { return concurrent_; }
  FedConfig& set_concurrent_clients(bool on) {
    concurrent_ = on;
    return *this;
  }

 private:
  std::size_t rounds_ = 10;
  TrainConfig train_cfg_{};
  Aggregation aggregation_ = Aggregation::UnweightedMean;
  SingleClassPolicy on_single_class_ = SingleClassPolicy::Fail;
  bool concurrent_ = false;
};

struct RoundLog {
  std::uint64_t round = 0;
  std::vector<std::uint32_t> client_ids;
  std::vector<ModelParams> per_client_params;
  ModelParams global_params;
  // Empty when the losses are not observable (networked server).
  std::vector<double> per_client_train_loss;
  std::optional<double> test_accuracy;

  friend bool operator==(const RoundLog&, const RoundLog&) = default;
};

struct FedResult {
  ModelParams final_params;
  std::vector<RoundLog> logs;
};

/// Fraction of test rows classified correctly at threshold 0.5.
inline std::optional<double> test_accuracy(const ModelParams& params, const EmbeddingMatrix& test) {
  if (test.empty()) return std::nullopt;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) correct += classify(params, test.row(i)) == test.label(i) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace fedshield::fed
