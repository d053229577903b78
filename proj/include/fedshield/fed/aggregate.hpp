#pragma once

// Server-side half of federated averaging. Everything here operates on
// ModelParams only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedshield/error.hpp"
#include "fedshield/types.hpp"

namespace fedshield::fed {

enum class Aggregation { UnweightedMean, SampleWeightedMean };

/// Coordinate-wise mean of client parameters, accumulated in the given
/// (client-id) order as x0 + sum_i c_i * (x_i - x0), with c_i = 1/k for the
/// unweighted mean or the normalized weight otherwise. Averaging k identical
/// models therefore returns them bit-exactly. The result's round is the
/// largest round among the inputs.
inline ModelParams aggregate(std::span<const ModelParams> updates,
                             std::optional<std::span<const double>> weights = std::nullopt) {
  if (updates.empty()) throw Error(ErrorKind::EmptyUpdateSet, "no client updates to aggregate");
  const std::size_t dim = updates.front().dim();
  for (std::size_t i = 0; i < updates.size(); ++i) {
    if (updates[i].dim() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "update " + std::to_string(i) + " has dim " +
                                                    std::to_string(updates[i].dim()) + ", expected " +
                                                    std::to_string(dim));
    }
  }

  const std::size_t k = updates.size();
  std::vector<double> coef(k, 1.0 / static_cast<double>(k));
  if (weights) {
    if (weights->size() != k) {
      throw Error(ErrorKind::DimensionMismatch, "weights length differs from number of updates");
    }
    double total = 0.0;
    for (double w : *weights) {
      if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorKind::InvalidArgument, "weights must be positive");
      total += w;
    }
    for (std::size_t i = 0; i < k; ++i) coef[i] = (*weights)[i] / total;
  }

  const ModelParams& ref = updates.front();
  ModelParams out;
  out.weights.resize(dim);
  out.round = ref.round;
  for (const auto& u : updates) out.round = std::max(out.round, u.round);

  // Differences are accumulated first and the reference added last. A zero
  // sum leaves the reference untouched so that -0.0 survives.
  auto shift = [](double base, double acc) { return acc == 0.0 ? base : base + acc; };
  for (std::size_t j = 0; j < dim; ++j) {
    double acc = 0.0;
    for (std::size_t i = 1; i < k; ++i) acc += coef[i] * (updates[i].weights[j] - ref.weights[j]);
    out.weights[j] = shift(ref.weights[j], acc);
  }
  double acc_b = 0.0;
  for (std::size_t i = 1; i < k; ++i) acc_b += coef[i] * (updates[i].bias - ref.bias);
  out.bias = shift(ref.bias, acc_b);
  return out;
}

inline ModelParams aggregate(const std::vector<ModelParams>& updates) {
  return aggregate(std::span<const ModelParams>(updates));
}

/// What a client hands back after local training. train_loss and
/// sample_count are 0 when unknown (networked updates carry parameters only).
struct LocalUpdate {
  std::uint32_t client_id = 0;
  ModelParams params;
  double train_loss = 0.0;
  std::size_t sample_count = 0;
};

/// Server-side step shared by the simulation and the networked server:
/// aggregate updates (already in client-id order) into the next global model.
inline ModelParams aggregate_round(const std::vector<LocalUpdate>& updates, Aggregation aggregation) {
  std::vector<ModelParams> params;
  std::vector<double> weights;
  params.reserve(updates.size());
  for (const auto& u : updates) {
    params.push_back(u.params);
    weights.push_back(static_cast<double>(u.sample_count));
  }
  if (aggregation == Aggregation::SampleWeightedMean) {
    return aggregate(std::span<const ModelParams>(params), std::span<const double>(weights));
  }
  return aggregate(std::span<const ModelParams>(params));
}

}  // namespace fedshield::fed
