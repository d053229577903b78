#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fedshield/error.hpp"
#include "fedshield/fed/aggregate.hpp"
#include "fedshield/fed/config.hpp"
#include "fedshield/fed/local_trainer.hpp"
#include "fedshield/logreg.hpp"
#include "fedshield/types.hpp"

namespace fedshield::fed {

/// In-process synchronous FedAvg. The global model starts at zeros; each
/// round every client trains from the previous global model and the server
/// averages the returned parameters in client-id order.
inline FedResult run_federated(std::vector<ClientShard> shards, const EmbeddingMatrix& test, const FedConfig& cfg) {
  if (shards.empty()) throw Error(ErrorKind::EmptyUpdateSet, "no client shards");
  std::sort(shards.begin(), shards.end(),
            [](const ClientShard& a, const ClientShard& b) { return a.client_id < b.client_id; });
  const std::size_t dim = shards.front().embeddings.dim();
  for (std::size_t i = 0; i < shards.size(); ++i) {
    if (i > 0 && shards[i].client_id == shards[i - 1].client_id) {
      throw Error(ErrorKind::InvalidArgument, "duplicate client id " + std::to_string(shards[i].client_id));
    }
    if (shards[i].embeddings.dim() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "shard dims differ");
    }
  }
  if (!test.empty() && test.dim() != dim) {
    throw Error(ErrorKind::DimensionMismatch, "test set dim differs from shard dim");
  }

  std::vector<LocalTrainer> clients;
  clients.reserve(shards.size());
  for (auto& shard : shards) {
    if (!shard.embeddings.has_both_classes() && cfg.on_single_class_shard() == SingleClassPolicy::Fail) {
      throw Error(ErrorKind::SingleClassData,
                  "client " + std::to_string(shard.client_id) + " shard holds a single class");
    }
    clients.emplace_back(std::move(shard), cfg.train_cfg());
  }

  FedResult result;
  ModelParams global = ModelParams::zeros(dim);
  for (std::uint64_t r = 1; r <= cfg.rounds(); ++r) {
    std::vector<std::optional<LocalUpdate>> slots(clients.size());
    auto work = [&](std::size_t i) {
      if (clients[i].has_both_classes()) slots[i] = clients[i].update(global, r);
    };
    if (cfg.concurrent_clients() && clients.size() > 1) {
      std::vector<std::jthread> threads;
      std::vector<std::exception_ptr> errors(clients.size());
      for (std::size_t i = 0; i < clients.size(); ++i) {
        threads.emplace_back([&, i] {
          try {
            work(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        });
      }
      threads.clear();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    } else {
      for (std::size_t i = 0; i < clients.size(); ++i) work(i);
    }

    std::vector<LocalUpdate> updates;
    for (auto& s : slots) {
      if (s) updates.push_back(std::move(*s));
    }
    if (updates.empty()) {
      throw Error(ErrorKind::EmptyUpdateSet, "every client was skipped in round " + std::to_string(r));
    }

    RoundLog log;
    log.round = r;
    global = aggregate_round(updates, cfg.aggregation());
    global.round = r;
    for (const auto& u : updates) {
      log.client_ids.push_back(u.client_id);
      log.per_client_params.push_back(u.params);
      log.per_client_train_loss.push_back(u.train_loss);
    }
    log.global_params = global;
    log.test_accuracy = test_accuracy(global, test);
    result.logs.push_back(std::move(log));
  }
  result.final_params = std::move(global);
  return result;
}

}  // namespace fedshield::fed
