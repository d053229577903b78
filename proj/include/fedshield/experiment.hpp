#pragma once

// One-shot reproduction pipeline: split -> partition -> centralized and
// federated training -> comparative report. A single seed drives every
// stochastic step through derived sub-seeds.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedshield/dataset_io.hpp"
#include "fedshield/embedder.hpp"
#include "fedshield/fed/engine.hpp"
#include "fedshield/logreg.hpp"
#include "fedshield/metrics.hpp"
#include "fedshield/partition.hpp"
#include "fedshield/report.hpp"
#include "fedshield/rng.hpp"
#include "fedshield/serialize.hpp"
#include "fedshield/text_io.hpp"
#include "fedshield/types.hpp"

namespace fedshield {

inline constexpr std::uint64_t kSplitStream = 1;
inline constexpr std::uint64_t kPartitionStream = 2;

/// Loads either a JSONL prompt file (embedded with `cfg`) or an embedding file.
inline EmbeddingMatrix load_matrix(const std::filesystem::path& path, const EmbedderConfig& cfg) {
  const std::string data = text::read_file(path);
  if (data.rfind("#emb ", 0) == 0) return parse_embeddings(data, path.string());
  return embed_dataset(cfg, parse_dataset_jsonl(data, path.string()));
}

struct PreparedData {
  std::uint64_t split_seed = 0;
  double test_fraction = 0.2;
  SplitResult split;
  EmbeddingMatrix train;
  EmbeddingMatrix test;
  PartitionSpec spec;
  Partition partition;

  nlohmann::json manifest() const {
    return partition_manifest(split_seed, test_fraction, split, spec, partition);
  }
};

/// Stratified split followed by client partitioning. An empty clients_spec
/// selects the three-client default.
inline PreparedData prepare_federation(const EmbeddingMatrix& data, std::uint64_t seed, double test_fraction,
                                       const std::string& clients_spec = {}) {
  PreparedData p;
  p.split_seed = derive_seed(seed, kSplitStream);
  p.test_fraction = test_fraction;
  p.split = stratified_split(data, test_fraction, p.split_seed);
  p.train = data.subset(p.split.train_indices);
  p.test = data.subset(p.split.test_indices);
  const std::uint64_t part_seed = derive_seed(seed, kPartitionStream);
  p.spec = clients_spec.empty() ? default_partition_spec(part_seed) : parse_clients_spec(clients_spec, part_seed);
  p.partition = partition_clients(p.train, p.spec);
  return p;
}

struct ExperimentOptions {
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  std::string clients_spec;  // empty = default three-client spec
  std::size_t rounds = 10;
  TrainConfig train_cfg{};
  fed::Aggregation aggregation = fed::Aggregation::UnweightedMean;
  bool concurrent_clients = false;
};

struct ExperimentResult {
  PreparedData data;
  ModelParams central;
  fed::FedResult federated;
  EvaluationReport central_report;
  EvaluationReport federated_report;
  ReportDocument document;
};

inline ExperimentResult run_experiment(const EmbeddingMatrix& data, const ExperimentOptions& opts) {
  ExperimentResult res;
  res.data = prepare_federation(data, opts.seed, opts.test_fraction, opts.clients_spec);
  res.central = train(res.data.train, opts.train_cfg);

  fed::FedConfig cfg(opts.rounds, opts.train_cfg, opts.aggregation);
  cfg.set_concurrent_clients(opts.concurrent_clients);
  res.federated = fed::run_federated(res.data.partition.shards, res.data.test, cfg);

  res.central_report = evaluate(res.central, res.data.test);
  res.federated_report = evaluate(res.federated.final_params, res.data.test);
  res.document = comparative_report(res.central_report, res.federated_report);
  return res;
}

/// Layout: manifest.json, model_central.txt, model_federated.txt,
/// round_logs.jsonl and report/ (see comparative_report).
inline void write_experiment(const std::filesystem::path& out_dir, const ExperimentResult& res) {
  std::filesystem::create_directories(out_dir);
  text::write_file(out_dir / "manifest.json", res.data.manifest().dump(2) + "\n");
  save_model(out_dir / "model_central.txt", res.central);
  save_model(out_dir / "model_federated.txt", res.federated.final_params);
  text::write_file(out_dir / "round_logs.jsonl", fed::format_round_logs(res.federated.logs));
  write_report(out_dir / "report", res.document);
}

}  // namespace fedshield
