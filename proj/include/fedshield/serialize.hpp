#pragma once

// JSON (de)serialization for the domain types, found by nlohmann via ADL.

#include <string>
#include <vector>

#include <json.hpp>

#include "fedshield/error.hpp"
#include "fedshield/fed/engine.hpp"
#include "fedshield/types.hpp"

namespace fedshield {

inline void to_json(nlohmann::json& j, const Label& l) { j = std::string(to_string(l)); }
inline void from_json(const nlohmann::json& j, Label& l) {
  const auto parsed = parse_label(j.get<std::string>());
  if (!parsed) throw Error(ErrorKind::FormatError, "unknown label " + j.dump());
  l = *parsed;
}

inline void to_json(nlohmann::json& j, const LabeledPrompt& p) { j = {{"text", p.text}, {"label", p.label}}; }
inline void from_json(const nlohmann::json& j, LabeledPrompt& p) {
  j.at("text").get_to(p.text);
  j.at("label").get_to(p.label);
}

inline void to_json(nlohmann::json& j, const PromptDataset& d) {
  j = {{"provenance", d.provenance}, {"items", d.items}};
}
inline void from_json(const nlohmann::json& j, PromptDataset& d) {
  j.at("provenance").get_to(d.provenance);
  j.at("items").get_to(d.items);
}

inline void to_json(nlohmann::json& j, const EmbeddingMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j = {{"dim", m.dim()}, {"rows", rows}, {"labels", m.labels()}};
}
inline void from_json(const nlohmann::json& j, EmbeddingMatrix& m) {
  m = EmbeddingMatrix(j.at("dim").get<std::size_t>());
  const auto& rows = j.at("rows");
  const auto labels = j.at("labels").get<std::vector<Label>>();
  if (rows.size() != labels.size()) throw Error(ErrorKind::FormatError, "rows/labels length mismatch");
  for (std::size_t i = 0; i < rows.size(); ++i) m.push_back(rows[i].get<std::vector<double>>(), labels[i]);
}

inline void to_json(nlohmann::json& j, const ModelParams& p) {
  j = {{"weights", p.weights}, {"bias", p.bias}, {"round", p.round}};
}
inline void from_json(const nlohmann::json& j, ModelParams& p) {
  j.at("weights").get_to(p.weights);
  j.at("bias").get_to(p.bias);
  j.at("round").get_to(p.round);
}

inline void to_json(nlohmann::json& j, const ClientSpec& c) {
  j = {{"benign_fraction", c.benign_fraction}, {"sample_count", c.sample_count}};
}
inline void from_json(const nlohmann::json& j, ClientSpec& c) {
  j.at("benign_fraction").get_to(c.benign_fraction);
  j.at("sample_count").get_to(c.sample_count);
}

inline void to_json(nlohmann::json& j, const PartitionSpec& s) { j = {{"clients", s.clients}, {"seed", s.seed}}; }
inline void from_json(const nlohmann::json& j, PartitionSpec& s) {
  j.at("clients").get_to(s.clients);
  j.at("seed").get_to(s.seed);
}

inline void to_json(nlohmann::json& j, const ClientShard& s) {
  j = {{"client_id", s.client_id}, {"embeddings", s.embeddings}, {"source_indices", s.source_indices}};
}
inline void from_json(const nlohmann::json& j, ClientShard& s) {
  j.at("client_id").get_to(s.client_id);
  j.at("embeddings").get_to(s.embeddings);
  j.at("source_indices").get_to(s.source_indices);
}

inline void to_json(nlohmann::json& j, const ConfusionMatrix& c) { j = c.counts; }
inline void from_json(const nlohmann::json& j, ConfusionMatrix& c) { j.get_to(c.counts); }

inline void to_json(nlohmann::json& j, const ClassMetrics& m) {
  j = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support},
       {"undefined", m.undefined}};
}
inline void from_json(const nlohmann::json& j, ClassMetrics& m) {
  j.at("precision").get_to(m.precision);
  j.at("recall").get_to(m.recall);
  j.at("f1").get_to(m.f1);
  j.at("support").get_to(m.support);
  j.at("undefined").get_to(m.undefined);
}

inline void to_json(nlohmann::json& j, const RocPoint& p) { j = {p.fpr, p.tpr}; }
inline void from_json(const nlohmann::json& j, RocPoint& p) {
  p.fpr = j.at(0).get<double>();
  p.tpr = j.at(1).get<double>();
}

inline void to_json(nlohmann::json& j, const EvaluationReport& r) {
  j = {{"confusion", r.confusion},
       {"per_class", {{"benign", r.per_class[0]}, {"malicious", r.per_class[1]}}},
       {"accuracy", r.accuracy},
       {"roc_points", r.roc_points},
       {"auc", r.auc}};
}
inline void from_json(const nlohmann::json& j, EvaluationReport& r) {
  j.at("confusion").get_to(r.confusion);
  j.at("per_class").at("benign").get_to(r.per_class[0]);
  j.at("per_class").at("malicious").get_to(r.per_class[1]);
  j.at("accuracy").get_to(r.accuracy);
  j.at("roc_points").get_to(r.roc_points);
  j.at("auc").get_to(r.auc);
}

namespace fed {

inline void to_json(nlohmann::json& j, const RoundLog& l) {
  j = {{"round", l.round},
       {"client_ids", l.client_ids},
       {"per_client_params", l.per_client_params},
       {"global_params", l.global_params},
       {"per_client_train_loss", l.per_client_train_loss},
       {"test_accuracy", l.test_accuracy ? nlohmann::json(*l.test_accuracy) : nlohmann::json(nullptr)}};
}
inline void from_json(const nlohmann::json& j, RoundLog& l) {
  j.at("round").get_to(l.round);
  j.at("client_ids").get_to(l.client_ids);
  j.at("per_client_params").get_to(l.per_client_params);
  j.at("global_params").get_to(l.global_params);
  j.at("per_client_train_loss").get_to(l.per_client_train_loss);
  const auto& acc = j.at("test_accuracy");
  l.test_accuracy = acc.is_null() ? std::nullopt : std::optional<double>(acc.get<double>());
}

/// One RoundLog per line.
inline std::string format_round_logs(const std::vector<RoundLog>& logs) {
  std::string out;
  for (const auto& l : logs) {
    out += nlohmann::json(l).dump();
    out += '\n';
  }
  return out;
}

}  // namespace fed

}  // namespace fedshield
