#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedshield/error.hpp"
#include "fedshield/utf8.hpp"

namespace fedshield {

/// Malicious is the positive class everywhere (metrics, thresholds, ROC).
enum class Label : std::uint8_t { Benign = 0, Malicious = 1 };

inline constexpr std::array<Label, 2> kLabels = {Label::Benign, Label::Malicious};

constexpr std::string_view to_string(Label label) {
  return label == Label::Malicious ? "malicious" : "benign";
}

constexpr std::optional<Label> parse_label(std::string_view s) {
  if (s == "benign") return Label::Benign;
  if (s == "malicious") return Label::Malicious;
  return std::nullopt;
}

constexpr std::size_t label_index(Label label) { return static_cast<std::size_t>(label); }

constexpr bool is_known_label(Label label) {
  return label == Label::Benign || label == Label::Malicious;
}

struct LabeledPrompt {
  std::string text;
  Label label = Label::Benign;

  friend bool operator==(const LabeledPrompt&, const LabeledPrompt&) = default;
};

struct PromptDataset {
  std::vector<LabeledPrompt> items;
  std::string provenance;

  std::size_t size() const { return items.size(); }

  std::size_t class_count(Label label) const {
    std::size_t n = 0;
    for (const auto& item : items) n += item.label == label ? 1 : 0;
    return n;
  }

  friend bool operator==(const PromptDataset&, const PromptDataset&) = default;
};

struct Violation {
  std::size_t index;
  std::string rule;

  std::string describe() const { return "item " + std::to_string(index) + ": " + rule; }
};

inline std::vector<Violation> validate_dataset(const PromptDataset& ds) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    const auto& item = ds.items[i];
    if (!utf8::is_valid(item.text)) {
      out.push_back({i, "text is not valid UTF-8"});
    } else if (utf8::is_blank(item.text)) {
      out.push_back({i, "text is empty after trimming"});
    }
    if (!is_known_label(item.label)) {
      out.push_back({i, "label is neither benign nor malicious"});
    }
  }
  return out;
}

/// Dense row-major matrix of embeddings with a parallel label column.
/// Rows are appended during construction and never mutated afterwards.
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  Label label(std::size_t i) const { return labels_[i]; }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<double>& values() const { return values_; }

  void reserve(std::size_t rows) {
    values_.reserve(rows * dim_);
    labels_.reserve(rows);
  }

  void push_back(std::span<const double> row, Label label) {
    if (row.size() != dim_) {
      throw Error(ErrorKind::DimensionMismatch, "row has " + std::to_string(row.size()) +
                                                    " values, expected " + std::to_string(dim_));
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NonFiniteValue, "row " + std::to_string(size()) + " has a non-finite entry");
      }
    }
    values_.insert(values_.end(), row.begin(), row.end());
    labels_.push_back(label);
  }

  std::size_t class_count(Label label) const {
    std::size_t n = 0;
    for (Label l : labels_) n += l == label ? 1 : 0;
    return n;
  }

  bool has_both_classes() const {
    return class_count(Label::Benign) > 0 && class_count(Label::Malicious) > 0;
  }

  EmbeddingMatrix subset(std::span<const std::size_t> indices) const {
    EmbeddingMatrix out(dim_);
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(row(i), label(i));
    return out;
  }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t dim_;
  std::vector<double> values_;
  std::vector<Label> labels_;
};

/// Logistic-regression parameters; the only value exchanged between
/// clients and the aggregation server.
struct ModelParams {
  std::vector<double> weights;
  double bias = 0.0;
  std::uint64_t round = 0;

  static ModelParams zeros(std::size_t dim) { return ModelParams{std::vector<double>(dim, 0.0), 0.0, 0}; }

  std::size_t dim() const { return weights.size(); }

  bool is_finite() const {
    if (!std::isfinite(bias)) return false;
    for (double w : weights) {
      if (!std::isfinite(w)) return false;
    }
    return true;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Bitwise equality (distinguishes -0.0 from 0.0).
inline bool bit_identical(const ModelParams& a, const ModelParams& b) {
  return a.round == b.round && a.weights.size() == b.weights.size() &&
         std::memcmp(&a.bias, &b.bias, sizeof(double)) == 0 &&
         (a.weights.empty() ||
          std::memcmp(a.weights.data(), b.weights.data(), a.weights.size() * sizeof(double)) == 0);
}

struct ClientSpec {
  double benign_fraction = 0.5;
  std::size_t sample_count = 0;

  friend bool operator==(const ClientSpec&, const ClientSpec&) = default;
};

struct PartitionSpec {
  std::vector<ClientSpec> clients;
  std::uint64_t seed = 0;

  void validate() const {
    if (clients.empty()) throw Error(ErrorKind::InvalidArgument, "partition spec has no clients");
    for (std::size_t i = 0; i < clients.size(); ++i) {
      const auto& c = clients[i];
      if (!(c.benign_fraction >= 0.0 && c.benign_fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument,
                    "client " + std::to_string(i) + " benign_fraction outside [0,1]");
      }
      if (c.sample_count == 0) {
        throw Error(ErrorKind::InvalidArgument, "client " + std::to_string(i) + " sample_count is zero");
      }
    }
  }

  std::size_t total_samples() const {
    std::size_t n = 0;
    for (const auto& c : clients) n += c.sample_count;
    return n;
  }

  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;
};

struct ClientShard {
  std::uint32_t client_id = 0;
  EmbeddingMatrix embeddings;
  // Row indices into the training matrix the shard was drawn from.
  std::vector<std::size_t> source_indices;

  friend bool operator==(const ClientShard&, const ClientShard&) = default;
};

/// Layout [[TN, FP], [FN, TP]] with Malicious as the positive class.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, 2>, 2> counts{};

  std::uint64_t tn() const { return counts[0][0]; }
  std::uint64_t fp() const { return counts[0][1]; }
  std::uint64_t fn() const { return counts[1][0]; }
  std::uint64_t tp() const { return counts[1][1]; }
  std::uint64_t total() const { return tn() + fp() + fn() + tp(); }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
  // Names of metrics whose ratio was 0/0 and was reported as 0.0.
  std::vector<std::string> undefined;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct EvaluationReport {
  ConfusionMatrix confusion;
  std::array<ClassMetrics, 2> per_class;  // indexed by label_index
  double accuracy = 0.0;
  std::vector<RocPoint> roc_points;
  double auc = 0.0;

  const ClassMetrics& metrics(Label label) const { return per_class[label_index(label)]; }

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

}  // namespace fedshield
