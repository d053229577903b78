#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedshield/error.hpp"
#include "fedshield/text_io.hpp"
#include "fedshield/types.hpp"

namespace fedshield {

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t max_iters = 1000;
  double grad_tol = 1e-6;
  double l2_lambda = 0.0;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw Error(ErrorKind::InvalidArgument, "learning_rate must be positive");
    }
    if (max_iters == 0) throw Error(ErrorKind::InvalidArgument, "max_iters must be positive");
    if (!(grad_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "grad_tol must be positive");
    if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) {
      throw Error(ErrorKind::InvalidArgument, "l2_lambda must be nonnegative");
    }
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline constexpr double kProbClip = 1e-12;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace detail {
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void require_same_dim(std::size_t got, std::size_t want, std::string_view what) {
  if (got != want) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " has dim " + std::to_string(got) +
                                                  ", model has dim " + std::to_string(want));
  }
}
}  // namespace detail

/// P(Malicious | x) = sigmoid(w.x + b).
inline double predict_proba(const ModelParams& params, std::span<const double> x) {
  detail::require_same_dim(x.size(), params.dim(), "input");
  return sigmoid(detail::dot(params.weights, x) + params.bias);
}

/// Malicious iff the probability reaches the threshold (ties flag).
inline Label classify(const ModelParams& params, std::span<const double> x, double threshold = 0.5) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "threshold must lie in (0,1)");
  }
  return predict_proba(params, x) >= threshold ? Label::Malicious : Label::Benign;
}

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;

  double norm() const {
    double s = grad_b * grad_b;
    for (double g : grad_w) s += g * g;
    return std::sqrt(s);
  }
};

/// Mean negative log-likelihood plus (lambda/2)|w|^2 and its gradient.
inline LossGradient loss_and_gradient(const ModelParams& params, const EmbeddingMatrix& X,
                                      const TrainConfig& cfg) {
  if (X.empty()) throw Error(ErrorKind::EmptyDataset, "no samples to evaluate the loss on");
  detail::require_same_dim(X.dim(), params.dim(), "embedding matrix");

  const std::size_t n = X.size();
  const std::size_t d = X.dim();
  LossGradient out;
  out.grad_w.assign(d, 0.0);
  double loss_sum = 0.0;
  double gb_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = X.row(i);
    const double y = X.label(i) == Label::Malicious ? 1.0 : 0.0;
    const double p = sigmoid(detail::dot(params.weights, x) + params.bias);
    const double pc = std::clamp(p, kProbClip, 1.0 - kProbClip);
    loss_sum += -y * std::log(pc) - (1.0 - y) * std::log(1.0 - pc);
    const double r = p - y;
    gb_sum += r;
    for (std::size_t j = 0; j < d; ++j) out.grad_w[j] += r * x[j];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double w_sq = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    out.grad_w[j] = out.grad_w[j] * inv_n + cfg.l2_lambda * params.weights[j];
    w_sq += params.weights[j] * params.weights[j];
  }
  out.grad_b = gb_sum * inv_n;
  out.loss = loss_sum * inv_n + 0.5 * cfg.l2_lambda * w_sq;
  return out;
}

struct TrainResult {
  ModelParams params;
  std::size_t iterations = 0;
  double loss = 0.0;  // at the returned params
  bool converged = false;
};

/// Full-batch gradient descent with a fixed step. The convergence test runs
/// before every step, so an already-converged init is returned untouched.
/// The output carries init's round number.
inline TrainResult fit(const EmbeddingMatrix& X, const TrainConfig& cfg, const ModelParams& init) {
  cfg.validate();
  if (X.empty()) throw Error(ErrorKind::EmptyDataset, "training set is empty");
  detail::require_same_dim(X.dim(), init.dim(), "training matrix");
  if (!X.has_both_classes()) {
    throw Error(ErrorKind::SingleClassData, "training data contains only " +
                                                std::string(to_string(X.label(0))) + " samples");
  }

  TrainResult res;
  res.params = init;
  auto& w = res.params.weights;
  for (;;) {
    const LossGradient lg = loss_and_gradient(res.params, X, cfg);
    res.loss = lg.loss;
    if (lg.norm() < cfg.grad_tol) {
      res.converged = true;
      break;
    }
    if (res.iterations == cfg.max_iters) break;
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= cfg.learning_rate * lg.grad_w[j];
    res.params.bias -= cfg.learning_rate * lg.grad_b;
    ++res.iterations;
  }
  return res;
}

inline ModelParams train(const EmbeddingMatrix& X, const TrainConfig& cfg,
                         const std::optional<ModelParams>& init = std::nullopt) {
  return fit(X, cfg, init ? *init : ModelParams::zeros(X.dim())).params;
}

// ---------------------------------------------------------------------------
// Checkpoint format:
//   #model v1 dim=<D> round=<R>
//   <bias>
//   <w1> <w2> ... <wD>

inline std::string format_model(const ModelParams& m) {
  std::string out = "#model v1 dim=" + std::to_string(m.dim()) + " round=" + std::to_string(m.round) + "\n";
  text::append_double(out, m.bias);
  out += '\n';
  for (std::size_t j = 0; j < m.weights.size(); ++j) {
    if (j) out += ' ';
    text::append_double(out, m.weights[j]);
  }
  out += '\n';
  return out;
}

inline ModelParams parse_model(std::string_view data, const std::string& source = "<memory>") {
  text::LineReader lines(data);
  std::string_view header, bias_line, weights_line;
  if (!lines.next(header) || header.substr(0, 10) != "#model v1 ") {
    throw Error(ErrorKind::FormatError, source + ":1: missing '#model v1' header");
  }
  const auto dim_tok = text::header_field(header, "dim");
  const auto round_tok = text::header_field(header, "round");
  const auto dim = dim_tok ? text::parse_int<std::size_t>(*dim_tok) : std::nullopt;
  const auto round = round_tok ? text::parse_int<std::uint64_t>(*round_tok) : std::nullopt;
  if (!dim || !round) throw Error(ErrorKind::FormatError, source + ":1: header needs dim= and round=");
  if (!lines.next(bias_line)) throw Error(ErrorKind::FormatError, source + ": missing bias line");
  if (!lines.next(weights_line)) weights_line = {};

  ModelParams m;
  m.round = *round;
  const auto bias = text::parse_double(bias_line);
  if (!bias) throw Error(ErrorKind::FormatError, source + ":2: bad bias");
  m.bias = *bias;
  std::size_t pos = 0;
  while (!weights_line.empty() && pos <= weights_line.size()) {
    std::size_t end = weights_line.find(' ', pos);
    if (end == std::string_view::npos) end = weights_line.size();
    const auto v = text::parse_double(weights_line.substr(pos, end - pos));
    if (!v) throw Error(ErrorKind::FormatError, source + ":3: bad weight");
    m.weights.push_back(*v);
    pos = end + 1;
  }
  if (m.weights.size() != *dim) {
    throw Error(ErrorKind::DimensionMismatch, source + ": " + std::to_string(m.weights.size()) +
                                                  " weights, header says dim=" + std::to_string(*dim));
  }
  if (!m.is_finite()) throw Error(ErrorKind::NonFiniteValue, source + ": non-finite parameter");
  return m;
}

inline void save_model(const std::filesystem::path& path, const ModelParams& m) {
  text::write_file(path, format_model(m));
}

inline ModelParams load_model(const std::filesystem::path& path) {
  return parse_model(text::read_file(path), path.string());
}

}  // namespace fedshield
