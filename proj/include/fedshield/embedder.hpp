#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fedshield/error.hpp"
#include "fedshield/text_io.hpp"
#include "fedshield/types.hpp"
#include "fedshield/utf8.hpp"

namespace fedshield {

/// Signed feature hashing over character n-grams.
struct EmbedderConfig {
  std::size_t dim = 384;
  std::size_t ngram_min = 3;
  std::size_t ngram_max = 5;
  bool lowercase = true;

  void validate() const {
    if (dim < 2) throw Error(ErrorKind::InvalidArgument, "embedding dim must be at least 2");
    if (ngram_min == 0) throw Error(ErrorKind::InvalidArgument, "ngram_min must be positive");
    if (ngram_max < ngram_min) throw Error(ErrorKind::InvalidArgument, "ngram_max < ngram_min");
  }
};

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = kFnvOffsetBasis;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

/// N-grams are taken over code points and hashed over their UTF-8 bytes.
/// Each n-gram adds +1 to bucket (h >> 1) mod dim when the low hash bit is 0,
/// -1 otherwise; the result is L2-normalized. Text with fewer than ngram_min
/// code points maps to the zero vector.
inline std::vector<double> embed_text(const EmbedderConfig& cfg, std::string_view raw) {
  cfg.validate();
  std::vector<double> v(cfg.dim, 0.0);
  const std::string folded = cfg.lowercase ? utf8::ascii_lower(raw) : std::string(raw);
  const std::string_view s = folded;
  const auto offsets = utf8::codepoint_offsets(s);
  const std::size_t n_cp = offsets.size() - 1;

  for (std::size_t n = cfg.ngram_min; n <= cfg.ngram_max && n <= n_cp; ++n) {
    for (std::size_t start = 0; start + n <= n_cp; ++start) {
      const std::size_t b = offsets[start];
      const std::size_t e = offsets[start + n];
      const std::uint64_t h = fnv1a64(s.substr(b, e - b));
      const std::size_t bucket = static_cast<std::size_t>((h >> 1) % cfg.dim);
      v[bucket] += (h & 1U) == 0 ? 1.0 : -1.0;
    }
  }

  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq > 0.0) {
    const double norm = std::sqrt(sq);
    for (double& x : v) x /= norm;
  }
  return v;
}

inline EmbeddingMatrix embed_dataset(const EmbedderConfig& cfg, const PromptDataset& ds) {
  cfg.validate();
  if (auto violations = validate_dataset(ds); !violations.empty()) {
    throw Error(ErrorKind::InvalidDataset,
                std::to_string(violations.size()) + " violation(s), first: " + violations.front().describe());
  }
  EmbeddingMatrix out(cfg.dim);
  out.reserve(ds.size());
  for (const auto& item : ds.items) out.push_back(embed_text(cfg, item.text), item.label);
  return out;
}

// ---------------------------------------------------------------------------
// Embedding file format
//
//   #emb v1 dim=<D> count=<N>
//   <label>\t<v1> <v2> ... <vD>        (N lines)
//
// Further lines starting with '#' are comments (provenance notes).

inline EmbeddingMatrix parse_embeddings(std::string_view data, const std::string& source = "<memory>") {
  text::LineReader lines(data);
  std::string_view line;
  if (!lines.next(line) || line.substr(0, 8) != "#emb v1 ") {
    throw Error(ErrorKind::FormatError, source + ":1: missing '#emb v1' header");
  }
  const auto dim_tok = text::header_field(line, "dim");
  const auto count_tok = text::header_field(line, "count");
  const auto dim = dim_tok ? text::parse_int<std::size_t>(*dim_tok) : std::nullopt;
  const auto count = count_tok ? text::parse_int<std::size_t>(*count_tok) : std::nullopt;
  if (!dim || !count || *dim == 0) {
    throw Error(ErrorKind::FormatError, source + ":1: header needs positive dim=<D> and count=<N>");
  }

  EmbeddingMatrix out(*dim);
  out.reserve(*count);
  std::vector<double> row;
  row.reserve(*dim);
  while (lines.next(line)) {
    const std::string where = source + ":" + std::to_string(lines.line_number());
    if (!line.empty() && line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw Error(ErrorKind::FormatError, where + ": missing tab after label");
    const auto label = parse_label(line.substr(0, tab));
    if (!label) throw Error(ErrorKind::FormatError, where + ": unknown label");
    if (out.size() == *count) {
      throw Error(ErrorKind::FormatError, where + ": more rows than count=" + std::to_string(*count));
    }

    row.clear();
    std::string_view rest = line.substr(tab + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      std::size_t end = rest.find(' ', pos);
      if (end == std::string_view::npos) end = rest.size();
      const auto tok = rest.substr(pos, end - pos);
      const auto value = text::parse_double(tok);
      if (!value) throw Error(ErrorKind::FormatError, where + ": bad number '" + std::string(tok) + "'");
      if (!std::isfinite(*value)) throw Error(ErrorKind::NonFiniteValue, where + ": non-finite value");
      row.push_back(*value);
      pos = end + 1;
    }
    if (row.size() != *dim) {
      throw Error(ErrorKind::DimensionMismatch, where + ": row has " + std::to_string(row.size()) +
                                                    " values, header says dim=" + std::to_string(*dim));
    }
    out.push_back(row, *label);
  }
  if (out.size() != *count) {
    throw Error(ErrorKind::FormatError, source + ": header says count=" + std::to_string(*count) + " but " +
                                            std::to_string(out.size()) + " rows present");
  }
  return out;
}

inline EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(text::read_file(path), path.string());
}

inline std::string format_embeddings(const EmbeddingMatrix& m, std::string_view comment = {}) {
  std::string out = "#emb v1 dim=" + std::to_string(m.dim()) + " count=" + std::to_string(m.size()) + "\n";
  if (!comment.empty()) {
    out += "# ";
    out += comment;
    out += '\n';
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += to_string(m.label(i));
    out += '\t';
    const auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out += ' ';
      text::append_double(out, r[j]);
    }
    out += '\n';
  }
  return out;
}

inline void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m,
                            std::string_view comment = {}) {
  text::write_file(path, format_embeddings(m, comment));
}

}  // namespace fedshield
