#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fedshield/error.hpp"
#include "fedshield/text_io.hpp"
#include "fedshield/types.hpp"

namespace fedshield {

// JSON Lines: {"text": "...", "label": "benign" | "malicious"} per line.

inline PromptDataset parse_dataset_jsonl(std::string_view data, std::string provenance) {
  PromptDataset ds;
  ds.provenance = std::move(provenance);
  text::LineReader lines(data);
  std::string_view line;
  while (lines.next(line)) {
    const auto where = ds.provenance + ":" + std::to_string(lines.line_number());
    if (line.empty()) throw Error(ErrorKind::FormatError, where + ": empty line");
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::FormatError, where + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("text") || !obj.contains("label") ||
        !obj["text"].is_string() || !obj["label"].is_string()) {
      throw Error(ErrorKind::FormatError, where + ": expected string fields 'text' and 'label'");
    }
    const auto label = parse_label(obj["label"].get_ref<const std::string&>());
    if (!label) {
      throw Error(ErrorKind::FormatError,
                  where + ": label must be \"benign\" or \"malicious\"");
    }
    ds.items.push_back({obj["text"].get<std::string>(), *label});
  }
  return ds;
}

inline PromptDataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset_jsonl(text::read_file(path), path.string());
}

inline std::string format_dataset_jsonl(const PromptDataset& ds) {
  std::string out;
  for (const auto& item : ds.items) {
    nlohmann::json obj = {{"text", item.text}, {"label", std::string(to_string(item.label))}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

inline void save_dataset(const std::filesystem::path& path, const PromptDataset& ds) {
  text::write_file(path, format_dataset_jsonl(ds));
}

}  // namespace fedshield
