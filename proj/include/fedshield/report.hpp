#pragma once

// Centralized-vs-federated comparison document: report.json, CSV series and
// two static SVG charts.

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedshield/error.hpp"
#include "fedshield/serialize.hpp"
#include "fedshield/text_io.hpp"
#include "fedshield/types.hpp"

namespace fedshield {

struct ReportDocument {
  nlohmann::json summary;
  // File name -> contents, written verbatim into the report directory.
  std::map<std::string, std::string> files;
};

namespace detail {

inline std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::string roc_csv(const EvaluationReport& r) {
  std::string out = "fpr,tpr\n";
  for (const auto& p : r.roc_points) out += text::format_double(p.fpr) + "," + text::format_double(p.tpr) + "\n";
  return out;
}

inline std::string confusion_csv(const ConfusionMatrix& c) {
  return "truth\\predicted,benign,malicious\n"
         "benign," + std::to_string(c.tn()) + "," + std::to_string(c.fp()) + "\n"
         "malicious," + std::to_string(c.fn()) + "," + std::to_string(c.tp()) + "\n";
}

inline std::string metrics_csv(const EvaluationReport& central, const EvaluationReport& federated) {
  std::string out = "model,class,precision,recall,f1,support\n";
  for (const auto& [name, rep] : {std::pair{"centralized", &central}, std::pair{"federated", &federated}}) {
    for (Label label : kLabels) {
      const auto& m = rep->metrics(label);
      out += std::string(name) + "," + std::string(to_string(label)) + "," + text::format_double(m.precision) + "," +
             text::format_double(m.recall) + "," + text::format_double(m.f1) + "," + std::to_string(m.support) + "\n";
    }
  }
  return out;
}

inline constexpr const char* kCentralColor = "#1f77b4";
inline constexpr const char* kFederatedColor = "#ff7f0e";

inline std::string roc_svg(const EvaluationReport& central, const EvaluationReport& federated) {
  const double x0 = 60, y0 = 340, size = 300;
  std::string s =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"420\" height=\"400\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n"
      "<rect x=\"60\" y=\"40\" width=\"300\" height=\"300\" fill=\"none\" stroke=\"#333\"/>\n"
      "<line x1=\"60\" y1=\"340\" x2=\"360\" y2=\"40\" stroke=\"#aaa\" stroke-dasharray=\"4 4\"/>\n"
      "<text x=\"210\" y=\"375\" text-anchor=\"middle\">False positive rate</text>\n"
      "<text x=\"20\" y=\"190\" text-anchor=\"middle\" transform=\"rotate(-90 20 190)\">True positive rate</text>\n"
      "<text x=\"210\" y=\"25\" text-anchor=\"middle\">ROC curve</text>\n";
  auto line = [&](const EvaluationReport& r, const char* color, const char* name, double legend_y) {
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < r.roc_points.size(); ++i) {
      if (i) s += ' ';
      s += fixed(x0 + r.roc_points[i].fpr * size, 2) + "," + fixed(y0 - r.roc_points[i].tpr * size, 2);
    }
    s += "\"/>\n";
    s += "<text x=\"200\" y=\"" + fixed(legend_y, 0) + "\" fill=\"" + color + "\">" + name + " (AUC = " +
         fixed(r.auc, 3) + ")</text>\n";
  };
  line(central, kCentralColor, "Centralized", 300);
  line(federated, kFederatedColor, "Federated", 320);
  s += "</svg>\n";
  return s;
}

inline std::string metrics_svg(const EvaluationReport& central, const EvaluationReport& federated) {
  const double base = 300, height = 240, bar = 18;
  std::string s =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" height=\"360\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n"
      "<text x=\"280\" y=\"25\" text-anchor=\"middle\">Per-class metrics</text>\n"
      "<line x1=\"40\" y1=\"300\" x2=\"540\" y2=\"300\" stroke=\"#333\"/>\n";
  double x = 50;
  for (Label label : kLabels) {
    const char* names[] = {"precision", "recall", "f1"};
    const double group_start = x;
    for (int k = 0; k < 3; ++k) {
      for (const auto& [rep, color] : {std::pair{&central, kCentralColor}, std::pair{&federated, kFederatedColor}}) {
        const auto& m = rep->metrics(label);
        const double v = k == 0 ? m.precision : (k == 1 ? m.recall : m.f1);
        s += "<rect x=\"" + fixed(x, 1) + "\" y=\"" + fixed(base - v * height, 2) + "\" width=\"" + fixed(bar, 1) +
             "\" height=\"" + fixed(v * height, 2) + "\" fill=\"" + color + "\"/>\n";
        x += bar;
      }
      s += "<text x=\"" + fixed(x - bar, 1) + "\" y=\"318\" text-anchor=\"middle\">" + names[k] + "</text>\n";
      x += 14;
    }
    s += "<text x=\"" + fixed((group_start + x) / 2, 1) + "\" y=\"340\" text-anchor=\"middle\">" +
         std::string(to_string(label)) + "</text>\n";
    x += 30;
  }
  s += "<text x=\"420\" y=\"50\" fill=\"" + std::string(kCentralColor) + "\">Centralized</text>\n";
  s += "<text x=\"420\" y=\"66\" fill=\"" + std::string(kFederatedColor) + "\">Federated</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace detail

/// Side-by-side comparison of two evaluations over the same test set.
/// Deltas are federated minus centralized.
inline ReportDocument comparative_report(const EvaluationReport& central, const EvaluationReport& federated) {
  for (Label label : kLabels) {
    if (central.metrics(label).support != federated.metrics(label).support) {
      throw Error(ErrorKind::TestSetMismatch, "class supports differ for " + std::string(to_string(label)));
    }
  }

  nlohmann::json tables = nlohmann::json::array();
  nlohmann::json flags = nlohmann::json::array();
  for (Label label : kLabels) {
    const auto& c = central.metrics(label);
    const auto& f = federated.metrics(label);
    tables.push_back({{"class", to_string(label)},
                      {"support", c.support},
                      {"centralized", {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}}},
                      {"federated", {{"precision", f.precision}, {"recall", f.recall}, {"f1", f.f1}}},
                      {"delta",
                       {{"precision", f.precision - c.precision},
                        {"recall", f.recall - c.recall},
                        {"f1", f.f1 - c.f1}}}});
    for (const auto& [model, m] : {std::pair{"centralized", &c}, std::pair{"federated", &f}}) {
      for (const auto& name : m->undefined) {
        flags.push_back(std::string(model) + "." + std::string(to_string(label)) + "." + name + " is 0/0");
      }
    }
  }

  ReportDocument doc;
  doc.summary = {
      {"test_set_size", central.confusion.total()},
      {"classification_report", tables},
      {"accuracy",
       {{"centralized", central.accuracy},
        {"federated", federated.accuracy},
        {"delta", federated.accuracy - central.accuracy}}},
      {"auc", {{"centralized", central.auc}, {"federated", federated.auc}, {"delta", federated.auc - central.auc}}},
      {"confusion", {{"centralized", central.confusion}, {"federated", federated.confusion}}},
      {"flags", flags},
      {"models", {{"centralized", central}, {"federated", federated}}},
  };
  doc.files["report.json"] = doc.summary.dump(2) + "\n";
  doc.files["roc_central.csv"] = detail::roc_csv(central);
  doc.files["roc_federated.csv"] = detail::roc_csv(federated);
  doc.files["confusion_central.csv"] = detail::confusion_csv(central.confusion);
  doc.files["confusion_federated.csv"] = detail::confusion_csv(federated.confusion);
  doc.files["metrics.csv"] = detail::metrics_csv(central, federated);
  doc.files["roc.svg"] = detail::roc_svg(central, federated);
  doc.files["metrics.svg"] = detail::metrics_svg(central, federated);
  return doc;
}

inline void write_report(const std::filesystem::path& dir, const ReportDocument& doc) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, contents] : doc.files) text::write_file(dir / name, contents);
}

}  // namespace fedshield
