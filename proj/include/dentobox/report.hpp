#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dentobox/labelmap.hpp"
#include "dentobox/metrics.hpp"
#include "dentobox/postprocess.hpp"

namespace dentobox {
namespace detail {

// Ratio -> percentage with exactly 2 decimals ("82.82").
inline std::string pct2(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", ratio * 100.0);
  return buf;
}

inline double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

}  // namespace detail

// label,precision,recall,dsc,iou,riou — one row per ground-truth label,
// percentages with 2 decimals.
inline std::string render_per_label_csv(const MetricReport& report) {
  std::string out = "label,precision,recall,dsc,iou,riou\n";
  for (const auto& [label, row] : report.per_label) {
    out += std::to_string(label);
    out += ',' + detail::pct2(row.precision);
    out += ',' + detail::pct2(row.recall);
    out += ',' + detail::pct2(row.dsc);
    out += ',' + detail::pct2(row.iou);
    out += ',' + detail::pct2(row.riou);
    out += '\n';
  }
  return out;
}

// Radar layout: one row per metric, one column per tooth label 1..32;
// labels absent from the report leave their cell empty.
inline std::string render_radar_csv(const MetricReport& report) {
  std::string out = "metric";
  for (int label = 1; label <= kMaxLabel; ++label)
    out += ',' + std::to_string(label);
  out += '\n';

  const std::array<std::pair<const char*, double MetricRow::*>, 5> rows{{
      {"precision", &MetricRow::precision},
      {"recall", &MetricRow::recall},
      {"dsc", &MetricRow::dsc},
      {"iou", &MetricRow::iou},
      {"riou", &MetricRow::riou},
  }};
  for (const auto& [name, member] : rows) {
    out += name;
    for (int label = 1; label <= kMaxLabel; ++label) {
      out += ',';
      const auto it = report.per_label.find(label);
      if (it != report.per_label.end()) out += detail::pct2(it->second.*member);
    }
    out += '\n';
  }
  return out;
}

namespace detail {

inline nlohmann::ordered_json row_json(const MetricRow& row) {
  nlohmann::ordered_json j;
  j["precision"] = round4(row.precision * 100.0);
  j["recall"] = round4(row.recall * 100.0);
  j["dsc"] = round4(row.dsc * 100.0);
  j["iou"] = round4(row.iou * 100.0);
  j["riou"] = round4(row.riou * 100.0);
  return j;
}

}  // namespace detail

// Summary document: overall means, the 8 category rows, and missing-tooth
// totals. Percentage values carry 4 decimals; the CSVs hold the 2-decimal
// presentation.
inline nlohmann::ordered_json render_summary_json(const MetricReport& report) {
  nlohmann::ordered_json doc;
  doc["images"] = report.images;
  doc["overall"] = detail::row_json(report.overall);
  doc["categories"] = nlohmann::ordered_json::object();
  for (ToothCategory cat : kAllCategories) {
    const auto it = report.per_category.find(cat);
    doc["categories"][category_name(cat)] =
        it != report.per_category.end()
            ? detail::row_json(it->second)
            : nlohmann::ordered_json(nullptr);
  }
  doc["missing_teeth"] = {{"fp", report.missing.fp},
                          {"fn", report.missing.fn}};
  return doc;
}

inline nlohmann::ordered_json instances_to_json(
    const std::vector<Instance>& instances) {
  auto arr = nlohmann::ordered_json::array();
  for (const Instance& inst : instances) {
    nlohmann::ordered_json j;
    j["label"] = inst.label;
    j["area"] = inst.area();
    const auto [cx, cy] = inst.centroid();
    j["centroid"] = {detail::round4(cx), detail::round4(cy)};
    int xmin = inst.pixels.front().x, xmax = xmin;
    int ymin = inst.pixels.front().y, ymax = ymin;
    for (const PointI& p : inst.pixels) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    j["bbox"] = {xmin, ymin, xmax, ymax};
    arr.push_back(std::move(j));
  }
  return arr;
}

// Change log for one post-processed image.
inline nlohmann::ordered_json changes_to_json(
    const std::string& image_name, const std::vector<ChangeRecord>& changes) {
  nlohmann::ordered_json doc;
  doc["image"] = image_name;
  doc["changes"] = nlohmann::ordered_json::array();
  for (const ChangeRecord& c : changes) {
    nlohmann::ordered_json j;
    j["label"] = c.label;
    j["area"] = c.area;
    j["case"] = dissolve_case_name(c.dissolve_case);
    j["new_label"] = c.new_label;
    doc["changes"].push_back(std::move(j));
  }
  return doc;
}

}  // namespace dentobox
