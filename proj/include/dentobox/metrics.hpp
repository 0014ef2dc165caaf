#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dentobox/errors.hpp"
#include "dentobox/geometry.hpp"
#include "dentobox/labelmap.hpp"
#include "dentobox/obb.hpp"

namespace dentobox {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
};

inline ConfusionCounts confusion(std::span<const std::uint8_t> pred,
                                 std::span<const std::uint8_t> gt) {
  if (pred.size() != gt.size())
    throw invariant_error("confusion: size mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool g = gt[i] != 0;
    if (p && g) ++c.tp;
    else if (p && !g) ++c.fp;
    else if (!p && g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline ConfusionCounts confusion_for_label(const LabelMap& pred,
                                           const LabelMap& gt, int label) {
  if (pred.width() != gt.width() || pred.height() != gt.height())
    throw invariant_error("confusion: map dimensions differ");
  ConfusionCounts c;
  const auto& pv = pred.values();
  const auto& gv = gt.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const bool p = pv[i] == label;
    const bool g = gv[i] == label;
    if (p && g) ++c.tp;
    else if (p && !g) ++c.fp;
    else if (!p && g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

// All four ratios treat an empty problem (tp + fp + fn == 0) as a perfect
// score of 1; otherwise a zero denominator yields 0.
namespace detail {

inline double safe_ratio(std::int64_t num, std::int64_t den,
                         const ConfusionCounts& c) {
  if (c.tp + c.fp + c.fn == 0) return 1.0;
  if (den == 0) return 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

inline double precision(const ConfusionCounts& c) {
  return detail::safe_ratio(c.tp, c.tp + c.fp, c);
}

inline double recall(const ConfusionCounts& c) {
  return detail::safe_ratio(c.tp, c.tp + c.fn, c);
}

inline double dsc(const ConfusionCounts& c) {
  return detail::safe_ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, c);
}

inline double iou(const ConfusionCounts& c) {
  return detail::safe_ratio(c.tp, c.tp + c.fp + c.fn, c);
}

// ---------------------------------------------------------------------------
// Training losses over soft predictions in [0, 1] against binary targets.

struct LossConfig {
  double focal_gamma = 2.0;
  double focal_alpha = 0.25;
  double dice_smooth = 1.0;
};

inline double dice_loss(std::span<const double> pred,
                        std::span<const std::uint8_t> target,
                        const LossConfig& cfg = {}) {
  if (pred.size() != target.size())
    throw invariant_error("dice_loss: size mismatch");
  double inter = 0.0;
  double pred_sum = 0.0;
  double target_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double t = target[i] != 0 ? 1.0 : 0.0;
    inter += pred[i] * t;
    pred_sum += pred[i];
    target_sum += t;
  }
  return 1.0 - (2.0 * inter + cfg.dice_smooth) /
                   (pred_sum + target_sum + cfg.dice_smooth);
}

inline double focal_loss(std::span<const double> pred,
                         std::span<const std::uint8_t> target,
                         const LossConfig& cfg = {}) {
  if (pred.size() != target.size())
    throw invariant_error("focal_loss: size mismatch");
  if (pred.empty()) return 0.0;
  constexpr double kClamp = 1e-7;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], kClamp, 1.0 - kClamp);
    // p_t is the probability assigned to the true class; alpha_t weights
    // positives by alpha and negatives by 1 - alpha.
    const double pt = target[i] != 0 ? p : 1.0 - p;
    const double at = target[i] != 0 ? cfg.focal_alpha : 1.0 - cfg.focal_alpha;
    sum += -at * std::pow(1.0 - pt, cfg.focal_gamma) * std::log(pt);
  }
  return sum / static_cast<double>(pred.size());
}

inline double combined_loss(std::span<const double> pred,
                            std::span<const std::uint8_t> target,
                            const LossConfig& cfg = {}) {
  return dice_loss(pred, target, cfg) + focal_loss(pred, target, cfg);
}

// ---------------------------------------------------------------------------
// IoU of two oriented boxes via exact convex polygon clipping.

inline double rotated_iou(const Obb& a, const Obb& b) {
  const double area_a = a.area();
  const double area_b = b.area();
  if (area_a <= 0.0 || area_b <= 0.0)
    return area_a <= 0.0 && area_b <= 0.0 && a.corners == b.corners ? 1.0 : 0.0;
  const auto inter = clip_convex(
      std::span<const Point>(a.corners.data(), a.corners.size()),
      std::span<const Point>(b.corners.data(), b.corners.size()));
  double inter_area =
      std::min(polygon_area(std::span<const Point>(inter.data(), inter.size())),
               std::min(area_a, area_b));
  const double u = area_a + area_b - inter_area;
  return std::clamp(inter_area / u, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Universal Numbering: labels 1..16 upper jaw, 17..32 lower jaw.

enum class ToothCategory {
  upper_incisors,
  lower_incisors,
  upper_canine,
  lower_canine,
  upper_premolars,
  lower_premolars,
  upper_molars,
  lower_molars,
};

inline constexpr std::array<ToothCategory, 8> kAllCategories{
    ToothCategory::upper_incisors, ToothCategory::lower_incisors,
    ToothCategory::upper_canine,   ToothCategory::lower_canine,
    ToothCategory::upper_premolars, ToothCategory::lower_premolars,
    ToothCategory::upper_molars,   ToothCategory::lower_molars,
};

inline std::string category_name(ToothCategory c) {
  switch (c) {
    case ToothCategory::upper_incisors: return "Upper incisors";
    case ToothCategory::lower_incisors: return "Lower incisors";
    case ToothCategory::upper_canine: return "Upper canine";
    case ToothCategory::lower_canine: return "Lower canine";
    case ToothCategory::upper_premolars: return "Upper premolars";
    case ToothCategory::lower_premolars: return "Lower premolars";
    case ToothCategory::upper_molars: return "Upper molars";
    case ToothCategory::lower_molars: return "Lower molars";
  }
  return "?";
}

inline ToothCategory category_of(int label) {
  if (label < 1 || label > kMaxLabel)
    throw invariant_error("category_of: label " + std::to_string(label) +
                          " outside 1..32");
  const bool upper = label <= 16;
  // Mirror lower-jaw labels onto the upper-jaw pattern: 17..32 -> 16..1.
  const int t = upper ? label : 33 - label;
  if (t <= 3 || t >= 14)
    return upper ? ToothCategory::upper_molars : ToothCategory::lower_molars;
  if (t == 4 || t == 5 || t == 12 || t == 13)
    return upper ? ToothCategory::upper_premolars
                 : ToothCategory::lower_premolars;
  if (t == 6 || t == 11)
    return upper ? ToothCategory::upper_canine : ToothCategory::lower_canine;
  return upper ? ToothCategory::upper_incisors : ToothCategory::lower_incisors;
}

struct MissingTeeth {
  int fp = 0;  // predicted labels absent from ground truth
  int fn = 0;  // ground-truth labels absent from the prediction
};

inline MissingTeeth missing_teeth(const std::set<int>& pred_labels,
                                  const std::set<int>& gt_labels) {
  MissingTeeth m;
  for (int label : pred_labels)
    if (!gt_labels.count(label)) ++m.fp;
  for (int label : gt_labels)
    if (!pred_labels.count(label)) ++m.fn;
  return m;
}

inline std::set<int> present_labels(const LabelMap& map) {
  std::set<int> labels;
  for (std::uint8_t v : map.values())
    if (v != 0) labels.insert(v);
  return labels;
}

// ---------------------------------------------------------------------------
// Per-image evaluation report. Rows carry an image count so reports from
// several images can be merged as weighted means.

struct MetricRow {
  double precision = 0.0;
  double recall = 0.0;
  double dsc = 0.0;
  double iou = 0.0;
  double riou = 0.0;
  int images = 0;
};

struct MetricReport {
  std::map<int, MetricRow> per_label;
  std::map<ToothCategory, MetricRow> per_category;
  MetricRow overall;
  MissingTeeth missing;
  int images = 0;
};

namespace detail {

inline MetricRow mean_of(const std::vector<MetricRow>& rows) {
  MetricRow out;
  if (rows.empty()) return out;
  for (const MetricRow& r : rows) {
    out.precision += r.precision;
    out.recall += r.recall;
    out.dsc += r.dsc;
    out.iou += r.iou;
    out.riou += r.riou;
  }
  const double n = static_cast<double>(rows.size());
  out.precision /= n;
  out.recall /= n;
  out.dsc /= n;
  out.iou /= n;
  out.riou /= n;
  out.images = 1;
  return out;
}

}  // namespace detail

// Evaluate one prediction against its ground truth. Labels are taken from
// the ground truth; a label whose oriented box is missing on either side
// scores zero rotated IoU.
inline MetricReport evaluate(const LabelMap& pred, const LabelMap& gt,
                             const std::map<int, Obb>& pred_obbs,
                             const std::map<int, Obb>& gt_obbs) {
  if (pred.width() != gt.width() || pred.height() != gt.height())
    throw invariant_error("evaluate: map dimensions differ");

  MetricReport report;
  report.images = 1;

  const std::set<int> gt_labels = present_labels(gt);
  const std::set<int> pred_labels = present_labels(pred);
  report.missing = missing_teeth(pred_labels, gt_labels);

  std::vector<MetricRow> all_rows;
  std::map<ToothCategory, std::vector<MetricRow>> cat_rows;
  for (int label : gt_labels) {
    const ConfusionCounts c = confusion_for_label(pred, gt, label);
    MetricRow row;
    row.precision = precision(c);
    row.recall = recall(c);
    row.dsc = dsc(c);
    row.iou = iou(c);
    const auto pi = pred_obbs.find(label);
    const auto gi = gt_obbs.find(label);
    row.riou = (pi != pred_obbs.end() && gi != gt_obbs.end())
                   ? rotated_iou(pi->second, gi->second)
                   : 0.0;
    row.images = 1;
    report.per_label[label] = row;
    cat_rows[category_of(label)].push_back(row);
    all_rows.push_back(row);
  }

  for (const auto& [cat, rows] : cat_rows)
    report.per_category[cat] = detail::mean_of(rows);
  report.overall = detail::mean_of(all_rows);
  report.overall.images = 1;
  return report;
}

// Merge per-image reports into a dataset report: every mean is weighted by
// the number of images that contributed the row; missing-teeth counts sum.
inline MetricReport merge_reports(const std::vector<MetricReport>& reports) {
  MetricReport out;
  if (reports.empty()) return out;

  auto accumulate = [](MetricRow& acc, const MetricRow& r) {
    const double w = static_cast<double>(r.images);
    acc.precision += w * r.precision;
    acc.recall += w * r.recall;
    acc.dsc += w * r.dsc;
    acc.iou += w * r.iou;
    acc.riou += w * r.riou;
    acc.images += r.images;
  };
  auto finish = [](MetricRow& acc) {
    if (acc.images == 0) return;
    const double n = static_cast<double>(acc.images);
    acc.precision /= n;
    acc.recall /= n;
    acc.dsc /= n;
    acc.iou /= n;
    acc.riou /= n;
  };

  for (const MetricReport& r : reports) {
    out.images += r.images;
    out.missing.fp += r.missing.fp;
    out.missing.fn += r.missing.fn;
    for (const auto& [label, row] : r.per_label)
      accumulate(out.per_label[label], row);
    for (const auto& [cat, row] : r.per_category)
      accumulate(out.per_category[cat], row);
    accumulate(out.overall, r.overall);
  }
  for (auto& [label, row] : out.per_label) finish(row);
  for (auto& [cat, row] : out.per_category) finish(row);
  finish(out.overall);
  return out;
}

}  // namespace dentobox
