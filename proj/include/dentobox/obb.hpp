#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dentobox/errors.hpp"
#include "dentobox/geometry.hpp"
#include "dentobox/labelmap.hpp"

namespace dentobox {

struct PcaResult {
  double pca_angle_deg = 0.0;  // major-axis direction, in (-90, 90]
  double eigen_major = 0.0;
  double eigen_minor = 0.0;
  Point pivot{0.0, 0.0};  // centroid of the analyzed pixels
};

// Binary mask of a single tooth: 1 inside the instance, 0 elsewhere.
inline LabelMap isolate_tooth(const LabelMap& map, const Instance& instance) {
  LabelMap out(map.width(), map.height());
  for (const PointI& p : instance.pixels)
    out.at(p.x, p.y) = 1;
  return out;
}

// Principal axis of a pixel cloud from the 2x2 covariance matrix
// (population normalization, 1/N). Isotropic clouds fall back to a
// horizontal axis so downstream rotation becomes the identity.
inline PcaResult pca(std::span<const PointI> pixels) {
  if (pixels.empty()) throw degenerate_mask_error("pca: no pixels");
  double mx = 0.0;
  double my = 0.0;
  for (const PointI& p : pixels) {
    mx += p.x;
    my += p.y;
  }
  const double n = static_cast<double>(pixels.size());
  mx /= n;
  my /= n;

  double cxx = 0.0;
  double cyy = 0.0;
  double cxy = 0.0;
  for (const PointI& p : pixels) {
    const double dx = p.x - mx;
    const double dy = p.y - my;
    cxx += dx * dx;
    cyy += dy * dy;
    cxy += dx * dy;
  }
  cxx /= n;
  cyy /= n;
  cxy /= n;

  const double half_trace = 0.5 * (cxx + cyy);
  const double det = cxx * cyy - cxy * cxy;
  const double disc = std::sqrt(std::max(0.0, half_trace * half_trace - det));
  PcaResult result;
  result.eigen_major = half_trace + disc;
  result.eigen_minor = half_trace - disc;
  result.pivot = {mx, my};

  if (result.eigen_major - result.eigen_minor <= 1e-9 * std::max(1.0, result.eigen_major)) {
    // No preferred direction (circle, square, single pixel).
    result.pca_angle_deg = 90.0;
  } else if (cxy == 0.0) {
    result.pca_angle_deg = cxx >= cyy ? 0.0 : 90.0;
  } else {
    result.pca_angle_deg = rad_to_deg(0.5 * std::atan2(2.0 * cxy, cxx - cyy));
  }
  return result;
}

// Rotation that maps the major axis onto the vertical:
//   theta = 90 - pca          if pca >= 0
//   theta = 180 + (90 - pca)  if pca < 0
// so theta lies in [0, 90] for non-negative pca angles and (270, 360) for
// negative ones.
inline double rotation_theta(double pca_angle_deg) {
  if (!(pca_angle_deg > -90.0 && pca_angle_deg <= 90.0))
    throw invariant_error("rotation_theta: pca angle outside (-90, 90]");
  if (pca_angle_deg < 0.0) return 180.0 + (90.0 - pca_angle_deg);
  return 90.0 - pca_angle_deg;
}

struct Obb {
  int label = 0;
  std::array<Point, 4> corners{};  // cyclic order
  double theta_deg = 0.0;
  Point pivot{0.0, 0.0};
  double pca_angle_deg = 0.0;

  double area() const {
    return polygon_area(std::span<const Point>(corners.data(), corners.size()));
  }
};

// Oriented bounding box of one instance: rotate the pixel centers by theta
// about the centroid, take the axis-aligned box, rotate its corners back.
inline Obb generate_obb(const Instance& instance) {
  if (instance.pixels.empty())
    throw degenerate_mask_error("generate_obb: empty instance");

  const PcaResult p = pca(std::span<const PointI>(instance.pixels));
  const double theta = rotation_theta(p.pca_angle_deg);

  std::vector<Point> rotated;
  rotated.reserve(instance.pixels.size());
  for (const PointI& px : instance.pixels)
    rotated.push_back(rotate_point({static_cast<double>(px.x),
                                    static_cast<double>(px.y)},
                                   theta, p.pivot));
  const Hbb box = hbb(rotated);

  Obb obb;
  obb.label = instance.label;
  obb.theta_deg = theta;
  obb.pivot = p.pivot;
  obb.pca_angle_deg = p.pca_angle_deg;
  const auto corners = box.corners();
  for (std::size_t i = 0; i < 4; ++i)
    obb.corners[i] = rotate_point(corners[i], -theta, p.pivot);
  return obb;
}

namespace detail {

inline double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

}  // namespace detail

// JSON schema:
// {
//   "image": "<name>",
//   "teeth": [
//     {"label": 3, "pca_angle_deg": ..., "theta_deg": ...,
//      "pivot": [x, y], "corners": [[x, y], [x, y], [x, y], [x, y]]},
//     ...
//   ]
// }
// Corners keep 2 decimals, angles and pivot 4; teeth sorted by label.
inline nlohmann::ordered_json export_obbs(const std::map<int, Obb>& obbs,
                                          const std::string& image_name) {
  nlohmann::ordered_json doc;
  doc["image"] = image_name;
  doc["teeth"] = nlohmann::ordered_json::array();
  for (const auto& [label, obb] : obbs) {
    nlohmann::ordered_json t;
    t["label"] = label;
    t["pca_angle_deg"] = detail::round_to(obb.pca_angle_deg, 4);
    t["theta_deg"] = detail::round_to(obb.theta_deg, 4);
    t["pivot"] = {detail::round_to(obb.pivot.x, 4),
                  detail::round_to(obb.pivot.y, 4)};
    auto corners = nlohmann::ordered_json::array();
    for (const Point& c : obb.corners)
      corners.push_back({detail::round_to(c.x, 2), detail::round_to(c.y, 2)});
    t["corners"] = corners;
    doc["teeth"].push_back(std::move(t));
  }
  return doc;
}

inline std::map<int, Obb> import_obbs(const nlohmann::json& doc) {
  if (!doc.contains("teeth") || !doc["teeth"].is_array())
    throw io_error("obb import: missing \"teeth\" array");
  std::map<int, Obb> out;
  for (const auto& t : doc["teeth"]) {
    if (!t.contains("label") || !t.contains("corners"))
      throw io_error("obb import: tooth entry needs \"label\" and \"corners\"");
    Obb obb;
    obb.label = t["label"].get<int>();
    const auto& corners = t["corners"];
    if (!corners.is_array() || corners.size() != 4)
      throw io_error("obb import: \"corners\" must hold 4 points");
    for (std::size_t i = 0; i < 4; ++i) {
      obb.corners[i] = {corners[i].at(0).get<double>(),
                        corners[i].at(1).get<double>()};
    }
    obb.theta_deg = t.value("theta_deg", 0.0);
    obb.pca_angle_deg = t.value("pca_angle_deg", 0.0);
    if (t.contains("pivot") && t["pivot"].is_array() && t["pivot"].size() == 2)
      obb.pivot = {t["pivot"][0].get<double>(), t["pivot"][1].get<double>()};
    if (out.count(obb.label))
      throw io_error("obb import: duplicate label " + std::to_string(obb.label));
    out[obb.label] = obb;
  }
  return out;
}

}  // namespace dentobox
