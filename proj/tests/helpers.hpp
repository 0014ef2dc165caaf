#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <dentobox/dentobox.hpp>

namespace testutil {

using dentobox::LabelMap;
using dentobox::Obb;
using dentobox::Point;

// Build a label map from rows of characters: '.' or '0' = background,
// '1'..'9' = labels 1..9, 'a'..'w' = labels 10..32. Rows must be equally long.
inline LabelMap map_from(const std::vector<std::string>& rows) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.front().size());
  LabelMap m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const char c = rows[y][x];
      if (c == '.' || c == '0') continue;
      int v = 0;
      if (c >= '1' && c <= '9')
        v = c - '0';
      else if (c >= 'a' && c <= 'w')
        v = c - 'a' + 10;
      else
        throw std::invalid_argument(std::string("map_from: bad cell '") + c + "'");
      m.at(x, y) = static_cast<std::uint8_t>(v);
    }
  return m;
}

// Axis-aligned box as an Obb for clipping tests.
inline Obb box(double xmin, double ymin, double xmax, double ymax,
               int label = 1) {
  Obb b;
  b.label = label;
  b.corners = {Point{xmin, ymin}, Point{xmax, ymin}, Point{xmax, ymax},
               Point{xmin, ymax}};
  return b;
}

// Rectangle centered at (cx, cy) with half-sizes (hx, hy), rotated by
// `angle_deg` in the same pivot-rotation sense as the library.
inline Obb rotated_box(double cx, double cy, double hx, double hy,
                       double angle_deg, int label = 1) {
  Obb b;
  b.label = label;
  const std::array<Point, 4> local{Point{-hx, -hy}, Point{hx, -hy},
                                   Point{hx, hy}, Point{-hx, hy}};
  for (std::size_t i = 0; i < 4; ++i) {
    const Point shifted{cx + local[i].x, cy + local[i].y};
    b.corners[i] = dentobox::rotate_point(shifted, angle_deg, {cx, cy});
  }
  b.pivot = {cx, cy};
  return b;
}

// Brute-force IoU on an n-by-n grid spanning the joint bounding box of both
// polygons. Cell centers are classified by point-in-polygon tests; this is
// the independent cross-check for the exact clipping path.
inline double raster_iou(const Obb& a, const Obb& b, int n = 4096) {
  double xmin = a.corners[0].x, xmax = xmin;
  double ymin = a.corners[0].y, ymax = ymin;
  for (const Point& p : a.corners) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  for (const Point& p : b.corners) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double dx = (xmax - xmin) / n;
  const double dy = (ymax - ymin) / n;
  if (dx <= 0.0 || dy <= 0.0) return 0.0;

  // Per-polygon bounding boxes let most cells skip the edge tests.
  struct Poly {
    std::array<Point, 4> c;
    double xmin, xmax, ymin, ymax;
    // Edge line equations: inside when sign matches the polygon orientation.
    std::array<double, 4> ex, ey, ec;
    double orient;

    explicit Poly(const Obb& o) : c(o.corners) {
      xmin = xmax = c[0].x;
      ymin = ymax = c[0].y;
      for (const Point& p : c) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
      }
      orient = dentobox::polygon_signed_area(
                   std::span<const Point>(c.data(), c.size())) >= 0
                   ? 1.0
                   : -1.0;
      for (int i = 0; i < 4; ++i) {
        const Point& p = c[i];
        const Point& q = c[(i + 1) % 4];
        ex[i] = q.y - p.y;
        ey[i] = -(q.x - p.x);
        ec[i] = -(ex[i] * p.x + ey[i] * p.y);
      }
    }

    bool contains(double x, double y) const {
      if (x < xmin || x > xmax || y < ymin || y > ymax) return false;
      // The (dy, -dx) edge normal points away from the interior when the
      // shoelace sign is positive, so inside lies on the non-positive side.
      for (int i = 0; i < 4; ++i)
        if (orient * (ex[i] * x + ey[i] * y + ec[i]) > 0.0) return false;
      return true;
    }
  };
  const Poly pa(a), pb(b);

  long long inter = 0, uni = 0;
  for (int iy = 0; iy < n; ++iy) {
    const double y = ymin + (iy + 0.5) * dy;
    for (int ix = 0; ix < n; ++ix) {
      const double x = xmin + (ix + 0.5) * dx;
      const bool in_a = pa.contains(x, y);
      const bool in_b = pb.contains(x, y);
      if (in_a && in_b) ++inter;
      if (in_a || in_b) ++uni;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Paint a rotated rectangle into a label map: a pixel belongs to the mask
// when its center falls inside the rectangle.
inline void draw_rotated_rect(LabelMap& map, double cx, double cy, double hx,
                              double hy, double angle_deg, int label) {
  const Obb rect = rotated_box(cx, cy, hx, hy, angle_deg, label);
  const std::span<const Point> poly(rect.corners.data(), rect.corners.size());
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      if (dentobox::point_in_convex_polygon({static_cast<double>(x),
                                             static_cast<double>(y)},
                                            poly, 1e-9))
        map.at(x, y) = static_cast<std::uint8_t>(label);
}

// Independent principal-axis estimate: scan candidate directions and pick
// the one that maximizes the projected variance of the pixel centers.
inline double scan_pca_angle(const std::vector<dentobox::PointI>& pixels,
                             double step_deg = 0.01) {
  double mx = 0.0, my = 0.0;
  for (const auto& p : pixels) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(pixels.size());
  my /= static_cast<double>(pixels.size());

  double best_angle = 0.0;
  double best_var = -1.0;
  for (double deg = -90.0 + step_deg; deg <= 90.0; deg += step_deg) {
    const double c = std::cos(deg * dentobox::kPi / 180.0);
    const double s = std::sin(deg * dentobox::kPi / 180.0);
    double var = 0.0;
    for (const auto& p : pixels) {
      const double proj = (p.x - mx) * c + (p.y - my) * s;
      var += proj * proj;
    }
    if (var > best_var) {
      best_var = var;
      best_angle = deg;
    }
  }
  return best_angle;
}

// Fold an angle difference into [0, 90] — the distance between two
// undirected axes.
inline double axis_distance_deg(double a, double b) {
  double d = std::fmod(std::abs(a - b), 180.0);
  return std::min(d, 180.0 - d);
}

}  // namespace testutil
