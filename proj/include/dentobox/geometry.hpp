#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "dentobox/errors.hpp"

namespace dentobox {

inline constexpr double kPi = 3.14159265358979323846;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Rotate a point by theta (degrees) around an arbitrary pivot. Coordinates are
// image coordinates: x grows rightward, y grows downward, origin at top-left.
inline Point rotate_point(Point p, double theta_deg, Point pivot) {
  const double t = deg_to_rad(theta_deg);
  const double c = std::cos(t);
  const double s = std::sin(t);
  return {c * p.x - s * p.y + pivot.x * (1.0 - c) + pivot.y * s,
          s * p.x + c * p.y + pivot.y * (1.0 - c) - pivot.x * s};
}

inline std::vector<Point> rotate_points(std::span<const Point> points,
                                        double theta_deg, Point pivot) {
  std::vector<Point> out;
  out.reserve(points.size());
  for (const Point& p : points) out.push_back(rotate_point(p, theta_deg, pivot));
  return out;
}

// Axis-aligned (horizontal) bounding box.
struct Hbb {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }

  // Corners in cyclic order starting from (xmin, ymin).
  std::array<Point, 4> corners() const {
    return {Point{xmin, ymin}, Point{xmax, ymin}, Point{xmax, ymax},
            Point{xmin, ymax}};
  }
};

inline Hbb hbb(std::span<const Point> points) {
  if (points.empty()) throw invariant_error("hbb: no points");
  Hbb box{points[0].x, points[0].y, points[0].x, points[0].y};
  for (const Point& p : points) {
    box.xmin = std::min(box.xmin, p.x);
    box.ymin = std::min(box.ymin, p.y);
    box.xmax = std::max(box.xmax, p.x);
    box.ymax = std::max(box.ymax, p.y);
  }
  return box;
}

inline double polygon_signed_area(std::span<const Point> poly) {
  if (poly.size() < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * acc;
}

inline double polygon_area(std::span<const Point> poly) {
  return std::abs(polygon_signed_area(poly));
}

// True when p lies inside or on a convex polygon (either winding).
// tol is a distance tolerance in coordinate units.
inline bool point_in_convex_polygon(Point p, std::span<const Point> poly,
                                    double tol = 1e-6) {
  if (poly.size() < 3) return false;
  const double orient = polygon_signed_area(poly) >= 0.0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    const double ex = b.x - a.x;
    const double ey = b.y - a.y;
    const double len = std::hypot(ex, ey);
    if (len == 0.0) continue;
    const double cross = ex * (p.y - a.y) - ey * (p.x - a.x);
    if (orient * cross / len < -tol) return false;
  }
  return true;
}

namespace detail {

inline Point line_intersect(Point p1, Point p2, Point a, Point b) {
  const double dxs = p2.x - p1.x;
  const double dys = p2.y - p1.y;
  const double dxc = b.x - a.x;
  const double dyc = b.y - a.y;
  const double denom = dxs * dyc - dys * dxc;
  if (denom == 0.0) return p2;  // parallel; callers only hit this on degenerate input
  const double t = ((a.x - p1.x) * dyc - (a.y - p1.y) * dxc) / denom;
  return {p1.x + t * dxs, p1.y + t * dys};
}

}  // namespace detail

// Sutherland-Hodgman clipping of a polygon against a convex clip polygon.
// Points on a clip edge count as inside, so clipping a polygon by itself
// returns it unchanged.
inline std::vector<Point> clip_convex(std::span<const Point> subject,
                                      std::span<const Point> clip) {
  if (subject.size() < 3 || clip.size() < 3) return {};
  const double orient = polygon_signed_area(clip) >= 0.0 ? 1.0 : -1.0;
  std::vector<Point> output(subject.begin(), subject.end());
  for (std::size_t i = 0; i < clip.size(); ++i) {
    const Point a = clip[i];
    const Point b = clip[(i + 1) % clip.size()];
    std::vector<Point> input;
    input.swap(output);
    if (input.empty()) break;
    auto side = [&](const Point& p) {
      return orient * ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x));
    };
    for (std::size_t j = 0; j < input.size(); ++j) {
      const Point cur = input[j];
      const Point prev = input[(j + input.size() - 1) % input.size()];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0.0) {
        if (sp < 0.0) output.push_back(detail::line_intersect(prev, cur, a, b));
        output.push_back(cur);
      } else if (sp >= 0.0) {
        output.push_back(detail::line_intersect(prev, cur, a, b));
      }
    }
  }
  return output;
}

}  // namespace dentobox
