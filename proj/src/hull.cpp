#include "idoe/hull.hpp"

#include <algorithm>
#include <cmath>

#include "idoe/error.hpp"

namespace idoe {

namespace {

double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

}  // namespace

ConvexPolygon convex_hull(std::span<const Point2> points) {
  if (points.size() < 3) throw Error(ErrorKind::Degenerate, "convex hull needs at least three points");
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw Error(ErrorKind::Degenerate, "convex hull needs three distinct points");

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw Error(ErrorKind::Degenerate, "all points are collinear");
  return ConvexPolygon{std::move(hull)};
}

bool ConvexPolygon::contains(Point2 p, double tolerance) const {
  if (vertices.size() < 3) return false;
  double min_x = vertices[0].x, max_x = min_x, min_y = vertices[0].y, max_y = min_y;
  for (const auto& v : vertices) {
    min_x = std::min(min_x, v.x);
    max_x = std::max(max_x, v.x);
    min_y = std::min(min_y, v.y);
    max_y = std::max(max_y, v.y);
  }
  const double scale = std::max(max_x - min_x, max_y - min_y);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Point2 a = vertices[i];
    const Point2 b = vertices[(i + 1) % vertices.size()];
    const double edge = std::hypot(b.x - a.x, b.y - a.y);
    // Signed distance of p to the left of edge a->b.
    if (cross(a, b, p) / edge < -tolerance * scale) return false;
  }
  return true;
}

double ConvexPolygon::area() const {
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Point2 a = vertices[i];
    const Point2 b = vertices[(i + 1) % vertices.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

}  // namespace idoe
