#pragma once

#include <span>
#include <vector>

namespace idoe {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Convex polygon, vertices counterclockwise, no collinear vertices.
struct ConvexPolygon {
  std::vector<Point2> vertices;

  /// Inclusive point-in-polygon test; `tolerance` is relative to the
  /// polygon's extent.
  bool contains(Point2 p, double tolerance = 1e-9) const;
  double area() const;
};

/// Monotone-chain hull. Throws Degenerate for fewer than three points or
/// collinear input.
ConvexPolygon convex_hull(std::span<const Point2> points);

}  // namespace idoe
