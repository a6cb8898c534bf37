#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace contactnet {

/// Planar point / vector in meters.
struct Point2 {
  double x{0.0};
  double y{0.0};

  constexpr Point2 operator+(Point2 o) const { return {x + o.x, y + o.y}; }
  constexpr Point2 operator-(Point2 o) const { return {x - o.x, y - o.y}; }
  constexpr Point2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Point2& operator+=(Point2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Point2&) const = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline bool is_finite(Point2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

/// Convex polygon with counter-clockwise vertices. Two vertices describe a
/// segment, one vertex a point.
struct ConvexPolygon {
  std::vector<Point2> vertices;

  std::size_t size() const { return vertices.size(); }
  bool empty() const { return vertices.empty(); }
};

inline constexpr double kGeomTol = 1e-9;

/// Monotone-chain hull. Collinear and duplicate points are dropped, so the
/// result may be degenerate. Throws InvalidInput on empty or non-finite input.
ConvexPolygon convex_hull(std::span<const Point2> points);

/// Shoelace area; zero for segments and points.
double polygon_area(const ConvexPolygon& p);

/// Area-weighted centroid (segment -> midpoint, point -> itself).
Point2 polygon_centroid(const ConvexPolygon& p);

double point_segment_distance(Point2 q, Point2 a, Point2 b);

/// Half-plane containment test with tolerance kGeomTol.
bool contains(const ConvexPolygon& p, Point2 q);

/// 0 when q lies inside or on p, else Euclidean distance to the boundary.
double distance_outside(Point2 q, const ConvexPolygon& p);

}  // namespace contactnet
