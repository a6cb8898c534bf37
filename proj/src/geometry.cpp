#include "contactnet/geometry.hpp"

#include <algorithm>
#include <limits>

#include "contactnet/errors.hpp"

namespace contactnet {

ConvexPolygon convex_hull(std::span<const Point2> points) {
  if (points.empty()) throw InvalidInput("convex_hull: empty point set");
  for (const auto& p : points) {
    if (!is_finite(p)) throw InvalidInput("convex_hull: non-finite point");
  }

  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return ConvexPolygon{pts};

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], *it - hull[k - 2]) <= 0.0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return ConvexPolygon{std::move(hull)};
}

double polygon_area(const ConvexPolygon& p) {
  const auto& v = p.vertices;
  if (v.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    twice += cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * std::abs(twice);
}

Point2 polygon_centroid(const ConvexPolygon& p) {
  const auto& v = p.vertices;
  if (v.empty()) throw InvalidInput("polygon_centroid: empty polygon");
  if (v.size() == 1) return v[0];
  if (v.size() == 2) return (v[0] + v[1]) * 0.5;

  // Shift to the first vertex to limit cancellation.
  const Point2 o = v[0];
  double twice_area = 0.0;
  Point2 acc{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 a = v[i] - o;
    const Point2 b = v[(i + 1) % v.size()] - o;
    const double c = cross(a, b);
    twice_area += c;
    acc += (a + b) * c;
  }
  if (std::abs(twice_area) < std::numeric_limits<double>::min() * 1e6) {
    Point2 mean{};
    for (const auto& q : v) mean += q;
    return mean * (1.0 / static_cast<double>(v.size()));
  }
  return o + acc * (1.0 / (3.0 * twice_area));
}

double point_segment_distance(Point2 q, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(q - a);
  const double t = std::clamp(dot(q - a, ab) / len2, 0.0, 1.0);
  return norm(q - (a + ab * t));
}

bool contains(const ConvexPolygon& p, Point2 q) {
  const auto& v = p.vertices;
  if (v.empty()) return false;
  if (v.size() == 1) return norm(q - v[0]) <= kGeomTol;
  if (v.size() == 2) return point_segment_distance(q, v[0], v[1]) <= kGeomTol;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 a = v[i];
    const Point2 b = v[(i + 1) % v.size()];
    const Point2 e = b - a;
    // Signed distance to the supporting line of edge (a, b).
    if (cross(e, q - a) / norm(e) < -kGeomTol) return false;
  }
  return true;
}

double distance_outside(Point2 q, const ConvexPolygon& p) {
  const auto& v = p.vertices;
  if (v.empty()) throw InvalidInput("distance_outside: empty polygon");
  if (v.size() == 1) return norm(q - v[0]);
  if (v.size() == 2) return point_segment_distance(q, v[0], v[1]);
  if (contains(p, q)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    best = std::min(best, point_segment_distance(q, v[i], v[(i + 1) % v.size()]));
  }
  return best;
}

}  // namespace contactnet
