#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace oracle {

namespace {
double cross3(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Ray casting (even-odd); boundary points count as inside via distance check.
bool inside_polygon(const std::vector<Point2>& v, Point2 q) {
  const std::size_t n = v.size();
  bool in = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((v[i].y > q.y) != (v[j].y > q.y)) {
      const double xint = v[j].x + (q.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (q.x < xint) in = !in;
    }
  }
  return in;
}
}  // namespace

std::vector<Point2> brute_force_hull(const std::vector<Point2>& pts) {
  std::vector<Point2> out;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || (pts[i].x == pts[j].x && pts[i].y == pts[j].y)) continue;
      bool edge = true;
      for (std::size_t k = 0; k < n && edge; ++k) {
        const double c = cross3(pts[i], pts[j], pts[k]);
        if (c < -1e-12) {
          edge = false;
        } else if (std::abs(c) <= 1e-12) {
          // Collinear points must lie on the closed segment i-j.
          const double dx = pts[j].x - pts[i].x, dy = pts[j].y - pts[i].y;
          const double t = ((pts[k].x - pts[i].x) * dx + (pts[k].y - pts[i].y) * dy) / (dx * dx + dy * dy);
          if (t < -1e-12 || t > 1 + 1e-12) edge = false;
        }
      }
      if (edge) {
        for (const Point2& p : {pts[i], pts[j]}) {
          if (std::none_of(out.begin(), out.end(), [&](Point2 o) { return o.x == p.x && o.y == p.y; })) {
            out.push_back(p);
          }
        }
      }
    }
  }
  return out;
}

double monte_carlo_area(const ConvexPolygon& p, int samples, std::uint64_t seed) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& v : p.vertices) {
    x0 = std::min(x0, v.x);
    x1 = std::max(x1, v.x);
    y0 = std::min(y0, v.y);
    y1 = std::max(y1, v.y);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  long hits = 0;
  for (int s = 0; s < samples; ++s) {
    if (inside_polygon(p.vertices, {ux(rng), uy(rng)})) ++hits;
  }
  return (x1 - x0) * (y1 - y0) * static_cast<double>(hits) / samples;
}

Point2 fan_centroid(const ConvexPolygon& p) {
  Point2 c{0, 0};
  for (const auto& v : p.vertices) c = c + v;
  c = c * (1.0 / static_cast<double>(p.vertices.size()));
  double area = 0.0;
  Point2 acc{0, 0};
  const std::size_t n = p.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = p.vertices[i], b = p.vertices[(i + 1) % n];
    const double t = 0.5 * std::abs(cross3(c, a, b));
    area += t;
    acc = acc + (c + a + b) * (t / 3.0);
  }
  return acc * (1.0 / area);
}

double sampled_boundary_distance(Point2 q, const ConvexPolygon& p, double step) {
  const auto& v = p.vertices;
  if (v.size() >= 3 && inside_polygon(v, q)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = v.size();
  const std::size_t edges = n == 1 ? 1 : (n == 2 ? 1 : n);
  for (std::size_t i = 0; i < edges; ++i) {
    const Point2 a = v[i], b = v[(i + 1) % n];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int k = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int s = 0; s <= k; ++s) {
      const double t = static_cast<double>(s) / k;
      const Point2 pt{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
      best = std::min(best, std::hypot(q.x - pt.x, q.y - pt.y));
    }
  }
  return best;
}

ConvexPolygon random_convex_polygon(std::mt19937_64& rng, int n_points) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    std::vector<Point2> pts(n_points);
    for (auto& p : pts) p = {u(rng), u(rng)};
    ConvexPolygon h = contactnet::convex_hull(pts);
    if (h.size() >= 3 && contactnet::polygon_area(h) > 0.05) return h;
  }
}

double enumerate_active_sets(const BoxQp& qp, Eigen::VectorXd* x_out) {
  const auto n = qp.q.size();
  const auto m = qp.l.size();
  long combos = 1;
  for (Eigen::Index i = 0; i < m; ++i) combos *= 3;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> state(m);
  for (long c = 0; c < combos; ++c) {
    long r = c;
    std::vector<Eigen::Index> rows;
    std::vector<double> rhs;
    bool skip = false;
    for (Eigen::Index i = 0; i < m; ++i) {
      state[i] = static_cast<int>(r % 3);
      r /= 3;
      if (state[i] == 1) {
        if (!std::isfinite(qp.l[i])) skip = true;
        rows.push_back(i);
        rhs.push_back(qp.l[i]);
      } else if (state[i] == 2) {
        if (!std::isfinite(qp.u[i])) skip = true;
        rows.push_back(i);
        rhs.push_back(qp.u[i]);
      }
    }
    if (skip) continue;
    const auto k = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd b(n + k);
    K.topLeftCorner(n, n) = qp.P;
    b.head(n) = -qp.q;
    for (Eigen::Index j = 0; j < k; ++j) {
      K.block(n + j, 0, 1, n) = qp.A.row(rows[j]);
      K.block(0, n + j, n, 1) = qp.A.row(rows[j]).transpose();
      b[n + j] = rhs[j];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (lu.rank() < n + k) continue;
    const Eigen::VectorXd sol = lu.solve(b);
    const Eigen::VectorXd x = sol.head(n);
    const Eigen::VectorXd ax = qp.A * x;
    bool feasible = true;
    for (Eigen::Index i = 0; i < m && feasible; ++i) {
      feasible = ax[i] >= qp.l[i] - 1e-9 && ax[i] <= qp.u[i] + 1e-9;
    }
    if (!feasible) continue;
    const double f = 0.5 * x.dot(qp.P * x) + qp.q.dot(x);
    if (f < best) {
      best = f;
      if (x_out) *x_out = x;
    }
  }
  return best;
}

bool primal_active_set(const Eigen::MatrixXd& P, const Eigen::VectorXd& q, const Eigen::MatrixXd& A,
                       const Eigen::VectorXd& l, const Eigen::VectorXd& u, Eigen::VectorXd& x,
                       int max_iter) {
  // Rewrite as G x <= h.
  const auto n = q.size();
  std::vector<Eigen::VectorXd> g;
  std::vector<double> h;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (std::isfinite(u[i])) {
      g.push_back(A.row(i).transpose());
      h.push_back(u[i]);
    }
    if (std::isfinite(l[i])) {
      g.push_back(-A.row(i).transpose());
      h.push_back(-l[i]);
    }
  }
  const auto mc = g.size();
  for (std::size_t i = 0; i < mc; ++i) {
    if (g[i].dot(x) > h[i] + 1e-9) return false;  // start must be feasible
  }
  std::vector<std::size_t> work;
  for (int it = 0; it < max_iter; ++it) {
    const auto k = static_cast<Eigen::Index>(work.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
    K.topLeftCorner(n, n) = P;
    rhs.head(n) = -(P * x + q);
    for (Eigen::Index j = 0; j < k; ++j) {
      K.block(0, n + j, n, 1) = g[work[j]];
      K.block(n + j, 0, 1, n) = g[work[j]].transpose();
    }
    const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
    const Eigen::VectorXd p = sol.head(n);
    if (p.lpNorm<Eigen::Infinity>() < 1e-11 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
      // Multipliers of G x <= h must be >= 0 (K uses +G' lambda).
      Eigen::Index worst = -1;
      double most_neg = -1e-10;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (sol[n + j] < most_neg) {
          most_neg = sol[n + j];
          worst = j;
        }
      }
      if (worst < 0) return true;
      work.erase(work.begin() + worst);
      continue;
    }
    double alpha = 1.0;
    std::size_t blocking = mc;
    for (std::size_t i = 0; i < mc; ++i) {
      if (std::find(work.begin(), work.end(), i) != work.end()) continue;
      const double gp = g[i].dot(p);
      if (gp > 1e-14) {
        const double step = (h[i] - g[i].dot(x)) / gp;
        if (step < alpha) {
          alpha = std::max(step, 0.0);
          blocking = i;
        }
      }
    }
    x += alpha * p;
    if (blocking < mc) work.push_back(blocking);
  }
  return false;
}

bool in_stone(const contactnet::Stone& s, Point2 q) {
  if (const auto* r = std::get_if<contactnet::RectangleStone>(&s)) {
    return std::abs(q.x - r->center.x) <= r->width / 2 && std::abs(q.y - r->center.y) <= r->height / 2;
  }
  if (const auto* c = std::get_if<contactnet::CircleStone>(&s)) {
    return std::hypot(q.x - c->center.x, q.y - c->center.y) <= c->radius;
  }
  const auto& poly = std::get<contactnet::PolygonStone>(s);
  return inside_polygon(poly.vertices, q);
}

Raster::Raster(const contactnet::TerrainMap& map, Point2 lo, Point2 hi, double res)
    : lo_(lo), res_(res) {
  nx_ = static_cast<int>(std::ceil((hi.x - lo.x) / res));
  ny_ = static_cast<int>(std::ceil((hi.y - lo.y) / res));
  cells_.assign(static_cast<std::size_t>(nx_) * ny_, 0);
  for (int iy = 0; iy < ny_; ++iy) {
    for (int ix = 0; ix < nx_; ++ix) {
      const Point2 c{lo.x + (ix + 0.5) * res, lo.y + (iy + 0.5) * res};
      bool occ = false;
      for (const auto& st : map.stones()) occ = occ || in_stone(st, c);
      if (!occ && map.block_grid()) {
        const auto& g = *map.block_grid();
        const int col = static_cast<int>(std::floor((c.x - g.origin.x) / g.block_size));
        const int row = static_cast<int>(std::floor((c.y - g.origin.y) / g.block_size));
        occ = col >= 0 && col < g.columns && row >= 0 && row < g.rows &&
              !g.removed.count(row * g.columns + col);
      }
      cells_[static_cast<std::size_t>(iy) * nx_ + ix] = occ ? 1 : 0;
    }
  }
}

bool Raster::occupied(Point2 q) const {
  const int ix = static_cast<int>(std::floor((q.x - lo_.x) / res_));
  const int iy = static_cast<int>(std::floor((q.y - lo_.y) / res_));
  if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return false;
  return cells_[static_cast<std::size_t>(iy) * nx_ + ix] != 0;
}

bool Raster::safe(Point2 q, double margin) const {
  const int r = static_cast<int>(std::ceil(margin / res_)) + 1;
  const int cx = static_cast<int>(std::floor((q.x - lo_.x) / res_));
  const int cy = static_cast<int>(std::floor((q.y - lo_.y) / res_));
  for (int iy = cy - r; iy <= cy + r; ++iy) {
    for (int ix = cx - r; ix <= cx + r; ++ix) {
      const Point2 c{lo_.x + (ix + 0.5) * res_, lo_.y + (iy + 0.5) * res_};
      if (std::hypot(c.x - q.x, c.y - q.y) > margin) continue;
      if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return false;
      if (!cells_[static_cast<std::size_t>(iy) * nx_ + ix]) return false;
    }
  }
  return true;
}

}  // namespace oracle
