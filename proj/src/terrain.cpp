#include "contactnet/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "contactnet/errors.hpp"
#include "stepping_stones_layout.hpp"

namespace contactnet {

using nlohmann::json;

bool BlockGrid::present(int col, int row) const {
  if (col < 0 || row < 0 || col >= columns || row >= rows) return false;
  return !removed.contains(row * columns + col);
}

TerrainMap::TerrainMap(std::vector<Stone> stones, std::optional<BlockGrid> grid)
    : stones_(std::move(stones)), grid_(std::move(grid)) {
  if (grid_) {
    if (!(grid_->block_size > 0.0)) throw InvalidInput("block grid: block_size must be > 0");
    if (grid_->columns < 0 || grid_->rows < 0) throw InvalidInput("block grid: negative size");
    for (int idx : grid_->removed) {
      if (idx < 0 || idx >= grid_->total()) {
        throw InvalidInput("block grid: removed index " + std::to_string(idx) + " out of range");
      }
    }
  }
  for (const auto& s : stones_) {
    if (const auto* r = std::get_if<RectangleStone>(&s)) {
      if (!(r->width > 0.0 && r->height > 0.0)) throw InvalidInput("rectangle: non-positive size");
    } else if (const auto* c = std::get_if<CircleStone>(&s)) {
      if (!(c->radius > 0.0)) throw InvalidInput("circle: non-positive radius");
    } else if (std::get<PolygonStone>(s).vertices.size() < 3) {
      throw InvalidInput("polygon: fewer than 3 vertices");
    }
  }
}

TerrainMap TerrainMap::flat() {
  return TerrainMap({RectangleStone{{0.0, 0.0}, 1e6, 1e6}}, std::nullopt);
}

TerrainMap TerrainMap::with_stone(Stone s) const {
  auto stones = stones_;
  stones.push_back(std::move(s));
  return TerrainMap(std::move(stones), grid_);
}

namespace {

bool polygon_contains_even_odd(const std::vector<Point2>& v, Point2 q) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    // On-edge points count as inside.
    if (point_segment_distance(q, v[j], v[i]) <= kGeomTol) return true;
    if ((v[i].y > q.y) != (v[j].y > q.y)) {
      const double xc = v[j].x + (q.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (q.x < xc) inside = !inside;
    }
  }
  return inside;
}

double polygon_edge_distance(const std::vector<Point2>& v, Point2 q) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    best = std::min(best, point_segment_distance(q, v[j], v[i]));
  }
  return best;
}

bool stone_contains_point(const Stone& s, Point2 q) {
  return std::visit(
      [&](const auto& st) -> bool {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, RectangleStone>) {
          return std::abs(q.x - st.center.x) <= 0.5 * st.width + kGeomTol &&
                 std::abs(q.y - st.center.y) <= 0.5 * st.height + kGeomTol;
        } else if constexpr (std::is_same_v<T, CircleStone>) {
          return norm(q - st.center) <= st.radius + kGeomTol;
        } else {
          return polygon_contains_even_odd(st.vertices, q);
        }
      },
      s);
}

bool stone_contains_disk(const Stone& s, Point2 q, double r) {
  return std::visit(
      [&](const auto& st) -> bool {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, RectangleStone>) {
          return std::abs(q.x - st.center.x) + r <= 0.5 * st.width + kGeomTol &&
                 std::abs(q.y - st.center.y) + r <= 0.5 * st.height + kGeomTol;
        } else if constexpr (std::is_same_v<T, CircleStone>) {
          return norm(q - st.center) + r <= st.radius + kGeomTol;
        } else {
          return polygon_contains_even_odd(st.vertices, q) &&
                 polygon_edge_distance(st.vertices, q) + kGeomTol >= r;
        }
      },
      s);
}

// Whether the disk can touch the stone at all (bounding-circle test).
bool stone_near_disk(const Stone& s, Point2 q, double r) {
  return std::visit(
      [&](const auto& st) -> bool {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, RectangleStone>) {
          return std::abs(q.x - st.center.x) <= 0.5 * st.width + r &&
                 std::abs(q.y - st.center.y) <= 0.5 * st.height + r;
        } else if constexpr (std::is_same_v<T, CircleStone>) {
          return norm(q - st.center) <= st.radius + r;
        } else {
          return polygon_contains_even_odd(st.vertices, q) ||
                 polygon_edge_distance(st.vertices, q) <= r;
        }
      },
      s);
}

bool grid_contains_point(const BlockGrid& g, Point2 q) {
  // Closed cells: a point on a shared edge is covered by either neighbour.
  const double fx = (q.x - g.origin.x) / g.block_size;
  const double fy = (q.y - g.origin.y) / g.block_size;
  const int c0 = static_cast<int>(std::floor(fx));
  const int r0 = static_cast<int>(std::floor(fy));
  for (int dc = -1; dc <= 0; ++dc) {
    for (int dr = -1; dr <= 0; ++dr) {
      const int c = c0 + dc + 1;
      const int r = r0 + dr + 1;
      if (!g.present(c, r)) continue;
      const double x0 = g.origin.x + c * g.block_size;
      const double y0 = g.origin.y + r * g.block_size;
      if (q.x >= x0 - kGeomTol && q.x <= x0 + g.block_size + kGeomTol && q.y >= y0 - kGeomTol &&
          q.y <= y0 + g.block_size + kGeomTol) {
        return true;
      }
    }
  }
  return false;
}

// Every cell whose interior meets the open disk must be present.
bool grid_contains_disk(const BlockGrid& g, Point2 q, double r) {
  if (r == 0.0) return grid_contains_point(g, q);
  const int c_lo = static_cast<int>(std::floor((q.x - r - g.origin.x) / g.block_size));
  const int c_hi = static_cast<int>(std::floor((q.x + r - g.origin.x) / g.block_size));
  const int r_lo = static_cast<int>(std::floor((q.y - r - g.origin.y) / g.block_size));
  const int r_hi = static_cast<int>(std::floor((q.y + r - g.origin.y) / g.block_size));
  for (int c = c_lo; c <= c_hi; ++c) {
    for (int rw = r_lo; rw <= r_hi; ++rw) {
      const double x0 = g.origin.x + c * g.block_size;
      const double y0 = g.origin.y + rw * g.block_size;
      const double dx = std::max({x0 - q.x, 0.0, q.x - (x0 + g.block_size)});
      const double dy = std::max({y0 - q.y, 0.0, q.y - (y0 + g.block_size)});
      if (std::hypot(dx, dy) < r && !g.present(c, rw)) return false;
    }
  }
  return true;
}

}  // namespace

bool in_union(const TerrainMap& map, Point2 q) {
  for (const auto& s : map.stones()) {
    if (stone_contains_point(s, q)) return true;
  }
  return map.block_grid() && grid_contains_point(*map.block_grid(), q);
}

bool is_safe(const TerrainMap& map, Point2 q, double margin) {
  if (!(margin >= 0.0)) throw InvalidInput("is_safe: margin must be >= 0");
  if (!is_finite(q)) return false;
  if (margin == 0.0) return in_union(map, q);

  bool stone_nearby = false;
  for (const auto& s : map.stones()) {
    if (stone_contains_disk(s, q, margin)) return true;
    stone_nearby = stone_nearby || stone_near_disk(s, q, margin);
  }
  const auto& grid = map.block_grid();
  if (grid && grid_contains_disk(*grid, q, margin)) return true;
  if (!stone_nearby) return false;
  if (!in_union(map, q)) return false;

  // The disk straddles several shapes: check a polar lattice of sample
  // points no more than 0.5 mm apart.
  constexpr double kStep = 5e-4;
  const int rings = std::max(1, static_cast<int>(std::ceil(margin / kStep)));
  for (int i = 1; i <= rings; ++i) {
    const double rad = margin * i / rings;
    const int n = std::max(8, static_cast<int>(std::ceil(2.0 * std::numbers::pi * rad / kStep)));
    for (int k = 0; k < n; ++k) {
      const double a = 2.0 * std::numbers::pi * k / n;
      if (!in_union(map, q + Point2{rad * std::cos(a), rad * std::sin(a)})) return false;
    }
  }
  return true;
}

TerrainMap gen_block_field(double length, double width, double block_size, int n_removed,
                           std::uint64_t seed) {
  if (!(block_size > 0.0) || !(length > 0.0) || !(width > 0.0)) {
    throw InvalidInput("gen_block_field: dimensions must be positive");
  }
  BlockGrid g;
  g.block_size = block_size;
  g.columns = static_cast<int>(std::lround(length / block_size));
  g.rows = static_cast<int>(std::lround(width / block_size));
  g.origin = {0.0, -0.5 * g.rows * block_size};
  if (n_removed < 0 || n_removed > g.total()) {
    throw InvalidInput("gen_block_field: cannot remove " + std::to_string(n_removed) + " of " +
                       std::to_string(g.total()) + " blocks");
  }
  std::vector<int> cells(static_cast<std::size_t>(g.total()));
  std::iota(cells.begin(), cells.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(cells.begin(), cells.end(), rng);
  g.removed.insert(cells.begin(), cells.begin() + n_removed);
  return TerrainMap({}, std::move(g));
}

PolygonStone make_star(Point2 center, double outer_radius, double inner_radius, double rotation) {
  PolygonStone star;
  for (int i = 0; i < 10; ++i) {
    const double r = (i % 2 == 0) ? outer_radius : inner_radius;
    const double a = rotation + std::numbers::pi / 2.0 + i * std::numbers::pi / 5.0;
    star.vertices.push_back(center + Point2{r * std::cos(a), r * std::sin(a)});
  }
  return star;
}

std::string stepping_stones_layout_json() { return std::string(kSteppingStonesLayout); }

TerrainMap stepping_stones_scenario() { return terrain_from_json(stepping_stones_layout_json()); }

// ---------------------------------------------------------------------------
// JSON persistence

namespace {

json point_json(Point2 p) { return json::array({p.x, p.y}); }

json stone_json(const Stone& s) {
  return std::visit(
      [](const auto& st) -> json {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, RectangleStone>) {
          return {{"type", "rectangle"},
                  {"center", point_json(st.center)},
                  {"width", st.width},
                  {"height", st.height}};
        } else if constexpr (std::is_same_v<T, CircleStone>) {
          return {{"type", "circle"}, {"center", point_json(st.center)}, {"radius", st.radius}};
        } else {
          json verts = json::array();
          for (const auto& v : st.vertices) verts.push_back(point_json(v));
          return {{"type", "polygon"}, {"vertices", verts}};
        }
      },
      s);
}

[[noreturn]] void field_error(const std::string& where, const std::string& msg) {
  throw ParseError("terrain: field '" + where + "': " + msg);
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) field_error(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) field_error(where + "." + key, "missing");
  return *it;
}

double read_number(const json& obj, const std::string& key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) field_error(where + "." + key, "expected a number");
  return v.get<double>();
}

Point2 read_point(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    field_error(where, "expected [x, y]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

Stone read_stone(const json& s, const std::string& where) {
  const json& type = require(s, "type", where);
  if (!type.is_string()) field_error(where + ".type", "expected a string");
  const auto t = type.get<std::string>();
  if (t == "rectangle") {
    return RectangleStone{read_point(require(s, "center", where), where + ".center"),
                          read_number(s, "width", where), read_number(s, "height", where)};
  }
  if (t == "circle") {
    return CircleStone{read_point(require(s, "center", where), where + ".center"),
                       read_number(s, "radius", where)};
  }
  if (t == "polygon") {
    const json& verts = require(s, "vertices", where);
    if (!verts.is_array()) field_error(where + ".vertices", "expected an array");
    PolygonStone p;
    for (std::size_t i = 0; i < verts.size(); ++i) {
      p.vertices.push_back(read_point(verts[i], where + ".vertices[" + std::to_string(i) + "]"));
    }
    return p;
  }
  if (t == "star") {
    return make_star(read_point(require(s, "center", where), where + ".center"),
                     read_number(s, "outer_radius", where), read_number(s, "inner_radius", where),
                     s.contains("rotation") ? read_number(s, "rotation", where) : 0.0);
  }
  field_error(where + ".type", "unknown stone type '" + t + "'");
}

}  // namespace

std::string terrain_to_json(const TerrainMap& map, int indent) {
  json doc;
  doc["format"] = 1;
  doc["stones"] = json::array();
  for (const auto& s : map.stones()) doc["stones"].push_back(stone_json(s));
  if (const auto& g = map.block_grid()) {
    doc["block_grid"] = {{"origin", point_json(g->origin)},
                         {"block_size", g->block_size},
                         {"columns", g->columns},
                         {"rows", g->rows},
                         {"removed", std::vector<int>(g->removed.begin(), g->removed.end())}};
  }
  return doc.dump(indent);
}

TerrainMap terrain_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number for the diagnostic.
    const auto upto = text.substr(0, std::min<std::size_t>(e.byte, text.size()));
    const auto line = 1 + std::count(upto.begin(), upto.end(), '\n');
    throw ParseError("terrain: line " + std::to_string(line) + ": " + e.what());
  }
  const json& fmt = require(doc, "format", "$");
  if (!fmt.is_number_integer() || fmt.get<int>() != 1) {
    field_error("$.format", "unsupported format version (expected 1)");
  }
  std::vector<Stone> stones;
  if (doc.contains("stones")) {
    const json& arr = doc["stones"];
    if (!arr.is_array()) field_error("$.stones", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      stones.push_back(read_stone(arr[i], "$.stones[" + std::to_string(i) + "]"));
    }
  }
  std::optional<BlockGrid> grid;
  if (doc.contains("block_grid") && !doc["block_grid"].is_null()) {
    const json& g = doc["block_grid"];
    const std::string w = "$.block_grid";
    BlockGrid bg;
    bg.origin = read_point(require(g, "origin", w), w + ".origin");
    bg.block_size = read_number(g, "block_size", w);
    const json& cols = require(g, "columns", w);
    const json& rows = require(g, "rows", w);
    if (!cols.is_number_integer()) field_error(w + ".columns", "expected an integer");
    if (!rows.is_number_integer()) field_error(w + ".rows", "expected an integer");
    bg.columns = cols.get<int>();
    bg.rows = rows.get<int>();
    const json& removed = require(g, "removed", w);
    if (!removed.is_array()) field_error(w + ".removed", "expected an array");
    for (std::size_t i = 0; i < removed.size(); ++i) {
      if (!removed[i].is_number_integer()) {
        field_error(w + ".removed[" + std::to_string(i) + "]", "expected an integer");
      }
      bg.removed.insert(removed[i].get<int>());
    }
    grid = std::move(bg);
  }
  try {
    return TerrainMap(std::move(stones), std::move(grid));
  } catch (const InvalidInput& e) {
    throw ParseError(std::string("terrain: ") + e.what());
  }
}

void save_terrain(const TerrainMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << terrain_to_json(map) << '\n';
}

TerrainMap load_terrain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return terrain_from_json(ss.str());
}

void export_occupancy_csv(const TerrainMap& map, const std::filesystem::path& path, Point2 lo,
                          Point2 hi, double resolution, double margin) {
  if (!(resolution > 0.0)) throw InvalidInput("export_occupancy_csv: resolution must be > 0");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "# contactnet occupancy v1 margin=" << margin << "\n";
  out << "x,y,safe\n";
  const int nx = static_cast<int>(std::floor((hi.x - lo.x) / resolution)) + 1;
  const int ny = static_cast<int>(std::floor((hi.y - lo.y) / resolution)) + 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Point2 q{lo.x + i * resolution, lo.y + j * resolution};
      out << q.x << ',' << q.y << ',' << (is_safe(map, q, margin) ? 1 : 0) << '\n';
    }
  }
}

}  // namespace contactnet
