#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "contactnet/geometry.hpp"

namespace contactnet {

struct RectangleStone {
  Point2 center;
  double width{0.0};   // extent along x
  double height{0.0};  // extent along y
};

struct CircleStone {
  Point2 center;
  double radius{0.0};
};

/// Simple polygon, possibly non-convex (stars). Containment is even-odd.
struct PolygonStone {
  std::vector<Point2> vertices;
};

using Stone = std::variant<RectangleStone, CircleStone, PolygonStone>;

/// Axis-aligned grid of square blocks. Cell index = row * columns + col, col
/// running along +x from `origin`, row along +y.
struct BlockGrid {
  Point2 origin;
  double block_size{0.05};
  int columns{0};
  int rows{0};
  std::set<int> removed;

  int total() const { return columns * rows; }
  bool present(int col, int row) const;
  double max_x() const { return origin.x + columns * block_size; }
};

class TerrainMap {
 public:
  TerrainMap() = default;
  TerrainMap(std::vector<Stone> stones, std::optional<BlockGrid> grid);

  /// One huge rectangle: every practical query is safe.
  static TerrainMap flat();

  const std::vector<Stone>& stones() const { return stones_; }
  const std::optional<BlockGrid>& block_grid() const { return grid_; }

  TerrainMap with_stone(Stone s) const;

 private:
  std::vector<Stone> stones_;
  std::optional<BlockGrid> grid_;
};

inline constexpr double kDefaultSafetyMargin = 0.01;

/// True iff the closed disk of radius `margin` around q lies in the union of
/// stones and present blocks.
bool is_safe(const TerrainMap& map, Point2 q, double margin = kDefaultSafetyMargin);

/// Point-only membership in the union (boundaries count as inside).
bool in_union(const TerrainMap& map, Point2 q);

/// length x width field of square blocks centred on y = 0 starting at x = 0,
/// with n_removed distinct cells removed uniformly at random.
TerrainMap gen_block_field(double length, double width, double block_size, int n_removed,
                           std::uint64_t seed);

/// Built-in stepping-stone course (3 stars, 2 circles, 3 rectangles, start
/// and end squares), loaded from the bundled layout.
TerrainMap stepping_stones_scenario();
std::string stepping_stones_layout_json();

/// Regular 5-pointed star as a 10-vertex polygon.
PolygonStone make_star(Point2 center, double outer_radius, double inner_radius,
                       double rotation = 0.0);

std::string terrain_to_json(const TerrainMap& map, int indent = 2);
TerrainMap terrain_from_json(const std::string& text);
void save_terrain(const TerrainMap& map, const std::filesystem::path& path);
TerrainMap load_terrain(const std::filesystem::path& path);

/// Occupancy raster as CSV rows "x,y,safe".
void export_occupancy_csv(const TerrainMap& map, const std::filesystem::path& path,
                          Point2 lo, Point2 hi, double resolution, double margin);

}  // namespace contactnet
