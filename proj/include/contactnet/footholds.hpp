#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "contactnet/geometry.hpp"

namespace contactnet {

enum class Leg : std::uint8_t { LF = 0, RF = 1, LH = 2, RH = 3 };
inline constexpr int kNumLegs = 4;
inline constexpr std::array<Leg, 4> kAllLegs{Leg::LF, Leg::RF, Leg::LH, Leg::RH};

constexpr int leg_index(Leg l) { return static_cast<int>(l); }
std::string leg_name(Leg l);

enum class GaitKind : std::uint8_t { Walk = 0, Trot = 1 };
std::string gait_name(GaitKind g);
GaitKind parse_gait(const std::string& name);

/// Foothold grid and step timing for one gait.
struct GaitSpec {
  GaitKind kind{GaitKind::Walk};
  double grid_side{0.20};
  int cells_per_axis{5};
  double spacing{0.05};
  int legs_per_action{1};
  double node_dt{0.040};
  int stance_nodes_pre{3};
  int swing_nodes{4};
  int stance_nodes_post{1};

  static GaitSpec walk();
  static GaitSpec trot();
  static GaitSpec for_kind(GaitKind k) { return k == GaitKind::Walk ? walk() : trot(); }

  int nodes_per_step() const { return stance_nodes_pre + swing_nodes + stance_nodes_post; }
  double step_duration() const { return node_dt * nodes_per_step(); }
  int cells_per_leg() const { return cells_per_axis * cells_per_axis; }
};

/// Grid cell; col indexes the x offset, row the y offset.
struct Cell {
  int row{0};
  int col{0};
  constexpr bool operator==(const Cell&) const = default;
};

/// A gait-legal contact transition. An action with no legs is the all-stance
/// hold used for look-ahead padding and infeasibility fallbacks.
struct Action {
  int index{-1};
  int num_legs{0};
  std::array<Leg, 2> legs{};
  std::array<Cell, 2> cells{};

  static Action hold() { return {}; }
  bool is_hold() const { return num_legs == 0; }
  bool moves(Leg l) const;
  bool operator==(const Action&) const = default;
};

/// Constant body-frame XY offsets from CoM to each hip.
struct HipOffsets {
  std::array<Point2, 4> offset{{{0.17, 0.10}, {0.17, -0.10}, {-0.17, 0.10}, {-0.17, -0.10}}};
  Point2 operator[](Leg l) const { return offset[leg_index(l)]; }
};

inline constexpr int kInputDim = 14;
using InputVector = std::array<double, kInputDim>;

/// Planner/oracle input state. Feet are stored relative to the CoM (frame C,
/// which differs from the world frame by a translation only).
struct RobotState {
  std::array<Point2, 4> foot_xy_in_com{};
  double com_z{0.24};
  Eigen::Vector3d com_vel{Eigen::Vector3d::Zero()};
  Point2 user_vel{};
  Point2 com_xy_world{};

  Point2 foot_world(Leg l) const { return com_xy_world + foot_xy_in_com[leg_index(l)]; }
  void set_foot_world(Leg l, Point2 p) { foot_xy_in_com[leg_index(l)] = p - com_xy_world; }
  Point2 hip_world(Leg l, const HipOffsets& hips) const { return com_xy_world + hips[l]; }

  /// u_r = [feet (8), com z, com velocity (3), user velocity (2)].
  InputVector to_input() const;
  bool is_valid() const;

  /// Feet directly below the hips, at rest.
  static RobotState nominal(Point2 com_xy, double com_z, const HipOffsets& hips = {});
};

int action_count(const GaitSpec& gait);

/// Canonical index <-> action bijection. Walk: leg-major (LF, RF, LH, RH),
/// then row-major cells. Trot: pair {LF,RH} then {RF,LH}, each 9 x 9 cells.
Action action_at(const GaitSpec& gait, int index);
std::vector<Action> enumerate_actions(const GaitSpec& gait);

/// Offset of a cell from the hip.
Point2 cell_offset(const GaitSpec& gait, Cell c);

using Foothold = std::pair<Leg, Point2>;

/// World touchdown targets: hip XY (CoM + body offset) plus the cell offset.
std::vector<Foothold> action_footholds(const GaitSpec& gait, const Action& a, const RobotState& s,
                                       const HipOffsets& hips);

/// Left-right mirror of an action (LF<->RF, LH<->RH, rows flipped).
Action mirror_action(const GaitSpec& gait, const Action& a);

}  // namespace contactnet
