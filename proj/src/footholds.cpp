#include "contactnet/footholds.hpp"

#include <cmath>

#include "contactnet/errors.hpp"

namespace contactnet {

std::string leg_name(Leg l) {
  switch (l) {
    case Leg::LF: return "LF";
    case Leg::RF: return "RF";
    case Leg::LH: return "LH";
    case Leg::RH: return "RH";
  }
  return "?";
}

std::string gait_name(GaitKind g) { return g == GaitKind::Walk ? "walk" : "trot"; }

GaitKind parse_gait(const std::string& name) {
  if (name == "walk") return GaitKind::Walk;
  if (name == "trot") return GaitKind::Trot;
  throw InvalidInput("unknown gait '" + name + "' (expected walk or trot)");
}

GaitSpec GaitSpec::walk() { return GaitSpec{}; }

GaitSpec GaitSpec::trot() {
  GaitSpec g;
  g.kind = GaitKind::Trot;
  g.grid_side = 0.10;
  g.cells_per_axis = 3;
  g.legs_per_action = 2;
  return g;
}

bool Action::moves(Leg l) const {
  for (int i = 0; i < num_legs; ++i) {
    if (legs[i] == l) return true;
  }
  return false;
}

InputVector RobotState::to_input() const {
  InputVector u{};
  for (int i = 0; i < 4; ++i) {
    u[2 * i] = foot_xy_in_com[i].x;
    u[2 * i + 1] = foot_xy_in_com[i].y;
  }
  u[8] = com_z;
  u[9] = com_vel.x();
  u[10] = com_vel.y();
  u[11] = com_vel.z();
  u[12] = user_vel.x;
  u[13] = user_vel.y;
  return u;
}

bool RobotState::is_valid() const {
  for (const auto& f : foot_xy_in_com) {
    if (!is_finite(f)) return false;
  }
  return com_z > 0.0 && std::isfinite(com_z) && com_vel.allFinite() && is_finite(user_vel) &&
         is_finite(com_xy_world);
}

RobotState RobotState::nominal(Point2 com_xy, double com_z, const HipOffsets& hips) {
  RobotState s;
  s.com_xy_world = com_xy;
  s.com_z = com_z;
  for (Leg l : kAllLegs) s.foot_xy_in_com[leg_index(l)] = hips[l];
  return s;
}

namespace {
constexpr std::array<std::array<Leg, 2>, 2> kTrotPairs{{{Leg::LF, Leg::RH}, {Leg::RF, Leg::LH}}};
}

int action_count(const GaitSpec& gait) {
  const int cells = gait.cells_per_leg();
  return gait.kind == GaitKind::Walk ? 4 * cells : 2 * cells * cells;
}

Action action_at(const GaitSpec& gait, int index) {
  if (index < 0 || index >= action_count(gait)) {
    throw InvalidInput("action index " + std::to_string(index) + " out of range");
  }
  const int n = gait.cells_per_axis;
  const int cells = gait.cells_per_leg();
  auto cell_of = [n](int k) { return Cell{k / n, k % n}; };
  Action a;
  a.index = index;
  if (gait.kind == GaitKind::Walk) {
    a.num_legs = 1;
    a.legs[0] = static_cast<Leg>(index / cells);
    a.cells[0] = cell_of(index % cells);
  } else {
    const int pair = index / (cells * cells);
    const int rem = index % (cells * cells);
    a.num_legs = 2;
    a.legs = kTrotPairs[pair];
    a.cells = {cell_of(rem / cells), cell_of(rem % cells)};
  }
  return a;
}

std::vector<Action> enumerate_actions(const GaitSpec& gait) {
  std::vector<Action> out;
  const int n = action_count(gait);
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(action_at(gait, i));
  return out;
}

Point2 cell_offset(const GaitSpec& gait, Cell c) {
  const double center = 0.5 * (gait.cells_per_axis - 1);
  return {(c.col - center) * gait.spacing, (c.row - center) * gait.spacing};
}

std::vector<Foothold> action_footholds(const GaitSpec& gait, const Action& a, const RobotState& s,
                                       const HipOffsets& hips) {
  std::vector<Foothold> out;
  out.reserve(a.num_legs);
  for (int i = 0; i < a.num_legs; ++i) {
    out.emplace_back(a.legs[i], s.hip_world(a.legs[i], hips) + cell_offset(gait, a.cells[i]));
  }
  return out;
}

Action mirror_action(const GaitSpec& gait, const Action& a) {
  if (a.is_hold()) return a;
  auto mirror_leg = [](Leg l) {
    switch (l) {
      case Leg::LF: return Leg::RF;
      case Leg::RF: return Leg::LF;
      case Leg::LH: return Leg::RH;
      case Leg::RH: return Leg::LH;
    }
    return l;
  };
  const int n = gait.cells_per_axis;
  const int cells = gait.cells_per_leg();
  auto k_of = [n](Cell c) { return c.row * n + c.col; };
  auto flip = [n](Cell c) { return Cell{n - 1 - c.row, c.col}; };
  if (gait.kind == GaitKind::Walk) {
    const Leg l = mirror_leg(a.legs[0]);
    return action_at(gait, leg_index(l) * cells + k_of(flip(a.cells[0])));
  }
  // {LF,RH} mirrors to {RF,LH}: LF->RF takes the first slot, RH->LH the second.
  const int pair = (a.legs[0] == Leg::LF) ? 1 : 0;
  const int idx = pair * cells * cells + k_of(flip(a.cells[0])) * cells + k_of(flip(a.cells[1]));
  return action_at(gait, idx);
}

}  // namespace contactnet
