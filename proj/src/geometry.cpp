#include "memexplore/geometry.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace memexplore {

std::string_view to_string(MoveAction action) {
  switch (action) {
    case MoveAction::Forward:
      return "forward";
    case MoveAction::TurnLeft:
      return "turn_left";
    case MoveAction::TurnRight:
      return "turn_right";
    case MoveAction::Stop:
      return "stop";
  }
  return "stop";
}

std::optional<MoveAction> parse_action(std::string_view text) {
  std::string key;
  for (char ch : text) {
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (key == "forward" || key == "moveforward" || key == "goforward") {
    return MoveAction::Forward;
  }
  if (key == "turnleft" || key == "left") {
    return MoveAction::TurnLeft;
  }
  if (key == "turnright" || key == "right") {
    return MoveAction::TurnRight;
  }
  if (key == "stop") {
    return MoveAction::Stop;
  }
  return std::nullopt;
}

double normalize_heading(double degrees) {
  double h = std::fmod(degrees, 360.0);
  if (h < 0.0) {
    h += 360.0;
  }
  if (h >= 360.0) {
    h -= 360.0;
  }
  return h;
}

double normalize_signed(double degrees) {
  double h = normalize_heading(degrees);
  if (h > 180.0) {
    h -= 360.0;
  }
  return h;
}

void heading_vector(double heading, double& dx, double& dy) {
  // Table for the lattice headings keeps trajectories free of trig drift.
  static constexpr double kHalfSqrt3 = 0.86602540378443864676;
  static constexpr std::array<std::array<double, 2>, 12> kTable{{
      {1.0, 0.0},
      {kHalfSqrt3, 0.5},
      {0.5, kHalfSqrt3},
      {0.0, 1.0},
      {-0.5, kHalfSqrt3},
      {-kHalfSqrt3, 0.5},
      {-1.0, 0.0},
      {-kHalfSqrt3, -0.5},
      {-0.5, -kHalfSqrt3},
      {0.0, -1.0},
      {0.5, -kHalfSqrt3},
      {kHalfSqrt3, -0.5},
  }};
  const double h = normalize_heading(heading);
  const double slot = h / kTurnStep;
  const double rounded = std::round(slot);
  if (std::abs(slot - rounded) < 1e-12) {
    const auto idx = static_cast<std::size_t>(static_cast<int>(rounded) % 12);
    dx = kTable[idx][0];
    dy = kTable[idx][1];
    return;
  }
  const double rad = h * kPi / 180.0;
  dx = std::cos(rad);
  dy = std::sin(rad);
}

double relative_bearing(const Pose& pose, double px, double py) {
  const double dx = px - pose.x;
  const double dy = py - pose.y;
  if (dx == 0.0 && dy == 0.0) {
    return 0.0;
  }
  const double absolute = std::atan2(dy, dx) * 180.0 / kPi;
  return normalize_signed(absolute - pose.heading);
}

double steering_bearing(const Pose& pose, double px, double py) {
  return -relative_bearing(pose, px, py);
}

double euclidean(double ax, double ay, double bx, double by) {
  return std::hypot(ax - bx, ay - by);
}

Pose advance(const Pose& pose) {
  double dx = 0.0;
  double dy = 0.0;
  heading_vector(pose.heading, dx, dy);
  return Pose{pose.x + kForwardStep * dx, pose.y + kForwardStep * dy, pose.heading};
}

Pose rotate(const Pose& pose, MoveAction action) {
  Pose out = pose;
  if (action == MoveAction::TurnLeft) {
    out.heading = normalize_heading(pose.heading - kTurnStep);
  } else if (action == MoveAction::TurnRight) {
    out.heading = normalize_heading(pose.heading + kTurnStep);
  }
  return out;
}

Cell cell_of(double x, double y, double cell_size) {
  return Cell{static_cast<int>(std::floor(y / cell_size)), static_cast<int>(std::floor(x / cell_size))};
}

void cell_center(const Cell& cell, double cell_size, double& x, double& y) {
  x = (cell.col + 0.5) * cell_size;
  y = (cell.row + 0.5) * cell_size;
}

bool for_each_cell_on_segment(double x0, double y0, double x1, double y1, double cell_size,
                              const std::function<bool(const Cell&)>& visit) {
  // Amanatides & Woo grid traversal.
  Cell cell = cell_of(x0, y0, cell_size);
  const Cell last = cell_of(x1, y1, cell_size);
  if (!visit(cell)) {
    return false;
  }
  const double dx = x1 - x0;
  const double dy = y1 - y0;
  const int step_col = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_row = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  const double next_x = step_col > 0 ? (cell.col + 1) * cell_size : cell.col * cell_size;
  const double next_y = step_row > 0 ? (cell.row + 1) * cell_size : cell.row * cell_size;
  double t_max_x = step_col != 0 ? (next_x - x0) / dx : kInf;
  double t_max_y = step_row != 0 ? (next_y - y0) / dy : kInf;
  const double t_delta_x = step_col != 0 ? cell_size / std::abs(dx) : kInf;
  const double t_delta_y = step_row != 0 ? cell_size / std::abs(dy) : kInf;

  const int max_steps = std::abs(last.col - cell.col) + std::abs(last.row - cell.row);
  for (int i = 0; i < max_steps; ++i) {
    if (t_max_x < t_max_y) {
      cell.col += step_col;
      t_max_x += t_delta_x;
    } else {
      cell.row += step_row;
      t_max_y += t_delta_y;
    }
    if (!visit(cell)) {
      return false;
    }
    if (cell == last) {
      break;
    }
  }
  return true;
}

}  // namespace memexplore
