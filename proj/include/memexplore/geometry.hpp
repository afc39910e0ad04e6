#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace memexplore {

// Heading convention: 0 deg points along +x, and heading grows toward +y
// (rows grow downward, so +30 deg is a clockwise turn on screen). TurnLeft
// subtracts 30 deg, TurnRight adds 30 deg.

inline constexpr double kForwardStep = 0.25;  // meters
inline constexpr double kTurnStep = 30.0;     // degrees
inline constexpr double kPi = 3.14159265358979323846;

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

enum class MoveAction : std::uint8_t { Forward, TurnLeft, TurnRight, Stop };

std::string_view to_string(MoveAction action);
/// Accepts canonical names plus common spellings ("move_forward", "turn left", "left").
std::optional<MoveAction> parse_action(std::string_view text);

/// Maps any angle to [0, 360).
double normalize_heading(double degrees);
/// Maps any angle to (-180, 180].
double normalize_signed(double degrees);

/// Unit direction of a heading. Exact for multiples of 30 deg.
void heading_vector(double heading, double& dx, double& dy);

/// Signed angle from the pose heading to the point, in (-180, 180]. Positive
/// values lie on the TurnRight side. Views use this convention.
double relative_bearing(const Pose& pose, double px, double py);

/// Steering angle toward the point, positive on the TurnLeft side. Equals
/// -relative_bearing; used by the consistency predicate and greedy steering.
double steering_bearing(const Pose& pose, double px, double py);

double euclidean(double ax, double ay, double bx, double by);

/// Pose after one Forward step, ignoring collisions.
Pose advance(const Pose& pose);
/// Pose after applying a turn (Forward/Stop return the pose unchanged).
Pose rotate(const Pose& pose, MoveAction action);

struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

Cell cell_of(double x, double y, double cell_size);
/// Center of a cell in meters.
void cell_center(const Cell& cell, double cell_size, double& x, double& y);

/// Visits every grid cell the segment (x0,y0)->(x1,y1) passes through, in
/// order, starting with the cell containing the first endpoint. The visitor
/// returns false to stop early. Returns false iff the visitor stopped.
bool for_each_cell_on_segment(double x0, double y0, double x1, double y1, double cell_size,
                              const std::function<bool(const Cell&)>& visit);

}  // namespace memexplore
