#pragma once

#include <array>
#include <string>
#include <vector>

#include "memexplore/geometry.hpp"
#include "memexplore/scene.hpp"

namespace memexplore {

/// One detected object, as an image tagging model would report it.
struct VisibleObject {
  std::string tag;
  double distance = 0.0;  // meters
  double bearing = 0.0;   // degrees relative to the agent heading, TurnRight side positive
  std::string region;
  std::string color;
  std::string state;
  int count = 1;

  friend bool operator==(const VisibleObject&, const VisibleObject&) = default;
};

struct View {
  double relative_heading = 0.0;  // view center relative to the agent heading
  std::vector<VisibleObject> visible;

  friend bool operator==(const View&, const View&) = default;
};

using ViewTriplet = std::array<View, 3>;

struct ViewConfig {
  double fov_deg = 60.0;
  double view_interval_deg = 60.0;
  double max_range_m = 5.0;
};

/// True when every cell the segment crosses is free.
bool line_of_sight(const Scene& scene, double x0, double y0, double x1, double y1);

/// Views at relative headings -60, 0, +60. A view covers the half-open
/// bearing interval [center - fov/2, center + fov/2), so views never overlap.
/// Objects are ordered by (distance, tag).
ViewTriplet render_views(const Scene& scene, const Pose& pose, const ViewConfig& cfg = {});

/// True when the object would appear in one of render_views' three views.
bool is_visible(const Scene& scene, const Pose& pose, const SceneObject& obj, const ViewConfig& cfg = {});

/// Single view centered on `relative_heading` (used for frontier snapshots).
View render_view_toward(const Scene& scene, const Pose& pose, double relative_heading,
                        const ViewConfig& cfg = {});

}  // namespace memexplore
