#include "memexplore/views.hpp"

#include <algorithm>
#include <cmath>

namespace memexplore {

bool line_of_sight(const Scene& scene, double x0, double y0, double x1, double y1) {
  return for_each_cell_on_segment(x0, y0, x1, y1, scene.cell_size(),
                                  [&](const Cell& c) { return scene.is_free(c); });
}

namespace {

bool in_fov(double bearing, double center, double half_fov) {
  const double offset = normalize_signed(bearing - center);
  // normalize_signed maps to (-180, 180]; -half_fov must stay inside.
  return offset >= -half_fov && offset < half_fov;
}

VisibleObject detect(const SceneObject& obj, double distance, double bearing) {
  return VisibleObject{obj.tag, distance, bearing, obj.region, obj.color, obj.state, obj.count};
}

void sort_view(View& view) {
  std::sort(view.visible.begin(), view.visible.end(), [](const VisibleObject& a, const VisibleObject& b) {
    if (a.distance != b.distance) {
      return a.distance < b.distance;
    }
    return a.tag < b.tag;
  });
}

}  // namespace

ViewTriplet render_views(const Scene& scene, const Pose& pose, const ViewConfig& cfg) {
  ViewTriplet views;
  const double half = cfg.fov_deg / 2.0;
  for (int v = 0; v < 3; ++v) {
    views[static_cast<std::size_t>(v)].relative_heading = (v - 1) * cfg.view_interval_deg;
  }
  for (const auto& obj : scene.objects()) {
    const double d = euclidean(pose.x, pose.y, obj.pose.x, obj.pose.y);
    if (d > cfg.max_range_m) {
      continue;
    }
    const double bearing = relative_bearing(pose, obj.pose.x, obj.pose.y);
    for (auto& view : views) {
      if (!in_fov(bearing, view.relative_heading, half)) {
        continue;
      }
      if (line_of_sight(scene, pose.x, pose.y, obj.pose.x, obj.pose.y)) {
        view.visible.push_back(detect(obj, d, bearing));
      }
      break;
    }
  }
  for (auto& view : views) {
    sort_view(view);
  }
  return views;
}

bool is_visible(const Scene& scene, const Pose& pose, const SceneObject& obj, const ViewConfig& cfg) {
  const double d = euclidean(pose.x, pose.y, obj.pose.x, obj.pose.y);
  if (d > cfg.max_range_m) {
    return false;
  }
  const double bearing = relative_bearing(pose, obj.pose.x, obj.pose.y);
  const double half = cfg.fov_deg / 2.0;
  for (int v = 0; v < 3; ++v) {
    if (in_fov(bearing, (v - 1) * cfg.view_interval_deg, half)) {
      return line_of_sight(scene, pose.x, pose.y, obj.pose.x, obj.pose.y);
    }
  }
  return false;
}

View render_view_toward(const Scene& scene, const Pose& pose, double relative_heading,
                        const ViewConfig& cfg) {
  View view;
  view.relative_heading = normalize_signed(relative_heading);
  const double half = cfg.fov_deg / 2.0;
  for (const auto& obj : scene.objects()) {
    const double d = euclidean(pose.x, pose.y, obj.pose.x, obj.pose.y);
    if (d > cfg.max_range_m) {
      continue;
    }
    const double bearing = relative_bearing(pose, obj.pose.x, obj.pose.y);
    if (in_fov(bearing, view.relative_heading, half) &&
        line_of_sight(scene, pose.x, pose.y, obj.pose.x, obj.pose.y)) {
      view.visible.push_back(detect(obj, d, bearing));
    }
  }
  sort_view(view);
  return view;
}

}  // namespace memexplore
