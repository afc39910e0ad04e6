#pragma once

#include <cstdint>
#include <vector>

#include "memexplore/geometry.hpp"
#include "memexplore/scene.hpp"
#include "memexplore/views.hpp"

namespace memexplore {

enum class MapCell : std::uint8_t { Unknown, Free, Occupied };

struct SensorConfig {
  double max_range_m = 3.0;
  double explored_radius_m = 1.7;
  double ray_step_deg = 0.5;
  double fov_deg = 60.0;
};

/// Online map built from depth rays. `explored` marks cells that were
/// observed while within explored_radius of the trajectory.
class OccupancyMap {
 public:
  OccupancyMap() = default;
  OccupancyMap(int width, int height, double cell_size);
  static OccupancyMap for_scene(const Scene& scene) {
    return OccupancyMap(scene.width(), scene.height(), scene.cell_size());
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }

  bool in_bounds(const Cell& c) const {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }
  std::size_t index(const Cell& c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }
  MapCell state(const Cell& c) const { return states_[index(c)]; }
  bool explored(const Cell& c) const { return explored_[index(c)] != 0; }
  void set_state(const Cell& c, MapCell s) { states_[index(c)] = s; }
  /// Test hook; callers keep explored within observed cells.
  void set_explored(const Cell& c, bool e) { explored_[index(c)] = e ? 1 : 0; }
  std::size_t explored_count() const;
  const std::vector<std::uint8_t>& explored_mask() const { return explored_; }
  const std::vector<MapCell>& states() const { return states_; }

  friend bool operator==(const OccupancyMap&, const OccupancyMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 0.1;
  std::vector<MapCell> states_;
  std::vector<std::uint8_t> explored_;
};

/// Ray-casts each view's field of view against the scene geometry (the depth
/// source): traversed cells become Free, the first blocking cell Occupied.
/// Cells observed by this call within explored_radius of the pose join the
/// explored mask. Returns the number of newly explored cells.
std::size_t update_map(OccupancyMap& map, const Scene& scene, const Pose& pose,
                       const ViewTriplet& views, const SensorConfig& cfg = {});

/// Geodesic meters from `source` through cells the map knows to be Free
/// (8-connected, diagonal sqrt(2), no corner cutting); -1 elsewhere.
std::vector<double> known_distance_field(const OccupancyMap& map, const Cell& source);

}  // namespace memexplore
