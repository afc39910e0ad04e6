#include "memexplore/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace memexplore {

OccupancyMap::OccupancyMap(int width, int height, double cell_size)
    : width_(width),
      height_(height),
      cell_size_(cell_size),
      states_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), MapCell::Unknown),
      explored_(states_.size(), 0) {}

std::size_t OccupancyMap::explored_count() const {
  return static_cast<std::size_t>(std::count(explored_.begin(), explored_.end(), std::uint8_t{1}));
}

std::size_t update_map(OccupancyMap& map, const Scene& scene, const Pose& pose,
                       const ViewTriplet& views, const SensorConfig& cfg) {
  std::vector<std::uint8_t> observed(map.states().size(), 0);
  const double half = cfg.fov_deg / 2.0;
  const int rays = static_cast<int>(std::ceil(cfg.fov_deg / cfg.ray_step_deg));
  for (const auto& view : views) {
    for (int k = 0; k <= rays; ++k) {
      const double rel = view.relative_heading - half + std::min(cfg.fov_deg, k * cfg.ray_step_deg);
      const double rad = (pose.heading + rel) * kPi / 180.0;
      const double ex = pose.x + cfg.max_range_m * std::cos(rad);
      const double ey = pose.y + cfg.max_range_m * std::sin(rad);
      for_each_cell_on_segment(pose.x, pose.y, ex, ey, map.cell_size(), [&](const Cell& c) {
        if (!map.in_bounds(c)) {
          return false;
        }
        const std::size_t idx = map.index(c);
        observed[idx] = 1;
        if (!scene.is_free(c)) {
          map.set_state(c, MapCell::Occupied);
          return false;
        }
        map.set_state(c, MapCell::Free);
        return true;
      });
    }
  }

  const double r = cfg.explored_radius_m;
  const Cell lo = cell_of(pose.x - r, pose.y - r, map.cell_size());
  const Cell hi = cell_of(pose.x + r, pose.y + r, map.cell_size());
  std::size_t added = 0;
  for (int row = std::max(0, lo.row); row <= std::min(map.height() - 1, hi.row); ++row) {
    for (int col = std::max(0, lo.col); col <= std::min(map.width() - 1, hi.col); ++col) {
      const Cell c{row, col};
      const std::size_t idx = map.index(c);
      if (!observed[idx] || map.explored(c)) {
        continue;
      }
      double cx = 0.0;
      double cy = 0.0;
      cell_center(c, map.cell_size(), cx, cy);
      if (euclidean(cx, cy, pose.x, pose.y) <= r) {
        map.set_explored(c, true);
        ++added;
      }
    }
  }
  return added;
}

std::vector<double> known_distance_field(const OccupancyMap& map, const Cell& source) {
  std::vector<double> dist(map.states().size(), -1.0);
  auto passable = [&](const Cell& c) { return map.in_bounds(c) && map.state(c) == MapCell::Free; };
  if (!passable(source)) {
    return dist;
  }
  const double orth = map.cell_size();
  const double diag = std::sqrt(2.0) * map.cell_size();
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  std::vector<char> done(dist.size(), 0);
  const std::size_t src = map.index(source);
  dist[src] = 0.0;
  open.emplace(0.0, src);
  const auto w = static_cast<std::size_t>(map.width());
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (done[idx]) {
      continue;
    }
    done[idx] = 1;
    const Cell c{static_cast<int>(idx / w), static_cast<int>(idx % w)};
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) {
          continue;
        }
        const Cell n{c.row + dr, c.col + dc};
        if (!passable(n)) {
          continue;
        }
        const bool diagonal = dr != 0 && dc != 0;
        if (diagonal && (!passable(Cell{c.row + dr, c.col}) || !passable(Cell{c.row, c.col + dc}))) {
          continue;
        }
        const double nd = d + (diagonal ? diag : orth);
        const std::size_t ni = map.index(n);
        if (!done[ni] && (dist[ni] < 0.0 || nd < dist[ni])) {
          dist[ni] = nd;
          open.emplace(nd, ni);
        }
      }
    }
  }
  return dist;
}

}  // namespace memexplore
