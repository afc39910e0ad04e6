#include "memexplore/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <tuple>

#include "memexplore/error.hpp"

namespace memexplore {

CellSet boundary_cells(const OccupancyMap& map) {
  CellSet out;
  static constexpr int kDr[4] = {-1, 1, 0, 0};
  static constexpr int kDc[4] = {0, 0, -1, 1};
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      const Cell c{row, col};
      if (!map.explored(c) || map.state(c) != MapCell::Free) {
        continue;
      }
      for (int k = 0; k < 4; ++k) {
        const Cell n{row + kDr[k], col + kDc[k]};
        if (map.in_bounds(n) && !map.explored(n) && map.state(n) != MapCell::Occupied) {
          out.push_back(c);
          break;
        }
      }
    }
  }
  return out;
}

std::vector<CellSet> dbscan_cells(const CellSet& points, double eps_cells, int min_pts) {
  std::vector<CellSet> clusters;
  if (points.empty()) {
    return clusters;
  }
  int min_r = points.front().row;
  int max_r = min_r;
  int min_c = points.front().col;
  int max_c = min_c;
  for (const auto& p : points) {
    min_r = std::min(min_r, p.row);
    max_r = std::max(max_r, p.row);
    min_c = std::min(min_c, p.col);
    max_c = std::max(max_c, p.col);
  }
  const int w = max_c - min_c + 1;
  const int h = max_r - min_r + 1;
  std::vector<int> lookup(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  auto slot = [&](int r, int c) {
    return static_cast<std::size_t>(r - min_r) * static_cast<std::size_t>(w) +
           static_cast<std::size_t>(c - min_c);
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    lookup[slot(points[i].row, points[i].col)] = static_cast<int>(i);
  }

  const int reach = static_cast<int>(std::floor(eps_cells));
  const double eps2 = eps_cells * eps_cells;
  std::vector<std::pair<int, int>> offsets;
  for (int dr = -reach; dr <= reach; ++dr) {
    for (int dc = -reach; dc <= reach; ++dc) {
      if (dr * dr + dc * dc <= eps2) {
        offsets.emplace_back(dr, dc);
      }
    }
  }
  auto neighbors = [&](int i) {
    std::vector<int> out;
    const Cell& p = points[static_cast<std::size_t>(i)];
    for (const auto& [dr, dc] : offsets) {
      const int r = p.row + dr;
      const int c = p.col + dc;
      if (r < min_r || r > max_r || c < min_c || c > max_c) {
        continue;
      }
      const int j = lookup[slot(r, c)];
      if (j >= 0) {
        out.push_back(j);
      }
    }
    return out;
  };

  constexpr int kUnvisited = -1;
  constexpr int kNoise = -2;
  std::vector<int> label(points.size(), kUnvisited);
  int cluster_id = 0;
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    if (label[static_cast<std::size_t>(i)] != kUnvisited) {
      continue;
    }
    const auto seeds = neighbors(i);
    if (static_cast<int>(seeds.size()) < min_pts) {
      label[static_cast<std::size_t>(i)] = kNoise;
      continue;
    }
    label[static_cast<std::size_t>(i)] = cluster_id;
    std::deque<int> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const int j = queue.front();
      queue.pop_front();
      auto& lj = label[static_cast<std::size_t>(j)];
      if (lj == kNoise) {
        lj = cluster_id;  // border point
        continue;
      }
      if (lj != kUnvisited) {
        continue;
      }
      lj = cluster_id;
      const auto more = neighbors(j);
      if (static_cast<int>(more.size()) >= min_pts) {
        for (int m : more) {
          const int lm = label[static_cast<std::size_t>(m)];
          if (lm == kUnvisited || lm == kNoise) {
            queue.push_back(m);
          }
        }
      }
    }
    ++cluster_id;
  }

  clusters.resize(static_cast<std::size_t>(cluster_id));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label[i] >= 0) {
      clusters[static_cast<std::size_t>(label[i])].push_back(points[i]);
    }
  }
  for (auto& c : clusters) {
    std::sort(c.begin(), c.end());
  }
  return clusters;
}

namespace {

double absolute_bearing(const Cell& c, const Pose& pose, double cell_size) {
  double x = 0.0;
  double y = 0.0;
  cell_center(c, cell_size, x, y);
  const double dx = x - pose.x;
  const double dy = y - pose.y;
  if (dx == 0.0 && dy == 0.0) {
    return 0.0;
  }
  return normalize_heading(std::atan2(dy, dx) * 180.0 / kPi);
}

struct Arc {
  double start = 0.0;   // absolute bearing where the covering arc begins
  double extent = 0.0;  // degrees
};

Arc covering_arc(const CellSet& cells, const Pose& pose, double cell_size) {
  if (cells.empty()) {
    return {};
  }
  std::vector<double> angles;
  angles.reserve(cells.size());
  for (const auto& c : cells) {
    angles.push_back(absolute_bearing(c, pose, cell_size));
  }
  std::sort(angles.begin(), angles.end());
  // The largest gap between consecutive bearings (with wrap-around) is the
  // part of the circle the arc does not cover.
  double best_gap = angles.front() + 360.0 - angles.back();
  double start = angles.front();
  for (std::size_t i = 1; i < angles.size(); ++i) {
    const double gap = angles[i] - angles[i - 1];
    if (gap > best_gap) {
      best_gap = gap;
      start = angles[i];
    }
  }
  return Arc{start, 360.0 - best_gap};
}

}  // namespace

double angular_extent(const CellSet& cells, const Pose& pose, double cell_size) {
  return covering_arc(cells, pose, cell_size).extent;
}

std::array<CellSet, 2> split_wide(const CellSet& cells, const Pose& pose, double cell_size,
                                  const FrontierConfig& cfg) {
  const Arc arc = covering_arc(cells, pose, cell_size);
  if (!(arc.extent > cfg.split_extent_deg)) {
    throw ContractViolation("split_wide: angular extent " + std::to_string(arc.extent) +
                            " deg does not exceed " + std::to_string(cfg.split_extent_deg) + " deg");
  }
  std::vector<double> u(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    u[i] = normalize_heading(absolute_bearing(cells[i], pose, cell_size) - arc.start);
    if (u[i] > arc.extent) {
      // Float round-off right at the arc start.
      u[i] = 0.0;
    }
  }
  double center[2] = {0.0, arc.extent};
  std::vector<int> assign(cells.size(), -1);
  for (int iter = 0; iter < cfg.kmeans_max_iterations; ++iter) {
    bool changed = false;
    double sum[2] = {0.0, 0.0};
    std::size_t n[2] = {0, 0};
    for (std::size_t i = 0; i < u.size(); ++i) {
      const int k = std::abs(u[i] - center[0]) <= std::abs(u[i] - center[1]) ? 0 : 1;
      if (assign[i] != k) {
        assign[i] = k;
        changed = true;
      }
      sum[k] += u[i];
      ++n[k];
    }
    for (int k = 0; k < 2; ++k) {
      if (n[k] > 0) {
        center[k] = sum[k] / static_cast<double>(n[k]);
      }
    }
    if (!changed) {
      break;
    }
  }
  std::array<CellSet, 2> parts;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    parts[static_cast<std::size_t>(assign[i])].push_back(cells[i]);
  }
  return parts;
}

double cell_iou(const CellSet& a, const CellSet& b) {
  if (a.empty() && b.empty()) {
    return 1.0;
  }
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<CellSet> frontier_clusters(const OccupancyMap& map, const Pose& pose,
                                       const FrontierConfig& cfg) {
  const auto min_cells = static_cast<std::size_t>(cfg.min_cluster_cells);
  std::vector<CellSet> out;
  std::deque<CellSet> work;
  for (auto& c : dbscan_cells(boundary_cells(map), cfg.eps_cells, cfg.min_pts)) {
    if (c.size() >= min_cells) {
      work.push_back(std::move(c));
    }
  }
  while (!work.empty()) {
    CellSet c = std::move(work.front());
    work.pop_front();
    if (angular_extent(c, pose, map.cell_size()) > cfg.split_extent_deg) {
      auto parts = split_wide(c, pose, map.cell_size(), cfg);
      if (parts[0].empty() || parts[1].empty()) {
        out.push_back(std::move(c));
        continue;
      }
      // Keep order: both halves go back to the front of the queue.
      for (int k = 1; k >= 0; --k) {
        if (parts[static_cast<std::size_t>(k)].size() >= min_cells) {
          work.push_front(std::move(parts[static_cast<std::size_t>(k)]));
        }
      }
      continue;
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

Pose nav_point_of(const CellSet& cells, double cell_size) {
  double mx = 0.0;
  double my = 0.0;
  for (const auto& c : cells) {
    double x = 0.0;
    double y = 0.0;
    cell_center(c, cell_size, x, y);
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(cells.size());
  my /= static_cast<double>(cells.size());
  const Cell* best = &cells.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& c : cells) {
    double x = 0.0;
    double y = 0.0;
    cell_center(c, cell_size, x, y);
    const double d = (x - mx) * (x - mx) + (y - my) * (y - my);
    if (d < best_d) {
      best_d = d;
      best = &c;
    }
  }
  Pose p;
  cell_center(*best, cell_size, p.x, p.y);
  return p;
}

}  // namespace

std::vector<Frontier> extract_frontiers(const OccupancyMap& map, const Scene& scene, const Pose& pose,
                                        const std::vector<Frontier>& prev, int& next_id,
                                        const FrontierConfig& cfg, const ViewConfig& view_cfg) {
  const auto clusters = frontier_clusters(map, pose, cfg);

  std::vector<std::tuple<double, int, std::size_t, std::size_t>> candidates;  // iou, prev id, new, prev
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    for (std::size_t j = 0; j < prev.size(); ++j) {
      const double iou = cell_iou(clusters[i], prev[j].cells);
      if (iou >= cfg.iou_keep) {
        candidates.emplace_back(iou, prev[j].id, i, j);
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) {
      return std::get<0>(a) > std::get<0>(b);
    }
    if (std::get<1>(a) != std::get<1>(b)) {
      return std::get<1>(a) < std::get<1>(b);
    }
    return std::get<2>(a) < std::get<2>(b);
  });
  std::vector<int> match(clusters.size(), -1);
  std::vector<char> prev_used(prev.size(), 0);
  for (const auto& [iou, id, i, j] : candidates) {
    if (match[i] < 0 && !prev_used[j]) {
      match[i] = static_cast<int>(j);
      prev_used[j] = 1;
    }
  }

  std::vector<Frontier> out;
  out.reserve(clusters.size());
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    Frontier f;
    f.cells = clusters[i];
    f.nav_point = nav_point_of(f.cells, map.cell_size());
    f.bearing_extent = angular_extent(f.cells, pose, map.cell_size());
    if (match[i] >= 0) {
      const auto& old = prev[static_cast<std::size_t>(match[i])];
      f.id = old.id;
      f.snapshot = old.snapshot;
    } else {
      f.id = next_id++;
      f.snapshot = render_view_toward(scene, pose, relative_bearing(pose, f.nav_point.x, f.nav_point.y),
                                      view_cfg);
    }
    out.push_back(std::move(f));
  }
  return out;
}

const std::vector<Frontier>& FrontierTracker::update(const OccupancyMap& map, const Scene& scene,
                                                     const Pose& pose) {
  frontiers_ = extract_frontiers(map, scene, pose, frontiers_, next_id_, cfg_, view_cfg_);
  return frontiers_;
}

const Frontier* FrontierTracker::find(int id) const {
  for (const auto& f : frontiers_) {
    if (f.id == id) {
      return &f;
    }
  }
  return nullptr;
}

}  // namespace memexplore
