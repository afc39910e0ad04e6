#pragma once

#include <array>
#include <vector>

#include "memexplore/geometry.hpp"
#include "memexplore/occupancy.hpp"
#include "memexplore/scene.hpp"
#include "memexplore/views.hpp"

namespace memexplore {

struct FrontierConfig {
  double eps_cells = 2.0;
  int min_pts = 4;  // neighborhood size including the point itself
  int min_cluster_cells = 20;
  double split_extent_deg = 150.0;
  int kmeans_max_iterations = 50;
  double iou_keep = 0.95;
};

using CellSet = std::vector<Cell>;  // kept sorted row-major

struct Frontier {
  int id = -1;
  CellSet cells;
  Pose nav_point;
  View snapshot;
  double bearing_extent = 0.0;  // degrees, measured from the pose at extraction

  friend bool operator==(const Frontier&, const Frontier&) = default;
};

/// Explored Free cells with a 4-neighbor that is neither explored nor known
/// Occupied. Row-major order.
CellSet boundary_cells(const OccupancyMap& map);

/// DBSCAN over grid cells with Euclidean distance in cell units. Points are
/// scanned in input order; a border point joins the first cluster that
/// reaches it. Noise is dropped. Each cluster is returned sorted row-major,
/// clusters in discovery order.
std::vector<CellSet> dbscan_cells(const CellSet& points, double eps_cells, int min_pts);

/// Smallest circular arc (degrees) covering the bearings of the cell
/// centers as seen from the pose.
double angular_extent(const CellSet& cells, const Pose& pose, double cell_size);

/// 2-means on unwrapped bearing with centers initialized at the arc
/// endpoints. Throws ContractViolation unless the extent exceeds the
/// configured split threshold.
std::array<CellSet, 2> split_wide(const CellSet& cells, const Pose& pose, double cell_size,
                                  const FrontierConfig& cfg = {});

double cell_iou(const CellSet& a, const CellSet& b);

/// Clusters boundary cells, drops small clusters, splits wide ones until each
/// part spans at most the split threshold, and returns cell sets in a
/// deterministic order. Pure function of the map and pose.
std::vector<CellSet> frontier_clusters(const OccupancyMap& map, const Pose& pose,
                                       const FrontierConfig& cfg = {});

/// Full extraction with identity tracking. A cluster whose IoU with a
/// previous frontier is >= iou_keep inherits that frontier's id and
/// snapshot (greedy by descending IoU); others get `next_id++` and a fresh
/// snapshot rendered toward the nav point.
std::vector<Frontier> extract_frontiers(const OccupancyMap& map, const Scene& scene, const Pose& pose,
                                        const std::vector<Frontier>& prev, int& next_id,
                                        const FrontierConfig& cfg = {},
                                        const ViewConfig& view_cfg = {});

/// Per-episode frontier state.
class FrontierTracker {
 public:
  explicit FrontierTracker(FrontierConfig cfg = {}, ViewConfig view_cfg = {})
      : cfg_(cfg), view_cfg_(view_cfg) {}

  const std::vector<Frontier>& update(const OccupancyMap& map, const Scene& scene, const Pose& pose);
  const std::vector<Frontier>& frontiers() const { return frontiers_; }
  const Frontier* find(int id) const;

 private:
  FrontierConfig cfg_;
  ViewConfig view_cfg_;
  std::vector<Frontier> frontiers_;
  int next_id_ = 0;
};

}  // namespace memexplore
