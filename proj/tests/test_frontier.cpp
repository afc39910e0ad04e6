#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "memexplore/error.hpp"
#include "memexplore/frontier.hpp"
#include "memexplore/simulator.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace memexplore;
using memexplore::testing::SceneBuilder;

namespace {

void observe(OccupancyMap& map, const Scene& scene, const Pose& p) {
  update_map(map, scene, p, render_views(scene, p));
}

double center_distance(const Cell& c, const Pose& p) {
  double x = 0.0;
  double y = 0.0;
  cell_center(c, 0.1, x, y);
  return std::hypot(x - p.x, y - p.y);
}

/// Explored Free run of cells in one row with everything else Unknown.
OccupancyMap strip_map(int length) {
  OccupancyMap map(60, 60, 0.1);
  for (int c = 10; c < 10 + length; ++c) {
    map.set_state(Cell{30, c}, MapCell::Free);
    map.set_explored(Cell{30, c}, true);
  }
  return map;
}

CellSet arc_cells(const Pose& p, double from_deg, double to_deg, double radius) {
  std::set<Cell> cells;
  for (double a = from_deg; a <= to_deg + 1e-9; a += 0.25) {
    const double rad = (p.heading + a) * kPi / 180.0;
    cells.insert(cell_of(p.x + radius * std::cos(rad), p.y + radius * std::sin(rad), 0.1));
  }
  return CellSet(cells.begin(), cells.end());
}

}  // namespace

TEST_SUITE("frontier") {
  TEST_CASE("one pose explores the half disc in front of the agent") {
    const Scene s = SceneBuilder(100, 100).build();
    const Pose p{5.05, 5.05, 0.0};
    OccupancyMap map = OccupancyMap::for_scene(s);
    observe(map, s, p);
    for (int r = 0; r < 100; ++r) {
      for (int c = 0; c < 100; ++c) {
        const Cell cell{r, c};
        double x = 0.0;
        double y = 0.0;
        cell_center(cell, 0.1, x, y);
        const double d = center_distance(cell, p);
        const double b = std::abs(oracle::bearing(p, x, y));
        if (d > 1.7) {
          CHECK_FALSE(map.explored(cell));
        } else if (b < 88.0) {
          CHECK(map.explored(cell));
        } else if (b > 92.0) {
          CHECK_FALSE(map.explored(cell));
        }
      }
    }
  }

  TEST_CASE("four rotations explore exactly the 1.7 m disc") {
    const Scene s = SceneBuilder(100, 100).build();
    OccupancyMap map = OccupancyMap::for_scene(s);
    Pose p{5.05, 5.05, 0.0};
    for (int k = 0; k < 4; ++k) {
      p.heading = 90.0 * k;
      observe(map, s, p);
    }
    std::size_t expected = 0;
    for (int r = 0; r < 100; ++r) {
      for (int c = 0; c < 100; ++c) {
        const bool in = center_distance(Cell{r, c}, p) <= 1.7;
        expected += in ? 1 : 0;
        CHECK(map.explored(Cell{r, c}) == in);
      }
    }
    CHECK(map.explored_count() == expected);
  }

  TEST_CASE("a wall 1 m ahead is Occupied and the cells before it Free") {
    const Scene s = SceneBuilder(100, 100).wall(0, 60, 99, 60).build();
    OccupancyMap map = OccupancyMap::for_scene(s);
    const Pose p{5.05, 5.05, 0.0};
    observe(map, s, p);
    for (int c = 51; c < 60; ++c) {
      CHECK(map.state(Cell{50, c}) == MapCell::Free);
    }
    CHECK(map.state(Cell{50, 60}) == MapCell::Occupied);
    CHECK(map.state(Cell{50, 61}) == MapCell::Unknown);
    for (int r = 0; r < 100; ++r) {
      for (int c = 0; c < 100; ++c) {
        if (map.explored(Cell{r, c})) {
          CHECK(map.state(Cell{r, c}) != MapCell::Unknown);
        }
      }
    }
  }

  TEST_CASE("two updates explore the union of the separate updates") {
    const Scene s = SceneBuilder(100, 100).wall(20, 40, 70, 41).build();
    const Pose a{3.05, 4.05, 30.0};
    const Pose b{4.05, 5.05, 200.0};
    OccupancyMap ma = OccupancyMap::for_scene(s);
    OccupancyMap mb = OccupancyMap::for_scene(s);
    OccupancyMap both = OccupancyMap::for_scene(s);
    observe(ma, s, a);
    observe(mb, s, b);
    observe(both, s, a);
    observe(both, s, b);
    for (std::size_t i = 0; i < both.explored_mask().size(); ++i) {
      CHECK((both.explored_mask()[i] != 0) == (ma.explored_mask()[i] != 0 || mb.explored_mask()[i] != 0));
    }
  }

  TEST_CASE("DBSCAN equals the all-pairs oracle on 100 random 50x50 masks") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const double density = 0.05 + 0.25 * u(rng);
      CellSet pts;
      for (int r = 0; r < 50; ++r) {
        for (int c = 0; c < 50; ++c) {
          if (u(rng) < density) {
            pts.push_back(Cell{r, c});
          }
        }
      }
      CHECK(dbscan_cells(pts, 2.0, 4) == oracle::dbscan(pts, 2.0, 4));
    }
  }

  TEST_CASE("frontier clusters equal the oracle pipeline on random explored masks") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    FrontierConfig cfg;
    cfg.split_extent_deg = 360.0;
    for (int trial = 0; trial < 100; ++trial) {
      OccupancyMap map(50, 50, 0.1);
      const double density = 0.2 + 0.6 * u(rng);
      for (int r = 0; r < 50; ++r) {
        for (int c = 0; c < 50; ++c) {
          const double x = u(rng);
          if (x < density) {
            map.set_state(Cell{r, c}, MapCell::Free);
            map.set_explored(Cell{r, c}, u(rng) < 0.7);
          } else if (x < density + 0.1) {
            map.set_state(Cell{r, c}, MapCell::Occupied);
          }
        }
      }
      const CellSet bnd = oracle::boundary(map);
      REQUIRE(boundary_cells(map) == bnd);
      std::vector<CellSet> expected;
      for (auto& c : oracle::dbscan(bnd, 2.0, 4)) {
        if (c.size() >= 20) {
          expected.push_back(c);
        }
      }
      std::vector<CellSet> got = frontier_clusters(map, Pose{2.55, 2.55, 0.0}, cfg);
      std::sort(expected.begin(), expected.end());
      std::sort(got.begin(), got.end());
      CHECK(got == expected);
    }
  }

  TEST_CASE("25-cell blob gives one frontier, 15-cell blob gives none") {
    const Scene s = SceneBuilder(60, 60).build();
    const Pose p{3.05, 0.55, 90.0};
    int next_id = 0;
    const auto big = extract_frontiers(strip_map(25), s, p, {}, next_id);
    REQUIRE(big.size() == 1);
    CHECK(big[0].cells.size() == 25);
    CHECK(big[0].cells == oracle::dbscan(oracle::boundary(strip_map(25)), 2.0, 4)[0]);
    CHECK(extract_frontiers(strip_map(15), s, p, {}, next_id).empty());
    CHECK(extract_frontiers(strip_map(19), s, p, {}, next_id).empty());
    CHECK(extract_frontiers(strip_map(20), s, p, {}, next_id).size() == 1);
  }

  TEST_CASE("ids persist while IoU stays at or above 0.95") {
    const Scene s = SceneBuilder(60, 60).build();
    const Pose p{3.05, 0.55, 90.0};
    int next_id = 0;
    const auto first = extract_frontiers(strip_map(25), s, p, {}, next_id);
    const auto again = extract_frontiers(strip_map(25), s, p, first, next_id);
    REQUIRE(again.size() == 1);
    CHECK(again == first);
    const auto shrunk = extract_frontiers(strip_map(24), s, p, first, next_id);  // IoU 0.96
    REQUIRE(shrunk.size() == 1);
    CHECK(shrunk[0].id == first[0].id);
    const auto cut = extract_frontiers(strip_map(22), s, p, first, next_id);  // IoU 0.88
    REQUIRE(cut.size() == 1);
    CHECK(cut[0].id != first[0].id);
    CHECK(cell_iou(first[0].cells, cut[0].cells) == doctest::Approx(22.0 / 25.0));
  }

  TEST_CASE("splitting a 160 degree arc partitions it") {
    const Pose p{5.05, 5.05, 0.0};
    const CellSet arc = arc_cells(p, -80.0, 80.0, 3.0);
    CHECK(angular_extent(arc, p, 0.1) > 150.0);
    const auto parts = split_wide(arc, p, 0.1);
    CHECK_FALSE(parts[0].empty());
    CHECK_FALSE(parts[1].empty());
    std::vector<Cell> joined = parts[0];
    joined.insert(joined.end(), parts[1].begin(), parts[1].end());
    std::sort(joined.begin(), joined.end());
    CHECK(std::adjacent_find(joined.begin(), joined.end()) == joined.end());
    CHECK(joined == arc);
  }

  TEST_CASE("a symmetric 180 degree arc splits into near-equal halves") {
    const Pose p{5.05, 5.05, 0.0};
    std::set<Cell> sym;
    for (const auto& c : arc_cells(p, -90.0, 90.0, 3.0)) {
      sym.insert(c);
      sym.insert(Cell{100 - c.row, c.col});  // mirror across the heading axis (row 50)
    }
    const CellSet arc(sym.begin(), sym.end());
    const auto parts = split_wide(arc, p, 0.1);
    const long diff = static_cast<long>(parts[0].size()) - static_cast<long>(parts[1].size());
    CHECK(std::abs(diff) <= 1);
  }

  TEST_CASE("splitting an arc narrower than the threshold is a contract violation") {
    const Pose p{5.05, 5.05, 0.0};
    CHECK_THROWS_AS(split_wide(arc_cells(p, -70.0, 70.0, 3.0), p, 0.1), ContractViolation);
  }

  TEST_CASE("frontiers stay sound, disjoint and monotone along random walks") {
    SceneBuilder b(120, 120);
    b.border().wall(1, 60, 50, 61).wall(70, 60, 118, 61).wall(60, 1, 61, 40);
    const Scene s = b.build();
    std::mt19937_64 rng(31);
    for (int walk = 0; walk < 3; ++walk) {
      EpisodeState st;
      st.pose = Pose{2.05 + walk, 2.05, 0.0};
      OccupancyMap map = OccupancyMap::for_scene(s);
      FrontierTracker tracker;
      std::size_t explored = 0;
      for (int k = 0; k < 120; ++k) {
        observe(map, s, st.pose);
        CHECK(map.explored_count() >= explored);
        explored = map.explored_count();
        const auto& fs = tracker.update(map, s, st.pose);
        const CellSet bnd = oracle::boundary(map);
        std::set<Cell> seen;
        std::set<int> ids;
        for (const auto& f : fs) {
          CHECK(f.cells.size() >= 20);
          CHECK(ids.insert(f.id).second);
          CHECK(std::binary_search(f.cells.begin(), f.cells.end(),
                                   cell_of(f.nav_point.x, f.nav_point.y, 0.1)));
          for (const auto& c : f.cells) {
            CHECK(std::binary_search(bnd.begin(), bnd.end(), c));
            CHECK(seen.insert(c).second);
          }
        }
        const int a = static_cast<int>(rng() % 4);
        const MoveAction act = a < 2 ? MoveAction::Forward : (a == 2 ? MoveAction::TurnLeft : MoveAction::TurnRight);
        apply_step(s, st, act);
      }
    }
  }
}
