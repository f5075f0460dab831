#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "bevqa/geometry.hpp"
#include "bevqa/reward.hpp"

namespace bevqa {

// Correspondence between predicted and ground-truth objects: greedy
// nearest-center matching within each shared label, globally closest pair
// first, ties to the lower input index.
struct ObjectMatching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (pred index, gt index)
  std::size_t unmatched_pred{0};
  std::size_t unmatched_gt{0};
};

struct MapAccuracyReport {
  double size_acc{0.0};
  double distance_acc{0.0};
  double angle_acc{0.0};
  double overall{0.0};  // mean of the defined (non-degenerate) metrics
  std::size_t matched{0};
  std::size_t unmatched_pred{0};
  std::size_t unmatched_gt{0};
  // Pairwise metrics need two matched objects; below that they report 1 and
  // set their flag, and overall averages the remaining metrics only.
  bool distance_degenerate{false};
  bool angle_degenerate{false};
};

struct GridMap {
  struct Cell {
    std::string label;
    int row{0};
    int col{0};

    friend bool operator==(const Cell&, const Cell&) = default;
  };

  int m{0};
  Box2 extent;
  std::vector<Cell> cells;  // distinct (label, row, col) triples, input order
};

ObjectMatching match_objects(const LayoutMap& pred, const LayoutMap& gt);

/// Mean over the union of objects of the thresholded relative accuracy of
/// width and depth (averaged); unmatched objects contribute 0. Empty union
/// scores 1.
double size_accuracy(const ObjectMatching& matching, const LayoutMap& pred, const LayoutMap& gt,
                     const RewardConfig& cfg = {});

struct PairwiseMetric {
  double value{1.0};
  bool degenerate{false};
};

/// Thresholded relative accuracy of predicted vs true center distance over
/// all unordered matched pairs.
PairwiseMetric distance_accuracy(const ObjectMatching& matching, const LayoutMap& pred,
                                 const LayoutMap& gt, const RewardConfig& cfg = {});

/// 1 - delta/180 over all ordered matched pairs, where delta is the smallest
/// absolute bearing difference in [0, 180]. Pairs whose centers coincide in
/// either map are skipped.
PairwiseMetric angle_accuracy(const ObjectMatching& matching, const LayoutMap& pred,
                              const LayoutMap& gt);

MapAccuracyReport evaluate_map(const LayoutMap& pred, const LayoutMap& gt,
                               const RewardConfig& cfg = {});

/// Cell of a point: floor((c - extent.min) / extent_size * m), clamped to
/// [0, m-1]. Returned as {row, col} with row along y.
std::pair<int, int> grid_cell(const Vec2& c, int m, const Box2& extent);

/// Object centers snapped to an m x m grid over the extent. Exact duplicate
/// (label, row, col) triples collapse.
GridMap rasterize(const LayoutMap& map, int m, const Box2& extent);

/// World position of a cell's center.
Vec2 cell_center(int m, const Box2& extent, int row, int col);

/// Ground-truth map bounds expanded 5% per side; the default rasterization
/// window.
Box2 default_extent(const LayoutMap& gt);

}  // namespace bevqa
