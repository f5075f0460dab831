#include "bevqa/map_eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace bevqa {

namespace {

constexpr double kCoincidentEps = 1e-12;

double pair_distance(const LayoutMap& m, std::size_t i, std::size_t j) {
  return center_distance(m.objects[i].box, m.objects[j].box);
}

}  // namespace

ObjectMatching match_objects(const LayoutMap& pred, const LayoutMap& gt) {
  validate(pred);
  validate(gt);

  struct Candidate {
    double dist;
    std::size_t pred_index;
    std::size_t gt_index;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < pred.objects.size(); ++i)
    for (std::size_t j = 0; j < gt.objects.size(); ++j)
      if (pred.objects[i].label == gt.objects[j].label)
        candidates.push_back({center_distance(pred.objects[i].box, gt.objects[j].box), i, j});

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.dist, a.pred_index, a.gt_index) <
           std::tie(b.dist, b.pred_index, b.gt_index);
  });

  ObjectMatching out;
  std::vector<bool> pred_used(pred.objects.size(), false);
  std::vector<bool> gt_used(gt.objects.size(), false);
  for (const Candidate& c : candidates) {
    if (pred_used[c.pred_index] || gt_used[c.gt_index]) continue;
    pred_used[c.pred_index] = true;
    gt_used[c.gt_index] = true;
    out.pairs.emplace_back(c.pred_index, c.gt_index);
  }
  out.unmatched_pred = pred.objects.size() - out.pairs.size();
  out.unmatched_gt = gt.objects.size() - out.pairs.size();
  return out;
}

double size_accuracy(const ObjectMatching& matching, const LayoutMap& pred, const LayoutMap& gt,
                     const RewardConfig& cfg) {
  const std::size_t universe =
      matching.pairs.size() + matching.unmatched_pred + matching.unmatched_gt;
  if (universe == 0) return 1.0;

  double sum = 0.0;
  for (const auto& [pi, gi] : matching.pairs) {
    const auto [pw, pd] = dims(pred.objects[pi].box);
    const auto [gw, gd] = dims(gt.objects[gi].box);
    sum += (num_reward(pw, gw, cfg) + num_reward(pd, gd, cfg)) / 2.0;
  }
  return sum / static_cast<double>(universe);
}

PairwiseMetric distance_accuracy(const ObjectMatching& matching, const LayoutMap& pred,
                                 const LayoutMap& gt, const RewardConfig& cfg) {
  const std::size_t n = matching.pairs.size();
  if (n < 2) return {1.0, true};

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double dp = pair_distance(pred, matching.pairs[a].first, matching.pairs[b].first);
      const double dg = pair_distance(gt, matching.pairs[a].second, matching.pairs[b].second);
      sum += num_reward(dp, dg, cfg);
      ++count;
    }
  }
  return {sum / static_cast<double>(count), false};
}

PairwiseMetric angle_accuracy(const ObjectMatching& matching, const LayoutMap& pred,
                              const LayoutMap& gt) {
  const std::size_t n = matching.pairs.size();
  if (n < 2) return {1.0, true};

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const Vec2 p1 = center(pred.objects[matching.pairs[a].first].box);
      const Vec2 p2 = center(pred.objects[matching.pairs[b].first].box);
      const Vec2 g1 = center(gt.objects[matching.pairs[a].second].box);
      const Vec2 g2 = center(gt.objects[matching.pairs[b].second].box);
      if (std::hypot(p2.x - p1.x, p2.y - p1.y) < kCoincidentEps) continue;
      if (std::hypot(g2.x - g1.x, g2.y - g1.y) < kCoincidentEps) continue;
      double delta = std::fabs(bearing(p1, p2) - bearing(g1, g2));
      if (delta > 180.0) delta = 360.0 - delta;
      sum += 1.0 - delta / 180.0;
      ++count;
    }
  }
  if (count == 0) return {1.0, true};
  return {sum / static_cast<double>(count), false};
}

MapAccuracyReport evaluate_map(const LayoutMap& pred, const LayoutMap& gt,
                               const RewardConfig& cfg) {
  const ObjectMatching matching = match_objects(pred, gt);
  const double size = size_accuracy(matching, pred, gt, cfg);
  const PairwiseMetric dist = distance_accuracy(matching, pred, gt, cfg);
  const PairwiseMetric angle = angle_accuracy(matching, pred, gt);

  MapAccuracyReport report;
  report.size_acc = size;
  report.distance_acc = dist.value;
  report.angle_acc = angle.value;
  report.matched = matching.pairs.size();
  report.unmatched_pred = matching.unmatched_pred;
  report.unmatched_gt = matching.unmatched_gt;
  report.distance_degenerate = dist.degenerate;
  report.angle_degenerate = angle.degenerate;

  double sum = size;
  int defined = 1;
  if (!dist.degenerate) {
    sum += dist.value;
    ++defined;
  }
  if (!angle.degenerate) {
    sum += angle.value;
    ++defined;
  }
  report.overall = sum / defined;
  return report;
}

std::pair<int, int> grid_cell(const Vec2& c, int m, const Box2& extent) {
  if (m < 1) throw std::invalid_argument("grid resolution must be >= 1");
  const auto [w, d] = dims(extent);
  if (!(w > 0.0) || !(d > 0.0)) throw std::invalid_argument("extent must have positive area");
  const auto clamp_cell = [m](double v) {
    const int cell = static_cast<int>(std::floor(v));
    return std::clamp(cell, 0, m - 1);
  };
  const int col = clamp_cell((c.x - extent.min.x) / w * m);
  const int row = clamp_cell((c.y - extent.min.y) / d * m);
  return {row, col};
}

GridMap rasterize(const LayoutMap& map, int m, const Box2& extent) {
  validate(map);
  GridMap grid;
  grid.m = m;
  grid.extent = extent;
  for (const auto& obj : map.objects) {
    const auto [row, col] = grid_cell(center(obj.box), m, extent);
    GridMap::Cell cell{obj.label, row, col};
    if (std::find(grid.cells.begin(), grid.cells.end(), cell) == grid.cells.end())
      grid.cells.push_back(std::move(cell));
  }
  return grid;
}

Vec2 cell_center(int m, const Box2& extent, int row, int col) {
  const auto [w, d] = dims(extent);
  return {extent.min.x + (col + 0.5) / m * w, extent.min.y + (row + 0.5) / m * d};
}

Box2 default_extent(const LayoutMap& gt) {
  if (gt.objects.empty()) throw std::invalid_argument("cannot derive an extent from an empty map");
  Box2 bounds = gt.objects.front().box;
  for (const auto& obj : gt.objects) {
    bounds.min.x = std::min(bounds.min.x, obj.box.min.x);
    bounds.min.y = std::min(bounds.min.y, obj.box.min.y);
    bounds.max.x = std::max(bounds.max.x, obj.box.max.x);
    bounds.max.y = std::max(bounds.max.y, obj.box.max.y);
  }
  const auto [w, d] = dims(bounds);
  const double px = std::max(w, 1e-3) * 0.05;
  const double py = std::max(d, 1e-3) * 0.05;
  return {{bounds.min.x - px, bounds.min.y - py}, {bounds.max.x + px, bounds.max.y + py}};
}

}  // namespace bevqa
