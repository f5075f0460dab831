#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "bevqa/task.hpp"

namespace bevqa {

struct ScoredItem {
  std::string qa_id;
  TaskType task{TaskType::ObjectCount};
  int length{1};  // frames in the item's sequence: 1, 4, 8, 12 or 16
  int r_format{0};
  double r_task{0.0};
  double r_total{0.0};
};

// Aggregate accuracy tables. Accuracy of an item is its task reward: exact
// match rate for multiple-choice items, the thresholded relative accuracy
// for numerical ones. Overall cells are item-count weighted means.
struct BenchReport {
  struct Cell {
    double sum{0.0};
    std::size_t n{0};

    void add(double v) {
      sum += v;
      ++n;
    }
    bool empty() const { return n == 0; }
    double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
  };

  static constexpr std::array<int, 5> kLengths = {1, 4, 8, 12, 16};
  static constexpr std::size_t kNumLengths = kLengths.size();
  static constexpr std::size_t kNumTasks = 6;

  std::array<Cell, kNumLengths> by_length_avg;
  std::array<Cell, kNumLengths> by_length_nq;
  std::array<Cell, kNumLengths> by_length_mcq;
  std::array<Cell, kNumTasks> by_task;
  std::array<std::array<Cell, kNumLengths>, kNumTasks> matrix;
  Cell overall, overall_nq, overall_mcq;

  static std::size_t length_column(int length);  // throws on unknown length
};

BenchReport build_report(const std::vector<ScoredItem>& items);

std::string render_text(const BenchReport& report);
std::string render_csv(const BenchReport& report);
std::string render_svg(const BenchReport& report);

}  // namespace bevqa
