#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bevqa/qa.hpp"
#include "bevqa/task.hpp"

namespace bevqa {

std::vector<double> default_thresholds();  // {0.50, 0.55, ..., 0.95}

struct RewardConfig {
  double alpha = 0.1;
  std::vector<double> thresholds = default_thresholds();
  double zero_truth_epsilon = 0.01;  // meters; absolute band when the truth is 0
  double clip_epsilon = 0.2;
  double std_floor = 1e-6;

  void validate() const;  // throws std::invalid_argument
};

struct RewardBreakdown {
  int r_format{0};       // 0 or 1
  double r_task{0.0};    // [0, 1]
  double r_total{0.0};   // alpha*r_format + (1-alpha)*r_task
  TaskType task{TaskType::ObjectCount};
};

// One scored response group: G responses to the same query, their rewards,
// normalized advantages, and (when a policy-ratio pass ran) the probability
// ratios feeding the clipped objective.
struct GroupRollout {
  std::string query_id;
  std::vector<std::string> responses;
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::optional<std::vector<double>> ratios;
};

/// 1 iff the response carries the three-block structure.
int format_reward(const std::string& raw);

/// Exact match on the option letter.
int mc_reward(char pred, char truth);

/// Mean indicator of relative error <= 1-theta over the threshold ladder;
/// truth 0 falls back to an absolute epsilon band. Non-finite predictions
/// score 0.
double num_reward(double pred, double truth, const RewardConfig& cfg = {});

RewardBreakdown combined_reward(int r_format, double r_task, const RewardConfig& cfg = {},
                                TaskType task = TaskType::ObjectCount);

/// Group-normalized advantages A_i = (R_i - mean) / max(popstd, std_floor).
/// A constant group yields exactly zero advantages. Requires G >= 2.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     const RewardConfig& cfg = {});

/// (1/G) * sum_i min(r_i * A_i, clip(r_i, 1-eps, 1+eps) * A_i).
double clipped_objective(std::span<const double> ratios, std::span<const double> advantages,
                         const RewardConfig& cfg = {});

/// End-to-end scoring of one raw response against its QA item: format reward
/// from the block structure, task reward from the extracted answer (answer
/// block or whole-text fallback for malformed responses), zero on extraction
/// failure. Total over arbitrary model text.
RewardBreakdown score_response(const QAPair& qa, const std::string& raw,
                               const RewardConfig& cfg = {});

}  // namespace bevqa
