#include "bevqa/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bevqa/cot.hpp"

namespace bevqa {

namespace {
// Slack on the dimensionless relative error so decimal thresholds behave as
// written (0.2/2.0 must count as exactly the 0.90 threshold).
constexpr double kRelErrorSlack = 1e-12;
}  // namespace

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.50 + 0.05 * i);
  return t;
}

void RewardConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (thresholds.empty()) throw std::invalid_argument("thresholds must be non-empty");
  double prev = 0.0;
  for (double t : thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("thresholds must lie in (0, 1)");
    if (t <= prev) throw std::invalid_argument("thresholds must strictly increase");
    prev = t;
  }
  if (!(clip_epsilon > 0.0)) throw std::invalid_argument("clip_epsilon must be positive");
  if (!(zero_truth_epsilon >= 0.0))
    throw std::invalid_argument("zero_truth_epsilon must be >= 0");
  if (!(std_floor > 0.0)) throw std::invalid_argument("std_floor must be positive");
}

int format_reward(const std::string& raw) { return check_format(raw) ? 1 : 0; }

int mc_reward(char pred, char truth) {
  if (pred < 'A' || pred > 'D' || truth < 'A' || truth > 'D')
    throw std::invalid_argument("choice letters must be A-D");
  return pred == truth ? 1 : 0;
}

double num_reward(double pred, double truth, const RewardConfig& cfg) {
  if (!(truth >= 0.0)) throw std::invalid_argument("numerical truth must be >= 0");
  if (!std::isfinite(pred)) return 0.0;
  if (truth == 0.0) return std::fabs(pred) <= cfg.zero_truth_epsilon ? 1.0 : 0.0;
  const double rel = std::fabs(pred - truth) / truth;
  std::size_t hit = 0;
  for (double theta : cfg.thresholds)
    if (rel <= 1.0 - theta + kRelErrorSlack) ++hit;
  return static_cast<double>(hit) / static_cast<double>(cfg.thresholds.size());
}

RewardBreakdown combined_reward(int r_format, double r_task, const RewardConfig& cfg,
                                TaskType task) {
  if (r_format != 0 && r_format != 1) throw std::invalid_argument("r_format must be 0 or 1");
  if (!(r_task >= 0.0 && r_task <= 1.0)) throw std::invalid_argument("r_task must lie in [0, 1]");
  RewardBreakdown b;
  b.r_format = r_format;
  b.r_task = r_task;
  b.r_total = cfg.alpha * r_format + (1.0 - cfg.alpha) * r_task;
  b.task = task;
  return b;
}

std::vector<double> group_advantages(std::span<const double> rewards, const RewardConfig& cfg) {
  const std::size_t g = rewards.size();
  if (g < 2) throw std::invalid_argument("advantage groups need at least two responses");

  const bool constant =
      std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; });
  if (constant) return std::vector<double>(g, 0.0);

  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) /
                      static_cast<double>(g);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(g);
  const double denom = std::max(std::sqrt(var), cfg.std_floor);

  std::vector<double> out;
  out.reserve(g);
  for (double r : rewards) out.push_back((r - mean) / denom);
  return out;
}

double clipped_objective(std::span<const double> ratios, std::span<const double> advantages,
                         const RewardConfig& cfg) {
  if (ratios.size() != advantages.size())
    throw std::invalid_argument("ratios and advantages must have equal length");
  if (ratios.empty()) throw std::invalid_argument("empty group");
  double sum = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double r = ratios[i];
    if (!(r > 0.0)) throw std::invalid_argument("policy ratios must be positive");
    const double clipped = std::clamp(r, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
    sum += std::min(r * advantages[i], clipped * advantages[i]);
  }
  return sum / static_cast<double>(ratios.size());
}

RewardBreakdown score_response(const QAPair& qa, const std::string& raw,
                               const RewardConfig& cfg) {
  const int rf = format_reward(raw);
  std::string answer_text;
  if (rf == 1) {
    answer_text = parse_response(raw).answer;
  } else {
    answer_text = answer_block_or_whole(raw);
  }

  double rt = 0.0;
  try {
    const ParsedAnswer parsed = extract_answer_text(answer_text, qa.task);
    if (qa.answer.kind == Answer::Kind::Choice) {
      rt = parsed.kind == ParsedAnswer::Kind::Choice ? mc_reward(parsed.letter, qa.answer.letter)
                                                     : 0.0;
    } else {
      rt = parsed.kind == ParsedAnswer::Kind::Numeric
               ? num_reward(parsed.value, qa.answer.value, cfg)
               : 0.0;
    }
  } catch (const std::invalid_argument&) {
    rt = 0.0;  // unparseable answer
  }
  return combined_reward(rf, rt, cfg, qa.task);
}

}  // namespace bevqa
