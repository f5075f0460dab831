#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bevqa/scene.hpp"
#include "bevqa/task.hpp"

namespace bevqa {

struct QAPair {
  std::string qa_id;
  std::string scene_id;
  FrameSequence sequence;
  TaskType task{TaskType::ObjectCount};
  std::string question;
  Answer answer;
  std::vector<std::string> refs;  // object ids backing the answer

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

struct GenConfig {
  double fps = kDefaultFps;
  double min_area_fraction = kDefaultMinAreaFraction;
  int max_attempts_per_item = 200;
};

/// Generates quota[task] items per task, spread uniformly (within one item
/// per cell) over the sequence lengths present. Answers are computed from
/// scene ground truth, so re-running the same geometric computation
/// reproduces them exactly. Deterministic in seed. Throws listing the
/// deficient task types when a quota cannot be met.
std::vector<QAPair> generate_qa(const SceneRecord& scene,
                                const std::vector<FrameSequence>& sequences,
                                const std::map<TaskType, int>& quota, std::uint64_t seed,
                                const GenConfig& cfg = {});

/// Builds the 2-4 shuffled options for a multiple-choice item: the truth
/// plus distractors drawn from the pool (other labels, or the complementary
/// relation terms). Throws when fewer than two distinct options exist.
std::vector<std::string> make_distractors(TaskType task, const std::string& truth,
                                          const std::vector<std::string>& pool,
                                          std::uint64_t seed);

// Ground-truth computations shared by the generator and the oracle answerer.
double object_size_truth(const SceneObject& obj);
double min_distance_truth(const SceneObject& a, const SceneObject& b);
VerticalClass vertical_truth(const SceneObject& a, const SceneObject& b);
DirectionClass horizontal_truth(const SceneRecord& scene, const FrameSequence& seq,
                                const SceneObject& target, double fps);
/// Label of the candidate whose BEV center is closest to the anchor's.
std::string relative_distance_truth(const SceneRecord& scene, const std::string& anchor_id,
                                    const std::vector<std::string>& candidate_ids);
/// Unique visible instances of the label across the sequence.
int object_count_truth(const SceneRecord& scene, const FrameSequence& seq,
                       const std::string& label, const GenConfig& cfg = {});

/// Fixed question template per task, with {a}/{b}/{label} slots filled in.
std::string question_text(TaskType task, const std::vector<std::string>& labels);

}  // namespace bevqa
