#include "bevqa/qa.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "bevqa/rng.hpp"

namespace bevqa {

namespace {

const std::vector<std::string> kVerticalTerms = {"above", "below", "same level"};
const std::vector<std::string> kHorizontalTerms = {"front", "behind", "left", "right"};

std::vector<std::string> options_with_truth(const std::string& truth,
                                            const std::vector<std::string>& pool,
                                            std::size_t max_options, Rng& rng) {
  std::vector<std::string> distractors;
  std::set<std::string> seen = {truth};
  for (const auto& candidate : pool)
    if (seen.insert(candidate).second) distractors.push_back(candidate);
  if (distractors.empty())
    throw std::runtime_error("option pool too small: need at least one distractor");

  rng.shuffle(distractors);
  std::vector<std::string> options = {truth};
  for (const auto& d : distractors) {
    if (options.size() >= max_options) break;
    options.push_back(d);
  }
  rng.shuffle(options);
  return options;
}

char letter_of(const std::vector<std::string>& options, const std::string& truth) {
  const auto it = std::find(options.begin(), options.end(), truth);
  return static_cast<char>('A' + (it - options.begin()));
}

// Visible object ids across the sequence, resolved through the resampled
// frame positions.
std::set<std::string> visible_in_sequence(const SceneRecord& scene, const FrameSequence& seq,
                                          const GenConfig& cfg) {
  const std::vector<std::size_t> frames = resample_indices(scene.trajectory, cfg.fps);
  std::set<std::string> visible;
  for (std::size_t pos : seq.frame_indices) {
    if (pos >= frames.size())
      throw std::out_of_range("sequence position out of range in scene " + scene.scene_id);
    const auto ids = frame_visibility(scene, frames[pos], cfg.min_area_fraction);
    visible.insert(ids.begin(), ids.end());
  }
  return visible;
}

// Instances whose label occurs exactly once among the visible set; questions
// can then name them unambiguously.
std::vector<const SceneObject*> uniquely_labeled(const SceneRecord& scene,
                                                 const std::set<std::string>& visible) {
  std::map<std::string, int> label_count;
  for (const auto& obj : scene.objects)
    if (visible.count(obj.id)) ++label_count[obj.label];
  std::vector<const SceneObject*> out;
  for (const auto& obj : scene.objects)
    if (visible.count(obj.id) && label_count[obj.label] == 1) out.push_back(&obj);
  return out;
}

struct ItemDraw {
  QAPair qa;
  bool ok = false;
};

}  // namespace

std::string question_text(TaskType task, const std::vector<std::string>& labels) {
  switch (task) {
    case TaskType::RelativeDistance:
      return "Which of these objects is closest to the " + labels.at(0) + "?";
    case TaskType::VerticalDirection:
      return "Is the " + labels.at(0) + " above, below, or at the same level as the " +
             labels.at(1) + "?";
    case TaskType::HorizontalDirection:
      return "From your viewpoint at the final frame, in which direction is the " +
             labels.at(0) + "?";
    case TaskType::ObjectSize:
      return "What is the longest horizontal side of the " + labels.at(0) + ", in meters?";
    case TaskType::MinDistance:
      return "What is the minimum distance between the " + labels.at(0) + " and the " +
             labels.at(1) + ", in meters?";
    default:
      return "How many instances of " + labels.at(0) + " are visible across the clip?";
  }
}

double object_size_truth(const SceneObject& obj) {
  const auto [w, d] = dims(bev_project(obj.box));
  return std::max(w, d);
}

double min_distance_truth(const SceneObject& a, const SceneObject& b) {
  return min_box_distance(bev_project(a.box), bev_project(b.box));
}

VerticalClass vertical_truth(const SceneObject& a, const SceneObject& b) {
  return vertical_relation(a.box, b.box);
}

DirectionClass horizontal_truth(const SceneRecord& scene, const FrameSequence& seq,
                                const SceneObject& target, double fps) {
  const std::vector<std::size_t> frames = resample_indices(scene.trajectory, fps);
  const std::size_t pos = seq.frame_indices.back();
  if (pos >= frames.size())
    throw std::out_of_range("sequence position out of range in scene " + scene.scene_id);
  const ObserverFrame frame = observer_at(scene.trajectory[frames[pos]]);
  return relative_direction(frame, center(bev_project(target.box)));
}

std::string relative_distance_truth(const SceneRecord& scene, const std::string& anchor_id,
                                    const std::vector<std::string>& candidate_ids) {
  const SceneObject& anchor = scene.object_by_id(anchor_id);
  const Box2 anchor_bev = bev_project(anchor.box);
  double best = 0.0;
  const SceneObject* winner = nullptr;
  for (const auto& id : candidate_ids) {
    const SceneObject& cand = scene.object_by_id(id);
    const double d = center_distance(anchor_bev, bev_project(cand.box));
    if (!winner || d < best) {
      best = d;
      winner = &cand;
    }
  }
  if (!winner) throw std::invalid_argument("no candidates for relative distance");
  return winner->label;
}

int object_count_truth(const SceneRecord& scene, const FrameSequence& seq,
                       const std::string& label, const GenConfig& cfg) {
  const auto visible = visible_in_sequence(scene, seq, cfg);
  int n = 0;
  for (const auto& obj : scene.objects)
    if (obj.label == label && visible.count(obj.id)) ++n;
  return n;
}

std::vector<std::string> make_distractors(TaskType task, const std::string& truth,
                                          const std::vector<std::string>& pool,
                                          std::uint64_t seed) {
  Rng rng(seed);
  switch (task) {
    case TaskType::VerticalDirection:
      return options_with_truth(truth, kVerticalTerms, 3, rng);
    case TaskType::HorizontalDirection:
      return options_with_truth(truth, kHorizontalTerms, 4, rng);
    case TaskType::RelativeDistance:
      return options_with_truth(truth, pool, 4, rng);
    default:
      throw std::invalid_argument("distractors only apply to multiple-choice tasks");
  }
}

namespace {

// One generation attempt for a given task and sequence. Failure (not enough
// suitable objects, ties, degenerate geometry) is reported through ok=false
// and the caller redraws.
ItemDraw try_item(const SceneRecord& scene, const FrameSequence& seq, TaskType task, Rng& rng,
                  const GenConfig& cfg) {
  ItemDraw draw;
  const auto visible = visible_in_sequence(scene, seq, cfg);
  if (visible.empty()) return draw;
  QAPair& qa = draw.qa;
  qa.scene_id = scene.scene_id;
  qa.sequence = seq;
  qa.task = task;

  const auto unique_objs = uniquely_labeled(scene, visible);

  switch (task) {
    case TaskType::RelativeDistance: {
      if (unique_objs.size() < 3) return draw;
      std::vector<const SceneObject*> picks = unique_objs;
      rng.shuffle(picks);
      const SceneObject* anchor = picks[0];
      const std::size_t n_candidates =
          std::min<std::size_t>(picks.size() - 1, 2 + rng.below(3));  // 2..4
      std::vector<std::string> candidate_ids;
      std::vector<std::string> candidate_labels;
      for (std::size_t i = 1; i <= n_candidates; ++i) {
        candidate_ids.push_back(picks[i]->id);
        candidate_labels.push_back(picks[i]->label);
      }
      // Require a strict closest candidate.
      const Box2 anchor_bev = bev_project(anchor->box);
      std::vector<double> dists;
      for (const auto& id : candidate_ids)
        dists.push_back(center_distance(anchor_bev, bev_project(scene.object_by_id(id).box)));
      const auto min_it = std::min_element(dists.begin(), dists.end());
      if (std::count(dists.begin(), dists.end(), *min_it) != 1) return draw;
      const std::string truth = relative_distance_truth(scene, anchor->id, candidate_ids);

      std::vector<std::string> options = {truth};
      for (const auto& lab : candidate_labels)
        if (lab != truth) options.push_back(lab);
      rng.shuffle(options);
      qa.question = question_text(task, {anchor->label});
      qa.answer = Answer::choice(letter_of(options, truth), options);
      qa.refs.push_back(anchor->id);
      qa.refs.insert(qa.refs.end(), candidate_ids.begin(), candidate_ids.end());
      break;
    }
    case TaskType::VerticalDirection: {
      if (unique_objs.size() < 2) return draw;
      const std::size_t i = rng.below(unique_objs.size());
      std::size_t j = rng.below(unique_objs.size() - 1);
      if (j >= i) ++j;
      const SceneObject* a = unique_objs[i];
      const SceneObject* b = unique_objs[j];
      const std::string truth = to_string(vertical_truth(*a, *b));
      auto options = options_with_truth(truth, kVerticalTerms, 3, rng);
      qa.question = question_text(task, {a->label, b->label});
      qa.answer = Answer::choice(letter_of(options, truth), options);
      qa.refs = {a->id, b->id};
      break;
    }
    case TaskType::HorizontalDirection: {
      if (unique_objs.empty()) return draw;
      const SceneObject* target = unique_objs[rng.below(unique_objs.size())];
      DirectionClass dir;
      try {
        dir = horizontal_truth(scene, seq, *target, cfg.fps);
      } catch (const std::invalid_argument&) {
        return draw;  // target coincides with the camera
      }
      const std::string truth = to_string(dir);
      auto options = options_with_truth(truth, kHorizontalTerms, 4, rng);
      qa.question = question_text(task, {target->label});
      qa.answer = Answer::choice(letter_of(options, truth), options);
      qa.refs = {target->id};
      break;
    }
    case TaskType::ObjectSize: {
      if (unique_objs.empty()) return draw;
      const SceneObject* target = unique_objs[rng.below(unique_objs.size())];
      qa.question = question_text(task, {target->label});
      qa.answer = Answer::numeric(object_size_truth(*target), AnswerUnit::Meters);
      qa.refs = {target->id};
      break;
    }
    case TaskType::MinDistance: {
      if (unique_objs.size() < 2) return draw;
      const std::size_t i = rng.below(unique_objs.size());
      std::size_t j = rng.below(unique_objs.size() - 1);
      if (j >= i) ++j;
      const SceneObject* a = unique_objs[i];
      const SceneObject* b = unique_objs[j];
      qa.question = question_text(task, {a->label, b->label});
      qa.answer = Answer::numeric(min_distance_truth(*a, *b), AnswerUnit::Meters);
      qa.refs = {a->id, b->id};
      break;
    }
    default: {  // ObjectCount
      std::vector<std::string> labels;
      std::set<std::string> seen;
      for (const auto& obj : scene.objects)
        if (visible.count(obj.id) && seen.insert(obj.label).second) labels.push_back(obj.label);
      if (labels.empty()) return draw;
      const std::string label = labels[rng.below(labels.size())];
      std::vector<std::string> ids;
      for (const auto& obj : scene.objects)
        if (obj.label == label && visible.count(obj.id)) ids.push_back(obj.id);
      qa.question = question_text(task, {label});
      qa.answer = Answer::numeric(static_cast<double>(ids.size()), AnswerUnit::Count);
      qa.refs = ids;
      break;
    }
  }
  draw.ok = true;
  return draw;
}

}  // namespace

std::vector<QAPair> generate_qa(const SceneRecord& scene,
                                const std::vector<FrameSequence>& sequences,
                                const std::map<TaskType, int>& quota, std::uint64_t seed,
                                const GenConfig& cfg) {
  // Bucket sequences by length, ascending.
  std::map<std::size_t, std::vector<const FrameSequence*>> by_length;
  for (const auto& seq : sequences) {
    if (!is_sequence_length(static_cast<int>(seq.length())))
      throw std::invalid_argument("sequence with unsupported length " +
                                  std::to_string(seq.length()));
    by_length[seq.length()].push_back(&seq);
  }
  if (by_length.empty() && !quota.empty()) {
    for (const auto& [task, n] : quota)
      if (n > 0) throw std::runtime_error("quota not achievable: no sequences supplied");
  }

  Rng rng(seed);
  std::vector<QAPair> out;
  std::vector<std::string> deficient;

  for (TaskType task : kAllTasks) {
    const auto it = quota.find(task);
    if (it == quota.end() || it->second <= 0) continue;
    const int want = it->second;

    // Spread the quota over present lengths, first cells taking the remainder.
    const int n_lengths = static_cast<int>(by_length.size());
    const int base = want / n_lengths;
    const int rem = want % n_lengths;

    int cell_index = 0;
    int emitted_for_task = 0;
    for (const auto& [length, seqs] : by_length) {
      const int cell_quota = base + (cell_index < rem ? 1 : 0);
      ++cell_index;
      for (int k = 0; k < cell_quota; ++k) {
        bool done = false;
        for (int attempt = 0; attempt < cfg.max_attempts_per_item && !done; ++attempt) {
          const FrameSequence& seq = *seqs[rng.below(seqs.size())];
          ItemDraw draw = try_item(scene, seq, task, rng, cfg);
          if (!draw.ok) continue;
          draw.qa.qa_id = scene.scene_id + "-" + to_string(task) + "-L" + std::to_string(length) +
                          "-" + std::to_string(k);
          out.push_back(std::move(draw.qa));
          ++emitted_for_task;
          done = true;
        }
        if (!done) break;
      }
    }
    if (emitted_for_task < want) deficient.push_back(to_string(task));
  }

  if (!deficient.empty()) {
    std::string msg = "quota not achievable for task(s): ";
    for (std::size_t i = 0; i < deficient.size(); ++i) {
      if (i > 0) msg += ", ";
      msg += deficient[i];
    }
    throw std::runtime_error(msg);
  }
  return out;
}

}  // namespace bevqa
