#include "bevqa/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bevqa/cot.hpp"

namespace bevqa {

namespace {

std::string fmt_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string fmt_box(const Box2& b) {
  return "[" + fmt_num(b.min.x) + "," + fmt_num(b.min.y) + "," + fmt_num(b.max.x) + "," +
         fmt_num(b.max.y) + "]";
}

}  // namespace

ojson qa_to_json(const QAPair& qa) {
  ojson j;
  j["qa_id"] = qa.qa_id;
  j["scene_id"] = qa.scene_id;
  j["frames"] = qa.sequence.frame_indices;
  j["task"] = to_string(qa.task);
  j["question"] = qa.question;
  ojson answer;
  if (qa.answer.kind == Answer::Kind::Choice) {
    answer["kind"] = "choice";
    answer["letter"] = std::string(1, qa.answer.letter);
    answer["options"] = qa.answer.options;
  } else {
    answer["kind"] = "numeric";
    answer["value"] = qa.answer.value;
    answer["unit"] = to_string(qa.answer.unit);
  }
  j["answer"] = std::move(answer);
  j["refs"] = qa.refs;
  return j;
}

QAPair qa_from_json(const ojson& j) {
  QAPair qa;
  qa.qa_id = j.at("qa_id").get<std::string>();
  qa.scene_id = j.at("scene_id").get<std::string>();
  qa.sequence.scene_id = qa.scene_id;
  qa.sequence.frame_indices = j.at("frames").get<std::vector<std::size_t>>();
  qa.task = task_from_string(j.at("task").get<std::string>());
  qa.question = j.at("question").get<std::string>();
  const ojson& answer = j.at("answer");
  const std::string kind = answer.at("kind").get<std::string>();
  if (kind == "choice") {
    const std::string letter = answer.at("letter").get<std::string>();
    if (letter.size() != 1) throw std::runtime_error("answer letter must be a single character");
    qa.answer = Answer::choice(letter[0], answer.at("options").get<std::vector<std::string>>());
  } else if (kind == "numeric") {
    qa.answer = Answer::numeric(answer.at("value").get<double>(),
                                unit_from_string(answer.at("unit").get<std::string>()));
  } else {
    throw std::runtime_error("unknown answer kind '" + kind + "'");
  }
  qa.refs = j.at("refs").get<std::vector<std::string>>();
  return qa;
}

void write_qa_file(const std::filesystem::path& path, const std::vector<QAPair>& items) {
  std::vector<ojson> lines;
  lines.reserve(items.size());
  for (const auto& qa : items) lines.push_back(qa_to_json(qa));
  write_jsonl(path, lines);
}

std::vector<QAPair> read_qa_file(const std::filesystem::path& path) {
  std::vector<QAPair> out;
  for (const auto& line : read_jsonl(path)) out.push_back(qa_from_json(line));
  return out;
}

void write_responses(const std::filesystem::path& path,
                     const std::vector<ResponseLine>& lines) {
  std::vector<ojson> rows;
  rows.reserve(lines.size());
  for (const auto& line : lines) {
    ojson j;
    j["qa_id"] = line.qa_id;
    j["raw"] = line.raw;
    rows.push_back(std::move(j));
  }
  write_jsonl(path, rows);
}

std::vector<ResponseLine> read_responses(const std::filesystem::path& path) {
  std::vector<ResponseLine> out;
  for (const auto& line : read_jsonl(path))
    out.push_back({line.at("qa_id").get<std::string>(), line.at("raw").get<std::string>()});
  return out;
}

std::vector<std::filesystem::path> scene_paths(const std::vector<std::filesystem::path>& args) {
  std::vector<std::filesystem::path> out;
  for (const auto& arg : args) {
    if (std::filesystem::is_directory(arg)) {
      std::vector<std::filesystem::path> dir_files;
      for (const auto& entry : std::filesystem::directory_iterator(arg))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
          dir_files.push_back(entry.path());
      std::sort(dir_files.begin(), dir_files.end());
      out.insert(out.end(), dir_files.begin(), dir_files.end());
    } else {
      out.push_back(arg);
    }
  }
  return out;
}

std::vector<SceneRecord> load_scenes(const std::vector<std::filesystem::path>& paths) {
  std::vector<SceneRecord> out;
  out.reserve(paths.size());
  for (const auto& path : paths) out.push_back(load_scene_file(path));
  return out;
}

std::map<std::string, SceneRecord> scenes_by_id(std::vector<SceneRecord> scenes) {
  std::map<std::string, SceneRecord> out;
  for (auto& scene : scenes) {
    const std::string id = scene.scene_id;
    if (!out.emplace(id, std::move(scene)).second)
      throw std::runtime_error("duplicate scene_id '" + id + "'");
  }
  return out;
}

namespace {

std::string oracle_think(const SceneRecord& scene, const QAPair& qa, const GenConfig& cfg,
                         std::string& answer_text) {
  switch (qa.task) {
    case TaskType::RelativeDistance: {
      const SceneObject& anchor = scene.object_by_id(qa.refs.at(0));
      const Box2 anchor_bev = bev_project(anchor.box);
      std::string think = "distances from " + anchor.label + ":";
      for (std::size_t i = 1; i < qa.refs.size(); ++i) {
        const SceneObject& cand = scene.object_by_id(qa.refs[i]);
        think += (i > 1 ? ", " : " ") + cand.label + "=" +
                 fmt_num(center_distance(anchor_bev, bev_project(cand.box))) + " m";
      }
      const std::string winner = relative_distance_truth(
          scene, qa.refs.at(0), {qa.refs.begin() + 1, qa.refs.end()});
      think += "; closest is the " + winner;
      const auto& options = qa.answer.options;
      const auto it = std::find(options.begin(), options.end(), winner);
      if (it == options.end()) throw std::runtime_error("oracle answer not among options");
      answer_text = std::string(1, static_cast<char>('A' + (it - options.begin())));
      return think;
    }
    case TaskType::VerticalDirection: {
      const SceneObject& a = scene.object_by_id(qa.refs.at(0));
      const SceneObject& b = scene.object_by_id(qa.refs.at(1));
      const std::string truth = to_string(vertical_truth(a, b));
      std::string think = a.label + " z-interval [" + fmt_num(a.box.min.z) + "," +
                          fmt_num(a.box.max.z) + "], " + b.label + " z-interval [" +
                          fmt_num(b.box.min.z) + "," + fmt_num(b.box.max.z) + "] -> " + truth;
      const auto& options = qa.answer.options;
      const auto it = std::find(options.begin(), options.end(), truth);
      if (it == options.end()) throw std::runtime_error("oracle answer not among options");
      answer_text = std::string(1, static_cast<char>('A' + (it - options.begin())));
      return think;
    }
    case TaskType::HorizontalDirection: {
      const SceneObject& target = scene.object_by_id(qa.refs.at(0));
      const std::string truth = to_string(horizontal_truth(scene, qa.sequence, target, cfg.fps));
      const Vec2 c = center(bev_project(target.box));
      std::string think = "target " + target.label + " center (" + fmt_num(c.x) + "," +
                          fmt_num(c.y) + ") relative to the final viewpoint -> " + truth;
      const auto& options = qa.answer.options;
      const auto it = std::find(options.begin(), options.end(), truth);
      if (it == options.end()) throw std::runtime_error("oracle answer not among options");
      answer_text = std::string(1, static_cast<char>('A' + (it - options.begin())));
      return think;
    }
    case TaskType::ObjectSize: {
      const SceneObject& target = scene.object_by_id(qa.refs.at(0));
      const auto [w, d] = dims(bev_project(target.box));
      const double size = object_size_truth(target);
      answer_text = fmt_num(size) + " m";
      return target.label + " bev box " + fmt_box(bev_project(target.box)) + "; width=" +
             fmt_num(w) + " m, depth=" + fmt_num(d) + " m; longest side = " + fmt_num(size) + " m";
    }
    case TaskType::MinDistance: {
      const SceneObject& a = scene.object_by_id(qa.refs.at(0));
      const SceneObject& b = scene.object_by_id(qa.refs.at(1));
      const double d = min_distance_truth(a, b);
      answer_text = fmt_num(d) + " m";
      return "boxes " + a.label + "=" + fmt_box(bev_project(a.box)) + " and " + b.label + "=" +
             fmt_box(bev_project(b.box)) + "; minimum gap = " + fmt_num(d) + " m";
    }
    default: {  // ObjectCount
      const SceneObject& sample = scene.object_by_id(qa.refs.at(0));
      const int n = object_count_truth(scene, qa.sequence, sample.label, cfg);
      answer_text = std::to_string(n);
      std::string think = "visible " + sample.label + " ids:";
      for (std::size_t i = 0; i < qa.refs.size(); ++i)
        think += (i > 0 ? ", " : " ") + qa.refs[i];
      think += " -> " + std::to_string(n);
      return think;
    }
  }
}

}  // namespace

std::string oracle_response(const SceneRecord& scene, const QAPair& qa, const GenConfig& cfg) {
  const LayoutMap layout =
      ground_truth_layout(scene, qa.sequence, {cfg.fps, cfg.min_area_fraction});
  std::string answer_text;
  const std::string think = oracle_think(scene, qa, cfg, answer_text);
  return "<map>" + serialize_map(layout) + "</map><think>" + think + "</think><answer>" +
         answer_text + "</answer>";
}

std::vector<ResponseLine> oracle_answers(const std::map<std::string, SceneRecord>& scenes,
                                         const std::vector<QAPair>& qa, const GenConfig& cfg) {
  std::vector<ResponseLine> out;
  out.reserve(qa.size());
  for (const auto& item : qa) {
    const auto it = scenes.find(item.scene_id);
    if (it == scenes.end())
      throw std::runtime_error("missing scene '" + item.scene_id + "' for " + item.qa_id);
    out.push_back({item.qa_id, oracle_response(it->second, item, cfg)});
  }
  return out;
}

ScoreOutcome score_responses(const std::vector<QAPair>& qa,
                             const std::vector<ResponseLine>& responses,
                             const RewardConfig& cfg) {
  cfg.validate();
  if (responses.empty()) throw std::runtime_error("responses file is empty");

  std::map<std::string, const QAPair*> by_id;
  for (const auto& item : qa)
    if (!by_id.emplace(item.qa_id, &item).second)
      throw std::runtime_error("duplicate qa_id '" + item.qa_id + "' in QA file");

  std::vector<std::string> unknown;
  for (const auto& resp : responses)
    if (!by_id.count(resp.qa_id)) unknown.push_back(resp.qa_id);
  if (!unknown.empty()) {
    std::string msg = "responses reference unknown qa_id(s):";
    for (const auto& id : unknown) msg += " " + id;
    throw std::runtime_error(msg);
  }

  ScoreOutcome outcome;
  outcome.items.reserve(responses.size());
  for (const auto& resp : responses) {
    const QAPair& item = *by_id.at(resp.qa_id);
    const RewardBreakdown b = score_response(item, resp.raw, cfg);
    outcome.items.push_back({item.qa_id, item.task, static_cast<int>(item.sequence.length()),
                             b.r_format, b.r_task, b.r_total});
  }
  outcome.report = build_report(outcome.items);
  return outcome;
}

void write_scored(const std::filesystem::path& path, const std::vector<ScoredItem>& items) {
  std::vector<ojson> lines;
  lines.reserve(items.size());
  for (const auto& item : items) {
    ojson j;
    j["qa_id"] = item.qa_id;
    j["r_format"] = item.r_format;
    j["r_task"] = item.r_task;
    j["r_total"] = item.r_total;
    lines.push_back(std::move(j));
  }
  write_jsonl(path, lines);
}

std::vector<ScoredItem> read_scored(const std::filesystem::path& path,
                                    const std::vector<QAPair>& qa) {
  std::map<std::string, const QAPair*> by_id;
  for (const auto& item : qa) by_id.emplace(item.qa_id, &item);

  std::vector<ScoredItem> out;
  for (const auto& line : read_jsonl(path)) {
    ScoredItem item;
    item.qa_id = line.at("qa_id").get<std::string>();
    const auto it = by_id.find(item.qa_id);
    if (it == by_id.end())
      throw std::runtime_error("scored line references unknown qa_id '" + item.qa_id + "'");
    item.task = it->second->task;
    item.length = static_cast<int>(it->second->sequence.length());
    item.r_format = line.at("r_format").get<int>();
    item.r_task = line.at("r_task").get<double>();
    item.r_total = line.at("r_total").get<double>();
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<ojson> advantage_lines(const std::vector<ScoredItem>& items,
                                   const RewardConfig& cfg) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> groups;
  for (const auto& item : items) {
    auto [it, inserted] = groups.try_emplace(item.qa_id);
    if (inserted) order.push_back(item.qa_id);
    it->second.push_back(item.r_total);
  }

  std::vector<ojson> out;
  for (const auto& id : order) {
    const auto& rewards = groups.at(id);
    if (rewards.size() < 2)
      throw std::runtime_error("group '" + id + "' has fewer than two responses");
    ojson j;
    j["query_id"] = id;
    j["rewards"] = rewards;
    j["advantages"] = group_advantages(rewards, cfg);
    out.push_back(std::move(j));
  }
  return out;
}

ojson parsed_response_json(const std::string& qa_id, const std::string& raw) {
  ojson j;
  j["qa_id"] = qa_id;
  if (check_format(raw)) {
    const StructuredResponse resp = parse_response(raw);
    j["map"] = resp.map ? ojson::parse(serialize_map(*resp.map)) : ojson(nullptr);
    j["think"] = resp.think ? ojson(*resp.think) : ojson(nullptr);
    j["answer"] = resp.answer;
  } else {
    j["map"] = nullptr;
    j["think"] = nullptr;
    j["answer"] = answer_block_or_whole(raw);
  }
  return j;
}

std::vector<ojson> map_eval_lines(const std::map<std::string, SceneRecord>& scenes,
                                  const std::vector<QAPair>& qa,
                                  const std::vector<ResponseLine>& responses,
                                  const RewardConfig& reward_cfg, const GenConfig& gen_cfg) {
  std::map<std::string, const QAPair*> by_id;
  for (const auto& item : qa) by_id.emplace(item.qa_id, &item);

  std::vector<ojson> out;
  for (const auto& resp : responses) {
    const auto qit = by_id.find(resp.qa_id);
    if (qit == by_id.end())
      throw std::runtime_error("response references unknown qa_id '" + resp.qa_id + "'");
    const QAPair& item = *qit->second;
    const auto sit = scenes.find(item.scene_id);
    if (sit == scenes.end())
      throw std::runtime_error("missing scene '" + item.scene_id + "' for " + item.qa_id);

    const LayoutMap gt = ground_truth_layout(sit->second, item.sequence,
                                             {gen_cfg.fps, gen_cfg.min_area_fraction});
    LayoutMap pred;  // empty when the response has no usable map
    if (check_format(resp.raw)) {
      const StructuredResponse parsed = parse_response(resp.raw);
      if (parsed.map) pred = *parsed.map;
    }
    const MapAccuracyReport rep = evaluate_map(pred, gt, reward_cfg);

    ojson j;
    j["qa_id"] = item.qa_id;
    j["size_acc"] = rep.size_acc;
    j["distance_acc"] = rep.distance_acc;
    j["angle_acc"] = rep.angle_acc;
    j["overall"] = rep.overall;
    j["matched"] = rep.matched;
    j["unmatched_pred"] = rep.unmatched_pred;
    j["unmatched_gt"] = rep.unmatched_gt;
    j["distance_degenerate"] = rep.distance_degenerate;
    j["angle_degenerate"] = rep.angle_degenerate;
    out.push_back(std::move(j));
  }
  return out;
}

ojson grid_to_json(const GridMap& grid) {
  ojson j;
  j["m"] = grid.m;
  j["extent"] = {grid.extent.min.x, grid.extent.min.y, grid.extent.max.x, grid.extent.max.y};
  j["cells"] = ojson::array();
  for (const auto& cell : grid.cells) {
    ojson c;
    c["label"] = cell.label;
    c["row"] = cell.row;
    c["col"] = cell.col;
    j["cells"].push_back(std::move(c));
  }
  return j;
}

}  // namespace bevqa
