#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bevqa/jsonl.hpp"
#include "bevqa/map_eval.hpp"
#include "bevqa/qa.hpp"
#include "bevqa/report.hpp"
#include "bevqa/reward.hpp"
#include "bevqa/scene.hpp"

namespace bevqa {

struct ResponseLine {
  std::string qa_id;
  std::string raw;
};

ojson qa_to_json(const QAPair& qa);
QAPair qa_from_json(const ojson& j);

void write_qa_file(const std::filesystem::path& path, const std::vector<QAPair>& items);
std::vector<QAPair> read_qa_file(const std::filesystem::path& path);

void write_responses(const std::filesystem::path& path, const std::vector<ResponseLine>& lines);
std::vector<ResponseLine> read_responses(const std::filesystem::path& path);

/// Expands files and directories (non-recursive *.json, sorted) into a scene
/// path list.
std::vector<std::filesystem::path> scene_paths(const std::vector<std::filesystem::path>& args);

/// Loads and validates scene files; throws naming the offending file.
std::vector<SceneRecord> load_scenes(const std::vector<std::filesystem::path>& paths);

std::map<std::string, SceneRecord> scenes_by_id(std::vector<SceneRecord> scenes);

/// Ground-truth-driven structured responses: the layout map of the sequence,
/// a templated think block showing the computation, and the exact answer.
std::string oracle_response(const SceneRecord& scene, const QAPair& qa,
                            const GenConfig& cfg = {});
std::vector<ResponseLine> oracle_answers(const std::map<std::string, SceneRecord>& scenes,
                                         const std::vector<QAPair>& qa,
                                         const GenConfig& cfg = {});

struct ScoreOutcome {
  std::vector<ScoredItem> items;  // response order
  BenchReport report;
};

/// Scores responses against their QA items. Throws when the response list is
/// empty or references unknown qa_ids (listing them).
ScoreOutcome score_responses(const std::vector<QAPair>& qa,
                             const std::vector<ResponseLine>& responses,
                             const RewardConfig& cfg = {});

void write_scored(const std::filesystem::path& path, const std::vector<ScoredItem>& items);
std::vector<ScoredItem> read_scored(const std::filesystem::path& path,
                                    const std::vector<QAPair>& qa);

/// Groups scored items by qa_id (first-appearance order) and computes the
/// normalized advantages per group. Every group needs at least two entries.
std::vector<ojson> advantage_lines(const std::vector<ScoredItem>& items,
                                   const RewardConfig& cfg = {});

/// Map-eval line per response: the predicted map (empty when absent or
/// malformed) scored against the sequence's ground-truth layout.
std::vector<ojson> map_eval_lines(const std::map<std::string, SceneRecord>& scenes,
                                  const std::vector<QAPair>& qa,
                                  const std::vector<ResponseLine>& responses,
                                  const RewardConfig& reward_cfg = {},
                                  const GenConfig& gen_cfg = {});

/// Parsed-response mirror of a raw response ({"qa_id","map","think","answer"}).
ojson parsed_response_json(const std::string& qa_id, const std::string& raw);

ojson grid_to_json(const GridMap& grid);

}  // namespace bevqa
