#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bevqa/client.hpp"
#include "bevqa/cot.hpp"
#include "bevqa/pipeline.hpp"
#include "bevqa/rng.hpp"

namespace fs = std::filesystem;
using namespace bevqa;

namespace {

std::map<TaskType, int> parse_quota(const std::vector<std::string>& specs) {
  std::map<TaskType, int> quota;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--quota", "expected task=N, got '" + spec + "'");
    const TaskType task = task_from_string(spec.substr(0, eq));
    quota[task] = std::stoi(spec.substr(eq + 1));
  }
  return quota;
}

RewardConfig reward_config_from(double alpha, const std::vector<double>& thresholds,
                                double zero_eps, double clip_eps, double std_floor) {
  RewardConfig cfg;
  cfg.alpha = alpha;
  if (!thresholds.empty()) cfg.thresholds = thresholds;
  cfg.zero_truth_epsilon = zero_eps;
  cfg.clip_epsilon = clip_eps;
  cfg.std_floor = std_floor;
  cfg.validate();
  return cfg;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? v : fallback;
}

void print_histogram(const std::vector<QAPair>& items) {
  std::map<std::string, std::map<std::size_t, int>> hist;
  for (const auto& qa : items) hist[to_string(qa.task)][qa.sequence.length()]++;
  std::cerr << "generated " << items.size() << " items\n";
  for (const auto& [task, lengths] : hist) {
    std::cerr << "  " << task << ":";
    for (const auto& [len, n] : lengths) std::cerr << " L" << len << "=" << n;
    std::cerr << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metric-grounded BEV layout QA toolkit"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate scene files");
  std::vector<fs::path> ingest_inputs;
  fs::path ingest_out;
  ingest->add_option("paths", ingest_inputs, "scene files or directories")->required();
  ingest->add_option("--out", ingest_out, "write normalized copies into this directory");

  // gen-qa
  auto* gen = app.add_subcommand("gen-qa", "generate QA items from scenes");
  std::vector<fs::path> gen_scenes;
  fs::path gen_out;
  std::uint64_t gen_seed = 0;
  std::vector<std::string> gen_quota_specs;
  std::vector<int> gen_lengths(kSequenceLengths.begin(), kSequenceLengths.end());
  int gen_per_length = 2;
  double gen_fps = kDefaultFps;
  double gen_min_area = kDefaultMinAreaFraction;
  gen->add_option("--scenes", gen_scenes, "scene files or directories")->required();
  gen->add_option("--out", gen_out, "QA JSONL output path")->required();
  gen->add_option("--seed", gen_seed, "generation seed");
  gen->add_option("--quota", gen_quota_specs, "per-scene quota, task=N (repeatable)");
  gen->add_option("--lengths", gen_lengths, "sequence lengths to sample");
  gen->add_option("--per-length", gen_per_length, "sequences drawn per length");
  gen->add_option("--fps", gen_fps, "resampling rate, frames per second");
  gen->add_option("--min-area", gen_min_area, "visibility area fraction threshold");

  // oracle-answer
  auto* oracle = app.add_subcommand("oracle-answer", "emit ground-truth structured responses");
  fs::path oracle_qa, oracle_out;
  std::vector<fs::path> oracle_scenes;
  double oracle_fps = kDefaultFps;
  double oracle_min_area = kDefaultMinAreaFraction;
  oracle->add_option("--qa", oracle_qa, "QA JSONL input")->required();
  oracle->add_option("--scenes", oracle_scenes, "scene files or directories")->required();
  oracle->add_option("--out", oracle_out, "responses JSONL output")->required();
  oracle->add_option("--fps", oracle_fps, "resampling rate used at generation time");
  oracle->add_option("--min-area", oracle_min_area, "visibility threshold used at generation time");

  // score
  auto* score = app.add_subcommand("score", "score responses and print the report");
  fs::path score_qa, score_responses_path, score_out, score_csv;
  double alpha = 0.1, zero_eps = 0.01, clip_eps = 0.2, std_floor = 1e-6;
  std::vector<double> thresholds;
  score->add_option("--qa", score_qa, "QA JSONL input")->required();
  score->add_option("--responses", score_responses_path, "responses JSONL input")->required();
  score->add_option("--out", score_out, "scored JSONL output");
  score->add_option("--csv", score_csv, "write the report as CSV");
  score->add_option("--alpha", alpha, "format reward weight");
  score->add_option("--thresholds", thresholds, "confidence threshold ladder");
  score->add_option("--zero-eps", zero_eps, "absolute band for zero truths");

  // eval-map
  auto* emap = app.add_subcommand("eval-map", "score predicted layout maps");
  fs::path emap_qa, emap_responses, emap_out, emap_parsed;
  std::vector<fs::path> emap_scenes;
  double emap_fps = kDefaultFps, emap_min_area = kDefaultMinAreaFraction;
  emap->add_option("--qa", emap_qa, "QA JSONL input")->required();
  emap->add_option("--responses", emap_responses, "responses JSONL input")->required();
  emap->add_option("--scenes", emap_scenes, "scene files or directories")->required();
  emap->add_option("--out", emap_out, "map accuracy JSONL output")->required();
  emap->add_option("--parsed-out", emap_parsed, "also write parsed responses JSONL");
  emap->add_option("--fps", emap_fps, "resampling rate used at generation time");
  emap->add_option("--min-area", emap_min_area, "visibility threshold used at generation time");

  // rasterize
  auto* rast = app.add_subcommand("rasterize", "snap a layout map onto a grid");
  fs::path rast_map, rast_out;
  int grid_m = 10;
  std::vector<double> rast_extent;
  rast->add_option("--map", rast_map, "layout map JSON (map grammar)")->required();
  rast->add_option("--out", rast_out, "grid map JSON output")->required();
  rast->add_option("--grid-m", grid_m, "grid resolution");
  rast->add_option("--extent", rast_extent, "xmin ymin xmax ymax world window")
      ->expected(4);

  // advantage
  auto* adv = app.add_subcommand("advantage", "group-normalized advantages from scored output");
  fs::path adv_qa, adv_scored, adv_out;
  double adv_std_floor = 1e-6;
  adv->add_option("--qa", adv_qa, "QA JSONL input")->required();
  adv->add_option("--scored", adv_scored, "scored JSONL input")->required();
  adv->add_option("--out", adv_out, "advantage JSONL output")->required();
  adv->add_option("--std-floor", adv_std_floor, "floor on the group standard deviation");

  // query
  auto* query = app.add_subcommand("query", "batch-query a chat-completions endpoint");
  fs::path query_qa, query_out, query_images, query_template;
  ClientConfig client_cfg;
  bool dry_run = false;
  query->add_option("--qa", query_qa, "QA JSONL input")->required();
  query->add_option("--out", query_out, "responses JSONL output")->required();
  query->add_option("--base-url", client_cfg.base_url,
                    "endpoint base URL (default: env OPENAI_BASE_URL)");
  query->add_option("--model", client_cfg.model_name, "model name");
  query->add_option("--temperature", client_cfg.temperature, "sampling temperature");
  query->add_option("--max-tokens", client_cfg.max_output_tokens, "max output tokens");
  query->add_option("--max-parallel", client_cfg.max_parallel, "in-flight request cap");
  query->add_option("--images-dir", query_images,
                    "root of <scene_id>/frame_NNNNNN images to attach");
  query->add_option("--prompt-template", query_template, "file with {question}/{options} slots");
  query->add_flag("--dry-run", dry_run, "answer offline with deterministic canned responses");

  // report
  auto* rep = app.add_subcommand("report", "re-render the aggregate report from scored output");
  fs::path rep_qa, rep_scored, rep_csv, rep_svg;
  rep->add_option("--qa", rep_qa, "QA JSONL input")->required();
  rep->add_option("--scored", rep_scored, "scored JSONL input")->required();
  rep->add_option("--csv", rep_csv, "write the report as CSV");
  rep->add_option("--svg", rep_svg, "write a bar chart SVG");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const auto paths = scene_paths(ingest_inputs);
      if (paths.empty()) throw std::runtime_error("no scene files found");
      if (!ingest_out.empty()) fs::create_directories(ingest_out);
      for (const auto& path : paths) {
        SceneRecord rec;
        try {
          rec = load_scene_file(path);
        } catch (const std::exception& e) {
          std::cerr << "invalid scene file " << path << ": " << e.what() << "\n";
          return 1;
        }
        std::cout << path.string() << ": ok (" << rec.objects.size() << " objects, "
                  << rec.trajectory.size() << " poses)\n";
        if (!ingest_out.empty())
          spit(ingest_out / (rec.scene_id + ".json"), serialize_scene(rec));
      }
      std::cout << paths.size() << " scene(s) valid\n";
      return 0;
    }

    if (*gen) {
      const auto scenes = load_scenes(scene_paths(gen_scenes));
      if (scenes.empty()) throw std::runtime_error("no scene files found");
      std::map<TaskType, int> quota = parse_quota(gen_quota_specs);
      if (quota.empty())
        for (TaskType t : kAllTasks) quota[t] = 5;  // one per length by default
      std::vector<QAPair> all;
      for (const auto& scene : scenes) {
        const std::uint64_t scene_seed = gen_seed ^ fnv1a64(scene.scene_id);
        SamplerConfig sampler{gen_fps, gen_min_area};
        const auto sequences =
            sample_sequences(scene, gen_lengths, gen_per_length, scene_seed, sampler);
        GenConfig gen_cfg;
        gen_cfg.fps = gen_fps;
        gen_cfg.min_area_fraction = gen_min_area;
        auto items = generate_qa(scene, sequences, quota, scene_seed + 1, gen_cfg);
        all.insert(all.end(), items.begin(), items.end());
      }
      write_qa_file(gen_out, all);
      print_histogram(all);
      return 0;
    }

    if (*oracle) {
      const auto qa = read_qa_file(oracle_qa);
      const auto scenes = scenes_by_id(load_scenes(scene_paths(oracle_scenes)));
      GenConfig cfg;
      cfg.fps = oracle_fps;
      cfg.min_area_fraction = oracle_min_area;
      write_responses(oracle_out, oracle_answers(scenes, qa, cfg));
      return 0;
    }

    if (*score) {
      const RewardConfig cfg =
          reward_config_from(alpha, thresholds, zero_eps, clip_eps, std_floor);
      const auto qa = read_qa_file(score_qa);
      const auto responses = read_responses(score_responses_path);
      const ScoreOutcome outcome = score_responses(qa, responses, cfg);
      if (!score_out.empty()) write_scored(score_out, outcome.items);
      if (!score_csv.empty()) spit(score_csv, render_csv(outcome.report));
      std::cout << render_text(outcome.report);
      return 0;
    }

    if (*emap) {
      const auto qa = read_qa_file(emap_qa);
      const auto responses = read_responses(emap_responses);
      const auto scenes = scenes_by_id(load_scenes(scene_paths(emap_scenes)));
      GenConfig cfg;
      cfg.fps = emap_fps;
      cfg.min_area_fraction = emap_min_area;
      write_jsonl(emap_out, map_eval_lines(scenes, qa, responses, RewardConfig{}, cfg));
      if (!emap_parsed.empty()) {
        std::vector<ojson> parsed;
        for (const auto& resp : responses)
          parsed.push_back(parsed_response_json(resp.qa_id, resp.raw));
        write_jsonl(emap_parsed, parsed);
      }
      return 0;
    }

    if (*rast) {
      const LayoutMap map = parse_map(slurp(rast_map));
      Box2 extent;
      if (rast_extent.size() == 4) {
        extent = {{rast_extent[0], rast_extent[1]}, {rast_extent[2], rast_extent[3]}};
        validate(extent, "--extent");
      } else {
        extent = default_extent(map);
      }
      const GridMap grid = rasterize(map, grid_m, extent);
      spit(rast_out, grid_to_json(grid).dump(2) + "\n");
      std::cout << grid.cells.size() << " occupied cell(s) at m=" << grid_m << "\n";
      return 0;
    }

    if (*adv) {
      RewardConfig cfg;
      cfg.std_floor = adv_std_floor;
      const auto qa = read_qa_file(adv_qa);
      const auto items = read_scored(adv_scored, qa);
      write_jsonl(adv_out, advantage_lines(items, cfg));
      return 0;
    }

    if (*query) {
      if (client_cfg.base_url.empty()) client_cfg.base_url = env_or("OPENAI_BASE_URL", "");
      client_cfg.api_key = env_or("OPENAI_API_KEY", "");
      client_cfg.dry_run = dry_run;
      client_cfg.images_dir = query_images;
      const auto qa = read_qa_file(query_qa);
      const std::string prompt_template =
          query_template.empty() ? default_prompt_template() : slurp(query_template);
      const auto records = run_batch(qa, prompt_template, client_cfg, query_out);
      std::size_t failed = 0;
      for (const auto& rec : records)
        if (rec.status != QueryRecord::Status::Ok) ++failed;
      std::cerr << records.size() << " record(s), " << failed << " failed\n";
      return 0;
    }

    if (*rep) {
      const auto qa = read_qa_file(rep_qa);
      const auto items = read_scored(rep_scored, qa);
      const BenchReport report = build_report(items);
      if (!rep_csv.empty()) spit(rep_csv, render_csv(report));
      if (!rep_svg.empty()) spit(rep_svg, render_svg(report));
      std::cout << render_text(report);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
