#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bevqa/qa.hpp"

namespace bevqa {

struct ClientConfig {
  std::string base_url;        // e.g. http://localhost:8000 or https://host
  std::string api_key;         // taken from the environment, never logged
  std::string model_name;
  double temperature = 0.01;
  int max_output_tokens = 2048;
  int max_parallel = 4;
  int max_attempts = 3;
  double backoff_base_s = 1.0;  // sleep base_s * 2^attempt between attempts
  bool dry_run = false;
  std::filesystem::path images_dir;  // empty: text-only prompts
  std::string image_ext = ".png";
  double timeout_s = 120.0;
};

struct QueryRecord {
  enum class Status { Ok, Failed };

  std::string qa_id;
  std::string prompt;
  std::vector<std::string> image_refs;  // local paths are base64-inlined, else sent as URLs
  std::string raw;                      // non-empty iff Ok
  double latency_s{0.0};
  Status status{Status::Failed};
  std::string failure_reason;
};

/// Default prompt template. {question} and {options} expand per item.
std::string default_prompt_template();

std::string render_prompt(const std::string& prompt_template, const QAPair& qa);

/// Queries every QA item with at most max_parallel requests in flight and at
/// most max_attempts tries per item, recording failures instead of raising.
/// Records already present in out_path are reused, so interrupted runs resume
/// and a resumed run writes the same file as an uninterrupted one. Output
/// order matches input order. The written lines are {"qa_id", "raw"}; raw is
/// empty for failed items.
std::vector<QueryRecord> run_batch(const std::vector<QAPair>& qa,
                                   const std::string& prompt_template, const ClientConfig& cfg,
                                   const std::filesystem::path& out_path);

}  // namespace bevqa
