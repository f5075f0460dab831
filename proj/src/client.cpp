#include "bevqa/client.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "bevqa/jsonl.hpp"
#include "bevqa/rng.hpp"
#include "httplib.h"

namespace bevqa {

namespace {

constexpr char kCompletionsPath[] = "/v1/chat/completions";

const char kBase64Chars[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::string& data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < data.size()) {
    const unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                       (static_cast<unsigned char>(data[i + 1]) << 8) |
                       static_cast<unsigned char>(data[i + 2]);
    out += kBase64Chars[(v >> 18) & 63];
    out += kBase64Chars[(v >> 12) & 63];
    out += kBase64Chars[(v >> 6) & 63];
    out += kBase64Chars[v & 63];
    i += 3;
  }
  if (i + 1 == data.size()) {
    const unsigned v = static_cast<unsigned char>(data[i]) << 16;
    out += kBase64Chars[(v >> 18) & 63];
    out += kBase64Chars[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == data.size()) {
    const unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                       (static_cast<unsigned char>(data[i + 1]) << 8);
    out += kBase64Chars[(v >> 18) & 63];
    out += kBase64Chars[(v >> 12) & 63];
    out += kBase64Chars[(v >> 6) & 63];
    out += "=";
  }
  return out;
}

std::string mime_for_extension(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  return "image/png";
}

std::vector<std::string> image_refs_for(const QAPair& qa, const ClientConfig& cfg) {
  std::vector<std::string> refs;
  if (cfg.images_dir.empty()) return refs;
  for (std::size_t pos : qa.sequence.frame_indices) {
    char name[64];
    std::snprintf(name, sizeof(name), "frame_%06zu%s", pos, cfg.image_ext.c_str());
    refs.push_back((cfg.images_dir / qa.scene_id / name).string());
  }
  return refs;
}

json image_part(const std::string& ref) {
  std::string url = ref;
  if (std::filesystem::exists(ref)) {
    std::ifstream in(ref, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    url = "data:" + mime_for_extension(ref) + ";base64," + base64_encode(bytes);
  }
  return json{{"type", "image_url"}, {"image_url", {{"url", url}}}};
}

struct Attempt {
  bool ok = false;
  bool retryable = false;
  std::string raw;
  std::string reason;
};

Attempt attempt_query(httplib::Client& http, const ClientConfig& cfg, const json& body) {
  Attempt a;
  httplib::Headers headers;
  if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);
  const auto res = http.Post(kCompletionsPath, headers, body.dump(), "application/json");
  if (!res) {
    a.retryable = true;
    a.reason = "connection error";
    return a;
  }
  if (res->status >= 500 || res->status == 429) {
    a.retryable = true;
    a.reason = "http " + std::to_string(res->status);
    return a;
  }
  if (res->status != 200) {
    a.reason = "http " + std::to_string(res->status);
    return a;
  }
  try {
    const json reply = json::parse(res->body);
    const std::string content =
        reply.at("choices").at(0).at("message").at("content").get<std::string>();
    if (content.empty()) {
      a.reason = "empty completion";
      return a;
    }
    a.ok = true;
    a.raw = content;
  } catch (const std::exception& e) {
    a.reason = std::string("bad response body: ") + e.what();
  }
  return a;
}

}  // namespace

std::string default_prompt_template() {
  return "You are answering a spatial reasoning question about a video clip.\n"
         "{question}\n{options}"
         "Reply in the form <map>...</map><think>...</think><answer>...</answer>; "
         "the map and think blocks may be empty.";
}

std::string render_prompt(const std::string& prompt_template, const QAPair& qa) {
  std::string prompt = prompt_template;
  const auto replace_all = [&prompt](const std::string& token, const std::string& value) {
    for (std::size_t pos = prompt.find(token); pos != std::string::npos;
         pos = prompt.find(token, pos + value.size()))
      prompt.replace(pos, token.size(), value);
  };
  std::string options;
  if (qa.answer.kind == Answer::Kind::Choice) {
    for (std::size_t i = 0; i < qa.answer.options.size(); ++i)
      options += static_cast<char>('A' + i) + std::string(". ") + qa.answer.options[i] + "\n";
  }
  replace_all("{question}", qa.question);
  replace_all("{options}", options);
  return prompt;
}

std::vector<QueryRecord> run_batch(const std::vector<QAPair>& qa,
                                   const std::string& prompt_template, const ClientConfig& cfg,
                                   const std::filesystem::path& out_path) {
  if (cfg.max_parallel < 1) throw std::invalid_argument("max_parallel must be >= 1");
  if (cfg.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  if (!cfg.dry_run && cfg.base_url.empty())
    throw std::invalid_argument("base_url is required unless running with --dry-run");

  // Resume: anything already in the output file is kept as-is.
  std::map<std::string, std::string> existing;
  if (std::filesystem::exists(out_path)) {
    for (const auto& line : read_jsonl(out_path))
      existing.emplace(line.at("qa_id").get<std::string>(), line.at("raw").get<std::string>());
  }

  std::vector<QueryRecord> records(qa.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < qa.size(); ++i) {
    QueryRecord& rec = records[i];
    rec.qa_id = qa[i].qa_id;
    rec.prompt = render_prompt(prompt_template, qa[i]);
    rec.image_refs = image_refs_for(qa[i], cfg);
    const auto it = existing.find(rec.qa_id);
    if (it != existing.end()) {
      rec.raw = it->second;
      rec.status = rec.raw.empty() ? QueryRecord::Status::Failed : QueryRecord::Status::Ok;
      if (rec.raw.empty()) rec.failure_reason = "failed in a previous run";
    } else {
      pending.push_back(i);
    }
  }

  const auto run_one = [&](std::size_t i) {
    QueryRecord& rec = records[i];
    const auto start = std::chrono::steady_clock::now();

    if (cfg.dry_run) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "[dry-run] prompt-hash=%016llx",
                    static_cast<unsigned long long>(fnv1a64(rec.prompt)));
      rec.raw = buf;
      rec.status = QueryRecord::Status::Ok;
      return;
    }

    json content = json::array();
    content.push_back({{"type", "text"}, {"text", rec.prompt}});
    for (const auto& ref : rec.image_refs) content.push_back(image_part(ref));
    const json body = {{"model", cfg.model_name},
                       {"temperature", cfg.temperature},
                       {"max_tokens", cfg.max_output_tokens},
                       {"messages", json::array({{{"role", "user"}, {"content", content}}})}};

    httplib::Client http(cfg.base_url);
    http.set_connection_timeout(std::chrono::milliseconds(static_cast<int>(cfg.timeout_s * 1000)));
    http.set_read_timeout(std::chrono::milliseconds(static_cast<int>(cfg.timeout_s * 1000)));

    std::string last_reason = "max retries";
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
      if (attempt > 0 && cfg.backoff_base_s > 0.0)
        std::this_thread::sleep_for(std::chrono::duration<double>(
            cfg.backoff_base_s * static_cast<double>(1 << (attempt - 1))));
      const Attempt a = attempt_query(http, cfg, body);
      if (a.ok) {
        rec.raw = a.raw;
        rec.status = QueryRecord::Status::Ok;
        rec.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return;
      }
      if (!a.retryable) {
        rec.status = QueryRecord::Status::Failed;
        rec.failure_reason = a.reason;
        return;
      }
      last_reason = a.reason;
    }
    rec.status = QueryRecord::Status::Failed;
    rec.failure_reason = "max retries";
    (void)last_reason;
  };

  // Fixed worker pool; max_parallel is the in-flight request cap.
  std::atomic<std::size_t> cursor{0};
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.max_parallel), pending.size());
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < n_workers; ++w)
    workers.emplace_back([&] {
      for (std::size_t k = cursor.fetch_add(1); k < pending.size(); k = cursor.fetch_add(1))
        run_one(pending[k]);
    });
  for (auto& t : workers) t.join();

  std::vector<ojson> lines;
  lines.reserve(records.size());
  for (const auto& rec : records) {
    ojson line;
    line["qa_id"] = rec.qa_id;
    line["raw"] = rec.status == QueryRecord::Status::Ok ? rec.raw : "";
    lines.push_back(std::move(line));
  }
  write_jsonl(out_path, lines);
  return records;
}

}  // namespace bevqa
