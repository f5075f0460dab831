#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace bevqa {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::vector<ojson> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<ojson>& lines);

std::string slurp(const std::filesystem::path& path);
void spit(const std::filesystem::path& path, std::string_view content);

}  // namespace bevqa
