#include "bevqa/cot.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <string_view>

#include "json.hpp"

namespace bevqa {

namespace {

using json = nlohmann::json;

struct Block {
  std::size_t open_pos = std::string::npos;
  std::size_t close_pos = std::string::npos;
  std::string content;
  bool unique = false;
};

std::size_t count_occurrences(const std::string& s, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = s.find(needle); pos != std::string::npos;
       pos = s.find(needle, pos + needle.size()))
    ++n;
  return n;
}

Block find_block(const std::string& raw, const std::string& tag) {
  const std::string open = "<" + tag + ">";
  const std::string close = "</" + tag + ">";
  Block b;
  if (count_occurrences(raw, open) != 1 || count_occurrences(raw, close) != 1) return b;
  b.open_pos = raw.find(open);
  b.close_pos = raw.find(close);
  if (b.close_pos < b.open_pos) return b;
  b.content = raw.substr(b.open_pos + open.size(), b.close_pos - b.open_pos - open.size());
  b.unique = true;
  return b;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Structural pass shared by check_format and parse_response. Returns false
// unless all three blocks are present exactly once and ordered.
bool split_blocks(const std::string& raw, Block& map, Block& think, Block& answer) {
  map = find_block(raw, "map");
  think = find_block(raw, "think");
  answer = find_block(raw, "answer");
  if (!map.unique || !think.unique || !answer.unique) return false;
  return map.close_pos > map.open_pos && think.open_pos > map.close_pos &&
         think.close_pos > think.open_pos && answer.open_pos > think.close_pos &&
         answer.close_pos > answer.open_pos;
}

bool is_letter_or_digit(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

LayoutMap parse_map(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MapParseError(std::string("map block is not valid JSON: ") + e.what(),
                        e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!doc.is_array()) throw MapParseError("map block must be a JSON array", 0);

  LayoutMap m;
  m.objects.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    if (!item.is_object())
      throw MapParseError("map entry " + std::to_string(i) + " must be an object", 0);
    if (!item.contains("label") || !item["label"].is_string())
      throw MapParseError("map entry " + std::to_string(i) + " needs a string 'label'", 0);
    const std::string label = item["label"].get<std::string>();
    if (label.empty())
      throw MapParseError("map entry " + std::to_string(i) + " has an empty label", 0);
    if (!item.contains("bbox") || !item["bbox"].is_array() || item["bbox"].size() != 4)
      throw MapParseError("map entry " + std::to_string(i) + " needs a 4-number 'bbox'", 0);
    double v[4];
    for (std::size_t k = 0; k < 4; ++k) {
      if (!item["bbox"][k].is_number())
        throw MapParseError("map entry " + std::to_string(i) + " bbox[" + std::to_string(k) +
                            "] is not a number", 0);
      v[k] = item["bbox"][k].get<double>();
      if (!std::isfinite(v[k]))
        throw MapParseError("map entry " + std::to_string(i) + " bbox[" + std::to_string(k) +
                            "] is not finite", 0);
    }
    if (v[0] > v[2] || v[1] > v[3])
      throw MapParseError("map entry " + std::to_string(i) + " bbox min exceeds max", 0);
    m.objects.push_back({std::to_string(i), label, {{v[0], v[1]}, {v[2], v[3]}}});
  }
  return m;
}

bool check_format(const std::string& raw) noexcept {
  try {
    Block map, think, answer;
    if (!split_blocks(raw, map, think, answer)) return false;
    if (trim(answer.content).empty()) return false;
    const std::string map_text = trim(map.content);
    if (!map_text.empty()) parse_map(map_text);
    return true;
  } catch (...) {
    return false;
  }
}

StructuredResponse parse_response(const std::string& raw) {
  Block map, think, answer;
  if (!split_blocks(raw, map, think, answer)) throw std::invalid_argument("format");
  const std::string answer_text = trim(answer.content);
  if (answer_text.empty()) throw std::invalid_argument("format");

  StructuredResponse resp;
  resp.raw = raw;
  resp.answer = answer_text;
  const std::string think_text = trim(think.content);
  if (!think_text.empty()) resp.think = think_text;
  const std::string map_text = trim(map.content);
  if (!map_text.empty()) resp.map = parse_map(map_text);
  return resp;
}

std::string serialize_map(const LayoutMap& m) {
  validate(m);
  std::string out = "[";
  char buf[128];
  for (std::size_t i = 0; i < m.objects.size(); ++i) {
    const LayoutObject& obj = m.objects[i];
    if (i > 0) out += ",";
    out += "{\"label\":";
    out += json(obj.label).dump();
    std::snprintf(buf, sizeof(buf), ",\"bbox\":[%.2f,%.2f,%.2f,%.2f]}", obj.box.min.x,
                  obj.box.min.y, obj.box.max.x, obj.box.max.y);
    out += buf;
  }
  out += "]";
  return out;
}

ParsedAnswer extract_answer_text(const std::string& text, TaskType task) {
  if (is_multiple_choice(task)) {
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char c = text[i];
      if (c < 'A' || c > 'D') continue;
      const bool left_ok = i == 0 || !is_letter_or_digit(text[i - 1]);
      const bool right_ok = i + 1 == text.size() || !is_letter_or_digit(text[i + 1]);
      if (left_ok && right_ok) {
        ParsedAnswer a;
        a.kind = ParsedAnswer::Kind::Choice;
        a.letter = c;
        return a;
      }
    }
    throw std::invalid_argument("unparseable answer");
  }

  // First decimal number, with an optional cm/m unit suffix.
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool digit = c >= '0' && c <= '9';
    const bool pointed = c == '.' && i + 1 < text.size() && text[i + 1] >= '0' && text[i + 1] <= '9';
    if (!digit && !pointed) continue;
    std::size_t start = i;
    if (start > 0 && (text[start - 1] == '-' || text[start - 1] == '+')) --start;
    std::size_t end = i;
    bool seen_dot = false;
    while (end < text.size()) {
      const char d = text[end];
      if (d >= '0' && d <= '9') {
        ++end;
      } else if (d == '.' && !seen_dot) {
        seen_dot = true;
        ++end;
      } else {
        break;
      }
    }
    ParsedAnswer a;
    a.kind = ParsedAnswer::Kind::Numeric;
    a.value = std::stod(text.substr(start, end - start));

    std::size_t u = end;
    while (u < text.size() && text[u] == ' ') ++u;
    const auto word_at = [&](std::string_view w) {
      if (text.compare(u, w.size(), w.data(), w.size()) != 0) return false;
      const std::size_t after = u + w.size();
      return after >= text.size() || !is_letter_or_digit(text[after]);
    };
    if (word_at("cm") || word_at("centimeters") || word_at("centimetres")) a.value /= 100.0;
    return a;
  }
  throw std::invalid_argument("unparseable answer");
}

ParsedAnswer extract_answer(const StructuredResponse& resp, TaskType task) {
  return extract_answer_text(resp.answer, task);
}

std::string answer_block_or_whole(const std::string& raw) {
  const std::string open = "<answer>";
  const std::string close = "</answer>";
  const std::size_t a = raw.find(open);
  if (a != std::string::npos) {
    const std::size_t b = raw.find(close, a + open.size());
    if (b != std::string::npos) return raw.substr(a + open.size(), b - a - open.size());
  }
  return raw;
}

}  // namespace bevqa
