#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "bevqa/geometry.hpp"
#include "bevqa/task.hpp"

namespace bevqa {

// Structured responses carry three blocks, in this order:
//
//   <map>[{"label":"sofa","bbox":[xmin,ymin,xmax,ymax]}, ...]</map>
//   <think>free text</think>
//   <answer>final answer</answer>
//
// bbox coordinates are meters in the BEV frame. The map and think blocks may
// be empty; the answer block may not. Canonical map output renders every
// coordinate with exactly two decimal places.

struct StructuredResponse {
  std::string raw;
  std::optional<LayoutMap> map;
  std::optional<std::string> think;
  std::string answer;
};

struct ParsedAnswer {
  enum class Kind { Choice, Numeric };

  Kind kind{Kind::Numeric};
  char letter{'\0'};  // 'A'..'D'
  double value{0.0};
};

class MapParseError : public std::runtime_error {
 public:
  MapParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg), offset_(offset) {}

  // Byte offset into the map text where parsing failed.
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Total check: exactly one of each block, in order, answer non-empty, map
/// empty or well-formed. Never throws.
bool check_format(const std::string& raw) noexcept;

/// Decodes a format-valid response. Throws MapParseError for a malformed map
/// block and std::invalid_argument("format") for structural failures.
StructuredResponse parse_response(const std::string& raw);

/// Decodes the map grammar. Unknown object keys are ignored; label and bbox
/// are required.
LayoutMap parse_map(const std::string& text);

/// Canonical form: JSON array in input order, coordinates with exactly two
/// decimals.
std::string serialize_map(const LayoutMap& m);

/// Pulls a machine-checkable answer out of free text: the first standalone
/// uppercase letter A-D for multiple-choice tasks, the first decimal number
/// for numerical ones ("cm" suffixes convert to meters). Throws
/// std::invalid_argument("unparseable answer") when nothing matches.
ParsedAnswer extract_answer_text(const std::string& text, TaskType task);

ParsedAnswer extract_answer(const StructuredResponse& resp, TaskType task);

/// Content of the first <answer> block if present, else the whole string.
/// Used to score free-form responses answer-only.
std::string answer_block_or_whole(const std::string& raw);

}  // namespace bevqa
