#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace bevqa {

// The six spatial task families. The first three are multiple-choice, the
// last three numerical.
enum class TaskType {
  RelativeDistance,
  VerticalDirection,
  HorizontalDirection,
  ObjectSize,
  MinDistance,
  ObjectCount,
};

inline constexpr std::array<TaskType, 6> kAllTasks = {
    TaskType::RelativeDistance,  TaskType::VerticalDirection,
    TaskType::HorizontalDirection, TaskType::ObjectSize,
    TaskType::MinDistance,       TaskType::ObjectCount,
};

bool is_multiple_choice(TaskType t);
const char* to_string(TaskType t);
TaskType task_from_string(std::string_view s);  // throws on unknown name

enum class AnswerUnit { Meters, Count };

const char* to_string(AnswerUnit u);
AnswerUnit unit_from_string(std::string_view s);

// Ground-truth answer: either a lettered choice over 2-4 options or a
// non-negative number with a unit.
struct Answer {
  enum class Kind { Choice, Numeric };

  Kind kind{Kind::Numeric};
  char letter{'\0'};                 // 'A'..'D', Choice only
  std::vector<std::string> options;  // Choice only
  double value{0.0};                 // Numeric only, >= 0
  AnswerUnit unit{AnswerUnit::Meters};

  static Answer choice(char letter, std::vector<std::string> options);
  static Answer numeric(double value, AnswerUnit unit);

  // The option text the letter points at.
  const std::string& chosen_option() const;

  friend bool operator==(const Answer&, const Answer&) = default;
};

}  // namespace bevqa
