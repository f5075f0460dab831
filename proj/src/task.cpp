#include "bevqa/task.hpp"

#include <stdexcept>

namespace bevqa {

bool is_multiple_choice(TaskType t) {
  switch (t) {
    case TaskType::RelativeDistance:
    case TaskType::VerticalDirection:
    case TaskType::HorizontalDirection:
      return true;
    default:
      return false;
  }
}

const char* to_string(TaskType t) {
  switch (t) {
    case TaskType::RelativeDistance: return "relative_distance";
    case TaskType::VerticalDirection: return "vertical_direction";
    case TaskType::HorizontalDirection: return "horizontal_direction";
    case TaskType::ObjectSize: return "object_size";
    case TaskType::MinDistance: return "min_distance";
    default: return "object_count";
  }
}

TaskType task_from_string(std::string_view s) {
  for (TaskType t : kAllTasks)
    if (s == to_string(t)) return t;
  throw std::invalid_argument("unknown task type: " + std::string(s));
}

const char* to_string(AnswerUnit u) {
  return u == AnswerUnit::Meters ? "meters" : "count";
}

AnswerUnit unit_from_string(std::string_view s) {
  if (s == "meters") return AnswerUnit::Meters;
  if (s == "count") return AnswerUnit::Count;
  throw std::invalid_argument("unknown answer unit: " + std::string(s));
}

Answer Answer::choice(char letter, std::vector<std::string> options) {
  if (options.size() < 2 || options.size() > 4)
    throw std::invalid_argument("choice answers need 2-4 options");
  const std::size_t index = static_cast<std::size_t>(letter - 'A');
  if (index >= options.size())
    throw std::invalid_argument("choice letter does not index an option");
  Answer a;
  a.kind = Kind::Choice;
  a.letter = letter;
  a.options = std::move(options);
  return a;
}

Answer Answer::numeric(double value, AnswerUnit unit) {
  if (!(value >= 0.0)) throw std::invalid_argument("numeric answers must be >= 0");
  Answer a;
  a.kind = Kind::Numeric;
  a.value = value;
  a.unit = unit;
  return a;
}

const std::string& Answer::chosen_option() const {
  if (kind != Kind::Choice) throw std::logic_error("not a choice answer");
  return options[static_cast<std::size_t>(letter - 'A')];
}

}  // namespace bevqa
