#include "bevqa/report.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace bevqa {

namespace {

std::string fmt_acc(const BenchReport::Cell& cell) {
  if (cell.empty()) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", cell.mean());
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::size_t BenchReport::length_column(int length) {
  for (std::size_t i = 0; i < kLengths.size(); ++i)
    if (kLengths[i] == length) return i;
  throw std::invalid_argument("unsupported sequence length " + std::to_string(length));
}

BenchReport build_report(const std::vector<ScoredItem>& items) {
  BenchReport r;
  for (const auto& item : items) {
    const std::size_t col = BenchReport::length_column(item.length);
    const std::size_t task = static_cast<std::size_t>(item.task);
    const double acc = item.r_task;
    r.by_length_avg[col].add(acc);
    r.by_task[task].add(acc);
    r.matrix[task][col].add(acc);
    r.overall.add(acc);
    if (is_multiple_choice(item.task)) {
      r.by_length_mcq[col].add(acc);
      r.overall_mcq.add(acc);
    } else {
      r.by_length_nq[col].add(acc);
      r.overall_nq.add(acc);
    }
  }
  return r;
}

std::string render_text(const BenchReport& report) {
  constexpr std::size_t kw = 18;
  constexpr std::size_t cw = 9;
  std::string out;

  const auto row = [&](const std::string& name, const auto& cells,
                       const BenchReport::Cell& total) {
    out += pad(name, kw);
    for (const auto& c : cells) out += pad(c.empty() ? "-" : fmt_acc(c), cw);
    out += pad(total.empty() ? "-" : fmt_acc(total), cw);
    out += "\n";
  };

  out += pad("frames", kw);
  for (int len : BenchReport::kLengths) out += pad(std::to_string(len), cw);
  out += pad("Overall", cw);
  out += "\n";
  row("avg", report.by_length_avg, report.overall);
  row("numerical", report.by_length_nq, report.overall_nq);
  row("multiple-choice", report.by_length_mcq, report.overall_mcq);

  out += pad("count", kw);
  for (const auto& c : report.by_length_avg) out += pad(std::to_string(c.n), cw);
  out += pad(std::to_string(report.overall.n), cw);
  out += "\n\n";

  out += pad("task", kw);
  for (int len : BenchReport::kLengths) out += pad(std::to_string(len), cw);
  out += pad("Overall", cw);
  out += "\n";
  for (std::size_t t = 0; t < BenchReport::kNumTasks; ++t)
    row(to_string(static_cast<TaskType>(t)), report.matrix[t], report.by_task[t]);
  return out;
}

std::string render_csv(const BenchReport& report) {
  std::string out = "section,label,1,4,8,12,16,overall\n";

  const auto row = [&](const std::string& section, const std::string& label, const auto& cells,
                       const BenchReport::Cell& total) {
    out += section + "," + label;
    for (const auto& c : cells) out += "," + fmt_acc(c);
    out += "," + fmt_acc(total) + "\n";
  };

  row("by_length", "avg", report.by_length_avg, report.overall);
  row("by_length", "nq", report.by_length_nq, report.overall_nq);
  row("by_length", "mcq", report.by_length_mcq, report.overall_mcq);

  out += "by_length,count";
  for (const auto& c : report.by_length_avg) out += "," + std::to_string(c.n);
  out += "," + std::to_string(report.overall.n) + "\n";

  for (std::size_t t = 0; t < BenchReport::kNumTasks; ++t)
    row("by_task", to_string(static_cast<TaskType>(t)), report.matrix[t], report.by_task[t]);
  for (std::size_t t = 0; t < BenchReport::kNumTasks; ++t) {
    out += std::string("by_task_count,") + to_string(static_cast<TaskType>(t));
    for (const auto& c : report.matrix[t]) out += "," + std::to_string(c.n);
    out += "," + std::to_string(report.by_task[t].n) + "\n";
  }
  return out;
}

std::string render_svg(const BenchReport& report) {
  // Minimal bar chart of per-length average accuracy.
  constexpr int kWidth = 460;
  constexpr int kHeight = 260;
  constexpr int kBarWidth = 60;
  constexpr int kGap = 24;
  constexpr int kBase = 220;
  constexpr int kMaxBar = 180;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(kWidth) + "\" height=\"" + std::to_string(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"16\" y=\"24\" font-size=\"14\">accuracy by frame count</text>\n";

  int x = 40;
  for (std::size_t i = 0; i < BenchReport::kNumLengths; ++i) {
    const auto& cell = report.by_length_avg[i];
    const int h = static_cast<int>(cell.mean() * kMaxBar);
    svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(kBase - h) +
           "\" width=\"" + std::to_string(kBarWidth) + "\" height=\"" + std::to_string(h) +
           "\" fill=\"#4878a8\"/>\n";
    svg += "<text x=\"" + std::to_string(x + kBarWidth / 2 - 8) + "\" y=\"" +
           std::to_string(kBase + 16) + "\" font-size=\"12\">" +
           std::to_string(BenchReport::kLengths[i]) + "</text>\n";
    if (!cell.empty())
      svg += "<text x=\"" + std::to_string(x + 2) + "\" y=\"" + std::to_string(kBase - h - 6) +
             "\" font-size=\"11\">" + fmt_acc(cell) + "</text>\n";
    x += kBarWidth + kGap;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace bevqa
