#include "statewalk/coverage.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "statewalk/errors.hpp"

namespace statewalk {

void CoverageLog::record_sample(const StateModel& model, const Clock& clock,
                                std::size_t events_sent) {
  append({clock ? clock() : 0, model.state_count(), model.transition_count(), events_sent});
}

void CoverageLog::append(CoverageSample s) {
  if (!samples_.empty()) {
    const auto& last = samples_.back();
    s.elapsed_ms = std::max(s.elapsed_ms, last.elapsed_ms);
    s.states = std::max(s.states, last.states);
    s.transitions = std::max(s.transitions, last.transitions);
    s.events_sent = std::max(s.events_sent, last.events_sent);
  }
  samples_.push_back(s);
}

std::string to_csv(const CoverageLog& log) {
  std::ostringstream out;
  out << "elapsed_ms,states,transitions,events\n";
  for (const auto& s : log.samples()) {
    out << s.elapsed_ms << ',' << s.states << ',' << s.transitions << ',' << s.events_sent << '\n';
  }
  return out.str();
}

namespace {

template <class T>
T parse_number(std::string_view text, std::size_t line) {
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw SpecError("coverage csv line " + std::to_string(line) + ": bad number '" +
                    std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::vector<CoverageSample> parse_coverage_csv(std::string_view csv) {
  std::vector<CoverageSample> out;
  std::size_t line_no = 0;
  while (!csv.empty()) {
    auto nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != "elapsed_ms,states,transitions,events") {
        throw SpecError("coverage csv: unexpected header");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        cells.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (cells.size() != 4) {
      throw SpecError("coverage csv line " + std::to_string(line_no) + ": expected 4 columns");
    }
    out.push_back({parse_number<std::int64_t>(cells[0], line_no),
                   parse_number<std::size_t>(cells[1], line_no),
                   parse_number<std::size_t>(cells[2], line_no),
                   parse_number<std::size_t>(cells[3], line_no)});
  }
  return out;
}

nlohmann::json summary_json(const CoverageLog& log) {
  CoverageSample last;
  if (!log.empty()) last = log.samples().back();
  nlohmann::json j{{"events_sent", last.events_sent}, {"wall_ms", last.elapsed_ms}};
  j["states"] = last.states;
  j["transitions"] = last.transitions;
  auto fraction = [](std::size_t got, std::size_t total) -> nlohmann::json {
    if (total == 0) return nullptr;
    return static_cast<double>(got) / static_cast<double>(total);
  };
  if (log.totals) {
    j["state_coverage"] = fraction(last.states, log.totals->states);
    j["transition_coverage"] = fraction(last.transitions, log.totals->transitions);
  } else {
    j["state_coverage"] = nullptr;
    j["transition_coverage"] = nullptr;
  }
  return j;
}

OutputFormat output_format_from_string(std::string_view text) {
  if (text == "graph") return OutputFormat::graph;
  if (text == "report") return OutputFormat::report;
  if (text == "both") return OutputFormat::both;
  throw SpecError("unknown output format '" + std::string(text) + "'");
}

ReportBundle emit_report(const CoverageLog& log, OutputFormat format, const StateModel& model) {
  ReportBundle out;
  if (format != OutputFormat::graph) {
    out.csv = to_csv(log);
    out.summary = summary_json(log);
  }
  if (format != OutputFormat::report) {
    out.graph = model.export_graph();
    out.dot = model.export_dot();
  }
  return out;
}

}  // namespace statewalk
