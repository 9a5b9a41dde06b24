#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "statewalk/state_model.hpp"

namespace statewalk {

struct CoverageSample {
  std::int64_t elapsed_ms = 0;
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t events_sent = 0;
  friend bool operator==(const CoverageSample&, const CoverageSample&) = default;
};

/// Ground-truth counts, when the app under test can supply them.
struct CoverageTotals {
  std::size_t states = 0;
  std::size_t transitions = 0;
};

/// Milliseconds since the start of the session.
using Clock = std::function<std::int64_t()>;

/// Progressive coverage samples. Every counter, elapsed time included, is
/// nondecreasing from one sample to the next.
class CoverageLog {
 public:
  void record_sample(const StateModel& model, const Clock& clock, std::size_t events_sent);
  /// Appends as-is after clamping each counter to at least the previous value.
  void append(CoverageSample sample);

  const std::vector<CoverageSample>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }
  std::optional<CoverageTotals> totals;

 private:
  std::vector<CoverageSample> samples_;
};

/// Header `elapsed_ms,states,transitions,events`, one row per sample.
std::string to_csv(const CoverageLog& log);
std::vector<CoverageSample> parse_coverage_csv(std::string_view csv);

/// {state_coverage, transition_coverage, events_sent, wall_ms}; coverage
/// fractions are null without totals.
nlohmann::json summary_json(const CoverageLog& log);

enum class OutputFormat { graph, report, both };
OutputFormat output_format_from_string(std::string_view text);

struct ReportBundle {
  std::optional<std::string> csv;
  std::optional<nlohmann::json> summary;
  std::optional<nlohmann::json> graph;
  std::optional<std::string> dot;
};

ReportBundle emit_report(const CoverageLog& log, OutputFormat format, const StateModel& model);

}  // namespace statewalk
