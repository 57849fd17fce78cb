#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lesionbench/cohort.hpp"
#include "lesionbench/pipeline.hpp"
#include "lesionbench/ranking.hpp"

namespace lesionbench {

/// Effective parameters of an evaluation run, echoed into its report.
struct EvaluationConfig {
  std::string model;
  std::string manifest;  // file name only, so reports do not depend on the working directory
  Connectivity conn = kDefaultConnectivity;
  std::optional<PostprocessConfig> postprocess;
  AggregateOptions aggregation;
};

struct StudyOutcome {
  std::string study_id;
  Disease disease = Disease::Negative;
  std::optional<StudyMetrics> metrics;  // empty when the study failed
  std::string error;
};

struct EvaluationReport {
  EvaluationConfig config;
  std::vector<StudyOutcome> studies;  // manifest order
  AggregateReport aggregate;

  std::size_t failed_count() const;
};

std::string to_json(const EvaluationReport& report);
std::string to_text(const EvaluationReport& report);

/// Reads the model name and the aggregate total row from a JSON evaluation
/// report. `fallback_name` is used when the report carries no model name.
/// Throws MissingMetric naming the model when a total is absent or null, and
/// UnsupportedFormat when the text is not a JSON object.
ModelTotals totals_from_report(std::string_view json_text, std::string_view fallback_name);

std::string to_json(const ModelRanking& ranking, const RankingConfig& cfg);
std::string to_text(const ModelRanking& ranking);

}  // namespace lesionbench
