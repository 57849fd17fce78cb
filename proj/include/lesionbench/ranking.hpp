#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lesionbench {

/// Weights applied to per-metric ranks. DSC ranks higher-is-better, FPV and
/// FNV lower-is-better.
struct RankingConfig {
  double w_dsc = 0.5;
  double w_fpv = 0.25;
  double w_fnv = 0.25;
};

/// Weights must be positive and sum to 1 (within 1e-9). Throws InvalidArgument.
void validate(const RankingConfig& cfg);
/// Parses "dsc,fpv,fnv", e.g. "0.5,0.25,0.25".
RankingConfig parse_weights(std::string_view text);

/// Cohort-level totals of one model.
struct ModelTotals {
  std::string name;
  std::optional<double> dsc;
  std::optional<double> fpv_ml;
  std::optional<double> fnv_ml;
};

struct RankedModel {
  std::string name;
  double dsc = 0.0;
  double fpv_ml = 0.0;
  double fnv_ml = 0.0;
  double rank_dsc = 0.0;
  double rank_fpv = 0.0;
  double rank_fnv = 0.0;
  double score = 0.0;
  std::size_t position = 0;
};

/// Models in final order. Per-metric ranks average over ties; the score is
/// the weighted sum of ranks. Lower score ranks first, then higher DSC, then
/// model name. Models equal in both score and DSC share the smaller position.
struct ModelRanking {
  std::vector<RankedModel> models;

  const RankedModel* find(std::string_view name) const;
};

/// Throws MissingMetric (naming the model) and InvalidArgument for fewer than
/// two models or duplicate names.
ModelRanking rank_models(std::span<const ModelTotals> models, const RankingConfig& cfg = {});

}  // namespace lesionbench
