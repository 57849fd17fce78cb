#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lesionbench/metrics.hpp"

namespace lesionbench {

enum class Disease { Melanoma, LungCancer, Lymphoma, Negative };

inline constexpr std::array<Disease, 4> kDiseases = {Disease::Melanoma, Disease::LungCancer, Disease::Lymphoma,
                                                     Disease::Negative};

/// Manifest spelling: melanoma, lung_cancer, lymphoma, negative. Throws UnknownDisease.
Disease parse_disease(std::string_view text);
std::string_view disease_name(Disease disease) noexcept;
/// Human-readable label for report tables.
std::string_view disease_label(Disease disease) noexcept;

struct StudyRecord {
  std::string study_id;
  Disease disease = Disease::Negative;
  std::size_t lesion_count = 0;
  std::filesystem::path gt_path;
  std::vector<std::filesystem::path> pred_paths;  // one per manifest model column
};

/// Parsed manifest CSV:
///
///   study_id,disease,lesion_count,gt_path,<model>,<model>,...
///
/// The header row is required; every column after gt_path names a model and
/// holds that model's prediction path. Relative paths resolve against the
/// manifest's directory. Fields are plain comma-separated values (no quoting).
struct Manifest {
  std::vector<std::string> model_names;
  std::vector<StudyRecord> studies;

  std::optional<std::size_t> model_index(std::string_view name) const;
};

/// Throws DuplicateStudyId, UnknownDisease, MalformedRow.
Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {});
/// As parse_manifest; also UnreadableFile.
Manifest load_manifest(const std::filesystem::path& path);

/// Lesion-count strata. A count falls into the first bin whose upper bound is
/// >= count, or a final open-ended bin. Default bins: {0}, 1-5, 6-20, >20.
struct LesionBins {
  std::vector<std::size_t> upper_bounds{0, 5, 20};

  std::size_t bin_of(std::size_t lesion_count) const noexcept;
  std::size_t bin_count() const noexcept { return upper_bounds.size() + 1; }
};

struct FoldAssignment {
  std::size_t k = 0;
  /// (study_id, fold) in manifest order.
  std::vector<std::pair<std::string, std::size_t>> assignment;

  std::vector<std::size_t> fold_sizes() const;
};

inline constexpr std::size_t kDefaultFolds = 5;

/// Strata are (disease, lesion-count bin), visited in that order. Each
/// stratum is shuffled with a generator seeded by `seed` and dealt to folds
/// by one round-robin cursor shared across strata, so both every stratum and
/// the whole cohort are balanced within one study per fold.
/// Throws InvalidK when k < 2 or k exceeds the number of records.
FoldAssignment stratified_kfold(std::span<const StudyRecord> records, std::size_t k, std::uint64_t seed,
                                const LesionBins& bins = {});

/// CSV with header "study_id,fold".
void write_folds_csv(const FoldAssignment& folds, std::ostream& out);

enum class Statistic { Mean, Median };

std::string_view statistic_name(Statistic s) noexcept;
Statistic parse_statistic(std::string_view text);

struct AggregateOptions {
  Statistic statistic = Statistic::Mean;
  /// Negative studies contribute their (zero) FNV to the total row.
  bool negative_fnv_in_total = true;
};

/// One reported figure; value is empty when no study is applicable.
struct Cell {
  std::optional<double> value;
  std::size_t count = 0;
};

struct DiseaseRow {
  Disease disease = Disease::Negative;
  std::size_t studies = 0;
  Cell dsc;
  Cell fpv;
  Cell fnv;
  /// Negative rows report FPV only.
  bool reports_dsc() const noexcept { return disease != Disease::Negative; }
  bool reports_fnv() const noexcept { return disease != Disease::Negative; }
};

struct AggregateReport {
  std::array<DiseaseRow, 4> diseases;
  std::size_t total_studies = 0;
  Cell total_dsc;
  Cell total_fpv;
  Cell total_fnv;

  const DiseaseRow& row(Disease d) const { return diseases[static_cast<std::size_t>(d)]; }
};

struct StudyResult {
  std::string study_id;
  StudyMetrics metrics;
};

/// DSC averages only studies whose ground truth is positive. Records without a
/// result (e.g. failed studies) are left out. Throws UnknownStudyInMetrics.
AggregateReport aggregate(std::span<const StudyResult> results, std::span<const StudyRecord> records,
                          const AggregateOptions& options = {});

}  // namespace lesionbench
