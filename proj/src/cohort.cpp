#include "lesionbench/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include "lesionbench/error.hpp"

namespace lesionbench {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Uniform integer in [0, bound) by rejection, so results do not depend on the
// standard library's distribution implementation.
std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = gen();
  } while (x >= limit);
  return x % bound;
}

double summarize(std::vector<double> values, Statistic statistic) {
  if (statistic == Statistic::Mean) {
    // Sorted summation keeps the result independent of study order.
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

Cell make_cell(std::vector<double> values, Statistic statistic) {
  Cell c;
  c.count = values.size();
  if (!values.empty()) c.value = summarize(std::move(values), statistic);
  return c;
}

}  // namespace

Disease parse_disease(std::string_view text) {
  for (Disease d : kDiseases) {
    if (text == disease_name(d)) return d;
  }
  throw Error(Errc::UnknownDisease, "'" + std::string(text) + "' (expected melanoma, lung_cancer, lymphoma or negative)");
}

std::string_view disease_name(Disease disease) noexcept {
  switch (disease) {
    case Disease::Melanoma: return "melanoma";
    case Disease::LungCancer: return "lung_cancer";
    case Disease::Lymphoma: return "lymphoma";
    case Disease::Negative: return "negative";
  }
  return "";
}

std::string_view disease_label(Disease disease) noexcept {
  switch (disease) {
    case Disease::Melanoma: return "Melanoma";
    case Disease::LungCancer: return "Lung Cancer";
    case Disease::Lymphoma: return "Lymphoma";
    case Disease::Negative: return "Negative";
  }
  return "";
}

std::optional<std::size_t> Manifest::model_index(std::string_view name) const {
  const auto it = std::find(model_names.begin(), model_names.end(), name);
  if (it == model_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - model_names.begin());
}

Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  static const std::array<std::string_view, 4> kFixed = {"study_id", "disease", "lesion_count", "gt_path"};
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };

  Manifest m;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    auto fields = split_fields(content);
    const std::string where = "line " + std::to_string(line_no);

    if (!have_header) {
      if (fields.size() < kFixed.size() || !std::equal(kFixed.begin(), kFixed.end(), fields.begin())) {
        throw Error(Errc::MalformedRow, where + ": header must start with study_id,disease,lesion_count,gt_path");
      }
      m.model_names.assign(fields.begin() + kFixed.size(), fields.end());
      for (const auto& name : m.model_names) {
        if (name.empty()) throw Error(Errc::MalformedRow, where + ": empty model column name");
      }
      columns = fields.size();
      have_header = true;
      continue;
    }

    if (fields.size() != columns) {
      throw Error(Errc::MalformedRow, where + ": expected " + std::to_string(columns) + " fields, got " +
                                          std::to_string(fields.size()));
    }
    StudyRecord r;
    r.study_id = fields[0];
    if (r.study_id.empty()) throw Error(Errc::MalformedRow, where + ": empty study_id");
    r.disease = parse_disease(fields[1]);
    const auto& count = fields[2];
    const auto [end, ec] = std::from_chars(count.data(), count.data() + count.size(), r.lesion_count);
    if (ec != std::errc() || end != count.data() + count.size() || count.empty()) {
      throw Error(Errc::MalformedRow, where + ": lesion_count '" + count + "' is not a non-negative integer");
    }
    if (r.disease == Disease::Negative && r.lesion_count != 0) {
      throw Error(Errc::MalformedRow, where + ": negative study " + r.study_id + " has lesion_count " + count);
    }
    if (fields[3].empty()) throw Error(Errc::MalformedRow, where + ": empty gt_path");
    r.gt_path = resolve(fields[3]);
    for (std::size_t i = kFixed.size(); i < fields.size(); ++i) {
      r.pred_paths.push_back(fields[i].empty() ? std::filesystem::path{} : resolve(fields[i]));
    }
    if (!seen.insert(r.study_id).second) {
      throw Error(Errc::DuplicateStudyId, where + ": '" + r.study_id + "'");
    }
    m.studies.push_back(std::move(r));
  }
  if (!have_header) throw Error(Errc::MalformedRow, "manifest has no header row");
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::UnreadableFile, "cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

std::size_t LesionBins::bin_of(std::size_t lesion_count) const noexcept {
  for (std::size_t i = 0; i < upper_bounds.size(); ++i) {
    if (lesion_count <= upper_bounds[i]) return i;
  }
  return upper_bounds.size();
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (const auto& [id, fold] : assignment) ++sizes[fold];
  return sizes;
}

FoldAssignment stratified_kfold(std::span<const StudyRecord> records, std::size_t k, std::uint64_t seed,
                                const LesionBins& bins) {
  if (k < 2) throw Error(Errc::InvalidK, "k must be >= 2, got " + std::to_string(k));
  if (k > records.size()) {
    throw Error(Errc::InvalidK, "k = " + std::to_string(k) + " exceeds cohort size " + std::to_string(records.size()));
  }
  if (!std::is_sorted(bins.upper_bounds.begin(), bins.upper_bounds.end()) ||
      std::adjacent_find(bins.upper_bounds.begin(), bins.upper_bounds.end()) != bins.upper_bounds.end()) {
    throw Error(Errc::InvalidArgument, "lesion bin bounds must be strictly increasing");
  }

  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    strata[{static_cast<std::size_t>(r.disease), bins.bin_of(r.lesion_count)}].push_back(i);
  }

  std::mt19937_64 gen(seed);
  std::vector<std::size_t> fold_of(records.size(), 0);
  std::size_t cursor = 0;
  for (auto& [key, members] : strata) {
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[uniform_below(gen, i)]);
    }
    for (std::size_t idx : members) {
      fold_of[idx] = cursor;
      cursor = (cursor + 1) % k;
    }
  }

  FoldAssignment out;
  out.k = k;
  out.assignment.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out.assignment.emplace_back(records[i].study_id, fold_of[i]);
  return out;
}

void write_folds_csv(const FoldAssignment& folds, std::ostream& out) {
  out << "study_id,fold\n";
  for (const auto& [id, fold] : folds.assignment) out << id << ',' << fold << '\n';
}

std::string_view statistic_name(Statistic s) noexcept { return s == Statistic::Mean ? "mean" : "median"; }

Statistic parse_statistic(std::string_view text) {
  if (text == "mean") return Statistic::Mean;
  if (text == "median") return Statistic::Median;
  throw Error(Errc::InvalidArgument, "statistic must be 'mean' or 'median', got '" + std::string(text) + "'");
}

AggregateReport aggregate(std::span<const StudyResult> results, std::span<const StudyRecord> records,
                          const AggregateOptions& options) {
  std::map<std::string_view, const StudyRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.study_id, &r);

  struct Columns {
    std::vector<double> dsc, fpv, fnv;
    std::size_t studies = 0;
  };
  std::array<Columns, 4> per_disease;
  Columns total;

  for (const auto& res : results) {
    const auto it = by_id.find(res.study_id);
    if (it == by_id.end()) throw Error(Errc::UnknownStudyInMetrics, "'" + res.study_id + "' is not in the manifest");
    const Disease d = it->second->disease;
    const StudyMetrics& m = res.metrics;
    auto& col = per_disease[static_cast<std::size_t>(d)];
    ++col.studies;
    ++total.studies;

    col.fpv.push_back(m.fpv_ml);
    total.fpv.push_back(m.fpv_ml);
    if (d != Disease::Negative) {
      if (m.dsc) col.dsc.push_back(*m.dsc);
      col.fnv.push_back(m.fnv_ml);
    }
    if (m.dsc) total.dsc.push_back(*m.dsc);
    if (d != Disease::Negative || options.negative_fnv_in_total) total.fnv.push_back(m.fnv_ml);
  }

  AggregateReport rep;
  for (Disease d : kDiseases) {
    auto& col = per_disease[static_cast<std::size_t>(d)];
    DiseaseRow& row = rep.diseases[static_cast<std::size_t>(d)];
    row.disease = d;
    row.studies = col.studies;
    row.fpv = make_cell(std::move(col.fpv), options.statistic);
    if (row.reports_dsc()) row.dsc = make_cell(std::move(col.dsc), options.statistic);
    if (row.reports_fnv()) row.fnv = make_cell(std::move(col.fnv), options.statistic);
  }
  rep.total_studies = total.studies;
  rep.total_dsc = make_cell(std::move(total.dsc), options.statistic);
  rep.total_fpv = make_cell(std::move(total.fpv), options.statistic);
  rep.total_fnv = make_cell(std::move(total.fnv), options.statistic);
  return rep;
}

}  // namespace lesionbench
