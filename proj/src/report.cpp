#include "lesionbench/report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "lesionbench/error.hpp"

namespace lesionbench {
namespace {

using Json = nlohmann::ordered_json;

Json cell_json(const Cell& c) {
  Json j;
  j["value"] = c.value ? Json(*c.value) : Json(nullptr);
  j["count"] = c.count;
  return j;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string cell_text(const Cell& c, int digits) { return c.value ? fixed(*c.value, digits) : "n/a"; }

// The first `left` columns are left-aligned, the rest right-aligned.
std::string render_table(const std::vector<std::vector<std::string>>& rows, std::size_t left = 1) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream os;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) line += "  ";
      const std::string pad(width[i] - row[i].size(), ' ');
      line += i < left ? row[i] + pad : pad + row[i];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
  }
  return os.str();
}

std::optional<double> number_at(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
  const Json& v = obj.at(key);
  if (v.is_object()) return number_at(v, "value");
  if (v.is_number()) return v.get<double>();
  return std::nullopt;
}

}  // namespace

std::size_t EvaluationReport::failed_count() const {
  return static_cast<std::size_t>(
      std::count_if(studies.begin(), studies.end(), [](const StudyOutcome& s) { return !s.metrics; }));
}

std::string to_json(const EvaluationReport& report) {
  const EvaluationConfig& cfg = report.config;
  Json j;
  j["model"] = cfg.model;

  Json config;
  config["manifest"] = cfg.manifest;
  config["connectivity"] = connectivity_value(cfg.conn);
  Json post;
  post["enabled"] = cfg.postprocess.has_value();
  if (cfg.postprocess) {
    post["min_voxels"] = cfg.postprocess->min_component_voxels;
    post["bottom_slices"] = cfg.postprocess->bottom_slices;
    post["bottom_rule"] = bottom_rule_name(cfg.postprocess->bottom_rule);
    post["connectivity"] = connectivity_value(cfg.postprocess->conn);
  }
  config["postprocess"] = post;
  config["statistic"] = statistic_name(cfg.aggregation.statistic);
  config["negative_fnv_in_total"] = cfg.aggregation.negative_fnv_in_total;
  j["config"] = config;

  Json studies = Json::array();
  for (const auto& s : report.studies) {
    Json row;
    row["study_id"] = s.study_id;
    row["disease"] = disease_name(s.disease);
    if (s.metrics) {
      row["status"] = "ok";
      row["gt_positive"] = s.metrics->gt_positive;
      row["dsc"] = s.metrics->dsc ? Json(*s.metrics->dsc) : Json(nullptr);
      row["fpv_ml"] = s.metrics->fpv_ml;
      row["fnv_ml"] = s.metrics->fnv_ml;
    } else {
      row["status"] = "failed";
      row["error"] = s.error;
    }
    studies.push_back(std::move(row));
  }
  j["studies"] = std::move(studies);
  j["failed_studies"] = report.failed_count();

  Json diseases = Json::array();
  for (const DiseaseRow& row : report.aggregate.diseases) {
    Json d;
    d["disease"] = disease_name(row.disease);
    d["studies"] = row.studies;
    if (row.reports_dsc()) d["dsc"] = cell_json(row.dsc);
    d["fpv_ml"] = cell_json(row.fpv);
    if (row.reports_fnv()) d["fnv_ml"] = cell_json(row.fnv);
    diseases.push_back(std::move(d));
  }
  Json total;
  total["studies"] = report.aggregate.total_studies;
  total["dsc"] = cell_json(report.aggregate.total_dsc);
  total["fpv_ml"] = cell_json(report.aggregate.total_fpv);
  total["fnv_ml"] = cell_json(report.aggregate.total_fnv);
  j["aggregate"] = {{"diseases", std::move(diseases)}, {"total", std::move(total)}};
  return j.dump(2) + "\n";
}

std::string to_text(const EvaluationReport& report) {
  std::ostringstream os;
  const auto& agg = report.aggregate;
  os << "model: " << report.config.model << '\n';
  os << "connectivity: " << connectivity_value(report.config.conn)
     << "  postprocess: " << (report.config.postprocess ? "on" : "off")
     << "  statistic: " << statistic_name(report.config.aggregation.statistic) << '\n';
  os << "studies: " << report.studies.size() << "  failed: " << report.failed_count() << "\n\n";

  std::vector<std::vector<std::string>> rows{{"Metric", "Value", "N"}};
  for (const DiseaseRow& row : agg.diseases) {
    if (row.studies == 0) continue;
    const std::string label(disease_label(row.disease));
    if (row.reports_dsc()) rows.push_back({label + " (DSC)", cell_text(row.dsc, 4), std::to_string(row.dsc.count)});
    rows.push_back({label + " (FPV)", cell_text(row.fpv, 4), std::to_string(row.fpv.count)});
    if (row.reports_fnv()) rows.push_back({label + " (FNV)", cell_text(row.fnv, 4), std::to_string(row.fnv.count)});
  }
  rows.push_back({"Total (DSC)", cell_text(agg.total_dsc, 4), std::to_string(agg.total_dsc.count)});
  rows.push_back({"Total (FPV)", cell_text(agg.total_fpv, 4), std::to_string(agg.total_fpv.count)});
  rows.push_back({"Total (FNV)", cell_text(agg.total_fnv, 4), std::to_string(agg.total_fnv.count)});
  os << render_table(rows);

  if (report.failed_count() > 0) {
    os << "\nfailed studies:\n";
    for (const auto& s : report.studies) {
      if (!s.metrics) os << "  " << s.study_id << ": " << s.error << '\n';
    }
  }
  return os.str();
}

ModelTotals totals_from_report(std::string_view json_text, std::string_view fallback_name) {
  Json j = Json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(Errc::UnsupportedFormat, "report for '" + std::string(fallback_name) + "' is not a JSON object");
  }
  ModelTotals t;
  t.name = j.contains("model") && j["model"].is_string() && !j["model"].get<std::string>().empty()
               ? j["model"].get<std::string>()
               : std::string(fallback_name);
  Json total;
  if (j.contains("aggregate") && j["aggregate"].is_object() && j["aggregate"].contains("total")) {
    total = j["aggregate"]["total"];
  }
  t.dsc = number_at(total, "dsc");
  t.fpv_ml = number_at(total, "fpv_ml");
  t.fnv_ml = number_at(total, "fnv_ml");
  if (!t.dsc) throw Error(Errc::MissingMetric, "model '" + t.name + "' report has no total DSC");
  if (!t.fpv_ml) throw Error(Errc::MissingMetric, "model '" + t.name + "' report has no total FPV");
  if (!t.fnv_ml) throw Error(Errc::MissingMetric, "model '" + t.name + "' report has no total FNV");
  return t;
}

std::string to_json(const ModelRanking& ranking, const RankingConfig& cfg) {
  Json j;
  j["config"] = {{"weights", {{"dsc", cfg.w_dsc}, {"fpv", cfg.w_fpv}, {"fnv", cfg.w_fnv}}}};
  Json rows = Json::array();
  for (const auto& m : ranking.models) {
    Json r;
    r["position"] = m.position;
    r["model"] = m.name;
    r["score"] = m.score;
    r["dsc"] = m.dsc;
    r["fpv_ml"] = m.fpv_ml;
    r["fnv_ml"] = m.fnv_ml;
    r["rank_dsc"] = m.rank_dsc;
    r["rank_fpv"] = m.rank_fpv;
    r["rank_fnv"] = m.rank_fnv;
    rows.push_back(std::move(r));
  }
  j["ranking"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string to_text(const ModelRanking& ranking) {
  std::vector<std::vector<std::string>> rows{
      {"#", "Model", "Score", "DSC", "FPV", "FNV", "rank(DSC)", "rank(FPV)", "rank(FNV)"}};
  for (const auto& m : ranking.models) {
    rows.push_back({std::to_string(m.position), m.name, fixed(m.score, 3), fixed(m.dsc, 4), fixed(m.fpv_ml, 4),
                    fixed(m.fnv_ml, 4), fixed(m.rank_dsc, 1), fixed(m.rank_fpv, 1), fixed(m.rank_fnv, 1)});
  }
  return render_table(rows, 2);
}

}  // namespace lesionbench
