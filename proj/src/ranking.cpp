#include "lesionbench/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "lesionbench/error.hpp"

namespace lesionbench {
namespace {

// Fractional ranks (1-based); equal values share the mean of their positions.
std::vector<double> fractional_ranks(const std::vector<double>& values, bool higher_is_better) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return higher_is_better ? values[a] > values[b] : values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

void validate(const RankingConfig& cfg) {
  const bool positive = cfg.w_dsc > 0.0 && cfg.w_fpv > 0.0 && cfg.w_fnv > 0.0;
  const double sum = cfg.w_dsc + cfg.w_fpv + cfg.w_fnv;
  if (!positive || !std::isfinite(sum) || std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "ranking weights must be positive and sum to 1, got " << cfg.w_dsc << ',' << cfg.w_fpv << ','
       << cfg.w_fnv;
    throw Error(Errc::InvalidArgument, os.str());
  }
}

RankingConfig parse_weights(std::string_view text) {
  std::vector<double> w;
  std::istringstream in{std::string(text)};
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      w.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(Errc::InvalidArgument, "weights must be three numbers 'dsc,fpv,fnv', got '" + std::string(text) + "'");
    }
  }
  if (w.size() != 3) {
    throw Error(Errc::InvalidArgument, "weights must be three numbers 'dsc,fpv,fnv', got '" + std::string(text) + "'");
  }
  RankingConfig cfg{w[0], w[1], w[2]};
  validate(cfg);
  return cfg;
}

const RankedModel* ModelRanking::find(std::string_view name) const {
  const auto it = std::find_if(models.begin(), models.end(), [&](const RankedModel& m) { return m.name == name; });
  return it == models.end() ? nullptr : &*it;
}

ModelRanking rank_models(std::span<const ModelTotals> models, const RankingConfig& cfg) {
  validate(cfg);
  if (models.size() < 2) throw Error(Errc::InvalidArgument, "ranking needs at least two models");
  std::set<std::string_view> names;
  std::vector<double> dsc, fpv, fnv;
  for (const auto& m : models) {
    if (!names.insert(m.name).second) throw Error(Errc::InvalidArgument, "duplicate model name '" + m.name + "'");
    if (!m.dsc) throw Error(Errc::MissingMetric, "model '" + m.name + "' has no total DSC");
    if (!m.fpv_ml) throw Error(Errc::MissingMetric, "model '" + m.name + "' has no total FPV");
    if (!m.fnv_ml) throw Error(Errc::MissingMetric, "model '" + m.name + "' has no total FNV");
    dsc.push_back(*m.dsc);
    fpv.push_back(*m.fpv_ml);
    fnv.push_back(*m.fnv_ml);
  }
  const auto r_dsc = fractional_ranks(dsc, true);
  const auto r_fpv = fractional_ranks(fpv, false);
  const auto r_fnv = fractional_ranks(fnv, false);

  ModelRanking out;
  for (std::size_t i = 0; i < models.size(); ++i) {
    RankedModel r;
    r.name = models[i].name;
    r.dsc = dsc[i];
    r.fpv_ml = fpv[i];
    r.fnv_ml = fnv[i];
    r.rank_dsc = r_dsc[i];
    r.rank_fpv = r_fpv[i];
    r.rank_fnv = r_fnv[i];
    r.score = cfg.w_dsc * r.rank_dsc + cfg.w_fpv * r.rank_fpv + cfg.w_fnv * r.rank_fnv;
    out.models.push_back(std::move(r));
  }
  std::sort(out.models.begin(), out.models.end(), [](const RankedModel& a, const RankedModel& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.dsc != b.dsc) return a.dsc > b.dsc;
    return a.name < b.name;
  });
  for (std::size_t i = 0; i < out.models.size(); ++i) {
    auto& m = out.models[i];
    const bool tied_with_previous =
        i > 0 && out.models[i - 1].score == m.score && out.models[i - 1].dsc == m.dsc;
    m.position = tied_with_previous ? out.models[i - 1].position : i + 1;
  }
  return out;
}

}  // namespace lesionbench
