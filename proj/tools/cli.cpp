#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "lesionbench/cohort.hpp"
#include "lesionbench/error.hpp"
#include "lesionbench/labeling.hpp"
#include "lesionbench/metrics.hpp"
#include "lesionbench/pipeline.hpp"
#include "lesionbench/ranking.hpp"
#include "lesionbench/report.hpp"
#include "lesionbench/volume.hpp"

namespace lesionbench::cli {
namespace {

std::size_t default_jobs() {
  if (const char* env = std::getenv("LESIONBENCH_JOBS"); env != nullptr && *env != '\0') {
    const std::string text(env);
    std::size_t used = 0;
    long long value = 0;
    try {
      value = std::stoll(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || value < 1) {
      throw Error(Errc::InvalidArgument, "LESIONBENCH_JOBS must be a positive integer, got '" + text + "'");
    }
    return static_cast<std::size_t>(value);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::UnwritablePath, "cannot open " + path.string());
  f << text;
  if (!f.flush()) throw Error(Errc::UnwritablePath, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::UnreadableFile, "cannot open " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

// Emits to a file when a path was given, otherwise to stdout.
void emit(const std::string& out_path, const std::string& text, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_text_file(out_path, text);
  }
}

std::vector<std::size_t> parse_bins(const std::string& text) {
  std::vector<std::size_t> bounds;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) {
      throw Error(Errc::InvalidArgument, "lesion bins must be comma-separated integers, got '" + text + "'");
    }
    bounds.push_back(static_cast<std::size_t>(v));
  }
  return bounds;
}

struct PostprocessFlags {
  std::size_t min_voxels = 4;
  std::size_t bottom_slices = 3;
  std::string bottom_rule = "contained";
};

void add_postprocess_flags(CLI::App& cmd, PostprocessFlags& flags) {
  cmd.add_option("--min-voxels", flags.min_voxels, "Remove components with fewer voxels");
  cmd.add_option("--bottom-slices", flags.bottom_slices, "Height of the bottom slab, in slices");
  cmd.add_option("--bottom-rule", flags.bottom_rule, "Bottom slab rule")
      ->check(CLI::IsMember({"contained", "touching"}));
}

PostprocessConfig make_postprocess(const PostprocessFlags& flags, Connectivity conn) {
  PostprocessConfig cfg;
  cfg.min_component_voxels = flags.min_voxels;
  cfg.bottom_slices = flags.bottom_slices;
  cfg.bottom_rule = parse_bottom_rule(flags.bottom_rule);
  cfg.conn = conn;
  validate(cfg);
  return cfg;
}

StudyOutcome evaluate_one(const StudyRecord& record, std::size_t model, Connectivity conn,
                          const std::optional<PostprocessConfig>& post) {
  StudyOutcome outcome;
  outcome.study_id = record.study_id;
  outcome.disease = record.disease;
  try {
    const auto& pred_path = record.pred_paths.at(model);
    if (pred_path.empty()) throw Error(Errc::UnreadableFile, "no prediction path");
    const BinaryMask gt = load_mask(record.gt_path);
    BinaryMask pred = load_mask(pred_path);
    if (post) pred = postprocess(pred, *post);
    outcome.metrics = evaluate_study(pred, gt, conn);
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  return outcome;
}

// Studies are pulled from a shared counter; each worker holds one volume pair
// at a time and writes into its own manifest slot.
std::vector<StudyOutcome> evaluate_cohort(const Manifest& manifest, std::size_t model, Connectivity conn,
                                          const std::optional<PostprocessConfig>& post, std::size_t jobs) {
  const auto& studies = manifest.studies;
  std::vector<StudyOutcome> outcomes(studies.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < studies.size(); i = next++) {
      outcomes[i] = evaluate_one(studies[i], model, conn, post);
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, studies.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  return outcomes;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lesion segmentation post-processing and evaluation toolkit", "lesionbench"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  std::string connectivity = "18";
  const auto add_connectivity = [&](CLI::App& cmd) {
    cmd.add_option("--connectivity", connectivity, "Voxel connectivity for components")
        ->check(CLI::IsMember({"6", "18", "26"}));
  };

  // fuse
  std::string p3d_path, p2d_path, fused_path;
  double alpha = 0.55;
  auto* fuse = app.add_subcommand("fuse", "Weighted fusion of 3D and 2D foreground probability maps");
  fuse->add_option("p3d", p3d_path, "3D model probability map")->required();
  fuse->add_option("p2d", p2d_path, "2D model probability map")->required();
  fuse->add_option("out", fused_path, "Output probability map")->required();
  fuse->add_option("--alpha", alpha, "Weight of the 3D map");

  // binarize
  std::string bin_in, bin_out;
  double threshold = kDefaultThreshold;
  auto* bin = app.add_subcommand("binarize", "Threshold a probability map into a mask (p >= threshold)");
  bin->add_option("input", bin_in, "Probability map")->required();
  bin->add_option("out", bin_out, "Output mask")->required();
  bin->add_option("--threshold", threshold, "Foreground threshold");

  // postprocess
  std::string pp_in, pp_out, pp_labels;
  PostprocessFlags pp_flags;
  auto* pp = app.add_subcommand("postprocess", "Remove small and bottom-slab components from a mask");
  pp->add_option("input", pp_in, "Mask")->required();
  pp->add_option("out", pp_out, "Output mask")->required();
  add_postprocess_flags(*pp, pp_flags);
  add_connectivity(*pp);
  pp->add_option("--labels-out", pp_labels, "Also write the component labels of the output (LBV1, kind 2)");

  // evaluate
  std::string manifest_path, model_name, report_path, format = "json", statistic = "mean";
  bool apply_post = false;
  bool exclude_negative_fnv = false;
  PostprocessFlags ev_flags;
  std::size_t jobs = 0;
  auto* ev = app.add_subcommand("evaluate", "Score one model's predictions over a manifest (DSC, FPV, FNV)");
  ev->add_option("manifest", manifest_path, "Manifest CSV")->required();
  ev->add_option("--model", model_name, "Model column in the manifest")->required();
  ev->add_option("--out", report_path, "Report path (stdout when omitted)");
  ev->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));
  ev->add_option("--statistic", statistic, "Aggregation statistic")->check(CLI::IsMember({"mean", "median"}));
  ev->add_flag("--exclude-negative-fnv", exclude_negative_fnv, "Leave negative studies out of the Total FNV");
  ev->add_flag("--postprocess", apply_post, "Post-process predictions before scoring");
  add_postprocess_flags(*ev, ev_flags);
  add_connectivity(*ev);
  ev->add_option("--jobs", jobs, "Worker threads (default: $LESIONBENCH_JOBS, else hardware threads)")
      ->check(CLI::PositiveNumber)
      ->default_str("auto");

  // split
  std::string split_manifest, split_out, bins = "0,5,20";
  std::size_t k = kDefaultFolds;
  std::uint64_t seed = 0;
  auto* split = app.add_subcommand("split", "Stratified k-fold assignment (strata: disease x lesion-count bin)");
  split->add_option("manifest", split_manifest, "Manifest CSV")->required();
  split->add_option("--k", k, "Number of folds");
  split->add_option("--seed", seed, "Shuffle seed");
  split->add_option("--bins", bins, "Upper bounds of the lesion-count bins");
  split->add_option("--out", split_out, "Fold CSV path (stdout when omitted)");

  // rank
  std::vector<std::string> rank_reports;
  std::string weights = "0.5,0.25,0.25", rank_out;
  auto* rank = app.add_subcommand("rank", "Rank models by weighted per-metric ranks of their totals");
  rank->option_defaults()->always_capture_default(false);
  rank->add_option("reports", rank_reports, "JSON evaluation reports, one per model")->required();
  rank->option_defaults()->always_capture_default(true);
  rank->add_option("--weights", weights, "Weights for dsc,fpv,fnv");
  rank->add_option("--out", rank_out, "Also write the ranking as JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalid;
  }

  try {
    if (*fuse) {
      const FusionConfig cfg{alpha};
      validate(cfg);
      const ProbabilityMap a = load_probability(p3d_path);
      const ProbabilityMap b = load_probability(p2d_path);
      save_probability(fuse_softmax(a, b, cfg), fused_path);
      return kExitOk;
    }
    if (*bin) {
      const ProbabilityMap p = load_probability(bin_in);
      save_mask(binarize(p, threshold), bin_out);
      return kExitOk;
    }
    if (*pp) {
      const PostprocessConfig cfg = make_postprocess(pp_flags, parse_connectivity(connectivity));
      const BinaryMask result = postprocess(load_mask(pp_in), cfg);
      save_mask(result, pp_out);
      if (!pp_labels.empty()) save_labels(label_components(result, cfg.conn).labels, pp_labels);
      return kExitOk;
    }
    if (*ev) {
      const Connectivity conn = parse_connectivity(connectivity);
      const Manifest manifest = load_manifest(manifest_path);
      const auto model = manifest.model_index(model_name);
      if (!model) throw Error(Errc::InvalidArgument, "model '" + model_name + "' is not a manifest column");

      EvaluationReport report;
      report.config.model = model_name;
      report.config.manifest = std::filesystem::path(manifest_path).filename().string();
      report.config.conn = conn;
      if (apply_post) report.config.postprocess = make_postprocess(ev_flags, conn);
      report.config.aggregation.statistic = parse_statistic(statistic);
      report.config.aggregation.negative_fnv_in_total = !exclude_negative_fnv;

      report.studies = evaluate_cohort(manifest, *model, conn, report.config.postprocess,
                                        jobs == 0 ? default_jobs() : jobs);
      std::vector<StudyResult> results;
      for (const auto& s : report.studies) {
        if (s.metrics) results.push_back({s.study_id, *s.metrics});
      }
      report.aggregate = aggregate(results, manifest.studies, report.config.aggregation);

      emit(report_path, format == "json" ? to_json(report) : to_text(report), out);
      for (const auto& s : report.studies) {
        if (!s.metrics) err << "lesionbench: study " << s.study_id << " failed: " << s.error << '\n';
      }
      return report.failed_count() > 0 ? kExitPartialFailure : kExitOk;
    }
    if (*split) {
      const Manifest manifest = load_manifest(split_manifest);
      const FoldAssignment folds = stratified_kfold(manifest.studies, k, seed, LesionBins{parse_bins(bins)});
      std::ostringstream csv;
      write_folds_csv(folds, csv);
      emit(split_out, csv.str(), out);
      return kExitOk;
    }
    if (*rank) {
      const RankingConfig cfg = parse_weights(weights);
      std::vector<ModelTotals> totals;
      for (const auto& path : rank_reports) {
        const std::filesystem::path p(path);
        totals.push_back(totals_from_report(read_text_file(p), p.stem().string()));
      }
      const ModelRanking ranking = rank_models(totals, cfg);
      out << to_text(ranking);
      if (!rank_out.empty()) write_text_file(rank_out, to_json(ranking, cfg));
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "lesionbench: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace lesionbench::cli
