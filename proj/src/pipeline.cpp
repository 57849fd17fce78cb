#include "lesionbench/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "lesionbench/error.hpp"

namespace lesionbench {
namespace {

struct FusionWeights {
  double w3d;
  double w2d;
};

// For alpha >= 0.5, 1 - alpha is exact. Below that, alpha is snapped to
// 1 - fl(1 - alpha), which makes both subtractions exact and w3d + w2d == 1.
FusionWeights fusion_weights(double alpha) {
  const double w3d = alpha >= 0.5 ? alpha : 1.0 - (1.0 - alpha);
  return {w3d, 1.0 - w3d};
}

}  // namespace

void validate(const FusionConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    std::ostringstream os;
    os << "alpha must lie in [0, 1], got " << cfg.alpha;
    throw Error(Errc::InvalidArgument, os.str());
  }
}

BottomRule parse_bottom_rule(std::string_view text) {
  if (text == "contained") return BottomRule::ContainedOnly;
  if (text == "touching") return BottomRule::Touching;
  throw Error(Errc::InvalidArgument, "bottom rule must be 'contained' or 'touching', got '" + std::string(text) + "'");
}

std::string_view bottom_rule_name(BottomRule rule) noexcept {
  return rule == BottomRule::ContainedOnly ? "contained" : "touching";
}

void validate(const PostprocessConfig& cfg) {
  if (cfg.min_component_voxels < 1) {
    throw Error(Errc::InvalidArgument, "min_component_voxels must be >= 1");
  }
}

ProbabilityMap fuse_softmax(const ProbabilityMap& p3d, const ProbabilityMap& p2d, const FusionConfig& cfg) {
  validate(cfg);
  check_compatible(p3d, p2d);
  const auto [w3d, w2d] = fusion_weights(cfg.alpha);
  const auto a = p3d.values();
  const auto b = p2d.values();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double lo = std::min(a[i], b[i]);
    const double hi = std::max(a[i], b[i]);
    out[i] = std::clamp(w3d * a[i] + w2d * b[i], lo, hi);
  }
  return ProbabilityMap(p3d.dims(), p3d.spacing(), std::move(out));
}

BinaryMask binarize(const ProbabilityMap& p, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    std::ostringstream os;
    os << "threshold must lie in (0, 1), got " << threshold;
    throw Error(Errc::InvalidThreshold, os.str());
  }
  const auto v = p.values();
  std::vector<std::uint8_t> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [threshold](double x) { return x >= threshold ? 1 : 0; });
  return BinaryMask(p.dims(), p.spacing(), std::move(out));
}

BinaryMask postprocess(const BinaryMask& mask, const PostprocessConfig& cfg) {
  validate(cfg);
  if (cfg.bottom_slices >= mask.dims().nz) {
    throw Error(Errc::BottomExceedsGrid, "bottom_slices " + std::to_string(cfg.bottom_slices) +
                                             " must be < nz " + std::to_string(mask.dims().nz));
  }
  const ComponentLabeling labeling = label_components(mask, cfg.conn);

  // Both rules act on whole components of the input, so one labeling suffices.
  std::vector<std::uint8_t> keep(labeling.n_components + 1, 1);
  keep[0] = 0;
  for (std::uint32_t c = 1; c <= labeling.n_components; ++c) {
    const ZExtent ext = labeling.z_extent[c];
    bool in_bottom = false;
    if (cfg.bottom_slices > 0) {
      in_bottom = cfg.bottom_rule == BottomRule::ContainedOnly ? ext.max_z < cfg.bottom_slices
                                                                : ext.min_z < cfg.bottom_slices;
    }
    if (in_bottom) {
      keep[c] = 0;
    } else if (labeling.sizes[c] < cfg.min_component_voxels) {
      keep[c] = 0;
    }
  }

  const auto labels = labeling.labels.values();
  std::vector<std::uint8_t> out(labels.size());
  std::transform(labels.begin(), labels.end(), out.begin(), [&keep](std::uint32_t l) { return keep[l]; });
  return BinaryMask(mask.dims(), mask.spacing(), std::move(out));
}

}  // namespace lesionbench
