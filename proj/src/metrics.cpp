#include "lesionbench/metrics.hpp"

namespace lesionbench {

std::optional<double> dice_score(const BinaryMask& pred, const BinaryMask& gt) {
  check_compatible(pred, gt);
  const auto p = pred.values();
  const auto g = gt.values();
  std::size_t both = 0, n_pred = 0, n_gt = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    n_pred += p[i];
    n_gt += g[i];
    both += p[i] & g[i];
  }
  if (n_gt == 0) return std::nullopt;
  return 2.0 * static_cast<double>(both) / static_cast<double>(n_pred + n_gt);
}

std::size_t unmatched_component_voxels(const BinaryMask& mask, const BinaryMask& reference, Connectivity conn) {
  check_compatible(mask, reference);
  const ComponentLabeling labeling = label_components(mask, conn);
  const auto overlap = overlap_table(labeling, reference);
  std::size_t voxels = 0;
  for (std::uint32_t c = 1; c <= labeling.n_components; ++c) {
    if (overlap[c] == 0) voxels += labeling.sizes[c];
  }
  return voxels;
}

double false_positive_volume(const BinaryMask& pred, const BinaryMask& gt, Connectivity conn) {
  return static_cast<double>(unmatched_component_voxels(pred, gt, conn)) * pred.spacing().voxel_volume_ml();
}

double false_negative_volume(const BinaryMask& pred, const BinaryMask& gt, Connectivity conn) {
  return static_cast<double>(unmatched_component_voxels(gt, pred, conn)) * gt.spacing().voxel_volume_ml();
}

StudyMetrics evaluate_study(const BinaryMask& pred, const BinaryMask& gt, Connectivity conn) {
  StudyMetrics m;
  m.dsc = dice_score(pred, gt);
  m.gt_positive = m.dsc.has_value();
  m.fpv_ml = false_positive_volume(pred, gt, conn);
  m.fnv_ml = m.gt_positive ? false_negative_volume(pred, gt, conn) : 0.0;
  return m;
}

}  // namespace lesionbench
