#pragma once

#include <cstddef>
#include <optional>

#include "lesionbench/labeling.hpp"
#include "lesionbench/volume.hpp"

namespace lesionbench {

/// Per-study scores. dsc is empty when the ground truth has no foreground.
struct StudyMetrics {
  std::optional<double> dsc;
  double fpv_ml = 0.0;
  double fnv_ml = 0.0;
  bool gt_positive = false;
};

/// 2|P∩G| / (|P|+|G|); empty when gt has no foreground.
std::optional<double> dice_score(const BinaryMask& pred, const BinaryMask& gt);

/// Voxels of components in `mask` that share no voxel with `reference`.
std::size_t unmatched_component_voxels(const BinaryMask& mask, const BinaryMask& reference, Connectivity conn);

/// Volume of predicted components with no ground-truth voxel, in mL.
double false_positive_volume(const BinaryMask& pred, const BinaryMask& gt, Connectivity conn = kDefaultConnectivity);

/// Volume of ground-truth components with no predicted voxel, in mL.
double false_negative_volume(const BinaryMask& pred, const BinaryMask& gt, Connectivity conn = kDefaultConnectivity);

StudyMetrics evaluate_study(const BinaryMask& pred, const BinaryMask& gt, Connectivity conn = kDefaultConnectivity);

}  // namespace lesionbench
