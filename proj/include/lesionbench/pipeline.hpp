#pragma once

#include <cstddef>
#include <string_view>

#include "lesionbench/labeling.hpp"
#include "lesionbench/volume.hpp"

namespace lesionbench {

struct FusionConfig {
  /// Weight of the 3D map; the 2D map gets 1 - alpha.
  double alpha = 0.55;
};

void validate(const FusionConfig& cfg);

/// Which bottom-slab components postprocess removes.
enum class BottomRule {
  ContainedOnly,  ///< component lies entirely within the slab
  Touching,       ///< component has any voxel in the slab
};

BottomRule parse_bottom_rule(std::string_view text);
std::string_view bottom_rule_name(BottomRule rule) noexcept;

struct PostprocessConfig {
  std::size_t min_component_voxels = 4;
  std::size_t bottom_slices = 3;
  Connectivity conn = kDefaultConnectivity;
  BottomRule bottom_rule = BottomRule::ContainedOnly;
};

void validate(const PostprocessConfig& cfg);

inline constexpr double kDefaultThreshold = 0.5;

/// Per voxel alpha * p3d + (1 - alpha) * p2d.
///
/// The weights are formed so that both sum to exactly 1, and swapping the
/// inputs together with alpha -> 1 - alpha reproduces the result bit for bit.
/// The output is clamped to [min(p3d, p2d), max(p3d, p2d)] so rounding never
/// leaves the convex hull of the inputs.
ProbabilityMap fuse_softmax(const ProbabilityMap& p3d, const ProbabilityMap& p2d, const FusionConfig& cfg = {});

/// voxel = 1 iff p >= threshold. Throws InvalidThreshold unless 0 < threshold < 1.
BinaryMask binarize(const ProbabilityMap& p, double threshold = kDefaultThreshold);

/// Removes whole components: first those caught by the bottom-slab rule, then
/// those smaller than min_component_voxels. Surviving voxels are untouched.
/// Throws BottomExceedsGrid when bottom_slices >= nz.
BinaryMask postprocess(const BinaryMask& mask, const PostprocessConfig& cfg = {});

}  // namespace lesionbench
