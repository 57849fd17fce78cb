#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lesionbench/volume.hpp"

namespace lesionbench {

/// Voxel adjacency: faces only, faces + edges, or faces + edges + corners.
enum class Connectivity { Face6 = 6, Edge18 = 18, Vertex26 = 26 };

inline constexpr Connectivity kDefaultConnectivity = Connectivity::Edge18;

/// Accepts "6", "18", "26". Throws InvalidArgument otherwise.
Connectivity parse_connectivity(std::string_view text);
int connectivity_value(Connectivity conn) noexcept;

struct Offset {
  int dx;
  int dy;
  int dz;
};

/// Full neighbourhood (6, 18 or 26 offsets) for a connectivity.
std::vector<Offset> neighbor_offsets(Connectivity conn);

struct ZExtent {
  std::uint32_t min_z;
  std::uint32_t max_z;
};

/// Component IDs per voxel. Components are numbered 1..n_components in raster
/// order of their first voxel; 0 is background. The per-component vectors are
/// indexed by label, so entry 0 is a placeholder (size 0).
struct ComponentLabeling {
  Grid<std::uint32_t> labels;
  std::uint32_t n_components = 0;
  std::vector<std::size_t> sizes;
  std::vector<ZExtent> z_extent;

  std::size_t foreground_count() const noexcept;
};

/// Two-pass raster scan with union-find (path halving, union by size).
ComponentLabeling label_components(const BinaryMask& mask, Connectivity conn = kDefaultConnectivity);

/// counts[c] = number of voxels of component c where `other` is 1; counts[0] = 0.
/// Throws DimsMismatch / SpacingMismatch.
std::vector<std::size_t> overlap_table(const ComponentLabeling& labeling, const BinaryMask& other);

}  // namespace lesionbench
