#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lesionbench {

struct Dims {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;

  std::size_t voxel_count() const noexcept { return nx * ny * nz; }
  std::size_t slice_size() const noexcept { return nx * ny; }

  friend bool operator==(const Dims&, const Dims&) = default;
};

std::string to_string(const Dims& dims);

/// Voxel edge lengths in millimetres.
class Spacing {
 public:
  Spacing(double dx, double dy, double dz);

  double dx() const noexcept { return dx_; }
  double dy() const noexcept { return dy_; }
  double dz() const noexcept { return dz_; }

  double voxel_volume_ml() const noexcept { return dx_ * dy_ * dz_ / 1000.0; }

  static bool valid_component(double v) noexcept;

 private:
  double dx_;
  double dy_;
  double dz_;
};

std::string to_string(const Spacing& spacing);

/// Dense 3D grid, x fastest and z slowest. Slice z = 0 is the bottom of the
/// field of view; loaders reorient files to this convention.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid(Dims dims, Spacing spacing, std::vector<T> values);

  const Dims& dims() const noexcept { return dims_; }
  const Spacing& spacing() const noexcept { return spacing_; }
  std::span<const T> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return x + dims_.nx * (y + dims_.ny * z);
  }
  T at(std::size_t x, std::size_t y, std::size_t z) const noexcept { return values_[index(x, y, z)]; }
  T operator[](std::size_t i) const noexcept { return values_[i]; }

  std::vector<T> release() && { return std::move(values_); }

 private:
  Dims dims_;
  Spacing spacing_;
  std::vector<T> values_;
};

extern template class Grid<std::uint8_t>;
extern template class Grid<double>;
extern template class Grid<std::uint32_t>;

/// Voxels are exactly 0 or 1.
class BinaryMask : public Grid<std::uint8_t> {
 public:
  BinaryMask(Dims dims, Spacing spacing, std::vector<std::uint8_t> values);

  static BinaryMask zeros(Dims dims, Spacing spacing);

  std::size_t foreground_count() const noexcept;
};

/// Foreground-class softmax probability per voxel, within [0, 1]. Held in
/// double precision; files store 32-bit floats.
class ProbabilityMap : public Grid<double> {
 public:
  ProbabilityMap(Dims dims, Spacing spacing, std::vector<double> values);
};

enum class VolumeKind : std::uint8_t { Mask = 0, Probability = 1, Labels = 2 };

/// Load tolerance for both mask rounding and probability range.
inline constexpr double kLoadTolerance = 1e-6;
/// Per-axis spacing tolerance used by check_compatible, in mm.
inline constexpr double kSpacingTolerance = 1e-3;

/// Throws DimsMismatch or SpacingMismatch.
void check_compatible(const Dims& a_dims, const Spacing& a_spacing, const Dims& b_dims,
                      const Spacing& b_spacing);

template <typename A, typename B>
void check_compatible(const Grid<A>& a, const Grid<B>& b) {
  check_compatible(a.dims(), a.spacing(), b.dims(), b.spacing());
}

// File I/O. Reading detects the format from content: the raw "LBV1" format or
// NIfTI-1 (.nii, optionally gzip-compressed). Writing picks NIfTI-1 for paths
// ending in .nii or .nii.gz and LBV1 otherwise.

BinaryMask load_mask(const std::filesystem::path& path);
ProbabilityMap load_probability(const std::filesystem::path& path);
std::variant<BinaryMask, ProbabilityMap> load_volume(const std::filesystem::path& path, VolumeKind kind);

void save_mask(const BinaryMask& mask, const std::filesystem::path& path);
void save_probability(const ProbabilityMap& map, const std::filesystem::path& path);
/// Debug export of a label volume; always written as LBV1 with kind byte 2.
void save_labels(const Grid<std::uint32_t>& labels, const std::filesystem::path& path);

}  // namespace lesionbench
