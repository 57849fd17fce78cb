#include "lesionbench/volume.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lesionbench/error.hpp"

namespace lesionbench {

std::string to_string(const Dims& dims) {
  std::ostringstream os;
  os << '(' << dims.nx << ',' << dims.ny << ',' << dims.nz << ')';
  return os.str();
}

bool Spacing::valid_component(double v) noexcept { return std::isfinite(v) && v > 0.0; }

Spacing::Spacing(double dx, double dy, double dz) : dx_(dx), dy_(dy), dz_(dz) {
  if (!valid_component(dx) || !valid_component(dy) || !valid_component(dz)) {
    throw Error(Errc::InvalidArgument, "voxel spacing must be positive and finite, got " + to_string(*this));
  }
}

std::string to_string(const Spacing& spacing) {
  std::ostringstream os;
  os << '(' << spacing.dx() << ',' << spacing.dy() << ',' << spacing.dz() << ')';
  return os.str();
}

template <typename T>
Grid<T>::Grid(Dims dims, Spacing spacing, std::vector<T> values)
    : dims_(dims), spacing_(spacing), values_(std::move(values)) {
  if (dims_.nx == 0 || dims_.ny == 0 || dims_.nz == 0) {
    throw Error(Errc::InvalidArgument, "grid dims must be >= 1, got " + to_string(dims_));
  }
  if (values_.size() != dims_.voxel_count()) {
    throw Error(Errc::InvalidArgument, "grid " + to_string(dims_) + " needs " +
                                           std::to_string(dims_.voxel_count()) + " values, got " +
                                           std::to_string(values_.size()));
  }
}

template class Grid<std::uint8_t>;
template class Grid<double>;
template class Grid<std::uint32_t>;

BinaryMask::BinaryMask(Dims dims, Spacing spacing, std::vector<std::uint8_t> values)
    : Grid<std::uint8_t>(dims, spacing, std::move(values)) {
  const auto v = this->values();
  const auto bad = std::find_if(v.begin(), v.end(), [](std::uint8_t x) { return x > 1; });
  if (bad != v.end()) {
    throw Error(Errc::NonBinaryMask, "voxel " + std::to_string(bad - v.begin()) + " has value " +
                                         std::to_string(static_cast<int>(*bad)));
  }
}

BinaryMask BinaryMask::zeros(Dims dims, Spacing spacing) {
  return BinaryMask(dims, spacing, std::vector<std::uint8_t>(dims.voxel_count(), 0));
}

std::size_t BinaryMask::foreground_count() const noexcept {
  const auto v = values();
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), std::uint8_t{1}));
}

ProbabilityMap::ProbabilityMap(Dims dims, Spacing spacing, std::vector<double> values)
    : Grid<double>(dims, spacing, std::move(values)) {
  const auto v = this->values();
  const auto bad = std::find_if(v.begin(), v.end(), [](double p) { return !(p >= 0.0 && p <= 1.0); });
  if (bad != v.end()) {
    std::ostringstream os;
    os << "voxel " << (bad - v.begin()) << " has probability " << *bad;
    throw Error(Errc::OutOfRangeProbability, os.str());
  }
}

void check_compatible(const Dims& a_dims, const Spacing& a_spacing, const Dims& b_dims,
                      const Spacing& b_spacing) {
  if (a_dims != b_dims) {
    throw Error(Errc::DimsMismatch, to_string(a_dims) + " vs " + to_string(b_dims));
  }
  const bool close = std::abs(a_spacing.dx() - b_spacing.dx()) <= kSpacingTolerance &&
                     std::abs(a_spacing.dy() - b_spacing.dy()) <= kSpacingTolerance &&
                     std::abs(a_spacing.dz() - b_spacing.dz()) <= kSpacingTolerance;
  if (!close) {
    throw Error(Errc::SpacingMismatch, to_string(a_spacing) + " vs " + to_string(b_spacing));
  }
}

}  // namespace lesionbench
