#include <doctest.h>

#include <random>

#include "lesionbench/error.hpp"
#include "lesionbench/metrics.hpp"
#include "oracle.hpp"

using namespace lesionbench;

namespace {

BinaryMask line_mask(Dims dims, Spacing spacing, std::size_t y, std::size_t z, std::size_t x0, std::size_t n) {
  std::vector<std::uint8_t> v(dims.voxel_count(), 0);
  for (std::size_t x = x0; x < x0 + n; ++x) v[x + dims.nx * (y + dims.ny * z)] = 1;
  return BinaryMask(dims, spacing, std::move(v));
}

BinaryMask unite(const BinaryMask& a, const BinaryMask& b) {
  std::vector<std::uint8_t> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] | b[i];
  return BinaryMask(a.dims(), a.spacing(), std::move(v));
}

}  // namespace

TEST_CASE("dice examples") {
  const Dims d{10, 4, 4};
  const Spacing s(1, 1, 1);
  const auto gt = line_mask(d, s, 0, 0, 0, 3);
  CHECK(*dice_score(gt, gt) == 1.0);
  CHECK(*dice_score(BinaryMask::zeros(d, s), gt) == 0.0);
  const auto pred = line_mask(d, s, 0, 0, 2, 2);  // overlaps gt at x = 2 only
  CHECK(*dice_score(pred, gt) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK_FALSE(dice_score(pred, BinaryMask::zeros(d, s)).has_value());
  CHECK_THROWS_AS(dice_score(pred, BinaryMask::zeros({10, 4, 5}, s)), Error);
}

TEST_CASE("false positive volume examples") {
  const Dims d{10, 4, 4};
  const Spacing s(2, 2, 2);
  const auto pred = line_mask(d, s, 0, 0, 0, 5);
  const auto gt = line_mask(d, s, 3, 3, 0, 3);
  CHECK(false_positive_volume(pred, gt) == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(false_positive_volume(pred, pred) == 0.0);
  CHECK(false_positive_volume(BinaryMask::zeros(d, s), gt) == 0.0);
  // A single shared voxel rescues the whole component.
  const auto touching = line_mask(d, s, 0, 0, 4, 1);
  CHECK(false_positive_volume(pred, touching) == 0.0);
}

TEST_CASE("false negative volume is all-or-nothing per component") {
  const Dims d{12, 3, 3};
  const Spacing s(2, 2, 2);
  const auto gt = line_mask(d, s, 1, 1, 0, 10);
  CHECK(false_negative_volume(line_mask(d, s, 1, 1, 9, 1), gt) == 0.0);
  CHECK(false_negative_volume(BinaryMask::zeros(d, s), gt) == doctest::Approx(0.08).epsilon(1e-15));
  CHECK(false_negative_volume(gt, BinaryMask::zeros(d, s)) == 0.0);
}

TEST_CASE("evaluate_study examples") {
  const Dims d{10, 4, 4};
  const Spacing s(1, 1, 1);
  const auto gt = line_mask(d, s, 0, 0, 0, 3);
  auto m = evaluate_study(gt, gt);
  CHECK(m.gt_positive);
  CHECK(*m.dsc == 1.0);
  CHECK(m.fpv_ml == 0.0);
  CHECK(m.fnv_ml == 0.0);

  m = evaluate_study(BinaryMask::zeros(d, s), BinaryMask::zeros(d, s));
  CHECK_FALSE(m.gt_positive);
  CHECK_FALSE(m.dsc.has_value());
  CHECK(m.fpv_ml == 0.0);
  CHECK(m.fnv_ml == 0.0);

  const auto pred = line_mask(d, s, 3, 3, 0, 5);
  m = evaluate_study(pred, gt);
  CHECK(*m.dsc == 0.0);
  CHECK(m.fpv_ml == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(m.fnv_ml == doctest::Approx(0.003).epsilon(1e-15));

  // Negative study: only FPV can be nonzero.
  m = evaluate_study(pred, BinaryMask::zeros(d, s));
  CHECK_FALSE(m.gt_positive);
  CHECK(m.fpv_ml == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(m.fnv_ml == 0.0);
}

TEST_CASE("metrics match brute force on random pairs") {
  std::mt19937_64 gen(31337);
  for (int trial = 0; trial < 300; ++trial) {
    const Dims dims = oracle::random_dims(gen, 12);
    const Spacing spacing(1.0 + trial % 3, 0.5, 2.0);
    const double dp = std::array{0.0, 0.1, 0.3, 0.5}[trial % 4];
    const double dg = std::array{0.1, 0.0, 0.5, 0.3}[(trial / 4) % 4];
    const BinaryMask pred = oracle::random_mask(gen, dims, dp, spacing);
    const BinaryMask gt = oracle::random_mask(gen, dims, dg, spacing);
    for (Connectivity c : {Connectivity::Face6, Connectivity::Edge18, Connectivity::Vertex26}) {
      const auto got = evaluate_study(pred, gt, c);
      const auto ref = oracle::brute_metrics(oracle::from_mask(pred), oracle::from_mask(gt), connectivity_value(c),
                                             spacing.voxel_volume_ml());
      REQUIRE(got.gt_positive == ref.gt_positive);
      if (ref.gt_positive) CHECK(*got.dsc == ref.dsc);
      CHECK(std::abs(got.fpv_ml - ref.fpv_ml) <= 1e-9);
      CHECK(std::abs(got.fnv_ml - ref.fnv_ml) <= 1e-9);
      CHECK(false_positive_volume(pred, gt, c) == false_negative_volume(gt, pred, c));
    }
  }
}

TEST_CASE("metric properties") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Dims dims{9, 9, 9};
    const BinaryMask a = oracle::random_mask(gen, dims, 0.2);
    const BinaryMask b = oracle::random_mask(gen, dims, 0.2);
    if (a.foreground_count() > 0 && b.foreground_count() > 0) CHECK(*dice_score(a, b) == *dice_score(b, a));
    const double voxel = a.spacing().voxel_volume_ml();
    CHECK(false_positive_volume(a, b) <= static_cast<double>(a.foreground_count()) * voxel);
    CHECK(false_negative_volume(a, b) <= static_cast<double>(b.foreground_count()) * voxel);

    // Doubling every spacing axis scales volumes by 8 and leaves DSC alone.
    const BinaryMask a2(dims, {2, 2, 2}, {a.values().begin(), a.values().end()});
    const BinaryMask b2(dims, {2, 2, 2}, {b.values().begin(), b.values().end()});
    const auto m1 = evaluate_study(a, b);
    const auto m2 = evaluate_study(a2, b2);
    CHECK(m2.fpv_ml == doctest::Approx(8 * m1.fpv_ml).epsilon(1e-12));
    CHECK(m2.fnv_ml == doctest::Approx(8 * m1.fnv_ml).epsilon(1e-12));
    CHECK(m2.dsc == m1.dsc);

    // Adding predicted voxels can only rescue ground-truth components.
    CHECK(false_negative_volume(unite(a, b), b) == 0.0);
  }
}
