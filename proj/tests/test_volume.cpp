#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "lesionbench/error.hpp"
#include "lesionbench/volume.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace lesionbench;
using testutil::TempDir;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected lesionbench::Error");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("spacing and voxel volume") {
  const Spacing s(2.0, 2.0, 2.0);
  CHECK(s.voxel_volume_ml() == doctest::Approx(0.008).epsilon(1e-15));
  CHECK(Spacing(1.5, 2.0, 4.0).voxel_volume_ml() == Spacing(4.0, 1.5, 2.0).voxel_volume_ml());
  CHECK(code_of([] { Spacing(0.0, 1.0, 1.0); }) == Errc::InvalidArgument);
  CHECK(code_of([] { Spacing(1.0, -1.0, 1.0); }) == Errc::InvalidArgument);
  CHECK(code_of([] { Spacing(1.0, 1.0, std::nan("")); }) == Errc::InvalidArgument);
}

TEST_CASE("grid rejects mismatched value count and non-binary masks") {
  const Spacing s(1, 1, 1);
  CHECK(code_of([&] { BinaryMask({2, 2, 2}, s, std::vector<std::uint8_t>(7)); }) == Errc::InvalidArgument);
  CHECK(code_of([&] { BinaryMask({0, 2, 2}, s, {}); }) == Errc::InvalidArgument);
  CHECK(code_of([&] { BinaryMask({1, 1, 2}, s, {0, 2}); }) == Errc::NonBinaryMask);
  CHECK(code_of([&] { ProbabilityMap({1, 1, 1}, s, {1.5}); }) == Errc::OutOfRangeProbability);
}

TEST_CASE("check_compatible") {
  const auto a = BinaryMask::zeros({4, 4, 4}, {2, 2, 2});
  CHECK_NOTHROW(check_compatible(a, BinaryMask::zeros({4, 4, 4}, {2, 2, 2})));
  CHECK_NOTHROW(check_compatible(a, BinaryMask::zeros({4, 4, 4}, {2, 2, 2.0005})));
  CHECK(code_of([&] { check_compatible(a, BinaryMask::zeros({4, 4, 5}, {2, 2, 2})); }) == Errc::DimsMismatch);
  CHECK(code_of([&] { check_compatible(a, BinaryMask::zeros({4, 4, 4}, {2, 2, 2.01})); }) == Errc::SpacingMismatch);
}

TEST_CASE("load a well-formed LBV1 mask") {
  TempDir dir;
  std::vector<std::uint8_t> payload(64, 0);
  payload[5] = 1;
  testutil::write_lbv(dir / "m.lbv", 4, 4, 4, 2.f, 2.f, 2.f, 0, payload);
  const BinaryMask m = load_mask(dir / "m.lbv");
  CHECK(m.dims() == Dims{4, 4, 4});
  CHECK(m.size() == 64);
  CHECK(m.spacing().voxel_volume_ml() == doctest::Approx(0.008));
  CHECK(m[5] == 1);
  CHECK(m.foreground_count() == 1);
}

TEST_CASE("load errors") {
  TempDir dir;
  CHECK(code_of([&] { load_mask(dir / "missing.lbv"); }) == Errc::UnreadableFile);
  CHECK(code_of([&] { load_mask(dir.path()); }) == Errc::UnreadableFile);

  testutil::write_file(dir / "junk.bin", "this is not a volume at all");
  CHECK(code_of([&] { load_mask(dir / "junk.bin"); }) == Errc::UnsupportedFormat);

  testutil::write_lbv<std::uint8_t>(dir / "two.lbv", 2, 1, 1, 1.f, 1.f, 1.f, 0, {0, 2});
  CHECK(code_of([&] { load_mask(dir / "two.lbv"); }) == Errc::NonBinaryMask);

  testutil::write_lbv<std::uint8_t>(dir / "short.lbv", 2, 2, 1, 1.f, 1.f, 1.f, 0, {0, 1, 0});
  CHECK(code_of([&] { load_mask(dir / "short.lbv"); }) == Errc::UnsupportedFormat);

  testutil::write_lbv<std::uint8_t>(dir / "long.lbv", 2, 1, 1, 1.f, 1.f, 1.f, 0, {0, 1, 0});
  CHECK(code_of([&] { load_mask(dir / "long.lbv"); }) == Errc::UnsupportedFormat);

  testutil::write_lbv<std::uint8_t>(dir / "nospacing.lbv", 1, 1, 1, 0.f, 1.f, 1.f, 0, {0});
  CHECK(code_of([&] { load_mask(dir / "nospacing.lbv"); }) == Errc::MissingSpacing);

  testutil::write_lbv<std::uint8_t>(dir / "kind.lbv", 1, 1, 1, 1.f, 1.f, 1.f, 9, {0});
  CHECK(code_of([&] { load_mask(dir / "kind.lbv"); }) == Errc::UnsupportedFormat);

  testutil::write_lbv<float>(dir / "p.lbv", 2, 1, 1, 1.f, 1.f, 1.f, 1, {0.5f, 1.01f});
  CHECK(code_of([&] { load_probability(dir / "p.lbv"); }) == Errc::OutOfRangeProbability);
  testutil::write_lbv<float>(dir / "neg.lbv", 1, 1, 1, 1.f, 1.f, 1.f, 1, {-0.01f});
  CHECK(code_of([&] { load_probability(dir / "neg.lbv"); }) == Errc::OutOfRangeProbability);
}

TEST_CASE("probabilities within tolerance are clamped") {
  TempDir dir;
  testutil::write_lbv<float>(dir / "p.lbv", 3, 1, 1, 1.f, 1.f, 1.f, 1, {1.0000004f, -0.0000005f, 0.25f});
  const ProbabilityMap p = load_probability(dir / "p.lbv");
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);
  CHECK(p[2] == 0.25);

  // A float-valued file that is binary within tolerance loads as a mask.
  testutil::write_lbv<float>(dir / "fm.lbv", 2, 1, 1, 1.f, 1.f, 1.f, 1, {0.9999995f, 0.0f});
  const BinaryMask m = load_mask(dir / "fm.lbv");
  CHECK(m[0] == 1);
  CHECK(m[1] == 0);
}

TEST_CASE("mask save/load round trip is value exact in every format") {
  TempDir dir;
  std::mt19937_64 gen(7);
  const Spacing spacing(0.7, 1.3, 2.5);
  const BinaryMask m = oracle::random_mask(gen, {8, 8, 8}, 0.4, spacing);
  for (const char* name : {"m.lbv", "m.nii", "m.nii.gz"}) {
    CAPTURE(name);
    save_mask(m, dir / name);
    const BinaryMask back = load_mask(dir / name);
    CHECK(back.dims() == m.dims());
    CHECK(std::abs(back.spacing().dx() - 0.7) <= 1e-6);
    CHECK(std::abs(back.spacing().dy() - 1.3) <= 1e-6);
    CHECK(std::abs(back.spacing().dz() - 2.5) <= 1e-6);
    CHECK(std::equal(back.values().begin(), back.values().end(), m.values().begin()));
  }
  const auto empty = BinaryMask::zeros({5, 3, 2}, spacing);
  save_mask(empty, dir / "empty.lbv");
  CHECK(load_mask(dir / "empty.lbv").foreground_count() == 0);
}

TEST_CASE("probability round trip is exact to 1e-7") {
  TempDir dir;
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(6 * 5 * 4);
  for (auto& x : v) x = u(gen);
  v[0] = 0.0;
  v[1] = 1.0;
  const ProbabilityMap p({6, 5, 4}, {1, 1, 3}, v);
  for (const char* name : {"p.lbv", "p.nii.gz"}) {
    CAPTURE(name);
    save_probability(p, dir / name);
    const ProbabilityMap back = load_probability(dir / name);
    REQUIRE(back.dims() == p.dims());
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(back[i] - v[i]) <= 1e-7);
  }
}

TEST_CASE("NIfTI with a downward slice axis is flipped to bottom-first") {
  TempDir dir;
  std::vector<std::uint8_t> v(2 * 2 * 3, 0);
  v[0] = 1;  // voxel (0,0,0) in file order
  const BinaryMask m({2, 2, 3}, {1, 1, 2}, v);
  save_mask(m, dir / "up.nii");
  CHECK(load_mask(dir / "up.nii").at(0, 0, 0) == 1);

  // Negate srow_z[2] (byte offset 320) so file slice 0 is the superior end.
  std::string bytes = testutil::slurp(dir / "up.nii");
  float srow_z2;
  std::memcpy(&srow_z2, bytes.data() + 320, 4);
  CHECK(srow_z2 == 2.0f);
  srow_z2 = -srow_z2;
  std::memcpy(bytes.data() + 320, &srow_z2, 4);
  testutil::write_file(dir / "down.nii", bytes);
  const BinaryMask flipped = load_mask(dir / "down.nii");
  CHECK(flipped.at(0, 0, 2) == 1);
  CHECK(flipped.at(0, 0, 0) == 0);
  CHECK(flipped.foreground_count() == 1);
}

TEST_CASE("NIfTI integer datatypes with scaling") {
  TempDir dir;
  save_mask(BinaryMask({2, 1, 1}, {1, 1, 1}, {1, 0}), dir / "m.nii");
  std::string bytes = testutil::slurp(dir / "m.nii");
  // scl_slope = 0.5 turns stored 1 into 0.5, which is not a mask value.
  const float slope = 0.5f;
  std::memcpy(bytes.data() + 112, &slope, 4);
  testutil::write_file(dir / "scaled.nii", bytes);
  CHECK(code_of([&] { load_mask(dir / "scaled.nii"); }) == Errc::NonBinaryMask);
  CHECK(load_probability(dir / "scaled.nii")[0] == 0.5);

  // Pair-file magic is not supported.
  bytes = testutil::slurp(dir / "m.nii");
  std::memcpy(bytes.data() + 344, "ni1\0", 4);
  testutil::write_file(dir / "pair.nii", bytes);
  CHECK(code_of([&] { load_mask(dir / "pair.nii"); }) == Errc::UnsupportedFormat);

  // Zero pixdim means the spacing is missing.
  bytes = testutil::slurp(dir / "m.nii");
  const float zero = 0.0f;
  std::memcpy(bytes.data() + 80, &zero, 4);
  testutil::write_file(dir / "nospacing.nii", bytes);
  CHECK(code_of([&] { load_mask(dir / "nospacing.nii"); }) == Errc::MissingSpacing);
}

TEST_CASE("save to an unwritable path") {
  TempDir dir;
  testutil::write_file(dir / "file", "x");
  const auto m = BinaryMask::zeros({2, 2, 2}, {1, 1, 1});
  CHECK(code_of([&] { save_mask(m, dir / "file" / "m.lbv"); }) == Errc::UnwritablePath);
  CHECK(code_of([&] { save_mask(m, dir / "no" / "such" / "dir" / "m.nii.gz"); }) == Errc::UnwritablePath);
}

TEST_CASE("label export uses LBV1 kind 2") {
  TempDir dir;
  const Grid<std::uint32_t> labels({2, 1, 1}, {1, 1, 1}, {0, 70000});
  save_labels(labels, dir / "l.lbv");
  const std::string bytes = testutil::slurp(dir / "l.lbv");
  REQUIRE(bytes.size() == 29 + 8);
  CHECK(bytes.substr(0, 4) == "LBV1");
  CHECK(static_cast<unsigned char>(bytes[28]) == 2);
  std::uint32_t second;
  std::memcpy(&second, bytes.data() + 33, 4);
  CHECK(second == 70000);
}
