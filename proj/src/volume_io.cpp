#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "lesionbench/error.hpp"
#include "lesionbench/volume.hpp"

namespace lesionbench {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

constexpr std::array<char, 4> kLbvMagic = {'L', 'B', 'V', '1'};
constexpr std::size_t kLbvHeaderSize = 4 + 3 * 4 + 3 * 4 + 1;

// NIfTI-1 single-file header. Field layout is naturally aligned to 348 bytes.
struct NiftiHeader {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1;
  float intent_p2;
  float intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max;
  float cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax;
  std::int32_t glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b;
  float quatern_c;
  float quatern_d;
  float qoffset_x;
  float qoffset_y;
  float qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
static_assert(sizeof(NiftiHeader) == 348);

enum class Scalar { U8, I8, I16, U16, I32, U32, F32, F64 };

std::size_t scalar_bytes(Scalar s) {
  switch (s) {
    case Scalar::U8:
    case Scalar::I8: return 1;
    case Scalar::I16:
    case Scalar::U16: return 2;
    case Scalar::I32:
    case Scalar::U32:
    case Scalar::F32: return 4;
    case Scalar::F64: return 8;
  }
  return 0;
}

template <typename T>
T byteswap_value(T v) {
  std::array<unsigned char, sizeof(T)> raw;
  std::memcpy(raw.data(), &v, sizeof(T));
  std::reverse(raw.begin(), raw.end());
  std::memcpy(&v, raw.data(), sizeof(T));
  return v;
}

template <typename T>
T load_scalar(const unsigned char* p, bool swap) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return swap ? byteswap_value(v) : v;
}

template <typename T>
void swap_in_place(T& v) {
  v = byteswap_value(v);
}

// Decoded file contents before conversion to a typed grid.
struct RawVolume {
  Dims dims;
  std::array<double, 3> spacing{};
  Scalar scalar = Scalar::U8;
  bool swap = false;
  bool flip_z = false;
  double slope = 1.0;
  double intercept = 0.0;
  std::vector<unsigned char> bytes;
  std::size_t payload_offset = 0;
};

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::UnreadableFile, "no such file: " + path.string());
  }
  // gzread passes uncompressed files through unchanged.
  std::unique_ptr<gzFile_s, decltype(&gzclose)> gz(gzopen(path.c_str(), "rb"), &gzclose);
  if (!gz) throw Error(Errc::UnreadableFile, "cannot open " + path.string());
  gzbuffer(gz.get(), 1 << 20);

  std::vector<unsigned char> out;
  constexpr unsigned kChunk = 1u << 22;
  for (;;) {
    const std::size_t old = out.size();
    out.resize(old + kChunk);
    const int n = gzread(gz.get(), out.data() + old, kChunk);
    if (n < 0) {
      int errnum = 0;
      const char* msg = gzerror(gz.get(), &errnum);
      throw Error(Errc::UnreadableFile, path.string() + ": " + (msg ? msg : "read error"));
    }
    out.resize(old + static_cast<std::size_t>(n));
    if (static_cast<unsigned>(n) < kChunk) break;
  }
  return out;
}

void check_payload_size(const RawVolume& raw, const std::filesystem::path& path) {
  const std::size_t need = raw.dims.voxel_count() * scalar_bytes(raw.scalar);
  const std::size_t have = raw.bytes.size() - std::min(raw.bytes.size(), raw.payload_offset);
  if (raw.bytes.size() < raw.payload_offset || have != need) {
    std::ostringstream os;
    os << path.string() << ": header declares " << to_string(raw.dims) << " (" << need
       << " payload bytes) but file holds " << have;
    throw Error(Errc::UnsupportedFormat, os.str());
  }
}

void check_spacing(const std::array<double, 3>& s, const std::filesystem::path& path) {
  for (double v : s) {
    if (!Spacing::valid_component(v)) {
      std::ostringstream os;
      os << path.string() << ": spacing (" << s[0] << ',' << s[1] << ',' << s[2] << ") is not usable";
      throw Error(Errc::MissingSpacing, os.str());
    }
  }
}

RawVolume parse_lbv(std::vector<unsigned char> bytes, const std::filesystem::path& path) {
  if (bytes.size() < kLbvHeaderSize) {
    throw Error(Errc::UnsupportedFormat, path.string() + ": truncated LBV1 header");
  }
  const bool swap = std::endian::native == std::endian::big;
  RawVolume raw;
  const unsigned char* p = bytes.data() + 4;
  raw.dims.nx = load_scalar<std::uint32_t>(p, swap);
  raw.dims.ny = load_scalar<std::uint32_t>(p + 4, swap);
  raw.dims.nz = load_scalar<std::uint32_t>(p + 8, swap);
  for (int i = 0; i < 3; ++i) raw.spacing[i] = load_scalar<float>(p + 12 + 4 * i, swap);
  const auto kind = bytes[kLbvHeaderSize - 1];
  switch (kind) {
    case 0: raw.scalar = Scalar::U8; break;
    case 1: raw.scalar = Scalar::F32; break;
    case 2: raw.scalar = Scalar::U32; break;
    default:
      throw Error(Errc::UnsupportedFormat, path.string() + ": unknown LBV1 kind byte " + std::to_string(kind));
  }
  if (raw.dims.nx == 0 || raw.dims.ny == 0 || raw.dims.nz == 0) {
    throw Error(Errc::UnsupportedFormat, path.string() + ": zero-sized dims " + to_string(raw.dims));
  }
  check_spacing(raw.spacing, path);
  raw.swap = swap;
  raw.payload_offset = kLbvHeaderSize;
  raw.bytes = std::move(bytes);
  check_payload_size(raw, path);
  return raw;
}

void swap_header(NiftiHeader& h) {
  swap_in_place(h.sizeof_hdr);
  swap_in_place(h.extents);
  swap_in_place(h.session_error);
  for (auto& d : h.dim) swap_in_place(d);
  swap_in_place(h.intent_p1);
  swap_in_place(h.intent_p2);
  swap_in_place(h.intent_p3);
  swap_in_place(h.intent_code);
  swap_in_place(h.datatype);
  swap_in_place(h.bitpix);
  swap_in_place(h.slice_start);
  for (auto& d : h.pixdim) swap_in_place(d);
  swap_in_place(h.vox_offset);
  swap_in_place(h.scl_slope);
  swap_in_place(h.scl_inter);
  swap_in_place(h.slice_end);
  swap_in_place(h.cal_max);
  swap_in_place(h.cal_min);
  swap_in_place(h.slice_duration);
  swap_in_place(h.toffset);
  swap_in_place(h.glmax);
  swap_in_place(h.glmin);
  swap_in_place(h.qform_code);
  swap_in_place(h.sform_code);
  swap_in_place(h.quatern_b);
  swap_in_place(h.quatern_c);
  swap_in_place(h.quatern_d);
  swap_in_place(h.qoffset_x);
  swap_in_place(h.qoffset_y);
  swap_in_place(h.qoffset_z);
  for (auto& v : h.srow_x) swap_in_place(v);
  for (auto& v : h.srow_y) swap_in_place(v);
  for (auto& v : h.srow_z) swap_in_place(v);
}

bool looks_like_nifti(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < sizeof(NiftiHeader)) return false;
  const auto n = load_scalar<std::int32_t>(bytes.data(), false);
  return n == 348 || byteswap_value(n) == 348;
}

// World-space z component of the k (slice) axis. Negative means slice 0 is the
// superior end, so the grid is flipped to put the bottom at z = 0.
double slice_axis_world_z(const NiftiHeader& h) {
  if (h.sform_code > 0) return h.srow_z[2];
  if (h.qform_code > 0) {
    const double b = h.quatern_b, c = h.quatern_c, d = h.quatern_d;
    const double a = std::sqrt(std::max(0.0, 1.0 - (b * b + c * c + d * d)));
    const double qfac = h.pixdim[0] < 0 ? -1.0 : 1.0;
    return (a * a + d * d - b * b - c * c) * qfac;
  }
  return 1.0;
}

RawVolume parse_nifti(std::vector<unsigned char> bytes, const std::filesystem::path& path) {
  NiftiHeader h;
  std::memcpy(&h, bytes.data(), sizeof(h));
  RawVolume raw;
  if (h.sizeof_hdr != 348) {
    swap_header(h);
    raw.swap = true;
  }
  if (std::memcmp(h.magic, "n+1\0", 4) != 0) {
    throw Error(Errc::UnsupportedFormat, path.string() + ": only single-file NIfTI-1 (magic n+1) is supported");
  }
  const int ndim = h.dim[0];
  if (ndim < 1 || ndim > 7) {
    throw Error(Errc::UnsupportedFormat, path.string() + ": invalid dim[0] = " + std::to_string(ndim));
  }
  std::array<std::size_t, 3> extent{1, 1, 1};
  for (int i = 1; i <= ndim; ++i) {
    if (h.dim[i] < 1) {
      throw Error(Errc::UnsupportedFormat, path.string() + ": dim[" + std::to_string(i) + "] < 1");
    }
    if (i <= 3) {
      extent[i - 1] = static_cast<std::size_t>(h.dim[i]);
    } else if (h.dim[i] != 1) {
      throw Error(Errc::UnsupportedFormat, path.string() + ": only 3D volumes are supported");
    }
  }
  raw.dims = {extent[0], extent[1], extent[2]};

  switch (h.datatype) {
    case 2: raw.scalar = Scalar::U8; break;
    case 4: raw.scalar = Scalar::I16; break;
    case 8: raw.scalar = Scalar::I32; break;
    case 16: raw.scalar = Scalar::F32; break;
    case 64: raw.scalar = Scalar::F64; break;
    case 256: raw.scalar = Scalar::I8; break;
    case 512: raw.scalar = Scalar::U16; break;
    case 768: raw.scalar = Scalar::U32; break;
    default:
      throw Error(Errc::UnsupportedFormat, path.string() + ": unsupported datatype " + std::to_string(h.datatype));
  }

  for (int i = 0; i < 3; ++i) raw.spacing[i] = h.pixdim[i + 1];
  check_spacing(raw.spacing, path);

  if (!(h.vox_offset >= 348.0f) || !std::isfinite(h.vox_offset)) {
    throw Error(Errc::UnsupportedFormat, path.string() + ": invalid vox_offset");
  }
  raw.payload_offset = static_cast<std::size_t>(h.vox_offset);
  if (std::isfinite(h.scl_slope) && h.scl_slope != 0.0f) {
    raw.slope = h.scl_slope;
    raw.intercept = std::isfinite(h.scl_inter) ? h.scl_inter : 0.0;
  }
  raw.flip_z = slice_axis_world_z(h) < 0.0;
  raw.bytes = std::move(bytes);
  check_payload_size(raw, path);
  return raw;
}

RawVolume read_raw(const std::filesystem::path& path) {
  auto bytes = read_all(path);
  if (bytes.size() >= 4 && std::equal(kLbvMagic.begin(), kLbvMagic.end(), bytes.begin())) {
    return parse_lbv(std::move(bytes), path);
  }
  if (looks_like_nifti(bytes)) return parse_nifti(std::move(bytes), path);
  throw Error(Errc::UnsupportedFormat, path.string() + ": neither LBV1 nor NIfTI-1");
}

// Calls convert(source_value, output_index) for every voxel in output order.
template <typename T, typename Convert>
void decode_typed(const RawVolume& raw, Convert&& convert) {
  const std::size_t slice = raw.dims.slice_size();
  const unsigned char* base = raw.bytes.data() + raw.payload_offset;
  const bool scaled = raw.slope != 1.0 || raw.intercept != 0.0;
  for (std::size_t z = 0; z < raw.dims.nz; ++z) {
    const std::size_t src_z = raw.flip_z ? raw.dims.nz - 1 - z : z;
    const unsigned char* src = base + src_z * slice * sizeof(T);
    const std::size_t out = z * slice;
    for (std::size_t i = 0; i < slice; ++i) {
      double v = static_cast<double>(load_scalar<T>(src + i * sizeof(T), raw.swap));
      if (scaled) v = v * raw.slope + raw.intercept;
      convert(v, out + i);
    }
  }
}

template <typename Convert>
void decode(const RawVolume& raw, Convert&& convert) {
  switch (raw.scalar) {
    case Scalar::U8: return decode_typed<std::uint8_t>(raw, convert);
    case Scalar::I8: return decode_typed<std::int8_t>(raw, convert);
    case Scalar::I16: return decode_typed<std::int16_t>(raw, convert);
    case Scalar::U16: return decode_typed<std::uint16_t>(raw, convert);
    case Scalar::I32: return decode_typed<std::int32_t>(raw, convert);
    case Scalar::U32: return decode_typed<std::uint32_t>(raw, convert);
    case Scalar::F32: return decode_typed<float>(raw, convert);
    case Scalar::F64: return decode_typed<double>(raw, convert);
  }
}

Spacing raw_spacing(const RawVolume& raw) { return Spacing(raw.spacing[0], raw.spacing[1], raw.spacing[2]); }

// Output sink writing either gzip or plain bytes.
class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path) {
    const auto name = path.filename().string();
    const bool gz = name.size() > 3 && name.compare(name.size() - 3, 3, ".gz") == 0;
    if (gz) {
      gz_ = gzopen(path.c_str(), "wb6");
      if (!gz_) fail("cannot open for writing");
    } else {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) fail("cannot open for writing");
    }
  }
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;
  ~Writer() {
    if (gz_) gzclose(gz_);
  }

  void write(const void* data, std::size_t n) {
    if (gz_) {
      const auto* p = static_cast<const char*>(data);
      while (n > 0) {
        const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
        if (gzwrite(gz_, p, chunk) != static_cast<int>(chunk)) fail("write failed");
        p += chunk;
        n -= chunk;
      }
    } else {
      file_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
      if (!file_) fail("write failed");
    }
  }

  void close() {
    if (gz_) {
      const int rc = gzclose(gz_);
      gz_ = nullptr;
      if (rc != Z_OK) fail("close failed");
    } else {
      file_.close();
      if (!file_) fail("close failed");
    }
  }

 private:
  [[noreturn]] void fail(const char* what) const {
    throw Error(Errc::UnwritablePath, path_.string() + ": " + what);
  }

  std::filesystem::path path_;
  gzFile gz_ = nullptr;
  std::ofstream file_;
};

template <typename T>
void put(std::vector<unsigned char>& buf, T v) {
  if constexpr (std::endian::native == std::endian::big) v = byteswap_value(v);
  const auto old = buf.size();
  buf.resize(old + sizeof(T));
  std::memcpy(buf.data() + old, &v, sizeof(T));
}

// Streams values through a conversion into fixed-size little-endian chunks.
template <typename Out, typename In>
void write_payload(Writer& w, std::span<const In> values) {
  constexpr std::size_t kChunk = 1 << 18;
  std::vector<unsigned char> buf;
  buf.reserve(kChunk * sizeof(Out));
  for (std::size_t i = 0; i < values.size(); i += kChunk) {
    buf.clear();
    const std::size_t end = std::min(values.size(), i + kChunk);
    for (std::size_t j = i; j < end; ++j) put<Out>(buf, static_cast<Out>(values[j]));
    w.write(buf.data(), buf.size());
  }
}

bool is_nifti_path(const std::filesystem::path& path) {
  const auto name = path.filename().string();
  auto ends_with = [&](std::string_view suffix) {
    return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return ends_with(".nii") || ends_with(".nii.gz");
}

void write_lbv_header(Writer& w, const Dims& dims, const Spacing& spacing, VolumeKind kind) {
  std::vector<unsigned char> buf(kLbvMagic.begin(), kLbvMagic.end());
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(dims.nx));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(dims.ny));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(dims.nz));
  put<float>(buf, static_cast<float>(spacing.dx()));
  put<float>(buf, static_cast<float>(spacing.dy()));
  put<float>(buf, static_cast<float>(spacing.dz()));
  buf.push_back(static_cast<unsigned char>(kind));
  w.write(buf.data(), buf.size());
}

void write_nifti_header(Writer& w, const Dims& dims, const Spacing& spacing, std::int16_t datatype,
                        std::int16_t bitpix) {
  NiftiHeader h{};
  h.sizeof_hdr = 348;
  h.regular = 'r';
  h.dim[0] = 3;
  h.dim[1] = static_cast<std::int16_t>(dims.nx);
  h.dim[2] = static_cast<std::int16_t>(dims.ny);
  h.dim[3] = static_cast<std::int16_t>(dims.nz);
  for (int i = 4; i < 8; ++i) h.dim[i] = 1;
  h.datatype = datatype;
  h.bitpix = bitpix;
  h.pixdim[0] = 1.0f;
  h.pixdim[1] = static_cast<float>(spacing.dx());
  h.pixdim[2] = static_cast<float>(spacing.dy());
  h.pixdim[3] = static_cast<float>(spacing.dz());
  h.vox_offset = 352.0f;
  h.xyzt_units = 2;  // millimetres
  h.qform_code = 1;
  h.sform_code = 1;
  h.srow_x[0] = h.pixdim[1];
  h.srow_y[1] = h.pixdim[2];
  h.srow_z[2] = h.pixdim[3];
  std::memcpy(h.magic, "n+1\0", 4);
  if constexpr (std::endian::native == std::endian::big) swap_header(h);
  w.write(&h, sizeof(h));
  const std::array<unsigned char, 4> no_extension{};
  w.write(no_extension.data(), no_extension.size());
}

void check_nifti_dims(const Dims& dims, const std::filesystem::path& path) {
  constexpr std::size_t kMax = 32767;
  if (dims.nx > kMax || dims.ny > kMax || dims.nz > kMax) {
    throw Error(Errc::UnsupportedFormat, path.string() + ": NIfTI-1 dims are limited to 32767 per axis");
  }
}

}  // namespace

BinaryMask load_mask(const std::filesystem::path& path) {
  const RawVolume raw = read_raw(path);
  std::vector<std::uint8_t> values(raw.dims.voxel_count());
  decode(raw, [&](double v, std::size_t i) {
    if (std::abs(v) <= kLoadTolerance) {
      values[i] = 0;
    } else if (std::abs(v - 1.0) <= kLoadTolerance) {
      values[i] = 1;
    } else {
      std::ostringstream os;
      os << path.string() << ": voxel " << i << " has value " << v;
      throw Error(Errc::NonBinaryMask, os.str());
    }
  });
  return BinaryMask(raw.dims, raw_spacing(raw), std::move(values));
}

ProbabilityMap load_probability(const std::filesystem::path& path) {
  const RawVolume raw = read_raw(path);
  std::vector<double> values(raw.dims.voxel_count());
  decode(raw, [&](double v, std::size_t i) {
    if (!(v >= -kLoadTolerance && v <= 1.0 + kLoadTolerance)) {
      std::ostringstream os;
      os << path.string() << ": voxel " << i << " has probability " << v;
      throw Error(Errc::OutOfRangeProbability, os.str());
    }
    values[i] = std::clamp(v, 0.0, 1.0);
  });
  return ProbabilityMap(raw.dims, raw_spacing(raw), std::move(values));
}

std::variant<BinaryMask, ProbabilityMap> load_volume(const std::filesystem::path& path, VolumeKind kind) {
  switch (kind) {
    case VolumeKind::Mask: return load_mask(path);
    case VolumeKind::Probability: return load_probability(path);
    case VolumeKind::Labels: break;
  }
  throw Error(Errc::InvalidArgument, "label volumes are export-only");
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  if (is_nifti_path(path)) check_nifti_dims(mask.dims(), path);
  Writer w(path);
  if (is_nifti_path(path)) {
    write_nifti_header(w, mask.dims(), mask.spacing(), 2, 8);
  } else {
    write_lbv_header(w, mask.dims(), mask.spacing(), VolumeKind::Mask);
  }
  w.write(mask.values().data(), mask.values().size());
  w.close();
}

void save_probability(const ProbabilityMap& map, const std::filesystem::path& path) {
  if (is_nifti_path(path)) check_nifti_dims(map.dims(), path);
  Writer w(path);
  if (is_nifti_path(path)) {
    write_nifti_header(w, map.dims(), map.spacing(), 16, 32);
  } else {
    write_lbv_header(w, map.dims(), map.spacing(), VolumeKind::Probability);
  }
  write_payload<float>(w, map.values());
  w.close();
}

void save_labels(const Grid<std::uint32_t>& labels, const std::filesystem::path& path) {
  Writer w(path);
  write_lbv_header(w, labels.dims(), labels.spacing(), VolumeKind::Labels);
  write_payload<std::uint32_t>(w, labels.values());
  w.close();
}

}  // namespace lesionbench
