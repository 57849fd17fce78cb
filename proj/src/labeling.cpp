#include "lesionbench/labeling.hpp"

#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>

#include "lesionbench/error.hpp"

namespace lesionbench {
namespace {

class DisjointSet {
 public:
  DisjointSet() {
    parent_.push_back(0);
    size_.push_back(0);
  }

  std::uint32_t make_set() {
    const auto id = static_cast<std::uint32_t>(parent_.size());
    parent_.push_back(id);
    size_.push_back(1);
    return id;
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  std::uint32_t unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }

  std::size_t count() const noexcept { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

// Neighbours already visited by a raster scan (x fastest, then y, then z).
std::vector<Offset> backward_offsets(Connectivity conn) {
  std::vector<Offset> out;
  for (const Offset& o : neighbor_offsets(conn)) {
    const bool earlier = o.dz < 0 || (o.dz == 0 && (o.dy < 0 || (o.dy == 0 && o.dx < 0)));
    if (earlier) out.push_back(o);
  }
  return out;
}

}  // namespace

Connectivity parse_connectivity(std::string_view text) {
  if (text == "6") return Connectivity::Face6;
  if (text == "18") return Connectivity::Edge18;
  if (text == "26") return Connectivity::Vertex26;
  throw Error(Errc::InvalidArgument, "connectivity must be 6, 18 or 26, got '" + std::string(text) + "'");
}

int connectivity_value(Connectivity conn) noexcept { return static_cast<int>(conn); }

std::vector<Offset> neighbor_offsets(Connectivity conn) {
  // Manhattan distance 1 = faces, 2 = edges, 3 = corners.
  const int max_manhattan = conn == Connectivity::Face6 ? 1 : conn == Connectivity::Edge18 ? 2 : 3;
  std::vector<Offset> out;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int m = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (m >= 1 && m <= max_manhattan) out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

std::size_t ComponentLabeling::foreground_count() const noexcept {
  return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
}

ComponentLabeling label_components(const BinaryMask& mask, Connectivity conn) {
  const Dims d = mask.dims();
  const std::size_t n = d.voxel_count();
  if (n >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::InvalidArgument, "grid " + to_string(d) + " too large for 32-bit labels");
  }
  const auto in = mask.values();
  std::vector<std::uint32_t> labels(n, 0);

  struct Neighbor {
    Offset o;
    std::ptrdiff_t delta;
  };
  std::vector<Neighbor> neighbors;
  for (const Offset& o : backward_offsets(conn)) {
    const auto delta = static_cast<std::ptrdiff_t>(o.dx) +
                       static_cast<std::ptrdiff_t>(d.nx) *
                           (static_cast<std::ptrdiff_t>(o.dy) + static_cast<std::ptrdiff_t>(d.ny) * o.dz);
    neighbors.push_back({o, delta});
  }

  DisjointSet sets;
  const auto nx = static_cast<std::ptrdiff_t>(d.nx);
  const auto ny = static_cast<std::ptrdiff_t>(d.ny);
  const auto nz = static_cast<std::ptrdiff_t>(d.nz);
  std::size_t i = 0;
  for (std::ptrdiff_t z = 0; z < nz; ++z) {
    for (std::ptrdiff_t y = 0; y < ny; ++y) {
      const bool y_interior = z > 0 && y > 0 && y < ny - 1;
      for (std::ptrdiff_t x = 0; x < nx; ++x, ++i) {
        if (!in[i]) continue;
        const bool interior = y_interior && x > 0 && x < nx - 1;
        std::uint32_t cur = 0;
        for (const Neighbor& nb : neighbors) {
          if (!interior) {
            const auto xx = x + nb.o.dx, yy = y + nb.o.dy, zz = z + nb.o.dz;
            if (xx < 0 || xx >= nx || yy < 0 || yy >= ny || zz < 0) continue;
          }
          const std::uint32_t l = labels[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + nb.delta)];
          if (l == 0) continue;
          if (cur == 0) {
            cur = l;
          } else if (l != cur) {
            cur = sets.unite(cur, l);
          }
        }
        labels[i] = cur != 0 ? cur : sets.make_set();
      }
    }
  }

  // Second pass: resolve roots and renumber in raster order of first voxel.
  std::vector<std::uint32_t> final_id(sets.count(), 0);
  std::uint32_t n_components = 0;
  std::vector<std::size_t> sizes{0};
  std::vector<ZExtent> z_extent{ZExtent{0, 0}};
  i = 0;
  for (std::size_t z = 0; z < d.nz; ++z) {
    const auto zz = static_cast<std::uint32_t>(z);
    for (std::size_t k = 0; k < d.slice_size(); ++k, ++i) {
      if (labels[i] == 0) continue;
      const std::uint32_t root = sets.find(labels[i]);
      std::uint32_t& id = final_id[root];
      if (id == 0) {
        id = ++n_components;
        sizes.push_back(0);
        z_extent.push_back({zz, zz});
      }
      labels[i] = id;
      ++sizes[id];
      z_extent[id].max_z = zz;
    }
  }
  return ComponentLabeling{Grid<std::uint32_t>(d, mask.spacing(), std::move(labels)), n_components,
                           std::move(sizes), std::move(z_extent)};
}

std::vector<std::size_t> overlap_table(const ComponentLabeling& labeling, const BinaryMask& other) {
  check_compatible(labeling.labels, other);
  std::vector<std::size_t> counts(labeling.n_components + 1, 0);
  const auto labels = labeling.labels.values();
  const auto b = other.values();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && b[i]) ++counts[labels[i]];
  }
  return counts;
}

}  // namespace lesionbench
