#ifndef PERCLOUD_HILBERT_HPP
#define PERCLOUD_HILBERT_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "percloud/point_cloud.hpp"

namespace percloud {

// Bits per axis. 3*r_bits <= 63 keeps every index in one 64-bit word.
struct HilbertConfig {
  std::uint32_t r_bits = 16;

  void validate() const {
    if (r_bits < 1 || r_bits > 21)
      throw BadParams("r_bits must be in [1, 21]");
  }

  std::uint64_t cells_per_axis() const { return std::uint64_t{1} << r_bits; }
  std::uint64_t index_range() const { return std::uint64_t{1} << (3 * r_bits); }
};

struct Bbox {
  Vec3 min;
  Vec3 max;
};

// Serialized cloud: per-point curve indices plus the sorting permutation
// (ties broken by original position) and the bbox used for normalization.
struct HilbertCode {
  std::vector<std::uint64_t> indices;  // h_i, original point order
  std::vector<std::uint32_t> order;    // permutation: order[r] = original id
  Bbox bbox;
  std::uint32_t r_bits = 0;
};

// L contiguous runs of the serialized order. Sizes are floor(N/L) for all
// parts but the last, which absorbs N mod L.
struct PartitionSet {
  std::vector<std::uint32_t> part_of;  // original id -> part id
  std::uint32_t parts = 0;
  std::vector<std::uint32_t> sizes;
};

// Affine per-axis map onto [0,1]; axes with max == min collapse to 0.5.
std::pair<Matrix, Bbox> normalize(const PointCloud& cloud);
Matrix normalize_with_bbox(const Matrix& coords, const Bbox& bbox);

// floor(u * 2^r_bits), clamped into [0, 2^r_bits - 1].
std::array<std::uint32_t, 3> discretize(const Vec3& unit, std::uint32_t r_bits);

std::uint64_t gray_encode(std::uint64_t value);
std::uint64_t gray_decode(std::uint64_t value);

// Bit i of x lands at position 3i, of y at 3i+1, of z at 3i+2.
std::uint64_t interleave(std::uint32_t x, std::uint32_t y, std::uint32_t z,
                         std::uint32_t r_bits);
std::array<std::uint32_t, 3> deinterleave(std::uint64_t code,
                                          std::uint32_t r_bits);

// Curve index of a grid cell: a bijection onto [0, 2^(3 r_bits)) in which
// consecutive indices map to face-adjacent cells. Origin cell maps to 0.
std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y, std::uint32_t z,
                            std::uint32_t r_bits);
std::array<std::uint32_t, 3> hilbert_decode(std::uint64_t index,
                                            std::uint32_t r_bits);

// Z-order baseline for benchmarks: plain bit interleaving, no rotations.
std::uint64_t morton_index(std::uint32_t x, std::uint32_t y, std::uint32_t z,
                           std::uint32_t r_bits);

enum class CurveKind { kHilbert, kMorton };

// normalize -> discretize -> per-point index -> stable sort by (index, id).
// Per-point encoding parallelizes; output is identical for any thread count.
HilbertCode serialize(const PointCloud& cloud, const HilbertConfig& cfg,
                      unsigned threads = 1, CurveKind curve = CurveKind::kHilbert);

// Indices against a caller-provided bbox (joint serialization of unions).
std::vector<std::uint64_t> hilbert_indices_in_bbox(const Matrix& coords,
                                                   const Bbox& bbox,
                                                   std::uint32_t r_bits,
                                                   unsigned threads = 1);

PartitionSet partition(const HilbertCode& code, std::uint32_t parts);

// Text export, one "original_index hilbert_index" line per point in
// serialized order. `provenance` becomes a leading comment when non-empty.
void write_hilbert_code(const HilbertCode& code, const std::string& path,
                        const std::string& provenance = "");

}  // namespace percloud

#endif
