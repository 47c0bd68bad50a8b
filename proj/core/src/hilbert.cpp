#include "percloud/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "percloud/parallel.hpp"

namespace percloud {
namespace {

// Skilling's transpose form: axes -> curve digits via an invert/exchange
// sweep over bit planes followed by the Gray-code fold. The packed index
// takes X[0]'s bit as the most significant of each 3-bit group.
void axes_to_transpose(std::uint32_t (&x)[3], std::uint32_t r_bits) {
  const std::uint32_t msb = std::uint32_t{1} << (r_bits - 1);
  for (std::uint32_t q = msb; q > 1; q >>= 1) {
    const std::uint32_t p = q - 1;
    for (int i = 0; i < 3; ++i) {
      if (x[i] & q) {
        x[0] ^= p;  // invert
      } else {
        const std::uint32_t t = (x[0] ^ x[i]) & p;  // exchange
        x[0] ^= t;
        x[i] ^= t;
      }
    }
  }
  // Gray encode
  x[1] ^= x[0];
  x[2] ^= x[1];
  std::uint32_t t = 0;
  for (std::uint32_t q = msb; q > 1; q >>= 1)
    if (x[2] & q) t ^= q - 1;
  for (int i = 0; i < 3; ++i) x[i] ^= t;
}

void transpose_to_axes(std::uint32_t (&x)[3], std::uint32_t r_bits) {
  const std::uint32_t msb = std::uint32_t{1} << (r_bits - 1);
  // Gray decode
  std::uint32_t t = x[2] >> 1;
  for (int i = 2; i > 0; --i) x[i] ^= x[i - 1];
  x[0] ^= t;
  // Undo excess work
  for (std::uint32_t q = 2; q != 2 * msb; q <<= 1) {
    const std::uint32_t p = q - 1;
    for (int i = 2; i > 0; --i) {
      if (x[i] & q) {
        x[0] ^= p;
      } else {
        const std::uint32_t swap = (x[0] ^ x[i]) & p;
        x[0] ^= swap;
        x[i] ^= swap;
      }
    }
    if (x[0] & q) x[0] ^= p;
  }
}

}  // namespace

std::pair<Matrix, Bbox> normalize(const PointCloud& cloud) {
  Bbox bbox{cloud.coords().colwise().minCoeff().transpose(),
            cloud.coords().colwise().maxCoeff().transpose()};
  return {normalize_with_bbox(cloud.coords(), bbox), bbox};
}

Matrix normalize_with_bbox(const Matrix& coords, const Bbox& bbox) {
  Matrix unit(coords.rows(), 3);
  for (int j = 0; j < 3; ++j) {
    const double span = bbox.max(j) - bbox.min(j);
    if (span <= 0.0) {
      unit.col(j).setConstant(0.5);
    } else {
      unit.col(j) = (coords.col(j).array() - bbox.min(j)) / span;
    }
  }
  return unit;
}

std::array<std::uint32_t, 3> discretize(const Vec3& unit,
                                        std::uint32_t r_bits) {
  const double scale = static_cast<double>(std::uint64_t{1} << r_bits);
  const double top = scale - 1.0;
  std::array<std::uint32_t, 3> grid{};
  for (int j = 0; j < 3; ++j) {
    const double g = std::clamp(std::floor(unit(j) * scale), 0.0, top);
    grid[j] = static_cast<std::uint32_t>(g);
  }
  return grid;
}

std::uint64_t gray_encode(std::uint64_t value) { return value ^ (value >> 1); }

std::uint64_t gray_decode(std::uint64_t value) {
  for (std::uint64_t shift = 1; shift < 64; shift <<= 1) value ^= value >> shift;
  return value;
}

std::uint64_t interleave(std::uint32_t x, std::uint32_t y, std::uint32_t z,
                         std::uint32_t r_bits) {
  std::uint64_t h = 0;
  for (std::uint32_t i = 0; i < r_bits; ++i) {
    h |= (std::uint64_t{(x >> i) & 1u}) << (3 * i);
    h |= (std::uint64_t{(y >> i) & 1u}) << (3 * i + 1);
    h |= (std::uint64_t{(z >> i) & 1u}) << (3 * i + 2);
  }
  return h;
}

std::array<std::uint32_t, 3> deinterleave(std::uint64_t code,
                                          std::uint32_t r_bits) {
  std::array<std::uint32_t, 3> out{};
  for (std::uint32_t i = 0; i < r_bits; ++i) {
    out[0] |= static_cast<std::uint32_t>((code >> (3 * i)) & 1u) << i;
    out[1] |= static_cast<std::uint32_t>((code >> (3 * i + 1)) & 1u) << i;
    out[2] |= static_cast<std::uint32_t>((code >> (3 * i + 2)) & 1u) << i;
  }
  return out;
}

std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y, std::uint32_t z,
                            std::uint32_t r_bits) {
  std::uint32_t t[3] = {x, y, z};
  axes_to_transpose(t, r_bits);
  // X[0] carries the top bit of each 3-bit digit.
  return interleave(t[2], t[1], t[0], r_bits);
}

std::array<std::uint32_t, 3> hilbert_decode(std::uint64_t index,
                                            std::uint32_t r_bits) {
  const auto digits = deinterleave(index, r_bits);
  std::uint32_t t[3] = {digits[2], digits[1], digits[0]};
  transpose_to_axes(t, r_bits);
  return {t[0], t[1], t[2]};
}

std::uint64_t morton_index(std::uint32_t x, std::uint32_t y, std::uint32_t z,
                           std::uint32_t r_bits) {
  return interleave(x, y, z, r_bits);
}

HilbertCode serialize(const PointCloud& cloud, const HilbertConfig& cfg,
                      unsigned threads, CurveKind curve) {
  cfg.validate();
  auto [unit, bbox] = normalize(cloud);
  const auto n = static_cast<std::size_t>(cloud.size());

  HilbertCode code;
  code.r_bits = cfg.r_bits;
  code.bbox = bbox;
  code.indices.resize(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto g = discretize(unit.row(static_cast<Eigen::Index>(i)).transpose(),
                                cfg.r_bits);
      code.indices[i] = curve == CurveKind::kHilbert
                            ? hilbert_index(g[0], g[1], g[2], cfg.r_bits)
                            : morton_index(g[0], g[1], g[2], cfg.r_bits);
    }
  });

  code.order.resize(n);
  std::iota(code.order.begin(), code.order.end(), 0u);
  std::sort(code.order.begin(), code.order.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              if (code.indices[a] != code.indices[b])
                return code.indices[a] < code.indices[b];
              return a < b;  // stable under equal indices
            });
  return code;
}

std::vector<std::uint64_t> hilbert_indices_in_bbox(const Matrix& coords,
                                                   const Bbox& bbox,
                                                   std::uint32_t r_bits,
                                                   unsigned threads) {
  const Matrix unit = normalize_with_bbox(coords, bbox);
  std::vector<std::uint64_t> out(static_cast<std::size_t>(coords.rows()));
  parallel_for(out.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto g =
          discretize(unit.row(static_cast<Eigen::Index>(i)).transpose(), r_bits);
      out[i] = hilbert_index(g[0], g[1], g[2], r_bits);
    }
  });
  return out;
}

PartitionSet partition(const HilbertCode& code, std::uint32_t parts) {
  const auto n = static_cast<std::uint32_t>(code.order.size());
  if (parts == 0) throw BadParams("part count must be >= 1");
  if (parts > n)
    throw BadParams("part count " + std::to_string(parts) + " exceeds N = " +
                    std::to_string(n));

  PartitionSet set;
  set.parts = parts;
  set.part_of.resize(n);
  set.sizes.assign(parts, n / parts);
  set.sizes.back() += n % parts;

  std::uint32_t rank = 0;
  for (std::uint32_t p = 0; p < parts; ++p)
    for (std::uint32_t k = 0; k < set.sizes[p]; ++k, ++rank)
      set.part_of[code.order[rank]] = p;
  return set;
}

void write_hilbert_code(const HilbertCode& code, const std::string& path,
                        const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (!provenance.empty()) out << "# " << provenance << '\n';
  for (std::uint32_t id : code.order)
    out << id << ' ' << code.indices[id] << '\n';
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace percloud
