#include "percloud/synthetic.hpp"

#include <cmath>

#include "percloud/rng.hpp"

namespace percloud {
namespace {

// Block-wise point counts: floor(n/groups) each, extras to the leading groups.
std::vector<std::uint32_t> block_counts(std::uint32_t n, std::uint32_t groups) {
  std::vector<std::uint32_t> counts(groups, n / groups);
  for (std::uint32_t g = 0; g < n % groups; ++g) ++counts[g];
  return counts;
}

LabeledCloud uniform_cube(std::uint32_t n, std::uint64_t seed, double edge) {
  if (edge <= 0.0) throw BadParams("uniform-cube edge must be positive");
  Rng rng(seed);
  Matrix coords(n, 3);
  for (std::uint32_t i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) coords(i, j) = rng.uniform(0.0, edge);
  return LabeledCloud(PointCloud(std::move(coords)),
                      std::vector<std::uint32_t>(n, 0));
}

LabeledCloud gaussian_clusters(std::uint32_t n, std::uint64_t seed,
                               const SyntheticParams& p) {
  if (p.clusters < 1) throw BadParams("cluster count must be >= 1");
  if (p.stddev < 0.0) throw BadParams("stddev must be non-negative");
  if (p.separation <= 0.0) throw BadParams("separation must be positive");
  if (n < p.clusters)
    throw BadParams("need at least one point per cluster");

  // Lattice centers guarantee pairwise spacing >= separation.
  const auto side = static_cast<std::uint32_t>(
      std::ceil(std::cbrt(static_cast<double>(p.clusters))));
  std::vector<Vec3> centers(p.clusters);
  for (std::uint32_t c = 0; c < p.clusters; ++c)
    centers[c] = Vec3(static_cast<double>(c % side),
                      static_cast<double>((c / side) % side),
                      static_cast<double>(c / (side * side))) *
                 p.separation;

  Rng rng(seed);
  Matrix coords(n, 3);
  std::vector<std::uint32_t> labels(n);
  const auto counts = block_counts(n, p.clusters);
  std::uint32_t row = 0;
  for (std::uint32_t c = 0; c < p.clusters; ++c)
    for (std::uint32_t k = 0; k < counts[c]; ++k, ++row) {
      for (int j = 0; j < 3; ++j)
        coords(row, j) = centers[c](j) + p.stddev * rng.gaussian();
      labels[row] = c;
    }
  return LabeledCloud(PointCloud(std::move(coords)), std::move(labels));
}

LabeledCloud room_grid(std::uint32_t n, std::uint64_t seed,
                       const SyntheticParams& p) {
  if (p.boxes_x < 1 || p.boxes_y < 1 || p.boxes_z < 1)
    throw BadParams("room-grid box counts must be >= 1");
  if (p.room <= 0.0) throw BadParams("room extent must be positive");
  if (p.gap < 0.0 || p.gap >= 1.0)
    throw BadParams("gap must be in [0, 1)");
  const std::uint32_t boxes = p.boxes_x * p.boxes_y * p.boxes_z;
  if (n < boxes) throw BadParams("need at least one point per box");

  const double tx = p.room / p.boxes_x;
  const double ty = p.room / p.boxes_y;
  const double tz = p.room / p.boxes_z;

  Rng rng(seed);
  Matrix coords(n, 3);
  std::vector<std::uint32_t> labels(n);
  const auto counts = block_counts(n, boxes);
  std::uint32_t row = 0;
  for (std::uint32_t b = 0; b < boxes; ++b) {
    const std::uint32_t bx = b % p.boxes_x;
    const std::uint32_t by = (b / p.boxes_x) % p.boxes_y;
    const std::uint32_t bz = b / (p.boxes_x * p.boxes_y);
    const double half = (1.0 - p.gap) / 2.0;
    for (std::uint32_t k = 0; k < counts[b]; ++k, ++row) {
      coords(row, 0) = (bx + 0.5 + rng.uniform(-half, half)) * tx;
      coords(row, 1) = (by + 0.5 + rng.uniform(-half, half)) * ty;
      coords(row, 2) = (bz + 0.5 + rng.uniform(-half, half)) * tz;
      labels[row] = b;
    }
  }
  return LabeledCloud(PointCloud(std::move(coords)), std::move(labels));
}

}  // namespace

SyntheticKind parse_synthetic_kind(const std::string& name) {
  if (name == "uniform-cube") return SyntheticKind::kUniformCube;
  if (name == "gaussian-clusters") return SyntheticKind::kGaussianClusters;
  if (name == "room-grid") return SyntheticKind::kRoomGrid;
  throw BadParams("unknown synthetic kind '" + name + "'");
}

std::string synthetic_kind_name(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kUniformCube: return "uniform-cube";
    case SyntheticKind::kGaussianClusters: return "gaussian-clusters";
    case SyntheticKind::kRoomGrid: return "room-grid";
  }
  return "?";
}

LabeledCloud generate_synthetic(SyntheticKind kind, std::uint32_t n,
                                std::uint64_t seed,
                                const SyntheticParams& params) {
  if (n < 1) throw BadParams("point count must be >= 1");
  switch (kind) {
    case SyntheticKind::kUniformCube:
      return uniform_cube(n, seed, params.edge);
    case SyntheticKind::kGaussianClusters:
      return gaussian_clusters(n, seed, params);
    case SyntheticKind::kRoomGrid:
      return room_grid(n, seed, params);
  }
  throw BadParams("unhandled synthetic kind");
}

}  // namespace percloud
