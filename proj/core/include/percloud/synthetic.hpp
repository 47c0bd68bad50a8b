#ifndef PERCLOUD_SYNTHETIC_HPP
#define PERCLOUD_SYNTHETIC_HPP

#include <cstdint>
#include <string>

#include "percloud/point_cloud.hpp"

namespace percloud {

enum class SyntheticKind { kUniformCube, kGaussianClusters, kRoomGrid };

SyntheticKind parse_synthetic_kind(const std::string& name);
std::string synthetic_kind_name(SyntheticKind kind);

struct SyntheticParams {
  // uniform-cube
  double edge = 1.0;

  // gaussian-clusters: centers on a lattice with the given spacing, points
  // assigned block-wise (extras go to the leading clusters), label = cluster.
  std::uint32_t clusters = 4;
  double stddev = 0.05;
  double separation = 1.0;

  // room-grid: boxes_x*boxes_y*boxes_z axis-aligned boxes tiling a room of
  // the given extent; label = box id; gap shrinks each box around its center.
  std::uint32_t boxes_x = 2, boxes_y = 2, boxes_z = 1;
  double room = 4.0;
  double gap = 0.1;
};

// Deterministic per (kind, n, seed, params); labels as described above
// (uniform-cube labels every point 0).
LabeledCloud generate_synthetic(SyntheticKind kind, std::uint32_t n,
                                std::uint64_t seed,
                                const SyntheticParams& params = {});

}  // namespace percloud

#endif
