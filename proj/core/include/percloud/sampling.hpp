#ifndef PERCLOUD_SAMPLING_HPP
#define PERCLOUD_SAMPLING_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "percloud/point_cloud.hpp"

namespace percloud {

// Downsampled representatives of a parent cloud. `source` holds the parent
// point index of each super-point, in selection order. origin_part is -1 for
// a whole-scene sample, otherwise the part id it was drawn from.
struct SuperPoints {
  Matrix coords;                      // M x 3
  Matrix features;                    // M x d (0 columns until encoded)
  std::vector<std::uint32_t> source;  // distinct parent indices
  int origin_part = -1;

  Eigen::Index size() const { return coords.rows(); }
};

// Greedy max-min farthest point sampling. First pick is `start`; each later
// pick maximizes the squared distance to the selected set, ties broken by
// lowest index. Deterministic; output in selection order.
SuperPoints fps(const PointCloud& cloud, std::uint32_t m, std::uint32_t start = 0,
                unsigned threads = 1);

// Pluggable super-point feature source standing in for a pretrained encoder.
class FeatureEncoder {
public:
  virtual ~FeatureEncoder() = default;
  virtual Eigen::Index dim() const = 0;
  virtual Matrix encode(const SuperPoints& points,
                        const PointCloud& source) const = 0;
};

// Copies the parent cloud's raw features at the sampled indices (d = d0).
class PassthroughEncoder final : public FeatureEncoder {
public:
  explicit PassthroughEncoder(Eigen::Index d0) : d_(d0) {}
  Eigen::Index dim() const override { return d_; }
  Matrix encode(const SuperPoints& points,
                const PointCloud& source) const override;

private:
  Eigen::Index d_;
};

// Fixed seeded Gaussian linear map of [coords | features], scaled by
// 1/sqrt(input dim). Same seed, same map.
class RandomProjectionEncoder final : public FeatureEncoder {
public:
  RandomProjectionEncoder(std::uint64_t seed, Eigen::Index out_dim,
                          Eigen::Index d0);
  Eigen::Index dim() const override { return projection_.rows(); }
  Matrix encode(const SuperPoints& points,
                const PointCloud& source) const override;

private:
  Matrix projection_;  // out_dim x (3 + d0)
};

// Fills points.features via the encoder; throws DimensionMismatch when the
// encoder's output does not match its declared dimension.
void encode_features(SuperPoints& points, const PointCloud& source,
                     const FeatureEncoder& encoder);

enum class LabelMethod { kProvided, kVoxelGrid, kEuclideanCluster };

LabelMethod parse_label_method(const std::string& name);
std::string label_method_name(LabelMethod method);

// provided: identity on the existing labels. voxel-grid: label = voxel of the
// point (dense ids in order of first appearance). euclidean-cluster:
// connected components of the radius graph (dense ids by smallest member).
LabeledCloud label_clusters(const LabeledCloud& input, LabelMethod method,
                            double cell_or_radius = 0.0);

// Majority vote over each super-point's assigned parent points (nearest
// super-point assignment, ties to the lower super-point id; vote ties to the
// lower label). Super-points that win no parent fall back to their source
// point's label.
std::vector<std::uint32_t> inherit_labels(const SuperPoints& points,
                                          const LabeledCloud& parent);

// Packed-binary cloud plus a text sidecar of parent indices.
void write_super_points(const SuperPoints& points, const std::string& cloud_path,
                        const std::string& sources_path);

}  // namespace percloud

#endif
