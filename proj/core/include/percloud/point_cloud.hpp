#ifndef PERCLOUD_POINT_CLOUD_HPP
#define PERCLOUD_POINT_CLOUD_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "percloud/errors.hpp"

namespace percloud {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

// Immutable N-point cloud: coordinates plus optional per-point features.
// Invariants (finite values, matching row counts, N >= 1) are enforced once
// at construction; downstream code relies on them without re-checking.
class PointCloud {
public:
  PointCloud(Matrix coords, Matrix features)
      : coords_(std::move(coords)), features_(std::move(features)) {
    validate();
  }

  explicit PointCloud(Matrix coords)
      : coords_(std::move(coords)), features_(coords_.rows(), 0) {
    validate();
  }

  Eigen::Index size() const { return coords_.rows(); }
  Eigen::Index feature_dim() const { return features_.cols(); }
  const Matrix& coords() const { return coords_; }
  const Matrix& features() const { return features_; }
  Vec3 point(Eigen::Index i) const { return coords_.row(i).transpose(); }

  // Row subset in the given order; indices must be in range.
  PointCloud select(const std::vector<std::uint32_t>& indices) const {
    Matrix c(static_cast<Eigen::Index>(indices.size()), 3);
    Matrix f(static_cast<Eigen::Index>(indices.size()), features_.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
      c.row(static_cast<Eigen::Index>(r)) = coords_.row(indices[r]);
      f.row(static_cast<Eigen::Index>(r)) = features_.row(indices[r]);
    }
    return PointCloud(std::move(c), std::move(f));
  }

private:
  void validate() const {
    if (coords_.rows() < 1) throw ValidationError("point cloud is empty");
    if (coords_.cols() != 3)
      throw ValidationError("coords must have exactly 3 columns");
    if (features_.rows() != coords_.rows())
      throw ValidationError("feature row count does not match point count");
    if (!coords_.allFinite())
      throw ValidationError("coords contain NaN or Inf");
    if (features_.size() > 0 && !features_.allFinite())
      throw ValidationError("features contain NaN or Inf");
  }

  Matrix coords_;
  Matrix features_;
};

// Geometric labels are instance-like cluster ids; values stay below 2^16 so
// they can be folded into combined 64-bit search keys.
constexpr std::uint32_t kMaxLabel = (1u << 16) - 1;

class LabeledCloud {
public:
  LabeledCloud(PointCloud cloud, std::vector<std::uint32_t> labels)
      : cloud_(std::move(cloud)), labels_(std::move(labels)) {
    if (static_cast<Eigen::Index>(labels_.size()) != cloud_.size())
      throw ValidationError("label count does not match point count");
    for (std::uint32_t l : labels_)
      if (l > kMaxLabel) throw ValidationError("label exceeds 2^16 - 1");
  }

  const PointCloud& cloud() const { return cloud_; }
  const std::vector<std::uint32_t>& labels() const { return labels_; }
  Eigen::Index size() const { return cloud_.size(); }

private:
  PointCloud cloud_;
  std::vector<std::uint32_t> labels_;
};

}  // namespace percloud

#endif
