#include "percloud/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "percloud/io.hpp"
#include "percloud/parallel.hpp"
#include "percloud/rng.hpp"

namespace percloud {
namespace {

// Disjoint-set with path halving; used by the euclidean-cluster labeler.
struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);  // keep the smaller id as root
    parent[b] = a;
  }
  std::vector<std::uint32_t> parent;
};

std::int64_t cell_coord(double v, double origin, double cell) {
  return static_cast<std::int64_t>(std::floor((v - origin) / cell));
}

std::uint64_t cell_hash(std::int64_t x, std::int64_t y, std::int64_t z) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::int64_t c : {x, y, z}) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

SuperPoints fps(const PointCloud& cloud, std::uint32_t m, std::uint32_t start,
                unsigned threads) {
  const auto n = static_cast<std::uint32_t>(cloud.size());
  if (m < 1 || m > n) throw BadParams("fps target must be in [1, N]");
  if (start >= n) throw BadParams("fps start index out of range");

  const Matrix& coords = cloud.coords();
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::vector<char> selected(n, 0);

  SuperPoints out;
  out.coords.resize(m, 3);
  out.source.resize(m);
  out.features.resize(m, 0);

  std::uint32_t pick = start;
  for (std::uint32_t s = 0; s < m; ++s) {
    selected[pick] = 1;
    out.source[s] = pick;
    out.coords.row(s) = coords.row(pick);
    if (s + 1 == m) break;

    const Vec3 p = coords.row(pick).transpose();
    // Update min distances and find the next argmax. Per-chunk bests are
    // combined in chunk order with strict comparisons, so ties resolve to
    // the lowest index for any thread count.
    const ChunkPlan plan(n, n < 4096 ? 1 : threads);
    std::vector<std::pair<double, std::uint32_t>> best(plan.chunks, {-1.0, n});
    parallel_chunks(n, n < 4096 ? 1 : threads,
                    [&](std::size_t w, std::size_t lo, std::size_t hi) {
      double bd = -1.0;
      std::uint32_t bi = n;
      for (std::size_t i = lo; i < hi; ++i) {
        const double d2 = (coords.row(i).transpose() - p).squaredNorm();
        if (d2 < min_d2[i]) min_d2[i] = d2;
        if (!selected[i] && min_d2[i] > bd) {
          bd = min_d2[i];
          bi = static_cast<std::uint32_t>(i);
        }
      }
      best[w] = {bd, bi};
    });
    double bd = -1.0;
    std::uint32_t bi = n;
    for (const auto& [d, i] : best)
      if (i < n && d > bd) {
        bd = d;
        bi = i;
      }
    pick = bi;
  }
  return out;
}

Matrix PassthroughEncoder::encode(const SuperPoints& points,
                                  const PointCloud& source) const {
  if (source.feature_dim() != d_)
    throw DimensionMismatch("passthrough encoder declared d=" +
                            std::to_string(d_) + " but source cloud has d0=" +
                            std::to_string(source.feature_dim()));
  Matrix out(points.size(), d_);
  for (Eigen::Index i = 0; i < points.size(); ++i)
    out.row(i) = source.features().row(points.source[i]);
  return out;
}

RandomProjectionEncoder::RandomProjectionEncoder(std::uint64_t seed,
                                                 Eigen::Index out_dim,
                                                 Eigen::Index d0) {
  if (out_dim < 1) throw BadParams("projection output dim must be >= 1");
  const Eigen::Index in_dim = 3 + d0;
  projection_.resize(out_dim, in_dim);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (Eigen::Index r = 0; r < out_dim; ++r)
    for (Eigen::Index c = 0; c < in_dim; ++c)
      projection_(r, c) = scale * rng.gaussian();
}

Matrix RandomProjectionEncoder::encode(const SuperPoints& points,
                                       const PointCloud& source) const {
  if (3 + source.feature_dim() != projection_.cols())
    throw DimensionMismatch("projection expects input dim " +
                            std::to_string(projection_.cols()) + ", cloud has " +
                            std::to_string(3 + source.feature_dim()));
  Matrix out(points.size(), projection_.rows());
  Vector in(projection_.cols());
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    const auto src = points.source[i];
    in.head<3>() = source.coords().row(src).transpose();
    in.tail(source.feature_dim()) = source.features().row(src).transpose();
    out.row(i) = (projection_ * in).transpose();
  }
  return out;
}

void encode_features(SuperPoints& points, const PointCloud& source,
                     const FeatureEncoder& encoder) {
  Matrix feats = encoder.encode(points, source);
  if (feats.rows() != points.size() || feats.cols() != encoder.dim())
    throw DimensionMismatch("encoder produced " + std::to_string(feats.rows()) +
                            "x" + std::to_string(feats.cols()) + ", declared " +
                            std::to_string(points.size()) + "x" +
                            std::to_string(encoder.dim()));
  points.features = std::move(feats);
}

LabelMethod parse_label_method(const std::string& name) {
  if (name == "provided") return LabelMethod::kProvided;
  if (name == "voxel-grid") return LabelMethod::kVoxelGrid;
  if (name == "euclidean-cluster") return LabelMethod::kEuclideanCluster;
  throw BadParams("unknown label method '" + name + "'");
}

std::string label_method_name(LabelMethod method) {
  switch (method) {
    case LabelMethod::kProvided: return "provided";
    case LabelMethod::kVoxelGrid: return "voxel-grid";
    case LabelMethod::kEuclideanCluster: return "euclidean-cluster";
  }
  return "?";
}

LabeledCloud label_clusters(const LabeledCloud& input, LabelMethod method,
                            double cell_or_radius) {
  if (method == LabelMethod::kProvided) return input;
  if (cell_or_radius <= 0.0)
    throw BadParams(std::string(method == LabelMethod::kVoxelGrid
                                    ? "voxel cell"
                                    : "cluster radius") +
                    " must be positive");

  const PointCloud& cloud = input.cloud();
  const auto n = static_cast<std::uint32_t>(cloud.size());
  const Vec3 origin = cloud.coords().colwise().minCoeff().transpose();

  if (method == LabelMethod::kVoxelGrid) {
    std::unordered_map<std::uint64_t, std::uint32_t> voxel_label;
    std::vector<std::uint32_t> labels(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto key = cell_hash(
          cell_coord(cloud.coords()(i, 0), origin(0), cell_or_radius),
          cell_coord(cloud.coords()(i, 1), origin(1), cell_or_radius),
          cell_coord(cloud.coords()(i, 2), origin(2), cell_or_radius));
      const auto [it, inserted] = voxel_label.try_emplace(
          key, static_cast<std::uint32_t>(voxel_label.size()));
      if (inserted && it->second > kMaxLabel)
        throw ValidationError("voxel-grid produced more than 2^16 labels");
      labels[i] = it->second;
    }
    return LabeledCloud(cloud, std::move(labels));
  }

  // euclidean-cluster: bucket points into radius-sized cells and union
  // within the 27-cell neighborhood. Equivalent to connected components of
  // the radius graph.
  const double r = cell_or_radius;
  const double r2 = r * r;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
  std::vector<std::array<std::int64_t, 3>> cells(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    cells[i] = {cell_coord(cloud.coords()(i, 0), origin(0), r),
                cell_coord(cloud.coords()(i, 1), origin(1), r),
                cell_coord(cloud.coords()(i, 2), origin(2), r)};
    buckets[cell_hash(cells[i][0], cells[i][1], cells[i][2])].push_back(i);
  }

  UnionFind uf(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = buckets.find(cell_hash(
              cells[i][0] + dx, cells[i][1] + dy, cells[i][2] + dz));
          if (it == buckets.end()) continue;
          for (std::uint32_t j : it->second) {
            if (j <= i) continue;
            const double d2 =
                (cloud.coords().row(i) - cloud.coords().row(j)).squaredNorm();
            if (d2 <= r2) uf.unite(i, j);
          }
        }
  }

  std::unordered_map<std::uint32_t, std::uint32_t> root_label;
  std::vector<std::uint32_t> labels(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto root = uf.find(i);
    const auto [it, inserted] = root_label.try_emplace(
        root, static_cast<std::uint32_t>(root_label.size()));
    if (inserted && it->second > kMaxLabel)
      throw ValidationError("euclidean-cluster produced more than 2^16 labels");
    labels[i] = it->second;
  }
  return LabeledCloud(cloud, std::move(labels));
}

std::vector<std::uint32_t> inherit_labels(const SuperPoints& points,
                                          const LabeledCloud& parent) {
  const auto n = static_cast<std::uint32_t>(parent.size());
  const auto m = static_cast<std::uint32_t>(points.size());
  if (m == 0) return {};

  // Votes indexed [super][label]; label space kept sparse per super-point.
  std::vector<std::unordered_map<std::uint32_t, std::uint32_t>> votes(m);
  for (std::uint32_t i = 0; i < n; ++i) {
    const Vec3 p = parent.cloud().coords().row(i).transpose();
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t owner = 0;
    for (std::uint32_t s = 0; s < m; ++s) {
      const double d2 = (points.coords.row(s).transpose() - p).squaredNorm();
      if (d2 < best) {
        best = d2;
        owner = s;
      }
    }
    ++votes[owner][parent.labels()[i]];
  }

  std::vector<std::uint32_t> labels(m);
  for (std::uint32_t s = 0; s < m; ++s) {
    if (votes[s].empty()) {
      labels[s] = parent.labels()[points.source[s]];
      continue;
    }
    std::uint32_t best_label = 0, best_count = 0;
    bool first = true;
    for (const auto& [label, count] : votes[s]) {
      if (first || count > best_count ||
          (count == best_count && label < best_label)) {
        best_label = label;
        best_count = count;
        first = false;
      }
    }
    labels[s] = best_label;
  }
  return labels;
}

void write_super_points(const SuperPoints& points, const std::string& cloud_path,
                        const std::string& sources_path) {
  write_cloud(PointCloud(points.coords, points.features), cloud_path,
              CloudFormat::kPackedBinary);
  std::ofstream out(sources_path);
  if (!out) throw IoError("cannot open '" + sources_path + "' for writing");
  for (std::uint32_t s : points.source) out << s << '\n';
  out.flush();
  if (!out) throw IoError("write to '" + sources_path + "' failed");
}

}  // namespace percloud
