#ifndef PERCLOUD_AGGREGATE_HPP
#define PERCLOUD_AGGREGATE_HPP

#include <Eigen/SparseCore>
#include <cstdint>
#include <string>

#include "percloud/neighbors.hpp"
#include "percloud/point_cloud.hpp"

namespace percloud {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Projection parameters for localized cross-attention and the message-passing
// step, plus the Fourier frequency matrix B and position scale sigma.
// Eq-literal behavior adds W_r R in the key but raw R in the value;
// value_uses_Wr switches the value path to W_r R as well.
struct AggParams {
  Matrix W_q, W_k, W_v, W_r;  // d x d
  Matrix W_m, W_s;            // d x d
  Matrix B;                   // 3 x (d/2)
  double sigma = 1.0;
  std::uint32_t k_graph = 8;
  bool value_uses_Wr = false;
  std::uint64_t seed = 0;

  Eigen::Index dim() const { return W_q.rows(); }
  void validate() const;

  // Gaussian entries scaled by 1/sqrt(d); B standard Gaussian; sigma as
  // given. Same seed, same parameters.
  static AggParams seeded(std::uint64_t seed, Eigen::Index d,
                          std::uint32_t k_graph = 8, double sigma = 1.0,
                          bool value_uses_Wr = false);
};

// Only seed-derived parameter sets round-trip: the file stores the seed and
// shape, and load() regenerates the matrices.
void save_agg_params(const AggParams& params, const std::string& path);
AggParams load_agg_params(const std::string& path);

// [sin(2 pi x B); cos(2 pi x B)], dimension 2 * B.cols(). Callers pre-scale
// x by 1/sigma.
Vector fourier_pos(const Vec3& x, const Matrix& B);

struct AggregationState {
  Matrix global_coords;  // M x 3
  Matrix global_feats;   // M x d
  Matrix local_coords;   // U x 3
  Matrix local_feats;    // U x d
  NeighborMap neighbor_map;
  Matrix updated_feats;          // M x d, filled by the aggregation steps
  SparseMatrix adjacency;        // W^g, k_graph nonzeros per row, zero diagonal
  SparseMatrix norm_adjacency;   // D^-1/2 max(W, W^T) D^-1/2
};

// Cross-attention restricted to each query's neighbor list. Relative
// positions enter as Fourier embeddings of (p_i - p_j)/sigma; logits use
// max-subtracted softmax; queries with no neighbors pass through unchanged.
// weights_out, when given, receives each query's softmax row (empty for
// queries with no neighbors) for verification.
Matrix localized_cross_attention(const Matrix& global_coords,
                                 const Matrix& global_feats,
                                 const Matrix& local_coords,
                                 const Matrix& local_feats,
                                 const NeighborMap& neighbors,
                                 const AggParams& params, unsigned threads = 1,
                                 std::vector<Vector>* weights_out = nullptr);

// Cosine similarity gated by positive dot product, over the coordinate-space
// k-NN of each row (exact search, self excluded). Zero-norm rows contribute
// no edges.
SparseMatrix build_adjacency(const Matrix& global_feats,
                             const Matrix& global_coords,
                             std::uint32_t k_graph);

SparseMatrix symmetrize_max(const SparseMatrix& w);

// Symmetrizes (max with the transpose), then D^-1/2 W D^-1/2 with the
// degrees of the symmetrized matrix; degree-0 rows stay zero.
SparseMatrix normalize_adjacency(const SparseMatrix& w);

// ReLU(W_m (A fhat) + W_s fhat), one pass.
Matrix gcn_message_pass(const Matrix& fhat, const SparseMatrix& norm_adjacency,
                        const Matrix& W_m, const Matrix& W_s);

// Power-iteration estimate of the largest |eigenvalue|; a lower bound on the
// true spectral radius up to round-off, which suffices for bound checks.
double spectral_radius_estimate(const SparseMatrix& m, int iterations,
                                std::uint64_t seed);

// Runs attention, adjacency construction, normalization, and one message
// pass, filling updated_feats and the two adjacency matrices in place.
void aggregate_local_global(AggregationState& state, const AggParams& params,
                            unsigned threads = 1);

// Packed export: header {magic, config hash, seed, M, d, k} followed by
// global coords/feats, updated feats, and the raw adjacency in CSR form.
void save_agg_state(const AggregationState& state, const std::string& path,
                    std::uint64_t config_hash, std::uint64_t seed);

struct LoadedAggState {
  Matrix global_coords, global_feats, updated_feats;
  SparseMatrix adjacency;
  std::uint64_t config_hash = 0, seed = 0;
  std::uint32_t k = 0;
};
LoadedAggState load_agg_state(const std::string& path);

}  // namespace percloud

#endif
