#include "percloud/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include "percloud/parallel.hpp"
#include "percloud/rng.hpp"

namespace percloud {
namespace {

constexpr char kStateMagic[4] = {'A', 'G', 'G', 'S'};
constexpr char kParamsMagic[4] = {'A', 'G', 'G', 'P'};

void write_matrix(std::ostream& out, const Matrix& m) {
  const std::uint64_t rows = m.rows(), cols = m.cols();
  out.write(reinterpret_cast<const char*>(&rows), 8);
  out.write(reinterpret_cast<const char*>(&cols), 8);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
}

Matrix read_matrix(std::istream& in, const std::string& path) {
  std::uint64_t rows = 0, cols = 0;
  if (!in.read(reinterpret_cast<char*>(&rows), 8) ||
      !in.read(reinterpret_cast<char*>(&cols), 8))
    throw ParseError(path + ": truncated matrix header");
  Matrix m(rows, cols);
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j) {
      double v = 0;
      if (!in.read(reinterpret_cast<char*>(&v), 8))
        throw ParseError(path + ": truncated matrix data");
      m(i, j) = v;
    }
  return m;
}

}  // namespace

void AggParams::validate() const {
  const Eigen::Index d = W_q.rows();
  if (d < 2 || d % 2 != 0)
    throw BadParams("feature dimension must be even and >= 2");
  for (const Matrix* m : {&W_q, &W_k, &W_v, &W_r, &W_m, &W_s})
    if (m->rows() != d || m->cols() != d)
      throw DimensionMismatch("projection matrices must all be d x d");
  if (B.rows() != 3 || B.cols() != d / 2)
    throw DimensionMismatch("B must be 3 x (d/2)");
  if (!(sigma > 0.0)) throw BadParams("sigma must be positive");
  for (const Matrix* m : {&W_q, &W_k, &W_v, &W_r, &W_m, &W_s, &B})
    if (!m->allFinite()) throw ValidationError("parameter matrix not finite");
}

AggParams AggParams::seeded(std::uint64_t seed, Eigen::Index d,
                            std::uint32_t k_graph, double sigma,
                            bool value_uses_Wr) {
  if (d < 2 || d % 2 != 0)
    throw BadParams("feature dimension must be even and >= 2");
  AggParams params;
  params.seed = seed;
  params.sigma = sigma;
  params.k_graph = k_graph;
  params.value_uses_Wr = value_uses_Wr;

  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  auto fill = [&](Matrix& m, Eigen::Index rows, Eigen::Index cols, double s) {
    m.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = s * rng.gaussian();
  };
  fill(params.W_q, d, d, scale);
  fill(params.W_k, d, d, scale);
  fill(params.W_v, d, d, scale);
  fill(params.W_r, d, d, scale);
  fill(params.W_m, d, d, scale);
  fill(params.W_s, d, d, scale);
  fill(params.B, 3, d / 2, 1.0);
  params.validate();
  return params;
}

void save_agg_params(const AggParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kParamsMagic, 4);
  const std::uint64_t seed = params.seed;
  const std::uint32_t d = static_cast<std::uint32_t>(params.dim());
  const std::uint32_t kg = params.k_graph;
  const double sigma = params.sigma;
  const std::uint8_t vwr = params.value_uses_Wr ? 1 : 0;
  out.write(reinterpret_cast<const char*>(&seed), 8);
  out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(&kg), 4);
  out.write(reinterpret_cast<const char*>(&sigma), 8);
  out.write(reinterpret_cast<const char*>(&vwr), 1);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

AggParams load_agg_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kParamsMagic, 4) != 0)
    throw ParseError(path + ": bad magic (expected AGGP)");
  std::uint64_t seed = 0;
  std::uint32_t d = 0, kg = 0;
  double sigma = 0;
  std::uint8_t vwr = 0;
  if (!in.read(reinterpret_cast<char*>(&seed), 8) ||
      !in.read(reinterpret_cast<char*>(&d), 4) ||
      !in.read(reinterpret_cast<char*>(&kg), 4) ||
      !in.read(reinterpret_cast<char*>(&sigma), 8) ||
      !in.read(reinterpret_cast<char*>(&vwr), 1))
    throw ParseError(path + ": truncated parameter file");
  return AggParams::seeded(seed, d, kg, sigma, vwr != 0);
}

Vector fourier_pos(const Vec3& x, const Matrix& B) {
  const Eigen::Index half = B.cols();
  const Vector phase = 2.0 * M_PI * (B.transpose() * x);
  Vector out(2 * half);
  out.head(half) = phase.array().sin();
  out.tail(half) = phase.array().cos();
  return out;
}

Matrix localized_cross_attention(const Matrix& global_coords,
                                 const Matrix& global_feats,
                                 const Matrix& local_coords,
                                 const Matrix& local_feats,
                                 const NeighborMap& neighbors,
                                 const AggParams& params, unsigned threads,
                                 std::vector<Vector>* weights_out) {
  params.validate();
  const Eigen::Index m = global_feats.rows();
  const Eigen::Index d = params.dim();
  if (global_feats.cols() != d || local_feats.cols() != d)
    throw DimensionMismatch("feature width does not match parameter d");
  if (static_cast<Eigen::Index>(neighbors.queries()) != m)
    throw DimensionMismatch("neighbor map size does not match query count");

  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  Matrix updated(m, d);
  if (weights_out) weights_out->assign(static_cast<std::size_t>(m), Vector());

  parallel_for(static_cast<std::size_t>(m), threads,
               [&](std::size_t begin, std::size_t end) {
    for (std::size_t qi = begin; qi < end; ++qi) {
      const auto i = static_cast<Eigen::Index>(qi);
      const auto& list = neighbors.neighbors[qi];
      if (list.empty()) {
        updated.row(i) = global_feats.row(i);
        continue;
      }

      const Vector fi = global_feats.row(i).transpose();
      const Vector query = params.W_q * fi;
      const Vec3 pi = global_coords.row(i).transpose();

      const auto kn = static_cast<Eigen::Index>(list.size());
      Vector logits(kn);
      Matrix values(kn, d);
      for (Eigen::Index j = 0; j < kn; ++j) {
        const auto lid = list[static_cast<std::size_t>(j)];
        const Vector fl = local_feats.row(lid).transpose();
        const Vec3 pl = local_coords.row(lid).transpose();
        const Vector r = fourier_pos((pi - pl) / params.sigma, params.B);
        const Vector wr_r = params.W_r * r;
        logits(j) = query.dot(params.W_k * (fl + wr_r)) * inv_sqrt_d;
        values.row(j) =
            (params.W_v * (fl + (params.value_uses_Wr ? wr_r : r))).transpose();
      }

      const double peak = logits.maxCoeff();
      Vector w = (logits.array() - peak).exp();
      w /= w.sum();

      updated.row(i) = global_feats.row(i) + (w.transpose() * values);
      if (weights_out) (*weights_out)[qi] = w;
    }
  });
  return updated;
}

SparseMatrix build_adjacency(const Matrix& global_feats,
                             const Matrix& global_coords,
                             std::uint32_t k_graph) {
  if (k_graph < 1) throw BadParams("k_graph must be >= 1");
  const Eigen::Index m = global_feats.rows();
  if (global_coords.rows() != m)
    throw DimensionMismatch("coords/features row mismatch");

  const Vector norms = global_feats.rowwise().norm();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(m) * k_graph);
  std::vector<std::pair<double, Eigen::Index>> dist;
  dist.reserve(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    dist.clear();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      dist.emplace_back(
          (global_coords.row(j) - global_coords.row(i)).squaredNorm(), j);
    }
    const auto keep = std::min<std::size_t>(k_graph, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + keep, dist.end());
    for (std::size_t t = 0; t < keep; ++t) {
      const Eigen::Index j = dist[t].second;
      if (norms(i) == 0.0 || norms(j) == 0.0) continue;
      const double dot = global_feats.row(i).dot(global_feats.row(j));
      if (dot <= 0.0) continue;
      triplets.emplace_back(i, j, dot / (norms(i) * norms(j)));
    }
  }

  SparseMatrix w(m, m);
  w.setFromTriplets(triplets.begin(), triplets.end());
  return w;
}

SparseMatrix symmetrize_max(const SparseMatrix& w) {
  std::map<std::pair<Eigen::Index, Eigen::Index>, double> entries;
  for (int o = 0; o < w.outerSize(); ++o)
    for (SparseMatrix::InnerIterator it(w, o); it; ++it) {
      auto& fwd = entries[{it.row(), it.col()}];
      fwd = std::max(fwd, it.value());
      auto& bwd = entries[{it.col(), it.row()}];
      bwd = std::max(bwd, it.value());
    }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(entries.size());
  for (const auto& [rc, v] : entries)
    triplets.emplace_back(rc.first, rc.second, v);
  SparseMatrix out(w.rows(), w.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SparseMatrix normalize_adjacency(const SparseMatrix& w) {
  const SparseMatrix sym = symmetrize_max(w);
  Vector degree = Vector::Zero(sym.rows());
  for (int o = 0; o < sym.outerSize(); ++o)
    for (SparseMatrix::InnerIterator it(sym, o); it; ++it)
      degree(it.row()) += it.value();

  Vector inv_sqrt(sym.rows());
  for (Eigen::Index i = 0; i < sym.rows(); ++i)
    inv_sqrt(i) = degree(i) > 0.0 ? 1.0 / std::sqrt(degree(i)) : 0.0;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(sym.nonZeros());
  for (int o = 0; o < sym.outerSize(); ++o)
    for (SparseMatrix::InnerIterator it(sym, o); it; ++it)
      triplets.emplace_back(it.row(), it.col(),
                            it.value() * inv_sqrt(it.row()) *
                                inv_sqrt(it.col()));
  SparseMatrix out(sym.rows(), sym.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Matrix gcn_message_pass(const Matrix& fhat, const SparseMatrix& norm_adjacency,
                        const Matrix& W_m, const Matrix& W_s) {
  const Eigen::Index d = fhat.cols();
  if (W_m.rows() != d || W_m.cols() != d || W_s.rows() != d || W_s.cols() != d)
    throw DimensionMismatch("W_m/W_s must be d x d");
  if (norm_adjacency.rows() != fhat.rows() ||
      norm_adjacency.cols() != fhat.rows())
    throw DimensionMismatch("adjacency shape does not match features");
  const Matrix mixed = norm_adjacency * fhat;
  return (mixed * W_m.transpose() + fhat * W_s.transpose()).cwiseMax(0.0);
}

double spectral_radius_estimate(const SparseMatrix& m, int iterations,
                                std::uint64_t seed) {
  if (m.rows() == 0) return 0.0;
  Rng rng(seed);
  Vector v(m.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.gaussian();
  double norm = v.norm();
  if (norm == 0.0) return 0.0;
  v /= norm;
  double radius = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector next = m * v;
    norm = next.norm();
    if (norm == 0.0) return 0.0;
    radius = norm;
    v = next / norm;
  }
  return radius;
}

void aggregate_local_global(AggregationState& state, const AggParams& params,
                            unsigned threads) {
  state.updated_feats = localized_cross_attention(
      state.global_coords, state.global_feats, state.local_coords,
      state.local_feats, state.neighbor_map, params, threads);
  // Adjacency from the original global representations, not the updated ones.
  state.adjacency =
      build_adjacency(state.global_feats, state.global_coords, params.k_graph);
  state.norm_adjacency = normalize_adjacency(state.adjacency);
  state.updated_feats = gcn_message_pass(state.updated_feats,
                                         state.norm_adjacency, params.W_m,
                                         params.W_s);
}

void save_agg_state(const AggregationState& state, const std::string& path,
                    std::uint64_t config_hash, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kStateMagic, 4);
  const std::uint32_t m = static_cast<std::uint32_t>(state.global_feats.rows());
  const std::uint32_t d = static_cast<std::uint32_t>(state.global_feats.cols());
  const std::uint32_t k = state.neighbor_map.k;
  out.write(reinterpret_cast<const char*>(&config_hash), 8);
  out.write(reinterpret_cast<const char*>(&seed), 8);
  out.write(reinterpret_cast<const char*>(&m), 4);
  out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(&k), 4);
  write_matrix(out, state.global_coords);
  write_matrix(out, state.global_feats);
  write_matrix(out, state.updated_feats);

  // Raw adjacency in CSR.
  SparseMatrix row_major = state.adjacency;
  row_major.makeCompressed();
  const std::uint64_t rows = row_major.rows();
  const std::uint64_t nnz = row_major.nonZeros();
  out.write(reinterpret_cast<const char*>(&rows), 8);
  out.write(reinterpret_cast<const char*>(&nnz), 8);
  std::vector<std::uint64_t> offsets(rows + 1, 0);
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  cols.reserve(nnz);
  vals.reserve(nnz);
  // Gather row-wise from the column-major storage.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> by_row(rows);
  for (int o = 0; o < row_major.outerSize(); ++o)
    for (SparseMatrix::InnerIterator it(row_major, o); it; ++it)
      by_row[it.row()].emplace_back(static_cast<std::uint32_t>(it.col()),
                                    it.value());
  for (std::uint64_t i = 0; i < rows; ++i) {
    std::sort(by_row[i].begin(), by_row[i].end());
    offsets[i + 1] = offsets[i] + by_row[i].size();
    for (const auto& [c, v] : by_row[i]) {
      cols.push_back(c);
      vals.push_back(v);
    }
  }
  out.write(reinterpret_cast<const char*>(offsets.data()),
            static_cast<std::streamsize>(8 * offsets.size()));
  out.write(reinterpret_cast<const char*>(cols.data()),
            static_cast<std::streamsize>(4 * cols.size()));
  out.write(reinterpret_cast<const char*>(vals.data()),
            static_cast<std::streamsize>(8 * vals.size()));
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

LoadedAggState load_agg_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kStateMagic, 4) != 0)
    throw ParseError(path + ": bad magic (expected AGGS)");
  LoadedAggState state;
  std::uint32_t m = 0, d = 0;
  if (!in.read(reinterpret_cast<char*>(&state.config_hash), 8) ||
      !in.read(reinterpret_cast<char*>(&state.seed), 8) ||
      !in.read(reinterpret_cast<char*>(&m), 4) ||
      !in.read(reinterpret_cast<char*>(&d), 4) ||
      !in.read(reinterpret_cast<char*>(&state.k), 4))
    throw ParseError(path + ": truncated header");
  state.global_coords = read_matrix(in, path);
  state.global_feats = read_matrix(in, path);
  state.updated_feats = read_matrix(in, path);

  std::uint64_t rows = 0, nnz = 0;
  if (!in.read(reinterpret_cast<char*>(&rows), 8) ||
      !in.read(reinterpret_cast<char*>(&nnz), 8))
    throw ParseError(path + ": truncated adjacency header");
  std::vector<std::uint64_t> offsets(rows + 1);
  std::vector<std::uint32_t> cols(nnz);
  std::vector<double> vals(nnz);
  if (!in.read(reinterpret_cast<char*>(offsets.data()),
               static_cast<std::streamsize>(8 * offsets.size())) ||
      (nnz > 0 && (!in.read(reinterpret_cast<char*>(cols.data()),
                            static_cast<std::streamsize>(4 * cols.size())) ||
                   !in.read(reinterpret_cast<char*>(vals.data()),
                            static_cast<std::streamsize>(8 * vals.size())))))
    throw ParseError(path + ": truncated adjacency data");

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(nnz);
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t t = offsets[i]; t < offsets[i + 1]; ++t)
      triplets.emplace_back(static_cast<Eigen::Index>(i),
                            static_cast<Eigen::Index>(cols[t]), vals[t]);
  state.adjacency.resize(static_cast<Eigen::Index>(rows),
                         static_cast<Eigen::Index>(rows));
  state.adjacency.setFromTriplets(triplets.begin(), triplets.end());

  if (state.global_feats.rows() != m || state.global_feats.cols() != d)
    throw ParseError(path + ": header/matrix shape mismatch");
  return state;
}

}  // namespace percloud
