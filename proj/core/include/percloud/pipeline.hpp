#ifndef PERCLOUD_PIPELINE_HPP
#define PERCLOUD_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "percloud/aggregate.hpp"
#include "percloud/hilbert.hpp"
#include "percloud/io.hpp"
#include "percloud/losses.hpp"
#include "percloud/neighbors.hpp"
#include "percloud/sampling.hpp"
#include "percloud/synthetic.hpp"

namespace percloud {

enum class EncoderKind { kPassthrough, kRandomProjection };

EncoderKind parse_encoder_kind(const std::string& name);
std::string encoder_kind_name(EncoderKind kind);

// One reproducible encoder run. threads and out_dir are execution details:
// they are excluded from the canonical form, so the config hash (and with it
// every artifact) is identical for any thread count.
struct RunConfig {
  // Input: a cloud file, or a synthetic scene when input_path is empty.
  std::string input_path;
  CloudFormat input_format = CloudFormat::kPackedBinary;
  std::string labels_path;  // optional sidecar next to a cloud file
  SyntheticKind kind = SyntheticKind::kGaussianClusters;
  std::uint32_t n = 6000;
  SyntheticParams synthetic;

  std::uint32_t r_bits = 16;
  std::uint32_t parts = 6;
  std::uint32_t m_super = 1024;
  std::uint32_t k = 24;
  std::uint32_t k_graph = 8;

  LabelMethod labeler = LabelMethod::kProvided;
  double label_cell = 0.25;
  double label_radius = 0.1;

  EncoderKind encoder = EncoderKind::kRandomProjection;
  std::uint32_t feat_dim = 32;
  double sigma = 1.0;
  bool value_uses_Wr = false;

  LossConfig loss;
  std::uint64_t seed = 0;

  unsigned threads = 0;  // 0 = hardware concurrency
  std::string out_dir = "percloud-out";

  void validate() const;
  std::string canonical() const;
  std::uint64_t hash() const;
  unsigned effective_threads() const;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunArtifacts {
  HilbertCode hilbert;
  PartitionSet partition;
  SuperPoints global_sp;
  std::vector<std::uint32_t> global_labels;
  SuperPoints local_sp;  // merged over parts, sources remapped to input ids
  std::vector<std::uint32_t> local_part_of;
  std::vector<std::uint32_t> local_labels;
  NeighborMap neighbors;
  AggregationState agg;
  LossReport loss;
  std::vector<StageTiming> timings;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

// serialize -> partition -> per-part FPS+encode -> joint index -> k-NN ->
// attention -> GCN -> consensus loss. Module errors are rethrown as
// StagedError naming the stage.
RunArtifacts run_encoder(const RunConfig& cfg);

// Fixed filenames under dir: hilbert.txt, parts.bin, neighbors.txt,
// aggstate.bin, loss.txt, timings.csv. Every header embeds config hash and
// seed. timings.csv records measurements, not config-determined data.
void write_run_artifacts(const RunArtifacts& artifacts, const std::string& dir);

struct BenchConfig {
  std::vector<SyntheticKind> kinds;
  std::vector<std::uint32_t> ns;
  std::uint32_t r_bits = 16;
  std::uint32_t parts = 6;
  std::uint32_t m_super = 256;
  std::uint32_t k = 24;
  std::uint32_t clusters = 6;
  std::uint32_t reps = 5;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct BenchRow {
  std::string kind;
  std::uint32_t n = 0;
  double t_serialize = 0.0;  // medians over reps, seconds
  double t_partition = 0.0;
  double t_sample = 0.0;
  double t_index = 0.0;
  double t_knn_query = 0.0;
  double per_query_us = 0.0;
  double recall_mean = 0.0;  // vs the label-constrained exact oracle
  std::uint64_t purity_violations = 0;
};

// Wall times are medians of `reps` runs on a monotonic clock; recall and
// purity come from one extra evaluation against the exact oracle.
std::vector<BenchRow> bench(const BenchConfig& cfg);

void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path,
                     const std::string& provenance = "");

}  // namespace percloud

#endif
