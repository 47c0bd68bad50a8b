#include "percloud/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "percloud/parallel.hpp"

namespace percloud {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string provenance_line(std::uint64_t hash, std::uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "config=%016llx seed=%llu",
                static_cast<unsigned long long>(hash),
                static_cast<unsigned long long>(seed));
  return buf;
}

// Runs body under a stage label, recording wall time and rethrowing module
// errors with stage attribution.
template <typename Body>
void stage(const char* name, std::vector<StageTiming>& timings, Body&& body) {
  const auto start = Clock::now();
  try {
    body();
  } catch (const StagedError&) {
    throw;
  } catch (const IoError& e) {
    throw StagedError(name, e, true);
  } catch (const Error& e) {
    throw StagedError(name, e, false);
  }
  timings.push_back({name, seconds_since(start)});
}

std::unique_ptr<FeatureEncoder> make_encoder(const RunConfig& cfg,
                                             Eigen::Index d0) {
  switch (cfg.encoder) {
    case EncoderKind::kPassthrough:
      return std::make_unique<PassthroughEncoder>(d0);
    case EncoderKind::kRandomProjection:
      return std::make_unique<RandomProjectionEncoder>(cfg.seed, cfg.feat_dim,
                                                       d0);
  }
  throw BadParams("unhandled encoder kind");
}

}  // namespace

EncoderKind parse_encoder_kind(const std::string& name) {
  if (name == "passthrough") return EncoderKind::kPassthrough;
  if (name == "random-projection") return EncoderKind::kRandomProjection;
  throw BadParams("unknown encoder '" + name + "'");
}

std::string encoder_kind_name(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kPassthrough: return "passthrough";
    case EncoderKind::kRandomProjection: return "random-projection";
  }
  return "?";
}

void RunConfig::validate() const {
  HilbertConfig{r_bits}.validate();
  if (parts < 1 || m_super < 1 || k < 1 || k_graph < 1)
    throw BadParams("counts must be positive");
  if (k > parts * m_super)
    throw BadParams("k exceeds the local super-point count L*M");
  if (input_path.empty() && n < 1)
    throw BadParams("synthetic point count must be >= 1");
  if (labeler == LabelMethod::kVoxelGrid && label_cell <= 0.0)
    throw BadParams("label cell must be positive");
  if (labeler == LabelMethod::kEuclideanCluster && label_radius <= 0.0)
    throw BadParams("label radius must be positive");
  if (encoder == EncoderKind::kRandomProjection &&
      (feat_dim < 2 || feat_dim % 2 != 0))
    throw BadParams("feat_dim must be even and >= 2");
  if (!(sigma > 0.0)) throw BadParams("sigma must be positive");
  loss.validate();
}

std::string RunConfig::canonical() const {
  std::ostringstream out;
  out << "input=" << input_path << '\n';
  out << "format=" << format_name(input_format) << '\n';
  out << "labels=" << labels_path << '\n';
  if (input_path.empty()) {
    out << "kind=" << synthetic_kind_name(kind) << '\n';
    out << "n=" << n << '\n';
    out << "edge=" << fmt_double(synthetic.edge) << '\n';
    out << "clusters=" << synthetic.clusters << '\n';
    out << "stddev=" << fmt_double(synthetic.stddev) << '\n';
    out << "separation=" << fmt_double(synthetic.separation) << '\n';
    out << "boxes=" << synthetic.boxes_x << 'x' << synthetic.boxes_y << 'x'
        << synthetic.boxes_z << '\n';
    out << "room=" << fmt_double(synthetic.room) << '\n';
    out << "gap=" << fmt_double(synthetic.gap) << '\n';
  }
  out << "r_bits=" << r_bits << '\n';
  out << "parts=" << parts << '\n';
  out << "m=" << m_super << '\n';
  out << "k=" << k << '\n';
  out << "k_graph=" << k_graph << '\n';
  out << "labeler=" << label_method_name(labeler) << '\n';
  out << "label_cell=" << fmt_double(label_cell) << '\n';
  out << "label_radius=" << fmt_double(label_radius) << '\n';
  out << "encoder=" << encoder_kind_name(encoder) << '\n';
  out << "feat_dim=" << feat_dim << '\n';
  out << "sigma=" << fmt_double(sigma) << '\n';
  out << "value_uses_Wr=" << (value_uses_Wr ? 1 : 0) << '\n';
  out << "mu=" << fmt_double(loss.mu) << '\n';
  out << "lambda=" << fmt_double(loss.lambda) << '\n';
  out << "eps_norm=" << fmt_double(loss.eps_norm) << '\n';
  out << "eps_degree=" << fmt_double(loss.eps_degree) << '\n';
  out << "seed=" << seed << '\n';
  return out.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical()); }

unsigned RunConfig::effective_threads() const {
  return threads == 0 ? default_thread_count() : threads;
}

RunArtifacts run_encoder(const RunConfig& cfg) {
  cfg.validate();
  const unsigned threads = cfg.effective_threads();

  RunArtifacts art;
  art.config_hash = cfg.hash();
  art.seed = cfg.seed;

  // Input and labeling.
  std::unique_ptr<LabeledCloud> labeled;
  stage("input", art.timings, [&] {
    if (!cfg.input_path.empty()) {
      PointCloud cloud = read_cloud(cfg.input_path, cfg.input_format);
      std::vector<std::uint32_t> labels;
      if (!cfg.labels_path.empty()) {
        labels = read_labels(cfg.labels_path);
      } else {
        labels.assign(static_cast<std::size_t>(cloud.size()), 0);
      }
      labeled = std::make_unique<LabeledCloud>(std::move(cloud),
                                               std::move(labels));
    } else {
      labeled = std::make_unique<LabeledCloud>(
          generate_synthetic(cfg.kind, cfg.n, cfg.seed, cfg.synthetic));
    }
  });

  stage("label", art.timings, [&] {
    if (cfg.labeler != LabelMethod::kProvided) {
      const double param = cfg.labeler == LabelMethod::kVoxelGrid
                               ? cfg.label_cell
                               : cfg.label_radius;
      *labeled = label_clusters(*labeled, cfg.labeler, param);
    }
  });

  const PointCloud& cloud = labeled->cloud();
  const HilbertConfig hcfg{cfg.r_bits};

  stage("serialize", art.timings,
        [&] { art.hilbert = serialize(cloud, hcfg, threads); });

  stage("partition", art.timings,
        [&] { art.partition = partition(art.hilbert, cfg.parts); });

  const auto encoder = make_encoder(cfg, cloud.feature_dim());

  stage("sample-global", art.timings, [&] {
    art.global_sp = fps(cloud, cfg.m_super, 0, threads);
    encode_features(art.global_sp, cloud, *encoder);
    art.global_labels = inherit_labels(art.global_sp, *labeled);
  });

  stage("sample-local", art.timings, [&] {
    const auto total = cfg.parts * cfg.m_super;
    art.local_sp.coords.resize(total, 3);
    art.local_sp.features.resize(total, encoder->dim());
    art.local_sp.source.resize(total);
    art.local_part_of.resize(total);
    art.local_labels.resize(total);

    // Part members in serialized order; contiguous runs of hilbert.order.
    std::uint32_t run_start = 0;
    for (std::uint32_t p = 0; p < cfg.parts; ++p) {
      const std::uint32_t count = art.partition.sizes[p];
      std::vector<std::uint32_t> members(
          art.hilbert.order.begin() + run_start,
          art.hilbert.order.begin() + run_start + count);
      run_start += count;

      std::vector<std::uint32_t> part_labels(count);
      for (std::uint32_t i = 0; i < count; ++i)
        part_labels[i] = labeled->labels()[members[i]];
      LabeledCloud part_cloud(cloud.select(members), std::move(part_labels));

      SuperPoints sp = fps(part_cloud.cloud(), cfg.m_super, 0, threads);
      sp.origin_part = static_cast<int>(p);
      encode_features(sp, part_cloud.cloud(), *encoder);
      const auto sp_labels = inherit_labels(sp, part_cloud);

      const std::uint32_t base = p * cfg.m_super;
      for (std::uint32_t i = 0; i < cfg.m_super; ++i) {
        art.local_sp.coords.row(base + i) = sp.coords.row(i);
        art.local_sp.features.row(base + i) = sp.features.row(i);
        art.local_sp.source[base + i] = members[sp.source[i]];
        art.local_part_of[base + i] = p;
        art.local_labels[base + i] = sp_labels[i];
      }
    }
  });

  CombinedIndex index;
  stage("index", art.timings, [&] {
    index = build_combined_index(art.global_sp, art.local_sp,
                                 art.global_labels, art.local_labels, hcfg,
                                 threads);
  });

  stage("knn", art.timings, [&] {
    art.neighbors =
        approx_knn(index, art.global_sp, art.local_sp, cfg.k, threads);
  });

  stage("aggregate", art.timings, [&] {
    const AggParams params =
        AggParams::seeded(cfg.seed, static_cast<Eigen::Index>(encoder->dim()),
                          cfg.k_graph, cfg.sigma, cfg.value_uses_Wr);
    art.agg.global_coords = art.global_sp.coords;
    art.agg.global_feats = art.global_sp.features;
    art.agg.local_coords = art.local_sp.coords;
    art.agg.local_feats = art.local_sp.features;
    art.agg.neighbor_map = art.neighbors;
    aggregate_local_global(art.agg, params, threads);
  });

  stage("loss", art.timings, [&] {
    art.loss = consensus_loss(art.agg.updated_feats, art.agg.global_feats,
                              symmetrize_max(art.agg.adjacency), cfg.loss);
  });

  return art;
}

void write_run_artifacts(const RunArtifacts& art, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "'");

  const std::string prov = provenance_line(art.config_hash, art.seed);
  write_hilbert_code(art.hilbert, dir + "/hilbert.txt", prov);

  {
    std::ofstream out(dir + "/parts.bin", std::ios::binary);
    if (!out) throw IoError("cannot open parts.bin for writing");
    out.write("PRTS", 4);
    out.write(reinterpret_cast<const char*>(&art.config_hash), 8);
    out.write(reinterpret_cast<const char*>(&art.seed), 8);
    const std::uint32_t n =
        static_cast<std::uint32_t>(art.partition.part_of.size());
    const std::uint32_t l = art.partition.parts;
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&l), 4);
    out.write(reinterpret_cast<const char*>(art.partition.part_of.data()),
              static_cast<std::streamsize>(4) * n);
    out.write(reinterpret_cast<const char*>(art.partition.sizes.data()),
              static_cast<std::streamsize>(4) * l);
    out.flush();
    if (!out) throw IoError("write to parts.bin failed");
  }

  write_neighbor_map(art.neighbors, dir + "/neighbors.txt", prov);
  save_agg_state(art.agg, dir + "/aggstate.bin", art.config_hash, art.seed);
  write_loss_report(art.loss, dir + "/loss.txt", prov);

  {
    std::ofstream out(dir + "/timings.csv");
    if (!out) throw IoError("cannot open timings.csv for writing");
    out << "# " << prov << '\n';
    out << "stage,seconds\n";
    for (const auto& t : art.timings)
      out << t.stage << ',' << fmt_double(t.seconds) << '\n';
    out.flush();
    if (!out) throw IoError("write to timings.csv failed");
  }
}

std::vector<BenchRow> bench(const BenchConfig& cfg) {
  if (cfg.reps < 1) throw BadParams("reps must be >= 1");
  std::vector<BenchRow> rows;
  const unsigned threads =
      cfg.threads == 0 ? default_thread_count() : cfg.threads;

  for (const SyntheticKind kind : cfg.kinds) {
    for (const std::uint32_t n : cfg.ns) {
      SyntheticParams params;
      params.clusters = cfg.clusters;
      const LabeledCloud labeled = generate_synthetic(kind, n, cfg.seed, params);
      const PointCloud& cloud = labeled.cloud();
      const HilbertConfig hcfg{cfg.r_bits};

      BenchRow row;
      row.kind = synthetic_kind_name(kind);
      row.n = n;

      std::vector<double> t_ser, t_part, t_sample, t_index, t_query;
      HilbertCode code;
      PartitionSet parts;
      SuperPoints global_sp, local_sp;
      std::vector<std::uint32_t> global_labels, local_labels;
      CombinedIndex index;
      NeighborMap approx;

      for (std::uint32_t rep = 0; rep < cfg.reps; ++rep) {
        auto t0 = Clock::now();
        code = serialize(cloud, hcfg, threads);
        t_ser.push_back(seconds_since(t0));

        t0 = Clock::now();
        parts = partition(code, cfg.parts);
        t_part.push_back(seconds_since(t0));

        t0 = Clock::now();
        RandomProjectionEncoder encoder(cfg.seed, 16, cloud.feature_dim());
        global_sp = fps(cloud, cfg.m_super, 0, threads);
        encode_features(global_sp, cloud, encoder);
        global_labels = inherit_labels(global_sp, labeled);

        const std::uint32_t total = cfg.parts * cfg.m_super;
        local_sp = SuperPoints{};
        local_sp.coords.resize(total, 3);
        local_sp.features.resize(total, encoder.dim());
        local_sp.source.resize(total);
        local_labels.resize(total);
        std::uint32_t run_start = 0;
        for (std::uint32_t p = 0; p < cfg.parts; ++p) {
          const std::uint32_t count = parts.sizes[p];
          std::vector<std::uint32_t> members(
              code.order.begin() + run_start,
              code.order.begin() + run_start + count);
          run_start += count;
          std::vector<std::uint32_t> part_labels(count);
          for (std::uint32_t i = 0; i < count; ++i)
            part_labels[i] = labeled.labels()[members[i]];
          LabeledCloud part_cloud(cloud.select(members),
                                  std::move(part_labels));
          SuperPoints sp = fps(part_cloud.cloud(), cfg.m_super, 0, threads);
          encode_features(sp, part_cloud.cloud(), encoder);
          const auto sp_labels = inherit_labels(sp, part_cloud);
          const std::uint32_t base = p * cfg.m_super;
          for (std::uint32_t i = 0; i < cfg.m_super; ++i) {
            local_sp.coords.row(base + i) = sp.coords.row(i);
            local_sp.features.row(base + i) = sp.features.row(i);
            local_sp.source[base + i] = members[sp.source[i]];
            local_labels[base + i] = sp_labels[i];
          }
        }
        t_sample.push_back(seconds_since(t0));

        t0 = Clock::now();
        index = build_combined_index(global_sp, local_sp, global_labels,
                                     local_labels, hcfg, threads);
        t_index.push_back(seconds_since(t0));

        t0 = Clock::now();
        approx = approx_knn(index, global_sp, local_sp, cfg.k, threads);
        t_query.push_back(seconds_since(t0));
      }

      row.t_serialize = median(t_ser);
      row.t_partition = median(t_part);
      row.t_sample = median(t_sample);
      row.t_index = median(t_index);
      row.t_knn_query = median(t_query);
      row.per_query_us =
          1e6 * row.t_knn_query / static_cast<double>(cfg.m_super);

      const NeighborMap exact =
          exact_knn(global_sp, local_sp, global_labels, local_labels, cfg.k,
                    /*constrained=*/true, threads);
      row.recall_mean = recall_at_k(approx, exact).mean;

      for (std::size_t q = 0; q < approx.queries(); ++q)
        for (const std::uint32_t id : approx.neighbors[q])
          if (local_labels[id] != global_labels[q]) ++row.purity_violations;

      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path,
                     const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << "kind,n,t_serialize,t_partition,t_sample,t_index,t_knn_query,"
         "per_query_us,recall_mean,purity_violations\n";
  for (const auto& r : rows) {
    out << r.kind << ',' << r.n << ',' << fmt_double(r.t_serialize) << ','
        << fmt_double(r.t_partition) << ',' << fmt_double(r.t_sample) << ','
        << fmt_double(r.t_index) << ',' << fmt_double(r.t_knn_query) << ','
        << fmt_double(r.per_query_us) << ',' << fmt_double(r.recall_mean)
        << ',' << r.purity_violations << '\n';
  }
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace percloud
