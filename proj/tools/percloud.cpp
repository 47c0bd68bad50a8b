// Command-line surface for the point-cloud locality toolkit. One subcommand
// per pipeline capability; data goes to files or stdout, diagnostics to
// stderr. Exit codes: 0 success, 1 validation/parse errors, 2 I/O errors.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>

#include "percloud/aggregate.hpp"
#include "percloud/hilbert.hpp"
#include "percloud/io.hpp"
#include "percloud/losses.hpp"
#include "percloud/neighbors.hpp"
#include "percloud/parallel.hpp"
#include "percloud/pipeline.hpp"
#include "percloud/rng.hpp"
#include "percloud/sampling.hpp"
#include "percloud/synthetic.hpp"

namespace pc = percloud;

namespace {

struct CommonOpts {
  std::uint64_t seed = 0;
  std::string config;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--seed", opts.seed, "Seed for every randomized step");
  cmd->add_option("--config", opts.config,
                  "key=value file; entries override command-line flags");
}

// Applies `key=value` lines from the config file on top of whatever the
// command line set. Unknown keys are errors, like unknown flags.
void apply_config_overrides(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw pc::IoError("cannot open config file '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#' || line[first] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw pc::BadParams(path + ":" + std::to_string(lineno) +
                          ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr)
      throw pc::BadParams(path + ":" + std::to_string(lineno) +
                          ": unknown option '" + key + "'");
    opt->clear();
    opt->add_result(value.empty() ? "true" : value);
    opt->run_callback();
  }
}

pc::CloudFormat resolve_format(const std::string& name, const std::string& path) {
  if (name == "auto") return pc::format_from_path(path);
  return pc::parse_format(name);
}

pc::PointCloud load_cloud(const std::string& path, const std::string& format) {
  return pc::read_cloud(path, resolve_format(format, path));
}

std::string default_sibling(const std::string& path, const char* suffix) {
  return path + suffix;
}

// ---------------------------------------------------------------- gen ----

struct GenOpts {
  CommonOpts common;
  std::string kind = "gaussian-clusters";
  std::uint32_t n = 6000;
  std::string out;
  std::string labels_out;
  std::string format = "packed-binary";
  std::uint32_t subsample = 0;
  pc::SyntheticParams params;
};

void run_gen(const GenOpts& o) {
  pc::LabeledCloud cloud = pc::generate_synthetic(
      pc::parse_synthetic_kind(o.kind), o.n, o.common.seed, o.params);
  if (o.subsample > 0)
    cloud = pc::subsample(cloud, o.subsample, o.common.seed);
  pc::write_cloud(cloud.cloud(), o.out, pc::parse_format(o.format));
  const std::string labels_path =
      o.labels_out.empty() ? default_sibling(o.out, ".labels") : o.labels_out;
  pc::write_labels(cloud.labels(), labels_path);
  std::cout << "points=" << cloud.size() << '\n';
  std::cout << "cloud=" << o.out << '\n';
  std::cout << "labels=" << labels_path << '\n';
}

// ---------------------------------------------------------- serialize ----

struct SerializeOpts {
  CommonOpts common;
  std::string in, format = "auto", out;
  std::uint32_t r_bits = 16;
  std::string curve = "hilbert";
  unsigned threads = 0;
};

void run_serialize(const SerializeOpts& o) {
  const pc::PointCloud cloud = load_cloud(o.in, o.format);
  const pc::CurveKind curve = o.curve == "morton" ? pc::CurveKind::kMorton
                                                  : pc::CurveKind::kHilbert;
  if (o.curve != "hilbert" && o.curve != "morton")
    throw pc::BadParams("curve must be hilbert or morton");
  const unsigned threads =
      o.threads == 0 ? pc::default_thread_count() : o.threads;
  const pc::HilbertCode code =
      pc::serialize(cloud, pc::HilbertConfig{o.r_bits}, threads, curve);
  pc::write_hilbert_code(code, o.out);
  std::cout << "points=" << code.order.size() << '\n';
}

// ---------------------------------------------------------- partition ----

struct PartitionOpts {
  CommonOpts common;
  std::string in, format = "auto", out;
  std::uint32_t r_bits = 16;
  std::uint32_t parts = 6;
};

void run_partition(const PartitionOpts& o) {
  const pc::PointCloud cloud = load_cloud(o.in, o.format);
  const pc::HilbertCode code =
      pc::serialize(cloud, pc::HilbertConfig{o.r_bits});
  const pc::PartitionSet set = pc::partition(code, o.parts);

  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw pc::IoError("cannot open '" + o.out + "' for writing");
  out.write("PRTS", 4);
  const std::uint64_t zero = 0;
  out.write(reinterpret_cast<const char*>(&zero), 8);
  out.write(reinterpret_cast<const char*>(&o.common.seed), 8);
  const std::uint32_t n = static_cast<std::uint32_t>(set.part_of.size());
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&set.parts), 4);
  out.write(reinterpret_cast<const char*>(set.part_of.data()),
            static_cast<std::streamsize>(4) * n);
  out.write(reinterpret_cast<const char*>(set.sizes.data()),
            static_cast<std::streamsize>(4) * set.parts);
  if (!out) throw pc::IoError("write to '" + o.out + "' failed");

  for (std::uint32_t p = 0; p < set.parts; ++p)
    std::cout << "part" << p << "=" << set.sizes[p] << '\n';
}

// ---------------------------------------------------------------- fps ----

struct FpsOpts {
  CommonOpts common;
  std::string in, format = "auto", out, sources_out;
  std::uint32_t m = 1024;
  std::uint32_t start = 0;
  unsigned threads = 0;
};

void run_fps(const FpsOpts& o) {
  const pc::PointCloud cloud = load_cloud(o.in, o.format);
  const unsigned threads =
      o.threads == 0 ? pc::default_thread_count() : o.threads;
  pc::SuperPoints sp = pc::fps(cloud, o.m, o.start, threads);
  if (cloud.feature_dim() > 0) {
    pc::PassthroughEncoder enc(cloud.feature_dim());
    pc::encode_features(sp, cloud, enc);
  }
  const std::string sources =
      o.sources_out.empty() ? default_sibling(o.out, ".src") : o.sources_out;
  pc::write_super_points(sp, o.out, sources);
  std::cout << "selected=" << sp.size() << '\n';
}

// -------------------------------------------------------------- label ----

struct LabelOpts {
  CommonOpts common;
  std::string in, format = "auto", out;
  std::string method = "voxel-grid";
  double cell = 0.25;
  double radius = 0.1;
  std::string labels_in;
};

void run_label(const LabelOpts& o) {
  pc::PointCloud cloud = load_cloud(o.in, o.format);
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(cloud.size()), 0);
  if (!o.labels_in.empty()) labels = pc::read_labels(o.labels_in);
  const pc::LabeledCloud input(std::move(cloud), std::move(labels));
  const pc::LabelMethod method = pc::parse_label_method(o.method);
  const double param =
      method == pc::LabelMethod::kVoxelGrid ? o.cell : o.radius;
  const pc::LabeledCloud out = pc::label_clusters(input, method, param);
  pc::write_labels(out.labels(), o.out);
  std::uint32_t max_label = 0;
  for (const auto l : out.labels()) max_label = std::max(max_label, l);
  std::cout << "labels=" << (out.size() ? max_label + 1 : 0) << '\n';
}

// ---------------------------------------------------------------- knn ----

struct KnnOpts {
  CommonOpts common;
  std::string global_path, local_path;
  std::string global_labels, local_labels;
  std::uint32_t k = 24;
  std::uint32_t r_bits = 16;
  std::string out;
  bool exact = false;
  bool unconstrained = false;
  unsigned threads = 0;
};

pc::SuperPoints cloud_as_super_points(const pc::PointCloud& cloud) {
  pc::SuperPoints sp;
  sp.coords = cloud.coords();
  sp.features = cloud.features();
  sp.source.resize(static_cast<std::size_t>(cloud.size()));
  for (std::size_t i = 0; i < sp.source.size(); ++i)
    sp.source[i] = static_cast<std::uint32_t>(i);
  return sp;
}

void run_knn(const KnnOpts& o) {
  const pc::SuperPoints global =
      cloud_as_super_points(load_cloud(o.global_path, "auto"));
  const pc::SuperPoints local =
      cloud_as_super_points(load_cloud(o.local_path, "auto"));
  std::vector<std::uint32_t> gl(static_cast<std::size_t>(global.size()), 0);
  std::vector<std::uint32_t> ll(static_cast<std::size_t>(local.size()), 0);
  if (!o.global_labels.empty()) gl = pc::read_labels(o.global_labels);
  if (!o.local_labels.empty()) ll = pc::read_labels(o.local_labels);

  const unsigned threads =
      o.threads == 0 ? pc::default_thread_count() : o.threads;
  pc::NeighborMap map;
  if (o.exact) {
    map = pc::exact_knn(global, local, gl, ll, o.k, !o.unconstrained, threads);
  } else {
    const pc::CombinedIndex index = pc::build_combined_index(
        global, local, gl, ll, pc::HilbertConfig{o.r_bits}, threads);
    map = pc::approx_knn(index, global, local, o.k, threads);
  }
  pc::write_neighbor_map(map, o.out);
  std::cout << "queries=" << map.queries() << '\n';
}

// --------------------------------------------------------- knn-recall ----

struct RecallOpts {
  CommonOpts common;
  std::string approx_path, exact_path;
  bool per_query = false;
};

void run_recall(const RecallOpts& o) {
  const pc::NeighborMap approx = pc::read_neighbor_map(o.approx_path);
  const pc::NeighborMap exact = pc::read_neighbor_map(o.exact_path);
  const pc::RecallReport report = pc::recall_at_k(approx, exact);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", report.mean);
  std::cout << "evaluated=" << report.evaluated << '\n';
  std::cout << "recall_mean=" << buf << '\n';
  if (o.per_query)
    for (std::size_t q = 0; q < report.per_query.size(); ++q)
      if (report.per_query[q] >= 0.0)
        std::cout << "recall[" << q << "]=" << report.per_query[q] << '\n';
}

// ---------------------------------------------------------- aggregate ----

struct AggregateOpts {
  CommonOpts common;
  std::string global_path, local_path, neighbors_path;
  std::string out;
  std::string params_out;
  double sigma = 1.0;
  std::uint32_t k_graph = 8;
  bool value_uses_wr = false;
};

void run_aggregate(const AggregateOpts& o) {
  const pc::PointCloud global = load_cloud(o.global_path, "auto");
  const pc::PointCloud local = load_cloud(o.local_path, "auto");
  if (global.feature_dim() != local.feature_dim())
    throw pc::DimensionMismatch("global/local feature widths differ");

  pc::AggregationState state;
  state.global_coords = global.coords();
  state.global_feats = global.features();
  state.local_coords = local.coords();
  state.local_feats = local.features();
  state.neighbor_map = pc::read_neighbor_map(o.neighbors_path);

  const pc::AggParams params =
      pc::AggParams::seeded(o.common.seed, global.feature_dim(), o.k_graph,
                            o.sigma, o.value_uses_wr);
  pc::aggregate_local_global(state, params, pc::default_thread_count());
  pc::save_agg_state(state, o.out, 0, o.common.seed);
  if (!o.params_out.empty()) pc::save_agg_params(params, o.params_out);
  std::cout << "updated=" << state.updated_feats.rows() << 'x'
            << state.updated_feats.cols() << '\n';
}

// --------------------------------------------------------------- loss ----

struct LossOpts {
  CommonOpts common;
  std::string aggstate_path;
  std::string out;
  double mu = 0.1, lambda = 0.1;
  double eps_norm = 1e-12, eps_degree = 1e-12;
  double l_pred = 0.0;
};

void run_loss(const LossOpts& o) {
  const pc::LoadedAggState state = pc::load_agg_state(o.aggstate_path);
  pc::LossConfig cfg;
  cfg.mu = o.mu;
  cfg.lambda = o.lambda;
  cfg.eps_norm = o.eps_norm;
  cfg.eps_degree = o.eps_degree;
  const pc::LossReport report =
      pc::consensus_loss(state.updated_feats, state.global_feats,
                         pc::symmetrize_max(state.adjacency), cfg, o.l_pred);
  if (!o.out.empty()) pc::write_loss_report(report, o.out);
  char buf[32];
  const auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::cout << key << '=' << buf << '\n';
  };
  put("l_smt", report.l_smt);
  put("l_reg", report.l_reg);
  put("l_con", report.l_con);
  put("l_pred", report.l_pred);
  put("l_total", report.l_total);
}

// ---------------------------------------------------------------- run ----

struct RunOpts {
  CommonOpts common;
  pc::RunConfig cfg;
  std::string kind = "gaussian-clusters";
  std::string format = "auto";
  std::string labeler = "provided";
  std::string encoder = "random-projection";
};

void run_run(RunOpts& o) {
  o.cfg.seed = o.common.seed;
  o.cfg.kind = pc::parse_synthetic_kind(o.kind);
  if (!o.cfg.input_path.empty())
    o.cfg.input_format = resolve_format(o.format, o.cfg.input_path);
  o.cfg.labeler = pc::parse_label_method(o.labeler);
  o.cfg.encoder = pc::parse_encoder_kind(o.encoder);

  const pc::RunArtifacts artifacts = pc::run_encoder(o.cfg);
  pc::write_run_artifacts(artifacts, o.cfg.out_dir);
  std::printf("config=%016llx\n",
              static_cast<unsigned long long>(artifacts.config_hash));
  std::cout << "out_dir=" << o.cfg.out_dir << '\n';
  std::cout << "l_total=" << artifacts.loss.l_total << '\n';
}

// -------------------------------------------------------------- bench ----

struct BenchOpts {
  CommonOpts common;
  std::vector<std::string> kinds{"uniform-cube", "gaussian-clusters"};
  std::vector<std::uint32_t> ns{10000};
  pc::BenchConfig cfg;
  std::string out = "bench.csv";
};

void run_bench(BenchOpts& o) {
  o.cfg.seed = o.common.seed;
  o.cfg.kinds.clear();
  for (const auto& k : o.kinds) o.cfg.kinds.push_back(pc::parse_synthetic_kind(k));
  o.cfg.ns = o.ns;
  const auto rows = pc::bench(o.cfg);
  pc::write_bench_csv(rows, o.out);
  for (const auto& r : rows)
    std::printf("%s n=%u serialize=%.4fs knn=%.2fus/query recall=%.4f purity_violations=%llu\n",
                r.kind.c_str(), r.n, r.t_serialize, r.per_query_us,
                r.recall_mean, static_cast<unsigned long long>(r.purity_violations));
  if (rows.empty()) std::cout << "empty grid\n";
}

// ---------------------------------------------------------- gradcheck ----

struct GradcheckOpts {
  CommonOpts common;
  std::uint32_t m = 32;
  std::uint32_t d = 8;
  std::uint32_t k_graph = 4;
  double h = 1e-6;
  double tol = 1e-5;
};

int run_gradcheck(const GradcheckOpts& o) {
  pc::Rng rng(o.common.seed);
  pc::Matrix fhat(o.m, o.d), forig(o.m, o.d), coords(o.m, 3);
  for (Eigen::Index i = 0; i < fhat.rows(); ++i) {
    for (Eigen::Index j = 0; j < fhat.cols(); ++j) {
      fhat(i, j) = rng.gaussian();
      forig(i, j) = rng.gaussian();
    }
    for (Eigen::Index j = 0; j < 3; ++j) coords(i, j) = rng.gaussian();
  }
  const pc::SparseMatrix w = pc::symmetrize_max(
      pc::build_adjacency(forig, coords, o.k_graph));

  const pc::LossFn smt = [&](const pc::Matrix& x) {
    const pc::LossTerm t = pc::smoothness_loss(x, w);
    return std::make_pair(t.value, t.grad);
  };
  const pc::LossFn reg = [&](const pc::Matrix& x) {
    const pc::LossTerm t = pc::regularization_loss(x, forig);
    return std::make_pair(t.value, t.grad);
  };

  const pc::FiniteDiffReport rs = pc::finite_diff_check(smt, fhat, o.h, o.tol);
  const pc::FiniteDiffReport rr = pc::finite_diff_check(reg, fhat, o.h, o.tol);
  std::printf("smoothness max_rel_err=%.3e pass=%d\n", rs.max_rel_err, rs.pass);
  std::printf("regularization max_rel_err=%.3e pass=%d\n", rr.max_rel_err,
              rr.pass);
  if (rs.pass && rr.pass) {
    std::cout << "gradcheck=pass\n";
    return 0;
  }
  std::cerr << "gradcheck failed\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"percloud: Hilbert-curve point-cloud locality toolkit"};
  app.name("percloud");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  GenOpts gen;
  auto* cmd_gen = app.add_subcommand("gen", "Generate a synthetic labeled cloud");
  add_common(cmd_gen, gen.common);
  cmd_gen->add_option("--kind", gen.kind,
                      "uniform-cube | gaussian-clusters | room-grid");
  cmd_gen->add_option("--n", gen.n, "Point count");
  cmd_gen->add_option("--out", gen.out, "Output cloud path")->required();
  cmd_gen->add_option("--labels-out", gen.labels_out,
                      "Labels sidecar (default <out>.labels)");
  cmd_gen->add_option("--format", gen.format,
                      "xyz-text | ply-ascii | packed-binary");
  cmd_gen->add_option("--subsample", gen.subsample,
                      "Keep this many points, uniform without replacement (0 = all)");
  cmd_gen->add_option("--edge", gen.params.edge, "uniform-cube edge length");
  cmd_gen->add_option("--clusters", gen.params.clusters,
                      "gaussian-clusters count");
  cmd_gen->add_option("--stddev", gen.params.stddev,
                      "gaussian-clusters spread");
  cmd_gen->add_option("--separation", gen.params.separation,
                      "gaussian-clusters center spacing");
  cmd_gen->add_option("--boxes-x", gen.params.boxes_x, "room-grid boxes along x");
  cmd_gen->add_option("--boxes-y", gen.params.boxes_y, "room-grid boxes along y");
  cmd_gen->add_option("--boxes-z", gen.params.boxes_z, "room-grid boxes along z");
  cmd_gen->add_option("--room", gen.params.room, "room-grid extent");
  cmd_gen->add_option("--gap", gen.params.gap, "room-grid box shrink fraction");

  SerializeOpts ser;
  auto* cmd_ser =
      app.add_subcommand("serialize", "Hilbert-serialize a cloud to index pairs");
  add_common(cmd_ser, ser.common);
  cmd_ser->add_option("--in", ser.in, "Input cloud")->required();
  cmd_ser->add_option("--format", ser.format, "Input format (auto from extension)");
  cmd_ser->add_option("--r-bits", ser.r_bits, "Bits per axis (1..21)");
  cmd_ser->add_option("--curve", ser.curve, "hilbert | morton (baseline)");
  cmd_ser->add_option("--out", ser.out, "Output text file")->required();
  cmd_ser->add_option("--threads", ser.threads, "Worker threads (0 = all cores)")
      ->envname("PERCLOUD_THREADS");

  PartitionOpts part;
  auto* cmd_part = app.add_subcommand(
      "partition", "Split a serialized cloud into equal contiguous parts");
  add_common(cmd_part, part.common);
  cmd_part->add_option("--in", part.in, "Input cloud")->required();
  cmd_part->add_option("--format", part.format, "Input format (auto from extension)");
  cmd_part->add_option("--r-bits", part.r_bits, "Bits per axis (1..21)");
  cmd_part->add_option("--parts", part.parts, "Part count L");
  cmd_part->add_option("--out", part.out, "Output parts.bin")->required();

  FpsOpts fps_o;
  auto* cmd_fps =
      app.add_subcommand("fps", "Farthest-point-sample a cloud to super-points");
  add_common(cmd_fps, fps_o.common);
  cmd_fps->add_option("--in", fps_o.in, "Input cloud")->required();
  cmd_fps->add_option("--format", fps_o.format, "Input format (auto from extension)");
  cmd_fps->add_option("--m", fps_o.m, "Super-point count");
  cmd_fps->add_option("--start", fps_o.start, "First pick index");
  cmd_fps->add_option("--out", fps_o.out, "Output packed-binary cloud")->required();
  cmd_fps->add_option("--sources-out", fps_o.sources_out,
                      "Source-index sidecar (default <out>.src)");
  cmd_fps->add_option("--threads", fps_o.threads, "Worker threads (0 = all cores)")
      ->envname("PERCLOUD_THREADS");

  LabelOpts label;
  auto* cmd_label =
      app.add_subcommand("label", "Assign geometric labels to a cloud");
  add_common(cmd_label, label.common);
  cmd_label->add_option("--in", label.in, "Input cloud")->required();
  cmd_label->add_option("--format", label.format, "Input format (auto from extension)");
  cmd_label->add_option("--method", label.method,
                        "provided | voxel-grid | euclidean-cluster");
  cmd_label->add_option("--cell", label.cell, "voxel-grid cell size");
  cmd_label->add_option("--radius", label.radius, "euclidean-cluster radius");
  cmd_label->add_option("--labels-in", label.labels_in,
                        "Existing labels (required for provided)");
  cmd_label->add_option("--out", label.out, "Output labels file")->required();

  KnnOpts knn;
  auto* cmd_knn = app.add_subcommand(
      "knn", "Label-constrained k-NN of global queries among local points");
  add_common(cmd_knn, knn.common);
  cmd_knn->add_option("--global", knn.global_path, "Global super-point cloud")
      ->required();
  cmd_knn->add_option("--local", knn.local_path, "Local super-point cloud")
      ->required();
  cmd_knn->add_option("--global-labels", knn.global_labels,
                      "Global labels file (default: all zero)");
  cmd_knn->add_option("--local-labels", knn.local_labels,
                      "Local labels file (default: all zero)");
  cmd_knn->add_option("--k", knn.k, "Neighbors per query");
  cmd_knn->add_option("--r-bits", knn.r_bits, "Bits per axis (1..21)");
  cmd_knn->add_flag("--exact", knn.exact, "Use the brute-force oracle");
  cmd_knn->add_flag("--unconstrained", knn.unconstrained,
                    "Drop the label constraint (exact mode only)");
  cmd_knn->add_option("--out", knn.out, "Output neighbor map")->required();
  cmd_knn->add_option("--threads", knn.threads, "Worker threads (0 = all cores)")
      ->envname("PERCLOUD_THREADS");

  RecallOpts recall;
  auto* cmd_recall = app.add_subcommand(
      "knn-recall", "Recall of an approximate neighbor map vs an exact one");
  add_common(cmd_recall, recall.common);
  cmd_recall->add_option("--approx", recall.approx_path, "Approximate map")
      ->required();
  cmd_recall->add_option("--exact", recall.exact_path, "Exact map")->required();
  cmd_recall->add_flag("--per-query", recall.per_query,
                       "Also print per-query recall records");

  AggregateOpts agg;
  auto* cmd_agg = app.add_subcommand(
      "aggregate", "Cross-attention + GCN aggregation of local into global");
  add_common(cmd_agg, agg.common);
  cmd_agg->add_option("--global", agg.global_path,
                      "Global super-point cloud (with features)")
      ->required();
  cmd_agg->add_option("--local", agg.local_path,
                      "Local super-point cloud (with features)")
      ->required();
  cmd_agg->add_option("--neighbors", agg.neighbors_path, "Neighbor map file")
      ->required();
  cmd_agg->add_option("--sigma", agg.sigma, "Relative position scale");
  cmd_agg->add_option("--k-graph", agg.k_graph, "Global graph neighbor count");
  cmd_agg->add_flag("--value-uses-wr", agg.value_uses_wr,
                    "Apply W_r to the value-path embeddings too");
  cmd_agg->add_option("--out", agg.out, "Output aggregation state")->required();
  cmd_agg->add_option("--params-out", agg.params_out,
                      "Also save the seeded parameter set");

  LossOpts loss;
  auto* cmd_loss =
      app.add_subcommand("loss", "Consensus loss of a saved aggregation state");
  add_common(cmd_loss, loss.common);
  cmd_loss->add_option("--aggstate", loss.aggstate_path, "aggstate.bin path")
      ->required();
  cmd_loss->add_option("--mu", loss.mu, "Regularization weight");
  cmd_loss->add_option("--lambda", loss.lambda, "Consensus weight");
  cmd_loss->add_option("--eps-norm", loss.eps_norm, "Norm stabilizer");
  cmd_loss->add_option("--eps-degree", loss.eps_degree, "Degree cutoff");
  cmd_loss->add_option("--l-pred", loss.l_pred, "Task loss to fold in");
  cmd_loss->add_option("--out", loss.out, "Also write key=value report here");

  RunOpts run;
  auto* cmd_run =
      app.add_subcommand("run", "Full encoder pipeline, artifacts to a directory");
  add_common(cmd_run, run.common);
  cmd_run->add_option("--in", run.cfg.input_path,
                      "Input cloud (omit to generate synthetically)");
  cmd_run->add_option("--format", run.format, "Input format (auto from extension)");
  cmd_run->add_option("--labels", run.cfg.labels_path, "Input labels sidecar");
  cmd_run->add_option("--kind", run.kind,
                      "Synthetic kind when --in is omitted");
  cmd_run->add_option("--n", run.cfg.n, "Synthetic point count");
  cmd_run->add_option("--clusters", run.cfg.synthetic.clusters,
                      "gaussian-clusters count");
  cmd_run->add_option("--stddev", run.cfg.synthetic.stddev,
                      "gaussian-clusters spread");
  cmd_run->add_option("--separation", run.cfg.synthetic.separation,
                      "gaussian-clusters center spacing");
  cmd_run->add_option("--r-bits", run.cfg.r_bits, "Bits per axis (1..21)");
  cmd_run->add_option("--parts", run.cfg.parts, "Part count L");
  cmd_run->add_option("--m", run.cfg.m_super, "Super-points per scene/part M");
  cmd_run->add_option("--k", run.cfg.k, "Attention neighbors per query");
  cmd_run->add_option("--k-graph", run.cfg.k_graph,
                      "Global graph neighbor count");
  cmd_run->add_option("--labeler", run.labeler,
                      "provided | voxel-grid | euclidean-cluster");
  cmd_run->add_option("--cell", run.cfg.label_cell, "voxel-grid cell size");
  cmd_run->add_option("--radius", run.cfg.label_radius,
                      "euclidean-cluster radius");
  cmd_run->add_option("--encoder", run.encoder,
                      "passthrough | random-projection");
  cmd_run->add_option("--feat-dim", run.cfg.feat_dim,
                      "random-projection output dimension (even)");
  cmd_run->add_option("--sigma", run.cfg.sigma, "Relative position scale");
  cmd_run->add_flag("--value-uses-wr", run.cfg.value_uses_Wr,
                    "Apply W_r to the value-path embeddings too");
  cmd_run->add_option("--mu", run.cfg.loss.mu, "Regularization weight");
  cmd_run->add_option("--lambda", run.cfg.loss.lambda, "Consensus weight");
  cmd_run->add_option("--out-dir", run.cfg.out_dir, "Artifact directory");
  cmd_run->add_option("--threads", run.cfg.threads,
                      "Worker threads (0 = all cores)")
      ->envname("PERCLOUD_THREADS");

  BenchOpts bench_o;
  auto* cmd_bench = app.add_subcommand(
      "bench", "Stage timings, recall, and purity across a config grid");
  add_common(cmd_bench, bench_o.common);
  cmd_bench->add_option("--kinds", bench_o.kinds, "Synthetic kinds")
      ->delimiter(',');
  cmd_bench->add_option("--ns", bench_o.ns, "Point counts")->delimiter(',');
  cmd_bench->add_option("--r-bits", bench_o.cfg.r_bits, "Bits per axis (1..21)");
  cmd_bench->add_option("--parts", bench_o.cfg.parts, "Part count L");
  cmd_bench->add_option("--m", bench_o.cfg.m_super, "Super-points per scene/part");
  cmd_bench->add_option("--k", bench_o.cfg.k, "Neighbors per query");
  cmd_bench->add_option("--clusters", bench_o.cfg.clusters,
                        "gaussian-clusters count");
  cmd_bench->add_option("--reps", bench_o.cfg.reps,
                        "Repetitions per timing (median reported)");
  cmd_bench->add_option("--out", bench_o.out, "Output CSV");
  cmd_bench->add_option("--threads", bench_o.cfg.threads,
                        "Worker threads (0 = all cores)")
      ->envname("PERCLOUD_THREADS");

  GradcheckOpts grad;
  auto* cmd_grad = app.add_subcommand(
      "gradcheck", "Finite-difference verification of the loss gradients");
  add_common(cmd_grad, grad.common);
  cmd_grad->add_option("--m", grad.m, "Rows of the random instance");
  cmd_grad->add_option("--d", grad.d, "Feature dimension");
  cmd_grad->add_option("--k-graph", grad.k_graph, "Graph neighbor count");
  cmd_grad->add_option("--step", grad.h, "Central-difference step");
  cmd_grad->add_option("--tol", grad.tol, "Max relative error to pass");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_gen->parsed()) apply_config_overrides(cmd_gen, gen.common.config);
    if (cmd_ser->parsed()) apply_config_overrides(cmd_ser, ser.common.config);
    if (cmd_part->parsed()) apply_config_overrides(cmd_part, part.common.config);
    if (cmd_fps->parsed()) apply_config_overrides(cmd_fps, fps_o.common.config);
    if (cmd_label->parsed()) apply_config_overrides(cmd_label, label.common.config);
    if (cmd_knn->parsed()) apply_config_overrides(cmd_knn, knn.common.config);
    if (cmd_recall->parsed())
      apply_config_overrides(cmd_recall, recall.common.config);
    if (cmd_agg->parsed()) apply_config_overrides(cmd_agg, agg.common.config);
    if (cmd_loss->parsed()) apply_config_overrides(cmd_loss, loss.common.config);
    if (cmd_run->parsed()) apply_config_overrides(cmd_run, run.common.config);
    if (cmd_bench->parsed())
      apply_config_overrides(cmd_bench, bench_o.common.config);
    if (cmd_grad->parsed()) apply_config_overrides(cmd_grad, grad.common.config);

    if (cmd_gen->parsed()) run_gen(gen);
    if (cmd_ser->parsed()) run_serialize(ser);
    if (cmd_part->parsed()) run_partition(part);
    if (cmd_fps->parsed()) run_fps(fps_o);
    if (cmd_label->parsed()) run_label(label);
    if (cmd_knn->parsed()) run_knn(knn);
    if (cmd_recall->parsed()) run_recall(recall);
    if (cmd_agg->parsed()) run_aggregate(agg);
    if (cmd_loss->parsed()) run_loss(loss);
    if (cmd_run->parsed()) run_run(run);
    if (cmd_bench->parsed()) run_bench(bench_o);
    if (cmd_grad->parsed()) return run_gradcheck(grad);
  } catch (const pc::StagedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_io() ? 2 : 1;
  } catch (const pc::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
