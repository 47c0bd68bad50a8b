#include "percloud/neighbors.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <numeric>
#include <sstream>

#include "percloud/parallel.hpp"

namespace percloud {
namespace {

struct Candidate {
  double d2;
  std::uint32_t id;

  bool operator<(const Candidate& other) const {
    if (d2 != other.d2) return d2 < other.d2;
    return id < other.id;
  }
};

}  // namespace

CombinedIndex build_combined_index(const SuperPoints& global,
                                   const SuperPoints& local,
                                   const std::vector<std::uint32_t>& global_labels,
                                   const std::vector<std::uint32_t>& local_labels,
                                   const HilbertConfig& cfg, unsigned threads) {
  cfg.validate();
  const auto mg = static_cast<std::uint32_t>(global.size());
  const auto ml = static_cast<std::uint32_t>(local.size());
  if (global_labels.size() != mg || local_labels.size() != ml)
    throw BadParams("label arrays must cover all global and local points");

  std::uint32_t max_label = 0;
  for (std::uint32_t l : global_labels) max_label = std::max(max_label, l);
  for (std::uint32_t l : local_labels) max_label = std::max(max_label, l);
  const unsigned label_bits = std::bit_width(max_label);
  if (3 * cfg.r_bits + label_bits > 64) {
    const unsigned fit = (64 - label_bits) / 3;
    throw LabelOverflow(
        "combined key needs " + std::to_string(3 * cfg.r_bits + label_bits) +
        " bits; reduce r_bits to " + std::to_string(fit) + " or below");
  }

  CombinedIndex index;
  index.r_bits = cfg.r_bits;
  index.label_offset = cfg.index_range();

  // One shared bounding box over the union keeps the two sets' indices
  // comparable.
  Matrix all(mg + ml, 3);
  all.topRows(mg) = global.coords;
  all.bottomRows(ml) = local.coords;
  index.bbox = Bbox{all.colwise().minCoeff().transpose(),
                    all.colwise().maxCoeff().transpose()};

  const auto h =
      hilbert_indices_in_bbox(all, index.bbox, cfg.r_bits, threads);

  const std::size_t total = mg + ml;
  std::vector<std::uint32_t> order(total);
  std::iota(order.begin(), order.end(), 0u);
  std::vector<std::uint64_t> key(total);
  for (std::uint32_t i = 0; i < mg; ++i)
    key[i] = index.label_offset * global_labels[i] + h[i];
  for (std::uint32_t j = 0; j < ml; ++j)
    key[mg + j] = index.label_offset * local_labels[j] + h[mg + j];
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (key[a] != key[b]) return key[a] < key[b];
    return a < b;  // globals (lower raw ids) before locals, then by id
  });

  index.keys.resize(total);
  index.point_id.resize(total);
  index.is_local.resize(total);
  index.label.resize(total);
  index.global_pos.resize(mg);
  for (std::size_t pos = 0; pos < total; ++pos) {
    const std::uint32_t raw = order[pos];
    index.keys[pos] = key[raw];
    index.is_local[pos] = raw >= mg;
    index.point_id[pos] = raw >= mg ? raw - mg : raw;
    index.label[pos] = raw >= mg ? local_labels[raw - mg] : global_labels[raw];
    if (raw < mg) index.global_pos[raw] = static_cast<std::uint32_t>(pos);
  }
  return index;
}

NeighborMap approx_knn(const CombinedIndex& index, const SuperPoints& global,
                       const SuperPoints& local, std::uint32_t k,
                       unsigned threads) {
  if (k < 1) throw BadParams("k must be >= 1");
  const auto mg = static_cast<std::uint32_t>(global.size());
  if (index.global_pos.size() != mg)
    throw BadParams("index was built for a different global set");

  NeighborMap map;
  map.k = k;
  map.neighbors.resize(mg);

  parallel_for(mg, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<Candidate> candidates;
    for (std::size_t q = begin; q < end; ++q) {
      candidates.clear();
      const std::size_t pos = index.global_pos[q];
      const std::uint32_t lab = index.label[pos];
      const Vec3 p = global.coords.row(static_cast<Eigen::Index>(q)).transpose();

      // Symmetric window: up to k local candidates on each side, never
      // leaving this label's key range.
      auto collect = [&](std::int64_t step) {
        std::uint32_t got = 0;
        for (std::int64_t i = static_cast<std::int64_t>(pos) + step;
             got < k && i >= 0 && i < static_cast<std::int64_t>(index.size());
             i += step) {
          if (index.label[i] != lab) break;
          if (!index.is_local[i]) continue;  // skipped global
          const std::uint32_t id = index.point_id[i];
          const double d2 =
              (local.coords.row(id).transpose() - p).squaredNorm();
          candidates.push_back({d2, id});
          ++got;
        }
      };
      collect(-1);
      collect(+1);

      const std::size_t keep = std::min<std::size_t>(k, candidates.size());
      std::partial_sort(candidates.begin(), candidates.begin() + keep,
                        candidates.end());
      auto& out = map.neighbors[q];
      out.reserve(keep);
      for (std::size_t i = 0; i < keep; ++i) out.push_back(candidates[i].id);
    }
  });
  return map;
}

NeighborMap exact_knn(const SuperPoints& global, const SuperPoints& local,
                      const std::vector<std::uint32_t>& global_labels,
                      const std::vector<std::uint32_t>& local_labels,
                      std::uint32_t k, bool constrained, unsigned threads) {
  if (k < 1) throw BadParams("k must be >= 1");
  const auto mg = static_cast<std::uint32_t>(global.size());
  const auto ml = static_cast<std::uint32_t>(local.size());
  if (global_labels.size() != mg || local_labels.size() != ml)
    throw BadParams("label arrays must cover all global and local points");

  NeighborMap map;
  map.k = k;
  map.neighbors.resize(mg);

  parallel_for(mg, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<Candidate> candidates;
    for (std::size_t q = begin; q < end; ++q) {
      candidates.clear();
      const Vec3 p = global.coords.row(static_cast<Eigen::Index>(q)).transpose();
      for (std::uint32_t j = 0; j < ml; ++j) {
        if (constrained && local_labels[j] != global_labels[q]) continue;
        const double d2 = (local.coords.row(j).transpose() - p).squaredNorm();
        candidates.push_back({d2, j});
      }
      const std::size_t keep = std::min<std::size_t>(k, candidates.size());
      std::partial_sort(candidates.begin(), candidates.begin() + keep,
                        candidates.end());
      auto& out = map.neighbors[q];
      out.reserve(keep);
      for (std::size_t i = 0; i < keep; ++i) out.push_back(candidates[i].id);
    }
  });
  return map;
}

RecallReport recall_at_k(const NeighborMap& approx, const NeighborMap& exact) {
  if (approx.queries() != exact.queries())
    throw QuerySetMismatch("approx has " + std::to_string(approx.queries()) +
                           " queries, exact has " +
                           std::to_string(exact.queries()));
  if (approx.k != exact.k)
    throw QuerySetMismatch("approx k=" + std::to_string(approx.k) +
                           " differs from exact k=" + std::to_string(exact.k));

  RecallReport report;
  report.per_query.resize(approx.queries(), -1.0);
  double sum = 0.0;
  for (std::size_t q = 0; q < approx.queries(); ++q) {
    const auto& ex = exact.neighbors[q];
    if (ex.empty()) continue;
    std::vector<std::uint32_t> a = approx.neighbors[q];
    std::vector<std::uint32_t> e = ex;
    std::sort(a.begin(), a.end());
    std::sort(e.begin(), e.end());
    std::vector<std::uint32_t> common;
    std::set_intersection(a.begin(), a.end(), e.begin(), e.end(),
                          std::back_inserter(common));
    const double r = static_cast<double>(common.size()) /
                     static_cast<double>(e.size());
    report.per_query[q] = r;
    sum += r;
    ++report.evaluated;
  }
  report.mean = report.evaluated == 0 ? 0.0 : sum / report.evaluated;
  return report;
}

void write_neighbor_map(const NeighborMap& map, const std::string& path,
                        const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << "# k=" << map.k << '\n';
  for (std::size_t q = 0; q < map.queries(); ++q) {
    out << q << ':';
    const auto& ns = map.neighbors[q];
    for (std::size_t i = 0; i < ns.size(); ++i)
      out << (i ? "," : " ") << ns[i];
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

NeighborMap read_neighbor_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  NeighborMap map;
  std::string line;
  std::size_t lineno = 0;
  bool saw_k = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto kpos = line.find("k=");
      if (kpos != std::string::npos) {
        map.k = static_cast<std::uint32_t>(
            std::strtoul(line.c_str() + kpos + 2, nullptr, 10));
        saw_k = true;
      }
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) + ": missing ':'");
    const auto q = std::strtoul(line.substr(0, colon).c_str(), nullptr, 10);
    if (q != map.neighbors.size())
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": query ids must be consecutive from 0");
    std::vector<std::uint32_t> ids;
    std::stringstream rest(line.substr(colon + 1));
    std::string tok;
    while (std::getline(rest, tok, ',')) {
      if (tok.find_first_not_of(" \t") == std::string::npos) continue;
      ids.push_back(
          static_cast<std::uint32_t>(std::strtoul(tok.c_str(), nullptr, 10)));
    }
    map.neighbors.push_back(std::move(ids));
  }
  if (!saw_k)
    for (const auto& ns : map.neighbors)
      map.k = std::max(map.k, static_cast<std::uint32_t>(ns.size()));
  return map;
}

}  // namespace percloud
