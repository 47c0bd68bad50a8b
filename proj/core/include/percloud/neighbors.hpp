#ifndef PERCLOUD_NEIGHBORS_HPP
#define PERCLOUD_NEIGHBORS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "percloud/hilbert.hpp"
#include "percloud/sampling.hpp"

namespace percloud {

// Jointly serialized global+local super-points under combined keys
// label_offset * label + h, label_offset = 2^(3 r_bits). Distinct labels
// occupy disjoint key ranges; within a label, key order is Hilbert order.
struct CombinedIndex {
  std::vector<std::uint64_t> keys;      // sorted ascending
  std::vector<std::uint32_t> point_id;  // id within its set, parallel to keys
  std::vector<std::uint8_t> is_local;   // parallel to keys
  std::vector<std::uint32_t> label;     // parallel to keys
  std::vector<std::uint32_t> global_pos;  // global id -> sorted position
  std::uint64_t label_offset = 0;
  std::uint32_t r_bits = 0;
  Bbox bbox;  // shared box over the union

  std::size_t size() const { return keys.size(); }
};

// Per-global-point neighbor lists; short lists are legal whenever a label
// holds fewer than k local points.
struct NeighborMap {
  std::vector<std::vector<std::uint32_t>> neighbors;  // local ids per query
  std::uint32_t k = 0;

  std::size_t queries() const { return neighbors.size(); }
};

// Throws LabelOverflow when 3*r_bits + bit_width(max label) exceeds 64; the
// message names the largest r_bits that would fit.
CombinedIndex build_combined_index(const SuperPoints& global,
                                   const SuperPoints& local,
                                   const std::vector<std::uint32_t>& global_labels,
                                   const std::vector<std::uint32_t>& local_labels,
                                   const HilbertConfig& cfg,
                                   unsigned threads = 1);

// Window search: from each global point's sorted position, scan outward
// within its label range collecting up to k local candidates per side, then
// keep the k nearest by squared distance (ties to the lower id). Work per
// query is O(k + skipped globals), independent of the union size.
NeighborMap approx_knn(const CombinedIndex& index, const SuperPoints& global,
                       const SuperPoints& local, std::uint32_t k,
                       unsigned threads = 1);

// Brute-force Euclidean oracle, optionally label-constrained.
NeighborMap exact_knn(const SuperPoints& global, const SuperPoints& local,
                      const std::vector<std::uint32_t>& global_labels,
                      const std::vector<std::uint32_t>& local_labels,
                      std::uint32_t k, bool constrained,
                      unsigned threads = 1);

struct RecallReport {
  std::vector<double> per_query;  // -1 marks queries with an empty exact set
  double mean = 0.0;              // over queries with non-empty exact sets
  std::size_t evaluated = 0;
};

RecallReport recall_at_k(const NeighborMap& approx, const NeighborMap& exact);

// Text lines "global_id: local_id,local_id,...". Empty lists keep the colon.
void write_neighbor_map(const NeighborMap& map, const std::string& path,
                        const std::string& provenance = "");
NeighborMap read_neighbor_map(const std::string& path);

}  // namespace percloud

#endif
