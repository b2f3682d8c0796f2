#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include "xbarsim/common.hpp"
#include "xbarsim/trace.hpp"

namespace xbarsim {

// Weighted undirected co-access graph over embedding IDs. Edge weight counts
// the queries in which both endpoints appear; node_freq counts the queries
// containing the node. No self-edges, no zero-weight edges.
struct CoOccurrenceGraph {
  std::uint32_t num_items = 0;
  std::vector<std::uint64_t> node_freq;
  // adjacency per node, sorted by weight descending then neighbor id ascending
  std::vector<std::vector<std::pair<ItemId, std::uint64_t>>> adj;
};

inline constexpr std::size_t kUnlimitedDegree = 0;

inline const std::vector<std::pair<ItemId, std::uint64_t>>& neighbors(
    const CoOccurrenceGraph& g, ItemId id) {
  if (id >= g.num_items)
    throw ParamError("neighbors: id " + std::to_string(id) + " out of range");
  return g.adj[id];
}

namespace detail {

inline bool heavier(const std::pair<ItemId, std::uint64_t>& a,
                    const std::pair<ItemId, std::uint64_t>& b) {
  if (a.second != b.second) return a.second > b.second;
  return a.first < b.first;
}

// Sorted run-length accumulator for pair events. Events are packed as
// (a << 32 | b) with a < b; chunks are sorted and merged into a compact
// (key, count) array so memory stays proportional to the number of distinct
// pairs, not the number of events.
class PairAccumulator {
 public:
  void add(ItemId a, ItemId b) {
    chunk_.push_back((static_cast<std::uint64_t>(a) << 32) | b);
    if (chunk_.size() >= kChunkSize) flush();
  }

  std::vector<std::pair<std::uint64_t, std::uint64_t>> take() {
    flush();
    return std::move(merged_);
  }

 private:
  static constexpr std::size_t kChunkSize = 1u << 22;

  void flush() {
    if (chunk_.empty()) return;
    std::sort(chunk_.begin(), chunk_.end());
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    out.reserve(merged_.size() + chunk_.size() / 4);
    std::size_t i = 0, j = 0;
    while (i < merged_.size() || j < chunk_.size()) {
      if (j == chunk_.size() ||
          (i < merged_.size() && merged_[i].first < chunk_[j])) {
        out.push_back(merged_[i++]);
        continue;
      }
      std::uint64_t key = chunk_[j];
      std::uint64_t count = 0;
      while (j < chunk_.size() && chunk_[j] == key) {
        ++count;
        ++j;
      }
      if (i < merged_.size() && merged_[i].first == key) {
        count += merged_[i].second;
        ++i;
      }
      out.emplace_back(key, count);
    }
    merged_ = std::move(out);
    chunk_.clear();
  }

  std::vector<std::uint64_t> chunk_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> merged_;
};

}  // namespace detail

// Builds the co-occurrence graph from a training trace: every unordered item
// pair within a query adds one to its edge weight. With max_degree > 0 each
// node keeps only its max_degree heaviest edges, then the edge set is
// re-symmetrized by union (an edge survives if either endpoint kept it).
inline CoOccurrenceGraph build_cooccurrence(const Trace& train,
                                            std::size_t max_degree = 128) {
  if (train.queries.empty()) throw ParamError("build_cooccurrence: empty trace");

  CoOccurrenceGraph g;
  g.num_items = train.num_items;
  g.node_freq.assign(train.num_items, 0);

  detail::PairAccumulator acc;
  for (const Query& q : train.queries) {
    for (std::size_t i = 0; i < q.items.size(); ++i) {
      ++g.node_freq[q.items[i]];
      for (std::size_t j = i + 1; j < q.items.size(); ++j)
        acc.add(q.items[i], q.items[j]);  // items are sorted, so a < b
    }
  }
  auto pairs = acc.take();

  g.adj.assign(train.num_items, {});
  for (const auto& [key, w] : pairs) {
    ItemId a = static_cast<ItemId>(key >> 32);
    ItemId b = static_cast<ItemId>(key & 0xffffffffu);
    g.adj[a].emplace_back(b, w);
    g.adj[b].emplace_back(a, w);
  }
  for (auto& lst : g.adj) std::sort(lst.begin(), lst.end(), detail::heavier);

  if (max_degree != kUnlimitedDegree) {
    // mark survivors per node, then keep the union
    std::vector<std::vector<ItemId>> kept(train.num_items);
    for (ItemId v = 0; v < train.num_items; ++v) {
      std::size_t n = std::min(max_degree, g.adj[v].size());
      kept[v].reserve(n);
      for (std::size_t k = 0; k < n; ++k) kept[v].push_back(g.adj[v][k].first);
      std::sort(kept[v].begin(), kept[v].end());
    }
    auto kept_by = [&](ItemId v, ItemId u) {
      return std::binary_search(kept[v].begin(), kept[v].end(), u);
    };
    for (ItemId v = 0; v < train.num_items; ++v) {
      auto& lst = g.adj[v];
      lst.erase(std::remove_if(lst.begin(), lst.end(),
                               [&](const auto& e) {
                                 return !kept_by(v, e.first) && !kept_by(e.first, v);
                               }),
                lst.end());
    }
  }
  return g;
}

// Text dump "a b weight", one line per undirected edge with a < b, sorted by
// (a, b). Consumed by test oracles.
inline void dump_graph(const CoOccurrenceGraph& g, std::ostream& out) {
  for (ItemId a = 0; a < g.num_items; ++a) {
    std::vector<std::pair<ItemId, std::uint64_t>> fwd;
    for (const auto& [b, w] : g.adj[a])
      if (b > a) fwd.emplace_back(b, w);
    std::sort(fwd.begin(), fwd.end());
    for (const auto& [b, w] : fwd) out << a << ' ' << b << ' ' << w << "\n";
  }
}

}  // namespace xbarsim
