#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "xbarsim/common.hpp"
#include "xbarsim/cooccur.hpp"
#include "xbarsim/trace.hpp"

namespace xbarsim {

enum class GroupStrategy { correlation, frequency, naive };

inline const char* to_string(GroupStrategy s) {
  switch (s) {
    case GroupStrategy::correlation: return "correlation";
    case GroupStrategy::frequency: return "frequency";
    case GroupStrategy::naive: return "naive";
  }
  return "?";
}

inline GroupStrategy strategy_from_string(const std::string& s) {
  if (s == "correlation") return GroupStrategy::correlation;
  if (s == "frequency") return GroupStrategy::frequency;
  if (s == "naive") return GroupStrategy::naive;
  throw ParamError("unknown grouping strategy: " + s);
}

// Partition of the item universe into crossbar-row-sized groups. Group member
// order records admission order for the correlation strategy.
struct GroupingPlan {
  std::vector<std::vector<ItemId>> groups;
  std::uint32_t group_size = 0;
  GroupStrategy strategy = GroupStrategy::naive;
  std::uint32_t num_items = 0;

  bool operator==(const GroupingPlan&) const = default;
};

// Connectivity target for candidate scoring: weight to the whole current
// group (default) or to the group's seed only (ablation variant).
enum class WeightScope { group, seed_only };

namespace detail {

inline std::vector<ItemId> items_by_freq(const CoOccurrenceGraph& g) {
  std::vector<ItemId> order(g.num_items);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
    if (g.node_freq[a] != g.node_freq[b]) return g.node_freq[a] > g.node_freq[b];
    return a < b;
  });
  return order;
}

}  // namespace detail

// Greedy co-occurrence grouping. Seeds iterate items by frequency (descending,
// ties by id); each seed opens a group and repeatedly admits the ungrouped
// candidate with the highest connectivity weight to the group, where the
// candidate set is the union of the members' ungrouped neighbors. Ties break
// by node frequency then by id. A group closes when it reaches group_size or
// runs out of candidates. Items with no ungrouped neighbor at their seed turn
// are set aside and packed afterwards in frequency-then-id order.
inline GroupingPlan group_correlation_aware(const CoOccurrenceGraph& g,
                                            std::uint32_t group_size,
                                            WeightScope scope = WeightScope::group) {
  if (group_size < 1) throw ParamError("group_size must be >= 1");

  GroupingPlan plan;
  plan.group_size = group_size;
  plan.strategy = GroupStrategy::correlation;
  plan.num_items = g.num_items;

  std::vector<char> grouped(g.num_items, 0);
  std::vector<ItemId> leftovers;
  std::unordered_map<ItemId, std::uint64_t> cand;  // candidate -> connectivity

  for (ItemId seed : detail::items_by_freq(g)) {
    if (grouped[seed]) continue;

    if (group_size == 1) {
      grouped[seed] = 1;
      plan.groups.push_back({seed});
      continue;
    }

    cand.clear();
    for (const auto& [nb, w] : g.adj[seed])
      if (!grouped[nb]) cand.emplace(nb, w);
    if (cand.empty()) {
      grouped[seed] = 1;
      leftovers.push_back(seed);
      continue;
    }

    std::vector<ItemId> group{seed};
    grouped[seed] = 1;
    while (group.size() < group_size && !cand.empty()) {
      ItemId best = 0;
      std::uint64_t best_w = 0;
      bool first = true;
      for (const auto& [c, w] : cand) {
        if (first || w > best_w ||
            (w == best_w && (g.node_freq[c] > g.node_freq[best] ||
                             (g.node_freq[c] == g.node_freq[best] && c < best)))) {
          best = c;
          best_w = w;
          first = false;
        }
      }
      cand.erase(best);
      group.push_back(best);
      grouped[best] = 1;
      for (const auto& [nb, w] : g.adj[best]) {
        if (grouped[nb]) continue;
        if (scope == WeightScope::group) {
          cand[nb] += w;
        } else {
          // seed-only scoring: weight is the edge to the seed (0 if none)
          if (!cand.count(nb)) {
            std::uint64_t sw = 0;
            for (const auto& [sn, swt] : g.adj[seed])
              if (sn == nb) {
                sw = swt;
                break;
              }
            cand.emplace(nb, sw);
          }
        }
      }
    }
    plan.groups.push_back(std::move(group));
  }

  // leftovers are already frequency-then-id ordered (seed iteration order)
  for (std::size_t i = 0; i < leftovers.size(); i += group_size) {
    std::size_t end = std::min(i + group_size, leftovers.size());
    plan.groups.emplace_back(leftovers.begin() + i, leftovers.begin() + end);
  }
  return plan;
}

// Baseline: sort by access frequency (descending, ties by id) and chunk.
inline GroupingPlan group_frequency(const CoOccurrenceGraph& g, std::uint32_t group_size) {
  if (group_size < 1) throw ParamError("group_size must be >= 1");
  GroupingPlan plan;
  plan.group_size = group_size;
  plan.strategy = GroupStrategy::frequency;
  plan.num_items = g.num_items;
  std::vector<ItemId> order = detail::items_by_freq(g);
  for (std::size_t i = 0; i < order.size(); i += group_size) {
    std::size_t end = std::min(i + group_size, order.size());
    plan.groups.emplace_back(order.begin() + i, order.begin() + end);
  }
  return plan;
}

// Baseline: consecutive id ranges.
inline GroupingPlan group_naive(std::uint32_t num_items, std::uint32_t group_size) {
  if (group_size < 1) throw ParamError("group_size must be >= 1");
  GroupingPlan plan;
  plan.group_size = group_size;
  plan.strategy = GroupStrategy::naive;
  plan.num_items = num_items;
  for (std::uint32_t start = 0; start < num_items; start += group_size) {
    std::uint32_t end = std::min(start + group_size, num_items);
    std::vector<ItemId> grp(end - start);
    std::iota(grp.begin(), grp.end(), start);
    plan.groups.push_back(std::move(grp));
  }
  return plan;
}

struct GroupingValidation {
  bool ok = true;
  std::string violation;  // "size", "duplicate", "range", "missing", "group_size"
  std::string detail;
};

inline GroupingValidation validate_grouping(const GroupingPlan& plan,
                                            std::uint32_t num_items) {
  std::vector<char> seen(num_items, 0);
  for (std::size_t gi = 0; gi < plan.groups.size(); ++gi) {
    const auto& grp = plan.groups[gi];
    if (grp.empty() || grp.size() > plan.group_size)
      return {false, "size",
              "group " + std::to_string(gi) + " has size " + std::to_string(grp.size())};
    for (ItemId id : grp) {
      if (id >= num_items)
        return {false, "range", "id " + std::to_string(id) + " out of range"};
      if (seen[id])
        return {false, "duplicate", "id " + std::to_string(id) + " in multiple groups"};
      seen[id] = 1;
    }
  }
  for (ItemId id = 0; id < num_items; ++id)
    if (!seen[id]) return {false, "missing", "id " + std::to_string(id) + " unassigned"};
  return {};
}

inline std::vector<std::uint32_t> item_to_group(const GroupingPlan& plan) {
  std::vector<std::uint32_t> map(plan.num_items, 0);
  for (std::size_t gi = 0; gi < plan.groups.size(); ++gi)
    for (ItemId id : plan.groups[gi]) map[id] = static_cast<std::uint32_t>(gi);
  return map;
}

// Mean number of distinct groups a query touches; the quantity the
// correlation strategy tries to minimize.
inline double mean_groups_touched(const GroupingPlan& plan, const Trace& trace) {
  if (trace.queries.empty()) throw ParamError("mean_groups_touched: empty trace");
  std::vector<std::uint32_t> map = item_to_group(plan);
  std::uint64_t total = 0;
  std::vector<std::uint32_t> touched;
  for (const Query& q : trace.queries) {
    touched.clear();
    for (ItemId id : q.items) touched.push_back(map.at(id));
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    total += touched.size();
  }
  return static_cast<double>(total) / static_cast<double>(trace.queries.size());
}

// Text dump: one group per line, member ids space-separated, line order =
// group order.
inline void dump_grouping(const GroupingPlan& plan, std::ostream& out) {
  for (const auto& grp : plan.groups) {
    for (std::size_t i = 0; i < grp.size(); ++i) {
      if (i) out << ' ';
      out << grp[i];
    }
    out << "\n";
  }
}

}  // namespace xbarsim
