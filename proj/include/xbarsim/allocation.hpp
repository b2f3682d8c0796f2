#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "xbarsim/common.hpp"
#include "xbarsim/cooccur.hpp"
#include "xbarsim/grouping.hpp"
#include "xbarsim/hwmodel.hpp"

namespace xbarsim {

// Group replicas placed on physical crossbars. replicas[g] counts original +
// copies; group_to_crossbars[g] lists the distinct crossbars holding them.
struct PlacementPlan {
  GroupingPlan grouping;
  std::vector<std::uint32_t> replicas;
  std::vector<std::vector<std::uint32_t>> group_to_crossbars;
  std::uint32_t crossbar_capacity_rows = 0;

  std::uint32_t max_crossbar_index() const {
    std::uint32_t m = 0;
    for (const auto& lst : group_to_crossbars)
      for (std::uint32_t c : lst) m = std::max(m, c);
    return m;
  }
};

enum class LogBase { two, ten, natural };

inline double log_of(LogBase b) {
  switch (b) {
    case LogBase::two: return std::log(2.0);
    case LogBase::ten: return std::log(10.0);
    case LogBase::natural: return 1.0;
  }
  return std::log(2.0);
}

// Log-scaled extra-copy count:
//   floor( (log(group_freq) / log(freq_total)) * log(batch_size) )
// The frequency ratio is base-invariant; log(batch_size) uses the configured
// base (2 by default). group_freq <= 1 yields 0.
inline std::uint32_t compute_copies(std::uint64_t group_freq, std::uint64_t freq_total,
                                    std::uint64_t batch_size,
                                    LogBase base = LogBase::two) {
  if (batch_size < 2) throw ParamError("compute_copies: batch_size must be >= 2");
  if (freq_total < 2) throw ParamError("compute_copies: freq_total must be >= 2");
  if (group_freq > freq_total)
    throw ParamError("compute_copies: group_freq exceeds freq_total");
  if (group_freq <= 1) return 0;
  double ratio = std::log(double(group_freq)) / std::log(double(freq_total));
  double copies = ratio * (std::log(double(batch_size)) / log_of(base));
  if (copies < 0) return 0;
  return static_cast<std::uint32_t>(std::floor(copies));
}

// Comparison baseline: distribute total_extra copies proportionally to raw
// frequency (largest-remainder apportionment, ties by lower index).
inline std::vector<std::uint32_t> linear_proportional_copies(
    std::span<const std::uint64_t> group_freq, std::uint64_t total_extra) {
  double sum = 0;
  for (std::uint64_t f : group_freq) sum += double(f);
  std::vector<std::uint32_t> copies(group_freq.size(), 0);
  if (sum <= 0 || total_extra == 0) return copies;
  std::vector<std::pair<double, std::size_t>> rema(group_freq.size());
  std::uint64_t assigned = 0;
  for (std::size_t g = 0; g < group_freq.size(); ++g) {
    double exact = double(group_freq[g]) / sum * double(total_extra);
    copies[g] = static_cast<std::uint32_t>(std::floor(exact));
    assigned += copies[g];
    rema[g] = {exact - std::floor(exact), g};
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t k = 0; assigned < total_extra && k < rema.size(); ++k, ++assigned)
    ++copies[rema[k].second];
  return copies;
}

struct AllocConfig {
  LogBase log_base = LogBase::two;
  // apply the copy formula per embedding and replicate the group by its
  // hottest member, instead of the per-group default
  bool per_embedding = false;
};

inline std::vector<std::uint64_t> group_frequencies(const GroupingPlan& grouping,
                                                    const CoOccurrenceGraph& graph) {
  std::vector<std::uint64_t> gf(grouping.groups.size(), 0);
  for (std::size_t g = 0; g < grouping.groups.size(); ++g)
    for (ItemId id : grouping.groups[g]) gf[g] += graph.node_freq.at(id);
  return gf;
}

// Decides replica counts from the log-scaled copy formula, trims to the
// duplication budget (budget * base crossbar count extra slots, lowest
// frequency groups trimmed first), and packs replicas onto physical crossbars
// round-robin across tiles.
inline PlacementPlan allocate(const GroupingPlan& grouping, const CoOccurrenceGraph& graph,
                              const HardwareConfig& hw, std::uint64_t batch_size,
                              double duplication_budget, AllocConfig cfg = {}) {
  if (duplication_budget < 0) throw ParamError("allocate: negative duplication budget");
  hw.validate();
  if (grouping.group_size > hw.xbar_rows)
    throw ParamError("allocate: group_size exceeds crossbar rows");

  const std::size_t num_groups = grouping.groups.size();
  std::vector<std::uint64_t> gf = group_frequencies(grouping, graph);
  std::uint64_t freq_total = std::accumulate(gf.begin(), gf.end(), std::uint64_t{0});

  PlacementPlan plan;
  plan.grouping = grouping;
  plan.crossbar_capacity_rows = hw.xbar_rows;
  plan.replicas.assign(num_groups, 1);

  std::uint64_t budget_slots = static_cast<std::uint64_t>(
      std::floor(duplication_budget * double(num_groups)));

  std::vector<std::uint32_t> extra(num_groups, 0);
  if (budget_slots > 0) {
    for (std::size_t g = 0; g < num_groups; ++g) {
      if (cfg.per_embedding) {
        std::uint32_t best = 0;
        for (ItemId id : grouping.groups[g])
          best = std::max(best, compute_copies(graph.node_freq.at(id), freq_total,
                                               batch_size, cfg.log_base));
        extra[g] = best;
      } else {
        extra[g] = compute_copies(gf[g], freq_total, batch_size, cfg.log_base);
      }
    }
    std::uint64_t want = std::accumulate(extra.begin(), extra.end(), std::uint64_t{0});
    if (want > budget_slots) {
      // trim lowest-frequency duplicated groups first; ties drop the higher
      // group index so earlier (hotter-seeded) groups keep their copies
      std::vector<std::size_t> order(num_groups);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (gf[a] != gf[b]) return gf[a] < gf[b];
        return a > b;
      });
      for (std::size_t g : order) {
        if (want <= budget_slots) break;
        std::uint64_t drop = std::min<std::uint64_t>(extra[g], want - budget_slots);
        extra[g] -= static_cast<std::uint32_t>(drop);
        want -= drop;
      }
    }
  }
  for (std::size_t g = 0; g < num_groups; ++g) plan.replicas[g] = 1 + extra[g];

  std::uint64_t total_replicas =
      std::accumulate(plan.replicas.begin(), plan.replicas.end(), std::uint64_t{0});
  if (num_groups > hw.total_crossbars())
    throw CapacityError("allocate: " + std::to_string(num_groups) +
                        " groups exceed " + std::to_string(hw.total_crossbars()) +
                        " crossbars");
  if (total_replicas > hw.total_crossbars())
    throw CapacityError("allocate: replica total " + std::to_string(total_replicas) +
                        " exceeds crossbar count " +
                        std::to_string(hw.total_crossbars()));

  // round-robin across tiles: assignment k lands in tile k % num_tiles
  const std::uint32_t cpt = hw.crossbars_per_tile();
  plan.group_to_crossbars.assign(num_groups, {});
  std::uint64_t k = 0;
  for (std::size_t g = 0; g < num_groups; ++g) {
    plan.group_to_crossbars[g].reserve(plan.replicas[g]);
    for (std::uint32_t r = 0; r < plan.replicas[g]; ++r, ++k) {
      std::uint64_t tile = k % hw.num_tiles;
      std::uint64_t slot = k / hw.num_tiles;
      plan.group_to_crossbars[g].push_back(static_cast<std::uint32_t>(tile * cpt + slot));
    }
  }
  return plan;
}

// Least-loaded replica selection; ties go to the lowest crossbar index.
inline std::uint32_t route_query(const PlacementPlan& plan,
                                 std::span<const std::uint32_t> crossbar_loads,
                                 std::uint32_t group) {
  if (group >= plan.group_to_crossbars.size())
    throw ParamError("route_query: unknown group " + std::to_string(group));
  const auto& reps = plan.group_to_crossbars[group];
  if (reps.empty()) throw ValidationError("route_query: group has no replicas");
  std::uint32_t best = reps[0];
  for (std::uint32_t c : reps)
    if (crossbar_loads[c] < crossbar_loads[best] ||
        (crossbar_loads[c] == crossbar_loads[best] && c < best))
      best = c;
  return best;
}

struct PlacementStats {
  std::map<std::uint32_t, std::uint32_t> copy_histogram;  // replicas -> #groups
  double evenness = 0.0;  // normalized Shannon entropy over copy-count classes
};

inline PlacementStats placement_stats(const PlacementPlan& plan) {
  PlacementStats st;
  for (std::uint32_t r : plan.replicas) ++st.copy_histogram[r];
  if (st.copy_histogram.size() >= 2) {
    double n = double(plan.replicas.size());
    double h = 0;
    for (const auto& [r, cnt] : st.copy_histogram) {
      double p = double(cnt) / n;
      h -= p * std::log(p);
    }
    st.evenness = h / std::log(double(st.copy_histogram.size()));
  }
  return st;
}

}  // namespace xbarsim
