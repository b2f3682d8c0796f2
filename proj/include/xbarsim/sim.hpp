#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xbarsim/allocation.hpp"
#include "xbarsim/common.hpp"
#include "xbarsim/hwmodel.hpp"
#include "xbarsim/trace.hpp"

namespace xbarsim {

// recross: grouped placement, replica routing, popcount-driven read/MAC
// switch. nmars: per-item single-row lookups on the primary placement with
// sequential external aggregation. recross_no_switch: recross with the mode
// switch pinned to MAC.
enum class ExecMode { recross, nmars, recross_no_switch };

inline const char* to_string(ExecMode m) {
  switch (m) {
    case ExecMode::recross: return "recross";
    case ExecMode::nmars: return "nmars";
    case ExecMode::recross_no_switch: return "recross_no_switch";
  }
  return "?";
}

inline ExecMode exec_mode_from_string(const std::string& s) {
  if (s == "recross") return ExecMode::recross;
  if (s == "nmars") return ExecMode::nmars;
  if (s == "recross_no_switch") return ExecMode::recross_no_switch;
  throw ParamError("unknown exec mode: " + s);
}

struct SimConfig {
  std::uint64_t batch_size = 256;
  ExecMode exec_mode = ExecMode::recross;
  HardwareConfig hw;
  EnergyModel em;
};

struct EnergyBreakdown {
  double xbar = 0;
  double adc = 0;
  double popcount = 0;
  double bus = 0;

  double total() const { return xbar + adc + popcount + bus; }
};

struct SimReport {
  std::uint64_t total_activations = 0;
  std::uint64_t single_row_activations = 0;  // activations driving one row
  std::uint64_t mac_activations = 0;         // activations driving >= 2 rows
  std::uint64_t makespan_cycles = 0;
  double total_energy = 0;
  EnergyBreakdown energy_breakdown;
  std::vector<std::uint64_t> per_batch_makespans;
  std::uint64_t queries_processed = 0;
};

struct BatchResult {
  std::vector<std::uint64_t> completion_cycles;  // per query, batch-relative
  std::uint64_t makespan = 0;
  std::uint64_t total_activations = 0;
  std::uint64_t single_row_activations = 0;
  std::uint64_t mac_activations = 0;
  EnergyBreakdown energy;
};

namespace detail {

inline SwitchPolicy policy_for(ExecMode m) {
  switch (m) {
    case ExecMode::recross: return SwitchPolicy::dynamic_switch;
    case ExecMode::nmars: return SwitchPolicy::force_read;
    case ExecMode::recross_no_switch: return SwitchPolicy::force_mac;
  }
  return SwitchPolicy::dynamic_switch;
}

// All activations of a batch are dispatched in query order at batch start;
// each crossbar then serves its FIFO back to back, so the finish time of an
// enqueued activation is just the crossbar's accumulated busy time.
inline BatchResult simulate_batch_impl(std::span<const Query> queries,
                                       const PlacementPlan& plan, const SimConfig& cfg,
                                       const std::vector<std::uint32_t>& item_group) {
  BatchResult res;
  res.completion_cycles.reserve(queries.size());

  const std::uint32_t num_xbars = plan.max_crossbar_index() + 1;
  std::vector<std::uint32_t> pending(num_xbars, 0);   // routing loads
  std::vector<std::uint64_t> busy_until(num_xbars, 0);
  const SwitchPolicy policy = policy_for(cfg.exec_mode);
  const bool per_item = cfg.exec_mode == ExecMode::nmars;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> touched;  // (group, rows)
  for (const Query& q : queries) {
    touched.clear();
    for (ItemId id : q.items) {
      if (id >= item_group.size())
        throw ValidationError("simulate: item " + std::to_string(id) +
                              " not covered by placement plan");
      std::uint32_t g = item_group[id];
      if (per_item) {
        touched.emplace_back(g, 1);  // one single-row lookup per item
      } else if (!touched.empty() && touched.back().first == g) {
        ++touched.back().second;  // items are sorted, but groups may interleave
      } else {
        auto it = std::find_if(touched.begin(), touched.end(),
                               [g](const auto& t) { return t.first == g; });
        if (it == touched.end())
          touched.emplace_back(g, 1);
        else
          ++it->second;
      }
    }
    if (!per_item)
      std::sort(touched.begin(), touched.end());  // dispatch in group order

    std::uint64_t lookup_done = 0;
    for (const auto& [g, rows] : touched) {
      std::uint32_t xbar;
      if (per_item) {
        xbar = plan.group_to_crossbars[g].at(0);  // replication ignored
      } else {
        xbar = route_query(plan, pending, g);
      }
      ActivationCost c = activation_cost(rows, cfg.hw, cfg.em, policy);
      ++pending[xbar];
      busy_until[xbar] += c.cycles;
      lookup_done = std::max(lookup_done, busy_until[xbar]);

      ++res.total_activations;
      if (rows == 1)
        ++res.single_row_activations;
      else
        ++res.mac_activations;
      res.energy.xbar += c.xbar_energy;
      res.energy.adc += c.adc_energy;
      res.energy.popcount += c.popcount_energy;
    }
    AggregateCost agg = aggregate_cost(touched.size(), cfg.hw, cfg.em);
    res.energy.bus += agg.bus_energy;
    std::uint64_t done = lookup_done + agg.cycles;
    res.completion_cycles.push_back(done);
    res.makespan = std::max(res.makespan, done);
  }
  return res;
}

}  // namespace detail

inline BatchResult simulate_batch(std::span<const Query> queries,
                                  const PlacementPlan& plan, const SimConfig& cfg) {
  cfg.hw.validate();
  cfg.em.validate();
  if (cfg.batch_size < 1) throw ParamError("simulate: batch_size must be >= 1");
  return detail::simulate_batch_impl(queries, plan, cfg, item_to_group(plan.grouping));
}

// Consecutive batches of batch_size queries (last may be short); crossbar
// queues reset at batch boundaries.
inline SimReport simulate_trace(const Trace& test, const PlacementPlan& plan,
                                const SimConfig& cfg) {
  cfg.hw.validate();
  cfg.em.validate();
  if (cfg.batch_size < 1) throw ParamError("simulate: batch_size must be >= 1");
  if (test.queries.empty()) throw ParamError("simulate: empty trace");
  if (test.num_items > plan.grouping.num_items)
    throw ValidationError("simulate: trace universe exceeds plan coverage");

  const std::vector<std::uint32_t> item_group = item_to_group(plan.grouping);
  SimReport rep;
  for (std::size_t start = 0; start < test.queries.size(); start += cfg.batch_size) {
    std::size_t end = std::min(start + cfg.batch_size, test.queries.size());
    std::span<const Query> batch(test.queries.data() + start, end - start);
    BatchResult b = detail::simulate_batch_impl(batch, plan, cfg, item_group);
    rep.total_activations += b.total_activations;
    rep.single_row_activations += b.single_row_activations;
    rep.mac_activations += b.mac_activations;
    rep.makespan_cycles += b.makespan;
    rep.per_batch_makespans.push_back(b.makespan);
    rep.energy_breakdown.xbar += b.energy.xbar;
    rep.energy_breakdown.adc += b.energy.adc;
    rep.energy_breakdown.popcount += b.energy.popcount;
    rep.energy_breakdown.bus += b.energy.bus;
    rep.queries_processed += end - start;
  }
  rep.total_energy = rep.energy_breakdown.total();
  return rep;
}

struct RunComparison {
  std::string name;
  double speedup = 0;     // baseline makespan / run makespan
  double energy_eff = 0;  // baseline energy / run energy
};

inline std::vector<RunComparison> compare_runs(
    const std::vector<std::pair<std::string, SimReport>>& reports,
    const std::string& baseline_name) {
  if (reports.size() < 2) throw ParamError("compare_runs: need at least 2 reports");
  const SimReport* base = nullptr;
  for (const auto& [name, rep] : reports)
    if (name == baseline_name) base = &rep;
  if (!base) throw ParamError("compare_runs: baseline '" + baseline_name + "' not found");
  if (base->makespan_cycles == 0 || base->total_energy <= 0)
    throw ParamError("compare_runs: degenerate baseline (zero makespan or energy)");

  std::vector<RunComparison> table;
  table.reserve(reports.size());
  for (const auto& [name, rep] : reports) {
    if (rep.makespan_cycles == 0 || rep.total_energy <= 0)
      throw ParamError("compare_runs: degenerate run '" + name + "'");
    table.push_back({name,
                     double(base->makespan_cycles) / double(rep.makespan_cycles),
                     base->total_energy / rep.total_energy});
  }
  return table;
}

}  // namespace xbarsim
