#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "xbarsim/allocation.hpp"
#include "xbarsim/cooccur.hpp"
#include "xbarsim/grouping.hpp"
#include "xbarsim/json_io.hpp"
#include "xbarsim/sim.hpp"
#include "xbarsim/trace.hpp"

namespace xbarsim {

struct PipelineError : std::runtime_error {
  explicit PipelineError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(std::string(name) + ": " + e.what());
  }
}

inline std::string format_pct(double pct) {
  std::ostringstream os;
  if (pct == static_cast<std::uint64_t>(pct))
    os << static_cast<std::uint64_t>(pct);
  else
    os << pct;
  return os.str();
}

}  // namespace detail

struct ExperimentConfig {
  // trace source: a file path, or the generator when the path is empty
  std::string trace_path;
  GeneratorParams generator{10000, 60000, 1.05, 40.0, 0, 0.7, 42};  // num_clusters 0 = items/64

  double train_fraction = 0.8;
  std::vector<GroupStrategy> strategies = {GroupStrategy::naive, GroupStrategy::frequency,
                                           GroupStrategy::correlation};
  std::uint32_t group_size = 64;
  std::vector<double> budgets_pct = {0, 5, 10, 20};
  std::uint64_t batch_size = 256;
  std::string hw_config_path;  // empty = built-in defaults
  HwEmConfig hwem;
  std::vector<ExecMode> modes = {ExecMode::recross, ExecMode::nmars,
                                 ExecMode::recross_no_switch};
  std::vector<std::uint32_t> fig7_group_sizes = {8, 16, 32, 64};
  std::size_t max_degree = 128;
  std::string output_dir;
  std::uint64_t seed = 42;
  LogBase log_base = LogBase::two;

  void validate() const {
    hwem.hw.validate();
    hwem.em.validate();
    if (group_size < 1 || group_size > hwem.hw.xbar_rows)
      throw ParamError("group_size must lie in [1, xbar_rows]");
    for (std::uint32_t gs : fig7_group_sizes)
      if (gs < 1 || gs > hwem.hw.xbar_rows)
        throw ParamError("fig7 group size must lie in [1, xbar_rows]");
    for (double b : budgets_pct)
      if (b < 0) throw ParamError("duplication budget must be >= 0");
    if (batch_size < 1) throw ParamError("batch_size must be >= 1");
    if (strategies.empty() && modes.empty()) throw ParamError("no runs configured");
  }
};

struct RunSpec {
  std::string name;
  GroupStrategy strategy;
  double budget_pct = 0;
  ExecMode mode = ExecMode::recross;
};

// Run matrix rule: every listed strategy runs at budget 0 in recross mode;
// every listed budget additionally runs the correlation strategy in recross
// mode; recross_no_switch adds a budget-0 correlation run; nmars adds its
// per-item baseline on the naive layout. Duplicates collapse.
inline std::vector<RunSpec> enumerate_runs(const ExperimentConfig& cfg) {
  std::vector<RunSpec> specs;
  auto listed = [&](ExecMode m) {
    return std::find(cfg.modes.begin(), cfg.modes.end(), m) != cfg.modes.end();
  };
  auto has_corr = std::find(cfg.strategies.begin(), cfg.strategies.end(),
                            GroupStrategy::correlation) != cfg.strategies.end();
  auto push = [&](GroupStrategy s, double b, ExecMode m) {
    std::string name;
    if (m == ExecMode::nmars) {
      name = "nmars";
    } else {
      name = std::string(to_string(s)) + "_b" + detail::format_pct(b);
      if (m == ExecMode::recross_no_switch) name += "_noswitch";
    }
    for (const RunSpec& r : specs)
      if (r.name == name) return;
    specs.push_back({name, s, b, m});
  };

  if (listed(ExecMode::recross)) {
    for (GroupStrategy s : cfg.strategies) push(s, 0, ExecMode::recross);
    if (has_corr)
      for (double b : cfg.budgets_pct) push(GroupStrategy::correlation, b, ExecMode::recross);
  }
  if (listed(ExecMode::recross_no_switch) && !cfg.strategies.empty()) {
    GroupStrategy s = has_corr ? GroupStrategy::correlation : cfg.strategies.front();
    push(s, 0, ExecMode::recross_no_switch);
  }
  if (listed(ExecMode::nmars)) push(GroupStrategy::naive, 0, ExecMode::nmars);
  return specs;
}

struct RunRecord {
  RunSpec spec;
  std::uint32_t group_size = 0;
  SimReport report;
  PlacementStats pstats;
  std::uint64_t total_replicas = 0;
};

struct ExperimentResult {
  std::uint32_t num_items = 0;
  std::size_t train_queries = 0;
  std::size_t test_queries = 0;
  TraceStats train_stats;
  std::vector<RunRecord> runs;       // main matrix
  std::vector<RunRecord> fig7_runs;  // correlation runs across group sizes
  std::string baseline;
  std::vector<RunComparison> comparison;
  std::uint64_t trace_hash = 0;
  std::uint64_t hw_config_hash = 0;
};

namespace detail {

inline std::uint64_t hash_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("not found or unreadable: " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string s = buf.str();
  return fnv1a64(s.data(), s.size());
}

inline std::uint64_t hash_string(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

inline void write_csv(const std::filesystem::path& p, const std::string& header,
                      const std::vector<std::string>& rows) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot open for writing: " + p.string());
  out << header << "\n";
  for (const std::string& r : rows) out << r << "\n";
  if (!out) throw IoError("write failed: " + p.string());
}

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace detail

inline json to_json(const ExperimentConfig& cfg) {
  json strategies = json::array();
  for (GroupStrategy s : cfg.strategies) strategies.push_back(to_string(s));
  json modes = json::array();
  for (ExecMode m : cfg.modes) modes.push_back(to_string(m));
  const char* lb = cfg.log_base == LogBase::two      ? "two"
                   : cfg.log_base == LogBase::ten    ? "ten"
                                                     : "natural";
  return json{
      {"trace_path", cfg.trace_path},
      {"generator",
       {{"num_items", cfg.generator.num_items},
        {"num_queries", cfg.generator.num_queries},
        {"zipf_s", cfg.generator.zipf_s},
        {"mean_len", cfg.generator.mean_len},
        {"num_clusters", cfg.generator.num_clusters},
        {"intra_prob", cfg.generator.intra_prob},
        {"seed", cfg.generator.seed}}},
      {"train_fraction", cfg.train_fraction},
      {"strategies", strategies},
      {"group_size", cfg.group_size},
      {"budgets_pct", cfg.budgets_pct},
      {"batch_size", cfg.batch_size},
      {"hw_config", cfg.hw_config_path},
      {"modes", modes},
      {"fig7_group_sizes", cfg.fig7_group_sizes},
      {"max_degree", cfg.max_degree},
      {"output_dir", cfg.output_dir},
      {"seed", cfg.seed},
      {"log_base", lb},
  };
}

inline ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  for (const auto& [key, val] : j.items()) {
    if (key == "trace_path") cfg.trace_path = val.get<std::string>();
    else if (key == "generator") {
      for (const auto& [gk, gv] : val.items()) {
        if (gk == "num_items") cfg.generator.num_items = gv.get<std::uint32_t>();
        else if (gk == "num_queries") cfg.generator.num_queries = gv.get<std::size_t>();
        else if (gk == "zipf_s") cfg.generator.zipf_s = gv.get<double>();
        else if (gk == "mean_len") cfg.generator.mean_len = gv.get<double>();
        else if (gk == "num_clusters") cfg.generator.num_clusters = gv.get<std::uint32_t>();
        else if (gk == "intra_prob") cfg.generator.intra_prob = gv.get<double>();
        else if (gk == "seed") cfg.generator.seed = gv.get<std::uint64_t>();
        else throw ParamError("experiment config: unknown generator key '" + gk + "'");
      }
    }
    else if (key == "train_fraction") cfg.train_fraction = val.get<double>();
    else if (key == "strategies") {
      cfg.strategies.clear();
      for (const auto& s : val) cfg.strategies.push_back(strategy_from_string(s.get<std::string>()));
    }
    else if (key == "group_size") cfg.group_size = val.get<std::uint32_t>();
    else if (key == "budgets_pct") cfg.budgets_pct = val.get<std::vector<double>>();
    else if (key == "batch_size") cfg.batch_size = val.get<std::uint64_t>();
    else if (key == "hw_config") cfg.hw_config_path = val.get<std::string>();
    else if (key == "modes") {
      cfg.modes.clear();
      for (const auto& s : val) cfg.modes.push_back(exec_mode_from_string(s.get<std::string>()));
    }
    else if (key == "fig7_group_sizes")
      cfg.fig7_group_sizes = val.get<std::vector<std::uint32_t>>();
    else if (key == "max_degree") cfg.max_degree = val.get<std::size_t>();
    else if (key == "output_dir") cfg.output_dir = val.get<std::string>();
    else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
    else if (key == "log_base") {
      std::string s = val.get<std::string>();
      if (s == "two") cfg.log_base = LogBase::two;
      else if (s == "ten") cfg.log_base = LogBase::ten;
      else if (s == "natural") cfg.log_base = LogBase::natural;
      else throw ParamError("experiment config: unknown log_base '" + s + "'");
    }
    else throw ParamError("experiment config: unknown key '" + key + "'");
  }
  if (!cfg.hw_config_path.empty()) cfg.hwem = load_hw_config(cfg.hw_config_path);
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("not found or unreadable: " + path.string());
  json j = json::parse(in);
  return experiment_config_from_json(j);
}

// One CSV per figure family; values come straight from the collected reports
// and placement stats.
inline void emit_figure_data(const ExperimentResult& res,
                             const std::filesystem::path& outdir) {
  namespace d = detail;
  std::filesystem::create_directories(outdir);

  // activation counts per strategy (budget-0 recross runs)
  {
    std::vector<std::string> rows;
    for (const RunRecord& r : res.runs)
      if (r.spec.mode == ExecMode::recross && r.spec.budget_pct == 0)
        rows.push_back(std::string(to_string(r.spec.strategy)) + "," +
                       std::to_string(r.report.total_activations));
    d::write_csv(outdir / "fig8_activations.csv", "strategy,total_activations", rows);
  }
  // overall speedup / energy-efficiency bars
  {
    std::vector<std::string> rows;
    for (const RunComparison& c : res.comparison)
      rows.push_back(c.name + "," + d::fmt_double(c.speedup) + "," +
                     d::fmt_double(c.energy_eff));
    d::write_csv(outdir / "fig10_overall.csv", "run,speedup,energy_eff", rows);
  }
  // duplication sweep (correlation strategy across budgets)
  {
    std::vector<std::string> rows;
    for (const RunComparison& c : res.comparison) {
      const RunRecord* rec = nullptr;
      for (const RunRecord& r : res.runs)
        if (r.spec.name == c.name) rec = &r;
      if (rec && rec->spec.mode == ExecMode::recross &&
          rec->spec.strategy == GroupStrategy::correlation)
        rows.push_back(d::format_pct(rec->spec.budget_pct) + "," +
                       d::fmt_double(c.speedup) + "," + d::fmt_double(c.energy_eff));
    }
    d::write_csv(outdir / "fig9_duplication.csv", "budget_pct,speedup,energy_eff", rows);
  }
  // copy-count histogram per budget
  {
    std::vector<std::string> rows;
    bool any_corr = false;
    for (const RunRecord& r : res.runs)
      if (r.spec.mode == ExecMode::recross &&
          r.spec.strategy == GroupStrategy::correlation)
        any_corr = true;
    for (const RunRecord& r : res.runs) {
      if (r.spec.mode != ExecMode::recross) continue;
      if (any_corr && r.spec.strategy != GroupStrategy::correlation) continue;
      for (const auto& [replicas, count] : r.pstats.copy_histogram)
        rows.push_back(d::format_pct(r.spec.budget_pct) + "," +
                       std::to_string(replicas) + "," + std::to_string(count));
    }
    d::write_csv(outdir / "fig4_copy_histogram.csv", "budget_pct,replicas,group_count",
                 rows);
  }
  // single-row activation fraction across group sizes
  {
    std::vector<std::string> rows;
    for (const RunRecord& r : res.fig7_runs) {
      double frac = r.report.total_activations == 0
                        ? 0.0
                        : double(r.report.single_row_activations) /
                              double(r.report.total_activations);
      rows.push_back(std::to_string(r.group_size) + "," + d::fmt_double(frac));
    }
    d::write_csv(outdir / "fig7_single_row.csv", "group_size,single_row_fraction", rows);
  }
  // full comparison table
  {
    std::vector<std::string> rows;
    for (const RunComparison& c : res.comparison) {
      const RunRecord* rec = nullptr;
      for (const RunRecord& r : res.runs)
        if (r.spec.name == c.name) rec = &r;
      rows.push_back(c.name + "," + std::to_string(rec->report.makespan_cycles) + "," +
                     d::fmt_double(rec->report.total_energy) + "," +
                     d::fmt_double(c.speedup) + "," + d::fmt_double(c.energy_eff));
    }
    d::write_csv(outdir / "comparison.csv",
                 "run,makespan_cycles,total_energy,speedup,energy_eff", rows);
  }
}

// Full pipeline: trace -> split -> co-occurrence graph -> grouping ->
// allocation -> simulation, once per enumerated run, plus the group-size
// sweep. Writes reports, comparison and figure CSVs when output_dir is set.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       std::ostream* log = nullptr) {
  namespace d = detail;
  cfg.validate();
  ExperimentResult res;

  Trace full = d::stage("trace", [&] {
    if (!cfg.trace_path.empty()) return parse_trace(cfg.trace_path);
    GeneratorParams gp = cfg.generator;
    if (gp.num_clusters == 0) gp.num_clusters = std::max<std::uint32_t>(1, gp.num_items / 64);
    gp.seed = cfg.seed;
    return generate_synthetic(gp);
  });
  res.trace_hash = d::stage("trace", [&] {
    if (!cfg.trace_path.empty()) return d::hash_file(cfg.trace_path);
    std::ostringstream os;
    write_trace(full, os);
    return d::hash_string(os.str());
  });
  res.hw_config_hash = cfg.hw_config_path.empty()
                           ? d::hash_string("builtin-defaults")
                           : d::hash_file(cfg.hw_config_path);

  auto [train, test] = d::stage("trace", [&] { return split_trace(full, cfg.train_fraction); });
  res.num_items = full.num_items;
  res.train_queries = train.queries.size();
  res.test_queries = test.queries.size();
  res.train_stats = d::stage("trace", [&] { return trace_stats(train); });

  CoOccurrenceGraph graph =
      d::stage("cooccur", [&] { return build_cooccurrence(train, cfg.max_degree); });

  std::map<std::pair<int, std::uint32_t>, GroupingPlan> groupings;
  auto grouping_for = [&](GroupStrategy s, std::uint32_t gs) -> const GroupingPlan& {
    auto key = std::make_pair(static_cast<int>(s), gs);
    auto it = groupings.find(key);
    if (it == groupings.end()) {
      GroupingPlan plan = d::stage("grouping", [&] {
        switch (s) {
          case GroupStrategy::correlation: return group_correlation_aware(graph, gs);
          case GroupStrategy::frequency: return group_frequency(graph, gs);
          case GroupStrategy::naive: return group_naive(graph.num_items, gs);
        }
        throw ParamError("unknown strategy");
      });
      it = groupings.emplace(key, std::move(plan)).first;
    }
    return it->second;
  };

  auto execute = [&](const RunSpec& spec, std::uint32_t gs) {
    const GroupingPlan& grouping = grouping_for(spec.strategy, gs);
    PlacementPlan plan = d::stage("allocation", [&] {
      return allocate(grouping, graph, cfg.hwem.hw, cfg.batch_size,
                      spec.budget_pct / 100.0, AllocConfig{cfg.log_base, false});
    });
    SimConfig sc{cfg.batch_size, spec.mode, cfg.hwem.hw, cfg.hwem.em};
    SimReport rep = d::stage("sim", [&] { return simulate_trace(test, plan, sc); });
    RunRecord rec;
    rec.spec = spec;
    rec.group_size = gs;
    rec.report = std::move(rep);
    rec.pstats = placement_stats(plan);
    for (std::uint32_t r : plan.replicas) rec.total_replicas += r;
    if (log)
      *log << "run " << spec.name << " (gs=" << gs
           << "): makespan=" << rec.report.makespan_cycles
           << " energy=" << rec.report.total_energy
           << " activations=" << rec.report.total_activations << "\n";
    return rec;
  };

  for (const RunSpec& spec : enumerate_runs(cfg)) res.runs.push_back(execute(spec, cfg.group_size));

  bool has_corr = std::find(cfg.strategies.begin(), cfg.strategies.end(),
                            GroupStrategy::correlation) != cfg.strategies.end();
  for (std::uint32_t gs : cfg.fig7_group_sizes) {
    RunSpec spec{"fig7_gs" + std::to_string(gs),
                 has_corr ? GroupStrategy::correlation : cfg.strategies.front(), 0,
                 ExecMode::recross};
    res.fig7_runs.push_back(execute(spec, gs));
  }

  res.baseline = "naive_b0";
  bool have_baseline = false;
  for (const RunRecord& r : res.runs)
    if (r.spec.name == res.baseline) have_baseline = true;
  if (!have_baseline && !res.runs.empty()) res.baseline = res.runs.front().spec.name;

  if (res.runs.size() == 1) {
    res.comparison = {{res.runs[0].spec.name, 1.0, 1.0}};
  } else if (res.runs.size() >= 2) {
    std::vector<std::pair<std::string, SimReport>> named;
    for (const RunRecord& r : res.runs) named.emplace_back(r.spec.name, r.report);
    res.comparison = d::stage("report", [&] { return compare_runs(named, res.baseline); });
  }

  if (!cfg.output_dir.empty()) {
    d::stage("report", [&] {
      std::filesystem::path out(cfg.output_dir);
      std::filesystem::create_directories(out / "runs");
      write_json_file(to_json(cfg), out / "config.json");
      {
        std::ofstream inputs(out / "inputs.txt");
        if (!inputs) throw IoError("cannot open for writing: " + (out / "inputs.txt").string());
        std::ostringstream t, h;
        t << std::hex << std::setw(16) << std::setfill('0') << res.trace_hash;
        h << std::hex << std::setw(16) << std::setfill('0') << res.hw_config_hash;
        inputs << "trace fnv1a64=" << t.str() << "\n";
        inputs << "hw_config fnv1a64=" << h.str() << "\n";
      }
      for (const RunRecord& r : res.runs)
        write_json_file(to_json(r.report), out / "runs" / (r.spec.name + ".report.json"));
      for (const RunRecord& r : res.fig7_runs)
        write_json_file(to_json(r.report), out / "runs" / (r.spec.name + ".report.json"));
      emit_figure_data(res, out);
      return 0;
    });
  }
  return res;
}

}  // namespace xbarsim
