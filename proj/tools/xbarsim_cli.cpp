// Command-line front end: gen / analyze / plan / sim / exp.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "xbarsim/experiment.hpp"

namespace {

using xbarsim::json;

// Config file for the single-run subcommands: one flat JSON object, or
// key=value lines with '#' comments. Returned as a JSON object either way.
json read_flat_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw xbarsim::IoError("config: not found or unreadable: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw xbarsim::ParseError("config: " + std::string(e.what()));
    }
    if (!j.is_object()) throw xbarsim::ParseError("config: expected a JSON object");
    return j;
  }

  json j = json::object();
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    std::string::size_type h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    std::string::size_type eq = line.find('=');
    if (eq == std::string::npos) {
      std::istringstream check(line);
      std::string stray;
      if (check >> stray)
        throw xbarsim::ParseError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
      continue;
    }
    std::istringstream ks(line.substr(0, eq)), vs(line.substr(eq + 1));
    std::string key, val, extra;
    if (!(ks >> key) || (ks >> extra))
      throw xbarsim::ParseError("config line " + std::to_string(line_no) + ": bad key");
    if (!(vs >> val) || (vs >> extra))
      throw xbarsim::ParseError("config line " + std::to_string(line_no) +
                                ": bad value");
    try {
      j[key] = json::parse(val);  // number, boolean, or quoted string
    } catch (const json::parse_error&) {
      j[key] = val;  // bare word
    }
  }
  return j;
}

// Applies file values to option targets. A value is skipped when the matching
// flag was given on the command line; keys no take() consumed are errors.
class FlatConfig {
 public:
  FlatConfig(const std::string& path, const CLI::App* sub)
      : doc_(read_flat_config(path)), sub_(sub) {}

  template <typename T>
  void take(const char* key, const char* flag, T& dst) {
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    seen_.insert(key);
    if (sub_->count(flag) > 0) return;  // command line wins
    dst = coerce<T>(*it, key);
  }

  void finish() const {
    for (const auto& [key, val] : doc_.items())
      if (!seen_.count(key))
        throw xbarsim::ParamError("config: unknown key '" + key + "'");
  }

 private:
  template <typename T>
  static T coerce(const json& v, const std::string& key) {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string())
        throw xbarsim::ParamError("config: key '" + key + "' must be a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean())
        throw xbarsim::ParamError("config: key '" + key + "' must be a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number())
        throw xbarsim::ParamError("config: key '" + key + "' must be numeric");
      return v.get<T>();
    } else {
      if (!v.is_number_integer() || v.template get<long long>() < 0)
        throw xbarsim::ParamError("config: key '" + key +
                                  "' must be a non-negative integer");
      return v.get<T>();
    }
  }

  json doc_;
  const CLI::App* sub_;
  std::set<std::string> seen_;
};

xbarsim::LogBase log_base_from_string(const std::string& s) {
  if (s == "two" || s == "2") return xbarsim::LogBase::two;
  if (s == "ten" || s == "10") return xbarsim::LogBase::ten;
  if (s == "natural" || s == "e") return xbarsim::LogBase::natural;
  throw xbarsim::ParamError("unknown log base '" + s + "' (two|ten|natural)");
}

struct GenOpts {
  std::string config;
  std::string out;
  std::uint32_t items = 10000;
  std::size_t queries = 60000;
  double zipf_s = 1.05;
  double mean_len = 40.0;
  std::uint32_t clusters = 0;  // 0 = items/64
  double intra_prob = 0.7;
  std::uint64_t seed = 42;
};

void apply_gen_config(const CLI::App* sub, GenOpts& o) {
  if (o.config.empty()) return;
  FlatConfig fc(o.config, sub);
  fc.take("out", "--out", o.out);
  fc.take("items", "--items", o.items);
  fc.take("queries", "--queries", o.queries);
  fc.take("zipf_s", "--zipf-s", o.zipf_s);
  fc.take("mean_len", "--mean-len", o.mean_len);
  fc.take("clusters", "--clusters", o.clusters);
  fc.take("intra_prob", "--intra-prob", o.intra_prob);
  fc.take("seed", "--seed", o.seed);
  fc.finish();
}

void run_gen(const GenOpts& o) {
  if (o.out.empty())
    throw xbarsim::ParamError("gen: --out is required (flag or config key 'out')");
  xbarsim::GeneratorParams p;
  p.num_items = o.items;
  p.num_queries = o.queries;
  p.zipf_s = o.zipf_s;
  p.mean_len = o.mean_len;
  p.num_clusters = o.clusters ? o.clusters : std::max<std::uint32_t>(1, o.items / 64);
  p.intra_prob = o.intra_prob;
  p.seed = o.seed;
  xbarsim::Trace t = xbarsim::generate_synthetic(p);
  xbarsim::write_trace(t, o.out);
  xbarsim::TraceStats st = xbarsim::trace_stats(t);
  std::cout << "wrote " << o.out << ": items=" << t.num_items
            << " queries=" << t.queries.size() << " clusters=" << p.num_clusters
            << " query_len_mean=" << st.query_len_mean << "\n";
}

struct PipelineOpts {
  std::string config;
  std::string trace;
  double train_frac = 0.8;
  std::size_t max_degree = 128;
  std::string strategy = "correlation";
  std::uint32_t group_size = 64;
  std::uint64_t batch_size = 256;
  double budget_pct = 0.0;
  std::string hw_config;
  std::string log_base = "two";
  bool per_embedding = false;
  std::string mode = "recross";
  std::string graph_out, stats_out, groups_out, placement_out, report_out;
};

enum class PipelineKind { analyze, plan, sim };

void apply_pipeline_config(const CLI::App* sub, PipelineOpts& o, PipelineKind kind) {
  if (o.config.empty()) return;
  FlatConfig fc(o.config, sub);
  fc.take("trace", "--trace", o.trace);
  fc.take("max_degree", "--max-degree", o.max_degree);
  if (kind != PipelineKind::analyze) {
    fc.take("train_frac", "--train-frac", o.train_frac);
    fc.take("strategy", "--strategy", o.strategy);
    fc.take("group_size", "--group-size", o.group_size);
    fc.take("batch_size", "--batch-size", o.batch_size);
    fc.take("budget_pct", "--budget-pct", o.budget_pct);
    fc.take("hw_config", "--hw-config", o.hw_config);
    fc.take("log_base", "--log-base", o.log_base);
    fc.take("per_embedding", "--per-embedding", o.per_embedding);
  }
  switch (kind) {
    case PipelineKind::analyze:
      fc.take("stats_out", "--stats-out", o.stats_out);
      fc.take("graph_out", "--graph-out", o.graph_out);
      break;
    case PipelineKind::plan:
      fc.take("groups_out", "--groups-out", o.groups_out);
      fc.take("placement_out", "--placement-out", o.placement_out);
      break;
    case PipelineKind::sim:
      fc.take("mode", "--mode", o.mode);
      fc.take("report_out", "--report-out", o.report_out);
      break;
  }
  fc.finish();
}

void require_trace(const PipelineOpts& o) {
  if (o.trace.empty())
    throw xbarsim::ParamError(
        "trace: no input given (--trace flag or config key 'trace')");
}

void run_analyze(const PipelineOpts& o) {
  namespace d = xbarsim::detail;
  require_trace(o);
  xbarsim::Trace t = d::stage("trace", [&] { return xbarsim::parse_trace(o.trace); });
  xbarsim::TraceStats st = d::stage("trace", [&] { return xbarsim::trace_stats(t); });
  xbarsim::CoOccurrenceGraph g =
      d::stage("cooccur", [&] { return xbarsim::build_cooccurrence(t, o.max_degree); });

  std::size_t edges = 0;
  for (const auto& adj : g.adj) edges += adj.size();
  edges /= 2;
  std::uint64_t total = 0;
  for (std::uint64_t f : st.freq) total += f;

  std::cout << "items=" << t.num_items << " queries=" << t.queries.size()
            << " accesses=" << total << " query_len_mean=" << st.query_len_mean
            << " edges=" << edges << "\n";
  if (st.freq_tail_exponent)
    std::cout << "freq_tail_exponent=" << *st.freq_tail_exponent << "\n";
  else
    std::cout << "freq_tail_exponent=n/a (fewer than 100 distinct items observed)\n";

  if (!o.stats_out.empty())
    d::stage("report", [&] {
      xbarsim::write_json_file(xbarsim::to_json(st, t.num_items), o.stats_out);
      return 0;
    });
  if (!o.graph_out.empty())
    d::stage("report", [&] {
      std::ofstream out(o.graph_out);
      if (!out) throw xbarsim::IoError("cannot open for writing: " + o.graph_out);
      xbarsim::dump_graph(g, out);
      return 0;
    });
}

struct PlannedPipeline {
  xbarsim::Trace train, test;
  xbarsim::CoOccurrenceGraph graph;
  xbarsim::GroupingPlan grouping;
  xbarsim::PlacementPlan placement;
  xbarsim::HwEmConfig hwem;
};

PlannedPipeline build_pipeline(const PipelineOpts& o) {
  namespace d = xbarsim::detail;
  require_trace(o);
  PlannedPipeline p;
  if (!o.hw_config.empty())
    p.hwem = d::stage("allocation", [&] { return xbarsim::load_hw_config(o.hw_config); });

  xbarsim::Trace full = d::stage("trace", [&] { return xbarsim::parse_trace(o.trace); });
  std::tie(p.train, p.test) =
      d::stage("trace", [&] { return xbarsim::split_trace(full, o.train_frac); });
  p.graph =
      d::stage("cooccur", [&] { return xbarsim::build_cooccurrence(p.train, o.max_degree); });

  xbarsim::GroupStrategy strat = xbarsim::strategy_from_string(o.strategy);
  p.grouping = d::stage("grouping", [&] {
    switch (strat) {
      case xbarsim::GroupStrategy::correlation:
        return xbarsim::group_correlation_aware(p.graph, o.group_size);
      case xbarsim::GroupStrategy::frequency:
        return xbarsim::group_frequency(p.graph, o.group_size);
      case xbarsim::GroupStrategy::naive:
        return xbarsim::group_naive(p.graph.num_items, o.group_size);
    }
    throw xbarsim::ParamError("unknown strategy");
  });

  xbarsim::AllocConfig ac{log_base_from_string(o.log_base), o.per_embedding};
  p.placement = d::stage("allocation", [&] {
    return xbarsim::allocate(p.grouping, p.graph, p.hwem.hw, o.batch_size,
                             o.budget_pct / 100.0, ac);
  });
  return p;
}

void print_placement_summary(const PlannedPipeline& p) {
  xbarsim::PlacementStats ps = xbarsim::placement_stats(p.placement);
  std::uint64_t total_replicas = 0;
  for (std::uint32_t r : p.placement.replicas) total_replicas += r;
  std::cout << "groups=" << p.grouping.groups.size() << " replicas=" << total_replicas
            << " evenness=" << ps.evenness << "\n";
  std::cout << "copy_histogram:";
  for (const auto& [copies, count] : ps.copy_histogram)
    std::cout << " " << copies << "x=" << count;
  std::cout << "\n";
}

void run_plan(const PipelineOpts& o) {
  namespace d = xbarsim::detail;
  PlannedPipeline p = build_pipeline(o);
  print_placement_summary(p);
  if (!o.groups_out.empty())
    d::stage("report", [&] {
      std::ofstream out(o.groups_out);
      if (!out) throw xbarsim::IoError("cannot open for writing: " + o.groups_out);
      xbarsim::dump_grouping(p.grouping, out);
      return 0;
    });
  if (!o.placement_out.empty())
    d::stage("report", [&] {
      xbarsim::write_json_file(xbarsim::to_json(p.placement), o.placement_out);
      return 0;
    });
}

void run_sim(const PipelineOpts& o) {
  namespace d = xbarsim::detail;
  PlannedPipeline p = build_pipeline(o);
  xbarsim::SimConfig sc{o.batch_size, xbarsim::exec_mode_from_string(o.mode), p.hwem.hw,
                        p.hwem.em};
  xbarsim::SimReport rep =
      d::stage("sim", [&] { return xbarsim::simulate_trace(p.test, p.placement, sc); });
  std::cout << "mode=" << o.mode << " test_queries=" << rep.queries_processed
            << " activations=" << rep.total_activations
            << " single_row=" << rep.single_row_activations
            << " mac=" << rep.mac_activations << "\n"
            << "makespan_cycles=" << rep.makespan_cycles
            << " total_energy=" << rep.total_energy << "\n";
  if (!o.report_out.empty())
    d::stage("report", [&] {
      xbarsim::write_json_file(xbarsim::to_json(rep), o.report_out);
      return 0;
    });
}

struct ExpOpts {
  std::string config;
  std::string out;
  std::string trace;
  std::string hw_config;
  std::string log_base;
  std::vector<std::string> strategies, modes;
  std::vector<double> budgets;
  std::vector<std::uint32_t> fig7_sizes;
  std::uint64_t seed = 0;
  std::uint64_t batch_size = 0;
  std::uint32_t group_size = 0;
  double train_frac = 0;
  std::size_t max_degree = 0;
  bool quiet = false;
};

void run_exp(const ExpOpts& o, const CLI::App* sub) {
  xbarsim::ExperimentConfig cfg;
  if (!o.config.empty()) cfg = xbarsim::load_experiment_config(o.config);

  auto given = [&](const std::string& flag) { return sub->count(flag) > 0; };
  if (given("--out")) cfg.output_dir = o.out;
  if (given("--trace")) cfg.trace_path = o.trace;
  if (given("--hw-config")) {
    cfg.hw_config_path = o.hw_config;
    cfg.hwem = xbarsim::load_hw_config(o.hw_config);
  }
  if (given("--log-base")) cfg.log_base = log_base_from_string(o.log_base);
  if (given("--seed")) cfg.seed = o.seed;
  if (given("--batch-size")) cfg.batch_size = o.batch_size;
  if (given("--group-size")) cfg.group_size = o.group_size;
  if (given("--train-frac")) cfg.train_fraction = o.train_frac;
  if (given("--max-degree")) cfg.max_degree = o.max_degree;
  if (given("--strategies")) {
    cfg.strategies.clear();
    for (const std::string& s : o.strategies)
      cfg.strategies.push_back(xbarsim::strategy_from_string(s));
  }
  if (given("--modes")) {
    cfg.modes.clear();
    for (const std::string& s : o.modes)
      cfg.modes.push_back(xbarsim::exec_mode_from_string(s));
  }
  if (given("--budgets")) cfg.budgets_pct = o.budgets;
  if (given("--fig7-sizes")) cfg.fig7_group_sizes = o.fig7_sizes;
  if (cfg.output_dir.empty()) cfg.output_dir = "exp_out";

  std::ostream* log = o.quiet ? nullptr : &std::cout;
  xbarsim::ExperimentResult res = xbarsim::run_experiment(cfg, log);

  std::cout << "baseline=" << res.baseline << "\n";
  for (const xbarsim::RunComparison& c : res.comparison)
    std::cout << c.name << ": speedup=" << c.speedup << " energy_eff=" << c.energy_eff
              << "\n";
  std::cout << "results in " << cfg.output_dir << "\n";
}

void add_pipeline_options(CLI::App* sub, PipelineOpts& o, bool with_alloc) {
  sub->add_option("--config", o.config, "JSON or key=value config file; flags override");
  sub->add_option("--trace", o.trace, "input trace file (required)");
  sub->add_option("--max-degree,--max_degree", o.max_degree,
                  "co-occurrence neighbors kept per item, 0 = unlimited");
  if (with_alloc) {
    sub->add_option("--train-frac,--train_frac", o.train_frac,
                    "fraction of queries used to learn the layout");
    sub->add_option("--strategy", o.strategy, "correlation|frequency|naive");
    sub->add_option("--group-size,--group_size", o.group_size, "embeddings per group");
    sub->add_option("--batch-size,--batch_size", o.batch_size, "queries per batch");
    sub->add_option("--budget-pct,--budget_pct", o.budget_pct,
                    "extra replica slots, percent of group count");
    sub->add_option("--hw-config,--hw_config", o.hw_config,
                    "hardware/energy config file (JSON or key=value)");
    sub->add_option("--log-base,--log_base", o.log_base, "two|ten|natural");
    sub->add_flag("--per-embedding,--per_embedding", o.per_embedding,
                  "size replica counts by hottest member instead of group total");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crossbar in-memory embedding-reduction simulator"};
  app.require_subcommand(1);

  GenOpts gen;
  CLI::App* sgen = app.add_subcommand("gen", "generate a synthetic trace");
  sgen->add_option("--config", gen.config,
                   "JSON or key=value config file; flags override");
  sgen->add_option("--out", gen.out, "output trace path (required)");
  sgen->add_option("--items", gen.items, "embedding table size");
  sgen->add_option("--queries", gen.queries, "number of queries");
  sgen->add_option("--zipf-s,--zipf_s", gen.zipf_s, "popularity skew exponent");
  sgen->add_option("--mean-len,--mean_len", gen.mean_len, "mean lookups per query");
  sgen->add_option("--clusters", gen.clusters, "item clusters, 0 = items/64");
  sgen->add_option("--intra-prob,--intra_prob", gen.intra_prob,
                   "probability a lookup stays in the query's cluster");
  sgen->add_option("--seed", gen.seed, "generator seed");
  sgen->callback([&] {
    apply_gen_config(sgen, gen);
    run_gen(gen);
  });

  PipelineOpts ana;
  CLI::App* sana = app.add_subcommand("analyze", "trace statistics and co-occurrence dump");
  add_pipeline_options(sana, ana, false);
  sana->add_option("--stats-out,--stats_out", ana.stats_out, "write stats JSON here");
  sana->add_option("--graph-out,--graph_out", ana.graph_out, "write edge list here");
  sana->callback([&] {
    apply_pipeline_config(sana, ana, PipelineKind::analyze);
    run_analyze(ana);
  });

  PipelineOpts pln;
  CLI::App* spln = app.add_subcommand("plan", "grouping and replica placement dumps");
  add_pipeline_options(spln, pln, true);
  spln->add_option("--groups-out,--groups_out", pln.groups_out, "write one group per line");
  spln->add_option("--placement-out,--placement_out", pln.placement_out,
                   "write placement JSON here");
  spln->callback([&] {
    apply_pipeline_config(spln, pln, PipelineKind::plan);
    run_plan(pln);
  });

  PipelineOpts sim;
  CLI::App* ssim = app.add_subcommand("sim", "single simulation run");
  add_pipeline_options(ssim, sim, true);
  ssim->add_option("--mode", sim.mode, "recross|nmars|recross_no_switch");
  ssim->add_option("--report-out,--report_out", sim.report_out, "write report JSON here");
  ssim->callback([&] {
    apply_pipeline_config(ssim, sim, PipelineKind::sim);
    run_sim(sim);
  });

  ExpOpts exp;
  CLI::App* sexp = app.add_subcommand("exp", "full experiment matrix");
  sexp->add_option("--config", exp.config, "experiment config JSON");
  sexp->add_option("--out", exp.out, "output directory");
  sexp->add_option("--trace", exp.trace, "input trace file (skips the generator)");
  sexp->add_option("--hw-config,--hw_config", exp.hw_config, "hardware/energy config file");
  sexp->add_option("--log-base,--log_base", exp.log_base, "two|ten|natural");
  sexp->add_option("--strategies", exp.strategies, "strategies to run");
  sexp->add_option("--modes", exp.modes, "execution modes to run");
  sexp->add_option("--budgets", exp.budgets, "duplication budgets, percent");
  sexp->add_option("--fig7-sizes,--fig7_sizes", exp.fig7_sizes,
                   "group sizes for the single-row sweep");
  sexp->add_option("--seed", exp.seed, "generator seed");
  sexp->add_option("--batch-size,--batch_size", exp.batch_size, "queries per batch");
  sexp->add_option("--group-size,--group_size", exp.group_size, "embeddings per group");
  sexp->add_option("--train-frac,--train_frac", exp.train_frac, "train split fraction");
  sexp->add_option("--max-degree,--max_degree", exp.max_degree,
                   "co-occurrence neighbors kept per item");
  sexp->add_flag("--quiet", exp.quiet, "suppress per-run progress lines");
  sexp->callback([&] { run_exp(exp, sexp); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
