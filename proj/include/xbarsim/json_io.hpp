#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "xbarsim/allocation.hpp"
#include "xbarsim/common.hpp"
#include "xbarsim/hwmodel.hpp"
#include "xbarsim/sim.hpp"
#include "xbarsim/trace.hpp"

namespace xbarsim {

using json = nlohmann::json;

// SimReport serialization; key names are a stable contract.
inline json to_json(const SimReport& r) {
  return json{
      {"total_activations", r.total_activations},
      {"single_row_activations", r.single_row_activations},
      {"mac_activations", r.mac_activations},
      {"makespan_cycles", r.makespan_cycles},
      {"total_energy", r.total_energy},
      {"energy_breakdown",
       {{"xbar", r.energy_breakdown.xbar},
        {"adc", r.energy_breakdown.adc},
        {"popcount", r.energy_breakdown.popcount},
        {"bus", r.energy_breakdown.bus}}},
      {"per_batch_makespans", r.per_batch_makespans},
      {"queries_processed", r.queries_processed},
  };
}

inline SimReport sim_report_from_json(const json& j) {
  SimReport r;
  r.total_activations = j.at("total_activations").get<std::uint64_t>();
  r.single_row_activations = j.at("single_row_activations").get<std::uint64_t>();
  r.mac_activations = j.at("mac_activations").get<std::uint64_t>();
  r.makespan_cycles = j.at("makespan_cycles").get<std::uint64_t>();
  r.total_energy = j.at("total_energy").get<double>();
  const json& eb = j.at("energy_breakdown");
  r.energy_breakdown = {eb.at("xbar").get<double>(), eb.at("adc").get<double>(),
                        eb.at("popcount").get<double>(), eb.at("bus").get<double>()};
  r.per_batch_makespans = j.at("per_batch_makespans").get<std::vector<std::uint64_t>>();
  r.queries_processed = j.at("queries_processed").get<std::uint64_t>();
  return r;
}

// Placement dump: group index -> crossbar indices, plus the copy histogram.
inline json to_json(const PlacementPlan& plan) {
  json groups = json::object();
  for (std::size_t g = 0; g < plan.group_to_crossbars.size(); ++g)
    groups[std::to_string(g)] = plan.group_to_crossbars[g];
  PlacementStats st = placement_stats(plan);
  json hist = json::object();
  for (const auto& [r, cnt] : st.copy_histogram) hist[std::to_string(r)] = cnt;
  return json{{"group_to_crossbars", groups},
              {"copy_histogram", hist},
              {"evenness", st.evenness},
              {"crossbar_capacity_rows", plan.crossbar_capacity_rows}};
}

inline json to_json(const TraceStats& st, std::uint32_t num_items) {
  std::uint64_t total = 0;
  for (std::uint64_t f : st.freq) total += f;
  json j{{"num_items", num_items},
         {"total_accesses", total},
         {"query_len_mean", st.query_len_mean}};
  if (st.freq_tail_exponent)
    j["freq_tail_exponent"] = *st.freq_tail_exponent;
  else
    j["freq_tail_exponent"] = nullptr;
  return j;
}

// Flat JSON or key=value document; see parse_hw_config_keyed for the keyed
// grammar. Unknown keys are errors in both forms.
inline HwEmConfig parse_hw_config(const std::string& text) {
  std::size_t i = text.find_first_not_of(" \t\r\n");
  if (i != std::string::npos && text[i] == '{') {
    json j = json::parse(text);
    HwEmConfig cfg;
    for (const auto& [key, val] : j.items()) {
      double v;
      if (val.is_boolean())
        v = val.get<bool>() ? 1.0 : 0.0;
      else if (val.is_number())
        v = val.get<double>();
      else
        throw ParseError("hw config: key '" + key + "' has non-numeric value");
      if (!detail::assign_hw_key(cfg, key, v))
        throw ParamError("hw config: unknown key '" + key + "'");
    }
    cfg.hw.validate();
    cfg.em.validate();
    return cfg;
  }
  return parse_hw_config_keyed(text);
}

inline HwEmConfig load_hw_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("not found or unreadable: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_hw_config(buf.str());
}

inline void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace xbarsim
