#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "xbarsim/common.hpp"

namespace xbarsim {

// Crossbar fabric geometry. Defaults: 64x64 crossbars with 2-bit cells, 6-bit
// flash ADC (3-bit read path), 4x4 crossbars per tile (256x256 cells), 4500
// tiles, 512-bit global bus.
struct HardwareConfig {
  std::uint32_t xbar_rows = 64;
  std::uint32_t xbar_cols = 64;
  std::uint32_t bits_per_cell = 2;
  std::uint32_t adc_bits = 6;
  std::uint32_t read_adc_bits = 3;
  std::uint32_t tile_dim = 4;  // crossbars per tile side
  std::uint32_t num_tiles = 4500;
  std::uint32_t bus_width_bits = 512;
  std::uint32_t embedding_dim = 64;
  std::uint32_t bits_per_feature = 2;

  // column slices needed to hold one embedding row
  std::uint32_t slice_factor() const {
    std::uint64_t row_bits = std::uint64_t(embedding_dim) * bits_per_feature;
    std::uint64_t cap = std::uint64_t(xbar_cols) * bits_per_cell;
    return static_cast<std::uint32_t>((row_bits + cap - 1) / cap);
  }
  std::uint32_t crossbars_per_tile() const { return tile_dim * tile_dim; }
  std::uint64_t total_crossbars() const {
    return std::uint64_t(num_tiles) * crossbars_per_tile();
  }

  void validate() const {
    if (xbar_rows < 1 || xbar_cols < 1 || bits_per_cell < 1 || adc_bits < 1 ||
        read_adc_bits < 1 || tile_dim < 1 || num_tiles < 1 || bus_width_bits < 1 ||
        embedding_dim < 1 || bits_per_feature < 1)
      throw ParamError("hardware config: all fields must be >= 1");
    if (read_adc_bits > adc_bits)
      throw ParamError("hardware config: read_adc_bits > adc_bits");
    if (adc_bits > 30) throw ParamError("hardware config: adc_bits too large");
  }
};

// Per-event latency/energy constants in arbitrary units; reported results are
// ratios, so only relative magnitudes matter. read_adc_free zeroes the read
// conversion cost for sensitivity runs.
struct EnergyModel {
  double e_comparator = 1.0;  // per comparator per conversion
  double e_xbar_row = 0.5;    // per activated wordline per activation
  double e_popcount = 0.2;    // per mode decision
  double e_bus_bit = 0.05;    // per bit on the global bus
  std::uint32_t t_activation = 1;  // cycles per crossbar activation slice
  std::uint32_t t_bus_word = 1;    // cycles per partial-sum transfer
  std::uint32_t t_popcount = 0;    // cycles per mode decision
  bool read_adc_free = false;

  void validate() const {
    if (e_comparator < 0 || e_xbar_row < 0 || e_popcount < 0 || e_bus_bit < 0)
      throw ParamError("energy model: energies must be >= 0");
    if (t_activation < 1) throw ParamError("energy model: t_activation must be >= 1");
  }
};

enum class Mode { read, mac };

// Popcount-driven mode decision: a single activated row is a plain read,
// anything more is a MAC.
inline Mode decide_mode(std::uint32_t activated_rows) {
  if (activated_rows == 0) throw ParamError("decide_mode: zero activated rows");
  return activated_rows == 1 ? Mode::read : Mode::mac;
}

// Flash ADC conversion energy: 2^n - 1 comparators at the mode's resolution.
inline double adc_energy(Mode mode, const HardwareConfig& hw, const EnergyModel& em) {
  if (mode == Mode::read && em.read_adc_free) return 0.0;
  std::uint32_t bits = mode == Mode::mac ? hw.adc_bits : hw.read_adc_bits;
  return static_cast<double>((1ull << bits) - 1) * em.e_comparator;
}

struct ActivationCost {
  double xbar_energy = 0;
  double adc_energy = 0;
  double popcount_energy = 0;
  std::uint64_t cycles = 0;
  Mode mode = Mode::read;

  double total_energy() const { return xbar_energy + adc_energy + popcount_energy; }
};

// How the conversion mode is chosen for an activation. dynamic_switch is the
// popcount-driven path (pays the popcount cost); force_mac keeps the popcount
// stage but always converts at full resolution; force_read models a plain
// per-row lookup fabric with no mode-decision circuit at all.
enum class SwitchPolicy { dynamic_switch, force_mac, force_read };

inline ActivationCost activation_cost(std::uint32_t activated_rows,
                                      const HardwareConfig& hw, const EnergyModel& em,
                                      SwitchPolicy policy = SwitchPolicy::dynamic_switch) {
  if (activated_rows < 1 || activated_rows > hw.xbar_rows)
    throw ParamError("activation_cost: activated_rows " +
                     std::to_string(activated_rows) + " outside [1, " +
                     std::to_string(hw.xbar_rows) + "]");
  ActivationCost c;
  switch (policy) {
    case SwitchPolicy::dynamic_switch: c.mode = decide_mode(activated_rows); break;
    case SwitchPolicy::force_mac: c.mode = Mode::mac; break;
    case SwitchPolicy::force_read: c.mode = Mode::read; break;
  }
  std::uint32_t slices = hw.slice_factor();
  bool popcount = policy != SwitchPolicy::force_read;
  c.xbar_energy = activated_rows * em.e_xbar_row;
  // one conversion per bitline per slice; ADC multiplexing is folded into
  // t_activation rather than modeled structurally
  c.adc_energy = double(slices) * hw.xbar_cols * adc_energy(c.mode, hw, em);
  c.popcount_energy = popcount ? em.e_popcount : 0.0;
  c.cycles = std::uint64_t(slices) * em.t_activation + (popcount ? em.t_popcount : 0);
  return c;
}

struct AggregateCost {
  double bus_energy = 0;
  std::uint64_t cycles = 0;
};

// Cross-crossbar merge of partial sums over the global bus, contention-free.
// Each partial sum ships embedding_dim values at ADC output resolution.
inline AggregateCost aggregate_cost(std::uint64_t num_partial_sums,
                                    const HardwareConfig& hw, const EnergyModel& em) {
  if (num_partial_sums < 1) throw ParamError("aggregate_cost: need >= 1 partial sum");
  AggregateCost c;
  c.bus_energy = double(num_partial_sums) * hw.embedding_dim * hw.adc_bits * em.e_bus_bit;
  c.cycles = num_partial_sums * em.t_bus_word;
  return c;
}

// --- configuration loading -------------------------------------------------
// One flat document, either JSON ({"xbar_rows": 64, ...}) or key=value lines
// with '#' comments. Every field of HardwareConfig and EnergyModel is a key;
// unknown keys are errors.

struct HwEmConfig {
  HardwareConfig hw;
  EnergyModel em;
};

namespace detail {

inline bool assign_hw_key(HwEmConfig& cfg, const std::string& key, double val) {
  auto u32 = [&](std::uint32_t& field) { field = static_cast<std::uint32_t>(val); };
  if (key == "xbar_rows") u32(cfg.hw.xbar_rows);
  else if (key == "xbar_cols") u32(cfg.hw.xbar_cols);
  else if (key == "bits_per_cell") u32(cfg.hw.bits_per_cell);
  else if (key == "adc_bits") u32(cfg.hw.adc_bits);
  else if (key == "read_adc_bits") u32(cfg.hw.read_adc_bits);
  else if (key == "tile_dim") u32(cfg.hw.tile_dim);
  else if (key == "num_tiles") u32(cfg.hw.num_tiles);
  else if (key == "bus_width_bits") u32(cfg.hw.bus_width_bits);
  else if (key == "embedding_dim") u32(cfg.hw.embedding_dim);
  else if (key == "bits_per_feature") u32(cfg.hw.bits_per_feature);
  else if (key == "e_comparator") cfg.em.e_comparator = val;
  else if (key == "e_xbar_row") cfg.em.e_xbar_row = val;
  else if (key == "e_popcount") cfg.em.e_popcount = val;
  else if (key == "e_bus_bit") cfg.em.e_bus_bit = val;
  else if (key == "t_activation") u32(cfg.em.t_activation);
  else if (key == "t_bus_word") u32(cfg.em.t_bus_word);
  else if (key == "t_popcount") u32(cfg.em.t_popcount);
  else if (key == "read_adc_free") cfg.em.read_adc_free = val != 0.0;
  else return false;
  return true;
}

}  // namespace detail

inline HwEmConfig parse_hw_config_keyed(const std::string& text) {
  HwEmConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string::size_type h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    std::string::size_type eq = line.find('=');
    if (eq == std::string::npos) {
      std::istringstream check(line);
      std::string stray;
      if (check >> stray)
        throw ParseError("hw config line " + std::to_string(line_no) +
                         ": expected key = value");
      continue;
    }
    std::istringstream ks(line.substr(0, eq)), vs(line.substr(eq + 1));
    std::string key, extra;
    double val = 0;
    if (!(ks >> key) || (ks >> extra))
      throw ParseError("hw config line " + std::to_string(line_no) + ": bad key");
    std::string vtok;
    if (!(vs >> vtok) || (vs >> extra))
      throw ParseError("hw config line " + std::to_string(line_no) + ": bad value");
    if (vtok == "true") val = 1;
    else if (vtok == "false") val = 0;
    else {
      try {
        val = std::stod(vtok);
      } catch (const std::exception&) {
        throw ParseError("hw config line " + std::to_string(line_no) +
                         ": non-numeric value '" + vtok + "'");
      }
    }
    if (!detail::assign_hw_key(cfg, key, val))
      throw ParamError("hw config: unknown key '" + key + "'");
  }
  cfg.hw.validate();
  cfg.em.validate();
  return cfg;
}

// parse_hw_config / load_hw_config (JSON-or-keyed dispatch) live in
// json_io.hpp to keep this header free of the JSON dependency.

}  // namespace xbarsim
