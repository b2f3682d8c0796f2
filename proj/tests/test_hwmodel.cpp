#include <catch2/catch_amalgamated.hpp>

#include "xbarsim/hwmodel.hpp"
#include "xbarsim/json_io.hpp"

using namespace xbarsim;

TEST_CASE("default geometry") {
  HardwareConfig hw;
  REQUIRE(hw.xbar_rows == 64);
  REQUIRE(hw.xbar_cols == 64);
  REQUIRE(hw.bits_per_cell == 2);
  REQUIRE(hw.adc_bits == 6);
  REQUIRE(hw.read_adc_bits == 3);
  REQUIRE(hw.tile_dim == 4);
  REQUIRE(hw.num_tiles == 4500);
  REQUIRE(hw.bus_width_bits == 512);
  REQUIRE(hw.slice_factor() == 1);
  REQUIRE(hw.crossbars_per_tile() == 16);
  REQUIRE(hw.total_crossbars() == 72000);
  REQUIRE_NOTHROW(hw.validate());
}

TEST_CASE("config validation") {
  HardwareConfig hw;
  hw.read_adc_bits = 7;
  REQUIRE_THROWS_AS(hw.validate(), ParamError);
  hw = HardwareConfig{};
  hw.xbar_rows = 0;
  REQUIRE_THROWS_AS(hw.validate(), ParamError);

  EnergyModel em;
  em.e_comparator = -1;
  REQUIRE_THROWS_AS(em.validate(), ParamError);
  em = EnergyModel{};
  em.t_activation = 0;
  REQUIRE_THROWS_AS(em.validate(), ParamError);
}

TEST_CASE("mode decision is a popcount threshold") {
  REQUIRE(decide_mode(1) == Mode::read);
  REQUIRE(decide_mode(2) == Mode::mac);
  REQUIRE(decide_mode(64) == Mode::mac);
  REQUIRE_THROWS_AS(decide_mode(0), ParamError);
  for (std::uint32_t rows = 2; rows <= 64; ++rows) REQUIRE(decide_mode(rows) == Mode::mac);
}

TEST_CASE("flash ADC comparator energy") {
  HardwareConfig hw;
  EnergyModel em;
  REQUIRE(adc_energy(Mode::mac, hw, em) == 63.0);
  REQUIRE(adc_energy(Mode::read, hw, em) == 7.0);

  hw.adc_bits = 1;
  REQUIRE(adc_energy(Mode::mac, hw, em) == 1.0);

  hw = HardwareConfig{};
  em.read_adc_free = true;
  REQUIRE(adc_energy(Mode::read, hw, em) == 0.0);
  REQUIRE(adc_energy(Mode::mac, hw, em) == 63.0);
}

TEST_CASE("activation cost composition") {
  HardwareConfig hw;
  EnergyModel em;

  SECTION("single row takes the read path") {
    ActivationCost c = activation_cost(1, hw, em);
    REQUIRE(c.mode == Mode::read);
    REQUIRE(c.xbar_energy == Catch::Approx(0.5));
    REQUIRE(c.adc_energy == Catch::Approx(64.0 * 7.0));
    REQUIRE(c.popcount_energy == Catch::Approx(0.2));
    REQUIRE(c.cycles == 1);
    REQUIRE(c.total_energy() == Catch::Approx(0.5 + 448.0 + 0.2));
  }
  SECTION("two rows switch to MAC with a 63/7 ADC ratio") {
    ActivationCost r1 = activation_cost(1, hw, em);
    ActivationCost r2 = activation_cost(2, hw, em);
    REQUIRE(r2.mode == Mode::mac);
    REQUIRE(r2.adc_energy / r1.adc_energy == Catch::Approx(9.0));
    REQUIRE(r2.adc_energy == Catch::Approx(64.0 * 63.0));
  }
  SECTION("column slicing scales ADC energy and cycles") {
    HardwareConfig wide;
    wide.embedding_dim = 128;  // 128*2 bits over 64*2-bit columns -> 2 slices
    REQUIRE(wide.slice_factor() == 2);
    ActivationCost narrow = activation_cost(2, hw, em);
    ActivationCost sliced = activation_cost(2, wide, em);
    REQUIRE(sliced.adc_energy == Catch::Approx(2 * narrow.adc_energy));
    REQUIRE(sliced.cycles == 2 * narrow.cycles);
  }
  SECTION("rows bounds") {
    REQUIRE_THROWS_AS(activation_cost(0, hw, em), ParamError);
    REQUIRE_THROWS_AS(activation_cost(65, hw, em), ParamError);
  }
  SECTION("monotone in activated rows") {
    double prev = 0;
    for (std::uint32_t rows = 1; rows <= 64; ++rows) {
      double e = activation_cost(rows, hw, em).total_energy();
      REQUIRE(e >= prev);
      prev = e;
    }
  }
  SECTION("switch policies") {
    ActivationCost forced = activation_cost(1, hw, em, SwitchPolicy::force_mac);
    REQUIRE(forced.mode == Mode::mac);
    REQUIRE(forced.adc_energy == Catch::Approx(64.0 * 63.0));
    REQUIRE(forced.popcount_energy == Catch::Approx(0.2));

    ActivationCost plain = activation_cost(1, hw, em, SwitchPolicy::force_read);
    REQUIRE(plain.mode == Mode::read);
    REQUIRE(plain.popcount_energy == 0.0);
  }
  SECTION("read beats MAC whenever the read path is narrower") {
    ActivationCost rd = activation_cost(1, hw, em);
    ActivationCost mc = activation_cost(2, hw, em);
    REQUIRE(rd.adc_energy < mc.adc_energy);
  }
}

TEST_CASE("aggregation cost is linear in partial sums") {
  HardwareConfig hw;
  EnergyModel em;
  AggregateCost one = aggregate_cost(1, hw, em);
  REQUIRE(one.bus_energy == Catch::Approx(64 * 6 * 0.05));
  REQUIRE(one.cycles == 1);

  AggregateCost four = aggregate_cost(4, hw, em);
  REQUIRE(four.bus_energy == Catch::Approx(4 * one.bus_energy));
  REQUIRE(four.cycles == 4);

  REQUIRE_THROWS_AS(aggregate_cost(0, hw, em), ParamError);
}

TEST_CASE("keyed config documents") {
  HwEmConfig cfg = parse_hw_config_keyed(
      "# comment line\n"
      "xbar_rows = 32\n"
      "adc_bits = 5  # trailing comment\n"
      "read_adc_bits = 2\n"
      "e_comparator = 0.5\n"
      "read_adc_free = true\n");
  REQUIRE(cfg.hw.xbar_rows == 32);
  REQUIRE(cfg.hw.adc_bits == 5);
  REQUIRE(cfg.hw.read_adc_bits == 2);
  REQUIRE(cfg.em.e_comparator == 0.5);
  REQUIRE(cfg.em.read_adc_free);
  REQUIRE(cfg.hw.xbar_cols == 64);  // untouched fields keep defaults

  REQUIRE_THROWS_AS(parse_hw_config_keyed("mystery_key = 3\n"), ParamError);
  REQUIRE_THROWS_AS(parse_hw_config_keyed("xbar_rows = fast\n"), ParseError);
  REQUIRE_THROWS_AS(parse_hw_config_keyed("xbar_rows 64\n"), ParseError);
  REQUIRE_THROWS_AS(parse_hw_config_keyed("adc_bits = 2\nread_adc_bits = 3\n"),
                    ParamError);
}

TEST_CASE("JSON config documents") {
  HwEmConfig cfg = parse_hw_config(R"({"xbar_rows": 16, "e_popcount": 0.125,
                                       "read_adc_free": true})");
  REQUIRE(cfg.hw.xbar_rows == 16);
  REQUIRE(cfg.em.e_popcount == 0.125);
  REQUIRE(cfg.em.read_adc_free);

  REQUIRE_THROWS_AS(parse_hw_config(R"({"bogus": 1})"), ParamError);
  REQUIRE_THROWS_AS(parse_hw_config(R"({"xbar_rows": "many"})"), ParseError);

  // leading whitespace still dispatches on the brace
  REQUIRE(parse_hw_config("  \n {\"adc_bits\": 4}").hw.adc_bits == 4);
}
