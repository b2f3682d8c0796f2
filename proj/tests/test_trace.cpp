#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "xbarsim/trace.hpp"

using namespace xbarsim;

TEST_CASE("parse_trace reads the documented format") {
  SECTION("header plus two queries") {
    std::istringstream in("#items 4\n0 2\n1 2 3\n");
    Trace t = parse_trace(in);
    REQUIRE(t.num_items == 4);
    REQUIRE(t.queries.size() == 2);
    REQUIRE(t.queries[0].items == std::vector<ItemId>{0, 2});
    REQUIRE(t.queries[1].items == std::vector<ItemId>{1, 2, 3});
  }
  SECTION("duplicates within a line collapse") {
    std::istringstream in("#items 2\n0 0 1\n");
    Trace t = parse_trace(in);
    REQUIRE(t.queries.size() == 1);
    REQUIRE(t.queries[0].items == std::vector<ItemId>{0, 1});
  }
  SECTION("id beyond the declared universe") {
    std::istringstream in("#items 2\n0 5\n");
    REQUIRE_THROWS_AS(parse_trace(in), ValidationError);
  }
  SECTION("missing header infers max id + 1") {
    std::istringstream in("3 7\n1\n");
    Trace t = parse_trace(in);
    REQUIRE(t.num_items == 8);
  }
  SECTION("comment lines are skipped") {
    std::istringstream in("#items 3\n# a comment\n0 1\n# another, between queries\n2\n");
    Trace t = parse_trace(in);
    REQUIRE(t.queries.size() == 2);
  }
  SECTION("non-integer token reports the line") {
    std::istringstream in("#items 3\n0 1\n2 x\n");
    try {
      parse_trace(in, "input");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      REQUIRE(std::string(e.what()).find("input:3") != std::string::npos);
    }
  }
  SECTION("unparsed queries are rejected, not silently dropped") {
    std::istringstream in("#items 2\n\n");
    REQUIRE_THROWS_AS(parse_trace(in), ParseError);
  }
}

TEST_CASE("write_trace emits the format and round-trips") {
  Trace t{4, {make_query({0, 2})}};
  std::ostringstream out;
  write_trace(t, out);
  REQUIRE(out.str() == "#items 4\n0 2\n");

  SECTION("round-trip identity on random traces") {
    for (std::uint64_t seed : {7u, 21u, 99u}) {
      Trace g = generate_synthetic(200, 150, 1.1, 5.0, 8, 0.6, seed);
      std::ostringstream o2;
      write_trace(g, o2);
      std::istringstream back(o2.str());
      REQUIRE(parse_trace(back) == g);
    }
  }
  SECTION("unwritable path") {
    REQUIRE_THROWS_AS(write_trace(t, "/nonexistent_dir_zz/trace.txt"), IoError);
  }
}

TEST_CASE("make_query normalizes and rejects empties") {
  REQUIRE(make_query({5, 1, 5, 3}).items == std::vector<ItemId>{1, 3, 5});
  REQUIRE_THROWS_AS(make_query({}), ValidationError);
}

TEST_CASE("generator determinism and conservation") {
  GeneratorParams p;
  p.num_items = 10;
  p.num_queries = 10000;
  p.mean_len = 4;
  p.num_clusters = 2;
  p.seed = 5;

  Trace a = generate_synthetic(p);
  Trace b = generate_synthetic(p);
  REQUIRE(a == b);

  TraceStats st = trace_stats(a);
  std::uint64_t freq_sum = 0, item_sum = 0;
  for (auto f : st.freq) freq_sum += f;
  for (const Query& q : a.queries) item_sum += q.items.size();
  REQUIRE(freq_sum == item_sum);

  Trace c = generate_synthetic([&] {
    GeneratorParams q = p;
    q.seed = 6;
    return q;
  }());
  REQUIRE_FALSE(a == c);
}

TEST_CASE("generator parameter validation") {
  GeneratorParams p;
  p.num_items = 10;
  p.num_queries = 3;
  SECTION("mean_len above the universe") {
    p.mean_len = 11;
    REQUIRE_THROWS_AS(generate_synthetic(p), ParamError);
  }
  SECTION("non-positive skew") {
    p.zipf_s = 0;
    REQUIRE_THROWS_AS(generate_synthetic(p), ParamError);
  }
  SECTION("more clusters than items") {
    p.num_clusters = 11;
    REQUIRE_THROWS_AS(generate_synthetic(p), ParamError);
  }
  SECTION("probability out of range") {
    p.intra_prob = 1.5;
    REQUIRE_THROWS_AS(generate_synthetic(p), ParamError);
  }
}

TEST_CASE("flat generator matches a direct Zipf sampler") {
  // one cluster, no intra draws: the trace is plain global Zipf
  const std::size_t items = 1000, queries = 100000;
  const double s = 1.05;
  Trace t = generate_synthetic(items, queries, s, 2.0, 1, 0.0, 11);
  TraceStats st = trace_stats(t);

  std::vector<std::uint64_t> freq_sorted = st.freq;
  std::sort(freq_sorted.begin(), freq_sorted.end(), std::greater<>());
  double gen_ratio = double(freq_sorted[0]) / double(freq_sorted[1]);

  std::uint64_t total_draws = 0;
  for (auto f : st.freq) total_draws += f;
  auto counts = oracle::zipf_sample_counts(items, s, total_draws, 77);
  std::sort(counts.begin(), counts.end(), std::greater<>());
  double oracle_ratio = double(counts[0]) / double(counts[1]);

  INFO("generator rank1/rank2 = " << gen_ratio << ", sampler = " << oracle_ratio
                                  << ", ideal = " << std::pow(2.0, s));
  REQUIRE(gen_ratio == Catch::Approx(oracle_ratio).epsilon(0.2));
  REQUIRE(gen_ratio == Catch::Approx(std::pow(2.0, s)).epsilon(0.2));
}

TEST_CASE("generator heavy tail concentrates accesses") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Trace t = generate_synthetic(10000, 20000, 1.05, 8.0, 100, 0.5, seed);
    TraceStats st = trace_stats(t);
    std::vector<std::uint64_t> freq = st.freq;
    std::sort(freq.begin(), freq.end(), std::greater<>());
    std::uint64_t total = 0, top = 0;
    for (std::size_t i = 0; i < freq.size(); ++i) {
      total += freq[i];
      if (i < freq.size() / 100) top += freq[i];
    }
    INFO("seed " << seed << ": top-1% share = " << double(top) / double(total));
    REQUIRE(double(top) >= 0.30 * double(total));
  }
}

TEST_CASE("trace_stats counts and fits") {
  SECTION("hand-counted example") {
    Trace t{2, {make_query({0, 1}), make_query({0})}};
    TraceStats st = trace_stats(t);
    REQUIRE(st.freq == std::vector<std::uint64_t>{2, 1});
    REQUIRE(st.query_len_mean == Catch::Approx(1.5));
  }
  SECTION("uniform frequencies fit a flat tail") {
    Trace t;
    t.num_items = 200;
    for (int round = 0; round < 5; ++round)
      for (ItemId i = 0; i < 200; ++i) t.queries.push_back(make_query({i}));
    TraceStats st = trace_stats(t);
    REQUIRE(st.freq_tail_exponent.has_value());
    REQUIRE(std::abs(*st.freq_tail_exponent) < 0.1);
  }
  SECTION("zipf input recovers the exponent") {
    Trace t = generate_synthetic(10000, 100000, 1.05, 4.0, 1, 0.0, 13);
    TraceStats st = trace_stats(t);
    REQUIRE(st.freq_tail_exponent.has_value());
    INFO("fitted " << *st.freq_tail_exponent);
    REQUIRE(*st.freq_tail_exponent == Catch::Approx(1.05).margin(0.2));
  }
  SECTION("too few observed items yields no fit") {
    Trace t{50, {}};
    for (ItemId i = 0; i < 50; ++i) t.queries.push_back(make_query({i}));
    REQUIRE_FALSE(trace_stats(t).freq_tail_exponent.has_value());
  }
}

TEST_CASE("split_trace partitions in order") {
  Trace t{5, {}};
  for (int i = 0; i < 10; ++i) t.queries.push_back(make_query({ItemId(i % 5)}));

  auto [train, test] = split_trace(t, 0.8);
  REQUIRE(train.queries.size() == 8);
  REQUIRE(test.queries.size() == 2);
  REQUIRE(train.num_items == 5);
  REQUIRE(test.num_items == 5);

  std::vector<Query> joined = train.queries;
  joined.insert(joined.end(), test.queries.begin(), test.queries.end());
  REQUIRE(joined == t.queries);

  Trace one{1, {make_query({0})}};
  REQUIRE_THROWS_AS(split_trace(one, 0.5), ParamError);
  REQUIRE_THROWS_AS(split_trace(t, 0.0), ParamError);
  REQUIRE_THROWS_AS(split_trace(t, 1.0), ParamError);
}

TEST_CASE("validate_trace flags out-of-range ids") {
  Trace t{2, {make_query({0, 1})}};
  REQUIRE_NOTHROW(validate_trace(t));
  t.queries.push_back(make_query({5}));
  REQUIRE_THROWS_AS(validate_trace(t), ValidationError);
}
