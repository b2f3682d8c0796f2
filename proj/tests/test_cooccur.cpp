#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"
#include "xbarsim/cooccur.hpp"

using namespace xbarsim;

namespace {

std::uint64_t weight_of(const CoOccurrenceGraph& g, ItemId a, ItemId b) {
  for (const auto& [n, w] : g.adj[a])
    if (n == b) return w;
  return 0;
}

Trace random_trace(std::uint32_t items, std::size_t queries, std::uint32_t max_len,
                   std::uint64_t seed) {
  Rng rng(seed);
  Trace t;
  t.num_items = items;
  for (std::size_t q = 0; q < queries; ++q) {
    std::size_t len = 1 + rng.below(max_len);
    std::vector<ItemId> ids;
    for (std::size_t k = 0; k < len; ++k) ids.push_back(ItemId(rng.below(items)));
    t.queries.push_back(make_query(ids));
  }
  return t;
}

}  // namespace

TEST_CASE("pair counting on a worked example") {
  Trace t{3, {make_query({0, 1, 2}), make_query({0, 1})}};
  CoOccurrenceGraph g = build_cooccurrence(t, kUnlimitedDegree);
  REQUIRE(g.node_freq == std::vector<std::uint64_t>{2, 2, 1});
  REQUIRE(weight_of(g, 0, 1) == 2);
  REQUIRE(weight_of(g, 0, 2) == 1);
  REQUIRE(weight_of(g, 1, 2) == 1);

  auto nb0 = neighbors(g, 0);
  REQUIRE(nb0 == std::vector<std::pair<ItemId, std::uint64_t>>{{1, 2}, {2, 1}});
}

TEST_CASE("singleton queries build an edgeless graph") {
  Trace t{4, {make_query({0}), make_query({3}), make_query({1})}};
  CoOccurrenceGraph g = build_cooccurrence(t, kUnlimitedDegree);
  for (const auto& adj : g.adj) REQUIRE(adj.empty());
  REQUIRE(g.node_freq == std::vector<std::uint64_t>{1, 1, 0, 1});
  REQUIRE(neighbors(g, 2).empty());
}

TEST_CASE("neighbors ordering and bounds") {
  Trace t{5, {make_query({0, 1}), make_query({0, 3}), make_query({0, 3, 4})}};
  CoOccurrenceGraph g = build_cooccurrence(t, kUnlimitedDegree);
  // weights from 0: (3,2), then ties (1,1) and (4,1) ordered by id
  auto nb = neighbors(g, 0);
  REQUIRE(nb == std::vector<std::pair<ItemId, std::uint64_t>>{{3, 2}, {1, 1}, {4, 1}});
  REQUIRE_THROWS_AS(neighbors(g, 5), ParamError);
}

TEST_CASE("matches the brute-force pair recount") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    Trace t = random_trace(10, 50, 5, seed);
    CoOccurrenceGraph g = build_cooccurrence(t, kUnlimitedDegree);
    oracle::PairCounts pc = oracle::count_pairs(t);

    REQUIRE(g.node_freq == pc.node_freq);
    std::size_t edges = 0;
    for (ItemId a = 0; a < g.num_items; ++a)
      for (const auto& [b, w] : g.adj[a])
        if (a < b) {
          ++edges;
          REQUIRE(pc.weight.count({a, b}) == 1);
          REQUIRE(pc.weight.at({a, b}) == w);
        }
    REQUIRE(edges == pc.weight.size());
  }
}

TEST_CASE("structural invariants on random traces") {
  for (std::uint64_t seed : {10u, 20u, 30u}) {
    Trace t = random_trace(40, 120, 6, seed);
    CoOccurrenceGraph g = build_cooccurrence(t, kUnlimitedDegree);
    for (ItemId a = 0; a < g.num_items; ++a) {
      for (const auto& [b, w] : g.adj[a]) {
        REQUIRE(a != b);
        REQUIRE(w >= 1);
        REQUIRE(w <= std::min(g.node_freq[a], g.node_freq[b]));
        REQUIRE(weight_of(g, b, a) == w);
      }
      // adjacency ordering: weight desc, ties id asc
      for (std::size_t k = 1; k < g.adj[a].size(); ++k) {
        auto [pb, pw] = g.adj[a][k - 1];
        auto [cb, cw] = g.adj[a][k];
        REQUIRE((pw > cw || (pw == cw && pb < cb)));
      }
    }
  }
}

TEST_CASE("degree cap keeps the union of per-node survivors") {
  Trace t{3, {}};
  for (int i = 0; i < 3; ++i) t.queries.push_back(make_query({0, 1}));
  for (int i = 0; i < 2; ++i) t.queries.push_back(make_query({0, 2}));
  t.queries.push_back(make_query({1, 2}));

  CoOccurrenceGraph g = build_cooccurrence(t, 1);
  // node 0 keeps (1,3); node 1 keeps (0,3); node 2 keeps (0,2).
  // edge 0-2 survives via node 2; edge 1-2 survives via neither.
  REQUIRE(weight_of(g, 0, 1) == 3);
  REQUIRE(weight_of(g, 0, 2) == 2);
  REQUIRE(weight_of(g, 2, 0) == 2);
  REQUIRE(weight_of(g, 1, 2) == 0);
  REQUIRE(weight_of(g, 2, 1) == 0);
}

TEST_CASE("unlimited and capped builds agree when under the cap") {
  Trace t = random_trace(12, 60, 4, 42);
  CoOccurrenceGraph a = build_cooccurrence(t, kUnlimitedDegree);
  CoOccurrenceGraph b = build_cooccurrence(t, 64);
  REQUIRE(a.node_freq == b.node_freq);
  for (ItemId v = 0; v < a.num_items; ++v) REQUIRE(a.adj[v] == b.adj[v]);
}

TEST_CASE("graph dump is sorted edge lines") {
  Trace t{3, {make_query({0, 1, 2}), make_query({0, 1})}};
  CoOccurrenceGraph g = build_cooccurrence(t, kUnlimitedDegree);
  std::ostringstream out;
  dump_graph(g, out);
  REQUIRE(out.str() == "0 1 2\n0 2 1\n1 2 1\n");
}

TEST_CASE("empty trace is rejected") {
  Trace t{5, {}};
  REQUIRE_THROWS_AS(build_cooccurrence(t, kUnlimitedDegree), ParamError);
}
