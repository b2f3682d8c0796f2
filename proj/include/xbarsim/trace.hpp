#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "xbarsim/common.hpp"

namespace xbarsim {

// One embedding-reduction request: the set of embedding IDs to be summed.
// Items are kept sorted and deduplicated.
struct Query {
  std::vector<ItemId> items;

  bool operator==(const Query&) const = default;
};

inline Query make_query(std::vector<ItemId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.empty()) throw ValidationError("query must contain at least one item");
  return Query{std::move(ids)};
}

struct Trace {
  std::uint32_t num_items = 0;
  std::vector<Query> queries;

  bool operator==(const Trace&) const = default;
};

inline void validate_trace(const Trace& t) {
  for (const Query& q : t.queries) {
    if (q.items.empty()) throw ValidationError("empty query in trace");
    if (!std::is_sorted(q.items.begin(), q.items.end()))
      throw ValidationError("query items not sorted");
    if (std::adjacent_find(q.items.begin(), q.items.end()) != q.items.end())
      throw ValidationError("duplicate item in query");
    if (q.items.back() >= t.num_items)
      throw ValidationError("item id " + std::to_string(q.items.back()) +
                            " >= num_items " + std::to_string(t.num_items));
  }
}

struct TraceStats {
  std::vector<std::uint64_t> freq;  // freq[i] = number of queries containing i
  double query_len_mean = 0.0;
  // absent when fewer than 100 distinct items were observed
  std::optional<double> freq_tail_exponent;
};

// --- file format ---------------------------------------------------------
// UTF-8 text. Optional first line "#items <N>". Other '#'-prefixed lines are
// comments. Each remaining line is one query: whitespace-separated decimal
// IDs (duplicates within a line collapse to one).

inline Trace parse_trace(std::istream& in, const std::string& origin = "<stream>") {
  Trace trace;
  bool have_header = false;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t max_id = 0;
  bool any_item = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("#items", 0) == 0) {
      std::istringstream hs(line.substr(6));
      std::uint64_t n = 0;
      if (!(hs >> n))
        throw ParseError(origin + ":1: malformed #items header");
      std::string rest;
      if (hs >> rest)
        throw ParseError(origin + ":1: trailing tokens after #items header");
      trace.num_items = static_cast<std::uint32_t>(n);
      have_header = true;
      continue;
    }
    if (!line.empty() && line[0] == '#') continue;

    std::istringstream ls(line);
    std::vector<ItemId> ids;
    std::string tok;
    while (ls >> tok) {
      std::uint64_t v = 0;
      const char* b = tok.data();
      const char* e = b + tok.size();
      auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || ptr != e)
        throw ParseError(origin + ":" + std::to_string(line_no) +
                         ": malformed token '" + tok + "'");
      if (have_header && v >= trace.num_items)
        throw ValidationError(origin + ":" + std::to_string(line_no) + ": item id " +
                              std::to_string(v) + " >= declared num_items " +
                              std::to_string(trace.num_items));
      ids.push_back(static_cast<ItemId>(v));
      max_id = std::max(max_id, v);
      any_item = true;
    }
    if (ids.empty())
      throw ParseError(origin + ":" + std::to_string(line_no) + ": empty query line");
    trace.queries.push_back(make_query(std::move(ids)));
  }

  if (!have_header) trace.num_items = any_item ? static_cast<std::uint32_t>(max_id + 1) : 0;
  return trace;
}

inline Trace parse_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("not found or unreadable: " + path.string());
  return parse_trace(in, path.string());
}

inline void write_trace(const Trace& trace, std::ostream& out) {
  out << "#items " << trace.num_items << "\n";
  for (const Query& q : trace.queries) {
    for (std::size_t i = 0; i < q.items.size(); ++i) {
      if (i) out << ' ';
      out << q.items[i];
    }
    out << "\n";
  }
}

inline void write_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  write_trace(trace, out);
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

// --- synthetic workload ---------------------------------------------------

struct GeneratorParams {
  std::uint32_t num_items = 0;
  std::size_t num_queries = 0;
  double zipf_s = 1.05;
  double mean_len = 40.0;
  std::uint32_t num_clusters = 1;
  double intra_prob = 0.7;
  std::uint64_t seed = 1;
};

namespace detail {

// Item universe layout used by the generator: a seeded permutation maps
// popularity rank -> item id, and clusters own consecutive rank blocks, so
// cluster membership is uncorrelated with raw item ids.
struct ClusterLayout {
  std::vector<ItemId> rank_to_item;
  std::vector<std::uint32_t> cluster_start;  // size num_clusters + 1
};

inline ClusterLayout make_cluster_layout(std::uint32_t num_items,
                                         std::uint32_t num_clusters, Rng& rng) {
  ClusterLayout lay;
  lay.rank_to_item = random_permutation(num_items, rng);
  lay.cluster_start.resize(num_clusters + 1);
  std::uint32_t base = num_items / num_clusters;
  std::uint32_t rem = num_items % num_clusters;
  std::uint32_t pos = 0;
  for (std::uint32_t c = 0; c < num_clusters; ++c) {
    lay.cluster_start[c] = pos;
    pos += base + (c < rem ? 1 : 0);
  }
  lay.cluster_start[num_clusters] = pos;
  return lay;
}

}  // namespace detail

// Cluster-Zipf trace: heavy-tailed item popularity plus co-occurrence
// structure. Each query picks a latent cluster (Zipf over clusters) and draws
// each item from that cluster with probability intra_prob (Zipf within the
// cluster), otherwise from the global Zipf over all items. Collisions are
// redrawn until the query holds L distinct items.
inline Trace generate_synthetic(const GeneratorParams& p) {
  if (p.num_clusters < 1 || p.num_items < p.num_clusters)
    throw ParamError("generator: need num_items >= num_clusters >= 1");
  if (p.zipf_s <= 0) throw ParamError("generator: zipf_s must be > 0");
  if (p.mean_len < 1) throw ParamError("generator: mean_len must be >= 1");
  if (p.mean_len > static_cast<double>(p.num_items))
    throw ParamError("generator: mean_len exceeds num_items");
  if (p.intra_prob < 0 || p.intra_prob > 1)
    throw ParamError("generator: intra_prob must lie in [0, 1]");

  Rng rng(p.seed);
  detail::ClusterLayout lay = detail::make_cluster_layout(p.num_items, p.num_clusters, rng);

  ZipfTable cluster_pick(p.num_clusters, p.zipf_s);
  ZipfTable global_pick(p.num_items, p.zipf_s);
  // balanced cluster sizes differ by at most one, so two tables suffice
  std::uint32_t base = p.num_items / p.num_clusters;
  std::uint32_t rem = p.num_items % p.num_clusters;
  ZipfTable intra_small(base, p.zipf_s);
  ZipfTable intra_big = rem > 0 ? ZipfTable(base + 1, p.zipf_s) : ZipfTable();

  Trace trace;
  trace.num_items = p.num_items;
  trace.queries.reserve(p.num_queries);

  std::vector<ItemId> scratch;
  for (std::size_t qi = 0; qi < p.num_queries; ++qi) {
    std::uint64_t len = 0;
    while (len == 0) len = poisson_draw(p.mean_len, rng);
    len = std::min<std::uint64_t>(len, p.num_items);

    std::size_t cluster = cluster_pick.sample(rng);
    std::uint32_t cstart = lay.cluster_start[cluster];
    std::uint32_t csize = lay.cluster_start[cluster + 1] - cstart;
    const ZipfTable& intra_pick = (csize == base) ? intra_small : intra_big;

    scratch.clear();
    auto taken = [&](ItemId id) {
      return std::find(scratch.begin(), scratch.end(), id) != scratch.end();
    };
    for (std::uint64_t slot = 0; slot < len; ++slot) {
      int attempts = 0;
      for (;;) {
        ItemId id;
        if (attempts < 64) {
          bool intra = attempts < 32 && rng.next_double() < p.intra_prob;
          if (intra) {
            std::size_t r = intra_pick.sample(rng);
            id = lay.rank_to_item[cstart + r];
          } else {
            id = lay.rank_to_item[global_pick.sample(rng)];
          }
        } else {
          // pathological case (L close to the universe size): scan from a
          // random rank for the first unused item
          std::uint32_t start = static_cast<std::uint32_t>(rng.below(p.num_items));
          id = lay.rank_to_item[start];
          for (std::uint32_t k = 0; taken(id) && k < p.num_items; ++k)
            id = lay.rank_to_item[(start + k + 1) % p.num_items];
        }
        if (!taken(id)) {
          scratch.push_back(id);
          break;
        }
        ++attempts;
      }
    }
    trace.queries.push_back(make_query(scratch));
  }
  return trace;
}

inline Trace generate_synthetic(std::uint32_t num_items, std::size_t num_queries,
                                double zipf_s, double mean_len,
                                std::uint32_t num_clusters, double intra_prob,
                                std::uint64_t seed) {
  return generate_synthetic(GeneratorParams{num_items, num_queries, zipf_s, mean_len,
                                            num_clusters, intra_prob, seed});
}

// --- statistics -----------------------------------------------------------

namespace detail {

// least-squares slope of y over x
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double xm = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - xm) * (y[i] - ym);
    den += (x[i] - xm) * (x[i] - xm);
  }
  return num / den;
}

}  // namespace detail

inline TraceStats trace_stats(const Trace& trace) {
  if (trace.queries.empty()) throw ParamError("trace_stats: empty trace");
  TraceStats st;
  st.freq.assign(trace.num_items, 0);
  std::uint64_t total_items = 0;
  for (const Query& q : trace.queries) {
    total_items += q.items.size();
    for (ItemId id : q.items) ++st.freq[id];
  }
  st.query_len_mean =
      static_cast<double>(total_items) / static_cast<double>(trace.queries.size());

  std::vector<std::uint64_t> observed;
  observed.reserve(trace.num_items);
  for (std::uint64_t f : st.freq)
    if (f > 0) observed.push_back(f);
  if (observed.size() >= 100) {
    std::sort(observed.begin(), observed.end(), std::greater<>());
    // fit on the top half of the rank-frequency curve; the deep tail of a
    // sampled power law is too noisy to regress on
    std::size_t m = observed.size() / 2;
    std::vector<double> lx(m), ly(m);
    for (std::size_t r = 0; r < m; ++r) {
      lx[r] = std::log(static_cast<double>(r + 1));
      ly[r] = std::log(static_cast<double>(observed[r]));
    }
    st.freq_tail_exponent = -detail::ls_slope(lx, ly);
  }
  return st;
}

// First ceil(train_fraction * N) queries become the training split.
inline std::pair<Trace, Trace> split_trace(const Trace& trace, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ParamError("split_trace: train_fraction must lie in (0, 1)");
  std::size_t n = trace.queries.size();
  std::size_t k = static_cast<std::size_t>(
      std::ceil(train_fraction * static_cast<double>(n)));
  if (k == 0 || k >= n)
    throw ParamError("split_trace: split leaves an empty side (" +
                     std::to_string(k) + " of " + std::to_string(n) + ")");
  Trace train{trace.num_items, {trace.queries.begin(), trace.queries.begin() + k}};
  Trace test{trace.num_items, {trace.queries.begin() + k, trace.queries.end()}};
  return {std::move(train), std::move(test)};
}

}  // namespace xbarsim
