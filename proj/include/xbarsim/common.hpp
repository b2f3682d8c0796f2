#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace xbarsim {

using ItemId = std::uint32_t;

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParamError : std::invalid_argument {
  explicit ParamError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic RNG wrapper. mt19937_64 output is pinned by the standard;
// the distributions below are hand-rolled so that a given seed produces the
// same stream on every platform (std:: distributions are
// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform double in [0, 1), 53 random bits
  double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return eng_() % n; }

 private:
  std::mt19937_64 eng_;
};

// Fisher-Yates shuffle of [0, n)
inline std::vector<ItemId> random_permutation(std::uint32_t n, Rng& rng) {
  std::vector<ItemId> perm(n);
  for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
  for (std::uint32_t i = n; i > 1; --i) {
    std::uint32_t j = static_cast<std::uint32_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

// Zipf sampler over ranks [0, n): P(r) proportional to (r+1)^-s.
// Inverse-CDF with binary search; table build is O(n), sampling O(log n).
class ZipfTable {
 public:
  ZipfTable() = default;
  ZipfTable(std::size_t n, double s) : cdf_(n) {
    if (n == 0) throw ParamError("zipf: empty support");
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      acc += std::pow(static_cast<double>(r + 1), -s);
      cdf_[r] = acc;
    }
    total_ = acc;
  }

  std::size_t size() const { return cdf_.size(); }

  std::size_t sample(Rng& rng) const {
    double u = rng.next_double() * total_;
    std::size_t lo = 0, hi = cdf_.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (cdf_[mid] <= u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

 private:
  std::vector<double> cdf_;
  double total_ = 0.0;
};

// Poisson draw via exponential inter-arrivals; O(mean) per draw and safe for
// any mean (no exp(-mean) underflow).
inline std::uint64_t poisson_draw(double mean, Rng& rng) {
  if (mean < 0) throw ParamError("poisson: negative mean");
  std::uint64_t k = 0;
  double acc = 0.0;
  for (;;) {
    acc += -std::log(1.0 - rng.next_double());
    if (acc >= mean) break;
    ++k;
  }
  return k;
}

// FNV-1a 64-bit, used for input fingerprints in experiment outputs.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace xbarsim
