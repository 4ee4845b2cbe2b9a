#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace sigrec {

// SplitMix64 finalizer. Used to spread structured seeds (base + trial index)
// into unrelated stream seeds, and to derive the mask stream from the noise
// stream so undersampling patterns do not correlate with the noise draws.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic random stream. std::mt19937_64 has a pinned algorithm, but
// the <random> distributions are implementation defined, so every transform
// from raw bits to samples is written out here and must never change: results
// are compared byte for byte across machines.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  // uniform on [0, 1), 53 random bits
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller; the second member of each pair is cached
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // in (0, 1], keeps the log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // uniform integer on [0, m); rejection removes the modulo bias.
  // (-m) % m in 64-bit arithmetic is 2^64 mod m, so the accepted range
  // [threshold, 2^64) has size divisible by m.
  std::uint64_t below(std::uint64_t m) {
    if (m == 0) throw std::invalid_argument("RandomStream::below: m must be positive");
    const std::uint64_t threshold = (-m) % m;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x < threshold);
    return x % m;
  }

  // k distinct values from {0, ..., n-1}, returned ascending. Partial
  // Fisher-Yates, consumes exactly k accepted integer draws.
  std::vector<int> sample_without_replacement(int n, int k) {
    if (n < 0 || k < 0 || k > n)
      throw std::invalid_argument("sample_without_replacement: need 0 <= k <= n");
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sigrec
