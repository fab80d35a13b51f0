#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "nhcsr/error.hpp"

namespace nhcsr {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from (master, label, index). All
// randomness in the project is keyed this way so that parallel workers and
// resumed runs draw exactly the values a serial, uninterrupted run would.
inline uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t index = 0) {
  uint64_t s = master;
  splitmix64(s);
  for (char c : label) {
    s ^= static_cast<uint64_t>(static_cast<unsigned char>(c));
    splitmix64(s);
  }
  s ^= index;
  uint64_t t = s;
  return splitmix64(t);
}

// mt19937_64 with hand-rolled distributions. The engine's output sequence is
// fixed by the C++ standard; std::uniform_*_distribution is not, so we avoid
// it to keep artifacts byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Unbiased integer in [0, n) by rejection sampling.
  uint64_t below(uint64_t n) {
    if (n == 0) throw ContractError("Rng::below: n must be positive");
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // k distinct indices from [0, n), by partial Fisher-Yates. Order is part of
  // the contract (tests rely on determinism, not sortedness).
  std::vector<int> sample_without_replacement(int n, int k) {
    if (k > n || k < 0) throw ContractError("sample_without_replacement: k out of range");
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
      int j = i + static_cast<int>(below(static_cast<uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace nhcsr
