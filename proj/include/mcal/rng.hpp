// rng.hpp - seeded, cross-platform-deterministic random generation.
//
// The generator is SplitMix64 (Steele, Lea & Flood's mix function): a tiny
// counter-based PRNG whose output stream depends only on the 64-bit seed,
// with no platform- or libc-dependent behavior. All Monte Carlo machinery in
// the library draws exclusively from it, so any result is reproducible
// bit-for-bit from its seed. Independent per-trial streams are derived with
// derive_stream_seed(master, index).

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mcal/core.hpp"

namespace mcal {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0,n). Fixed-point multiply; the O(n/2^64) bias is
  /// far below anything observable here.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return next_unit() < p; }

 private:
  std::uint64_t state_;
};

/// Seed for stream `index` under `master`: one SplitMix64 step from
/// master + (index+1)*golden, so consecutive indices give decorrelated,
/// individually reproducible streams.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Draws indices proportionally to a fixed weight vector in O(1) per draw
/// (Vose's alias method). Construction is deterministic: stacks are filled
/// in index order.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("sampler needs at least one weight");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("weights must not all be zero");

    accept_.assign(n, 1.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / total;

    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      const std::uint32_t l = large.back();
      small.pop_back();
      accept_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    // Numerical leftovers on either stack get acceptance one.
    for (std::uint32_t i : large) accept_[i] = 1.0;
    for (std::uint32_t i : small) accept_[i] = 1.0;
  }

  std::size_t size() const { return accept_.size(); }

  std::size_t draw(SplitMix64& rng) const {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(accept_.size()));
    return rng.next_unit() < accept_[j] ? j : alias_[j];
  }

 private:
  std::vector<double> accept_;
  std::vector<std::uint32_t> alias_;
};

/// m i.i.d. draws from D. Pure in (D, m, seed): equal inputs give
/// bit-identical samples.
inline LabeledSample draw_sample(const FiniteDistribution& d, std::size_t m, std::uint64_t seed) {
  std::vector<double> weights;
  weights.reserve(d.support_size());
  for (const auto& e : d.support()) weights.push_back(e.probability);
  const CategoricalSampler sampler(weights);
  SplitMix64 rng(seed);

  std::vector<LabeledItem> items;
  items.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& e = d.support()[sampler.draw(rng)];
    items.push_back({e.point, e.label});
  }
  return LabeledSample(std::move(items));
}

/// Tally of m i.i.d. draws from D, as counts per support entry. Consumes the
/// same RNG stream as materializing the draws one by one.
inline std::vector<std::uint64_t> draw_support_counts(const CategoricalSampler& sampler,
                                                      std::size_t m, SplitMix64& rng) {
  std::vector<std::uint64_t> counts(sampler.size(), 0);
  for (std::size_t i = 0; i < m; ++i) ++counts[sampler.draw(rng)];
  return counts;
}

}  // namespace mcal
