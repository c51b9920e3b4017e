// Independent shattering searches used as oracles in tests: no behavior
// deduplication, no candidate pruning, no early termination by size. Slow on
// purpose; keep instances small.
#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "mcal/core.hpp"
#include "mcal/dimension.hpp"

namespace testutil {

inline std::size_t naive_vc_dimension(std::span<const mcal::BinaryHypothesis> hyps,
                                      std::span<const mcal::DomainPoint> domain) {
  const std::size_t n = domain.size();
  std::size_t best = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> pts;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) pts.push_back(i);
    }
    const std::size_t k = pts.size();
    std::set<std::vector<int>> patterns;
    for (const auto& h : hyps) {
      std::vector<int> pat;
      for (std::size_t p : pts) pat.push_back(h(domain[p]));
      patterns.insert(pat);
    }
    if (patterns.size() == (std::size_t{1} << k) && k > best) best = k;
  }
  return best;
}

inline std::size_t naive_graph_dimension(const mcal::PredictorClass& hs,
                                         std::span<const mcal::DomainPoint> domain,
                                         std::span<const double> values) {
  const std::size_t n = domain.size();
  std::size_t best = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> pts;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) pts.push_back(i);
    }
    const std::size_t k = pts.size();
    if (k == 0) continue;

    // All witness functions f : S -> Y, unpruned.
    std::vector<std::size_t> f(k, 0);
    bool shattered = false;
    while (!shattered) {
      bool all_subsets_realized = true;
      for (std::size_t t = 0; t < (std::size_t{1} << k) && all_subsets_realized; ++t) {
        bool found = false;
        for (const auto& h : hs) {
          bool matches = true;
          for (std::size_t i = 0; i < k && matches; ++i) {
            const bool agrees = h(domain[pts[i]]) == values[f[i]];
            const bool wanted = (t & (std::size_t{1} << i)) != 0;
            matches = agrees == wanted;
          }
          if (matches) {
            found = true;
            break;
          }
        }
        if (!found) all_subsets_realized = false;
      }
      if (all_subsets_realized) {
        shattered = true;
        break;
      }
      std::size_t pos = 0;
      while (pos < k && ++f[pos] == values.size()) {
        f[pos] = 0;
        ++pos;
      }
      if (pos == k) break;
    }
    if (shattered && k > best) best = k;
  }
  return best;
}

}  // namespace testutil
