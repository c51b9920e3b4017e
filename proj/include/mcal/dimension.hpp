// dimension.hpp - binarizations and exact shattering searches.
//
// vc_dimension and graph_dimension are exhaustive searches meant for small
// instances: the library needs exact dimensions as premises for its sample
// bounds, so exactness at small scale wins over heuristics at large scale.
// Hard input-size limits guard against accidental blowups; both searches
// deduplicate behaviors first and stop at the first size with no shattered
// subset (shattering is closed under taking subsets, so that is the answer).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcal/core.hpp"

namespace mcal {

/// A total map from domain points to {0,1}. Provenance records the predictor
/// and value it was thresholded from, or "raw".
struct BinaryHypothesis {
  std::vector<std::uint8_t> table;
  std::string provenance = "raw";

  int operator()(DomainPoint x) const { return table.at(x.index) != 0 ? 1 : 0; }
  std::size_t domain_size() const { return table.size(); }
};

/// Indicator of (h_v(x) = 1 and y = 1): the true-positive pattern of a
/// binary hypothesis over (point, outcome) pairs. Output 1 forces y = 1.
class TruePositiveFunction {
 public:
  explicit TruePositiveFunction(const BinaryHypothesis& source)
      : base_(source.table), provenance_(source.provenance) {}

  int operator()(DomainPoint x, int y) const {
    return (base_.at(x.index) != 0 && y == 1) ? 1 : 0;
  }
  std::size_t domain_size() const { return base_.size(); }
  const std::string& provenance() const { return provenance_; }

 private:
  std::vector<std::uint8_t> base_;
  std::string provenance_;
};

/// h_v: outputs 1 iff h predicts exactly v.
inline BinaryHypothesis binarize(const Predictor& h, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("v must lie in [0,1]");
  BinaryHypothesis b;
  b.table.resize(h.domain_size());
  for (std::size_t i = 0; i < h.domain_size(); ++i) {
    b.table[i] = h.values()[i] == v ? 1 : 0;
  }
  b.provenance = h.name() + "@" + std::to_string(v);
  return b;
}

/// { h_v : h in H }, deduplicated by table equality (set semantics, first
/// occurrence kept).
inline std::vector<BinaryHypothesis> binarize_class(const PredictorClass& hs, double v) {
  std::vector<BinaryHypothesis> out;
  for (const auto& h : hs) {
    BinaryHypothesis b = binarize(h, v);
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const BinaryHypothesis& o) { return o.table == b.table; });
    if (!dup) out.push_back(std::move(b));
  }
  return out;
}

/// The true-positive class of a binary class, elementwise.
inline std::vector<TruePositiveFunction> true_positive_class(
    std::span<const BinaryHypothesis> hv) {
  std::vector<TruePositiveFunction> out;
  out.reserve(hv.size());
  for (const auto& b : hv) out.emplace_back(b);
  return out;
}

namespace detail {

// Exact VC dimension over behaviors given as bitmasks on n points (n <= 63).
// Assumes behaviors are deduplicated.
inline std::size_t vc_dimension_masks(const std::vector<std::uint64_t>& behaviors,
                                      std::size_t n) {
  if (behaviors.empty()) throw std::invalid_argument("class must be nonempty");
  // Need at least 2^k distinct behaviors to shatter k points.
  std::size_t max_k = n;
  while (max_k > 0 && behaviors.size() < (std::uint64_t{1} << max_k)) --max_k;

  std::size_t best = 0;
  std::vector<std::size_t> subset;
  std::vector<char> seen;
  for (std::size_t k = 1; k <= max_k; ++k) {
    bool any_shattered = false;
    subset.assign(k, 0);
    for (std::size_t i = 0; i < k; ++i) subset[i] = i;
    const std::size_t patterns = std::size_t{1} << k;
    while (true) {
      seen.assign(patterns, 0);
      std::size_t distinct = 0;
      for (std::uint64_t b : behaviors) {
        std::size_t pat = 0;
        for (std::size_t i = 0; i < k; ++i) pat |= ((b >> subset[i]) & 1u) << i;
        if (!seen[pat]) {
          seen[pat] = 1;
          if (++distinct == patterns) break;
        }
      }
      if (distinct == patterns) {
        any_shattered = true;
        break;
      }
      // next k-combination of {0..n-1}
      std::size_t i = k;
      while (i > 0 && subset[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++subset[i - 1];
      for (std::size_t j = i; j < k; ++j) subset[j] = subset[j - 1] + 1;
    }
    if (!any_shattered) return best;
    best = k;
  }
  return best;
}

inline std::vector<std::uint64_t> dedup_masks(std::vector<std::uint64_t> masks) {
  std::sort(masks.begin(), masks.end());
  masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
  return masks;
}

}  // namespace detail

/// Exact VC dimension of a binary class restricted to `domain`, by
/// exhaustive search. Throws LimitExceeded when |domain| > max_domain.
inline std::size_t vc_dimension(std::span<const BinaryHypothesis> hypotheses,
                                std::span<const DomainPoint> domain,
                                std::size_t max_domain = 20) {
  if (hypotheses.empty()) throw std::invalid_argument("class must be nonempty");
  if (domain.size() > max_domain) {
    throw LimitExceeded("vc_dimension: domain size " + std::to_string(domain.size()) +
                        " exceeds limit " + std::to_string(max_domain));
  }
  std::vector<std::uint64_t> masks;
  masks.reserve(hypotheses.size());
  for (const auto& h : hypotheses) {
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < domain.size(); ++i) {
      if (h(domain[i]) != 0) m |= std::uint64_t{1} << i;
    }
    masks.push_back(m);
  }
  return detail::vc_dimension_masks(detail::dedup_masks(std::move(masks)), domain.size());
}

/// Exact VC dimension of a true-positive class over the pair domain
/// `domain x {0,1}`. The limit applies to the flattened pair domain.
inline std::size_t vc_dimension_pairs(std::span<const TruePositiveFunction> phis,
                                      std::span<const DomainPoint> domain,
                                      std::size_t max_domain = 20) {
  if (phis.empty()) throw std::invalid_argument("class must be nonempty");
  if (2 * domain.size() > max_domain) {
    throw LimitExceeded("vc_dimension_pairs: pair domain size " +
                        std::to_string(2 * domain.size()) + " exceeds limit " +
                        std::to_string(max_domain));
  }
  std::vector<std::uint64_t> masks;
  masks.reserve(phis.size());
  for (const auto& phi : phis) {
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < domain.size(); ++i) {
      for (int y = 0; y <= 1; ++y) {
        if (phi(domain[i], y) != 0) m |= std::uint64_t{1} << (2 * i + y);
      }
    }
    masks.push_back(m);
  }
  return detail::vc_dimension_masks(detail::dedup_masks(std::move(masks)), 2 * domain.size());
}

/// Exact graph dimension of a multivalued class restricted to `domain`, by
/// exhaustive search over subsets and witness functions. Witness candidates
/// at each point are pruned to the values some predictor realizes there (a
/// never-realized value makes the full-agreement subset unreachable).
inline std::size_t graph_dimension(const PredictorClass& hs, std::span<const DomainPoint> domain,
                                   std::span<const double> values, std::size_t max_domain = 12,
                                   std::size_t max_values = 8) {
  if (domain.size() > max_domain) {
    throw LimitExceeded("graph_dimension: domain size " + std::to_string(domain.size()) +
                        " exceeds limit " + std::to_string(max_domain));
  }
  if (values.size() > max_values) {
    throw LimitExceeded("graph_dimension: value set size " + std::to_string(values.size()) +
                        " exceeds limit " + std::to_string(max_values));
  }
  const std::size_t n = domain.size();
  if (n == 0) return 0;

  // Behavior tables as value indices, deduplicated.
  std::vector<std::vector<std::uint8_t>> behaviors;
  for (const auto& h : hs) {
    std::vector<std::uint8_t> row(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double hv = h(domain[i]);
      auto it = std::find(values.begin(), values.end(), hv);
      if (it == values.end()) {
        throw std::invalid_argument("predictor '" + h.name() +
                                    "' emits a value outside the given value set");
      }
      row[i] = static_cast<std::uint8_t>(it - values.begin());
    }
    if (std::find(behaviors.begin(), behaviors.end(), row) == behaviors.end()) {
      behaviors.push_back(std::move(row));
    }
  }

  std::size_t max_k = n;
  while (max_k > 0 && behaviors.size() < (std::uint64_t{1} << max_k)) --max_k;

  std::size_t best = 0;
  for (std::size_t k = 1; k <= max_k; ++k) {
    bool any_shattered = false;
    std::vector<std::size_t> subset(k);
    for (std::size_t i = 0; i < k; ++i) subset[i] = i;
    const std::size_t patterns = std::size_t{1} << k;

    while (true) {
      // Realized value indices per chosen point.
      std::vector<std::vector<std::uint8_t>> candidates(k);
      for (std::size_t i = 0; i < k; ++i) {
        std::vector<std::uint8_t> vals;
        for (const auto& b : behaviors) {
          if (std::find(vals.begin(), vals.end(), b[subset[i]]) == vals.end()) {
            vals.push_back(b[subset[i]]);
          }
        }
        candidates[i] = std::move(vals);
      }

      // Odometer over witness functions f restricted to the candidates.
      std::vector<std::size_t> pick(k, 0);
      bool shattered_here = false;
      while (true) {
        std::vector<char> seen(patterns, 0);
        std::size_t distinct = 0;
        for (const auto& b : behaviors) {
          std::size_t agree = 0;
          for (std::size_t i = 0; i < k; ++i) {
            if (b[subset[i]] == candidates[i][pick[i]]) agree |= std::size_t{1} << i;
          }
          if (!seen[agree]) {
            seen[agree] = 1;
            if (++distinct == patterns) break;
          }
        }
        if (distinct == patterns) {
          shattered_here = true;
          break;
        }
        std::size_t pos = 0;
        while (pos < k && ++pick[pos] == candidates[pos].size()) {
          pick[pos] = 0;
          ++pos;
        }
        if (pos == k) break;
      }
      if (shattered_here) {
        any_shattered = true;
        break;
      }
      std::size_t i = k;
      while (i > 0 && subset[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++subset[i - 1];
      for (std::size_t j = i; j < k; ++j) subset[j] = subset[j - 1] + 1;
    }
    if (!any_shattered) return best;
    best = k;
  }
  return best;
}

/// Per-value VC dimensions of the binarized classes, against the graph
/// dimension of the multivalued class.
struct GraphLemmaReport {
  std::size_t graph_dim = 0;
  std::vector<std::pair<double, std::size_t>> vc_by_value;  // (v, VCdim(H_v))
  bool holds = true;  // every VCdim(H_v) <= graph_dim
};

inline GraphLemmaReport check_lemma_graph(const PredictorClass& hs,
                                          std::span<const DomainPoint> domain,
                                          std::span<const double> values,
                                          std::size_t max_domain = 12,
                                          std::size_t max_values = 8) {
  GraphLemmaReport report;
  report.graph_dim = graph_dimension(hs, domain, values, max_domain, max_values);
  for (double v : values) {
    const auto hv = binarize_class(hs, v);
    const std::size_t dim = vc_dimension(hv, domain, std::max<std::size_t>(max_domain, 20));
    report.vc_by_value.emplace_back(v, dim);
    if (dim > report.graph_dim) report.holds = false;
  }
  return report;
}

/// VC dimension of the true-positive class against the VC dimension of its
/// source binary class.
struct PhiLemmaReport {
  std::size_t vc_binary = 0;
  std::size_t vc_pairs = 0;
  bool holds = true;  // vc_pairs <= vc_binary
};

inline PhiLemmaReport check_lemma_phi(std::span<const BinaryHypothesis> hv,
                                      std::span<const DomainPoint> domain,
                                      std::size_t max_domain = 20) {
  PhiLemmaReport report;
  report.vc_binary = vc_dimension(hv, domain, max_domain);
  const auto phis = true_positive_class(hv);
  report.vc_pairs = vc_dimension_pairs(phis, domain, 2 * max_domain);
  report.holds = report.vc_pairs <= report.vc_binary;
  return report;
}

}  // namespace mcal
