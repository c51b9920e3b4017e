// bounds.hpp - closed-form sample-size calculators and concentration tails.
//
// Every bound returns the ceiling of its real-valued formula. Logarithms are
// natural throughout: the guarantees trace back to exp-form Chernoff
// inequalities, so e-based constants are the honest ones. Where a guarantee
// is only known up to a multiplicative constant, that constant is an explicit
// configurable field with a documented default, never a hidden fudge.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

namespace mcal {

/// Inputs to the sample-size calculators.
///
/// epsilon  - additive accuracy for calibration-error estimates
/// delta    - failure probability
/// gamma    - subpopulation mass threshold
/// psi      - conditional prediction-interval mass threshold
/// lambda   - prediction-interval width (finite-class mode)
/// card_*   - cardinalities of the subpopulation collection, predictor class
///            and prediction value set
/// d        - graph dimension of the predictor class (graph mode)
struct BoundParams {
  double epsilon = 0.05;
  double delta = 0.05;
  double gamma = 0.1;
  double psi = 0.1;
  double lambda = 0.1;
  std::uint64_t card_gamma = 1;
  std::uint64_t card_H = 1;
  std::uint64_t card_Y = 2;
  std::uint64_t d = 0;
  double c_graph = 64.0;  // constant for the graph-dimension bound (a choice, not derived)
  double c_fund = 8.0;    // constant for binary uniform convergence (a choice, not derived)
  double c_lower = 1.0;   // constant for the lower-bound form (a choice, not derived)

  void validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!in_unit(epsilon) || !in_unit(delta) || !in_unit(gamma) || !in_unit(psi) ||
        !in_unit(lambda)) {
      throw std::invalid_argument("epsilon, delta, gamma, psi, lambda must lie in (0,1]");
    }
    if (card_gamma < 1 || card_H < 1 || card_Y < 1) {
      throw std::invalid_argument("cardinalities must be at least 1");
    }
    if (!(c_graph > 0.0) || !(c_fund > 0.0) || !(c_lower > 0.0)) {
      throw std::invalid_argument("constants must be positive");
    }
  }
};

/// A sample size, or the admission that the formula exceeded the 64-bit
/// count range ("astronomical") rather than a silently saturated number.
struct SampleSize {
  std::uint64_t value = 0;
  bool astronomical = false;

  friend bool operator==(const SampleSize&, const SampleSize&) = default;
};

namespace detail {

inline SampleSize ceil_to_count(double pre_ceiling) {
  // 2^63 as the cutoff: everything above is not a practicable sample size.
  if (!std::isfinite(pre_ceiling) || pre_ceiling >= 9.223372036854775e18) {
    return {0, true};
  }
  const double c = std::ceil(pre_ceiling);
  return {static_cast<std::uint64_t>(c < 0.0 ? 0.0 : c), false};
}

}  // namespace detail

/// Sample size after which, with probability at least 1-delta, every
/// predictor of a finite class has empirical and true calibration errors
/// within epsilon on all its interesting categories:
///   ceil( 8/(eps^2 * gamma * psi) * ln(8*|Gamma|*|H| / (delta*lambda)) ).
inline SampleSize finite_class_bound(const BoundParams& p) {
  p.validate();
  const double coeff = 8.0 / (p.epsilon * p.epsilon * p.gamma * p.psi);
  const double log_arg = 8.0 * static_cast<double>(p.card_gamma) *
                         static_cast<double>(p.card_H) / (p.delta * p.lambda);
  return detail::ceil_to_count(coeff * std::log(log_arg));
}

/// Same guarantee for a class with graph dimension at most d over a finite
/// prediction set:
///   ceil( C_graph * (d + ln(|Gamma|*|Y|/delta)) / (eps^2 * psi^2 * gamma) ).
/// C_graph defaults to 64; the true constant is not pinned by the analysis.
inline SampleSize graph_dim_bound(const BoundParams& p) {
  p.validate();
  const double num = static_cast<double>(p.d) +
                     std::log(static_cast<double>(p.card_gamma) *
                              static_cast<double>(p.card_Y) / p.delta);
  const double den = p.epsilon * p.epsilon * p.psi * p.psi * p.gamma;
  return detail::ceil_to_count(p.c_graph * num / den);
}

/// Sample size below which no procedure can have the uniform convergence
/// guarantee, up to the constant C_lower (default 1):
///   ceil( C_lower * ln(1/delta) / (psi * gamma * eps^2) ).
inline SampleSize lower_bound(const BoundParams& p) {
  p.validate();
  return detail::ceil_to_count(p.c_lower * std::log(1.0 / p.delta) /
                               (p.psi * p.gamma * p.epsilon * p.epsilon));
}

/// Sample size after which every subpopulation of mass >= gamma holds more
/// than gamma*m/2 sample points, with probability at least 1-delta:
///   ceil( (8/gamma) * ln(|Gamma|/delta) ).
inline SampleSize subpopulation_coverage_bound(double gamma, double delta,
                                               std::uint64_t card_gamma) {
  if (!(gamma > 0.0 && gamma < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("gamma and delta must lie in (0,1)");
  }
  if (card_gamma < 1) throw std::invalid_argument("card_gamma must be at least 1");
  return detail::ceil_to_count((8.0 / gamma) *
                               std::log(static_cast<double>(card_gamma) / delta));
}

/// Two-sided tail bound for the mean of n i.i.d. {0,1} variables deviating
/// from its expectation by at least epsilon: min(1, 2*exp(-2*eps^2*n)).
inline double chernoff_absolute_tail(std::uint64_t n, double epsilon) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  return std::min(1.0, 2.0 * std::exp(-2.0 * epsilon * epsilon * static_cast<double>(n)));
}

/// Lower-tail bound for a sum X of i.i.d. {0,1} variables:
/// Pr[X <= (1-eps)E[X]] <= exp(-eps^2 E[X] / 2).
inline double chernoff_relative_tail(double expectation, double epsilon) {
  if (!(expectation >= 0.0)) throw std::invalid_argument("expectation must be nonnegative");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
  return std::exp(-epsilon * epsilon * expectation / 2.0);
}

/// Sample size for uniform convergence of positive-prediction frequencies
/// over a binary class of VC dimension at most d:
///   ceil( C_fund * (d + ln(1/delta)) / eps^2 ), C_fund default 8.
inline SampleSize binary_uc_bound(std::uint64_t d, double epsilon, double delta,
                                  double c_fund = 8.0) {
  if (!(epsilon > 0.0 && epsilon <= 1.0) || !(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("epsilon and delta must lie in (0,1]");
  }
  if (!(c_fund > 0.0)) throw std::invalid_argument("c_fund must be positive");
  return detail::ceil_to_count(c_fund * (static_cast<double>(d) + std::log(1.0 / delta)) /
                               (epsilon * epsilon));
}

/// Per-category occupancy needed for the finite-class guarantee; a
/// diagnostic readout for trial reports, not a contract:
///   (2/eps^2) * ln(8*|Gamma|*|H| / (delta*lambda)).
inline double category_occupancy_threshold(const BoundParams& p) {
  p.validate();
  return (2.0 / (p.epsilon * p.epsilon)) *
         std::log(8.0 * static_cast<double>(p.card_gamma) * static_cast<double>(p.card_H) /
                  (p.delta * p.lambda));
}

enum class BoundMode { kFiniteClass, kGraphDimension };

/// Smallest epsilon whose selected bound fits within m samples, or nullopt
/// when even epsilon = 1 needs more than m. Closed-form inversion in finite
/// mode (exact up to a float ulp), bisection to 1e-9 in graph mode.
inline std::optional<double> achievable_epsilon(std::uint64_t m, BoundParams p, BoundMode mode) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  p.validate();

  auto bound_at = [&](double eps) {
    BoundParams q = p;
    q.epsilon = eps;
    return mode == BoundMode::kFiniteClass ? finite_class_bound(q) : graph_dim_bound(q);
  };
  auto feasible = [&](double eps) {
    const SampleSize s = bound_at(eps);
    return !s.astronomical && s.value <= m;
  };

  if (!feasible(1.0)) return std::nullopt;

  if (mode == BoundMode::kFiniteClass) {
    const double log_arg = 8.0 * static_cast<double>(p.card_gamma) *
                           static_cast<double>(p.card_H) / (p.delta * p.lambda);
    double eps = std::sqrt(8.0 * std::log(log_arg) /
                           (p.gamma * p.psi * static_cast<double>(m)));
    if (eps > 1.0) eps = 1.0;
    // The analytic root can sit one ulp on the wrong side of the ceiling.
    for (int i = 0; i < 8 && !feasible(eps); ++i) {
      eps = std::nextafter(eps, 2.0);
    }
    for (int i = 0; i < 8; ++i) {
      const double down = std::nextafter(eps, 0.0);
      if (down <= 0.0 || !feasible(down)) break;
      eps = down;
    }
    return eps;
  }

  double lo = 0.0, hi = 1.0;  // predicate is monotone: infeasible at lo, feasible at hi
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace mcal
