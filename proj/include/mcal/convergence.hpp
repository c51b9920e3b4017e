// convergence.hpp - seeded Monte Carlo checks of uniform convergence, the
// fraction-approximation inequality, and the two-coin lower-bound experiment.
//
// Every experiment is a pure function of its inputs and a 64-bit master
// seed; per-trial streams come from derive_stream_seed(master, trial), so a
// single trial can be reproduced in isolation and results do not depend on
// scheduling.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcal/calibration.hpp"
#include "mcal/core.hpp"
#include "mcal/rng.hpp"

namespace mcal {

struct WorstCategory {
  std::string predictor;
  std::string group;
  Interval interval;
};

/// One trial's supremum of |empirical - true| calibration error over every
/// predictor and every category interesting under the true distribution.
/// sup_deviation is +infinity iff some interesting category caught no sample
/// points (empty_interesting_count says how many).
struct TrialOutcome {
  double sup_deviation = 0.0;
  std::optional<WorstCategory> worst;
  std::uint64_t empty_interesting_count = 0;
  std::uint64_t m = 0;
  std::uint64_t seed = 0;
};

namespace detail {

struct InterestingCell {
  std::size_t group = 0;
  std::size_t interval = 0;
  double exact_error = 0.0;
};

struct PredictorPlan {
  std::string name;
  std::vector<std::size_t> interval_of_entry;  // per support entry
  std::vector<double> value_of_entry;
  std::vector<InterestingCell> cells;          // in (group, interval) order
  std::vector<std::int32_t> slot_of_cell;      // (g * n_intervals + iv) -> slot or -1
};

// Everything about (D, H, Gamma, Lambda, gamma, psi) that trials reuse:
// per-predictor interesting categories with their exact errors, and the
// support-entry geometry needed to tally a drawn sample.
struct TrialPlan {
  std::vector<double> probs;
  std::vector<int> labels;
  std::vector<std::vector<std::size_t>> groups_of_entry;
  std::vector<PredictorPlan> predictors;
  std::size_t n_groups = 0;
  std::size_t n_intervals = 0;
  const SubpopulationCollection* groups = nullptr;
  const IntervalPartition* partition = nullptr;
  CategoricalSampler sampler;

  TrialPlan(const FiniteDistribution& d, const PredictorClass& hs,
            const SubpopulationCollection& groups_in, const IntervalPartition& partition_in,
            double gamma, double psi)
      : groups(&groups_in),
        partition(&partition_in),
        sampler([&] {
          std::vector<double> w;
          for (const auto& e : d.support()) w.push_back(e.probability);
          return CategoricalSampler(w);
        }()) {
    check_thresholds(gamma, psi);
    n_groups = groups_in.size();
    n_intervals = partition_in.size();
    for (const auto& e : d.support()) {
      probs.push_back(e.probability);
      labels.push_back(e.label);
      std::vector<std::size_t> gs;
      for (std::size_t g = 0; g < n_groups; ++g) {
        if (groups_in[g].contains(e.point)) gs.push_back(g);
      }
      groups_of_entry.push_back(std::move(gs));
    }
    for (const auto& h : hs) {
      PredictorPlan pp;
      pp.name = h.name();
      for (const auto& e : d.support()) {
        const double hv = h(e.point);
        pp.value_of_entry.push_back(hv);
        pp.interval_of_entry.push_back(partition_in.index_of(hv));
      }
      const CategoryTable table = tabulate(h, groups_in, partition_in, d);
      pp.slot_of_cell.assign(n_groups * n_intervals, -1);
      for (std::size_t g = 0; g < n_groups; ++g) {
        for (std::size_t iv = 0; iv < n_intervals; ++iv) {
          if (!table.interesting_at(g, iv, gamma, psi)) continue;
          // Interesting implies positive joint mass, so the error is defined.
          const auto err = table.error_at(g, iv);
          pp.slot_of_cell[g * n_intervals + iv] =
              static_cast<std::int32_t>(pp.cells.size());
          pp.cells.push_back({g, iv, *err});
        }
      }
      predictors.push_back(std::move(pp));
    }
  }

  TrialOutcome evaluate(const std::vector<std::uint64_t>& counts) const {
    TrialOutcome out;
    std::vector<std::uint64_t> n_hat, y_sum;
    std::vector<double> h_sum;
    for (const auto& pp : predictors) {
      n_hat.assign(pp.cells.size(), 0);
      y_sum.assign(pp.cells.size(), 0);
      h_sum.assign(pp.cells.size(), 0.0);
      for (std::size_t k = 0; k < counts.size(); ++k) {
        const std::uint64_t c = counts[k];
        if (c == 0) continue;
        const std::size_t iv = pp.interval_of_entry[k];
        for (std::size_t g : groups_of_entry[k]) {
          const std::int32_t slot = pp.slot_of_cell[g * n_intervals + iv];
          if (slot < 0) continue;
          n_hat[slot] += c;
          y_sum[slot] += c * static_cast<std::uint64_t>(labels[k]);
          h_sum[slot] += static_cast<double>(c) * pp.value_of_entry[k];
        }
      }
      for (std::size_t s = 0; s < pp.cells.size(); ++s) {
        double dev;
        if (n_hat[s] == 0) {
          ++out.empty_interesting_count;
          dev = std::numeric_limits<double>::infinity();
        } else {
          const double dn = static_cast<double>(n_hat[s]);
          const double emp = static_cast<double>(y_sum[s]) / dn - h_sum[s] / dn;
          dev = std::abs(emp - pp.cells[s].exact_error);
        }
        if (!out.worst.has_value() || dev > out.sup_deviation) {
          out.sup_deviation = dev;
          out.worst = WorstCategory{pp.name, (*groups)[pp.cells[s].group].name(),
                                    (*partition)[pp.cells[s].interval]};
        }
      }
    }
    if (!out.worst.has_value()) out.sup_deviation = 0.0;  // no interesting categories
    return out;
  }
};

}  // namespace detail

/// Supremum deviation of a concrete sample: over all h and all categories
/// interesting under D, |empirical error on s - exact error under D|.
inline TrialOutcome deviation_of_sample(const FiniteDistribution& d, const PredictorClass& hs,
                                        const SubpopulationCollection& groups,
                                        const IntervalPartition& partition, double gamma,
                                        double psi, const LabeledSample& s) {
  TrialOutcome out;
  out.m = s.size();
  for (const auto& h : hs) {
    const auto exact = detail::tabulate(h, groups, partition, d);
    const auto empirical = detail::tabulate(h, groups, partition, s);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (std::size_t iv = 0; iv < partition.size(); ++iv) {
        if (!exact.interesting_at(g, iv, gamma, psi)) continue;
        const auto true_err = exact.error_at(g, iv);
        const auto emp_err = empirical.error_at(g, iv);
        double dev;
        if (!emp_err.has_value()) {
          ++out.empty_interesting_count;
          dev = std::numeric_limits<double>::infinity();
        } else {
          dev = std::abs(*emp_err - *true_err);
        }
        if (!out.worst.has_value() || dev > out.sup_deviation) {
          out.sup_deviation = dev;
          out.worst = WorstCategory{h.name(), groups[g].name(), partition[iv]};
        }
      }
    }
  }
  return out;
}

/// Draws S ~ D^m with the given seed and returns its supremum deviation.
inline TrialOutcome deviation_trial(const FiniteDistribution& d, const PredictorClass& hs,
                                    const SubpopulationCollection& groups,
                                    const IntervalPartition& partition, double gamma, double psi,
                                    std::size_t m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  const detail::TrialPlan plan(d, hs, groups, partition, gamma, psi);
  SplitMix64 rng(seed);
  TrialOutcome out = plan.evaluate(draw_support_counts(plan.sampler, m, rng));
  out.m = m;
  out.seed = seed;
  return out;
}

/// `trials` independent deviation trials with per-trial seeds derived from
/// the master seed.
inline std::vector<TrialOutcome> run_deviation_trials(
    const FiniteDistribution& d, const PredictorClass& hs, const SubpopulationCollection& groups,
    const IntervalPartition& partition, double gamma, double psi, std::size_t m,
    std::size_t trials, std::uint64_t master_seed) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  const detail::TrialPlan plan(d, hs, groups, partition, gamma, psi);
  std::vector<TrialOutcome> outcomes;
  outcomes.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t seed = derive_stream_seed(master_seed, t);
    SplitMix64 rng(seed);
    TrialOutcome out = plan.evaluate(draw_support_counts(plan.sampler, m, rng));
    out.m = m;
    out.seed = seed;
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

/// Fraction of trials whose supremum deviation exceeds epsilon (an empty
/// interesting category counts as infinite deviation, hence a failure).
inline double failure_rate(const FiniteDistribution& d, const PredictorClass& hs,
                           const SubpopulationCollection& groups,
                           const IntervalPartition& partition, double gamma, double psi,
                           std::size_t m, double epsilon, std::size_t trials,
                           std::uint64_t master_seed) {
  const auto outcomes =
      run_deviation_trials(d, hs, groups, partition, gamma, psi, m, trials, master_seed);
  std::size_t failures = 0;
  for (const auto& o : outcomes) {
    if (o.sup_deviation > epsilon) ++failures;
  }
  return static_cast<double>(failures) / static_cast<double>(trials);
}

// ---------------------------------------------------------------------------
// Two-coin lower-bound fixture

/// A three-point instance on which estimating one conditional mean to within
/// 2*epsilon is exactly the problem of distinguishing two biased coins.
/// d1 and d2 differ only in how the labels of x0 split; the single predictor
/// scores x0 at 0.5+epsilon and everything else at 0.
struct LowerBoundFixture {
  Domain domain;
  DomainPoint x0, x1, x2;
  FiniteDistribution d1;
  FiniteDistribution d2;
  PredictorClass predictors;
  SubpopulationCollection groups;
  PredictionSpace space;
  IntervalPartition partition;
  double epsilon = 0.0;
  double gamma = 0.0;
  double psi = 0.0;
  double v = 0.0;  // 0.5 + epsilon, the distinguished prediction value
};

/// Builds the fixture. Masses follow (0.5+eps)*psi*gamma, (0.5-eps)*psi*gamma,
/// (1-psi)*gamma, 1-gamma, with zero-mass entries elided; the x0 masses are
/// nudged by a few ulps so that the computed Pr[x in U] and
/// Pr[h(x)=v | x in U] hit gamma and psi exactly under float summation,
/// keeping the >= threshold semantics honest at the boundary.
inline LowerBoundFixture build_lower_bound_fixture(double epsilon, double gamma, double psi) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("epsilon must lie in (0, 0.5)");
  }
  if (!(gamma > 0.0 && gamma <= 1.0) || !(psi > 0.0 && psi <= 1.0)) {
    throw std::invalid_argument("gamma and psi must lie in (0,1]");
  }

  const double v = 0.5 + epsilon;

  // x0 carries mass J = psi*gamma; x1 carries gamma - J. Pick J and m1 such
  // that float sums reproduce gamma and J/gamma >= psi exactly.
  double joint = psi * gamma;
  double m1 = 0.0;
  bool settled = false;
  for (int attempt = 0; attempt < 64 && !settled; ++attempt) {
    if (psi == 1.0) {
      joint = gamma;
      m1 = 0.0;
      settled = true;
      break;
    }
    m1 = gamma - joint;
    for (int step = 0; step < 9; ++step) {
      const int offset = (step + 1) / 2 * ((step % 2) ? 1 : -1);  // 0,+1,-1,+2,-2,...
      double candidate = gamma - joint;
      for (int i = 0; i < offset; ++i) candidate = std::nextafter(candidate, 2.0);
      for (int i = 0; i > offset; --i) candidate = std::nextafter(candidate, 0.0);
      if (candidate > 0.0 && joint + candidate == gamma) {
        m1 = candidate;
        break;
      }
    }
    if (joint + m1 == gamma && joint / gamma >= psi) {
      settled = true;
    } else {
      joint = std::nextafter(joint, 1.0);
    }
  }
  if (!settled) throw std::logic_error("fixture mass fixup failed to converge");

  const double m00 = joint * v;       // (x0, 1) under d1
  const double m01 = joint - m00;     // exact: m00 lies in [joint/2, joint]
  const double m2 = gamma < 1.0 ? 1.0 - gamma : 0.0;
  if (!(m00 > 0.0 && m01 > 0.0)) throw std::logic_error("degenerate x0 label split");

  Domain domain = Domain::of_size(3, "x");
  const DomainPoint x0 = domain.at(0), x1 = domain.at(1), x2 = domain.at(2);

  auto make_dist = [&](double pos_mass, double neg_mass) {
    std::vector<WeightedOutcome> rows;
    rows.push_back({x0, 1, pos_mass});
    rows.push_back({x0, 0, neg_mass});
    if (m1 > 0.0) rows.push_back({x1, 0, m1});
    if (m2 > 0.0) rows.push_back({x2, 0, m2});
    return FiniteDistribution(std::move(rows));
  };

  std::vector<double> values{0.0, v};
  PredictionSpace space = PredictionSpace::finite(values);

  std::vector<DomainPoint> u_members{x0, x1};
  std::vector<DomainPoint> rest{x2};

  LowerBoundFixture fx{
      std::move(domain),
      x0,
      x1,
      x2,
      make_dist(m00, m01),
      make_dist(m01, m00),
      PredictorClass({Predictor("h", {v, 0.0, 0.0})}),
      SubpopulationCollection({Subpopulation::of("U", 3, u_members),
                               Subpopulation::of("x2", 3, rest)}),
      space,
      partition_of(space),
      epsilon,
      gamma,
      psi,
      v,
  };
  return fx;
}

/// Accuracy of the natural distinguishing rule over seeded trials: nature
/// picks d1 or d2 uniformly, the rule sees m draws and answers d1 iff the
/// empirical positive fraction at x0 exceeds 1/2. Ties and an empty x0 cell
/// resolve by a seeded fair coin.
inline double distinguishing_experiment(const LowerBoundFixture& fx, std::size_t m,
                                        std::size_t trials, std::uint64_t master_seed) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");

  auto weights_of = [](const FiniteDistribution& d) {
    std::vector<double> w;
    for (const auto& e : d.support()) w.push_back(e.probability);
    return w;
  };
  const CategoricalSampler sampler1(weights_of(fx.d1));
  const CategoricalSampler sampler2(weights_of(fx.d2));
  // Support order is fixed by construction: entry 0 is (x0,1), entry 1 is (x0,0).

  std::size_t correct = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    SplitMix64 rng(derive_stream_seed(master_seed, t));
    const bool nature_is_d1 = rng.next_unit() < 0.5;
    const auto counts =
        draw_support_counts(nature_is_d1 ? sampler1 : sampler2, m, rng);
    const std::uint64_t positives = counts[0];
    const std::uint64_t occupancy = counts[0] + counts[1];
    bool guess_d1;
    if (occupancy == 0 || 2 * positives == occupancy) {
      guess_d1 = rng.next_unit() < 0.5;
    } else {
      guess_d1 = 2 * positives > occupancy;
    }
    if (guess_d1 == nature_is_d1) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(trials);
}

// ---------------------------------------------------------------------------
// Fraction approximation check

/// Outcome of checking |p1/p2 - q1/q2| <= epsilon under the premises
/// p1 <= p2, psi <= p2 and both |p1-q1|, |p2-q2| <= psi*epsilon/3.
struct FractionErrorCheck {
  bool premises_hold = false;
  bool conclusion_holds = false;  // meaningful only when premises_hold

  /// Vacuously true when the premises are unmet.
  bool passed() const { return !premises_hold || conclusion_holds; }
};

inline FractionErrorCheck fraction_error_check(double p1, double p2, double q1, double q2,
                                               double psi, double epsilon) {
  for (double x : {p1, p2, q1, q2, psi, epsilon}) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("all inputs must lie in [0,1]");
  }
  FractionErrorCheck out;
  const double slack = psi * epsilon / 3.0;
  out.premises_hold = p1 <= p2 && psi <= p2 && std::abs(p1 - q1) <= slack &&
                      std::abs(p2 - q2) <= slack;
  // A zero-mass denominator only survives the premises when psi = 0; the
  // ratio is meaningless there, so treat it as an unmet premise.
  if (out.premises_hold && !(q2 > 0.0 && p2 > 0.0)) out.premises_hold = false;
  if (out.premises_hold) {
    out.conclusion_holds = std::abs(p1 / p2 - q1 / q2) <= epsilon;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Numerator / denominator frequency check

/// Per-trial uniform deviations, over a predictor class, of the two
/// frequencies behind a conditional calibration error: Pr[h(x)=v] and
/// Pr[h(x)=v, y=1] under the distribution conditioned on a subpopulation.
struct NumDenomReport {
  std::size_t trials = 0;
  std::size_t failures = 0;          // trials where some h deviates beyond epsilon
  double failure_fraction = 0.0;
  double max_value_freq_error = 0.0;     // worst |freq(h=v) - Pr[h=v]| seen
  double max_positive_freq_error = 0.0;  // worst |freq(h=v, y=1) - Pr[h=v, y=1]| seen
};

inline NumDenomReport numerator_denominator_check(const PredictorClass& hs,
                                                  const Subpopulation& group, double v,
                                                  const FiniteDistribution& d, std::size_t m,
                                                  double epsilon, std::size_t trials,
                                                  std::uint64_t master_seed) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  constexpr std::size_t kMaxClassSize = 4096;
  if (hs.size() > kMaxClassSize) {
    throw LimitExceeded("numerator_denominator_check: class size exceeds " +
                        std::to_string(kMaxClassSize));
  }

  const FiniteDistribution cond = d.conditional_on(group);  // throws EmptySubpopulation
  const std::size_t n_entries = cond.support_size();

  std::vector<double> weights;
  for (const auto& e : cond.support()) weights.push_back(e.probability);
  const CategoricalSampler sampler(weights);

  struct PerPredictor {
    std::vector<std::uint8_t> is_v;
    std::vector<std::uint8_t> is_v_pos;
    double true_value_freq = 0.0;
    double true_positive_freq = 0.0;
  };
  std::vector<PerPredictor> per;
  for (const auto& h : hs) {
    PerPredictor pp;
    pp.is_v.resize(n_entries);
    pp.is_v_pos.resize(n_entries);
    for (std::size_t k = 0; k < n_entries; ++k) {
      const auto& e = cond.support()[k];
      const bool hit = h(e.point) == v;
      pp.is_v[k] = hit ? 1 : 0;
      pp.is_v_pos[k] = (hit && e.label == 1) ? 1 : 0;
      if (hit) pp.true_value_freq += e.probability;
      if (pp.is_v_pos[k]) pp.true_positive_freq += e.probability;
    }
    per.push_back(std::move(pp));
  }

  NumDenomReport report;
  report.trials = trials;
  const double dm = static_cast<double>(m);
  for (std::size_t t = 0; t < trials; ++t) {
    SplitMix64 rng(derive_stream_seed(master_seed, t));
    const auto counts = draw_support_counts(sampler, m, rng);
    bool failed = false;
    for (const auto& pp : per) {
      std::uint64_t hit = 0, hit_pos = 0;
      for (std::size_t k = 0; k < n_entries; ++k) {
        if (pp.is_v[k]) hit += counts[k];
        if (pp.is_v_pos[k]) hit_pos += counts[k];
      }
      const double dev_value = std::abs(static_cast<double>(hit) / dm - pp.true_value_freq);
      const double dev_pos =
          std::abs(static_cast<double>(hit_pos) / dm - pp.true_positive_freq);
      report.max_value_freq_error = std::max(report.max_value_freq_error, dev_value);
      report.max_positive_freq_error = std::max(report.max_positive_freq_error, dev_pos);
      if (dev_value > epsilon || dev_pos > epsilon) failed = true;
    }
    if (failed) ++report.failures;
  }
  report.failure_fraction = static_cast<double>(report.failures) / static_cast<double>(trials);
  return report;
}

}  // namespace mcal
