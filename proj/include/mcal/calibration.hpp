// calibration.hpp - calibration errors, category statistics and audits.
//
// A category is a (subpopulation, prediction interval) pair. The calibration
// error of a predictor on a category is the conditional mean outcome minus
// the conditional mean prediction, taken over the members of the category.
// True quantities are computed exactly over a FiniteDistribution's support;
// empirical quantities are occupancy-weighted sample means. Threshold
// comparisons (>= gamma, >= psi, <= alpha) are exact float comparisons; no
// slack is added anywhere outside of tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcal/core.hpp"

namespace mcal {

enum class StatsSource { kExact, kEmpirical };

/// Masses, conditional means and occupancy of one category.
struct CategoryStats {
  double p_joint = 0.0;  // Pr[x in U, h(x) in I]          (or sample proportion)
  double p_group = 0.0;  // Pr[x in U]                      (or sample proportion)
  double p_cond = 0.0;   // Pr[h(x) in I | x in U]          (0 when the group has no mass)
  std::optional<double> mu_y;  // E[y | category]; empty when the category has no mass
  std::optional<double> mu_h;  // E[h(x) | category]
  std::uint64_t n_hat = 0;     // sample occupancy; 0 for exact sources
  StatsSource source = StatsSource::kExact;
};

/// Indices into a SubpopulationCollection and an IntervalPartition.
struct Category {
  std::size_t group_index = 0;
  std::size_t interval_index = 0;
  friend bool operator==(const Category&, const Category&) = default;
};

struct AuditOptions {
  double alpha = 0.05;
  double gamma = 0.1;
  double psi = 0.1;

  /// What to do with a category that is interesting but holds no sample
  /// points: count it as a violation (the guarantee it depends on failed), or
  /// exclude it as undefined.
  enum class EmptyInteresting { kViolation, kExclude };
  EmptyInteresting empty_interesting = EmptyInteresting::kViolation;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
    if (!(gamma > 0.0 && gamma <= 1.0) || !(psi > 0.0 && psi <= 1.0)) {
      throw std::invalid_argument("gamma and psi must lie in (0,1]");
    }
  }
};

struct AuditEntry {
  Category category;
  std::string group_name;
  Interval interval;
  CategoryStats stats;
  std::optional<double> calibration_error;
  bool interesting = false;
  bool violation = false;
  std::string note;  // nonempty only for special cases, e.g. "no occupancy"
};

/// Result of auditing one predictor over every (subpopulation, interval)
/// pair. verdict is true iff no interesting category violates.
struct AuditReport {
  std::string predictor;
  double alpha = 0.0;
  double gamma = 0.0;
  double psi = 0.0;
  std::optional<double> lambda;       // grid width when the partition is a grid
  StatsSource interest_source = StatsSource::kExact;  // which masses decided interestingness
  StatsSource error_source = StatsSource::kExact;     // which source the errors came from
  std::vector<AuditEntry> entries;
  std::size_t violation_count = 0;
  bool verdict = true;
};

namespace detail {

// Per-(group, interval) accumulation for one predictor, one pass over the
// source. Masses are probabilities (exact) or counts (empirical).
struct CategoryTable {
  std::size_t n_groups = 0;
  std::size_t n_intervals = 0;
  std::vector<double> group_mass;   // per group
  std::vector<double> cell_mass;    // per (group, interval)
  std::vector<double> cell_y;       // mass-weighted outcomes
  std::vector<double> cell_h;       // mass-weighted predictions
  std::vector<std::uint64_t> cell_count;  // raw occupancy (empirical sources)
  double total_mass = 0.0;          // 1 for exact sources, m for samples
  StatsSource source = StatsSource::kExact;

  std::size_t cell(std::size_t g, std::size_t iv) const { return g * n_intervals + iv; }

  CategoryStats stats_at(std::size_t g, std::size_t iv) const {
    CategoryStats s;
    s.source = source;
    const std::size_t c = cell(g, iv);
    s.p_group = total_mass > 0.0 ? group_mass[g] / total_mass : 0.0;
    s.p_joint = total_mass > 0.0 ? cell_mass[c] / total_mass : 0.0;
    s.p_cond = group_mass[g] > 0.0 ? cell_mass[c] / group_mass[g] : 0.0;
    s.n_hat = source == StatsSource::kEmpirical ? cell_count[c] : 0;
    if (cell_mass[c] > 0.0) {
      s.mu_y = cell_y[c] / cell_mass[c];
      s.mu_h = cell_h[c] / cell_mass[c];
    }
    return s;
  }

  std::optional<double> error_at(std::size_t g, std::size_t iv) const {
    const std::size_t c = cell(g, iv);
    if (!(cell_mass[c] > 0.0)) return std::nullopt;
    return cell_y[c] / cell_mass[c] - cell_h[c] / cell_mass[c];
  }

  bool interesting_at(std::size_t g, std::size_t iv, double gamma, double psi) const {
    if (total_mass <= 0.0) return false;
    const double p_group = group_mass[g] / total_mass;
    if (!(p_group >= gamma)) return false;
    const double p_cond = group_mass[g] > 0.0 ? cell_mass[cell(g, iv)] / group_mass[g] : 0.0;
    return p_cond >= psi;
  }
};

inline CategoryTable make_table(const SubpopulationCollection& groups,
                                const IntervalPartition& partition, StatsSource source) {
  CategoryTable t;
  t.n_groups = groups.size();
  t.n_intervals = partition.size();
  t.group_mass.assign(t.n_groups, 0.0);
  const std::size_t cells = t.n_groups * t.n_intervals;
  t.cell_mass.assign(cells, 0.0);
  t.cell_y.assign(cells, 0.0);
  t.cell_h.assign(cells, 0.0);
  t.cell_count.assign(cells, 0);
  t.source = source;
  return t;
}

inline CategoryTable tabulate(const Predictor& h, const SubpopulationCollection& groups,
                              const IntervalPartition& partition, const FiniteDistribution& d) {
  CategoryTable t = make_table(groups, partition, StatsSource::kExact);
  t.total_mass = 1.0;
  for (const auto& e : d.support()) {
    const double hv = h(e.point);
    const std::size_t iv = partition.index_of(hv);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (!groups[g].contains(e.point)) continue;
      t.group_mass[g] += e.probability;
      const std::size_t c = t.cell(g, iv);
      t.cell_mass[c] += e.probability;
      t.cell_y[c] += e.probability * static_cast<double>(e.label);
      t.cell_h[c] += e.probability * hv;
    }
  }
  return t;
}

inline CategoryTable tabulate(const Predictor& h, const SubpopulationCollection& groups,
                              const IntervalPartition& partition, const LabeledSample& s) {
  CategoryTable t = make_table(groups, partition, StatsSource::kEmpirical);
  t.total_mass = static_cast<double>(s.size());
  for (const auto& item : s) {
    const double hv = h(item.point);
    const std::size_t iv = partition.index_of(hv);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (!groups[g].contains(item.point)) continue;
      t.group_mass[g] += 1.0;
      const std::size_t c = t.cell(g, iv);
      t.cell_mass[c] += 1.0;
      t.cell_y[c] += static_cast<double>(item.label);
      t.cell_h[c] += hv;
      ++t.cell_count[c];
    }
  }
  return t;
}

}  // namespace detail

/// Exact calibration error of h on (U, I) under D:
/// E[y | x in U, h(x) in I] - E[h(x) | x in U, h(x) in I].
/// Empty when the conditioning event has probability zero.
inline std::optional<double> true_calibration_error(const Predictor& h, const Subpopulation& group,
                                                    const Interval& interval,
                                                    const FiniteDistribution& d) {
  double mass = 0.0, y_mass = 0.0, h_mass = 0.0;
  for (const auto& e : d.support()) {
    if (!group.contains(e.point)) continue;
    const double hv = h(e.point);
    if (!interval.contains(hv)) continue;
    mass += e.probability;
    y_mass += e.probability * static_cast<double>(e.label);
    h_mass += e.probability * hv;
  }
  if (!(mass > 0.0)) return std::nullopt;
  return y_mass / mass - h_mass / mass;
}

/// Empirical calibration error of h on (U, I) over sample S; empty when no
/// sample point lands in the category. For a singleton interval {v} this is
/// the fraction of positive outcomes minus v.
inline std::optional<double> empirical_calibration_error(const Predictor& h,
                                                         const Subpopulation& group,
                                                         const Interval& interval,
                                                         const LabeledSample& s) {
  std::uint64_t n = 0, y_count = 0;
  double h_sum = 0.0;
  for (const auto& item : s) {
    if (!group.contains(item.point)) continue;
    const double hv = h(item.point);
    if (!interval.contains(hv)) continue;
    ++n;
    y_count += static_cast<std::uint64_t>(item.label);
    h_sum += hv;
  }
  if (n == 0) return std::nullopt;
  const double dn = static_cast<double>(n);
  return static_cast<double>(y_count) / dn - h_sum / dn;
}

/// Exact masses and conditional means of one category under D.
inline CategoryStats category_stats(const Predictor& h, const Subpopulation& group,
                                    const Interval& interval, const FiniteDistribution& d) {
  CategoryStats s;
  s.source = StatsSource::kExact;
  double mass = 0.0, y_mass = 0.0, h_mass = 0.0;
  for (const auto& e : d.support()) {
    if (!group.contains(e.point)) continue;
    s.p_group += e.probability;
    const double hv = h(e.point);
    if (!interval.contains(hv)) continue;
    mass += e.probability;
    y_mass += e.probability * static_cast<double>(e.label);
    h_mass += e.probability * hv;
  }
  s.p_joint = mass;
  s.p_cond = s.p_group > 0.0 ? mass / s.p_group : 0.0;
  if (mass > 0.0) {
    s.mu_y = y_mass / mass;
    s.mu_h = h_mass / mass;
  }
  return s;
}

/// Sample counts and means of one category over S.
inline CategoryStats category_stats(const Predictor& h, const Subpopulation& group,
                                    const Interval& interval, const LabeledSample& s) {
  CategoryStats st;
  st.source = StatsSource::kEmpirical;
  std::uint64_t group_count = 0, y_count = 0;
  double h_sum = 0.0;
  for (const auto& item : s) {
    if (!group.contains(item.point)) continue;
    ++group_count;
    const double hv = h(item.point);
    if (!interval.contains(hv)) continue;
    ++st.n_hat;
    y_count += static_cast<std::uint64_t>(item.label);
    h_sum += hv;
  }
  const double m = static_cast<double>(s.size());
  st.p_group = m > 0.0 ? static_cast<double>(group_count) / m : 0.0;
  st.p_joint = m > 0.0 ? static_cast<double>(st.n_hat) / m : 0.0;
  st.p_cond = group_count > 0 ? static_cast<double>(st.n_hat) / static_cast<double>(group_count) : 0.0;
  if (st.n_hat > 0) {
    st.mu_y = static_cast<double>(y_count) / static_cast<double>(st.n_hat);
    st.mu_h = h_sum / static_cast<double>(st.n_hat);
  }
  return st;
}

namespace detail {

inline void check_thresholds(double gamma, double psi) {
  if (!(gamma > 0.0 && gamma <= 1.0) || !(psi > 0.0 && psi <= 1.0)) {
    throw std::invalid_argument("gamma and psi must lie in (0,1]");
  }
}

inline std::vector<Category> interesting_from(const CategoryTable& t, double gamma, double psi) {
  std::vector<Category> out;
  for (std::size_t g = 0; g < t.n_groups; ++g) {
    for (std::size_t iv = 0; iv < t.n_intervals; ++iv) {
      if (t.interesting_at(g, iv, gamma, psi)) out.push_back({g, iv});
    }
  }
  return out;
}

}  // namespace detail

/// Categories with Pr[x in U] >= gamma and Pr[h(x) in I | x in U] >= psi
/// under D, in (group order, interval order).
inline std::vector<Category> interesting_categories(const Predictor& h,
                                                    const SubpopulationCollection& groups,
                                                    const IntervalPartition& partition,
                                                    double gamma, double psi,
                                                    const FiniteDistribution& d) {
  detail::check_thresholds(gamma, psi);
  return detail::interesting_from(detail::tabulate(h, groups, partition, d), gamma, psi);
}

/// Same thresholds applied to empirical proportions of S.
inline std::vector<Category> interesting_categories(const Predictor& h,
                                                    const SubpopulationCollection& groups,
                                                    const IntervalPartition& partition,
                                                    double gamma, double psi,
                                                    const LabeledSample& s) {
  detail::check_thresholds(gamma, psi);
  return detail::interesting_from(detail::tabulate(h, groups, partition, s), gamma, psi);
}

namespace detail {

// interest decides which categories matter; measure supplies stats and
// errors. They are the same table except in the mixed audit.
inline AuditReport run_audit(const Predictor& h, const SubpopulationCollection& groups,
                             const IntervalPartition& partition, const AuditOptions& opt,
                             const CategoryTable& interest, const CategoryTable& measure) {
  opt.validate();
  AuditReport report;
  report.predictor = h.name();
  report.alpha = opt.alpha;
  report.gamma = opt.gamma;
  report.psi = opt.psi;
  report.lambda = partition.lambda();
  report.interest_source = interest.source;
  report.error_source = measure.source;

  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t iv = 0; iv < partition.size(); ++iv) {
      AuditEntry entry;
      entry.category = {g, iv};
      entry.group_name = groups[g].name();
      entry.interval = partition[iv];
      entry.stats = measure.stats_at(g, iv);
      entry.calibration_error = measure.error_at(g, iv);
      entry.interesting = interest.interesting_at(g, iv, opt.gamma, opt.psi);
      if (entry.interesting) {
        if (!entry.calibration_error.has_value()) {
          entry.note = "no occupancy";
          entry.violation =
              opt.empty_interesting == AuditOptions::EmptyInteresting::kViolation;
          if (!entry.violation) entry.note = "no occupancy (excluded)";
        } else {
          entry.violation = std::abs(*entry.calibration_error) > opt.alpha;
        }
      }
      if (entry.violation) ++report.violation_count;
      report.entries.push_back(std::move(entry));
    }
  }
  report.verdict = report.violation_count == 0;
  return report;
}

}  // namespace detail

/// Audit h against D: exact interestingness, exact errors.
inline AuditReport audit(const Predictor& h, const SubpopulationCollection& groups,
                         const IntervalPartition& partition, const AuditOptions& opt,
                         const FiniteDistribution& d) {
  const auto table = detail::tabulate(h, groups, partition, d);
  return detail::run_audit(h, groups, partition, opt, table, table);
}

/// Audit h against a sample: empirical interestingness, empirical errors.
inline AuditReport audit(const Predictor& h, const SubpopulationCollection& groups,
                         const IntervalPartition& partition, const AuditOptions& opt,
                         const LabeledSample& s) {
  const auto table = detail::tabulate(h, groups, partition, s);
  return detail::run_audit(h, groups, partition, opt, table, table);
}

/// Mixed audit: categories that are interesting under the reference
/// distribution, errors measured on the sample. An interesting category with
/// no occupancy is handled per AuditOptions::empty_interesting.
inline AuditReport audit(const Predictor& h, const SubpopulationCollection& groups,
                         const IntervalPartition& partition, const AuditOptions& opt,
                         const FiniteDistribution& interest_d, const LabeledSample& s) {
  const auto interest = detail::tabulate(h, groups, partition, interest_d);
  const auto measure = detail::tabulate(h, groups, partition, s);
  return detail::run_audit(h, groups, partition, opt, interest, measure);
}

}  // namespace mcal
