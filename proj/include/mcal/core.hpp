// core.hpp - domain model for multicalibration auditing.
//
// Everything here has exact finite-support semantics: a finite domain of
// opaque points, predictors as total score tables, subpopulations as
// membership masks, and joint (point, outcome) distributions stored as
// explicit probability tables. All types are immutable after construction
// and safe to share across threads.

#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mcal {

// ---------------------------------------------------------------------------
// Errors

/// A prediction value that no interval of the partition covers.
class ValueNotCovered : public std::runtime_error {
 public:
  explicit ValueNotCovered(const std::string& what) : std::runtime_error(what) {}
};

/// An exhaustive search was requested on an instance above its size limit.
class LimitExceeded : public std::runtime_error {
 public:
  explicit LimitExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// Conditioning on a subpopulation of probability zero.
class EmptySubpopulation : public std::runtime_error {
 public:
  explicit EmptySubpopulation(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file. `line` is the 1-based file line (header = line 1).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::string column)
      : std::runtime_error(what), line_(line), column_(std::move(column)) {}
  std::size_t line() const { return line_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t line_;
  std::string column_;
};

/// Syntactically valid input whose value is outside its domain
/// (label not in {0,1}, prediction outside [0,1], ...).
class DomainViolation : public ParseError {
 public:
  using ParseError::ParseError;
};

// ---------------------------------------------------------------------------
// Domain

/// Opaque handle to an individual. Stable and orderable; the string id it was
/// registered under lives in the Domain.
struct DomainPoint {
  std::uint32_t index = 0;
  friend auto operator<=>(const DomainPoint&, const DomainPoint&) = default;
};

/// Registry of domain points. Ids are unique; points are dense indices in
/// registration order.
class Domain {
 public:
  Domain() = default;

  DomainPoint add(std::string id) {
    if (lookup_.count(id) > 0) {
      throw std::invalid_argument("duplicate domain id: " + id);
    }
    DomainPoint p{static_cast<std::uint32_t>(ids_.size())};
    lookup_.emplace(id, p.index);
    ids_.push_back(std::move(id));
    return p;
  }

  std::optional<DomainPoint> find(std::string_view id) const {
    auto it = lookup_.find(std::string(id));
    if (it == lookup_.end()) return std::nullopt;
    return DomainPoint{it->second};
  }

  const std::string& id_of(DomainPoint p) const { return ids_.at(p.index); }
  std::size_t size() const { return ids_.size(); }

  DomainPoint at(std::size_t i) const {
    if (i >= ids_.size()) throw std::out_of_range("domain point index out of range");
    return DomainPoint{static_cast<std::uint32_t>(i)};
  }

  /// n points named "<prefix>0" .. "<prefix>{n-1}".
  static Domain of_size(std::size_t n, std::string_view prefix = "x") {
    Domain d;
    for (std::size_t i = 0; i < n; ++i) d.add(std::string(prefix) + std::to_string(i));
    return d;
  }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

// ---------------------------------------------------------------------------
// Prediction space and intervals

/// The set of values predictors may emit: either a finite sorted list of
/// reals in [0,1], or the full unit interval discretized by a partition
/// parameter lambda with 1/lambda a positive integer.
class PredictionSpace {
 public:
  enum class Kind { kFinite, kContinuous };

  static PredictionSpace finite(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("finite prediction space needs at least one value");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
        throw std::invalid_argument("prediction values must lie in [0,1]");
      }
      if (i > 0 && !(values[i - 1] < values[i])) {
        throw std::invalid_argument("prediction values must be strictly increasing");
      }
    }
    PredictionSpace s;
    s.kind_ = Kind::kFinite;
    s.values_ = std::move(values);
    return s;
  }

  static PredictionSpace continuous(double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
      throw std::invalid_argument("lambda must lie in (0,1]");
    }
    const double inv = 1.0 / lambda;
    const double rounded = std::round(inv);
    if (rounded < 1.0 || std::abs(inv - rounded) > 1e-9 * rounded) {
      throw std::invalid_argument("1/lambda must be a positive integer");
    }
    PredictionSpace s;
    s.kind_ = Kind::kContinuous;
    s.lambda_ = lambda;
    s.bins_ = static_cast<std::size_t>(rounded);
    return s;
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& values() const { return values_; }
  double lambda() const { return lambda_; }
  std::size_t bins() const { return bins_; }

 private:
  PredictionSpace() = default;
  Kind kind_ = Kind::kFinite;
  std::vector<double> values_;
  double lambda_ = 0.0;
  std::size_t bins_ = 0;
};

/// [lo, hi) by default; [lo, hi] when closed_hi. A singleton {v} is
/// lo == hi with closed_hi.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool closed_hi = true;

  Interval() = default;
  Interval(double lo_, double hi_, bool closed_hi_) : lo(lo_), hi(hi_), closed_hi(closed_hi_) {
    if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) {
      throw std::invalid_argument("interval bounds must satisfy 0 <= lo <= hi <= 1");
    }
    if (lo == hi && !closed_hi) {
      throw std::invalid_argument("a singleton interval must be closed");
    }
  }

  bool is_singleton() const { return lo == hi; }

  bool contains(double v) const {
    if (v < lo) return false;
    return closed_hi ? v <= hi : v < hi;
  }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lo == b.lo && a.hi == b.hi && a.closed_hi == b.closed_hi;
  }
};

/// An ordered, pairwise-disjoint list of intervals covering the prediction
/// space: one singleton per value (finite case) or a lambda-grid over [0,1]
/// whose last interval is closed at 1 (continuous case).
class IntervalPartition {
 public:
  enum class Kind { kSingletons, kGrid };

  Kind kind() const { return kind_; }
  std::size_t size() const { return intervals_.size(); }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }
  const std::vector<Interval>& intervals() const { return intervals_; }

  /// Grid width, when this partition is a lambda-grid.
  std::optional<double> lambda() const { return lambda_; }

  /// Index of the unique interval containing v. Throws ValueNotCovered for a
  /// value outside [0,1] or, in the finite case, not equal to a listed value.
  std::size_t index_of(double v) const {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValueNotCovered("prediction value outside [0,1]: " + std::to_string(v));
    }
    if (kind_ == Kind::kGrid) {
      const std::size_t n = intervals_.size();
      auto j = static_cast<std::size_t>(std::min<double>(std::floor(v * static_cast<double>(n)),
                                                         static_cast<double>(n - 1)));
      // Guard the float boundary: the arithmetic guess can be off by one.
      if (intervals_[j].contains(v)) return j;
      if (j + 1 < n && intervals_[j + 1].contains(v)) return j + 1;
      if (j > 0 && intervals_[j - 1].contains(v)) return j - 1;
      throw ValueNotCovered("value not covered by grid: " + std::to_string(v));
    }
    auto it = std::lower_bound(intervals_.begin(), intervals_.end(), v,
                               [](const Interval& iv, double x) { return iv.lo < x; });
    if (it == intervals_.end() || it->lo != v) {
      throw ValueNotCovered("value is not a member of the finite prediction space: " +
                            std::to_string(v));
    }
    return static_cast<std::size_t>(it - intervals_.begin());
  }

  friend IntervalPartition partition_of(const PredictionSpace& space);

 private:
  Kind kind_ = Kind::kSingletons;
  std::vector<Interval> intervals_;
  std::optional<double> lambda_;
};

/// Partition of the prediction space: singletons {v} for a finite space; for
/// a continuous space, 1/lambda half-open intervals with boundaries at j/n
/// and the final interval [1-lambda, 1] closed at 1.
inline IntervalPartition partition_of(const PredictionSpace& space) {
  IntervalPartition p;
  if (space.kind() == PredictionSpace::Kind::kFinite) {
    p.kind_ = IntervalPartition::Kind::kSingletons;
    for (double v : space.values()) p.intervals_.emplace_back(v, v, true);
    return p;
  }
  p.kind_ = IntervalPartition::Kind::kGrid;
  p.lambda_ = space.lambda();
  const std::size_t n = space.bins();
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = static_cast<double>(j) / static_cast<double>(n);
    const double hi = (j + 1 == n) ? 1.0 : static_cast<double>(j + 1) / static_cast<double>(n);
    p.intervals_.emplace_back(lo, hi, j + 1 == n);
  }
  return p;
}

/// The unique interval of the partition containing v.
inline const Interval& interval_of(const IntervalPartition& partition, double v) {
  return partition[partition.index_of(v)];
}

// ---------------------------------------------------------------------------
// Predictors

/// A total map from domain points to prediction values, with a name.
class Predictor {
 public:
  Predictor(std::string name, std::vector<double> values)
      : name_(std::move(name)), values_(std::move(values)) {
    if (name_.empty()) throw std::invalid_argument("predictor name must be nonempty");
    for (double v : values_) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("predictor '" + name_ + "' has a value outside [0,1]");
      }
    }
  }

  double operator()(DomainPoint x) const { return values_.at(x.index); }
  const std::string& name() const { return name_; }
  std::size_t domain_size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

  /// True when every prediction is a member of the space (finite case) or
  /// inside [0,1] (continuous case, always true by construction).
  bool conforms_to(const PredictionSpace& space) const {
    if (space.kind() == PredictionSpace::Kind::kContinuous) return true;
    const auto& vals = space.values();
    for (double v : values_) {
      if (!std::binary_search(vals.begin(), vals.end(), v)) return false;
    }
    return true;
  }

 private:
  std::string name_;
  std::vector<double> values_;
};

/// A finite, ordered, name-unique list of predictors.
class PredictorClass {
 public:
  explicit PredictorClass(std::vector<Predictor> members) : members_(std::move(members)) {
    if (members_.empty()) throw std::invalid_argument("predictor class must be nonempty");
    std::unordered_map<std::string, int> seen;
    for (const auto& h : members_) {
      if (++seen[h.name()] > 1) {
        throw std::invalid_argument("duplicate predictor name: " + h.name());
      }
    }
  }

  std::size_t size() const { return members_.size(); }
  const Predictor& operator[](std::size_t i) const { return members_.at(i); }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

 private:
  std::vector<Predictor> members_;
};

// ---------------------------------------------------------------------------
// Subpopulations

/// A named subset of the domain, stored as a membership mask.
class Subpopulation {
 public:
  Subpopulation(std::string name, std::vector<std::uint8_t> mask)
      : name_(std::move(name)), mask_(std::move(mask)) {
    if (name_.empty()) throw std::invalid_argument("subpopulation name must be nonempty");
    if (std::find(mask_.begin(), mask_.end(), std::uint8_t{1}) == mask_.end()) {
      throw std::invalid_argument("subpopulation '" + name_ + "' must be nonempty");
    }
  }

  static Subpopulation of(std::string name, std::size_t domain_size,
                          std::span<const DomainPoint> members) {
    std::vector<std::uint8_t> mask(domain_size, 0);
    for (DomainPoint p : members) mask.at(p.index) = 1;
    return Subpopulation(std::move(name), std::move(mask));
  }

  bool contains(DomainPoint p) const { return p.index < mask_.size() && mask_[p.index] != 0; }
  const std::string& name() const { return name_; }
  std::size_t domain_size() const { return mask_.size(); }

  std::size_t member_count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
  }

 private:
  std::string name_;
  std::vector<std::uint8_t> mask_;
};

/// A finite collection of (possibly overlapping) subpopulations with unique
/// names.
class SubpopulationCollection {
 public:
  SubpopulationCollection() = default;
  explicit SubpopulationCollection(std::vector<Subpopulation> groups) : groups_(std::move(groups)) {
    std::unordered_map<std::string, int> seen;
    for (const auto& g : groups_) {
      if (++seen[g.name()] > 1) {
        throw std::invalid_argument("duplicate subpopulation name: " + g.name());
      }
    }
  }

  std::size_t size() const { return groups_.size(); }
  const Subpopulation& operator[](std::size_t i) const { return groups_.at(i); }
  auto begin() const { return groups_.begin(); }
  auto end() const { return groups_.end(); }

 private:
  std::vector<Subpopulation> groups_;
};

// ---------------------------------------------------------------------------
// Distributions and samples

/// One support entry of a joint distribution over (point, outcome).
struct WeightedOutcome {
  DomainPoint point;
  int label = 0;  // outcome in {0,1}
  double probability = 0.0;
};

/// Exact probability table over (domain point, outcome) pairs. The oracle
/// for every "true" quantity in the library.
class FiniteDistribution {
 public:
  static constexpr double kNormalizationTolerance = 1e-12;

  explicit FiniteDistribution(std::vector<WeightedOutcome> support) : support_(std::move(support)) {
    // Compensated summation so the normalization check stays meaningful for
    // large supports (a plain sum drifts past 1e-12 around 1e4 entries).
    double total = 0.0, carry = 0.0;
    std::unordered_map<std::uint64_t, int> seen;
    for (const auto& e : support_) {
      if (e.label != 0 && e.label != 1) throw std::invalid_argument("labels must be 0 or 1");
      if (!(e.probability >= 0.0)) throw std::invalid_argument("probabilities must be nonnegative");
      const std::uint64_t key = (static_cast<std::uint64_t>(e.point.index) << 1) |
                                static_cast<std::uint64_t>(e.label);
      if (++seen[key] > 1) throw std::invalid_argument("duplicate (point,label) support entry");
      const double y = e.probability - carry;
      const double t = total + y;
      carry = (t - total) - y;
      total = t;
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
      throw std::invalid_argument("probabilities must sum to 1 (got " + std::to_string(total) + ")");
    }
  }

  std::span<const WeightedOutcome> support() const { return support_; }
  std::size_t support_size() const { return support_.size(); }

  double group_probability(const Subpopulation& group) const {
    double p = 0.0;
    for (const auto& e : support_) {
      if (group.contains(e.point)) p += e.probability;
    }
    return p;
  }

  /// Distribution conditioned on membership in `group`, renormalized.
  FiniteDistribution conditional_on(const Subpopulation& group) const {
    const double mass = group_probability(group);
    if (mass <= 0.0) {
      throw EmptySubpopulation("subpopulation '" + group.name() + "' has probability zero");
    }
    std::vector<WeightedOutcome> rows;
    for (const auto& e : support_) {
      if (group.contains(e.point)) {
        rows.push_back({e.point, e.label, e.probability / mass});
      }
    }
    return FiniteDistribution(std::move(rows));
  }

 private:
  std::vector<WeightedOutcome> support_;
};

/// One labeled draw.
struct LabeledItem {
  DomainPoint point;
  int label = 0;
};

/// An ordered multiset of i.i.d. draws; duplicates permitted.
class LabeledSample {
 public:
  LabeledSample() = default;
  explicit LabeledSample(std::vector<LabeledItem> items) : items_(std::move(items)) {
    for (const auto& it : items_) {
      if (it.label != 0 && it.label != 1) throw std::invalid_argument("labels must be 0 or 1");
    }
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const LabeledItem& operator[](std::size_t i) const { return items_.at(i); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

 private:
  std::vector<LabeledItem> items_;
};

}  // namespace mcal
