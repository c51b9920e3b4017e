// Acceptance suite: one self-contained check per release criterion, each
// printed as a single pass/fail line with its runtime. Exit code is the
// number of failed criteria. Every tolerance is pinned here, in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "mcal/bounds.hpp"
#include "mcal/calibration.hpp"
#include "mcal/convergence.hpp"
#include "mcal/core.hpp"
#include "mcal/dimension.hpp"
#include "mcal/rng.hpp"
#include "../naive_dims.hpp"

using namespace mcal;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& why) {
    if (!cond && ok) {
      ok = false;
      detail = why;
    }
  }
  void note(const std::string& text) {
    if (ok) detail = text;
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// --------------------------------------------------------------------------
// C1: exact fixture errors and the verdict flip at alpha = 2*epsilon.

Outcome criterion1() {
  Outcome out;
  const double grid[] = {0.05, 0.1, 0.2};
  for (double eps : grid) {
    for (double gamma : grid) {
      for (double psi : grid) {
        const auto fx = build_lower_bound_fixture(eps, gamma, psi);
        const Interval top(fx.v, fx.v, true);
        const auto e1 = true_calibration_error(fx.predictors[0], fx.groups[0], top, fx.d1);
        const auto e2 = true_calibration_error(fx.predictors[0], fx.groups[0], top, fx.d2);
        out.require(e1.has_value() && std::abs(*e1) <= 1e-12,
                    "d1 error not 0 at eps=" + fmt(eps));
        out.require(e2.has_value() && std::abs(*e2 + 2.0 * eps) <= 1e-12,
                    "d2 error not -2eps at eps=" + fmt(eps));

        AuditOptions opt;
        opt.gamma = gamma;
        opt.psi = psi;
        opt.alpha = 0.0;
        out.require(audit(fx.predictors[0], fx.groups, fx.partition, opt, fx.d1).verdict,
                    "d1 verdict false at alpha=0");
        opt.alpha = 2.0 * eps + 1e-12;
        out.require(audit(fx.predictors[0], fx.groups, fx.partition, opt, fx.d2).verdict,
                    "d2 verdict false just above 2eps");
        opt.alpha = 2.0 * eps - 1e-12;
        out.require(!audit(fx.predictors[0], fx.groups, fx.partition, opt, fx.d2).verdict,
                    "d2 verdict true just below 2eps");
      }
    }
  }
  out.note("27 parameter triples, flip pinned within 1e-12 of 2*eps");
  return out;
}

// --------------------------------------------------------------------------
// C2: finite-class uniform convergence at desk scale, plus the
// eps^-2 / psi^-2 / gamma^-1 scaling behavior.

struct DeskInstance {
  Domain domain;
  FiniteDistribution dist;
  PredictorClass predictors;
  SubpopulationCollection groups;
  IntervalPartition partition;
};

DeskInstance build_desk_instance(std::uint64_t seed) {
  SplitMix64 rng(seed);
  const std::size_t n_points = 50;
  const std::vector<double> values{0.2, 0.4, 0.6, 0.8};
  Domain domain = Domain::of_size(n_points);

  std::vector<WeightedOutcome> rows;
  double total = 0.0;
  for (std::size_t i = 0; i < n_points; ++i) {
    const double w = 0.5 + rng.next_unit();
    const double q = rng.next_unit();
    rows.push_back({domain.at(i), 1, w * q});
    rows.push_back({domain.at(i), 0, w * (1.0 - q)});
    total += w;
  }
  for (auto& r : rows) r.probability /= total;
  double sum = 0.0;
  for (const auto& r : rows) sum += r.probability;
  rows.front().probability += 1.0 - sum;

  std::vector<Predictor> hs;
  for (std::size_t j = 0; j < 20; ++j) {
    std::vector<double> table(n_points);
    for (auto& v : table) v = values[rng.next_below(values.size())];
    hs.emplace_back("h" + std::to_string(j), std::move(table));
  }

  std::vector<Subpopulation> groups;
  for (std::size_t g = 0; g < 5; ++g) {
    std::vector<std::uint8_t> mask(n_points, 0);
    for (auto& b : mask) b = rng.next_unit() < 0.5 ? 1 : 0;
    if (std::find(mask.begin(), mask.end(), 1) == mask.end()) mask[0] = 1;
    groups.emplace_back("g" + std::to_string(g), std::move(mask));
  }

  const auto space = PredictionSpace::finite(values);
  return DeskInstance{std::move(domain), FiniteDistribution(std::move(rows)),
                      PredictorClass(std::move(hs)), SubpopulationCollection(std::move(groups)),
                      partition_of(space)};
}

Outcome criterion2() {
  Outcome out;
  const auto inst = build_desk_instance(20240);
  const double eps = 0.1, delta = 0.1, gamma = 0.2, psi = 0.2;
  const std::size_t trials = 200;
  const double ceiling = delta + 3.0 * std::sqrt(delta * (1.0 - delta) / double(trials));

  BoundParams p;
  p.epsilon = eps;
  p.delta = delta;
  p.gamma = gamma;
  p.psi = psi;
  p.lambda = 0.25;  // four singleton intervals
  p.card_gamma = 5;
  p.card_H = 20;
  const std::uint64_t m = finite_class_bound(p).value;

  // Sanity: the instance has a healthy pile of interesting categories.
  std::size_t interesting = 0;
  for (const auto& h : inst.predictors) {
    interesting +=
        interesting_categories(h, inst.groups, inst.partition, gamma, psi, inst.dist).size();
  }
  out.require(interesting >= 20, "too few interesting categories: " + std::to_string(interesting));

  const double base = failure_rate(inst.dist, inst.predictors, inst.groups, inst.partition, gamma,
                                   psi, m, eps, trials, 1001);
  out.require(base <= ceiling,
              "base failure rate " + fmt(base) + " above ceiling " + fmt(ceiling));

  // eps halved, m x4.
  const double r_eps = failure_rate(inst.dist, inst.predictors, inst.groups, inst.partition,
                                    gamma, psi, 4 * m, eps / 2.0, trials, 1002);
  out.require(r_eps <= ceiling, "eps-scaling failure rate " + fmt(r_eps));

  // psi halved, m x4.
  const double r_psi = failure_rate(inst.dist, inst.predictors, inst.groups, inst.partition,
                                    gamma, psi / 2.0, 4 * m, eps, trials, 1003);
  out.require(r_psi <= ceiling, "psi-scaling failure rate " + fmt(r_psi));

  // gamma halved, m x2.
  const double r_gamma = failure_rate(inst.dist, inst.predictors, inst.groups, inst.partition,
                                      gamma / 2.0, psi, 2 * m, eps, trials, 1004);
  out.require(r_gamma <= ceiling, "gamma-scaling failure rate " + fmt(r_gamma));

  out.note("m=" + std::to_string(m) + ", rates " + fmt(base) + "/" + fmt(r_eps) + "/" +
           fmt(r_psi) + "/" + fmt(r_gamma) + " vs ceiling " + fmt(ceiling));
  return out;
}

// --------------------------------------------------------------------------
// C3: property sweeps for the fraction-approximation inequality and the
// two dimension lemmas.

Outcome criterion3() {
  Outcome out;
  SplitMix64 rng(33);
  std::size_t violations = 0;
  for (int rep = 0; rep < 100000; ++rep) {
    const double psi = 0.01 + 0.99 * rng.next_unit();
    const double eps = 0.01 + 0.99 * rng.next_unit();
    const double p2 = psi + (1.0 - psi) * rng.next_unit();
    const double p1 = p2 * rng.next_unit();
    const double slack = psi * eps / 3.0;
    auto perturb = [&](double x) {
      return std::min(1.0, std::max(0.0, x + (2.0 * rng.next_unit() - 1.0) * slack));
    };
    const auto check = fraction_error_check(p1, p2, perturb(p1), perturb(p2), psi, eps);
    if (!check.premises_hold || !check.conclusion_holds) ++violations;
  }
  out.require(violations == 0,
              std::to_string(violations) + " fraction-check violations in 1e5 tuples");

  const std::vector<double> value_pool{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  std::size_t lemma_violations = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rng.next_below(6);       // |X| <= 6
    const std::size_t vcount = 2 + rng.next_below(3);  // |Y| <= 4
    const std::size_t hcount = 1 + rng.next_below(8);  // |H| <= 8
    const std::vector<double> values(value_pool.begin(), value_pool.begin() + vcount);
    std::vector<Predictor> hs;
    for (std::size_t j = 0; j < hcount; ++j) {
      std::vector<double> table(n);
      for (auto& v : table) v = values[rng.next_below(values.size())];
      hs.emplace_back("h" + std::to_string(j), std::move(table));
    }
    const PredictorClass cls(std::move(hs));
    std::vector<DomainPoint> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(DomainPoint{(std::uint32_t)i});

    const auto graph_report = check_lemma_graph(cls, pts, values);
    if (!graph_report.holds) ++lemma_violations;
    for (double v : values) {
      const auto hv = binarize_class(cls, v);
      if (!check_lemma_phi(hv, pts).holds) ++lemma_violations;
    }
  }
  out.require(lemma_violations == 0,
              std::to_string(lemma_violations) + " dimension-lemma violations in 100 classes");
  out.note("1e5 fraction tuples and 100 random classes, zero violations");
  return out;
}

// --------------------------------------------------------------------------
// C4: simulated tail frequencies never exceed the Chernoff bounds.

Outcome criterion4() {
  Outcome out;
  const std::size_t sims = 100000;
  const double eps_grid[] = {0.05, 0.1, 0.2};
  SplitMix64 rng(44);
  double worst_margin = 1.0;
  for (std::size_t n : {10u, 100u, 1000u}) {
    for (double mu : {0.3, 0.5, 0.7}) {
      std::vector<std::uint32_t> successes(sims);
      for (std::size_t s = 0; s < sims; ++s) {
        std::uint32_t x = 0;
        for (std::size_t i = 0; i < n; ++i) x += rng.next_unit() < mu ? 1 : 0;
        successes[s] = x;
      }
      for (double eps : eps_grid) {
        std::size_t abs_hits = 0, rel_hits = 0;
        const double rel_cut = (1.0 - eps) * double(n) * mu;
        for (std::uint32_t x : successes) {
          if (std::abs(double(x) / double(n) - mu) >= eps) ++abs_hits;
          if (double(x) <= rel_cut) ++rel_hits;
        }
        const double abs_freq = double(abs_hits) / double(sims);
        const double rel_freq = double(rel_hits) / double(sims);
        const double abs_bound = chernoff_absolute_tail(n, eps);
        const double rel_bound = chernoff_relative_tail(double(n) * mu, eps);
        out.require(abs_freq <= abs_bound, "absolute tail exceeded at n=" + std::to_string(n) +
                                               " mu=" + fmt(mu) + " eps=" + fmt(eps));
        out.require(rel_freq <= rel_bound, "relative tail exceeded at n=" + std::to_string(n) +
                                               " mu=" + fmt(mu) + " eps=" + fmt(eps));
        if (abs_bound > 0) worst_margin = std::min(worst_margin, 1.0 - abs_freq / abs_bound);
      }
    }
  }
  out.note("9 cells x 1e5 sims x 3 thresholds dominated; min headroom " + fmt(worst_margin));
  return out;
}

// --------------------------------------------------------------------------
// C5: regime separation of the distinguishing experiment around the
// closed-form lower bound (delta pinned to 0.05, unit constant).

Outcome criterion5() {
  Outcome out;
  const double eps = 0.1, gamma = 0.5, psi = 0.5, delta = 0.05;
  BoundParams p;
  p.epsilon = eps;
  p.delta = delta;
  p.gamma = gamma;
  p.psi = psi;
  p.c_lower = 1.0;
  const std::uint64_t lb = lower_bound(p).value;
  const auto fx = build_lower_bound_fixture(eps, gamma, psi);

  const std::size_t trials = 500;
  const double small = distinguishing_experiment(fx, std::max<std::uint64_t>(1, lb / 16), trials, 55);
  const double large = distinguishing_experiment(fx, 100 * lb, trials, 56);
  out.require(small < 0.95, "small-sample accuracy " + fmt(small) + " not below 0.95");
  out.require(large >= 0.97, "large-sample accuracy " + fmt(large) + " below 0.97");
  out.note("m=" + std::to_string(lb / 16) + " -> " + fmt(small) + ", m=" +
           std::to_string(100 * lb) + " -> " + fmt(large));
  return out;
}

// --------------------------------------------------------------------------
// C6: empirical errors on exactly proportional samples match the exact
// oracle to 1e-9.

Outcome criterion6() {
  Outcome out;
  SplitMix64 rng(66);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n_points = 2 + rng.next_below(8);
    Domain domain = Domain::of_size(n_points);
    std::vector<WeightedOutcome> rows;
    std::vector<LabeledItem> items;
    std::uint64_t total = 0;
    std::vector<std::pair<DomainPoint, int>> keys;
    std::vector<std::uint64_t> weights;
    for (std::size_t i = 0; i < n_points; ++i) {
      for (int label = 0; label <= 1; ++label) {
        if (rng.next_unit() < 0.3) continue;
        const std::uint64_t w = 1 + rng.next_below(40);
        keys.emplace_back(domain.at(i), label);
        weights.push_back(w);
        total += w;
      }
    }
    if (keys.empty()) {
      keys.emplace_back(domain.at(0), 1);
      weights.push_back(1);
      total = 1;
    }
    for (std::size_t k = 0; k < keys.size(); ++k) {
      rows.push_back({keys[k].first, keys[k].second, double(weights[k]) / double(total)});
      for (std::uint64_t c = 0; c < weights[k]; ++c) items.push_back({keys[k].first, keys[k].second});
    }
    double sum = 0.0;
    for (const auto& r : rows) sum += r.probability;
    rows.front().probability += 1.0 - sum;
    const FiniteDistribution dist(std::move(rows));
    const LabeledSample sample(std::move(items));

    const std::vector<double> values{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> table(n_points);
    for (auto& v : table) v = values[rng.next_below(values.size())];
    const Predictor h("h", std::move(table));

    std::vector<std::uint8_t> mask(n_points, 0);
    for (auto& b : mask) b = rng.next_unit() < 0.6 ? 1 : 0;
    if (std::find(mask.begin(), mask.end(), 1) == mask.end()) mask[0] = 1;
    const Subpopulation group("g", std::move(mask));

    for (double v : values) {
      const Interval iv(v, v, true);
      const auto te = true_calibration_error(h, group, iv, dist);
      const auto ee = empirical_calibration_error(h, group, iv, sample);
      if (te.has_value() != ee.has_value()) {
        out.require(false, "defined-ness mismatch");
        continue;
      }
      if (te.has_value()) worst = std::max(worst, std::abs(*te - *ee));
    }
  }
  out.require(worst <= 1e-9, "worst oracle gap " + fmt(worst));
  out.note("100 distributions, worst gap " + fmt(worst));
  return out;
}

// --------------------------------------------------------------------------
// C7: the pruned searches agree with naive reimplementations.

Outcome criterion7() {
  Outcome out;
  SplitMix64 rng(77);
  const std::vector<double> value_pool{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};

  for (int rep = 0; rep < 25; ++rep) {  // binary classes
    const std::size_t n = 1 + rng.next_below(8);
    const std::size_t hcount = 1 + rng.next_below(12);
    std::vector<BinaryHypothesis> hv;
    for (std::size_t j = 0; j < hcount; ++j) {
      std::vector<std::uint8_t> table(n);
      for (auto& b : table) b = rng.next_unit() < 0.5 ? 1 : 0;
      hv.push_back({table, "raw"});
    }
    std::vector<DomainPoint> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(DomainPoint{(std::uint32_t)i});
    const auto fast = vc_dimension(hv, pts);
    const auto slow = testutil::naive_vc_dimension(hv, pts);
    out.require(fast == slow, "vc mismatch " + std::to_string(fast) + " vs " +
                                  std::to_string(slow) + " at rep " + std::to_string(rep));
  }

  for (int rep = 0; rep < 25; ++rep) {  // multivalued classes
    const std::size_t n = 1 + rng.next_below(6);
    const std::size_t vcount = 2 + rng.next_below(3);
    const std::size_t hcount = 1 + rng.next_below(8);
    const std::vector<double> values(value_pool.begin(), value_pool.begin() + vcount);
    std::vector<Predictor> hs;
    for (std::size_t j = 0; j < hcount; ++j) {
      std::vector<double> table(n);
      for (auto& v : table) v = values[rng.next_below(values.size())];
      hs.emplace_back("h" + std::to_string(j), std::move(table));
    }
    const PredictorClass cls(std::move(hs));
    std::vector<DomainPoint> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(DomainPoint{(std::uint32_t)i});
    const auto fast = graph_dimension(cls, pts, values);
    const auto slow = testutil::naive_graph_dimension(cls, pts, values);
    out.require(fast == slow, "graph mismatch " + std::to_string(fast) + " vs " +
                                  std::to_string(slow) + " at rep " + std::to_string(rep));
  }
  out.note("50 random instances agree with the naive oracles");
  return out;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Outcome (*fn)();
    double budget_seconds;
  };
  const Entry entries[] = {
      {"fixture exactness and verdict flip", criterion1, 1.0},
      {"finite-class uniform convergence ceiling and scaling", criterion2, 120.0},
      {"fraction and dimension lemma property sweeps", criterion3, 60.0},
      {"Chernoff tail domination", criterion4, 60.0},
      {"lower-bound regime separation", criterion5, 60.0},
      {"exact-vs-empirical oracle equivalence", criterion6, 10.0},
      {"dimension searches vs naive oracles", criterion7, 120.0},
  };

  int failures = 0;
  int index = 0;
  for (const auto& entry : entries) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out = entry.fn();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (seconds >= entry.budget_seconds) {
      out.ok = false;
      out.detail = "runtime " + fmt(seconds) + "s over budget " + fmt(entry.budget_seconds) + "s";
    }
    std::printf("[%s] C%d %s (%.2fs)%s%s\n", out.ok ? "PASS" : "FAIL", index, entry.name, seconds,
                out.detail.empty() ? "" : " -- ", out.detail.c_str());
    if (!out.ok) ++failures;
  }
  if (failures == 0) {
    std::printf("all %d criteria passed\n", index);
  } else {
    std::printf("%d of %d criteria FAILED\n", failures, index);
  }
  return failures;
}
