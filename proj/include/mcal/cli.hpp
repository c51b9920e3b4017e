// cli.hpp - command-line surface.
//
// Subcommands: audit, sample-size, verify, dims, lower-bound-demo.
// Exit codes: 0 success, 1 audit found violations, 2 usage/parse error,
// 3 internal limit exceeded. Reports are JSON (17-significant-digit floats,
// fixed key order) so identical config and seed give byte-identical output;
// every report embeds the fully resolved config, defaults included.

#pragma once

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcal/bounds.hpp"
#include "mcal/calibration.hpp"
#include "mcal/convergence.hpp"
#include "mcal/core.hpp"
#include "mcal/dataset.hpp"
#include "mcal/dimension.hpp"
#include "mcal/json_writer.hpp"

namespace mcal {

namespace cli_detail {

constexpr const char* kToolName = "mcal";
constexpr const char* kToolVersion = "1.0.0";

struct CommonFlags {
  std::string config_path;
  std::string output_path;
  std::string mode_str;
  double alpha = 0, gamma = 0, psi = 0, epsilon = 0, delta = 0, lambda = 0;
  std::uint64_t trials = 0, seed = 0;

  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_gamma = nullptr;
  CLI::Option* o_psi = nullptr;
  CLI::Option* o_epsilon = nullptr;
  CLI::Option* o_delta = nullptr;
  CLI::Option* o_lambda = nullptr;
  CLI::Option* o_trials = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_mode = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file with key=value lines");
    cmd->add_option("--output", output_path, "write the JSON report here instead of stdout");
    o_alpha = cmd->add_option("--alpha", alpha, "calibration error tolerance");
    o_gamma = cmd->add_option("--gamma", gamma, "subpopulation mass threshold");
    o_psi = cmd->add_option("--psi", psi, "conditional interval mass threshold");
    o_epsilon = cmd->add_option("--epsilon", epsilon, "estimation accuracy");
    o_delta = cmd->add_option("--delta", delta, "failure probability");
    o_lambda = cmd->add_option("--lambda", lambda, "prediction interval width");
    o_trials = cmd->add_option("--trials", trials, "Monte Carlo trial count");
    o_seed = cmd->add_option("--seed", seed, "master seed");
    o_mode = cmd->add_option("--mode", mode_str, "prediction space: finite or continuous")
                 ->check(CLI::IsMember({"finite", "continuous"}));
  }

  /// defaults -> config file -> explicit flags, then validation.
  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    if (o_alpha->count() > 0) cfg.alpha = alpha;
    if (o_gamma->count() > 0) cfg.gamma = gamma;
    if (o_psi->count() > 0) cfg.psi = psi;
    if (o_epsilon->count() > 0) cfg.epsilon = epsilon;
    if (o_delta->count() > 0) cfg.delta = delta;
    if (o_lambda->count() > 0) cfg.lambda = lambda;
    if (o_trials->count() > 0) cfg.trials = trials;
    if (o_seed->count() > 0) cfg.master_seed = seed;
    if (o_mode->count() > 0) {
      cfg.mode = mode_str == "finite" ? RunConfig::Mode::kFiniteY : RunConfig::Mode::kContinuousY;
    }
    cfg.validate();
    return cfg;
  }
};

inline void write_config(JsonWriter& w, const RunConfig& cfg) {
  w.key("config").begin_object();
  w.kv("alpha", cfg.alpha);
  w.kv("gamma", cfg.gamma);
  w.kv("psi", cfg.psi);
  w.kv("epsilon", cfg.epsilon);
  w.kv("delta", cfg.delta);
  w.kv("lambda", cfg.lambda);
  w.kv("mode", RunConfig::mode_name(cfg.mode));
  w.kv("trials", cfg.trials);
  w.kv("seed", cfg.master_seed);
  w.kv("c_graph", cfg.c_graph);
  w.kv("c_fund", cfg.c_fund);
  w.kv("c_lower", cfg.c_lower);
  w.kv("max_domain_for_dims", cfg.max_domain_for_dims);
  w.kv("max_y_for_dims", cfg.max_y_for_dims);
  w.end_object();
}

inline void write_header(JsonWriter& w, const char* command, const RunConfig& cfg) {
  w.kv("tool", kToolName);
  w.kv("version", kToolVersion);
  w.kv("command", command);
  write_config(w, cfg);
}

inline void write_interval(JsonWriter& w, const Interval& iv) {
  w.begin_object();
  w.kv("lo", iv.lo);
  w.kv("hi", iv.hi);
  w.kv("closed_hi", iv.closed_hi);
  w.end_object();
}

inline void write_optional(JsonWriter& w, const std::optional<double>& v) {
  if (v.has_value()) {
    w.value(*v);
  } else {
    w.null();
  }
}

inline void write_audit_report(JsonWriter& w, const AuditReport& r) {
  w.begin_object();
  w.kv("predictor", r.predictor);
  w.kv("verdict", r.verdict);
  w.kv("violations", r.violation_count);
  w.kv("interest_source", r.interest_source == StatsSource::kExact ? "exact" : "empirical");
  w.kv("error_source", r.error_source == StatsSource::kExact ? "exact" : "empirical");
  w.key("entries").begin_array();
  for (const auto& e : r.entries) {
    w.begin_object();
    w.kv("group", e.group_name);
    w.key("interval");
    write_interval(w, e.interval);
    w.kv("p_joint", e.stats.p_joint);
    w.kv("p_group", e.stats.p_group);
    w.kv("p_cond", e.stats.p_cond);
    w.key("mu_y");
    write_optional(w, e.stats.mu_y);
    w.key("mu_h");
    write_optional(w, e.stats.mu_h);
    w.kv("n_hat", e.stats.n_hat);
    w.key("calibration_error");
    write_optional(w, e.calibration_error);
    w.kv("interesting", e.interesting);
    w.kv("violation", e.violation);
    w.kv("note", e.note);
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

inline void write_audit_csv(std::ostream& os, const std::vector<AuditReport>& reports) {
  os << "predictor,group,interval_lo,interval_hi,interval_closed,p_joint,p_group,p_cond,"
        "mu_y,mu_h,n_hat,calibration_error,interesting,violation,note\n";
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  for (const auto& r : reports) {
    for (const auto& e : r.entries) {
      os << r.predictor << "," << e.group_name << "," << num(e.interval.lo) << ","
         << num(e.interval.hi) << "," << (e.interval.closed_hi ? 1 : 0) << ","
         << num(e.stats.p_joint) << "," << num(e.stats.p_group) << "," << num(e.stats.p_cond)
         << "," << opt(e.stats.mu_y) << "," << opt(e.stats.mu_h) << "," << e.stats.n_hat << ","
         << opt(e.calibration_error) << "," << (e.interesting ? 1 : 0) << ","
         << (e.violation ? 1 : 0) << "," << e.note << "\n";
    }
  }
}

inline void emit(const std::string& text, const std::string& output_path, std::ostream& out) {
  if (output_path.empty()) {
    out << text << "\n";
  } else {
    std::ofstream f(output_path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot write '" + output_path + "'");
    f << text << "\n";
  }
}

inline IntervalPartition partition_for(const Dataset& ds, const RunConfig& cfg) {
  if (cfg.mode == RunConfig::Mode::kFiniteY) return partition_of(ds.finite_space());
  return partition_of(PredictionSpace::continuous(cfg.lambda));
}

// The lambda fed into the finite-class bound: the width-equivalent of the
// partition actually in use (1 / number of intervals).
inline double bound_lambda(const IntervalPartition& partition) {
  return 1.0 / static_cast<double>(partition.size());
}

struct VerifyInstance {
  FiniteDistribution dist;
  PredictorClass predictors;
  SubpopulationCollection groups;
  IntervalPartition partition;
  std::string description;
};

}  // namespace cli_detail

/// Runs one CLI invocation. `args` excludes the program name.
inline int run_command(const std::vector<std::string>& args, std::ostream& out,
                       std::ostream& err) {
  using namespace cli_detail;

  CLI::App app{"multicalibration auditing, sample-size bounds and convergence experiments"};
  app.require_subcommand(1);

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "audit dataset predictors for multicalibration");
  CommonFlags audit_flags;
  std::string audit_data, audit_csv;
  bool audit_exact = false;
  audit_cmd->add_option("--data", audit_data, "dataset CSV")->required();
  audit_cmd->add_flag("--exact", audit_exact,
                      "treat rows as an exact distribution instead of a sample");
  audit_cmd->add_option("--csv", audit_csv, "also write flattened per-category CSV here");
  audit_flags.attach(audit_cmd);

  // sample-size
  auto* size_cmd = app.add_subcommand("sample-size", "print every applicable sample bound");
  CommonFlags size_flags;
  std::string size_data;
  std::uint64_t size_card_gamma = 1, size_card_h = 1, size_card_y = 2, size_dim = 1;
  std::uint64_t size_budget = 0;
  size_cmd->add_option("--data", size_data, "derive cardinalities from this dataset");
  size_cmd->add_option("--card-gamma", size_card_gamma, "number of subpopulations");
  size_cmd->add_option("--card-h", size_card_h, "number of predictors");
  size_cmd->add_option("--card-y", size_card_y, "number of prediction values");
  size_cmd->add_option("--dim", size_dim, "graph dimension of the class");
  size_cmd->add_option("--m", size_budget,
                       "also invert the bounds: smallest epsilon achievable with m samples");
  size_flags.attach(size_cmd);

  // verify
  auto* verify_cmd =
      app.add_subcommand("verify", "Monte Carlo failure rate of uniform convergence");
  CommonFlags verify_flags;
  std::string verify_data;
  bool verify_fixture = false;
  std::uint64_t verify_m = 0;
  auto* verify_data_opt = verify_cmd->add_option("--data", verify_data, "dataset CSV (exact mode)");
  auto* verify_fixture_opt = verify_cmd->add_flag(
      "--fixture", verify_fixture, "use the built-in two-coin fixture (epsilon, gamma, psi)");
  verify_data_opt->excludes(verify_fixture_opt);
  verify_cmd->add_option("--m", verify_m, "sample size per trial (default: finite-class bound)");
  verify_flags.attach(verify_cmd);

  // dims
  auto* dims_cmd = app.add_subcommand("dims", "exact dimensions and binarization checks");
  CommonFlags dims_flags;
  std::string dims_data;
  dims_cmd->add_option("--data", dims_data, "dataset CSV")->required();
  dims_flags.attach(dims_cmd);

  // lower-bound-demo
  auto* demo_cmd = app.add_subcommand(
      "lower-bound-demo", "distinguishing-experiment accuracy across a sample-size grid");
  CommonFlags demo_flags;
  demo_flags.attach(demo_cmd);

  std::vector<const char*> argv;
  argv.push_back(kToolName);
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (app.got_subcommand(audit_cmd)) {
      const RunConfig cfg = audit_flags.resolve();
      const Dataset ds = load_dataset(audit_data);
      const IntervalPartition partition = partition_for(ds, cfg);
      AuditOptions opt;
      opt.alpha = cfg.alpha;
      opt.gamma = cfg.gamma;
      opt.psi = cfg.psi;

      std::vector<AuditReport> reports;
      if (audit_exact) {
        const FiniteDistribution d = ds.as_uniform_distribution();
        for (const auto& h : ds.predictors) {
          reports.push_back(audit(h, ds.groups, partition, opt, d));
        }
      } else {
        const LabeledSample s = ds.as_sample();
        for (const auto& h : ds.predictors) {
          reports.push_back(audit(h, ds.groups, partition, opt, s));
        }
      }
      bool all_pass = true;
      std::size_t violations = 0;
      for (const auto& r : reports) {
        all_pass = all_pass && r.verdict;
        violations += r.violation_count;
      }

      JsonWriter w;
      w.begin_object();
      write_header(w, "audit", cfg);
      w.key("data").begin_object();
      w.kv("path", audit_data);
      w.kv("rows", ds.labels.size());
      w.key("predictors").begin_array();
      for (const auto& h : ds.predictors) w.value(h.name());
      w.end_array();
      w.key("groups").begin_array();
      for (const auto& g : ds.groups) w.value(g.name());
      w.end_array();
      w.end_object();
      w.key("partition").begin_object();
      w.kv("kind", partition.kind() == IntervalPartition::Kind::kGrid ? "grid" : "singletons");
      w.kv("intervals", partition.size());
      w.key("lambda");
      write_optional(w, partition.lambda());
      w.end_object();
      w.kv("source", audit_exact ? "exact" : "empirical");
      w.key("reports").begin_array();
      for (const auto& r : reports) write_audit_report(w, r);
      w.end_array();
      w.kv("violations", violations);
      w.kv("verdict", all_pass);
      w.end_object();
      emit(w.str(), audit_flags.output_path, out);

      if (!audit_csv.empty()) {
        std::ofstream f(audit_csv, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot write '" + audit_csv + "'");
        write_audit_csv(f, reports);
      }
      return all_pass ? 0 : 1;
    }

    if (app.got_subcommand(size_cmd)) {
      const RunConfig cfg = size_flags.resolve();
      BoundParams p;
      p.epsilon = cfg.epsilon;
      p.delta = cfg.delta;
      p.gamma = cfg.gamma;
      p.psi = cfg.psi;
      p.lambda = cfg.lambda;
      p.card_gamma = size_card_gamma;
      p.card_H = size_card_h;
      p.card_Y = size_card_y;
      p.d = size_dim;
      p.c_graph = cfg.c_graph;
      p.c_fund = cfg.c_fund;
      p.c_lower = cfg.c_lower;
      std::size_t rows = 0;
      if (!size_data.empty()) {
        const Dataset ds = load_dataset(size_data);
        rows = ds.labels.size();
        p.card_gamma = ds.groups.size();
        p.card_H = ds.predictors.size();
        const IntervalPartition partition = partition_for(ds, cfg);
        p.card_Y = partition.size();
        p.lambda = bound_lambda(partition);
      }

      JsonWriter w;
      w.begin_object();
      write_header(w, "sample-size", cfg);
      w.key("inputs").begin_object();
      w.kv("card_gamma", p.card_gamma);
      w.kv("card_H", p.card_H);
      w.kv("card_Y", p.card_Y);
      w.kv("d", p.d);
      w.kv("lambda", p.lambda);
      if (!size_data.empty()) w.kv("data_rows", rows);
      w.end_object();
      auto write_bound = [&](const char* name, const SampleSize& s) {
        w.key(name).begin_object();
        if (s.astronomical) {
          w.kv("astronomical", true);
          w.key("value").null();
        } else {
          w.kv("astronomical", false);
          w.kv("value", s.value);
        }
        w.end_object();
      };
      w.key("bounds").begin_object();
      write_bound("finite_class", finite_class_bound(p));
      write_bound("graph_dimension", graph_dim_bound(p));
      write_bound("lower", lower_bound(p));
      if (cfg.gamma < 1.0) {
        write_bound("subpopulation_coverage",
                    subpopulation_coverage_bound(p.gamma, p.delta, p.card_gamma));
      } else {
        w.key("subpopulation_coverage").null();
      }
      write_bound("binary_uc", binary_uc_bound(p.d, p.epsilon, p.delta, p.c_fund));
      w.kv("category_occupancy_threshold", category_occupancy_threshold(p));
      w.end_object();
      if (size_budget > 0) {
        const auto eps_finite = achievable_epsilon(size_budget, p, BoundMode::kFiniteClass);
        const auto eps_graph = achievable_epsilon(size_budget, p, BoundMode::kGraphDimension);
        w.key("achievable_epsilon").begin_object();
        w.kv("m", size_budget);
        w.key("finite_class");
        write_optional(w, eps_finite);
        w.key("graph_dimension");
        write_optional(w, eps_graph);
        w.end_object();
      }
      w.end_object();
      emit(w.str(), size_flags.output_path, out);
      return 0;
    }

    if (app.got_subcommand(verify_cmd)) {
      const RunConfig cfg = verify_flags.resolve();
      std::optional<VerifyInstance> inst;
      if (!verify_data.empty()) {
        Dataset ds = load_dataset(verify_data);
        IntervalPartition partition = partition_for(ds, cfg);
        inst.emplace(VerifyInstance{ds.as_uniform_distribution(), ds.predictors, ds.groups,
                                    std::move(partition), "dataset:" + verify_data});
      } else if (verify_fixture) {
        auto fx = build_lower_bound_fixture(cfg.epsilon, cfg.gamma, cfg.psi);
        inst.emplace(VerifyInstance{fx.d1, fx.predictors, fx.groups, fx.partition,
                                    "two-coin fixture"});
      } else {
        throw CLI::ValidationError("verify", "needs --data or --fixture");
      }

      BoundParams p;
      p.epsilon = cfg.epsilon;
      p.delta = cfg.delta;
      p.gamma = cfg.gamma;
      p.psi = cfg.psi;
      p.lambda = bound_lambda(inst->partition);
      p.card_gamma = inst->groups.size();
      p.card_H = inst->predictors.size();
      std::uint64_t m = verify_m;
      if (m == 0) {
        const SampleSize s = finite_class_bound(p);
        if (s.astronomical) {
          throw LimitExceeded("finite-class bound is astronomical; pass --m explicitly");
        }
        m = s.value;
      }

      const auto outcomes =
          run_deviation_trials(inst->dist, inst->predictors, inst->groups, inst->partition,
                               cfg.gamma, cfg.psi, m, cfg.trials, cfg.master_seed);
      std::size_t failures = 0;
      for (const auto& o : outcomes) {
        if (o.sup_deviation > cfg.epsilon) ++failures;
      }
      const double rate = static_cast<double>(failures) / static_cast<double>(cfg.trials);

      JsonWriter w;
      w.begin_object();
      write_header(w, "verify", cfg);
      w.kv("instance", inst->description);
      w.kv("m", m);
      w.kv("m_is_finite_class_bound", verify_m == 0);
      w.kv("occupancy_threshold", category_occupancy_threshold(p));
      w.kv("failure_rate", rate);
      w.kv("failures", failures);
      w.key("trials").begin_array();
      for (const auto& o : outcomes) {
        w.begin_object();
        w.kv("seed", o.seed);
        w.key("sup_deviation").value(o.sup_deviation);  // null when infinite
        w.kv("infinite", !std::isfinite(o.sup_deviation));
        w.kv("empty_interesting", o.empty_interesting_count);
        if (o.worst.has_value()) {
          w.key("worst").begin_object();
          w.kv("predictor", o.worst->predictor);
          w.kv("group", o.worst->group);
          w.key("interval");
          write_interval(w, o.worst->interval);
          w.end_object();
        } else {
          w.key("worst").null();
        }
        w.end_object();
      }
      w.end_array();
      w.end_object();
      emit(w.str(), verify_flags.output_path, out);
      return 0;
    }

    if (app.got_subcommand(dims_cmd)) {
      const RunConfig cfg = dims_flags.resolve();
      const Dataset ds = load_dataset(dims_data);
      const PredictionSpace space = ds.finite_space();
      const auto& values = space.values();
      std::vector<DomainPoint> points;
      for (std::size_t i = 0; i < ds.domain.size(); ++i) points.push_back(ds.domain.at(i));

      const auto graph_report =
          check_lemma_graph(ds.predictors, points, values, cfg.max_domain_for_dims,
                            cfg.max_y_for_dims);
      JsonWriter w;
      w.begin_object();
      write_header(w, "dims", cfg);
      w.kv("data", dims_data);
      w.kv("domain_size", ds.domain.size());
      w.kv("graph_dimension", graph_report.graph_dim);
      bool phi_all = true;
      w.key("per_value").begin_array();
      for (const auto& [v, vc_hv] : graph_report.vc_by_value) {
        const auto hv = binarize_class(ds.predictors, v);
        const auto phi_report = check_lemma_phi(hv, points, std::max<std::size_t>(
                                                                20, cfg.max_domain_for_dims));
        phi_all = phi_all && phi_report.holds;
        w.begin_object();
        w.kv("value", v);
        w.kv("vc_binarized", vc_hv);
        w.kv("vc_true_positive", phi_report.vc_pairs);
        w.kv("holds", vc_hv <= graph_report.graph_dim && phi_report.holds);
        w.end_object();
      }
      w.end_array();
      w.kv("binarized_le_graph", graph_report.holds);
      w.kv("true_positive_le_binarized", phi_all);
      w.end_object();
      emit(w.str(), dims_flags.output_path, out);
      return 0;
    }

    if (app.got_subcommand(demo_cmd)) {
      const RunConfig cfg = demo_flags.resolve();
      if (!(cfg.epsilon < 0.5)) {
        throw std::invalid_argument("lower-bound-demo needs epsilon < 0.5");
      }
      const auto fx = build_lower_bound_fixture(cfg.epsilon, cfg.gamma, cfg.psi);
      BoundParams p;
      p.epsilon = cfg.epsilon;
      p.delta = cfg.delta;
      p.gamma = cfg.gamma;
      p.psi = cfg.psi;
      p.c_lower = cfg.c_lower;
      const std::uint64_t lb = lower_bound(p).value;

      JsonWriter w;
      w.begin_object();
      write_header(w, "lower-bound-demo", cfg);
      w.kv("lower_bound", lb);
      w.key("grid").begin_array();
      const std::pair<const char*, double> grid[] = {
          {"1/16", 1.0 / 16.0}, {"1/4", 0.25}, {"1", 1.0},
          {"4", 4.0},           {"16", 16.0},  {"100", 100.0},
      };
      std::size_t grid_index = 0;
      for (const auto& [label, mult] : grid) {
        const auto m = static_cast<std::uint64_t>(
            std::max(1.0, std::floor(static_cast<double>(lb) * mult)));
        const double acc = distinguishing_experiment(
            fx, m, cfg.trials, derive_stream_seed(cfg.master_seed, 1000 + grid_index++));
        w.begin_object();
        w.kv("multiplier", label);
        w.kv("m", m);
        w.kv("accuracy", acc);
        w.end_object();
      }
      w.end_array();
      w.end_object();
      emit(w.str(), demo_flags.output_path, out);
      return 0;
    }

    return 2;  // unreachable: require_subcommand guards
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << " (line " << e.line();
    if (!e.column().empty()) err << ", column " << e.column();
    err << ")\n";
    return 2;
  } catch (const LimitExceeded& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace mcal
