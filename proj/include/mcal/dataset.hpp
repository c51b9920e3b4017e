// dataset.hpp - CSV dataset ingestion, export, and run configuration.
//
// Dataset format: UTF-8 CSV with a header row. One `id` column (unique row
// ids), one `y` column (labels, strictly 0 or 1), any number of `pred:NAME`
// columns (scores in [0,1], "." decimal separator) and `group:NAME` columns
// (membership, strictly 0 or 1). Errors carry the 1-based file line (the
// header is line 1) and the column name.

#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mcal/core.hpp"

namespace mcal {

/// An in-memory dataset: a finite domain of rows with labels, score columns
/// as predictors, and membership columns as subpopulations.
struct Dataset {
  Domain domain;
  std::vector<int> labels;  // per row, in row order
  PredictorClass predictors;
  SubpopulationCollection groups;

  /// Rows as i.i.d. draws, in file order.
  LabeledSample as_sample() const {
    std::vector<LabeledItem> items;
    items.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      items.push_back({DomainPoint{static_cast<std::uint32_t>(i)}, labels[i]});
    }
    return LabeledSample(std::move(items));
  }

  /// Rows as an exact distribution, uniform over rows. Category masses in
  /// this view accumulate float rounding of order ulp; for threshold
  /// comparisons that must be exact at rational boundaries, audit the sample
  /// view instead (its proportions are single divisions of integer counts).
  FiniteDistribution as_uniform_distribution() const {
    std::vector<WeightedOutcome> rows;
    const double p = 1.0 / static_cast<double>(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      rows.push_back({DomainPoint{static_cast<std::uint32_t>(i)}, labels[i], p});
    }
    return FiniteDistribution(std::move(rows));
  }

  /// The finite prediction space of all distinct score values in the data.
  PredictionSpace finite_space() const {
    std::set<double> distinct;
    for (const auto& h : predictors) {
      for (double v : h.values()) distinct.insert(v);
    }
    return PredictionSpace::finite(std::vector<double>(distinct.begin(), distinct.end()));
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parses a dataset from a stream. Throws ParseError / DomainViolation with
/// the offending line and column.
inline Dataset parse_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file", 1, "");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = detail::split_csv_line(line);
  std::ptrdiff_t id_col = -1, y_col = -1;
  std::vector<std::pair<std::size_t, std::string>> pred_cols, group_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "id") {
      if (id_col >= 0) throw ParseError("duplicate id column", 1, name);
      id_col = static_cast<std::ptrdiff_t>(c);
    } else if (name == "y") {
      if (y_col >= 0) throw ParseError("duplicate y column", 1, name);
      y_col = static_cast<std::ptrdiff_t>(c);
    } else if (name.rfind("pred:", 0) == 0 && name.size() > 5) {
      pred_cols.emplace_back(c, name.substr(5));
    } else if (name.rfind("group:", 0) == 0 && name.size() > 6) {
      group_cols.emplace_back(c, name.substr(6));
    } else {
      throw ParseError("unknown column '" + name + "' (expected id, y, pred:*, group:*)", 1,
                       name);
    }
  }
  if (id_col < 0) throw ParseError("missing id column", 1, "id");
  if (y_col < 0) throw ParseError("missing y column", 1, "y");
  if (pred_cols.empty()) throw ParseError("no pred: columns", 1, "");

  Domain domain;
  std::vector<int> labels;
  std::vector<std::vector<double>> pred_values(pred_cols.size());
  std::vector<std::vector<std::uint8_t>> group_masks(group_cols.size());

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no, "");
    }
    const std::string& id = fields[static_cast<std::size_t>(id_col)];
    if (domain.find(id).has_value()) {
      throw ParseError("duplicate id '" + id + "'", line_no, "id");
    }
    domain.add(id);

    const std::string& y = fields[static_cast<std::size_t>(y_col)];
    if (y == "0" || y == "1") {
      labels.push_back(y == "1" ? 1 : 0);
    } else {
      throw DomainViolation("label must be 0 or 1, got '" + y + "'", line_no, "y");
    }

    for (std::size_t j = 0; j < pred_cols.size(); ++j) {
      const std::string& field = fields[pred_cols[j].first];
      const auto v = detail::parse_double(field);
      if (!v.has_value()) {
        throw ParseError("not a number: '" + field + "'", line_no, header[pred_cols[j].first]);
      }
      if (!(*v >= 0.0 && *v <= 1.0)) {
        throw DomainViolation("prediction outside [0,1]: " + field, line_no,
                              header[pred_cols[j].first]);
      }
      pred_values[j].push_back(*v);
    }
    for (std::size_t j = 0; j < group_cols.size(); ++j) {
      const std::string& field = fields[group_cols[j].first];
      if (field == "0" || field == "1") {
        group_masks[j].push_back(field == "1" ? 1 : 0);
      } else {
        throw DomainViolation("membership must be 0 or 1, got '" + field + "'", line_no,
                              header[group_cols[j].first]);
      }
    }
  }
  if (labels.empty()) throw ParseError("no data rows", line_no, "");

  std::vector<Predictor> hs;
  for (std::size_t j = 0; j < pred_cols.size(); ++j) {
    hs.emplace_back(pred_cols[j].second, std::move(pred_values[j]));
  }
  std::vector<Subpopulation> gs;
  for (std::size_t j = 0; j < group_cols.size(); ++j) {
    try {
      gs.emplace_back(group_cols[j].second, std::move(group_masks[j]));
    } catch (const std::invalid_argument&) {
      throw DomainViolation("group '" + group_cols[j].second + "' has no members", 1,
                            header[group_cols[j].first]);
    }
  }

  Dataset ds{std::move(domain), std::move(labels), PredictorClass(std::move(hs)),
             SubpopulationCollection(std::move(gs))};
  return ds;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0, "");
  return parse_dataset(in);
}

/// Row multiplicities that reproduce the distribution at a given resolution:
/// entry i gets round(p_i * resolution) rows.
inline std::vector<std::uint64_t> proportional_multiplicities(const FiniteDistribution& d,
                                                              std::uint64_t resolution) {
  std::vector<std::uint64_t> out;
  for (const auto& e : d.support()) {
    out.push_back(static_cast<std::uint64_t>(std::llround(e.probability *
                                                          static_cast<double>(resolution))));
  }
  return out;
}

/// Writes a distribution as a dataset: each support entry becomes
/// round(p * resolution) identical rows under fresh ids. Reloading the file
/// and auditing its uniform row distribution reproduces the original audit
/// verdicts whenever the multiplicities are exactly proportional.
inline void export_distribution_csv(std::ostream& os, const Domain& domain,
                                    const FiniteDistribution& d,
                                    const SubpopulationCollection& groups,
                                    const PredictorClass& predictors, std::uint64_t resolution) {
  os << "id,y";
  for (const auto& h : predictors) os << ",pred:" << h.name();
  for (const auto& g : groups) os << ",group:" << g.name();
  os << "\n";
  const auto mult = proportional_multiplicities(d, resolution);
  char buf[40];
  for (std::size_t k = 0; k < d.support_size(); ++k) {
    const auto& e = d.support()[k];
    for (std::uint64_t c = 0; c < mult[k]; ++c) {
      os << domain.id_of(e.point) << "_" << k << "_" << c << "," << e.label;
      for (const auto& h : predictors) {
        std::snprintf(buf, sizeof(buf), "%.17g", h(e.point));
        os << "," << buf;
      }
      for (const auto& g : groups) os << "," << (g.contains(e.point) ? 1 : 0);
      os << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Run configuration

/// All tunable thresholds and knobs of a CLI run, with documented defaults.
/// A config file is plain `key=value` lines ('#' starts a comment);
/// command-line flags override file values.
struct RunConfig {
  double alpha = 0.05;
  double gamma = 0.1;
  double psi = 0.1;
  double epsilon = 0.05;
  double delta = 0.05;
  double lambda = 0.1;
  enum class Mode { kFiniteY, kContinuousY };
  Mode mode = Mode::kContinuousY;
  std::uint64_t trials = 200;
  std::uint64_t master_seed = 1;
  double c_graph = 64.0;
  double c_fund = 8.0;
  double c_lower = 1.0;
  std::uint64_t max_domain_for_dims = 12;
  std::uint64_t max_y_for_dims = 8;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0,1]");
    if (!(psi > 0.0 && psi <= 1.0)) throw std::invalid_argument("psi must lie in (0,1]");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
    PredictionSpace::continuous(lambda);  // checks lambda in (0,1] with integral 1/lambda
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (!(c_graph > 0.0) || !(c_fund > 0.0) || !(c_lower > 0.0)) {
      throw std::invalid_argument("constants must be positive");
    }
  }

  static const char* mode_name(Mode m) {
    return m == Mode::kFiniteY ? "finite" : "continuous";
  }
};

/// Applies one `key=value` assignment. Throws invalid_argument for unknown
/// keys or unparsable values.
inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto as_double = [&](const char* what) {
    const auto v = detail::parse_double(value);
    if (!v) throw std::invalid_argument(std::string("config: bad number for ") + what);
    return *v;
  };
  auto as_u64 = [&](const char* what) {
    const auto v = detail::parse_double(value);
    if (!v || *v < 0 || *v != std::floor(*v)) {
      throw std::invalid_argument(std::string("config: bad count for ") + what);
    }
    return static_cast<std::uint64_t>(*v);
  };
  if (key == "alpha") cfg.alpha = as_double("alpha");
  else if (key == "gamma") cfg.gamma = as_double("gamma");
  else if (key == "psi") cfg.psi = as_double("psi");
  else if (key == "epsilon") cfg.epsilon = as_double("epsilon");
  else if (key == "delta") cfg.delta = as_double("delta");
  else if (key == "lambda") cfg.lambda = as_double("lambda");
  else if (key == "trials") cfg.trials = as_u64("trials");
  else if (key == "seed") cfg.master_seed = as_u64("seed");
  else if (key == "c_graph") cfg.c_graph = as_double("c_graph");
  else if (key == "c_fund") cfg.c_fund = as_double("c_fund");
  else if (key == "c_lower") cfg.c_lower = as_double("c_lower");
  else if (key == "max_domain_for_dims") cfg.max_domain_for_dims = as_u64("max_domain_for_dims");
  else if (key == "max_y_for_dims") cfg.max_y_for_dims = as_u64("max_y_for_dims");
  else if (key == "mode") {
    if (value == "finite") cfg.mode = RunConfig::Mode::kFiniteY;
    else if (value == "continuous") cfg.mode = RunConfig::Mode::kContinuousY;
    else throw std::invalid_argument("config: mode must be finite or continuous");
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

inline void apply_config_stream(RunConfig& cfg, std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config: expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const auto b2 = s.find_first_not_of(" \t");
      const auto e2 = s.find_last_not_of(" \t");
      s = b2 == std::string::npos ? std::string() : s.substr(b2, e2 - b2 + 1);
    };
    trim(key);
    trim(value);
    apply_config_entry(cfg, key, value);
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  apply_config_stream(cfg, in);
}

}  // namespace mcal
