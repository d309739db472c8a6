#include "crqkit/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crqkit/errors.hpp"

namespace crqkit {

namespace {

// Paper-style labels for transformed responses.
const char* log_label(Var v) {
  switch (v) {
    case Var::REV: return "logRev";
    case Var::Earn: return "logEarn";
    case Var::Eprof: return "logEprof";
    case Var::MCap: return "logMCap";
    case Var::TSR: return "logTSR";
    default: return var_name(v);
  }
}

std::string response_label(Transform t, Var v) {
  return t == Transform::none ? var_name(v) : log_label(v);
}

void validate_spec(const AggregationSpec& spec) {
  if (spec.window_years < 2) {
    throw DomainError("window_years must be at least 2 to form successive differences");
  }
  if (!(spec.discount_rate >= 0.0 && spec.discount_rate < 1.0)) {
    throw DomainError("discount_rate must lie in [0, 1)");
  }
  if (spec.horizon_years < 1) throw DomainError("horizon_years must be at least 1");
}

}  // namespace

const char* transform_name(Transform t) {
  switch (t) {
    case Transform::signed_log: return "signed_log";
    case Transform::log_max1: return "log_max1";
    case Transform::none: return "none";
  }
  return "unknown";
}

Transform transform_from_name(const std::string& name) {
  if (name == "signed_log") return Transform::signed_log;
  if (name == "log_max1") return Transform::log_max1;
  if (name == "none") return Transform::none;
  throw DomainError("unknown transform '" + name + "'");
}

double signed_log(double y) {
  if (!std::isfinite(y)) throw DomainError("signed_log requires a finite argument");
  const double magnitude = std::log(std::max(1.0, std::abs(y)));
  return y < 0.0 ? -magnitude : magnitude;
}

double log_max1(double y) {
  if (!std::isfinite(y)) throw DomainError("log_max1 requires a finite argument");
  return std::log(std::max(1.0, y));
}

double apply_transform(Transform t, double y) {
  switch (t) {
    case Transform::signed_log: return signed_log(y);
    case Transform::log_max1: return log_max1(y);
    case Transform::none:
      if (!std::isfinite(y)) throw DomainError("transform requires a finite argument");
      return y;
  }
  throw DomainError("unknown transform");
}

double discounted_average(std::span<const double> series, double rate) {
  if (series.empty()) throw DomainError("discounted_average requires a nonempty series");
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("discount rate must lie in [0, 1)");
  double weight = 1.0;
  double total = 0.0;
  double total_weight = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double value = series[series.size() - 1 - k];  // k = lag from the newest year
    if (!std::isfinite(value)) throw DomainError("discounted_average requires finite values");
    total += weight * value;
    total_weight += weight;
    weight *= 1.0 - rate;
  }
  return total / total_weight;
}

double min_successive_diff(std::span<const double> series) {
  if (series.size() < 2) {
    throw DomainError("min_successive_diff requires at least two observations");
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < series.size(); ++k) {
    if (!std::isfinite(series[k]) || !std::isfinite(series[k + 1])) {
      throw DomainError("min_successive_diff requires finite values");
    }
    best = std::min(best, series[k + 1] - series[k]);
  }
  return best;
}

std::vector<std::string> aggregate_column_names(Transform t, bool include_ceo) {
  std::vector<std::string> names;
  for (Var v : kExplanatoryRatios) {
    names.push_back(std::string(var_name(v)) + "wt");
    names.push_back(std::string(var_name(v)) + "minD");
  }
  if (include_ceo) {
    names.push_back("CEOtwt");
    names.push_back("CEOtminD");
  }
  for (Var v : kResponseVars) {
    names.push_back(response_label(t, v) + "wt");
    names.push_back(response_label(t, v) + "minD");
  }
  return names;
}

std::vector<std::string> response_column_names(Transform t) {
  std::vector<std::string> names;
  for (Var v : kResponseVars) names.push_back(response_label(t, v));
  return names;
}

Eigen::VectorXd aggregate_row(const PanelDataset& panel, int company, int window_start_year,
                              const AggregationSpec& spec, bool include_ceo) {
  validate_spec(spec);
  const int window_end_year = window_start_year + spec.window_years - 1;
  if (window_start_year < panel.first_year || window_end_year > panel.last_year) {
    throw CoverageError("window " + std::to_string(window_start_year) + "-" +
                        std::to_string(window_end_year) + " outside panel coverage " +
                        std::to_string(panel.first_year) + "-" + std::to_string(panel.last_year));
  }

  const std::size_t w = static_cast<std::size_t>(spec.window_years);
  std::vector<double> series(w);
  Eigen::VectorXd row(2 * (4 + (include_ceo ? 1 : 0) + 5));
  int col = 0;

  auto emit = [&](Var v, bool transformed) {
    for (std::size_t k = 0; k < w; ++k) {
      const double raw = panel.value(company, window_start_year + static_cast<int>(k), v);
      series[k] = transformed ? apply_transform(spec.transform, raw) : raw;
    }
    row(col++) = discounted_average(series, spec.discount_rate);
    row(col++) = min_successive_diff(series);
  };

  for (Var v : kExplanatoryRatios) emit(v, false);
  if (include_ceo) emit(Var::CEOt, true);
  for (Var v : kResponseVars) emit(v, true);
  return row;
}

DesignMatrix build_design_matrix(const PanelDataset& panel, const AggregationSpec& spec,
                                 int window_end_year, bool include_ceo) {
  validate_spec(spec);
  const int window_start_year = window_end_year - spec.window_years + 1;
  const int response_year = window_end_year + spec.horizon_years;
  if (window_start_year < panel.first_year || response_year > panel.last_year) {
    throw CoverageError("design needs years " + std::to_string(window_start_year) + "-" +
                        std::to_string(window_end_year) + " plus responses in " +
                        std::to_string(response_year) + "; panel covers " +
                        std::to_string(panel.first_year) + "-" + std::to_string(panel.last_year));
  }

  const std::vector<std::string> labels = panel.distinct_industries();
  std::string baseline = spec.baseline_industry.empty() ? labels.front() : spec.baseline_industry;
  if (std::find(labels.begin(), labels.end(), baseline) == labels.end()) {
    throw SchemaError("baseline industry '" + baseline + "' does not appear in the panel");
  }
  std::vector<std::string> dummy_labels;
  for (const std::string& label : labels) {
    if (label != baseline) dummy_labels.push_back(label);
  }

  const std::vector<std::string> agg_names = aggregate_column_names(spec.transform, include_ceo);
  const int n = panel.num_companies();
  const int k = 1 + static_cast<int>(dummy_labels.size()) + static_cast<int>(agg_names.size());

  DesignMatrix design;
  design.base_year = window_end_year;
  design.window_years = spec.window_years;
  design.horizon_years = spec.horizon_years;
  design.company_ids = panel.company_ids;
  design.column_names.push_back("intercept");
  design.column_names.insert(design.column_names.end(), dummy_labels.begin(), dummy_labels.end());
  design.column_names.insert(design.column_names.end(), agg_names.begin(), agg_names.end());
  design.response_names = response_column_names(spec.transform);

  design.x_star = Eigen::MatrixXd::Zero(n, k);
  design.y_star = Eigen::MatrixXd::Zero(n, static_cast<int>(kResponseVars.size()));
  for (int c = 0; c < n; ++c) {
    design.x_star(c, 0) = 1.0;
    const std::string& industry = panel.industries[static_cast<std::size_t>(c)];
    for (std::size_t d = 0; d < dummy_labels.size(); ++d) {
      if (dummy_labels[d] == industry) design.x_star(c, 1 + static_cast<int>(d)) = 1.0;
    }
    design.x_star.row(c).tail(static_cast<int>(agg_names.size())) =
        aggregate_row(panel, c, window_start_year, spec, include_ceo);
    for (std::size_t j = 0; j < kResponseVars.size(); ++j) {
      design.y_star(c, static_cast<int>(j)) =
          apply_transform(spec.transform, panel.value(c, response_year, kResponseVars[j]));
    }
  }
  return design;
}

}  // namespace crqkit
