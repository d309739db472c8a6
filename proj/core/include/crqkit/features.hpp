#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "crqkit/panel_io.hpp"

namespace crqkit {

enum class Transform { signed_log, log_max1, none };

const char* transform_name(Transform t);
Transform transform_from_name(const std::string& name);

// sign(y) * log(max(1, |y|)): identical to sign(y)*log|y| for |y| >= 1,
// zero on the unit interval so the map stays continuous through 0.
double signed_log(double y);

// log(max(1, y)).
double log_max1(double y);

double apply_transform(Transform t, double y);

// Lag-weighted window mean with weights (1 - rate)^lag, lag measured from
// the newest entry, normalized to sum one. Series is ordered oldest first.
double discounted_average(std::span<const double> series, double rate);

// Minimum of the successive differences s[k+1] - s[k].
double min_successive_diff(std::span<const double> series);

struct AggregationSpec {
  int window_years = 5;
  double discount_rate = 0.05;
  int horizon_years = 2;
  Transform transform = Transform::signed_log;
  std::string baseline_industry;  // empty: lexicographically first label
};

// Aggregated column labels in design order: one "wt" (discounted average)
// and one "minD" (minimum successive difference) column per variable.
// Responses and CEOt are labeled on the transformed scale.
std::vector<std::string> aggregate_column_names(Transform t, bool include_ceo);
std::vector<std::string> response_column_names(Transform t);

// Both aggregates for every variable of one company window, matching
// aggregate_column_names order. Series arrive oldest first.
Eigen::VectorXd aggregate_row(const PanelDataset& panel, int company, int window_start_year,
                              const AggregationSpec& spec, bool include_ceo);

struct DesignMatrix {
  Eigen::MatrixXd x_star;  // N x K
  Eigen::MatrixXd y_star;  // N x q, responses horizon_years after base_year
  std::vector<std::string> column_names;    // K
  std::vector<std::string> response_names;  // q
  std::vector<std::string> company_ids;     // N
  int base_year = 0;       // final year of the window
  int window_years = 0;
  int horizon_years = 0;
};

// Builds the explanatory matrix (intercept, industry dummies, aggregate
// columns) and the aligned transformed responses horizon_years ahead.
// With six industries and CEOt included this is N x 26.
DesignMatrix build_design_matrix(const PanelDataset& panel, const AggregationSpec& spec,
                                 int window_end_year, bool include_ceo);

}  // namespace crqkit
