#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "crqkit/features.hpp"
#include "crqkit/inference.hpp"
#include "crqkit/panel_io.hpp"

namespace crqkit {

enum class IndexMethod { crq, cancor };

const char* index_method_name(IndexMethod m);

struct IndexModel {
  Eigen::VectorXd beta;   // over design columns
  Eigen::VectorXd alpha;  // over responses
  IndexMethod method = IndexMethod::crq;
  int train_window_end = 0;
  int horizon = 0;
  std::vector<std::string> column_names;    // training design columns
  std::vector<std::string> response_names;
};

// x_star * beta per company. Column names must match the training design
// exactly; mismatches are a schema error, never silently reordered.
Eigen::VectorXd apply_index(const IndexModel& model, const DesignMatrix& design);

struct CalibrationFit {
  double intercept = 0.0;
  double slope = 0.0;
  Eigen::VectorXd fitted;
};

struct Predictions {
  std::vector<std::string> response_names;
  Eigen::MatrixXd fitted;  // N x q
  std::vector<CalibrationFit> fits;
};

// Per-response calibration regression on the index: median regression for
// the crq index, least squares for the cancor index. Fitted values are the
// two-years-ahead predictions.
Predictions predict_ahead(const Eigen::VectorXd& index_values, const Eigen::MatrixXd& responses,
                          const std::vector<std::string>& response_names, IndexMethod method);

struct EvalCell {
  double mae = 0.0;
  double rmse = 0.0;
  double mae_sd = 0.0;   // weighted bootstrap over companies
  double rmse_sd = 0.0;
  int n = 0;
};

// Pooled MAE/RMSE over aligned prediction/observation pairs (years already
// concatenated). company_ids group pooled rows so bootstrap weights are
// drawn per company; pass one id per row, repeated across years.
EvalCell evaluate(std::span<const double> predicted, std::span<const double> observed,
                  const std::vector<std::string>& company_ids, const BootstrapSpec& spec);

struct JointRegression {
  double intercept = 0.0;
  double coef_ceo = 0.0;
  double coef_index = 0.0;
  double se_ceo = 0.0;
  double se_index = 0.0;
  double t_ceo = 0.0;
  double t_index = 0.0;
  double t_ratio = 0.0;  // |t_index / t_ceo|
  double p_one_sided_ceo = 0.0;
  double p_two_sided_ceo = 0.0;
  double p_one_sided_index = 0.0;
  double p_two_sided_index = 0.0;
  bool exact_fit = false;
};

// Median regression of response on intercept + CEOtot + index with bootstrap
// t statistics. An exact fit skips the bootstrap (its std errors would all
// be zero) and reports sign-of-estimate infinities instead.
JointRegression joint_regression(const Eigen::VectorXd& response, const Eigen::VectorXd& ceo_tot,
                                 const Eigen::VectorXd& index, const BootstrapSpec& spec);

enum class PayClass { overpaid, underpaid, degenerate };

const char* pay_class_name(PayClass c);

struct CeoCompanyRow {
  std::string company_id;
  double actual = 0.0;
  double predicted = 0.0;
  double residual = 0.0;       // actual - predicted
  double percent = 0.0;        // 100 * residual / |predicted|
  bool percent_defined = true;
  PayClass classification = PayClass::degenerate;
};

struct CeoResidualTStat {
  std::string response;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  bool significant = false;  // |t| above the Bonferroni critical value
};

struct CeoResidualReport {
  std::vector<CeoCompanyRow> companies;
  std::vector<CeoResidualTStat> t_stats;
  double bonferroni_critical_value = 0.0;
  int num_tests = 0;
  bool degenerate = false;  // CEOtot exactly predicted; classification undefined
  Eigen::VectorXd index_alpha;  // coefficients behind the index
  Eigen::VectorXd index_beta;
  Eigen::VectorXd index_values;
  Eigen::VectorXd residuals;
};

// Residual analysis of CEO pay against an index built without CEO columns:
// fits CEOtot ~ index by median regression, classifies companies over/under
// paid by residual sign, and median-regresses each future response on the
// residual with a bootstrap t statistic per response. When `trained` is
// given its coefficients are applied to the design instead of refitting.
CeoResidualReport ceo_residual_analysis(const DesignMatrix& design_without_ceo,
                                        const Eigen::VectorXd& ceo_tot,
                                        const Eigen::MatrixXd& future_responses,
                                        const std::vector<std::string>& future_names,
                                        const BootstrapSpec& spec,
                                        const IndexModel* trained = nullptr);

struct TrendLine {
  double intercept = 0.0;
  double slope = 0.0;
};

struct TrendSummary {
  std::vector<int> years;
  std::vector<double> mean;  // cross-company mean of CEOt per year
  std::vector<double> sd;    // cross-company sample SD per year
  TrendLine mean_line;
  TrendLine upper_line;  // through (year, mean + sd)
  TrendLine lower_line;  // through (year, mean - sd)
};

TrendSummary trend_summary(const PanelDataset& panel);

struct QqPair {
  double observed = 0.0;
  double fitted = 0.0;
};

// Sorted (observed, fitted) pairs for quantile-quantile plotting.
std::vector<QqPair> qq_data(std::span<const double> observed, std::span<const double> fitted);

}  // namespace crqkit
