#include "crqkit/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "crqkit/crq.hpp"
#include "crqkit/errors.hpp"
#include "crqkit/quantile_lp.hpp"
#include "crqkit/rng.hpp"

namespace crqkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// t statistic with the exact-fit convention: a zero standard error maps a
// zero estimate to 0 and a nonzero one to a signed infinity.
double safe_t(double estimate, double std_error) {
  if (std_error > 0.0) return estimate / std_error;
  if (estimate == 0.0) return 0.0;
  return estimate > 0.0 ? kInf : -kInf;
}

double p_upper(double t) { return std::isinf(t) ? (t > 0 ? 0.0 : 1.0) : 1.0 - normal_cdf(t); }

CalibrationFit least_squares_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(x.size());
  const double xbar = x.mean();
  const double ybar = y.mean();
  const double sxx = (x.array() - xbar).square().sum();
  if (sxx <= 0.0) throw RankError("regressor is constant");
  const double sxy = ((x.array() - xbar) * (y.array() - ybar)).sum();
  CalibrationFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  fit.fitted = fit.intercept + (fit.slope * x.array());
  (void)n;
  return fit;
}

CalibrationFit median_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd design(x.size(), 2);
  design.col(0).setOnes();
  design.col(1) = x;
  const QrFit qr = fit_quantile_regression({design, y, 0.5});
  CalibrationFit fit;
  fit.intercept = qr.coefficients(0);
  fit.slope = qr.coefficients(1);
  fit.fitted = design * qr.coefficients;
  return fit;
}

}  // namespace

const char* index_method_name(IndexMethod m) {
  return m == IndexMethod::crq ? "crq" : "cancor";
}

const char* pay_class_name(PayClass c) {
  switch (c) {
    case PayClass::overpaid: return "overpaid";
    case PayClass::underpaid: return "underpaid";
    case PayClass::degenerate: return "degenerate";
  }
  return "unknown";
}

Eigen::VectorXd apply_index(const IndexModel& model, const DesignMatrix& design) {
  if (model.column_names.size() != design.column_names.size()) {
    throw SchemaError("design has " + std::to_string(design.column_names.size()) +
                      " columns but the model was trained on " +
                      std::to_string(model.column_names.size()));
  }
  for (std::size_t j = 0; j < model.column_names.size(); ++j) {
    if (model.column_names[j] != design.column_names[j]) {
      throw SchemaError("design column " + std::to_string(j) + " is '" + design.column_names[j] +
                        "' but the model expects '" + model.column_names[j] + "'");
    }
  }
  if (model.beta.size() != design.x_star.cols()) {
    throw SchemaError("model coefficient count does not match the design");
  }
  return design.x_star * model.beta;
}

Predictions predict_ahead(const Eigen::VectorXd& index_values, const Eigen::MatrixXd& responses,
                          const std::vector<std::string>& response_names, IndexMethod method) {
  const int n = static_cast<int>(index_values.size());
  if (responses.rows() != n) throw DomainError("index and responses are not row-aligned");
  if (static_cast<int>(response_names.size()) != responses.cols()) {
    throw DomainError("one name per response column required");
  }
  if (n < 3) throw InsufficientDataError("calibration regression needs at least 3 observations");
  if ((index_values.maxCoeff() - index_values.minCoeff()) <=
      1e-12 * (1.0 + index_values.cwiseAbs().maxCoeff())) {
    throw RankError("index is constant; calibration regression is degenerate");
  }

  Predictions out;
  out.response_names = response_names;
  out.fitted = Eigen::MatrixXd(n, responses.cols());
  out.fits.reserve(static_cast<std::size_t>(responses.cols()));
  for (int j = 0; j < responses.cols(); ++j) {
    CalibrationFit fit = method == IndexMethod::crq
                             ? median_line(index_values, responses.col(j))
                             : least_squares_line(index_values, responses.col(j));
    out.fitted.col(j) = fit.fitted;
    out.fits.push_back(std::move(fit));
  }
  return out;
}

EvalCell evaluate(std::span<const double> predicted, std::span<const double> observed,
                  const std::vector<std::string>& company_ids, const BootstrapSpec& spec) {
  const std::size_t n = predicted.size();
  if (n == 0) throw DomainError("empty evaluation set");
  if (observed.size() != n) throw DomainError("predicted and observed lengths differ");
  if (!company_ids.empty() && company_ids.size() != n) {
    throw DomainError("one company id per row required");
  }
  if (spec.replications < 2) throw DomainError("bootstrap needs at least 2 replications");

  Eigen::VectorXd abs_err(static_cast<int>(n));
  Eigen::VectorXd sq_err(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double e = observed[i] - predicted[i];
    if (!std::isfinite(e)) throw DomainError("evaluation values must be finite");
    abs_err(static_cast<int>(i)) = std::abs(e);
    sq_err(static_cast<int>(i)) = e * e;
  }

  EvalCell cell;
  cell.n = static_cast<int>(n);
  cell.mae = abs_err.mean();
  cell.rmse = std::sqrt(sq_err.mean());

  // Bootstrap weights are drawn per company so rows pooled across years
  // move together.
  std::vector<int> group(n);
  int num_groups = 0;
  if (company_ids.empty()) {
    for (std::size_t i = 0; i < n; ++i) group[i] = static_cast<int>(i);
    num_groups = static_cast<int>(n);
  } else {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] = index.emplace(company_ids[i], num_groups);
      if (inserted) ++num_groups;
      group[i] = it->second;
    }
  }

  rng::Stream master(spec.seed);
  Eigen::VectorXd gweights(num_groups);
  double mae_sum = 0.0, mae_sq = 0.0, rmse_sum = 0.0, rmse_sq = 0.0;
  for (int r = 0; r < spec.replications; ++r) {
    rng::Stream stream = master.fork(static_cast<std::uint64_t>(r) + 1);
    if (spec.scheme == BootstrapScheme::resample && num_groups > 1) {
      gweights.setZero();
      for (int k = 0; k < num_groups; ++k) {
        const int idx =
            std::min(num_groups - 1, static_cast<int>(stream.next_uniform() * num_groups));
        gweights(idx) += 1.0;
      }
    } else {
      for (int g = 0; g < num_groups; ++g) gweights(g) = stream.next_exponential();
    }
    double wsum = 0.0, wa = 0.0, ws = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = gweights(group[i]);
      wsum += w;
      wa += w * abs_err(static_cast<int>(i));
      ws += w * sq_err(static_cast<int>(i));
    }
    const double mae_r = wa / wsum;
    const double rmse_r = std::sqrt(ws / wsum);
    mae_sum += mae_r;
    mae_sq += mae_r * mae_r;
    rmse_sum += rmse_r;
    rmse_sq += rmse_r * rmse_r;
  }
  const double R = static_cast<double>(spec.replications);
  cell.mae_sd = std::sqrt(std::max(0.0, (mae_sq - mae_sum * mae_sum / R) / (R - 1.0)));
  cell.rmse_sd = std::sqrt(std::max(0.0, (rmse_sq - rmse_sum * rmse_sum / R) / (R - 1.0)));
  return cell;
}

JointRegression joint_regression(const Eigen::VectorXd& response, const Eigen::VectorXd& ceo_tot,
                                 const Eigen::VectorXd& index, const BootstrapSpec& spec) {
  const int n = static_cast<int>(response.size());
  if (ceo_tot.size() != n || index.size() != n) throw DomainError("vectors are not aligned");

  Eigen::MatrixXd design(n, 3);
  design.col(0).setOnes();
  design.col(1) = ceo_tot;
  design.col(2) = index;
  const QrProblem problem{design, response, 0.5};
  const QrFit base = fit_quantile_regression(problem);

  JointRegression out;
  out.intercept = base.coefficients(0);
  out.coef_ceo = base.coefficients(1);
  out.coef_index = base.coefficients(2);

  const double scale = 1.0 + response.cwiseAbs().sum();
  out.exact_fit = base.objective <= 1e-12 * scale;
  if (out.exact_fit) {
    out.se_ceo = 0.0;
    out.se_index = 0.0;
  } else {
    const WeightedEstimator estimator = [&problem](const Eigen::VectorXd& weights) {
      return fit_quantile_regression(problem, weights).coefficients;
    };
    const BootstrapSummary summary = run_bootstrap(estimator, n, spec);
    out.se_ceo = summary.std_errors(1);
    out.se_index = summary.std_errors(2);
  }
  out.t_ceo = safe_t(out.coef_ceo, out.se_ceo);
  out.t_index = safe_t(out.coef_index, out.se_index);
  if (std::abs(out.t_ceo) > 0.0) {
    out.t_ratio = std::abs(out.t_index) / std::abs(out.t_ceo);
  } else {
    out.t_ratio = std::abs(out.t_index) > 0.0 ? kInf : 0.0;
  }
  out.p_one_sided_ceo = p_upper(out.t_ceo);
  out.p_two_sided_ceo = 2.0 * p_upper(std::abs(out.t_ceo));
  out.p_one_sided_index = p_upper(out.t_index);
  out.p_two_sided_index = 2.0 * p_upper(std::abs(out.t_index));
  return out;
}

CeoResidualReport ceo_residual_analysis(const DesignMatrix& design_without_ceo,
                                        const Eigen::VectorXd& ceo_tot,
                                        const Eigen::MatrixXd& future_responses,
                                        const std::vector<std::string>& future_names,
                                        const BootstrapSpec& spec, const IndexModel* trained) {
  const int n = static_cast<int>(design_without_ceo.x_star.rows());
  if (ceo_tot.size() != n) throw DomainError("one CEOt value per company required");
  if (future_responses.rows() != n) throw DomainError("future responses are not row-aligned");
  if (static_cast<int>(future_names.size()) != future_responses.cols()) {
    throw DomainError("one name per future response column required");
  }
  for (const std::string& name : design_without_ceo.column_names) {
    if (name.rfind("CEOt", 0) == 0) {
      throw DomainError("design must be built with include_ceo=false");
    }
  }

  CeoResidualReport report;
  if (trained != nullptr) {
    report.index_values = apply_index(*trained, design_without_ceo);
    report.index_alpha = trained->alpha;
    report.index_beta = trained->beta;
  } else {
    const CrqFit fit =
        fit_crq({design_without_ceo.x_star, design_without_ceo.y_star, 0.5});
    report.index_values = design_without_ceo.x_star * fit.beta;
    report.index_alpha = fit.alpha;
    report.index_beta = fit.beta;
  }

  Eigen::MatrixXd calib(n, 2);
  calib.col(0).setOnes();
  calib.col(1) = report.index_values;
  const QrFit ceo_fit = fit_quantile_regression({calib, ceo_tot, 0.5});
  const Eigen::VectorXd predicted = calib * ceo_fit.coefficients;
  report.residuals = ceo_fit.residuals;  // actual - predicted

  const double ceo_scale = 1.0 + ceo_tot.cwiseAbs().maxCoeff();
  report.degenerate = report.residuals.cwiseAbs().maxCoeff() <= 1e-12 * ceo_scale;

  Eigen::VectorXd abs_pred = predicted.cwiseAbs();
  std::vector<double> sorted(abs_pred.data(), abs_pred.data() + n);
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double median_pred = sorted[static_cast<std::size_t>(n / 2)];

  // Interpolated companies sit exactly on the fitted line; their residuals
  // carry only roundoff, so the overpaid test uses a scale-relative margin
  // to keep the partition stable under rescaled pay.
  const double zero_margin = 1e-9 * ceo_scale;
  report.companies.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    CeoCompanyRow row;
    row.company_id = design_without_ceo.company_ids[static_cast<std::size_t>(i)];
    row.actual = ceo_tot(i);
    row.predicted = predicted(i);
    row.residual = report.residuals(i);
    row.percent_defined = std::abs(predicted(i)) > 1e-9 * median_pred && predicted(i) != 0.0;
    row.percent = row.percent_defined ? 100.0 * row.residual / std::abs(row.predicted) : 0.0;
    if (report.degenerate) {
      row.classification = PayClass::degenerate;
    } else {
      row.classification = row.residual > zero_margin ? PayClass::overpaid : PayClass::underpaid;
    }
    report.companies.push_back(std::move(row));
  }

  report.num_tests = static_cast<int>(future_names.size());
  if (report.num_tests > 0) {
    report.bonferroni_critical_value = bonferroni_critical(report.num_tests, 0.05);
  }
  if (report.degenerate) {
    return report;  // zero residuals cannot predict anything
  }

  Eigen::MatrixXd resid_design(n, 2);
  resid_design.col(0).setOnes();
  resid_design.col(1) = report.residuals;
  for (int j = 0; j < future_responses.cols(); ++j) {
    const QrProblem problem{resid_design, future_responses.col(j), 0.5};
    const QrFit base = fit_quantile_regression(problem);
    CeoResidualTStat stat;
    stat.response = future_names[static_cast<std::size_t>(j)];
    stat.estimate = base.coefficients(1);
    const double scale = 1.0 + future_responses.col(j).cwiseAbs().sum();
    if (base.objective <= 1e-12 * scale) {
      stat.std_error = 0.0;
    } else {
      const WeightedEstimator estimator = [&problem](const Eigen::VectorXd& weights) {
        return fit_quantile_regression(problem, weights).coefficients;
      };
      const BootstrapSummary summary = run_bootstrap(estimator, n, spec);
      stat.std_error = summary.std_errors(1);
    }
    stat.t_stat = safe_t(stat.estimate, stat.std_error);
    stat.significant = std::abs(stat.t_stat) > report.bonferroni_critical_value;
    report.t_stats.push_back(std::move(stat));
  }
  return report;
}

TrendSummary trend_summary(const PanelDataset& panel) {
  if (panel.num_years() < 2) throw DomainError("trend needs at least two years of data");
  if (panel.num_companies() < 2) {
    throw DomainError("cross-company standard deviation undefined for a single company");
  }

  TrendSummary out;
  const int n = panel.num_companies();
  for (int year = panel.first_year; year <= panel.last_year; ++year) {
    double sum = 0.0;
    for (int c = 0; c < n; ++c) sum += panel.value(c, year, Var::CEOt);
    const double mean = sum / n;
    double ss = 0.0;
    for (int c = 0; c < n; ++c) {
      const double d = panel.value(c, year, Var::CEOt) - mean;
      ss += d * d;
    }
    out.years.push_back(year);
    out.mean.push_back(mean);
    out.sd.push_back(std::sqrt(ss / (n - 1)));
  }

  auto ols = [&](auto value_at) {
    const int t = static_cast<int>(out.years.size());
    double xbar = 0.0, ybar = 0.0;
    for (int i = 0; i < t; ++i) {
      xbar += out.years[static_cast<std::size_t>(i)];
      ybar += value_at(i);
    }
    xbar /= t;
    ybar /= t;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < t; ++i) {
      const double dx = out.years[static_cast<std::size_t>(i)] - xbar;
      sxx += dx * dx;
      sxy += dx * (value_at(i) - ybar);
    }
    TrendLine line;
    line.slope = sxy / sxx;
    line.intercept = ybar - line.slope * xbar;
    return line;
  };

  out.mean_line = ols([&](int i) { return out.mean[static_cast<std::size_t>(i)]; });
  out.upper_line = ols([&](int i) {
    return out.mean[static_cast<std::size_t>(i)] + out.sd[static_cast<std::size_t>(i)];
  });
  out.lower_line = ols([&](int i) {
    return out.mean[static_cast<std::size_t>(i)] - out.sd[static_cast<std::size_t>(i)];
  });
  return out;
}

std::vector<QqPair> qq_data(std::span<const double> observed, std::span<const double> fitted) {
  if (observed.size() != fitted.size()) throw DomainError("observed and fitted lengths differ");
  if (observed.empty()) throw DomainError("qq_data requires at least one pair");
  std::vector<double> obs(observed.begin(), observed.end());
  std::vector<double> fit(fitted.begin(), fitted.end());
  std::sort(obs.begin(), obs.end());
  std::sort(fit.begin(), fit.end());
  std::vector<QqPair> pairs(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) pairs[i] = {obs[i], fit[i]};
  return pairs;
}

}  // namespace crqkit
