#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crqkit/cancor.hpp"
#include "crqkit/crq.hpp"
#include "crqkit/errors.hpp"
#include "crqkit/features.hpp"
#include "crqkit/forecast.hpp"
#include "crqkit/inference.hpp"
#include "crqkit/panel_io.hpp"
#include "crqkit/quantile_lp.hpp"
#include "crqkit/synth.hpp"
#include "crqkit/textio.hpp"
#include "crqkit/version.hpp"

namespace crqkit::cli {

namespace {

// ---------------------------------------------------------------------------
// Table artifacts: ordered metadata block plus rows, written as CSV with a
// '# key: value' header or as a JSON document. Byte-deterministic for fixed
// inputs and seeds (no timestamps, shortest round-trip numbers).

struct Cell {
  enum class Kind { text, number, integer };
  Kind kind = Kind::text;
  std::string text;
  double number = 0.0;
  long long whole = 0;

  static Cell str(std::string s) {
    Cell c;
    c.kind = Kind::text;
    c.text = std::move(s);
    return c;
  }
  static Cell num(double v) {
    Cell c;
    c.kind = Kind::number;
    c.number = v;
    return c;
  }
  static Cell integer(long long v) {
    Cell c;
    c.kind = Kind::integer;
    c.whole = v;
    return c;
  }

  std::string to_text() const {
    switch (kind) {
      case Kind::text: return text;
      case Kind::number: return format_double(number);
      case Kind::integer: return std::to_string(whole);
    }
    return "";
  }
};

struct Table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void meta(const std::string& key, const std::string& value) { metadata.emplace_back(key, value); }
  void meta(const std::string& key, double value) { metadata.emplace_back(key, format_double(value)); }
  void meta(const std::string& key, long long value) { metadata.emplace_back(key, std::to_string(value)); }
  void meta(const std::string& key, int value) { metadata.emplace_back(key, std::to_string(value)); }
  void meta(const std::string& key, std::uint64_t value) { metadata.emplace_back(key, std::to_string(value)); }

  std::string to_csv() const {
    std::ostringstream out;
    for (const auto& [key, value] : metadata) out << "# " << key << ": " << value << "\n";
    for (std::size_t j = 0; j < columns.size(); ++j) {
      out << (j ? "," : "") << columns[j];
    }
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        out << (j ? "," : "") << row[j].to_text();
      }
      out << "\n";
    }
    return out.str();
  }

  std::string to_json() const {
    nlohmann::ordered_json root;
    nlohmann::ordered_json meta_obj;
    for (const auto& [key, value] : metadata) meta_obj[key] = value;
    root["metadata"] = std::move(meta_obj);
    root["columns"] = columns;
    nlohmann::ordered_json rows_arr = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
      nlohmann::ordered_json row_arr = nlohmann::ordered_json::array();
      for (const Cell& cell : row) {
        switch (cell.kind) {
          case Cell::Kind::text: row_arr.push_back(cell.text); break;
          case Cell::Kind::number: row_arr.push_back(cell.number); break;
          case Cell::Kind::integer: row_arr.push_back(cell.whole); break;
        }
      }
      rows_arr.push_back(std::move(row_arr));
    }
    root["rows"] = std::move(rows_arr);
    return root.dump(2) + "\n";
  }
};

struct CommonOpts {
  std::string input;
  std::string out_dir;
  std::string format = "csv";
  int window = 5;
  int horizon = 2;
  double discount = 0.05;
  std::string transform = "signed_log";
  std::string baseline_industry;
  double tau = 0.5;
  int replications = 200;
  std::uint64_t seed = 0;
  std::string scheme = "weighted";
  std::string method = "crq";
  bool include_ceo = true;

  AggregationSpec aggregation() const {
    AggregationSpec agg;
    agg.window_years = window;
    agg.horizon_years = horizon;
    agg.discount_rate = discount;
    agg.transform = transform_from_name(transform);
    agg.baseline_industry = baseline_industry;
    return agg;
  }

  BootstrapSpec bootstrap() const {
    BootstrapSpec spec;
    spec.replications = replications;
    spec.seed = seed;
    spec.scheme = scheme_from_name(scheme);
    return spec;
  }
};

std::string default_out_dir() {
  const char* env = std::getenv("CRQ_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : ".";
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "unavailable";
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64_hex(buf.str());
}

void stamp(Table& table, const std::string& subcommand, const CommonOpts& opts) {
  table.meta("tool", "crq");
  table.meta("version", std::string(kVersion));
  table.meta("subcommand", subcommand);
  if (!opts.input.empty()) {
    table.meta("input", opts.input);
    table.meta("input_digest", file_digest(opts.input));
  }
  table.meta("window", opts.window);
  table.meta("horizon", opts.horizon);
  table.meta("discount", opts.discount);
  table.meta("transform", opts.transform);
  table.meta("tau", opts.tau);
  table.meta("seed", opts.seed);
  table.meta("replications", opts.replications);
  table.meta("scheme", opts.scheme);
}

std::string write_table(const Table& table, const CommonOpts& opts, const std::string& name) {
  std::filesystem::create_directories(opts.out_dir);
  const std::string path = opts.out_dir + "/" + name + "." + opts.format;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write artifact '" + path + "'");
  out << (opts.format == "json" ? table.to_json() : table.to_csv());
  return path;
}

std::string year_range(int first, int last) {
  return std::to_string(first) + "-" + std::to_string(last);
}

// ---------------------------------------------------------------------------
// Pipeline building blocks shared by fit / predict / evaluate / qq.

Eigen::VectorXd transformed_ceo_at(const PanelDataset& panel, Transform transform, int year) {
  Eigen::VectorXd out(panel.num_companies());
  for (int c = 0; c < panel.num_companies(); ++c) {
    out(c) = apply_transform(transform, panel.value(c, year, Var::CEOt));
  }
  return out;
}

struct TrainedIndex {
  IndexModel model;
  CrqFit crq;          // populated for the crq method
  CancorFit cancor;    // populated for the cancor method
  DesignMatrix design; // training design
};

TrainedIndex train_index(const PanelDataset& panel, const CommonOpts& opts, int train_end) {
  TrainedIndex trained;
  trained.design = build_design_matrix(panel, opts.aggregation(), train_end, opts.include_ceo);
  trained.model.column_names = trained.design.column_names;
  trained.model.response_names = trained.design.response_names;
  trained.model.train_window_end = train_end;
  trained.model.horizon = opts.horizon;
  const int k = static_cast<int>(trained.design.x_star.cols());
  if (opts.method == "crq") {
    trained.crq = fit_crq({trained.design.x_star, trained.design.y_star, opts.tau});
    trained.model.method = IndexMethod::crq;
    trained.model.beta = trained.crq.beta;
    trained.model.alpha = trained.crq.alpha;
  } else if (opts.method == "cancor") {
    // The intercept column is constant and carries no correlation; the
    // canonical weights live on the remaining columns.
    trained.cancor =
        fit_cancor(trained.design.x_star.rightCols(k - 1), trained.design.y_star);
    trained.model.method = IndexMethod::cancor;
    trained.model.beta = Eigen::VectorXd::Zero(k);
    trained.model.beta.tail(k - 1) = trained.cancor.x_weights;
    trained.model.alpha = trained.cancor.y_weights;
  } else {
    throw DomainError("unknown method '" + opts.method + "' for index training");
  }
  return trained;
}

struct AppliedPrediction {
  DesignMatrix design;       // window ending at apply_end
  Eigen::VectorXd index;     // per company
  Predictions predictions;   // per response fitted values
  bool has_alpha = false;
  Eigen::VectorXd composite_observed;   // alpha'Y at the predicted year
  Eigen::VectorXd composite_predicted;
  int train_end = 0;
  int apply_end = 0;
  int predicted_year = 0;
};

AppliedPrediction run_prediction(const PanelDataset& panel, const CommonOpts& opts, int train_end,
                                 int apply_end) {
  AppliedPrediction out;
  out.train_end = train_end;
  out.apply_end = apply_end;
  out.predicted_year = apply_end + opts.horizon;
  out.design = build_design_matrix(panel, opts.aggregation(), apply_end, opts.include_ceo);

  if (opts.method == "ceo-baseline") {
    out.index = transformed_ceo_at(panel, opts.aggregation().transform, apply_end);
    out.predictions = predict_ahead(out.index, out.design.y_star, out.design.response_names,
                                    IndexMethod::crq);  // CEOrq: median calibration
    return out;
  }

  const TrainedIndex trained = train_index(panel, opts, train_end);
  out.index = apply_index(trained.model, out.design);
  out.predictions = predict_ahead(out.index, out.design.y_star, out.design.response_names,
                                  trained.model.method);
  out.has_alpha = true;
  out.composite_observed = out.design.y_star * trained.model.alpha;
  const Predictions composite =
      predict_ahead(out.index, out.composite_observed, {"Yindex"}, trained.model.method);
  out.composite_predicted = composite.fitted.col(0);
  return out;
}

void stamp_protocol(Table& table, const CommonOpts& opts, int train_end, int apply_end) {
  table.meta("train_window", year_range(train_end - opts.window + 1, train_end));
  table.meta("train_window_end", train_end);
  table.meta("train_response_year", train_end + opts.horizon);
  table.meta("apply_window", year_range(apply_end - opts.window + 1, apply_end));
  table.meta("apply_window_end", apply_end);
  table.meta("predicted_year", apply_end + opts.horizon);
}

// ---------------------------------------------------------------------------
// Subcommand bodies.

int cmd_validate(const CommonOpts& opts, const std::string& emit_json) {
  const PanelDataset panel = load_panel(opts.input);
  std::cout << "OK: " << panel.num_companies() << " companies, years "
            << year_range(panel.first_year, panel.last_year) << ", "
            << panel.distinct_industries().size() << " industries\n";
  if (!emit_json.empty()) {
    std::ofstream out(emit_json, std::ios::binary);
    if (!out) throw DomainError("cannot write '" + emit_json + "'");
    out << panel_to_json(panel) << "\n";
  }
  return 0;
}

int cmd_synth(const CommonOpts& opts, const GeneratorSpec& gen, const std::string& out_path) {
  const SyntheticPanel synthetic = generate(gen);
  std::filesystem::path path(out_path);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DomainError("cannot write '" + out_path + "'");
    write_panel_csv(synthetic.panel, out);
  }
  std::string truth_path = out_path;
  if (truth_path.size() > 4 && truth_path.substr(truth_path.size() - 4) == ".csv") {
    truth_path.resize(truth_path.size() - 4);
  }
  truth_path += ".truth.json";
  {
    std::ofstream out(truth_path, std::ios::binary);
    if (!out) throw DomainError("cannot write '" + truth_path + "'");
    out << ground_truth_to_json(synthetic.truth) << "\n";
  }
  (void)opts;
  std::cout << "wrote " << out_path << " and " << truth_path << "\n";
  return 0;
}

int cmd_fit(const CommonOpts& opts, int train_end) {
  const PanelDataset panel = load_panel(opts.input);
  const TrainedIndex trained = train_index(panel, opts, train_end);
  const DesignMatrix& design = trained.design;
  const int n = static_cast<int>(design.x_star.rows());
  const int k = static_cast<int>(design.x_star.cols());
  const int q = static_cast<int>(design.y_star.cols());

  if (opts.method == "cancor") {
    Table table;
    stamp(table, "fit", opts);
    table.meta("method", "cancor");
    stamp_protocol(table, opts, train_end, train_end);
    table.meta("correlation", trained.cancor.correlation);
    table.columns = {"side", "name", "weight"};
    for (int j = 1; j < k; ++j) {
      table.rows.push_back({Cell::str("x"), Cell::str(design.column_names[static_cast<std::size_t>(j)]),
                            Cell::num(trained.model.beta(j))});
    }
    for (int j = 0; j < q; ++j) {
      table.rows.push_back({Cell::str("y"), Cell::str(design.response_names[static_cast<std::size_t>(j)]),
                            Cell::num(trained.model.alpha(j))});
    }
    write_table(table, opts, "cancor_weights");
    return 0;
  }

  // Bootstrap standard errors for the stacked (alpha, beta) coefficients.
  const CrqProblem problem{design.x_star, design.y_star, opts.tau};
  bool degenerate = false;
  Eigen::VectorXd se = Eigen::VectorXd::Zero(q + k);
  Eigen::VectorXd tstat = Eigen::VectorXd::Zero(q + k);
  try {
    const WeightedEstimator estimator = [&problem, q, k](const Eigen::VectorXd& weights) {
      const CrqFit refit = fit_crq(problem, weights);
      Eigen::VectorXd stacked(q + k);
      stacked.head(q) = refit.alpha;
      stacked.tail(k) = refit.beta;
      return stacked;
    };
    const BootstrapSummary summary = run_bootstrap(estimator, n, opts.bootstrap());
    se = summary.std_errors;
    tstat = summary.t_stats;
  } catch (const InferenceError&) {
    degenerate = true;  // exact fits leave nothing to resample
  }

  Table alpha_table;
  stamp(alpha_table, "fit", opts);
  alpha_table.meta("method", "crq");
  stamp_protocol(alpha_table, opts, train_end, train_end);
  alpha_table.meta("objective", trained.crq.objective);
  alpha_table.meta("alpha_abs_sum", trained.crq.alpha.cwiseAbs().sum());
  alpha_table.meta("bootstrap_degenerate", degenerate ? "true" : "false");
  alpha_table.columns = {"response", "alpha", "std_error", "t_stat"};
  for (int j = 0; j < q; ++j) {
    alpha_table.rows.push_back({Cell::str(design.response_names[static_cast<std::size_t>(j)]),
                                Cell::num(trained.crq.alpha(j)), Cell::num(se(j)),
                                Cell::num(tstat(j))});
  }
  write_table(alpha_table, opts, "alpha_coefficients");

  Table beta_table;
  stamp(beta_table, "fit", opts);
  beta_table.meta("method", "crq");
  stamp_protocol(beta_table, opts, train_end, train_end);
  beta_table.meta("objective", trained.crq.objective);
  beta_table.meta("bootstrap_degenerate", degenerate ? "true" : "false");
  beta_table.columns = {"column", "beta", "std_error", "t_stat"};
  for (int j = 0; j < k; ++j) {
    beta_table.rows.push_back({Cell::str(design.column_names[static_cast<std::size_t>(j)]),
                               Cell::num(trained.crq.beta(j)), Cell::num(se(q + j)),
                               Cell::num(tstat(q + j))});
  }
  write_table(beta_table, opts, "beta_coefficients");
  return 0;
}

int cmd_predict(const CommonOpts& opts, int train_end, int apply_end) {
  const PanelDataset panel = load_panel(opts.input);
  const AppliedPrediction applied = run_prediction(panel, opts, train_end, apply_end);
  const DesignMatrix& design = applied.design;
  const int n = static_cast<int>(design.x_star.rows());
  const int q = static_cast<int>(design.y_star.cols());

  Table predictions;
  stamp(predictions, "predict", opts);
  predictions.meta("method", opts.method);
  stamp_protocol(predictions, opts, train_end, apply_end);
  predictions.columns = {"company", "response", "observed", "predicted", "residual"};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < q; ++j) {
      const double obs = design.y_star(i, j);
      const double pred = applied.predictions.fitted(i, j);
      predictions.rows.push_back({Cell::str(design.company_ids[static_cast<std::size_t>(i)]),
                                  Cell::str(design.response_names[static_cast<std::size_t>(j)]),
                                  Cell::num(obs), Cell::num(pred), Cell::num(obs - pred)});
    }
  }
  write_table(predictions, opts, "predictions");

  Table scatter;
  stamp(scatter, "predict", opts);
  scatter.meta("method", opts.method);
  stamp_protocol(scatter, opts, train_end, apply_end);
  scatter.columns = {"company", "index", "ceo_tot"};
  if (applied.has_alpha) {
    scatter.columns.push_back("y_index_observed");
    scatter.columns.push_back("y_index_predicted");
  }
  for (int j = 0; j < q; ++j) scatter.columns.push_back(design.response_names[static_cast<std::size_t>(j)]);
  const Eigen::VectorXd ceo_now =
      transformed_ceo_at(panel, opts.aggregation().transform, apply_end);
  for (int i = 0; i < n; ++i) {
    std::vector<Cell> row = {Cell::str(design.company_ids[static_cast<std::size_t>(i)]),
                             Cell::num(applied.index(i)), Cell::num(ceo_now(i))};
    if (applied.has_alpha) {
      row.push_back(Cell::num(applied.composite_observed(i)));
      row.push_back(Cell::num(applied.composite_predicted(i)));
    }
    for (int j = 0; j < q; ++j) row.push_back(Cell::num(design.y_star(i, j)));
    scatter.rows.push_back(std::move(row));
  }
  write_table(scatter, opts, "scatter");
  return 0;
}

int cmd_evaluate(const CommonOpts& opts, std::vector<int> eval_years) {
  const PanelDataset panel = load_panel(opts.input);
  const int earliest_eval = panel.first_year + opts.window - 1 + 2 * opts.horizon;
  if (eval_years.empty()) {
    for (int y = std::max(earliest_eval, panel.last_year - 1); y <= panel.last_year; ++y) {
      eval_years.push_back(y);
    }
    if (eval_years.empty()) {
      throw CoverageError("panel too short for evaluation: first usable year is " +
                          std::to_string(earliest_eval));
    }
  }
  for (int y : eval_years) {
    if (y < earliest_eval || y > panel.last_year) {
      throw CoverageError("evaluation year " + std::to_string(y) + " needs coverage " +
                          year_range(y - 2 * opts.horizon - opts.window + 1, y));
    }
  }

  struct MethodRow {
    std::string label;
    std::string method;
  };
  const std::vector<MethodRow> methods = {
      {"cancor", "cancor"}, {"rq.can", "crq"}, {"CEOrq", "ceo-baseline"}};

  Table table;
  stamp(table, "evaluate", opts);
  {
    std::string joined;
    for (std::size_t i = 0; i < eval_years.size(); ++i) {
      joined += (i ? "," : "") + std::to_string(eval_years[static_cast<std::size_t>(i)]);
    }
    table.meta("eval_years", joined);
  }
  for (int y : eval_years) {
    const int train_end = y - 2 * opts.horizon;
    const int apply_end = y - opts.horizon;
    const std::string prefix = "eval_" + std::to_string(y) + "_";
    table.meta(prefix + "train_window", year_range(train_end - opts.window + 1, train_end));
    table.meta(prefix + "train_response_year", train_end + opts.horizon);
    table.meta(prefix + "apply_window", year_range(apply_end - opts.window + 1, apply_end));
    table.meta(prefix + "predicted_year", apply_end + opts.horizon);
  }
  table.columns = {"method", "response", "mae", "mae_sd", "rmse", "rmse_sd", "n", "display"};

  const std::vector<std::string> response_names =
      response_column_names(opts.aggregation().transform);
  for (const MethodRow& m : methods) {
    CommonOpts run_opts = opts;
    run_opts.method = m.method;
    // predicted/observed pairs pooled across evaluation years, per response
    std::vector<std::vector<double>> pooled_pred(response_names.size());
    std::vector<std::vector<double>> pooled_obs(response_names.size());
    std::vector<std::vector<std::string>> pooled_ids(response_names.size());
    for (int y : eval_years) {
      const AppliedPrediction applied =
          run_prediction(panel, run_opts, y - 2 * opts.horizon, y - opts.horizon);
      for (std::size_t j = 0; j < response_names.size(); ++j) {
        for (int i = 0; i < applied.design.y_star.rows(); ++i) {
          pooled_pred[j].push_back(applied.predictions.fitted(i, static_cast<int>(j)));
          pooled_obs[j].push_back(applied.design.y_star(i, static_cast<int>(j)));
          pooled_ids[j].push_back(applied.design.company_ids[static_cast<std::size_t>(i)]);
        }
      }
    }
    for (std::size_t j = 0; j < response_names.size(); ++j) {
      const EvalCell cell = evaluate(pooled_pred[j], pooled_obs[j], pooled_ids[j], opts.bootstrap());
      char display[64];
      std::snprintf(display, sizeof(display), "%.3f (.%03d)", cell.mae,
                    static_cast<int>(std::lround(cell.mae_sd * 1000.0)));
      table.rows.push_back({Cell::str(m.label), Cell::str(response_names[j]), Cell::num(cell.mae),
                            Cell::num(cell.mae_sd), Cell::num(cell.rmse), Cell::num(cell.rmse_sd),
                            Cell::integer(cell.n), Cell::str(display)});
    }
  }
  write_table(table, opts, "mae_table");
  return 0;
}

int cmd_joint(const CommonOpts& opts, int train_end, int apply_end) {
  // Median regression of each future response on CEOtot and the index.
  CommonOpts run_opts = opts;
  run_opts.method = "crq";
  const PanelDataset panel = load_panel(opts.input);
  const AppliedPrediction applied = run_prediction(panel, run_opts, train_end, apply_end);
  const Eigen::VectorXd ceo_now =
      transformed_ceo_at(panel, opts.aggregation().transform, apply_end);

  Table table;
  stamp(table, "joint", opts);
  stamp_protocol(table, opts, train_end, apply_end);
  table.columns = {"response", "coef_ceo", "se_ceo", "t_ceo", "p_one_sided_ceo",
                   "p_two_sided_ceo", "coef_index", "se_index", "t_index", "t_ratio"};
  std::vector<std::string> names = applied.design.response_names;
  Eigen::MatrixXd targets = applied.design.y_star;
  for (int j = 0; j < targets.cols(); ++j) {
    const JointRegression joint =
        joint_regression(targets.col(j), ceo_now, applied.index, opts.bootstrap());
    table.rows.push_back({Cell::str(names[static_cast<std::size_t>(j)]), Cell::num(joint.coef_ceo),
                          Cell::num(joint.se_ceo), Cell::num(joint.t_ceo),
                          Cell::num(joint.p_one_sided_ceo), Cell::num(joint.p_two_sided_ceo),
                          Cell::num(joint.coef_index), Cell::num(joint.se_index),
                          Cell::num(joint.t_index), Cell::num(joint.t_ratio)});
  }
  write_table(table, opts, "joint_regression");
  return 0;
}

int cmd_ceo_residuals(const CommonOpts& opts, int index_year) {
  const PanelDataset panel = load_panel(opts.input);
  const AggregationSpec agg = opts.aggregation();
  const int train_end = index_year - opts.horizon;

  CommonOpts train_opts = opts;
  train_opts.method = "crq";
  train_opts.include_ceo = false;
  const TrainedIndex trained = train_index(panel, train_opts, train_end);
  const DesignMatrix applied = build_design_matrix(panel, agg, index_year, false);
  const Eigen::VectorXd ceo_now = transformed_ceo_at(panel, agg.transform, index_year);

  if (index_year >= panel.last_year) {
    throw CoverageError("index year " + std::to_string(index_year) +
                        " leaves no later years to predict");
  }
  const std::vector<std::string> response_names = response_column_names(agg.transform);
  std::vector<std::string> future_names;
  Eigen::MatrixXd future(panel.num_companies(),
                         static_cast<int>(response_names.size()) *
                             (panel.last_year - index_year));
  int col = 0;
  for (int y = index_year + 1; y <= panel.last_year; ++y) {
    for (std::size_t j = 0; j < kResponseVars.size(); ++j) {
      future_names.push_back(std::to_string(y) + "/" + response_names[j]);
      for (int c = 0; c < panel.num_companies(); ++c) {
        future(c, col) = apply_transform(agg.transform, panel.value(c, y, kResponseVars[j]));
      }
      ++col;
    }
  }

  const CeoResidualReport report = ceo_residual_analysis(applied, ceo_now, future, future_names,
                                                         opts.bootstrap(), &trained.model);

  Table residuals;
  stamp(residuals, "ceo-residuals", opts);
  residuals.meta("index_year", index_year);
  stamp_protocol(residuals, opts, train_end, index_year);
  residuals.meta("degenerate", report.degenerate ? "true" : "false");
  residuals.columns = {"company", "actual", "predicted", "residual", "percent", "classification"};
  for (const CeoCompanyRow& row : report.companies) {
    residuals.rows.push_back(
        {Cell::str(row.company_id), Cell::num(row.actual), Cell::num(row.predicted),
         Cell::num(row.residual),
         row.percent_defined ? Cell::num(row.percent) : Cell::str("undefined"),
         Cell::str(pay_class_name(row.classification))});
  }
  write_table(residuals, opts, "ceo_residuals");

  Table tstats;
  stamp(tstats, "ceo-residuals", opts);
  tstats.meta("index_year", index_year);
  stamp_protocol(tstats, opts, train_end, index_year);
  tstats.meta("num_tests", report.num_tests);
  tstats.meta("bonferroni_critical", report.bonferroni_critical_value);
  tstats.meta("degenerate", report.degenerate ? "true" : "false");
  tstats.columns = {"pred_year", "response", "estimate", "std_error", "t_stat", "significant"};
  for (const CeoResidualTStat& stat : report.t_stats) {
    const std::size_t slash = stat.response.find('/');
    tstats.rows.push_back({Cell::str(stat.response.substr(0, slash)),
                           Cell::str(stat.response.substr(slash + 1)), Cell::num(stat.estimate),
                           Cell::num(stat.std_error), Cell::num(stat.t_stat),
                           Cell::str(stat.significant ? "true" : "false")});
  }
  write_table(tstats, opts, "ceo_tstats");
  return 0;
}

int cmd_trend(const CommonOpts& opts) {
  const PanelDataset panel = load_panel(opts.input);
  const TrendSummary trend = trend_summary(panel);

  Table table;
  stamp(table, "trend", opts);
  table.meta("mean_line_intercept", trend.mean_line.intercept);
  table.meta("mean_line_slope", trend.mean_line.slope);
  table.meta("upper_line_intercept", trend.upper_line.intercept);
  table.meta("upper_line_slope", trend.upper_line.slope);
  table.meta("lower_line_intercept", trend.lower_line.intercept);
  table.meta("lower_line_slope", trend.lower_line.slope);
  table.columns = {"year", "mean", "sd", "mean_fit", "upper_fit", "lower_fit"};
  for (std::size_t i = 0; i < trend.years.size(); ++i) {
    const double year = trend.years[i];
    table.rows.push_back(
        {Cell::integer(trend.years[i]), Cell::num(trend.mean[i]), Cell::num(trend.sd[i]),
         Cell::num(trend.mean_line.intercept + trend.mean_line.slope * year),
         Cell::num(trend.upper_line.intercept + trend.upper_line.slope * year),
         Cell::num(trend.lower_line.intercept + trend.lower_line.slope * year)});
  }
  write_table(table, opts, "trend");
  return 0;
}

int cmd_qq(const CommonOpts& opts, int train_end, int apply_end) {
  const PanelDataset panel = load_panel(opts.input);
  const AppliedPrediction applied = run_prediction(panel, opts, train_end, apply_end);
  const DesignMatrix& design = applied.design;

  Table table;
  stamp(table, "qq", opts);
  table.meta("method", opts.method);
  stamp_protocol(table, opts, train_end, apply_end);
  table.columns = {"response", "observed", "fitted"};
  for (int j = 0; j < design.y_star.cols(); ++j) {
    std::vector<double> obs(design.y_star.col(j).data(),
                            design.y_star.col(j).data() + design.y_star.rows());
    std::vector<double> fit(applied.predictions.fitted.col(j).data(),
                            applied.predictions.fitted.col(j).data() +
                                applied.predictions.fitted.rows());
    for (const QqPair& pair : qq_data(obs, fit)) {
      table.rows.push_back({Cell::str(design.response_names[static_cast<std::size_t>(j)]),
                            Cell::num(pair.observed), Cell::num(pair.fitted)});
    }
  }
  write_table(table, opts, "qq");
  return 0;
}

void add_output_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-o,--out", opts.out_dir, "Output directory (default $CRQ_OUT_DIR or .)");
  cmd->add_option("--format", opts.format, "Artifact format")
      ->check(CLI::IsMember({"csv", "json"}));
}

void add_aggregation_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--window", opts.window, "Aggregation window in years");
  cmd->add_option("--horizon", opts.horizon, "Forecast horizon in years");
  cmd->add_option("--discount", opts.discount, "Per-year discount rate for the weighted average");
  cmd->add_option("--transform", opts.transform, "Response transform")
      ->check(CLI::IsMember({"signed_log", "log_max1", "none"}));
  cmd->add_option("--baseline-industry", opts.baseline_industry,
                  "Industry encoded as the all-zero dummy row");
}

void add_bootstrap_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--replications", opts.replications, "Bootstrap replications");
  cmd->add_option("--seed", opts.seed, "Bootstrap / generator seed");
  cmd->add_option("--scheme", opts.scheme, "Bootstrap scheme")
      ->check(CLI::IsMember({"weighted", "resample"}));
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Canonical regression quantile toolkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  CommonOpts opts;
  opts.out_dir = default_out_dir();

  // validate
  std::string emit_json;
  CLI::App* validate = app.add_subcommand("validate", "Validate a panel CSV");
  validate->add_option("input", opts.input, "Panel CSV")->required();
  validate->add_option("--emit-json", emit_json, "Write the validated panel as JSON");

  // synth
  GeneratorSpec gen;
  std::string synth_out = "panel.csv";
  std::string noise_name = "gaussian";
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic panel with ground truth");
  synth->add_option("--companies", gen.num_companies, "Companies");
  synth->add_option("--years", gen.num_years, "Years of coverage");
  synth->add_option("--industries", gen.num_industries, "Industry labels");
  synth->add_option("--start-year", gen.start_year, "First calendar year");
  synth->add_option("--noise", noise_name, "Noise family")
      ->check(CLI::IsMember({"gaussian", "student_t2", "contaminated"}));
  synth->add_option("--noise-scale", gen.noise_scale, "Noise scale");
  synth->add_option("--seed", gen.seed, "Generator seed");
  synth->add_option("--out", synth_out, "Panel CSV path; truth sidecar gets .truth.json");

  // fit
  int train_end = 0;
  CLI::App* fit = app.add_subcommand("fit", "Fit index coefficients on one training window");
  fit->add_option("input", opts.input, "Panel CSV")->required();
  fit->add_option("--train-end", train_end, "Final year of the training window")->required();
  fit->add_option("--method", opts.method, "Index method")
      ->check(CLI::IsMember({"crq", "cancor"}));
  fit->add_option("--tau", opts.tau, "Quantile level");
  fit->add_flag("--include-ceo,!--no-include-ceo", opts.include_ceo,
                "Keep CEOt aggregate columns in the design");
  add_aggregation_options(fit, opts);
  add_bootstrap_options(fit, opts);
  add_output_options(fit, opts);

  // predict
  int apply_end = -1;
  CLI::App* predict = app.add_subcommand("predict", "Train, apply to a later window, predict");
  predict->add_option("input", opts.input, "Panel CSV")->required();
  predict->add_option("--train-end", train_end, "Final year of the training window")->required();
  predict->add_option("--apply-end", apply_end,
                      "Final year of the applied window (default train-end + horizon)");
  predict->add_option("--method", opts.method, "Predictor")
      ->check(CLI::IsMember({"crq", "cancor", "ceo-baseline"}));
  predict->add_option("--tau", opts.tau, "Quantile level");
  predict->add_flag("--include-ceo,!--no-include-ceo", opts.include_ceo, "Keep CEOt columns");
  add_aggregation_options(predict, opts);
  add_bootstrap_options(predict, opts);
  add_output_options(predict, opts);

  // evaluate
  std::vector<int> eval_years;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "MAE/RMSE comparison of all methods");
  evaluate_cmd->add_option("input", opts.input, "Panel CSV")->required();
  evaluate_cmd->add_option("--eval-years", eval_years,
                           "Years whose responses are predicted (default: last two usable)");
  evaluate_cmd->add_option("--tau", opts.tau, "Quantile level");
  evaluate_cmd->add_flag("--include-ceo,!--no-include-ceo", opts.include_ceo, "Keep CEOt columns");
  add_aggregation_options(evaluate_cmd, opts);
  add_bootstrap_options(evaluate_cmd, opts);
  add_output_options(evaluate_cmd, opts);

  // joint
  CLI::App* joint = app.add_subcommand("joint", "Median regression on CEOtot and index together");
  joint->add_option("input", opts.input, "Panel CSV")->required();
  joint->add_option("--train-end", train_end, "Final year of the training window")->required();
  joint->add_option("--apply-end", apply_end,
                    "Final year of the applied window (default train-end + horizon)");
  joint->add_option("--tau", opts.tau, "Quantile level");
  joint->add_flag("--include-ceo,!--no-include-ceo", opts.include_ceo, "Keep CEOt columns");
  add_aggregation_options(joint, opts);
  add_bootstrap_options(joint, opts);
  add_output_options(joint, opts);

  // ceo-residuals
  int index_year = -1;
  CLI::App* residuals = app.add_subcommand(
      "ceo-residuals", "Over/under-paid classification and residual predictiveness");
  residuals->add_option("input", opts.input, "Panel CSV")->required();
  residuals->add_option("--index-year", index_year,
                        "Year the index and CEOt are taken at (default last - horizon)");
  residuals->add_option("--tau", opts.tau, "Quantile level");
  add_aggregation_options(residuals, opts);
  add_bootstrap_options(residuals, opts);
  add_output_options(residuals, opts);

  // trend
  CLI::App* trend = app.add_subcommand("trend", "Per-year CEOt mean/SD with regression bands");
  trend->add_option("input", opts.input, "Panel CSV")->required();
  add_output_options(trend, opts);

  // qq
  CLI::App* qq = app.add_subcommand("qq", "Sorted observed vs fitted pairs per response");
  qq->add_option("input", opts.input, "Panel CSV")->required();
  qq->add_option("--train-end", train_end, "Final year of the training window")->required();
  qq->add_option("--apply-end", apply_end, "Final year of the applied window");
  qq->add_option("--method", opts.method, "Predictor")
      ->check(CLI::IsMember({"crq", "cancor", "ceo-baseline"}));
  qq->add_option("--tau", opts.tau, "Quantile level");
  qq->add_flag("--include-ceo,!--no-include-ceo", opts.include_ceo, "Keep CEOt columns");
  add_aggregation_options(qq, opts);
  add_output_options(qq, opts);

  // The residual analysis follows the larger-replication standard bootstrap
  // unless the flags say otherwise.
  residuals->parse_complete_callback([&]() {
    if (residuals->count("--scheme") == 0) opts.scheme = "resample";
    if (residuals->count("--replications") == 0) opts.replications = 600;
  });

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (validate->parsed()) return cmd_validate(opts, emit_json);
    if (synth->parsed()) {
      gen.noise = noise_family_from_name(noise_name);
      return cmd_synth(opts, gen, synth_out);
    }
    if (fit->parsed()) return cmd_fit(opts, train_end);
    if (predict->parsed()) {
      return cmd_predict(opts, train_end, apply_end < 0 ? train_end + opts.horizon : apply_end);
    }
    if (evaluate_cmd->parsed()) return cmd_evaluate(opts, eval_years);
    if (joint->parsed()) {
      return cmd_joint(opts, train_end, apply_end < 0 ? train_end + opts.horizon : apply_end);
    }
    if (residuals->parsed()) {
      const PanelDataset probe = load_panel(opts.input);
      return cmd_ceo_residuals(opts,
                               index_year < 0 ? probe.last_year - opts.horizon : index_year);
    }
    if (trend->parsed()) return cmd_trend(opts);
    if (qq->parsed()) {
      return cmd_qq(opts, train_end, apply_end < 0 ? train_end + opts.horizon : apply_end);
    }
    std::cerr << "error: no subcommand selected\n";
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "error (solver): " << e.what() << "\n";
    return 2;
  } catch (const InferenceError& e) {
    std::cerr << "error (inference): " << e.what() << "\n";
    return 2;
  } catch (const RankError& e) {
    std::cerr << "error (rank): " << e.what() << "\n";
    return 2;
  } catch (const InsufficientDataError& e) {
    std::cerr << "error (data): " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error (unexpected): " << e.what() << "\n";
    return 2;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("crq");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(storage.size());
  for (const std::string& s : storage) argv.push_back(s.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace crqkit::cli
