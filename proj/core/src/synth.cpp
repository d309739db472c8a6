#include "crqkit/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <json.hpp>

#include "crqkit/errors.hpp"
#include "crqkit/rng.hpp"

namespace crqkit {

const char* noise_family_name(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::student_t2: return "student_t2";
    case NoiseFamily::contaminated: return "contaminated";
  }
  return "unknown";
}

NoiseFamily noise_family_from_name(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::gaussian;
  if (name == "student_t2") return NoiseFamily::student_t2;
  if (name == "contaminated") return NoiseFamily::contaminated;
  throw DomainError("unknown noise family '" + name + "'");
}

namespace {

constexpr std::uint64_t kTagMean = 1;
constexpr std::uint64_t kTagPath = 2;
constexpr std::uint64_t kTagNoise = 3;

struct PathParams {
  double mean_base;
  double mean_spread;
  double phi;
  double sigma;
};

// X ratios move on the raw scale; CEOt and responses move in transformed
// (z) space and are written back through the inverse transform.
constexpr PathParams kRatioParams[4] = {
    {1.30, 0.40, 0.7, 0.12},  // IR
    {0.10, 0.06, 0.7, 0.02},  // EQ
    {1.00, 0.30, 0.7, 0.10},  // MG
    {0.05, 0.10, 0.7, 0.04},  // EPS
};
constexpr PathParams kCeoParams = {8.0, 0.5, 0.6, 0.20};
constexpr PathParams kResponseParams = {4.0, 1.0, 0.7, 0.30};

double stationary_start(const PathParams& p, double mean, double g) {
  return mean + p.sigma / std::sqrt(1.0 - p.phi * p.phi) * g;
}

double ar_step(const PathParams& p, double mean, double prev, double g) {
  return mean + p.phi * (prev - mean) + p.sigma * g;
}

// Inverse of the configured transform. Exact for signed_log (|raw| >= 1 by
// construction) and none; log_max1 clamps negative z at zero.
double inverse_transform(Transform t, double z) {
  switch (t) {
    case Transform::signed_log:
      if (z == 0.0) return 1.0;
      return z > 0.0 ? std::exp(z) : -std::exp(-z);
    case Transform::log_max1:
      return std::exp(std::max(0.0, z));
    case Transform::none:
      return z;
  }
  throw DomainError("unknown transform");
}

double draw_noise(rng::Stream stream, NoiseFamily family) {
  switch (family) {
    case NoiseFamily::gaussian:
      return stream.next_gaussian();
    case NoiseFamily::student_t2:
      return stream.next_student_t2();
    case NoiseFamily::contaminated: {
      const double u = stream.next_uniform();
      const double z = stream.next_gaussian();
      return u < 0.05 ? 10.0 * z : z;
    }
  }
  throw DomainError("unknown noise family");
}

Eigen::VectorXd default_alpha() {
  Eigen::VectorXd alpha(5);
  alpha << 0.4, 0.2, 0.2, 0.1, 0.1;
  return alpha;
}

Eigen::VectorXd default_beta(const std::vector<std::string>& names) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<int>(names.size()));
  auto set = [&](const std::string& name, double value) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (names[j] == name) beta(static_cast<int>(j)) = value;
    }
  };
  set("IRwt", 0.10);
  set("MGwt", 0.10);
  set("logRevwt", 0.60);
  set("logRevminD", 0.30);
  set("logMCapwt", 0.20);
  return beta;
}

}  // namespace

SyntheticPanel generate(const GeneratorSpec& spec) {
  if (spec.num_companies < 2) throw DomainError("generator needs at least two companies");
  if (spec.num_industries < 1 || spec.num_industries > 99) {
    throw DomainError("num_industries must lie in [1, 99]");
  }
  if (!(spec.noise_scale >= 0.0) || !std::isfinite(spec.noise_scale)) {
    throw DomainError("noise_scale must be nonnegative and finite");
  }
  const AggregationSpec& agg = spec.aggregation;
  if (agg.window_years < 2 || agg.horizon_years < 1) {
    throw DomainError("aggregation window must be >= 2 years with horizon >= 1");
  }
  if (spec.num_years < agg.window_years + agg.horizon_years) {
    throw DomainError("infeasible dimensions: need num_years >= window + horizon, got " +
                      std::to_string(spec.num_years));
  }

  const std::vector<std::string> beta_names = aggregate_column_names(agg.transform, true);
  Eigen::VectorXd beta =
      spec.true_beta.size() == 0 ? default_beta(beta_names) : spec.true_beta;
  if (beta.size() != static_cast<int>(beta_names.size())) {
    throw DomainError("true_beta must have one entry per aggregate column (" +
                      std::to_string(beta_names.size()) + ")");
  }
  Eigen::VectorXd alpha = spec.true_alpha.size() == 0 ? default_alpha() : spec.true_alpha;
  if (alpha.size() != static_cast<int>(kResponseVars.size())) {
    throw DomainError("true_alpha must have one entry per response");
  }
  if (std::abs(alpha.cwiseAbs().sum() - 1.0) > 1e-8) {
    throw DomainError("true_alpha must satisfy sum |alpha_j| = 1");
  }

  PanelDataset panel;
  panel.first_year = spec.start_year;
  panel.last_year = spec.start_year + spec.num_years - 1;
  {
    int width = 1;
    for (int v = spec.num_companies; v >= 10; v /= 10) ++width;
    for (int c = 0; c < spec.num_companies; ++c) {
      std::string id = std::to_string(c + 1);
      panel.company_ids.push_back("C" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id);
      std::string sector = std::to_string(c % spec.num_industries + 1);
      panel.industries.push_back("sector" + std::string(sector.size() < 2 ? 1 : 0, '0') + sector);
    }
  }
  panel.records.assign(static_cast<std::size_t>(spec.num_companies),
                       std::vector<PanelRecord>(static_cast<std::size_t>(spec.num_years)));

  rng::Stream master(spec.seed);
  auto mean_draw = [&](int c, int v) {
    return master.fork(kTagMean)
        .fork(static_cast<std::uint64_t>(c))
        .fork(static_cast<std::uint64_t>(v))
        .next_gaussian();
  };
  auto path_draw = [&](int c, int year, int v) {
    return master.fork(kTagPath)
        .fork(static_cast<std::uint64_t>(c))
        .fork(static_cast<std::uint64_t>(year))
        .fork(static_cast<std::uint64_t>(v))
        .next_gaussian();
  };

  const int num_responses = static_cast<int>(kResponseVars.size());
  std::vector<std::array<double, 4>> ratio_mean(static_cast<std::size_t>(spec.num_companies));
  std::vector<double> ceo_mean(static_cast<std::size_t>(spec.num_companies));
  std::vector<std::array<double, 5>> resp_mean(static_cast<std::size_t>(spec.num_companies));
  for (int c = 0; c < spec.num_companies; ++c) {
    for (int v = 0; v < 4; ++v) {
      ratio_mean[static_cast<std::size_t>(c)][static_cast<std::size_t>(v)] =
          kRatioParams[v].mean_base + kRatioParams[v].mean_spread * mean_draw(c, v);
    }
    ceo_mean[static_cast<std::size_t>(c)] =
        kCeoParams.mean_base + kCeoParams.mean_spread * mean_draw(c, 4);
    for (int j = 0; j < num_responses; ++j) {
      resp_mean[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] =
          kResponseParams.mean_base + kResponseParams.mean_spread * mean_draw(c, 5 + j);
    }
  }

  std::vector<std::array<double, 4>> ratio_prev(static_cast<std::size_t>(spec.num_companies));
  std::vector<double> ceo_prev(static_cast<std::size_t>(spec.num_companies));
  std::vector<std::array<double, 5>> resp_prev(static_cast<std::size_t>(spec.num_companies));

  const int first_constrained =
      spec.start_year + agg.window_years + agg.horizon_years - 1;

  for (int year = panel.first_year; year <= panel.last_year; ++year) {
    const bool first = year == panel.first_year;
    for (int c = 0; c < spec.num_companies; ++c) {
      PanelRecord& rec =
          panel.records[static_cast<std::size_t>(c)][static_cast<std::size_t>(year - panel.first_year)];

      for (int v = 0; v < 4; ++v) {
        const PathParams& p = kRatioParams[v];
        const double mean = ratio_mean[static_cast<std::size_t>(c)][static_cast<std::size_t>(v)];
        const double g = path_draw(c, year, v);
        const double value =
            first ? stationary_start(p, mean, g)
                  : ar_step(p, mean, ratio_prev[static_cast<std::size_t>(c)][static_cast<std::size_t>(v)], g);
        ratio_prev[static_cast<std::size_t>(c)][static_cast<std::size_t>(v)] = value;
        rec[kExplanatoryRatios[static_cast<std::size_t>(v)]] = value;
      }

      {
        const double mean = ceo_mean[static_cast<std::size_t>(c)];
        const double g = path_draw(c, year, 4);
        const double z = first ? stationary_start(kCeoParams, mean, g)
                               : ar_step(kCeoParams, mean, ceo_prev[static_cast<std::size_t>(c)], g);
        ceo_prev[static_cast<std::size_t>(c)] = z;
        rec[Var::CEOt] = inverse_transform(agg.transform, z);
      }

      // Free response steps are drawn unconditionally so constrained years
      // consume the same keyed draws as unconstrained ones.
      Eigen::VectorXd z0(num_responses);
      for (int j = 0; j < num_responses; ++j) {
        const double mean = resp_mean[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
        const double g = path_draw(c, year, 5 + j);
        z0(j) = first ? stationary_start(kResponseParams, mean, g)
                      : ar_step(kResponseParams, mean,
                                resp_prev[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)], g);
      }

      Eigen::VectorXd z = z0;
      if (year >= first_constrained) {
        const int base_year = year - agg.horizon_years;
        const int window_start = base_year - agg.window_years + 1;
        const Eigen::VectorXd aggs = aggregate_row(panel, c, window_start, agg, true);
        const double index = beta.dot(aggs);
        const double eps = draw_noise(master.fork(kTagNoise)
                                          .fork(static_cast<std::uint64_t>(c))
                                          .fork(static_cast<std::uint64_t>(year)),
                                      spec.noise);
        const double target = index + spec.noise_scale * eps;
        // The adjustment direction alpha/|alpha|^2 satisfies alpha'd = 1,
        // so alpha'z = target exactly, while combinations away from alpha
        // pick up unexplained idiosyncratic variation and stay identifiable.
        const double shift = target - alpha.dot(z0);
        z = z0 + (shift / alpha.squaredNorm()) * alpha;
      }
      for (int j = 0; j < num_responses; ++j) {
        resp_prev[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = z(j);
        rec[kResponseVars[static_cast<std::size_t>(j)]] = inverse_transform(agg.transform, z(j));
      }
    }
  }

  SyntheticPanel out;
  out.panel = std::move(panel);
  out.truth.true_beta = std::move(beta);
  out.truth.true_alpha = std::move(alpha);
  out.truth.beta_names = beta_names;
  out.truth.alpha_names = response_column_names(agg.transform);
  out.truth.noise = spec.noise;
  out.truth.noise_scale = spec.noise_scale;
  out.truth.seed = spec.seed;
  return out;
}

std::string ground_truth_to_json(const GroundTruth& truth) {
  nlohmann::ordered_json root;
  root["noise"] = noise_family_name(truth.noise);
  root["noise_scale"] = truth.noise_scale;
  root["seed"] = truth.seed;
  nlohmann::ordered_json beta = nlohmann::ordered_json::array();
  for (int j = 0; j < truth.true_beta.size(); ++j) {
    beta.push_back({{"column", truth.beta_names[static_cast<std::size_t>(j)]},
                    {"value", truth.true_beta(j)}});
  }
  root["true_beta"] = std::move(beta);
  nlohmann::ordered_json alpha = nlohmann::ordered_json::array();
  for (int j = 0; j < truth.true_alpha.size(); ++j) {
    alpha.push_back({{"response", truth.alpha_names[static_cast<std::size_t>(j)]},
                     {"value", truth.true_alpha(j)}});
  }
  root["true_alpha"] = std::move(alpha);
  return root.dump(2);
}

QrFit brute_force_qr(const Eigen::MatrixXd& design, const Eigen::VectorXd& response, double tau) {
  const int n = static_cast<int>(design.rows());
  const int p = static_cast<int>(design.cols());
  if (n > 15 || p > 3) {
    throw DomainError("brute_force_qr is capped at N <= 15, p <= 3");
  }
  if (p < 1 || n <= p) throw InsufficientDataError("brute_force_qr needs N > p >= 1");
  if (!design.allFinite() || !response.allFinite() || response.size() != n) {
    throw DomainError("design and response must be finite and aligned");
  }
  if (!std::isfinite(tau) || tau <= 0.0 || tau >= 1.0) {
    throw DomainError("tau must lie in the open interval (0, 1)");
  }

  auto loss = [tau](double u) { return u >= 0.0 ? tau * u : (tau - 1.0) * u; };

  std::vector<int> subset(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) subset[static_cast<std::size_t>(j)] = j;

  bool have = false;
  QrFit best;
  std::vector<int> best_subset;
  Eigen::MatrixXd xs(p, p);
  Eigen::VectorXd ys(p);
  while (true) {
    for (int j = 0; j < p; ++j) {
      xs.row(j) = design.row(subset[static_cast<std::size_t>(j)]);
      ys(j) = response(subset[static_cast<std::size_t>(j)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(xs);
    if (lu.isInvertible()) {  // singular subsets are skipped
      const Eigen::VectorXd coeff = lu.solve(ys);
      double objective = 0.0;
      for (int i = 0; i < n; ++i) {
        objective += loss(response(i) - design.row(i).dot(coeff));
      }
      if (!have || objective < best.objective) {
        have = true;
        best.coefficients = coeff;
        best.objective = objective;
        best_subset = subset;
      }
    }

    int i = p - 1;
    while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - p + i) --i;
    if (i < 0) break;
    ++subset[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < p; ++j) {
      subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
  }

  if (!have) throw RankError("every p-subset is singular; design is rank deficient");
  best.residuals = response - design * best.coefficients;
  best.vertex_basis = best_subset;
  return best;
}

CrqFit grid_search_crq(const CrqProblem& problem, double step) {
  if (problem.y_matrix.cols() != 2) {
    throw DomainError("grid_search_crq supports exactly two responses");
  }
  if (!(step > 0.0) || step > 1e-2 + 1e-12) {
    throw DomainError("grid step must lie in (0, 1e-2]");
  }

  const long steps = std::lround(std::ceil(1.0 / step - 1e-9));
  static const int kCombos[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

  bool have = false;
  CrqFit best;
  for (long k = 0; k <= steps; ++k) {
    const double a = static_cast<double>(k) / static_cast<double>(steps);
    for (const auto& combo : kCombos) {
      Eigen::VectorXd alpha(2);
      alpha << combo[0] * a, combo[1] * (1.0 - a);
      const Eigen::VectorXd target = problem.y_matrix * alpha;
      // rho_tau(x'b - t) summed equals rho_{1-tau}(t - x'b) summed, so the
      // beta subproblem is a plain quantile regression at 1 - tau.
      const QrFit fit = fit_quantile_regression({problem.x_matrix, target, 1.0 - problem.tau});
      if (!have || fit.objective < best.objective) {
        have = true;
        best.alpha = alpha;
        best.beta = fit.coefficients;
        best.objective = fit.objective;
        best.sign_pattern = {combo[0], combo[1]};
        best.tau = problem.tau;
      }
    }
  }
  return best;
}

}  // namespace crqkit
