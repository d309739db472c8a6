#include "crqkit/inference.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "crqkit/errors.hpp"
#include "crqkit/rng.hpp"

namespace crqkit {

const char* scheme_name(BootstrapScheme s) {
  return s == BootstrapScheme::weighted ? "weighted" : "resample";
}

BootstrapScheme scheme_from_name(const std::string& name) {
  if (name == "weighted") return BootstrapScheme::weighted;
  if (name == "resample") return BootstrapScheme::resample;
  throw DomainError("unknown bootstrap scheme '" + name + "'");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile requires p in the open interval (0, 1)");
  }

  // Acklam's rational approximation, then one Halley step against the
  // complementary error function.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;

  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Error expressed through the smaller tail to keep precision at extremes.
  const double sqrt2 = std::sqrt(2.0);
  double err;
  if (p < 0.5) {
    err = 0.5 * std::erfc(-x / sqrt2) - p;
  } else {
    err = (1.0 - p) - 0.5 * std::erfc(x / sqrt2);
  }
  const double log_pdf = -0.5 * x * x - 0.5 * std::log(2.0 * M_PI);
  const double u = err * std::exp(-log_pdf);
  return x - u / (1.0 + 0.5 * x * u);
}

double bonferroni_critical(int num_tests, double level) {
  if (num_tests < 1) throw DomainError("num_tests must be at least 1");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
  return normal_quantile(1.0 - (level / 2.0) / num_tests);
}

namespace {

BootstrapSummary bootstrap_impl(const WeightedEstimator& fit, int num_observations,
                                const BootstrapSpec& spec, BootstrapScheme scheme) {
  if (spec.replications < 2) throw DomainError("bootstrap needs at least 2 replications");
  if (num_observations < 1) throw DomainError("bootstrap needs at least one observation");
  if (scheme == BootstrapScheme::resample && num_observations < 2) {
    throw InferenceError("resampling a single observation is degenerate");
  }

  const Eigen::VectorXd estimates = fit(Eigen::VectorXd::Ones(num_observations));
  const int dim = static_cast<int>(estimates.size());

  rng::Stream master(spec.seed);
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(static_cast<std::size_t>(spec.replications));
  int failures = 0;
  Eigen::VectorXd weights(num_observations);
  for (int r = 0; r < spec.replications; ++r) {
    rng::Stream stream = master.fork(static_cast<std::uint64_t>(r) + 1);
    if (scheme == BootstrapScheme::resample) {
      weights.setZero();
      for (int k = 0; k < num_observations; ++k) {
        const int idx = std::min(num_observations - 1,
                                 static_cast<int>(stream.next_uniform() * num_observations));
        weights(idx) += 1.0;
      }
    } else {
      for (int i = 0; i < num_observations; ++i) weights(i) = stream.next_exponential();
    }

    bool ok = true;
    Eigen::VectorXd replicate;
    try {
      replicate = fit(weights);
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) {
      ++failures;
      continue;
    }
    if (replicate.size() != dim) {
      throw InferenceError("estimator returned inconsistent dimensions across replications");
    }
    draws.push_back(std::move(replicate));
  }

  if (failures * 10 > spec.replications) {
    throw InferenceError("bootstrap refit failed in " + std::to_string(failures) + " of " +
                         std::to_string(spec.replications) + " replications");
  }
  const int used = static_cast<int>(draws.size());
  if (used < 2) throw InferenceError("too few successful bootstrap replications");

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& v : draws) mean += v;
  mean /= static_cast<double>(used);
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(dim);
  for (const auto& v : draws) ss += (v - mean).cwiseAbs2();
  Eigen::VectorXd sd = (ss / static_cast<double>(used - 1)).cwiseSqrt();

  for (int j = 0; j < dim; ++j) {
    if (sd(j) == 0.0) {
      throw InferenceError("degenerate bootstrap: coordinate " + std::to_string(j) +
                           " has zero standard error");
    }
  }

  BootstrapSummary summary;
  summary.estimates = estimates;
  summary.std_errors = std::move(sd);
  summary.t_stats = summary.estimates.cwiseQuotient(summary.std_errors);
  summary.replications_requested = spec.replications;
  summary.replications_used = used;
  summary.seed = spec.seed;
  summary.scheme = scheme;
  return summary;
}

}  // namespace

BootstrapSummary weighted_bootstrap(const WeightedEstimator& fit, int num_observations,
                                    const BootstrapSpec& spec) {
  return bootstrap_impl(fit, num_observations, spec, BootstrapScheme::weighted);
}

BootstrapSummary resample_bootstrap(const WeightedEstimator& fit, int num_observations,
                                    const BootstrapSpec& spec) {
  return bootstrap_impl(fit, num_observations, spec, BootstrapScheme::resample);
}

BootstrapSummary run_bootstrap(const WeightedEstimator& fit, int num_observations,
                               const BootstrapSpec& spec) {
  return bootstrap_impl(fit, num_observations, spec, spec.scheme);
}

}  // namespace crqkit
