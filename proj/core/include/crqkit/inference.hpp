#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>

namespace crqkit {

enum class BootstrapScheme { weighted, resample };

const char* scheme_name(BootstrapScheme s);
BootstrapScheme scheme_from_name(const std::string& name);

struct BootstrapSpec {
  int replications = 200;
  std::uint64_t seed = 0;
  BootstrapScheme scheme = BootstrapScheme::weighted;
};

struct BootstrapSummary {
  Eigen::VectorXd estimates;   // from unit weights
  Eigen::VectorXd std_errors;  // per-coordinate SD across replications
  Eigen::VectorXd t_stats;     // estimates / std_errors
  int replications_requested = 0;
  int replications_used = 0;   // after dropping failed refits
  std::uint64_t seed = 0;
  BootstrapScheme scheme = BootstrapScheme::weighted;
};

// Estimator refit under per-observation nonnegative weights (unit weights
// reproduce the point estimate). Must be a pure function of the weights.
using WeightedEstimator = std::function<Eigen::VectorXd(const Eigen::VectorXd& weights)>;

// Weighted bootstrap: R independent draws of unit-mean exponential weights,
// one per observation. Std errors are the per-coordinate SD across
// replications. Replication streams split off the master seed by counter, so
// results do not depend on evaluation order. Refit failures are dropped and
// reported; more than 10% of them, or a zero std error, is an inference
// error.
BootstrapSummary weighted_bootstrap(const WeightedEstimator& fit, int num_observations,
                                    const BootstrapSpec& spec);

// Standard bootstrap: resamples num_observations indices with replacement
// and refits on the multiplicity weights.
BootstrapSummary resample_bootstrap(const WeightedEstimator& fit, int num_observations,
                                    const BootstrapSpec& spec);

// Dispatch on spec.scheme.
BootstrapSummary run_bootstrap(const WeightedEstimator& fit, int num_observations,
                               const BootstrapSpec& spec);

// Inverse standard normal CDF. Rational approximation refined by one Halley
// step; |error| < 1e-9 over (1e-300, 1 - 1e-16).
double normal_quantile(double p);

// Standard normal CDF (erfc-based).
double normal_cdf(double x);

// Two-sided simultaneous threshold: normal_quantile(1 - (level/2)/num_tests).
double bonferroni_critical(int num_tests, double level);

}  // namespace crqkit
