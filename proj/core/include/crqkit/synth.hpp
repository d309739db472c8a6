#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "crqkit/crq.hpp"
#include "crqkit/features.hpp"
#include "crqkit/panel_io.hpp"
#include "crqkit/quantile_lp.hpp"

namespace crqkit {

enum class NoiseFamily { gaussian, student_t2, contaminated };

const char* noise_family_name(NoiseFamily f);
NoiseFamily noise_family_from_name(const std::string& name);

struct GeneratorSpec {
  int num_companies = 100;
  int num_years = 10;
  int num_industries = 6;
  int start_year = 2009;
  Eigen::VectorXd true_beta;   // over aggregate columns; empty picks the default
  Eigen::VectorXd true_alpha;  // over responses, sum |alpha_j| = 1; empty picks the default
  NoiseFamily noise = NoiseFamily::gaussian;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
  AggregationSpec aggregation;  // layout the relation is planted in
};

struct GroundTruth {
  Eigen::VectorXd true_beta;
  Eigen::VectorXd true_alpha;
  std::vector<std::string> beta_names;   // aggregate column labels
  std::vector<std::string> alpha_names;  // response labels
  NoiseFamily noise = NoiseFamily::gaussian;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
};

struct SyntheticPanel {
  PanelDataset panel;
  GroundTruth truth;
};

// Simulates company paths so that for every window with future coverage the
// transformed composite response alpha'Y at base_year + horizon equals the
// aggregate-column index beta'x plus noise of the configured family.
// Deterministic in the seed; draws are keyed per (company, year, variable).
SyntheticPanel generate(const GeneratorSpec& spec);

std::string ground_truth_to_json(const GroundTruth& truth);

// Enumeration oracle for quantile regression: fits exactly through every
// p-subset of observations, evaluates the check loss, and returns the best.
// Ties resolve to the lexicographically smallest subset. Refuses N > 15 or
// p > 3.
QrFit brute_force_qr(const Eigen::MatrixXd& design, const Eigen::VectorXd& response, double tau);

// Grid oracle for the two-response canonical regression quantile: scans
// alpha over {(a, 1-a)} with all sign combinations at the given step,
// solving the beta subproblem by quantile regression at each point.
CrqFit grid_search_crq(const CrqProblem& problem, double step);

}  // namespace crqkit
