#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "crqkit/crq.hpp"
#include "crqkit/errors.hpp"
#include "crqkit/features.hpp"
#include "crqkit/panel_io.hpp"
#include "crqkit/quantile_lp.hpp"
#include "crqkit/rng.hpp"
#include "crqkit/synth.hpp"

using namespace crqkit;

namespace {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd ac = a.array() - a.mean();
  const Eigen::ArrayXd bc = b.array() - b.mean();
  return (ac * bc).sum() / std::sqrt(ac.square().sum() * bc.square().sum());
}

double sample_kurtosis(const Eigen::VectorXd& x) {
  const double mean = x.mean();
  const Eigen::ArrayXd centered = x.array() - mean;
  const double m2 = centered.square().mean();
  const double m4 = centered.square().square().mean();
  return m4 / (m2 * m2);
}

GeneratorSpec base_spec() {
  GeneratorSpec spec;
  spec.num_companies = 60;
  spec.num_years = 10;
  spec.num_industries = 6;
  spec.noise_scale = 0.3;
  spec.seed = 123;
  return spec;
}

}  // namespace

TEST_CASE("noiseless panels are exactly explained by the planted coefficients") {
  GeneratorSpec spec = base_spec();
  spec.noise_scale = 0.0;
  const SyntheticPanel synthetic = generate(spec);

  const DesignMatrix design = build_design_matrix(synthetic.panel, spec.aggregation, 2013, true);
  // Check the planted identity directly: alpha'Y* = beta'aggregates.
  const int agg_cols = static_cast<int>(synthetic.truth.beta_names.size());
  const Eigen::MatrixXd aggs = design.x_star.rightCols(agg_cols);
  const Eigen::VectorXd index = aggs * synthetic.truth.true_beta;
  const Eigen::VectorXd composite = design.y_star * synthetic.truth.true_alpha;
  CHECK((index - composite).cwiseAbs().maxCoeff() < 1e-9);

  const CrqFit fit = fit_crq({design.x_star, design.y_star, 0.5});
  CHECK(fit.objective < 1e-7);
  // Identifiable up to a global sign flip.
  const double align = fit.alpha.dot(synthetic.truth.true_alpha) >= 0 ? 1.0 : -1.0;
  for (int j = 0; j < 5; ++j) {
    CHECK(align * fit.alpha(j) ==
          doctest::Approx(synthetic.truth.true_alpha(j)).epsilon(1e-5));
  }
}

TEST_CASE("same seed reproduces the panel bit for bit") {
  const GeneratorSpec spec = base_spec();
  const SyntheticPanel a = generate(spec);
  const SyntheticPanel b = generate(spec);
  CHECK(panel_to_csv(a.panel) == panel_to_csv(b.panel));

  GeneratorSpec other = spec;
  other.seed = spec.seed + 1;
  const SyntheticPanel c = generate(other);
  CHECK(panel_to_csv(a.panel) != panel_to_csv(c.panel));
}

TEST_CASE("student-t noise fattens the response tails") {
  int heavier = 0;
  for (int rep = 0; rep < 5; ++rep) {
    GeneratorSpec gauss = base_spec();
    gauss.num_companies = 120;
    gauss.seed = 1000 + static_cast<std::uint64_t>(rep);
    gauss.noise_scale = 1.0;
    GeneratorSpec heavy = gauss;
    heavy.noise = NoiseFamily::student_t2;

    const SyntheticPanel pg = generate(gauss);
    const SyntheticPanel ph = generate(heavy);

    // Kurtosis of the planted-noise realization: composite minus index.
    auto residuals = [](const SyntheticPanel& sp) {
      const AggregationSpec agg;
      const DesignMatrix d = build_design_matrix(sp.panel, agg, 2013, true);
      const int agg_cols = static_cast<int>(sp.truth.beta_names.size());
      const Eigen::VectorXd idx = d.x_star.rightCols(agg_cols) * sp.truth.true_beta;
      return Eigen::VectorXd(d.y_star * sp.truth.true_alpha - idx);
    };
    if (sample_kurtosis(residuals(ph)) > sample_kurtosis(residuals(pg))) ++heavier;
  }
  CHECK(heavier >= 4);
}

TEST_CASE("fitted beta tracks the planted beta at low noise") {
  int good = 0;
  for (int rep = 0; rep < 20; ++rep) {
    GeneratorSpec spec = base_spec();
    spec.seed = 400 + static_cast<std::uint64_t>(rep);
    spec.noise_scale = 0.05;
    const SyntheticPanel synthetic = generate(spec);
    const DesignMatrix design =
        build_design_matrix(synthetic.panel, spec.aggregation, 2013, true);
    const CrqFit fit = fit_crq({design.x_star, design.y_star, 0.5});

    const int agg_cols = static_cast<int>(synthetic.truth.beta_names.size());
    Eigen::VectorXd fitted_agg = fit.beta.tail(agg_cols);
    const double align = fit.alpha.dot(synthetic.truth.true_alpha) >= 0 ? 1.0 : -1.0;
    fitted_agg *= align;
    if (pearson(fitted_agg, synthetic.truth.true_beta) > 0.9) ++good;
  }
  CHECK(good == 20);
}

TEST_CASE("ground truth sidecar serializes names and values") {
  const SyntheticPanel synthetic = generate(base_spec());
  const std::string json = ground_truth_to_json(synthetic.truth);
  CHECK(json.find("logRevwt") != std::string::npos);
  CHECK(json.find("\"noise\": \"gaussian\"") != std::string::npos);
  CHECK(json.find("\"seed\": 123") != std::string::npos);
}

TEST_CASE("generator validates dimensions") {
  GeneratorSpec spec = base_spec();
  spec.num_years = 6;  // needs window + horizon = 7
  CHECK_THROWS_AS(generate(spec), DomainError);

  GeneratorSpec bad_alpha = base_spec();
  bad_alpha.true_alpha = Eigen::VectorXd::Ones(5);  // sums to 5
  CHECK_THROWS_AS(generate(bad_alpha), DomainError);

  GeneratorSpec bad_beta = base_spec();
  bad_beta.true_beta = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(generate(bad_beta), DomainError);
}

TEST_CASE("brute force oracle equals the LP on its own turf") {
  rng::Stream s(9);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 8 + static_cast<int>(s.next_uniform() * 7);
    Eigen::MatrixXd x(n, 2);
    x.col(0).setOnes();
    for (int i = 0; i < n; ++i) x(i, 1) = s.next_gaussian();
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = s.next_gaussian();
    const QrFit bf = brute_force_qr(x, y, 0.5);
    const QrFit lp = fit_quantile_regression({x, y, 0.5});
    CHECK(std::abs(bf.objective - lp.objective) < 1e-9 * std::max(1.0, bf.objective));
  }
}

TEST_CASE("collinear subsets are skipped, optimum still found") {
  Eigen::MatrixXd x(6, 2);
  // Rows 0 and 1 are identical: the {0,1} subset is singular.
  x << 1, 2, 1, 2, 1, 0, 1, 1, 1, 3, 1, 4;
  Eigen::VectorXd y(6);
  y << 5, 4, 1, 2, 7, 9;
  const QrFit bf = brute_force_qr(x, y, 0.5);
  const QrFit lp = fit_quantile_regression({x, y, 0.5});
  CHECK(std::abs(bf.objective - lp.objective) < 1e-9 * std::max(1.0, bf.objective));
}

TEST_CASE("intercept-only brute force agrees with the sample quantile") {
  const std::vector<double> xs = {4.0, -1.0, 2.5, 3.0, 0.5};
  Eigen::MatrixXd design = Eigen::MatrixXd::Ones(5, 1);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) y(i) = xs[static_cast<std::size_t>(i)];
  for (double tau : {0.25, 0.5, 0.75}) {
    const QrFit bf = brute_force_qr(design, y, tau);
    const double q = sample_quantile(xs, tau);
    double obj_q = 0.0;
    for (double x : xs) obj_q += check_loss(x - q, tau);
    CHECK(bf.objective == doctest::Approx(obj_q).epsilon(1e-12));
  }
}

TEST_CASE("brute force respects its caps") {
  Eigen::MatrixXd big = Eigen::MatrixXd::Random(16, 2);
  CHECK_THROWS_AS(brute_force_qr(big, Eigen::VectorXd::Zero(16), 0.5), DomainError);
  Eigen::MatrixXd wide = Eigen::MatrixXd::Random(10, 4);
  CHECK_THROWS_AS(brute_force_qr(wide, Eigen::VectorXd::Zero(10), 0.5), DomainError);
}

TEST_CASE("grid search finds exact relations and refines monotonically") {
  rng::Stream s(21);
  const int n = 12;
  Eigen::MatrixXd x(n, 2);
  x.col(0).setOnes();
  for (int i = 0; i < n; ++i) x(i, 1) = s.next_gaussian();
  Eigen::MatrixXd y(n, 2);
  y.col(0) = x * Eigen::Vector2d(0.5, 1.5);
  for (int i = 0; i < n; ++i) y(i, 1) = s.next_gaussian();
  const CrqProblem problem{x, y, 0.5};

  const CrqFit coarse = grid_search_crq(problem, 1e-2);
  CHECK(coarse.objective < 1e-9);
  CHECK(std::abs(coarse.alpha(0)) == doctest::Approx(1.0));

  CrqProblem noisy = problem;
  for (int i = 0; i < n; ++i) {
    noisy.y_matrix(i, 0) += 0.2 * s.next_gaussian();
  }
  const CrqFit step1 = grid_search_crq(noisy, 1e-2);
  const CrqFit step2 = grid_search_crq(noisy, 5e-3);
  const CrqFit step3 = grid_search_crq(noisy, 2.5e-3);
  CHECK(step2.objective <= step1.objective + 1e-12);
  CHECK(step3.objective <= step2.objective + 1e-12);

  CHECK_THROWS_AS(grid_search_crq(noisy, 0.5), DomainError);
  CrqProblem wide = noisy;
  wide.y_matrix = Eigen::MatrixXd::Random(n, 3);
  CHECK_THROWS_AS(grid_search_crq(wide, 1e-2), DomainError);
}

TEST_CASE("panel passes loader validation end to end") {
  const SyntheticPanel synthetic = generate(base_spec());
  const std::string csv = panel_to_csv(synthetic.panel);
  std::istringstream in(csv);
  const PanelDataset reloaded = parse_panel_csv(in, "synthetic.csv");
  CHECK(reloaded.num_companies() == synthetic.panel.num_companies());
  CHECK(reloaded.num_years() == synthetic.panel.num_years());
  CHECK(panel_to_csv(reloaded) == csv);
}
