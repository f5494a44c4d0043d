#include <doctest.h>

#include <cmath>
#include <vector>

#include "rolem/inference.hpp"
#include "rolem/simgen.hpp"
#include "test_util.hpp"

using namespace rolem;
using namespace rolem::inference;

TEST_CASE("bic parameter count matches the closed-form arithmetic") {
  CHECK(bic_parameter_count(20, 30, 3, false) == 322);
  CHECK(bic_parameter_count(6, 6, 2, false) == 41);
  CHECK(bic_parameter_count(6, 6, 2, true) == 40);
}

TEST_CASE("a BIC difference of -6 is a Bayes factor near 20") {
  CHECK(std::exp(-(-6.0) / 2.0) == doctest::Approx(20.0855).epsilon(1e-4));
}

TEST_CASE("bic uses the maximum observed log-likelihood") {
  std::vector<double> lls{-100.0, -95.5, -97.2};
  CHECK(bic(lls, 10, 50) ==
        doctest::Approx(-2.0 * -95.5 + 10.0 * std::log(50.0)));
  CHECK_THROWS_AS(bic({}, 10, 50), InvalidParameterError);
}

TEST_CASE("bic ordering is invariant to a constant log-likelihood shift") {
  std::vector<double> a{-100.0, -90.0};
  std::vector<double> b{-95.0, -92.0};
  const double bic_a = bic(a, 12, 40), bic_b = bic(b, 15, 40);
  for (double& v : a) v += 17.5;
  for (double& v : b) v += 17.5;
  const double bic_a2 = bic(a, 12, 40), bic_b2 = bic(b, 15, 40);
  CHECK((bic_a < bic_b) == (bic_a2 < bic_b2));
  CHECK(bic_a - bic_b == doctest::Approx(bic_a2 - bic_b2).epsilon(1e-12));
}

TEST_CASE("waic on a degenerate chain has zero penalty") {
  Eigen::MatrixXd pw(3, 2);
  pw << -1.5, -2.0, -1.5, -2.0, -1.5, -2.0;
  auto out = waic(pw);
  CHECK(out.p_waic == doctest::Approx(0.0));
  CHECK(out.lppd == doctest::Approx(-3.5));
  CHECK(out.waic == doctest::Approx(7.0));
  CHECK(out.waic ==
        doctest::Approx(-2.0 * out.lppd + 2.0 * out.p_waic).epsilon(1e-12));
  CHECK_THROWS_AS(waic(Eigen::MatrixXd::Zero(1, 3)), InvalidParameterError);
}

TEST_CASE("waic against the conjugate normal-normal oracle") {
  // theta ~ N(0,1); y_i | theta ~ N(theta, 1); two subjects.
  const double y1 = 0.3, y2 = -0.5;
  const double post_var = 1.0 / 3.0;
  const double post_mean = (y1 + y2) / 3.0;
  Rng rng(2718);
  const int draws = 200000;
  Eigen::MatrixXd pw(draws, 2);
  for (int s = 0; s < draws; ++s) {
    const double theta = post_mean + std::sqrt(post_var) * rng.normal();
    for (int i = 0; i < 2; ++i) {
      const double y = i == 0 ? y1 : y2;
      pw(s, i) = -0.5 * std::log(2.0 * M_PI) - 0.5 * (y - theta) * (y - theta);
    }
  }
  auto out = waic(pw);

  // Independent recomputation from the same draws (long double, two-pass).
  long double lppd_ref = 0.0L, p_ref = 0.0L;
  for (int i = 0; i < 2; ++i) {
    long double mx = pw.col(i).maxCoeff();
    long double acc = 0.0L;
    for (int s = 0; s < draws; ++s) acc += std::exp((long double)pw(s, i) - mx);
    lppd_ref += mx + std::log(acc / draws);
    long double mean = 0.0L;
    for (int s = 0; s < draws; ++s) mean += pw(s, i);
    mean /= draws;
    long double var = 0.0L;
    for (int s = 0; s < draws; ++s)
      var += (pw(s, i) - mean) * (pw(s, i) - mean);
    p_ref += var / (draws - 1);
  }
  CHECK(std::abs(out.lppd - (double)lppd_ref) < 1e-8);
  CHECK(std::abs(out.p_waic - (double)p_ref) < 1e-8);
  CHECK(out.waic == doctest::Approx(-2.0 * out.lppd + 2.0 * out.p_waic));

  // Monte-Carlo agreement with the closed forms.
  double lppd_exact = 0.0, p_exact = 0.0;
  for (double y : {y1, y2}) {
    const double pred_var = 1.0 + post_var;
    lppd_exact += -0.5 * std::log(2.0 * M_PI * pred_var) -
                  0.5 * (y - post_mean) * (y - post_mean) / pred_var;
    const double d = y - post_mean;
    p_exact += post_var * post_var / 2.0 + post_var * d * d;
  }
  CHECK(std::abs(out.lppd - lppd_exact) < 0.01);
  CHECK(std::abs(out.p_waic - p_exact) < 0.01);
}

TEST_CASE("hpd interval of uniform samples has length near the level") {
  Rng rng(5);
  std::vector<double> samples(100000);
  for (auto& s : samples) s = rng.uniform();
  auto [lo, hi] = hpd_interval(samples, 0.95);
  CHECK(std::abs((hi - lo) - 0.95) < 0.02);
}

TEST_CASE("hpd interval of normal samples matches the central interval") {
  Rng rng(6);
  std::vector<double> samples(100000);
  for (auto& s : samples) s = rng.normal();
  auto [lo, hi] = hpd_interval(samples, 0.95);
  CHECK(std::abs(lo + 1.959964) < 0.05);
  CHECK(std::abs(hi - 1.959964) < 0.05);
}

TEST_CASE("hpd interval degenerate and error cases") {
  std::vector<double> constant(50, 3.25);
  auto [lo, hi] = hpd_interval(constant, 0.95);
  CHECK(lo == 3.25);
  CHECK(hi == 3.25);
  CHECK_THROWS_AS(hpd_interval(std::vector<double>(5, 1.0), 0.95),
                  InvalidParameterError);
  CHECK_THROWS_AS(hpd_interval(constant, 1.0), InvalidParameterError);
}

TEST_CASE("hpd interval is the shortest covering window") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> samples(40);
    for (auto& s : samples) s = rng.normal() * (1.0 + rng.uniform());
    auto [lo, hi] = hpd_interval(samples, 0.8);
    std::sort(samples.begin(), samples.end());
    const int m = static_cast<int>(std::ceil(0.8 * samples.size()));
    double best = 1e300;
    for (std::size_t i = 0; i + m <= samples.size(); ++i)
      best = std::min(best, samples[i + m - 1] - samples[i]);
    CHECK(hi - lo == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("frobenius error") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(2, 2);
  CHECK(frobenius_error(a, a) == 0.0);
  CHECK(frobenius_error(2.0 * a, a) == doctest::Approx(2.0));
  Rng rng(8);
  Eigen::MatrixXd x = rng.normal_matrix(3, 4), y = rng.normal_matrix(3, 4);
  Eigen::MatrixXd d = x - y;
  CHECK(frobenius_error(x, y) ==
        doctest::Approx(std::sqrt((d.transpose() * d).trace())));
  CHECK_THROWS_AS(frobenius_error(x, Eigen::MatrixXd::Zero(2, 2)),
                  InvalidParameterError);
}

TEST_CASE("autocorrelation of white noise sits in the 2/sqrt(n) band") {
  Rng rng(11);
  const int n = 20000;
  std::vector<double> series(n);
  for (auto& s : series) s = rng.normal();
  Eigen::VectorXd acf = autocorrelations(series, 5);
  CHECK(std::abs(acf(0)) < 2.0 / std::sqrt(n));
  for (int k = 1; k < 5; ++k) CHECK(std::abs(acf(k)) < 3.0 / std::sqrt(n));
  CHECK(effective_sample_size(series) > 0.85 * n);
}

TEST_CASE("AR(1) chain has the analytic effective sample size") {
  Rng rng(10);
  const int n = 200000;
  const double phi = 0.9;
  std::vector<double> series(n);
  double x = 0.0;
  for (int t = 0; t < n; ++t) {
    x = phi * x + rng.normal();
    series[t] = x;
  }
  const double ratio = effective_sample_size(series) / n;
  const double expected = (1.0 - phi) / (1.0 + phi);
  CHECK(std::abs(ratio - expected) < 0.3 * expected);
}

TEST_CASE("split R-hat distinguishes mixed and separated chains") {
  Rng rng(11);
  std::vector<double> c1(2000), c2(2000);
  for (auto& v : c1) v = rng.normal();
  for (auto& v : c2) v = rng.normal();
  CHECK(split_rhat({c1, c2}) < 1.02);
  for (auto& v : c2) v += 3.0;
  CHECK(split_rhat({c1, c2}) > 1.5);
}

TEST_CASE("wilson interval brackets the point estimate") {
  auto [lo, hi] = wilson_interval(90, 100);
  CHECK(lo < 0.9);
  CHECK(hi > 0.9);
  CHECK(lo > 0.8);
  CHECK(hi < 0.97);
  CHECK_THROWS_AS(wilson_interval(0, 0), InvalidParameterError);
}

TEST_CASE("fold assignment is a deterministic partition") {
  auto f1 = fold_assignment(23, 5, 99);
  auto f2 = fold_assignment(23, 5, 99);
  CHECK(f1 == f2);
  std::vector<int> counts(5, 0);
  for (int f : f1) {
    REQUIRE(f >= 0);
    REQUIRE(f < 5);
    ++counts[f];
  }
  for (int c : counts) CHECK(c >= 4);
  CHECK_THROWS_AS(fold_assignment(3, 5, 1), InvalidParameterError);
}

namespace {

// Predictive slices straight from a ground truth.
std::vector<PredictiveDraw> truth_draws(const simgen::GroundTruth& truth) {
  PredictiveDraw d;
  d.alpha = truth.alpha;
  d.beta = truth.beta;
  d.sigma_eps = truth.sigma_eps;
  d.rho = truth.rho;
  d.nu = std::isfinite(truth.nu) ? truth.nu : 10.0;
  return {d};
}

}  // namespace

TEST_CASE("cv MAE vanishes for a perfect model on noiseless data") {
  Rng rng(12);
  simgen::SimDesign design;
  design.r = 4;
  design.p = 3;
  design.u = 2;
  design.n = 20;
  design.j = 3;
  auto [data, truth] = simgen::generate(design, rng);
  // Rebuild the responses without noise.
  std::vector<model::Subject> clean;
  for (int i = 0; i < data.n(); ++i) {
    model::Subject s = data.subject(i);
    s.y = truth.alpha * Eigen::RowVectorXd::Ones(s.times()) +
          truth.beta * s.x;
    clean.push_back(std::move(s));
  }
  model::LongitudinalDataset noiseless(std::move(clean), design.r, design.p);
  auto fit = [&](const model::LongitudinalDataset&) {
    return truth_draws(truth);
  };
  CvScores scores = cv_scores(noiseless, 4, corr::Kind::Ar1,
                              model::ErrorModel::T, fit, 7);
  CHECK(scores.mae < 1e-12);
}

TEST_CASE("true parameters dominate perturbed ones in held-out MLPD") {
  int wins = 0;
  double margin = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    Rng rng(derive_seed(313, rep));
    simgen::SimDesign design;
    design.r = 3;
    design.p = 2;
    design.u = 1;
    design.n = 24;
    design.j = 3;
    auto [data, truth] = simgen::generate(design, rng);
    auto fit_true = [&](const model::LongitudinalDataset&) {
      return truth_draws(truth);
    };
    simgen::GroundTruth bent = truth;
    Rng prng(derive_seed(414, rep));
    bent.beta += 0.5 * prng.normal_matrix(design.r, design.p);
    auto fit_bent = [&](const model::LongitudinalDataset&) {
      return truth_draws(bent);
    };
    const double good =
        cv_scores(data, 4, corr::Kind::Ar1, model::ErrorModel::T, fit_true, 5)
            .mlpd;
    const double bad =
        cv_scores(data, 4, corr::Kind::Ar1, model::ErrorModel::T, fit_bent, 5)
            .mlpd;
    margin += good - bad;
    if (good >= bad) ++wins;
  }
  CHECK(margin / 20.0 > 0.0);
  CHECK(wins >= 17);
}
