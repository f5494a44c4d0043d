#include "rolem/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rolem/matvar.hpp"
#include "rolem/rng.hpp"

namespace rolem::inference {

int bic_parameter_count(int r, int p, int u, bool normal_mode) {
  const int free_p = (r - u) * u;
  int count = r + u * p + free_p + u * (u + 1) / 2 +
              (r - u) * (r - u + 1) / 2 + 1 + 1;
  if (normal_mode) count -= 1;
  return count;
}

double bic(const std::vector<double>& logliks, int p_bic, int n) {
  if (logliks.empty())
    throw InvalidParameterError("BIC needs a non-empty chain");
  const double max_ll = *std::max_element(logliks.begin(), logliks.end());
  return -2.0 * max_ll + p_bic * std::log(static_cast<double>(n));
}

double log_mean_exp(const Eigen::VectorXd& values) {
  const double m = values.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((values.array() - m).exp().mean());
}

WaicResult waic(const Eigen::MatrixXd& pointwise) {
  const int draws = static_cast<int>(pointwise.rows());
  const int n = static_cast<int>(pointwise.cols());
  if (draws < 2)
    throw InvalidParameterError("WAIC needs at least two draws");
  WaicResult out;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd col = pointwise.col(i);
    out.lppd += log_mean_exp(col);
    const double mean = col.mean();
    out.p_waic += (col.array() - mean).square().sum() / (draws - 1);
  }
  out.waic = -2.0 * out.lppd + 2.0 * out.p_waic;
  return out;
}

std::pair<double, double> hpd_interval(std::vector<double> samples,
                                       double level) {
  const int n = static_cast<int>(samples.size());
  if (n < 20) throw InvalidParameterError("HPD interval needs >= 20 samples");
  if (!(level > 0.0 && level < 1.0))
    throw InvalidParameterError("HPD level must lie in (0, 1)");
  std::sort(samples.begin(), samples.end());
  const int m = std::min<int>(n, static_cast<int>(std::ceil(level * n)));
  double best_lo = samples.front();
  double best_hi = samples[m - 1];
  for (int i = 0; i + m <= n; ++i) {
    const double width = samples[i + m - 1] - samples[i];
    if (width < best_hi - best_lo) {
      best_lo = samples[i];
      best_hi = samples[i + m - 1];
    }
  }
  return {best_lo, best_hi};
}

double frobenius_error(const Eigen::MatrixXd& estimate,
                       const Eigen::MatrixXd& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw InvalidParameterError("frobenius_error shape mismatch");
  return (estimate - truth).norm();
}

Eigen::VectorXd autocorrelations(const std::vector<double>& series,
                                 int max_lag) {
  const int n = static_cast<int>(series.size());
  if (n < 2) throw InvalidParameterError("series too short");
  max_lag = std::min(max_lag, n - 1);
  const double mean =
      std::accumulate(series.begin(), series.end(), 0.0) / n;
  double c0 = 0.0;
  for (double v : series) c0 += (v - mean) * (v - mean);
  c0 /= n;
  Eigen::VectorXd acf(max_lag);
  if (c0 <= 0.0) {
    acf.setZero();
    return acf;
  }
  for (int k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (int t = 0; t + k < n; ++t)
      ck += (series[t] - mean) * (series[t + k] - mean);
    acf(k - 1) = ck / n / c0;
  }
  return acf;
}

double effective_sample_size(const std::vector<double>& series) {
  const int n = static_cast<int>(series.size());
  if (n < 4) return static_cast<double>(n);
  // The positive-sequence truncation fires long before 5000 lags for any
  // chain with non-negligible ESS; capping keeps the scan O(n).
  Eigen::VectorXd acf = autocorrelations(series, std::min(n - 2, 5000));
  // rho_0 = 1; pair sums Gamma_m = rho_{2m} + rho_{2m+1} while positive.
  double tau = -1.0;
  double gamma = 1.0 + acf(0);
  int m = 0;
  while (gamma > 0.0) {
    tau += 2.0 * gamma;
    ++m;
    const int i1 = 2 * m - 1;  // rho_{2m} index (acf starts at lag 1)
    const int i2 = 2 * m;      // rho_{2m+1}
    if (i2 >= acf.size()) break;
    gamma = acf(i1) + acf(i2);
  }
  const double ess = n / std::max(tau, 1e-12);
  return std::min(std::max(ess, 1.0), static_cast<double>(n));
}

SeriesDiagnostics series_diagnostics(const std::vector<double>& series,
                                     int max_lag) {
  SeriesDiagnostics out;
  out.acf = autocorrelations(series, max_lag);
  out.ess = effective_sample_size(series);
  return out;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    const int half = static_cast<int>(c.size()) / 2;
    if (half < 2) throw InvalidParameterError("chains too short for R-hat");
    halves.emplace_back(c.begin(), c.begin() + half);
    halves.emplace_back(c.begin() + half, c.begin() + 2 * half);
  }
  const int m = static_cast<int>(halves.size());
  const int n = static_cast<int>(halves.front().size());
  std::vector<double> means(m), vars(m);
  for (int j = 0; j < m; ++j) {
    const auto& h = halves[j];
    means[j] = std::accumulate(h.begin(), h.end(), 0.0) / n;
    double v = 0.0;
    for (double x : h) v += (x - means[j]) * (x - means[j]);
    vars[j] = v / (n - 1);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= static_cast<double>(n) / (m - 1);
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
  if (w <= 0.0) return 1.0;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

std::pair<double, double> wilson_interval(long successes, long trials,
                                          double z) {
  if (trials <= 0) throw InvalidParameterError("empty binomial sample");
  const double p = static_cast<double>(successes) / trials;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / trials;
  const double center = (p + z2 / (2.0 * trials)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) /
      denom;
  return {center - half, center + half};
}

std::vector<int> fold_assignment(int n, int k_folds, std::uint64_t seed) {
  if (k_folds < 2 || k_folds > n)
    throw InvalidParameterError("need 2 <= K <= n folds");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i)
    std::swap(order[i], order[rng.uniform_index(i + 1)]);
  std::vector<int> fold(n);
  for (int pos = 0; pos < n; ++pos) fold[order[pos]] = pos % k_folds;
  return fold;
}

CvScores cv_scores(const model::LongitudinalDataset& data, int k_folds,
                   corr::Kind kind, model::ErrorModel error_model,
                   const FitFunction& fit, std::uint64_t seed) {
  const int n = data.n();
  const std::vector<int> fold = fold_assignment(n, k_folds, seed);

  double sum_logf = 0.0;
  double abs_err = 0.0;
  long entries = 0;
  for (int f = 0; f < k_folds; ++f) {
    std::vector<model::Subject> train;
    std::vector<int> test_ids;
    for (int i = 0; i < n; ++i) {
      if (fold[i] == f)
        test_ids.push_back(i);
      else
        train.push_back(data.subject(i));
    }
    if (test_ids.empty())
      throw InvalidParameterError("fold with zero test subjects");
    model::LongitudinalDataset train_data(std::move(train),
                                          data.response_dim(),
                                          data.covariate_dim());
    std::vector<PredictiveDraw> draws = fit(train_data);
    if (draws.empty()) throw InvalidParameterError("fit returned no draws");

    for (int id : test_ids) {
      const auto& s = data.subject(id);
      const Eigen::MatrixXd ones = Eigen::RowVectorXd::Ones(s.times());
      Eigen::VectorXd logp(draws.size());
      Eigen::MatrixXd pred_sum =
          Eigen::MatrixXd::Zero(data.response_dim(), s.times());
      for (std::size_t d = 0; d < draws.size(); ++d) {
        const auto& pd = draws[d];
        Eigen::MatrixXd mean = pd.alpha * ones + pd.beta * s.x;
        Eigen::MatrixXd r_mat =
            corr::matrix(corr::Spec{kind, pd.rho}, s.times());
        if (error_model == model::ErrorModel::T)
          logp(d) = matvar::mt_logpdf(s.y, {pd.nu, mean, pd.sigma_eps, r_mat});
        else
          logp(d) = matvar::mn_logpdf(s.y, {mean, pd.sigma_eps, r_mat});
        pred_sum += mean;
      }
      sum_logf += log_mean_exp(logp);
      Eigen::MatrixXd pred = pred_sum / static_cast<double>(draws.size());
      abs_err += (s.y - pred).cwiseAbs().sum();
      entries += s.y.size();
    }
  }
  return {sum_logf / n, abs_err / static_cast<double>(entries)};
}

}  // namespace rolem::inference
