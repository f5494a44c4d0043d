// Criteria 5-9, 11: desk-scale replication of the simulation studies,
// model selection, the error-law moment identity, the structured-prior
// effect, and byte-level reproducibility of the commands.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "criteria.hpp"
#include "rolem/commands.hpp"
#include "rolem/dataset_io.hpp"
#include "rolem/inference.hpp"
#include "rolem/sampler.hpp"
#include "rolem/simgen.hpp"

#include "../test_util.hpp"

namespace acceptance {

using namespace rolem;
namespace fs = std::filesystem;

namespace {

struct FitSummary {
  Eigen::MatrixXd beta_mean;
  std::vector<std::vector<double>> beta_draws;  // r*p series
  double bic = 0.0;
  double waic = 0.0;
};

FitSummary fit_model(const model::LongitudinalDataset& data, int u,
                     corr::Kind kind, model::ErrorModel error_model,
                     std::uint64_t seed, const Eigen::MatrixXd* m_prior,
                     int burn_in, int n_samples, int thin) {
  const int r = data.response_dim();
  const int p = data.covariate_dim();
  sampler::PriorSpec prior = sampler::PriorSpec::vague(r, p, u, 1e-6);
  prior.error_model = error_model;
  if (m_prior != nullptr) prior.m_prior = *m_prior;
  sampler::TuningSpec tuning;
  tuning.burn_in = burn_in;
  tuning.n_samples = n_samples;
  tuning.thin = thin;
  Rng rng(seed);
  sampler::ChainOutput out =
      sampler::run_chain(data, u, kind, prior, tuning, {}, rng);

  FitSummary summary;
  summary.beta_mean = Eigen::MatrixXd::Zero(r, p);
  summary.beta_draws.assign(r * p, {});
  std::vector<double> logliks;
  Eigen::MatrixXd pointwise(out.draws.size(), data.n());
  for (std::size_t s = 0; s < out.draws.size(); ++s) {
    const auto& d = out.draws[s];
    summary.beta_mean += d.beta;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < p; ++j)
        summary.beta_draws[i * p + j].push_back(d.beta(i, j));
    logliks.push_back(d.loglik);
    pointwise.row(s) = d.pointwise.transpose();
  }
  summary.beta_mean /= static_cast<double>(out.draws.size());
  const bool normal_mode = error_model == model::ErrorModel::Normal;
  summary.bic = inference::bic(
      logliks, inference::bic_parameter_count(r, p, u, normal_mode),
      data.n());
  summary.waic = inference::waic(pointwise).waic;
  return summary;
}

simgen::SimDesign desk_design() {
  simgen::SimDesign design;
  design.r = 5;
  design.p = 6;
  design.u = 3;
  design.n = 100;
  design.j = 5;
  design.rho_true = 0.5;
  design.corr_kind = corr::Kind::Ar1;
  design.error_kind = simgen::ErrorKind::T4;
  return design;
}

}  // namespace

std::vector<Result> criterion_replication() {
  const int replicates = 20;
  std::vector<double> d_rolem, d_lem;
  long covered = 0, entries = 0;
  for (int rep = 0; rep < replicates; ++rep) {
    Rng gen(derive_seed(51001, rep));
    auto [data, truth] = simgen::generate(desk_design(), gen);
    FitSummary rolem =
        fit_model(data, 3, corr::Kind::Ar1, model::ErrorModel::T,
                  derive_seed(52001, rep), nullptr, 1500, 3000, 3);
    FitSummary lem =
        fit_model(data, 3, corr::Kind::Ar1, model::ErrorModel::Normal,
                  derive_seed(53001, rep), nullptr, 1500, 3000, 3);
    d_rolem.push_back(inference::frobenius_error(rolem.beta_mean, truth.beta));
    d_lem.push_back(inference::frobenius_error(lem.beta_mean, truth.beta));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 6; ++j) {
        auto interval =
            inference::hpd_interval(rolem.beta_draws[i * 6 + j], 0.95);
        const double b = truth.beta(i, j);
        if (b >= interval.first && b <= interval.second) ++covered;
        ++entries;
      }
  }

  // One-sided paired t-test at the 5% level: RoLEM better than LEM.
  double mean_diff = 0.0;
  for (int i = 0; i < replicates; ++i) mean_diff += d_lem[i] - d_rolem[i];
  mean_diff /= replicates;
  double var_diff = 0.0;
  for (int i = 0; i < replicates; ++i) {
    const double d = d_lem[i] - d_rolem[i] - mean_diff;
    var_diff += d * d;
  }
  var_diff /= (replicates - 1);
  const double t_stat =
      mean_diff / std::sqrt(var_diff / replicates);
  const double t_crit_95_19 = 1.7291;  // one-sided, 19 dof

  double mean_rolem = 0.0, mean_lem = 0.0;
  for (int i = 0; i < replicates; ++i) {
    mean_rolem += d_rolem[i];
    mean_lem += d_lem[i];
  }
  mean_rolem /= replicates;
  mean_lem /= replicates;

  std::vector<Result> results;
  {
    std::ostringstream detail;
    detail.precision(4);
    detail << "mean D(beta) RoLEM " << mean_rolem << " vs LEM " << mean_lem
           << ", paired t " << t_stat << " (crit " << t_crit_95_19 << ")";
    results.push_back(
        {"5", mean_rolem <= mean_lem && t_stat > t_crit_95_19, detail.str()});
  }
  {
    const double rate = double(covered) / entries;
    std::ostringstream detail;
    detail.precision(4);
    detail << "pooled 95% HPD coverage for beta " << rate << " over "
           << entries << " entries (want [0.90, 0.99])";
    results.push_back({"6", rate >= 0.90 && rate <= 0.99, detail.str()});
  }
  return results;
}

Result criterion_model_selection() {
  const int replicates = 20;
  int bic_u = 0, waic_u = 0, bic_corr = 0, waic_corr = 0;
  for (int rep = 0; rep < replicates; ++rep) {
    Rng gen(derive_seed(61001, rep));
    auto [data, truth] = simgen::generate(desk_design(), gen);

    // Envelope dimension sweep under the true AR(1) structure.
    double best_bic = 1e300, best_waic = 1e300;
    int bic_pick = 0, waic_pick = 0;
    for (int u = 1; u <= 5 - 1; ++u) {
      FitSummary fit =
          fit_model(data, u, corr::Kind::Ar1, model::ErrorModel::T,
                    derive_seed(62001 + u, rep), nullptr, 1200, 2400, 3);
      if (fit.bic < best_bic) {
        best_bic = fit.bic;
        bic_pick = u;
      }
      if (fit.waic < best_waic) {
        best_waic = fit.waic;
        waic_pick = u;
      }
    }
    if (bic_pick == 3) ++bic_u;
    if (waic_pick == 3) ++waic_u;

    // Correlation sweep at the true dimension.
    best_bic = 1e300;
    best_waic = 1e300;
    corr::Kind bic_kind = corr::Kind::Uncorrelated;
    corr::Kind waic_kind = corr::Kind::Uncorrelated;
    int kind_index = 0;
    for (corr::Kind kind : {corr::Kind::Uncorrelated,
                            corr::Kind::CompoundSymmetry, corr::Kind::Ar1}) {
      FitSummary fit =
          fit_model(data, 3, kind, model::ErrorModel::T,
                    derive_seed(63001 + kind_index, rep), nullptr, 1200, 2400,
                    3);
      if (fit.bic < best_bic) {
        best_bic = fit.bic;
        bic_kind = kind;
      }
      if (fit.waic < best_waic) {
        best_waic = fit.waic;
        waic_kind = kind;
      }
      ++kind_index;
    }
    if (bic_kind == corr::Kind::Ar1) ++bic_corr;
    if (waic_kind == corr::Kind::Ar1) ++waic_corr;
  }

  std::ostringstream detail;
  detail << "u=3 picked by BIC " << bic_u << "/20, WAIC " << waic_u
         << "/20; AR(1) picked by BIC " << bic_corr << "/20, WAIC "
         << waic_corr << "/20 (want >= 16 each)";
  const bool pass =
      bic_u >= 16 && waic_u >= 16 && bic_corr >= 16 && waic_corr >= 16;
  return {"7", pass, detail.str()};
}

Result criterion_moment_identity() {
  const int n = 100000;
  double worst = 0.0;
  for (simgen::ErrorKind kind :
       {simgen::ErrorKind::T4, simgen::ErrorKind::NormalVar2,
        simgen::ErrorKind::Mixture}) {
    simgen::SimDesign design;
    design.r = 3;
    design.p = 2;
    design.u = 1;
    design.n = n;
    design.j = 2;
    design.error_kind = kind;
    Rng rng(1234);
    auto [data, truth] = simgen::generate(design, rng);
    Eigen::MatrixXd r_mat =
        corr::matrix({design.corr_kind, design.rho_true}, design.j);
    Eigen::MatrixXd target = 2.0 * testutil::kronecker(r_mat, truth.sigma_eps);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(6, 6);
    const Eigen::RowVectorXd ones = Eigen::RowVectorXd::Ones(design.j);
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXd eps = data.subject(i).y - truth.alpha * ones -
                            truth.beta * data.subject(i).x;
      Eigen::VectorXd v = testutil::vec(eps);
      sum += v * v.transpose();
    }
    Eigen::MatrixXd emp = sum / n;
    worst = std::max(worst, ((emp - target).cwiseAbs().maxCoeff()) /
                                target.cwiseAbs().maxCoeff());
  }
  std::ostringstream detail;
  detail.precision(4);
  detail << "worst relative entry deviation from 2 R (x) Sigma: " << worst
         << " (tolerance 0.05)";
  return {"8", worst < 0.05, detail.str()};
}

Result criterion_structured_prior() {
  const int replicates = 10;
  const int r = 8, p = 6, u = 3;
  std::vector<double> mean_err(4, 0.0);
  for (int rep = 0; rep < replicates; ++rep) {
    simgen::SimDesign design;
    design.r = r;
    design.p = p;
    design.u = u;
    design.n = 50;
    design.j = 5;
    design.fixed_a = simgen::structured_design_a(r);
    Rng gen(derive_seed(71001, rep));
    auto [data, truth] = simgen::generate(design, gen);
    for (int which = 1; which <= 4; ++which) {
      Eigen::MatrixXd m = simgen::structured_prior_matrix(r, 1e5, 1e-6, which);
      FitSummary fit =
          fit_model(data, u, corr::Kind::Ar1, model::ErrorModel::T,
                    derive_seed(72001 + which, rep), &m, 1500, 3000, 3);
      mean_err[which - 1] +=
          inference::frobenius_error(fit.beta_mean, truth.beta) / replicates;
    }
  }
  std::ostringstream detail;
  detail.precision(4);
  detail << "mean D(beta) across M1..M4: " << mean_err[0] << " "
         << mean_err[1] << " " << mean_err[2] << " " << mean_err[3];
  const bool pass = mean_err[0] >= mean_err[1] && mean_err[1] >= mean_err[2] &&
                    mean_err[2] >= mean_err[3];
  return {"9", pass, detail.str()};
}

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Result criterion_reproducibility() {
  fs::path dir = fs::temp_directory_path() / "rolem_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);

  cli::SimulateConfig sim;
  sim.r = 3;
  sim.p = 2;
  sim.u = 1;
  sim.n = 10;
  sim.j = 3;
  sim.seed = 99;
  sim.out_prefix = (dir / "simA").string();
  cli::cmd_simulate(sim);
  sim.out_prefix = (dir / "simB").string();
  cli::cmd_simulate(sim);

  cli::FitConfig fit;
  fit.data_path = (dir / "simA_data.csv").string();
  fit.u = 1;
  fit.burn_in = 100;
  fit.n_samples = 200;
  fit.thin = 2;
  fit.seed = 7;
  fit.out_dir = (dir / "fitA").string();
  cli::cmd_fit(fit);
  fit.out_dir = (dir / "fitB").string();
  cli::cmd_fit(fit);

  bool pass = slurp(dir / "simA_data.csv") == slurp(dir / "simB_data.csv") &&
              slurp(dir / "simA_truth.json") == slurp(dir / "simB_truth.json");
  for (const char* name : {"draws.csv", "pointwise.csv", "summary.csv",
                           "diagnostics.csv", "scores.csv"})
    pass = pass && slurp(dir / "fitA" / name) == slurp(dir / "fitB" / name);

  std::ostringstream detail;
  detail << "simulate and fit reruns byte-identical across all data files";
  return {"11", pass, detail.str()};
}

}  // namespace acceptance
