// Criteria 2, 3, 4, 10: conditional-posterior grid oracles, proposal
// symmetry, density oracles, and the BIC parameter count.

#include <cmath>
#include <sstream>
#include <vector>

#include "criteria.hpp"
#include "rolem/inference.hpp"
#include "rolem/matvar.hpp"
#include "rolem/sampler.hpp"

#include "../joint_oracle.hpp"
#include "../test_util.hpp"

namespace acceptance {

using namespace rolem;
using model::LongitudinalDataset;
using model::ParameterState;
using model::Subject;

namespace {

LongitudinalDataset make_subjects(int r, int p, const std::vector<int>& times,
                                  Rng& rng) {
  std::vector<Subject> subjects;
  for (int j : times)
    subjects.push_back({rng.normal_matrix(r, j), rng.normal_matrix(p, j)});
  return LongitudinalDataset(std::move(subjects), r, p);
}

ParameterState random_state(int r, int p, int u, int n,
                            const Eigen::MatrixXd& frame, Rng& rng) {
  ParameterState state;
  state.projection = grassmann::sample_uniform_projection(r, u, rng);
  state.basis = grassmann::basis_from_projection(state.projection, frame);
  state.alpha = rng.normal_vector(r);
  state.eta = rng.normal_matrix(u, p);
  state.omega = testutil::random_spd(u, rng);
  state.omega0 = testutil::random_spd(r - u, rng);
  state.rho = 0.45;
  state.nu = 5.5;
  state.tau.resize(n);
  for (int i = 0; i < n; ++i) state.tau(i) = 0.3 + 1.5 * rng.uniform();
  return state;
}

double max_const_deviation(const std::vector<double>& diffs) {
  double dev = 0.0;
  for (double d : diffs) dev = std::max(dev, std::abs(d - diffs.front()));
  return dev;
}

}  // namespace

Result criterion_conditional_oracles() {
  double worst = 0.0;
  for (int variant = 0; variant < 2; ++variant) {
    Rng rng(300 + variant);
    const int r = 3, p = 2, u = 1;
    LongitudinalDataset data = make_subjects(r, p, {2, 3, 1, 2}, rng);
    Eigen::MatrixXd frame = testutil::random_orthogonal(r, rng);
    sampler::PriorSpec prior;
    prior.xi = 0.4 * rng.normal_matrix(r, p);
    prior.h = variant == 0
                  ? Eigen::MatrixXd(0.7 * Eigen::MatrixXd::Identity(p, p))
                  : Eigen::MatrixXd::Zero(p, p);
    prior.k = u + 2.0;
    prior.psi = 0.5 * Eigen::MatrixXd::Identity(u, u);
    prior.k0 = (r - u) + 2.0;
    prior.psi0 = 0.4 * Eigen::MatrixXd::Identity(r - u, r - u);
    Eigen::MatrixXd g = 0.3 * rng.normal_matrix(r, r);
    prior.m_prior = 0.5 * (g + g.transpose());
    prior.a = 2.0;
    prior.b = 0.3;
    if (variant == 1) {
      prior.alpha_h = 1.2;
      prior.alpha_mean = 0.3 * rng.normal_vector(r);
    } else {
      prior.alpha_mean = Eigen::VectorXd::Zero(r);
    }
    const corr::Kind kind =
        variant == 0 ? corr::Kind::CompoundSymmetry : corr::Kind::Ar1;
    ParameterState base = random_state(r, p, u, data.n(), frame, rng);
    sampler::GibbsSampler sampler(data, u, kind, prior, sampler::TuningSpec{},
                                  frame, base);
    auto joint = [&](const ParameterState& s) {
      return joint_oracle::log_joint(data, s, prior, kind);
    };

    {
      auto [shape, rate] = sampler.tau_conditional(1);
      std::vector<double> diffs;
      for (double t = 0.3; t <= 3.0; t += 0.3) {
        ParameterState s = base;
        s.tau(1) = t;
        diffs.push_back((shape - 1.0) * std::log(t) - rate * t - joint(s));
      }
      worst = std::max(worst, max_const_deviation(diffs));
    }
    {
      auto cond = sampler.alpha_conditional();
      Eigen::MatrixXd sigma_inv = model::assemble(base).sigma_eps.inverse();
      std::vector<double> diffs;
      for (double step = -2.0; step <= 2.0; step += 0.4) {
        ParameterState s = base;
        s.alpha(0) += step;
        s.alpha(2) -= 0.5 * step;
        Eigen::VectorXd d = s.alpha - cond.mean;
        diffs.push_back(-0.5 * cond.precision_scale * d.dot(sigma_inv * d) -
                        joint(s));
      }
      worst = std::max(worst, max_const_deviation(diffs));
    }
    {
      auto cond = sampler.eta_conditional();
      Eigen::MatrixXd omega_inv = base.omega.inverse();
      std::vector<double> diffs;
      for (double step = -1.5; step <= 1.5; step += 0.3) {
        ParameterState s = base;
        s.eta(0, 0) += step;
        s.eta(0, 1) -= 0.7 * step;
        Eigen::MatrixXd d = s.eta - cond.mean;
        diffs.push_back(
            -0.5 * (omega_inv * d * cond.h_tilde * d.transpose()).trace() -
            joint(s));
      }
      worst = std::max(worst, max_const_deviation(diffs));
    }
    {
      auto cond = sampler.omega_conditional();
      std::vector<double> diffs;
      for (double w = 0.4; w <= 4.0; w += 0.4) {
        ParameterState s = base;
        s.omega(0, 0) = w;
        diffs.push_back(-0.5 * (cond.dof + 1 + 1) * std::log(w) -
                        0.5 * cond.scale(0, 0) / w - joint(s));
      }
      worst = std::max(worst, max_const_deviation(diffs));
    }
    {
      auto cond = sampler.omega0_conditional();
      std::vector<double> diffs;
      for (double step = 0.0; step <= 1.6; step += 0.2) {
        ParameterState s = base;
        s.omega0(0, 0) += step;
        s.omega0(0, 1) += 0.1 * step;
        s.omega0(1, 0) += 0.1 * step;
        diffs.push_back(
            -0.5 * (cond.dof + 2 + 1) * joint_oracle::logdet_dense(s.omega0) -
            0.5 * (cond.scale * s.omega0.inverse()).trace() - joint(s));
      }
      worst = std::max(worst, max_const_deviation(diffs));
    }
    {
      std::vector<double> diffs;
      for (double rho = 0.05; rho < 1.0; rho += 0.09) {
        ParameterState s = base;
        s.rho = rho;
        diffs.push_back(sampler.log_target_rho(rho) - joint(s));
      }
      worst = std::max(worst, max_const_deviation(diffs));
    }
    {
      std::vector<double> diffs;
      for (double nu = 2.3; nu < 30.0; nu += 2.7) {
        ParameterState s = base;
        s.nu = nu;
        diffs.push_back(sampler.log_target_nu(nu) - joint(s));
      }
      worst = std::max(worst, max_const_deviation(diffs));
    }
    {
      Rng prng(7 + variant);
      std::vector<double> diffs;
      for (int t = 0; t < 12; ++t) {
        grassmann::Projection p_draw =
            grassmann::sample_uniform_projection(r, u, prng);
        ParameterState s = base;
        s.projection = p_draw;
        s.basis = grassmann::basis_from_projection(p_draw, frame);
        diffs.push_back(sampler.log_target_projection(p_draw) - joint(s));
      }
      worst = std::max(worst, max_const_deviation(diffs));
    }
  }
  std::ostringstream detail;
  detail << "max |dlog| deviation " << worst << " (tolerance 1e-8)";
  return {"2", worst < 1e-8, detail.str()};
}

Result criterion_proposal_symmetry() {
  Rng rng(404);
  double worst = 0.0;
  for (double sigma2 : {0.01, 1.0, 100.0}) {
    for (int trial = 0; trial < 200; ++trial) {
      const int r = 2 + int(rng.uniform_index(5));
      const int u = 1 + int(rng.uniform_index(r - 1));
      auto p1 = grassmann::sample_uniform_projection(r, u, rng);
      auto p2 = grassmann::sample_uniform_projection(r, u, rng);
      Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(r, r);
      const double f12 =
          grassmann::induced_logdensity(p1, sigma2 * eye + p2.matrix);
      const double f21 =
          grassmann::induced_logdensity(p2, sigma2 * eye + p1.matrix);
      worst = std::max(worst, std::abs(f12 - f21));
    }
  }
  std::ostringstream detail;
  detail << "600 pairs, max asymmetry " << worst << " (tolerance 1e-9)";
  return {"3", worst < 1e-9, detail.str()};
}

Result criterion_density_oracles() {
  Rng rng(505);
  double worst_mn = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int a = 1 + int(rng.uniform_index(4));
    const int b = 1 + int(rng.uniform_index(4));
    matvar::MatNormalParams params{rng.normal_matrix(a, b),
                                   testutil::random_spd(a, rng),
                                   testutil::random_spd(b, rng)};
    Eigen::MatrixXd y = 2.0 * rng.normal_matrix(a, b);
    const double expected = testutil::mvn_logpdf_dense(
        testutil::vec(y), testutil::vec(params.mean),
        testutil::kronecker(params.col_cov, params.row_cov));
    worst_mn =
        std::max(worst_mn, std::abs(matvar::mn_logpdf(y, params) - expected));
  }

  double worst_mt = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int a = 1 + int(rng.uniform_index(3));
    const int b = 1 + int(rng.uniform_index(3));
    matvar::MatNormalParams base{rng.normal_matrix(a, b),
                                 testutil::random_spd(a, rng),
                                 testutil::random_spd(b, rng)};
    const double nu = 0.5 + 8.0 * rng.uniform();
    Eigen::MatrixXd y = 1.5 * rng.normal_matrix(a, b);
    const Eigen::MatrixXd kron =
        testutil::kronecker(base.col_cov, base.row_cov);
    const Eigen::VectorXd vy = testutil::vec(y);
    const Eigen::VectorXd vm = testutil::vec(base.mean);
    auto log_integrand = [&](double tau) {
      const double lgam = 0.5 * nu * std::log(0.5 * nu) -
                          std::lgamma(0.5 * nu) +
                          (0.5 * nu - 1.0) * std::log(tau) - 0.5 * nu * tau;
      return testutil::mvn_logpdf_dense(vy, vm, kron / tau) + lgam;
    };
    const double expected = testutil::log_integral_positive(log_integrand);
    const double got =
        matvar::mt_logpdf(y, {nu, base.mean, base.row_cov, base.col_cov});
    worst_mt = std::max(worst_mt, std::abs(got - expected));
  }

  std::ostringstream detail;
  detail << "mn vs Kronecker oracle max " << worst_mn
         << " (tol 1e-9); mt vs quadrature max " << worst_mt
         << " (tol 1e-6)";
  return {"4", worst_mn < 1e-9 && worst_mt < 1e-6, detail.str()};
}

Result criterion_bic_bookkeeping() {
  const int big = inference::bic_parameter_count(20, 30, 3, false);
  const int oai = inference::bic_parameter_count(6, 6, 2, false);
  std::ostringstream detail;
  detail << "p_BIC(20,30,3) = " << big << " (want 322), p_BIC(6,6,2) = "
         << oai << " (want 41)";
  return {"10", big == 322 && oai == 41, detail.str()};
}

}  // namespace acceptance
