#ifndef ROLEM_SAMPLER_HPP
#define ROLEM_SAMPLER_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rolem/corrstruct.hpp"
#include "rolem/model.hpp"
#include "rolem/rng.hpp"

namespace rolem::sampler {

using model::ErrorModel;
using model::LongitudinalDataset;
using model::ParameterState;

// Hyperparameters of the prior families.  The intercept prior is flat
// (alpha_h = 0) by default; a positive alpha_h turns it into the conjugate
// N(alpha_mean, sigma_eps / alpha_h), which keeps the same Gibbs step and is
// what joint-distribution sampler tests need (a flat prior cannot be
// forward-simulated).
struct PriorSpec {
  Eigen::MatrixXd xi;       // r x p
  Eigen::MatrixXd h;        // p x p positive semidefinite, 0 allowed
  double k = 0.0;           // Omega dof
  Eigen::MatrixXd psi;      // u x u SPD
  double k0 = 0.0;          // Omega0 dof
  Eigen::MatrixXd psi0;     // (r-u) x (r-u) SPD
  Eigen::MatrixXd m_prior;  // r x r symmetric Langevin parameter
  double a = 1.4;           // nu ~ Gamma(a, b)
  double b = 0.04;
  ErrorModel error_model = ErrorModel::T;
  Eigen::VectorXd alpha_mean;  // r, used only when alpha_h > 0
  double alpha_h = 0.0;

  // Vague defaults: xi = 0, H = scale I, k = u + 1, psi = scale I,
  // k0 = r - u + 1, psi0 = scale I, M = scale I.
  static PriorSpec vague(int r, int p, int u, double scale = 1e-3);
};

struct TuningSpec {
  double delta_rho = 0.1;
  double delta_nu = 2.0;
  double sigma2_p = 0.1;
  int burn_in = 1000;
  int n_samples = 2000;
  int thin = 1;
  std::uint64_t seed = 1;
  // During burn-in, every 500 sweeps each step size is doubled/halved until
  // its window acceptance rate enters (0.2, 0.5); frozen before sampling.
  bool auto_tune = true;
};

struct AcceptCounter {
  long accepted = 0;
  long attempted = 0;

  double rate() const { return attempted > 0 ? double(accepted) / attempted : 0.0; }
};

// One retained draw: the flattened parameter point plus the marginal
// log-likelihood and the per-subject log densities WAIC needs.
struct Draw {
  Eigen::VectorXd alpha;
  Eigen::MatrixXd eta;
  Eigen::MatrixXd a_coord;
  Eigen::MatrixXd beta;
  Eigen::MatrixXd sigma_eps;
  Eigen::MatrixXd omega;
  Eigen::MatrixXd omega0;
  double rho = 0.0;
  double nu = 0.0;
  double loglik = 0.0;
  Eigen::VectorXd pointwise;
};

struct ChainOutput {
  std::vector<Draw> draws;
  AcceptCounter accept_nu;
  AcceptCounter accept_p;
  AcceptCounter accept_rho;
  Eigen::MatrixXd frame;
  TuningSpec tuning_final;  // step sizes after any burn-in auto-tune
  long frame_failures = 0;
};

// Raw least-squares estimates used to start a chain, plus the frame
// candidates derived from them.
struct InitEstimate {
  Eigen::VectorXd alpha0;
  Eigen::MatrixXd beta0;
  Eigen::MatrixXd sigma_eps0;
  double rho0 = 0.5;
  grassmann::Projection proj0;
  Eigen::MatrixXd frame_identity;
  Eigen::MatrixXd frame_qr;
  bool rank_deficient = false;
};

InitEstimate initialize(const LongitudinalDataset& data, int u,
                        corr::Kind kind);

// Builds the full starting state from the raw estimates under a frame.
ParameterState initial_state(const InitEstimate& init, int u, int n,
                             const Eigen::MatrixXd& frame);

// Metropolis-within-Gibbs sweep engine.  Owns a copy of the dataset and all
// rho-dependent caches; exposes each block update plus the conditional
// parameters / log targets that the oracle tests check against the joint.
class GibbsSampler {
 public:
  GibbsSampler(LongitudinalDataset data, int u, corr::Kind kind,
               PriorSpec prior, TuningSpec tuning,
               Eigen::MatrixXd frame, ParameterState state);

  void update_tau(Rng& rng);
  void update_alpha(Rng& rng);
  void update_eta(Rng& rng);
  void update_omega(Rng& rng);
  void update_omega0(Rng& rng);
  bool update_nu(Rng& rng);
  bool update_projection(Rng& rng);
  bool update_rho(Rng& rng);

  // Full sweep in the order tau, nu, Omega, Omega0, P, rho, alpha, eta;
  // normal mode pins tau at 1 and skips the nu step.
  void sweep(Rng& rng);

  const ParameterState& state() const { return state_; }
  const LongitudinalDataset& data() const { return data_; }
  const Eigen::MatrixXd& frame() const { return frame_; }
  corr::Kind corr_kind() const { return kind_; }

  void set_state(const ParameterState& state);
  void set_responses(const std::vector<Eigen::MatrixXd>& ys);

  TuningSpec& tuning() { return tuning_; }
  const TuningSpec& tuning() const { return tuning_; }

  AcceptCounter& counter_nu() { return accept_nu_; }
  AcceptCounter& counter_p() { return accept_p_; }
  AcceptCounter& counter_rho() { return accept_rho_; }
  long frame_failures() const { return frame_failures_; }
  void reset_counters();

  double delta_for_subject(int i) const;

  // Conditional parameters, exposed for grid-oracle tests.
  std::pair<double, double> tau_conditional(int i) const;  // shape, rate
  struct AlphaConditional {
    Eigen::VectorXd mean;
    double precision_scale;  // alpha ~ N(mean, sigma_eps / precision_scale)
  };
  AlphaConditional alpha_conditional() const;
  struct EtaConditional {
    Eigen::MatrixXd mean;     // u x p
    Eigen::MatrixXd h_tilde;  // p x p column precision
  };
  EtaConditional eta_conditional() const;
  struct IwConditional {
    double dof;
    Eigen::MatrixXd scale;
  };
  IwConditional omega_conditional() const;
  IwConditional omega0_conditional() const;

  // Unnormalized conditional log targets of the MH blocks.
  double log_target_rho(double rho) const;
  double log_target_nu(double nu) const;
  double log_target_projection(const grassmann::Projection& p) const;

  Draw snapshot_draw() const;

 private:
  struct SubjectCache {
    Eigen::MatrixXd r_inv;        // J x J
    double r_logdet = 0.0;
    Eigen::MatrixXd x_rinv_xt;    // p x p
    Eigen::VectorXd x_rinv_one;   // p
    double one_rinv_one = 0.0;
  };

  void rebuild_corr_cache(double rho);
  void refresh_assembly();
  void refresh_basis();
  // Sum of tau_i * Delta_i under an arbitrary basis and the given
  // correlation inverses; shared by the P and rho targets.
  double weighted_delta_sum(const grassmann::EnvelopeBasis& basis,
                            const std::vector<SubjectCache>& cache) const;
  double projection_target(const grassmann::EnvelopeBasis& basis,
                           const Eigen::MatrixXd& p_matrix) const;
  std::vector<SubjectCache> build_cache(double rho) const;
  [[noreturn]] void abort_nonfinite(const char* where, double value) const;

  LongitudinalDataset data_;
  int u_;
  corr::Kind kind_;
  PriorSpec prior_;
  TuningSpec tuning_;
  Eigen::MatrixXd frame_;
  ParameterState state_;
  model::EnvelopeAssembly assembly_;
  std::vector<SubjectCache> cache_;
  Eigen::MatrixXd xi_h_;  // xi * H, fixed
  bool h_is_zero_ = true;
  AcceptCounter accept_nu_;
  AcceptCounter accept_p_;
  AcceptCounter accept_rho_;
  long frame_failures_ = 0;
};

// Runs burn-in (with optional auto-tuning) followed by thinned sampling.
// An empty (0 x 0) frame selects the QR-of-beta0 default.
ChainOutput run_chain(const LongitudinalDataset& data, int u, corr::Kind kind,
                      const PriorSpec& prior, const TuningSpec& tuning,
                      const Eigen::MatrixXd& frame, Rng& rng);

}  // namespace rolem::sampler

#endif  // ROLEM_SAMPLER_HPP
