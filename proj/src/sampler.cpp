#include "rolem/sampler.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "rolem/matvar.hpp"

namespace rolem::sampler {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

PriorSpec PriorSpec::vague(int r, int p, int u, double scale) {
  PriorSpec prior;
  prior.xi = Eigen::MatrixXd::Zero(r, p);
  prior.h = scale * Eigen::MatrixXd::Identity(p, p);
  prior.k = u + 1;
  prior.psi = scale * Eigen::MatrixXd::Identity(u, u);
  prior.k0 = r - u + 1;
  prior.psi0 = scale * Eigen::MatrixXd::Identity(r - u, r - u);
  prior.m_prior = scale * Eigen::MatrixXd::Identity(r, r);
  prior.a = 1.4;
  prior.b = 0.04;
  return prior;
}

GibbsSampler::GibbsSampler(LongitudinalDataset data, int u, corr::Kind kind,
                           PriorSpec prior, TuningSpec tuning,
                           Eigen::MatrixXd frame, ParameterState state)
    : data_(std::move(data)),
      u_(u),
      kind_(kind),
      prior_(std::move(prior)),
      tuning_(tuning),
      frame_(std::move(frame)),
      state_(std::move(state)) {
  const int r = data_.response_dim();
  const int p = data_.covariate_dim();
  if (u_ < 1 || u_ > r)
    throw InvalidParameterError("envelope dimension out of range");
  if (prior_.xi.rows() != r || prior_.xi.cols() != p)
    throw InvalidParameterError("xi must be r x p");
  if (prior_.h.rows() != p || prior_.h.cols() != p)
    throw InvalidParameterError("H must be p x p");
  if (prior_.psi.rows() != u_ || prior_.psi0.rows() != r - u_)
    throw InvalidParameterError("Psi/Psi0 dimensions must match u and r - u");
  if (!(prior_.k > 0.0) || !(prior_.k0 > 0.0) || !(prior_.a > 0.0) ||
      !(prior_.b > 0.0))
    throw InvalidParameterError("k, k0, a, b must be positive");
  if (prior_.m_prior.rows() != r ||
      (prior_.m_prior - prior_.m_prior.transpose()).cwiseAbs().maxCoeff() >
          1e-8 * (1.0 + prior_.m_prior.cwiseAbs().maxCoeff()))
    throw InvalidParameterError("Langevin M must be symmetric r x r");
  if (state_.tau.size() != data_.n())
    throw InvalidParameterError("tau length must equal subject count");

  h_is_zero_ = prior_.h.size() == 0 || prior_.h.cwiseAbs().maxCoeff() == 0.0;
  xi_h_ = h_is_zero_ ? Eigen::MatrixXd::Zero(r, p)
                     : Eigen::MatrixXd(prior_.xi * prior_.h);
  refresh_basis();
  refresh_assembly();
  rebuild_corr_cache(state_.rho);
}

void GibbsSampler::refresh_basis() {
  state_.basis = grassmann::basis_from_projection(state_.projection, frame_);
}

void GibbsSampler::refresh_assembly() { assembly_ = model::assemble(state_); }

std::vector<GibbsSampler::SubjectCache> GibbsSampler::build_cache(
    double rho) const {
  const corr::Spec spec{kind_, rho};
  std::vector<SubjectCache> cache(data_.n());
  for (int i = 0; i < data_.n(); ++i) {
    const auto& s = data_.subject(i);
    auto inv = corr::inverse_logdet(spec, s.times());
    SubjectCache c;
    c.r_inv = std::move(inv.inverse);
    c.r_logdet = inv.log_det;
    c.x_rinv_xt = s.x * c.r_inv * s.x.transpose();
    c.x_rinv_one = s.x * c.r_inv.rowwise().sum();
    c.one_rinv_one = c.r_inv.sum();
    cache[i] = std::move(c);
  }
  return cache;
}

void GibbsSampler::rebuild_corr_cache(double rho) { cache_ = build_cache(rho); }

void GibbsSampler::set_state(const ParameterState& state) {
  if (state.tau.size() != data_.n())
    throw InvalidParameterError("tau length must equal subject count");
  state_ = state;
  refresh_basis();
  refresh_assembly();
  rebuild_corr_cache(state_.rho);
}

void GibbsSampler::set_responses(const std::vector<Eigen::MatrixXd>& ys) {
  data_.set_responses(ys);
}

void GibbsSampler::reset_counters() {
  accept_nu_ = {};
  accept_p_ = {};
  accept_rho_ = {};
  frame_failures_ = 0;
}

void GibbsSampler::abort_nonfinite(const char* where, double value) const {
  std::ostringstream oss;
  oss << "non-finite log posterior in " << where << " (value " << value
      << "); state: rho=" << state_.rho << " nu=" << state_.nu;
  if (state_.tau.size() > 0)
    oss << " tau in [" << state_.tau.minCoeff() << ", "
        << state_.tau.maxCoeff() << "]";
  throw NumericalError(oss.str());
}

double GibbsSampler::weighted_delta_sum(
    const grassmann::EnvelopeBasis& basis,
    const std::vector<SubjectCache>& cache) const {
  auto omega_llt = matvar::spd_cholesky(state_.omega, "omega");
  auto omega0_llt = matvar::spd_cholesky(state_.omega0, "omega0");
  const Eigen::VectorXd ga = basis.gamma.transpose() * state_.alpha;
  const Eigen::VectorXd g0a = basis.gamma0.transpose() * state_.alpha;
  double total = 0.0;
  for (int i = 0; i < data_.n(); ++i) {
    const auto& s = data_.subject(i);
    const int j = s.times();
    Eigen::MatrixXd d = basis.gamma.transpose() * s.y -
                        ga * Eigen::RowVectorXd::Ones(j) - state_.eta * s.x;
    Eigen::MatrixXd f = omega_llt.matrixL().solve(d);
    double delta = (f.cwiseProduct(f * cache[i].r_inv)).sum();
    Eigen::MatrixXd d0 = basis.gamma0.transpose() * s.y -
                         g0a * Eigen::RowVectorXd::Ones(j);
    Eigen::MatrixXd f0 = omega0_llt.matrixL().solve(d0);
    delta += (f0.cwiseProduct(f0 * cache[i].r_inv)).sum();
    total += state_.tau(i) * delta;
  }
  return total;
}

double GibbsSampler::delta_for_subject(int i) const {
  auto omega_llt = matvar::spd_cholesky(state_.omega, "omega");
  auto omega0_llt = matvar::spd_cholesky(state_.omega0, "omega0");
  const auto& s = data_.subject(i);
  const int j = s.times();
  Eigen::MatrixXd d =
      state_.basis.gamma.transpose() * s.y -
      (state_.basis.gamma.transpose() * state_.alpha) *
          Eigen::RowVectorXd::Ones(j) -
      state_.eta * s.x;
  Eigen::MatrixXd f = omega_llt.matrixL().solve(d);
  double delta = (f.cwiseProduct(f * cache_[i].r_inv)).sum();
  Eigen::MatrixXd d0 = state_.basis.gamma0.transpose() * s.y -
                       (state_.basis.gamma0.transpose() * state_.alpha) *
                           Eigen::RowVectorXd::Ones(j);
  Eigen::MatrixXd f0 = omega0_llt.matrixL().solve(d0);
  delta += (f0.cwiseProduct(f0 * cache_[i].r_inv)).sum();
  return delta;
}

std::pair<double, double> GibbsSampler::tau_conditional(int i) const {
  const double shape =
      0.5 * (state_.nu + data_.subject(i).times() * data_.response_dim());
  const double rate = 0.5 * (state_.nu + delta_for_subject(i));
  return {shape, rate};
}

void GibbsSampler::update_tau(Rng& rng) {
  if (prior_.error_model == ErrorModel::Normal) return;
  for (int i = 0; i < data_.n(); ++i) {
    auto [shape, rate] = tau_conditional(i);
    if (!std::isfinite(rate)) abort_nonfinite("tau update", rate);
    state_.tau(i) = rng.gamma(shape, rate);
  }
}

GibbsSampler::AlphaConditional GibbsSampler::alpha_conditional() const {
  double s = prior_.alpha_h;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(data_.response_dim());
  if (prior_.alpha_h > 0.0) m = prior_.alpha_h * prior_.alpha_mean;
  for (int i = 0; i < data_.n(); ++i) {
    const auto& sub = data_.subject(i);
    s += state_.tau(i) * cache_[i].one_rinv_one;
    Eigen::VectorXd rinv_one = cache_[i].r_inv.rowwise().sum();
    m += state_.tau(i) * ((sub.y - assembly_.beta * sub.x) * rinv_one);
  }
  if (!(s > 0.0))
    throw NumericalError("degenerate precision in alpha conditional");
  return {m / s, s};
}

void GibbsSampler::update_alpha(Rng& rng) {
  auto cond = alpha_conditional();
  auto llt = matvar::spd_cholesky(assembly_.sigma_eps, "sigma_eps");
  state_.alpha = cond.mean + Eigen::MatrixXd(llt.matrixL()) *
                                 rng.normal_vector(data_.response_dim()) /
                                 std::sqrt(cond.precision_scale);
}

GibbsSampler::EtaConditional GibbsSampler::eta_conditional() const {
  const int p = data_.covariate_dim();
  Eigen::MatrixXd h_tilde = h_is_zero_ ? Eigen::MatrixXd::Zero(p, p) : prior_.h;
  Eigen::MatrixXd s = state_.basis.gamma.transpose() * xi_h_;
  for (int i = 0; i < data_.n(); ++i) {
    const auto& sub = data_.subject(i);
    h_tilde += state_.tau(i) * cache_[i].x_rinv_xt;
    Eigen::MatrixXd centered =
        state_.basis.gamma.transpose() * sub.y -
        (state_.basis.gamma.transpose() * state_.alpha) *
            Eigen::RowVectorXd::Ones(sub.times());
    s += state_.tau(i) * (centered * cache_[i].r_inv * sub.x.transpose());
  }
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(h_tilde));
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "H + sum tau_i X_i R_i^{-1} X_i' is rank deficient in eta update");
  Eigen::MatrixXd mean = llt.solve(s.transpose()).transpose();
  return {mean, symmetrize(h_tilde)};
}

void GibbsSampler::update_eta(Rng& rng) {
  auto cond = eta_conditional();
  auto h_llt = matvar::spd_cholesky(cond.h_tilde, "h_tilde");
  auto omega_llt = matvar::spd_cholesky(state_.omega, "omega");
  Eigen::MatrixXd z =
      rng.normal_matrix(u_, data_.covariate_dim());
  Eigen::MatrixXd v = Eigen::MatrixXd(omega_llt.matrixL()) * z;
  // eta = mean + L_omega Z L_H^{-1}; right-solve via the upper factor.
  state_.eta =
      cond.mean +
      h_llt.matrixL().transpose().solve(v.transpose()).transpose();
  refresh_assembly();
}

GibbsSampler::IwConditional GibbsSampler::omega_conditional() const {
  Eigen::MatrixXd scale = prior_.psi;
  if (!h_is_zero_) {
    Eigen::MatrixXd d =
        state_.eta - state_.basis.gamma.transpose() * prior_.xi;
    scale += d * prior_.h * d.transpose();
  }
  double dof = prior_.k + data_.covariate_dim() + data_.total_times();
  if (prior_.alpha_h > 0.0) {
    // The conjugate intercept prior N(alpha_mean, sigma_eps / alpha_h)
    // contributes one pseudo-observation to each covariance block.
    Eigen::VectorXd d =
        state_.basis.gamma.transpose() * (state_.alpha - prior_.alpha_mean);
    scale += prior_.alpha_h * d * d.transpose();
    dof += 1.0;
  }
  const Eigen::VectorXd ga = state_.basis.gamma.transpose() * state_.alpha;
  for (int i = 0; i < data_.n(); ++i) {
    const auto& sub = data_.subject(i);
    Eigen::MatrixXd d = state_.basis.gamma.transpose() * sub.y -
                        ga * Eigen::RowVectorXd::Ones(sub.times()) -
                        state_.eta * sub.x;
    scale += state_.tau(i) * (d * cache_[i].r_inv * d.transpose());
  }
  return {dof, symmetrize(scale)};
}

GibbsSampler::IwConditional GibbsSampler::omega0_conditional() const {
  Eigen::MatrixXd scale = prior_.psi0;
  double dof = prior_.k0 + data_.total_times();
  if (prior_.alpha_h > 0.0) {
    Eigen::VectorXd d =
        state_.basis.gamma0.transpose() * (state_.alpha - prior_.alpha_mean);
    scale += prior_.alpha_h * d * d.transpose();
    dof += 1.0;
  }
  const Eigen::VectorXd g0a = state_.basis.gamma0.transpose() * state_.alpha;
  for (int i = 0; i < data_.n(); ++i) {
    const auto& sub = data_.subject(i);
    Eigen::MatrixXd d = state_.basis.gamma0.transpose() * sub.y -
                        g0a * Eigen::RowVectorXd::Ones(sub.times());
    scale += state_.tau(i) * (d * cache_[i].r_inv * d.transpose());
  }
  return {dof, symmetrize(scale)};
}

namespace {

Eigen::MatrixXd sample_iw_with_retry(double dof, Eigen::MatrixXd scale,
                                     Rng& rng, const char* what) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      return matvar::invwishart_sample({dof, scale}, rng);
    } catch (const InvalidParameterError&) {
      scale = 0.5 * (scale + scale.transpose());
    }
  }
  throw NumericalError(std::string("accumulated scale matrix for ") + what +
                       " is not positive definite");
}

}  // namespace

void GibbsSampler::update_omega(Rng& rng) {
  auto cond = omega_conditional();
  state_.omega = sample_iw_with_retry(cond.dof, cond.scale, rng, "omega");
  refresh_assembly();
}

void GibbsSampler::update_omega0(Rng& rng) {
  auto cond = omega0_conditional();
  state_.omega0 = sample_iw_with_retry(cond.dof, cond.scale, rng, "omega0");
  refresh_assembly();
}

double GibbsSampler::log_target_nu(double nu) const {
  if (!(nu > 2.0)) return kNegInf;
  const double n = data_.n();
  const double half = 0.5 * nu;
  const double sum_log_tau = state_.tau.array().log().sum();
  const double sum_tau = state_.tau.sum();
  return n * half * std::log(half) - n * std::lgamma(half) +
         (half - 1.0) * sum_log_tau - half * sum_tau +
         (prior_.a - 1.0) * std::log(nu) - prior_.b * nu;
}

bool GibbsSampler::update_nu(Rng& rng) {
  if (prior_.error_model == ErrorModel::Normal) return false;
  ++accept_nu_.attempted;
  double prop = rng.uniform(state_.nu - tuning_.delta_nu,
                            state_.nu + tuning_.delta_nu);
  if (prop < 2.0) prop = 4.0 - prop;
  if (prop <= 2.0) return false;
  const double lt_cur = log_target_nu(state_.nu);
  const double lt_prop = log_target_nu(prop);
  if (!std::isfinite(lt_cur)) abort_nonfinite("nu target (current)", lt_cur);
  if (std::isnan(lt_prop)) abort_nonfinite("nu target (proposal)", lt_prop);
  if (std::log(rng.uniform()) < lt_prop - lt_cur) {
    state_.nu = prop;
    ++accept_nu_.accepted;
    return true;
  }
  return false;
}

double GibbsSampler::log_target_rho(double rho) const {
  if (kind_ != corr::Kind::Uncorrelated && !(rho > 0.0 && rho < 1.0))
    return kNegInf;
  auto cache = build_cache(rho);
  double logdet_sum = 0.0;
  for (const auto& c : cache) logdet_sum += c.r_logdet;
  return -0.5 * data_.response_dim() * logdet_sum -
         0.5 * weighted_delta_sum(state_.basis, cache);
}

bool GibbsSampler::update_rho(Rng& rng) {
  if (kind_ == corr::Kind::Uncorrelated) return false;
  ++accept_rho_.attempted;
  double prop = rng.uniform(state_.rho - tuning_.delta_rho,
                            state_.rho + tuning_.delta_rho);
  for (int guard = 0; (prop < 0.0 || prop > 1.0) && guard < 64; ++guard) {
    if (prop < 0.0) prop = -prop;
    if (prop > 1.0) prop = 2.0 - prop;
  }
  if (!(prop > 0.0 && prop < 1.0)) return false;
  const double lt_cur = log_target_rho(state_.rho);
  const double lt_prop = log_target_rho(prop);
  if (!std::isfinite(lt_cur)) abort_nonfinite("rho target (current)", lt_cur);
  if (std::isnan(lt_prop)) abort_nonfinite("rho target (proposal)", lt_prop);
  if (std::log(rng.uniform()) < lt_prop - lt_cur) {
    state_.rho = prop;
    rebuild_corr_cache(prop);
    ++accept_rho_.accepted;
    return true;
  }
  return false;
}

namespace {

double eta_prior_quadratic(const Eigen::MatrixXd& eta,
                           const grassmann::EnvelopeBasis& basis,
                           const Eigen::MatrixXd& xi, const Eigen::MatrixXd& h,
                           const Eigen::LLT<Eigen::MatrixXd>& omega_llt) {
  Eigen::MatrixXd d = eta - basis.gamma.transpose() * xi;
  Eigen::MatrixXd f = omega_llt.matrixL().solve(d);
  return (f.cwiseProduct(f * h)).sum();
}

}  // namespace

double GibbsSampler::projection_target(const grassmann::EnvelopeBasis& basis,
                                       const Eigen::MatrixXd& p_matrix) const {
  double target = -0.5 * weighted_delta_sum(basis, cache_) +
                  (prior_.m_prior * p_matrix).trace();
  if (!h_is_zero_) {
    auto omega_llt = matvar::spd_cholesky(state_.omega, "omega");
    target -= 0.5 * eta_prior_quadratic(state_.eta, basis, prior_.xi,
                                        prior_.h, omega_llt);
  }
  if (prior_.alpha_h > 0.0) {
    // Quadratic of the conjugate intercept prior; its sigma_eps^{-1}
    // depends on the basis.
    const Eigen::VectorXd d = state_.alpha - prior_.alpha_mean;
    auto omega_llt = matvar::spd_cholesky(state_.omega, "omega");
    auto omega0_llt = matvar::spd_cholesky(state_.omega0, "omega0");
    const Eigen::VectorXd f =
        omega_llt.matrixL().solve(basis.gamma.transpose() * d);
    const Eigen::VectorXd f0 =
        omega0_llt.matrixL().solve(basis.gamma0.transpose() * d);
    target -= 0.5 * prior_.alpha_h * (f.squaredNorm() + f0.squaredNorm());
  }
  return target;
}

double GibbsSampler::log_target_projection(
    const grassmann::Projection& p) const {
  return projection_target(grassmann::basis_from_projection(p, frame_),
                           p.matrix);
}

bool GibbsSampler::update_projection(Rng& rng) {
  ++accept_p_.attempted;
  grassmann::Projection prop =
      grassmann::propose_projection(state_.projection, tuning_.sigma2_p, rng);
  grassmann::EnvelopeBasis prop_basis;
  try {
    prop_basis = grassmann::basis_from_projection(prop, frame_);
  } catch (const FrameError&) {
    // Counted as a rejection; the attempt stays in the denominator.
    ++frame_failures_;
    return false;
  }

  const double lt_cur =
      projection_target(state_.basis, state_.projection.matrix);
  const double lt_prop = projection_target(prop_basis, prop.matrix);
  if (!std::isfinite(lt_cur)) abort_nonfinite("P target (current)", lt_cur);
  if (std::isnan(lt_prop)) abort_nonfinite("P target (proposal)", lt_prop);

  if (std::log(rng.uniform()) < lt_prop - lt_cur) {
    state_.projection = std::move(prop);
    state_.basis = std::move(prop_basis);
    refresh_assembly();
    ++accept_p_.accepted;
    return true;
  }
  return false;
}

void GibbsSampler::sweep(Rng& rng) {
  update_tau(rng);
  update_nu(rng);
  update_omega(rng);
  update_omega0(rng);
  update_projection(rng);
  update_rho(rng);
  update_alpha(rng);
  update_eta(rng);
}

Draw GibbsSampler::snapshot_draw() const {
  Draw d;
  d.alpha = state_.alpha;
  d.eta = state_.eta;
  d.a_coord = state_.basis.a_coord;
  d.beta = assembly_.beta;
  d.sigma_eps = assembly_.sigma_eps;
  d.omega = state_.omega;
  d.omega0 = state_.omega0;
  d.rho = state_.rho;
  d.nu = state_.nu;
  d.pointwise = model::pointwise_marginal(
      data_, d.alpha, d.beta, d.sigma_eps, d.rho, d.nu, kind_,
      prior_.error_model);
  d.loglik = d.pointwise.sum();
  if (!std::isfinite(d.loglik)) abort_nonfinite("marginal log-likelihood",
                                                d.loglik);
  return d;
}

InitEstimate initialize(const LongitudinalDataset& data, int u,
                        corr::Kind kind) {
  (void)kind;
  const int r = data.response_dim();
  const int p = data.covariate_dim();
  const int total = data.total_times();
  if (data.n() == 0 || total < 2)
    throw InvalidParameterError("not enough data to initialize");
  if (u < 1 || u > r)
    throw InvalidParameterError("envelope dimension out of range");

  Eigen::MatrixXd design(total, p + 1);
  Eigen::MatrixXd yobs(total, r);
  int row = 0;
  for (int i = 0; i < data.n(); ++i) {
    const auto& s = data.subject(i);
    for (int j = 0; j < s.times(); ++j, ++row) {
      design(row, 0) = 1.0;
      design.row(row).tail(p) = s.x.col(j).transpose();
      yobs.row(row) = s.y.col(j).transpose();
    }
  }

  InitEstimate init;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  init.rank_deficient = cod.rank() < p + 1;
  if (init.rank_deficient)
    std::cerr << "warning: rank-deficient design in initialization; using "
                 "minimum-norm least squares\n";
  Eigen::MatrixXd coef = cod.solve(yobs);  // (p+1) x r
  init.alpha0 = coef.row(0).transpose();
  init.beta0 = coef.bottomRows(p).transpose();

  Eigen::MatrixXd resid = yobs - design * coef;
  Eigen::RowVectorXd means = resid.colwise().mean();
  Eigen::MatrixXd centered = resid.rowwise() - means;
  Eigen::MatrixXd cov =
      centered.transpose() * centered / std::max(total - 1, 1);
  if (Eigen::LLT<Eigen::MatrixXd>(cov).info() != Eigen::Success)
    cov += (1e-8 * (cov.trace() / r + 1.0)) *
           Eigen::MatrixXd::Identity(r, r);
  init.sigma_eps0 = symmetrize(cov);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(init.beta0, Eigen::ComputeThinU);
  Eigen::MatrixXd gamma_tilde = svd.matrixU().leftCols(u);
  init.proj0 = grassmann::Projection{
      symmetrize(gamma_tilde * gamma_tilde.transpose()), u};

  // Lag-1 correlation of standardized residuals, pooled over subjects and
  // response components.
  Eigen::VectorXd sd = init.sigma_eps0.diagonal().cwiseSqrt();
  double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
  long count = 0;
  row = 0;
  for (int i = 0; i < data.n(); ++i) {
    const int times = data.subject(i).times();
    for (int j = 0; j + 1 < times; ++j) {
      for (int k = 0; k < r; ++k) {
        const double a = resid(row + j, k) / sd(k);
        const double b = resid(row + j + 1, k) / sd(k);
        sa += a;
        sb += b;
        saa += a * a;
        sbb += b * b;
        sab += a * b;
        ++count;
      }
    }
    row += times;
  }
  double rho0 = 0.5;
  if (count >= 2) {
    const double num = sab - sa * sb / count;
    const double den = std::sqrt((saa - sa * sa / count) *
                                 (sbb - sb * sb / count));
    if (den > 0.0) rho0 = num / den;
  }
  init.rho0 = std::min(0.999, std::max(0.001, rho0));

  init.frame_identity = Eigen::MatrixXd::Identity(r, r);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(init.beta0);
  init.frame_qr = qr.householderQ() * Eigen::MatrixXd::Identity(r, r);
  return init;
}

ParameterState initial_state(const InitEstimate& init, int u, int n,
                             const Eigen::MatrixXd& frame) {
  ParameterState state;
  state.projection = init.proj0;
  state.basis = grassmann::basis_from_projection(init.proj0, frame);
  state.alpha = init.alpha0;
  state.eta = state.basis.gamma.transpose() * init.beta0;
  state.omega = symmetrize(state.basis.gamma.transpose() * init.sigma_eps0 *
                           state.basis.gamma);
  state.omega0 = symmetrize(state.basis.gamma0.transpose() *
                            init.sigma_eps0 * state.basis.gamma0);
  state.rho = init.rho0;
  state.nu = 10.0;
  state.tau = Eigen::VectorXd::Ones(n);
  return state;
}

namespace {

void autotune_step(double* value, const AcceptCounter& window, double lo,
                   double hi) {
  if (window.attempted == 0) return;
  const double rate = window.rate();
  // Halve/double toward the (0.2, 0.5) band; a stronger factor applies while
  // the rate is pinned near 0 or 1.
  if (rate < 0.05)
    *value = std::max(lo, *value * 0.1);
  else if (rate < 0.2)
    *value = std::max(lo, *value * 0.5);
  else if (rate > 0.95)
    *value = std::min(hi, *value * 10.0);
  else if (rate > 0.5)
    *value = std::min(hi, *value * 2.0);
}

}  // namespace

ChainOutput run_chain(const LongitudinalDataset& data, int u, corr::Kind kind,
                      const PriorSpec& prior, const TuningSpec& tuning,
                      const Eigen::MatrixXd& frame, Rng& rng) {
  const int r = data.response_dim();
  if (u < 1 || u > r - 1)
    throw InvalidParameterError(
        "envelope dimension must satisfy 1 <= u <= r - 1");
  InitEstimate init = initialize(data, u, kind);
  Eigen::MatrixXd frame_use = frame.size() > 0 ? frame : init.frame_qr;
  ParameterState start = initial_state(init, u, data.n(), frame_use);
  GibbsSampler sampler(data, u, kind, prior, tuning, frame_use, start);

  AcceptCounter last_nu, last_p, last_rho;
  for (int s = 1; s <= tuning.burn_in; ++s) {
    sampler.sweep(rng);
    if (tuning.auto_tune && s % 100 == 0) {
      auto window = [](const AcceptCounter& now, AcceptCounter& prev) {
        AcceptCounter w{now.accepted - prev.accepted,
                        now.attempted - prev.attempted};
        prev = now;
        return w;
      };
      autotune_step(&sampler.tuning().delta_nu,
                    window(sampler.counter_nu(), last_nu), 1e-3, 50.0);
      autotune_step(&sampler.tuning().sigma2_p,
                    window(sampler.counter_p(), last_p), 1e-10, 1e6);
      autotune_step(&sampler.tuning().delta_rho,
                    window(sampler.counter_rho(), last_rho), 1e-4, 0.5);
    }
  }

  sampler.reset_counters();
  ChainOutput out;
  out.frame = frame_use;
  const int keep = tuning.n_samples / std::max(tuning.thin, 1);
  out.draws.reserve(keep);
  for (int s = 1; s <= tuning.n_samples; ++s) {
    sampler.sweep(rng);
    if (s % std::max(tuning.thin, 1) == 0)
      out.draws.push_back(sampler.snapshot_draw());
  }
  out.accept_nu = sampler.counter_nu();
  out.accept_p = sampler.counter_p();
  out.accept_rho = sampler.counter_rho();
  out.tuning_final = sampler.tuning();
  out.frame_failures = sampler.frame_failures();
  return out;
}

}  // namespace rolem::sampler
