#include "flexqr/freq_sampler.hpp"

#include <gsl/gsl_multimin.h>

#include <chrono>
#include <cmath>
#include <sstream>

#include "flexqr/errors.hpp"
#include "flexqr/gibbs.hpp"
#include "flexqr/numerics.hpp"
#include "flexqr/samplers.hpp"

namespace flexqr {

Eigen::VectorXd pooled_ols(const PanelDataset& data) {
  const int N = data.total_obs();
  Eigen::MatrixXd X(N, data.k);
  Eigen::VectorXd y(N);
  int row = 0;
  for (const auto& u : data.units) {
    X.middleRows(row, u.T()) = u.X;
    y.segment(row, u.T()) = u.y;
    row += u.T();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < data.k) throw NumericalError("pooled OLS: design matrix is rank deficient");
  return qr.solve(y);
}

namespace {

struct CalibProblem {
  const std::vector<double>* resid;
  double p0;
  GalBounds bounds;
  double log_s0;
  const PriorSpec* priors;
};

double calib_target(const CalibProblem& pr, double sigma, double gamma) {
  double v = gal_loglik(*pr.resid, sigma, pr.p0, gamma);
  if (pr.priors) v += log_invgamma_pdf(sigma, 0.5 * pr.priors->n0, 0.5 * pr.priors->d0);
  return v;
}

// The likelihood has a ridge running into gamma -> U (or L) with sigma -> 0;
// the search stays inside a box around the check-loss scale.
constexpr double kMaxLogit = 6.0;
constexpr double kMaxLogScaleShift = 8.0;

// x = (log sigma, logit of gamma's position in (L, U)).
void unpack(const double* x, const GalBounds& b, double& sigma, double& gamma) {
  sigma = std::exp(x[0]);
  gamma = b.L + (b.U - b.L) / (1.0 + std::exp(-x[1]));
}

double calib_objective(const gsl_vector* v, void* params) {
  const auto* pr = static_cast<const CalibProblem*>(params);
  if (std::abs(v->data[1]) > kMaxLogit || std::abs(v->data[0] - pr->log_s0) > kMaxLogScaleShift) {
    return 1e300;
  }
  double sigma, gamma;
  unpack(v->data, pr->bounds, sigma, gamma);
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !(gamma > pr->bounds.L && gamma < pr->bounds.U)) {
    return 1e300;
  }
  const double ll = calib_target(*pr, sigma, gamma);
  return std::isfinite(ll) ? -ll : 1e300;
}

struct NmResult {
  double x[2];
  double f;
  bool converged;
};

NmResult nelder_mead(CalibProblem& problem, double x0, double x1) {
  gsl_multimin_function fn{&calib_objective, 2, &problem};
  gsl_vector* x = gsl_vector_alloc(2);
  gsl_vector* step = gsl_vector_alloc(2);
  gsl_vector_set(x, 0, x0);
  gsl_vector_set(x, 1, x1);
  gsl_vector_set_all(step, 0.5);
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
  gsl_multimin_fminimizer_set(m, &fn, x, step);
  int status = GSL_CONTINUE;
  for (int iter = 0; iter < 2000 && status == GSL_CONTINUE; ++iter) {
    if (gsl_multimin_fminimizer_iterate(m)) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-7);
  }
  NmResult r{{gsl_vector_get(m->x, 0), gsl_vector_get(m->x, 1)}, m->fval, status == GSL_SUCCESS};
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return r;
}

double check_loss_scale(const std::vector<double>& resid, double p0) {
  double s = 0.0;
  for (double r : resid) s += r * (p0 - (r < 0.0 ? 1.0 : 0.0));
  return std::max(s / static_cast<double>(resid.size()), 1e-6);
}

}  // namespace

MhCalibration calibrate_proposal(const PanelDataset& data, double p0, const PriorSpec* priors) {
  MhCalibration out;
  out.beta_pooled = pooled_ols(data);
  const Eigen::MatrixXd zero_alpha = Eigen::MatrixXd::Zero(data.n(), data.l);
  const std::vector<double> resid = residuals(data, out.beta_pooled, zero_alpha);
  const GalBounds bounds = gal_bounds(p0);
  const double s0 = check_loss_scale(resid, p0);
  CalibProblem problem{&resid, p0, bounds, std::log(s0), priors};

  auto logit_pos = [&](double gamma) {
    const double u = (gamma - bounds.L) / (bounds.U - bounds.L);
    return std::log(u / (1.0 - u));
  };
  const double starts[5][2] = {{std::log(s0), logit_pos(0.0)},
                               {std::log(s0), logit_pos(0.5 * bounds.U)},
                               {std::log(s0), logit_pos(0.5 * bounds.L)},
                               {std::log(0.5 * s0), logit_pos(0.0)},
                               {std::log(2.0 * s0), logit_pos(0.0)}};
  NmResult best{{0, 0}, kInf, false};
  bool any_converged = false;
  for (const auto& st : starts) {
    const NmResult r = nelder_mead(problem, st[0], st[1]);
    any_converged = any_converged || r.converged;
    if (r.f < best.f) best = r;
  }
  if (!any_converged || !std::isfinite(best.f) || best.f >= 1e300) {
    throw NumericalError("proposal calibration: Nelder-Mead did not converge from any restart point");
  }
  unpack(best.x, bounds, out.sigma_hat, out.gamma_hat);
  out.loglik_max = gal_loglik(resid, out.sigma_hat, p0, out.gamma_hat);

  // Central finite-difference Hessian in (sigma, gamma).
  const double hs = 1e-4 * out.sigma_hat;
  const double hg = 1e-4 * (bounds.U - bounds.L);
  double sc = out.sigma_hat;
  double gc = std::clamp(out.gamma_hat, bounds.L + 3.0 * hg, bounds.U - 3.0 * hg);
  auto f = [&](double s, double g) { return calib_target(problem, s, g); };
  const double f0 = f(sc, gc);
  Eigen::Matrix2d H;
  H(0, 0) = (f(sc + hs, gc) - 2.0 * f0 + f(sc - hs, gc)) / (hs * hs);
  H(1, 1) = (f(sc, gc + hg) - 2.0 * f0 + f(sc, gc - hg)) / (hg * hg);
  H(0, 1) = H(1, 0) = (f(sc + hs, gc + hg) - f(sc + hs, gc - hg) - f(sc - hs, gc + hg) +
                       f(sc - hs, gc - hg)) /
                      (4.0 * hs * hg);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(-H);
  Eigen::Vector2d ev = es.eigenvalues();
  if (!(ev.minCoeff() > 0.0) || !ev.allFinite()) {
    std::ostringstream msg;
    msg << "calibration Hessian not negative definite (eigenvalues of -H: " << ev[0] << ", "
        << ev[1] << "); eigenvalues clipped";
    out.warnings.push_back(msg.str());
    const double top = std::max(ev.maxCoeff(), 1.0);
    for (int i = 0; i < 2; ++i) {
      if (!std::isfinite(ev[i]) || ev[i] < 1e-6 * top) ev[i] = 1e-6 * top;
    }
  }
  out.D_hat = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  out.D_hat = 0.5 * (out.D_hat + out.D_hat.transpose()).eval();
  out.iota = 2.4 / std::sqrt(2.0);
  return out;
}

double freq_log_target(const std::vector<double>& resid, double sigma, double gamma, double p0,
                       const PriorSpec& priors, const GalBounds& bounds) {
  if (!(sigma > 0.0) || !(gamma > bounds.L && gamma < bounds.U)) return -kInf;
  return gal_loglik(resid, sigma, p0, gamma) + log_invgamma_pdf(sigma, 0.5 * priors.n0, 0.5 * priors.d0) -
         std::log(bounds.U - bounds.L);
}

namespace {

Eigen::Vector2d rect_lo(const GalBounds& b) { return {0.0, b.L}; }
Eigen::Vector2d rect_hi(const GalBounds& b) { return {kInf, b.U}; }

}  // namespace

double mh_log_accept(const Eigen::Vector2d& from, const Eigen::Vector2d& to, double target_from,
                     double target_to, const Eigen::Matrix2d& proposal_cov,
                     const GalBounds& bounds) {
  if (target_to == -kInf) return -kInf;
  // The normal kernel is symmetric, so only the truncation masses remain.
  const double log_ratio = target_to - target_from +
                           btn_log_mass(from, proposal_cov, rect_lo(bounds), rect_hi(bounds)) -
                           btn_log_mass(to, proposal_cov, rect_lo(bounds), rect_hi(bounds));
  return std::min(0.0, log_ratio);
}

double proposal_log_density(const Eigen::Vector2d& from, const Eigen::Vector2d& to,
                            const Eigen::Matrix2d& proposal_cov, const GalBounds& bounds) {
  return btn_log_density(to, from, proposal_cov, rect_lo(bounds), rect_hi(bounds));
}

Eigen::Vector2d draw_proposal(const Eigen::Vector2d& from, const Eigen::Matrix2d& proposal_cov,
                              const GalBounds& bounds, RngStream& rng) {
  return draw_btn_rect(from, proposal_cov, rect_lo(bounds), rect_hi(bounds), rng);
}

MhStep step_sigma_gamma(const ChainState& s, const PanelDataset& data, const PriorSpec& priors,
                        const Eigen::Matrix2d& proposal_cov, double p0, RngStream& rng) {
  const GalBounds bounds = gal_bounds(p0);
  const std::vector<double> resid = residuals(data, s.beta, s.alpha);
  const Eigen::Vector2d cur(s.sigma, s.gamma);
  const Eigen::Vector2d prop = draw_proposal(cur, proposal_cov, bounds, rng);
  const double t_cur = freq_log_target(resid, cur[0], cur[1], p0, priors, bounds);
  double t_prop = -kInf;
  if (prop[0] > 0.0 && prop[1] > bounds.L && prop[1] < bounds.U) {
    t_prop = freq_log_target(resid, prop[0], prop[1], p0, priors, bounds);
  }
  const double la = mh_log_accept(cur, prop, t_cur, t_prop, proposal_cov, bounds);
  if (std::log(rng.uniform()) < la) return {prop[0], prop[1], true};
  return {s.sigma, s.gamma, false};
}

bool freq_sweep(ChainState& s, const PanelDataset& data, const PriorSpec& priors, double p0,
                const Eigen::Matrix2d& proposal_cov, const RngStream& base, long sweep,
                const SweepControl& control) {
  if (!control.fix_beta) {
    RngStream rb = sweep_stream(base, kTagBeta, sweep);
    s.beta = control.unblocked
                 ? [&] {
                     const NormalConditional c = beta_conditional_given_alpha(s, data, priors, p0);
                     return Eigen::VectorXd(draw_mvn_precision(c.precision, c.b, rb));
                   }()
                 : step_beta(s, data, priors, p0, rb);
  }
  s.alpha = step_alpha(s, data, p0, base, sweep);
  if (!control.fix_omega) {
    RngStream ro = sweep_stream(base, kTagOmega, sweep);
    step_omega(s, priors, ro);
  }
  bool accepted = false;
  if (!control.fix_sigma_gamma) {
    RngStream rm = sweep_stream(base, kTagMh, sweep);
    const MhStep m = step_sigma_gamma(s, data, priors, proposal_cov, p0, rm);
    s.sigma = m.sigma;
    s.gamma = m.gamma;
    accepted = m.accepted;
  }
  if (control.refresh_h) s.h = step_h_marginal(s, data, p0, base, sweep);
  s.nu = step_nu(s, data, p0, base, sweep);
  s.h = step_h(s, data, p0, base, sweep);
  return accepted;
}

ChainState initial_state(const PanelDataset& data, const PriorSpec& priors,
                         const Eigen::VectorXd& beta, double sigma, double gamma) {
  ChainState s;
  s.beta = beta;
  s.alpha = Eigen::MatrixXd::Zero(data.n(), data.l);
  s.sigma = sigma;
  s.gamma = gamma;
  s.phi2 = 1.0;
  s.omega = Eigen::MatrixXd::Identity(data.l, data.l);
  if (const auto* iw = std::get_if<IwPrior>(&priors.heterogeneity)) {
    if (iw->omega0 > data.l + 1) s.omega = iw->O0 / (iw->omega0 - data.l - 1);
  }
  for (const auto& u : data.units) {
    s.nu.push_back(Eigen::VectorXd::Constant(u.T(), sigma));
    s.h.push_back(Eigen::VectorXd::Constant(u.T(), gamma == 0.0 ? 0.0 : sigma * std::sqrt(2.0 / M_PI)));
  }
  return s;
}

ChainOutput run_freq(const PanelDataset& data, const PriorSpec& priors, const McmcConfig& cfg,
                     const FreqRunOptions& options) {
  require_valid(data, priors, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const MhCalibration calib = options.calibration ? *options.calibration : calibrate_proposal(data, cfg.p0, &priors);
  const GalBounds bounds = gal_bounds(cfg.p0);
  ChainState s;
  if (options.initial) {
    s = *options.initial;
  } else {
    const double margin = 0.05 * (bounds.U - bounds.L);
    const double g0 = std::clamp(calib.gamma_hat, bounds.L + margin, bounds.U - margin);
    s = initial_state(data, priors, calib.beta_pooled, calib.sigma_hat, g0);
  }
  double iota = options.iota ? *options.iota : (cfg.iota > 0.0 ? cfg.iota : calib.iota);
  const bool adapt = cfg.adapt_burnin && !options.iota && !options.control.fix_sigma_gamma;

  const RngStream base(cfg.seed, options.run_tag);
  const bool intercept_only = priors.intercept_only();
  ChainOutput out;
  out.config = cfg;
  out.D_hat = calib.D_hat;
  out.columns = param_columns(data.k, data.l, intercept_only, true);
  const long n_keep = (cfg.n_draws - cfg.burn_in) / cfg.thin;
  out.draws.resize(n_keep, static_cast<Eigen::Index>(out.columns.size()));
  long stored = 0, batch_accept = 0, post_accept = 0, post_sweeps = 0;
  for (long sweep = 0; sweep < cfg.n_draws; ++sweep) {
    bool accepted;
    try {
      accepted = freq_sweep(s, data, priors, cfg.p0, iota * iota * calib.D_hat, base, sweep, options.control);
    } catch (const NumericalError& e) {
      throw NumericalError("sweep " + std::to_string(sweep) + ": " + e.what());
    }
    if (sweep < cfg.burn_in) {
      batch_accept += accepted;
      if (adapt && (sweep + 1) % 20 == 0) {
        iota *= std::exp(batch_accept / 20.0 > cfg.target_accept ? 0.05 : -0.05);
        batch_accept = 0;
      }
      continue;
    }
    ++post_sweeps;
    post_accept += accepted;
    if ((sweep - cfg.burn_in + 1) % cfg.thin == 0 && stored < n_keep) {
      out.draws.row(stored) = state_row(s, intercept_only, true);
      out.accepted.push_back(accepted ? 1 : 0);
      if (cfg.store_alpha) out.alpha_draws.push_back(s.alpha);
      if (options.control.observer) options.control.observer(sweep, s);
      ++stored;
    }
  }
  out.accept_rate = post_sweeps > 0 ? static_cast<double>(post_accept) / post_sweeps : 0.0;
  out.iota_final = iota;
  out.last_state = s;
  out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace flexqr
