#include "flexqr/req_sampler.hpp"

#include <chrono>
#include <cmath>

#include "flexqr/errors.hpp"
#include "flexqr/freq_sampler.hpp"
#include "flexqr/gibbs.hpp"
#include "flexqr/samplers.hpp"

namespace flexqr {

double step_sigma_req(const ChainState& s, const PanelDataset& data, const PriorSpec& priors,
                      double p0, RngStream& rng) {
  const SigmaConditional c = sigma_conditional_al(s, data, priors, p0);
  return draw_invgamma(c.shape, c.rate, rng);
}

void req_sweep(ChainState& s, const PanelDataset& data, const PriorSpec& priors, double p0,
               const RngStream& base, long sweep, const ReqSweepControl& control) {
  if (!control.fix_beta) {
    RngStream rb = sweep_stream(base, kTagBeta, sweep);
    if (control.unblocked) {
      const NormalConditional c = beta_conditional_given_alpha(s, data, priors, p0);
      s.beta = draw_mvn_precision(c.precision, c.b, rb);
    } else {
      s.beta = step_beta(s, data, priors, p0, rb);
    }
  }
  s.alpha = step_alpha(s, data, p0, base, sweep);
  if (!control.fix_omega) {
    RngStream ro = sweep_stream(base, kTagOmega, sweep);
    step_omega(s, priors, ro);
  }
  s.nu = step_nu(s, data, p0, base, sweep);
  if (!control.fix_sigma) {
    RngStream rs = sweep_stream(base, kTagSigma, sweep);
    s.sigma = step_sigma_req(s, data, priors, p0, rs);
  }
}

namespace {

double check_loss_scale(const PanelDataset& data, const Eigen::VectorXd& beta, double p0) {
  double total = 0.0;
  for (const auto& u : data.units) {
    const Eigen::VectorXd r = u.y - u.X * beta;
    for (Eigen::Index t = 0; t < r.size(); ++t) total += r[t] * (p0 - (r[t] < 0.0 ? 1.0 : 0.0));
  }
  return std::max(total / data.total_obs(), 1e-6);
}

}  // namespace

ChainOutput run_req(const PanelDataset& data, const PriorSpec& priors, const McmcConfig& cfg,
                    const ReqRunOptions& options) {
  require_valid(data, priors, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  ChainState s;
  if (options.initial) {
    s = *options.initial;
  } else {
    const Eigen::VectorXd beta = pooled_ols(data);
    s = initial_state(data, priors, beta, check_loss_scale(data, beta, cfg.p0), 0.0);
  }
  s.gamma = 0.0;
  for (auto& h : s.h) h.setZero();

  const RngStream base(cfg.seed, options.run_tag);
  const bool intercept_only = priors.intercept_only();
  ChainOutput out;
  out.config = cfg;
  out.columns = param_columns(data.k, data.l, intercept_only, false);
  const long n_keep = (cfg.n_draws - cfg.burn_in) / cfg.thin;
  out.draws.resize(n_keep, static_cast<Eigen::Index>(out.columns.size()));
  long stored = 0;
  for (long sweep = 0; sweep < cfg.n_draws; ++sweep) {
    try {
      req_sweep(s, data, priors, cfg.p0, base, sweep, options.control);
    } catch (const NumericalError& e) {
      throw NumericalError("sweep " + std::to_string(sweep) + ": " + e.what());
    }
    if (sweep < cfg.burn_in) continue;
    if ((sweep - cfg.burn_in + 1) % cfg.thin == 0 && stored < n_keep) {
      out.draws.row(stored) = state_row(s, intercept_only, false);
      out.accepted.push_back(1);
      if (cfg.store_alpha) out.alpha_draws.push_back(s.alpha);
      if (options.control.observer) options.control.observer(sweep, s);
      ++stored;
    }
  }
  out.accept_rate = 1.0;
  out.last_state = s;
  out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace flexqr
