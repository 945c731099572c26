#include "flexqr/marglik.hpp"

#include <cmath>
#include <sstream>

#include "flexqr/errors.hpp"
#include "flexqr/freq_sampler.hpp"
#include "flexqr/gal.hpp"
#include "flexqr/gibbs.hpp"
#include "flexqr/numerics.hpp"
#include "flexqr/req_sampler.hpp"
#include "flexqr/samplers.hpp"

namespace flexqr {

namespace {

// Run tags keep every auxiliary run on its own streams.
constexpr std::uint64_t kRunReduced1 = 1;
constexpr std::uint64_t kRunReduced2 = 2;
constexpr std::uint64_t kRunLoglik = 3;
constexpr std::uint64_t kRunProposal = 4;

double column_mean(const ChainOutput& chain, const std::string& name) {
  const int c = chain.column(name);
  if (c < 0) throw DomainError("chain has no column " + name);
  return chain.draws.col(c).mean();
}

void check_positive(const LogMeanExp& acc, const char* what) {
  if (!std::isfinite(acc.value())) {
    throw NumericalError(std::string("marginal likelihood: ") + what +
                         " estimate is not strictly positive");
  }
}

long resolve(long requested, long fallback) { return requested > 0 ? requested : fallback; }

McmcConfig reduced_config(const McmcConfig& cfg, long burn, long draws) {
  McmcConfig r = cfg;
  r.burn_in = burn;
  r.n_draws = burn + draws;
  r.thin = 1;
  r.store_alpha = false;
  r.adapt_burnin = false;
  return r;
}

void check_replay(const ChainOutput& chain, long index, const Eigen::RowVectorXd& row) {
  if (index >= chain.n_stored() || (chain.draws.row(index) - row).cwiseAbs().maxCoeff() != 0.0) {
    std::ostringstream msg;
    msg << "marginal likelihood: replay of the main chain diverged at stored draw " << index
        << " (was the chain produced with the same data, priors and config?)";
    throw NumericalError(msg.str());
  }
}

}  // namespace

double MarglikReport::sum_ordinates() const {
  double s = 0.0;
  for (const auto& [name, v] : log_post_ordinates) s += v;
  return s;
}

ThetaStar theta_star_from_chain(const ChainOutput& chain, const PanelDataset& data,
                                bool intercept_only) {
  if (chain.n_stored() == 0) throw DomainError("theta_star_from_chain: empty chain");
  ThetaStar t;
  t.beta.resize(data.k);
  for (int j = 0; j < data.k; ++j) t.beta[j] = column_mean(chain, "beta_" + std::to_string(j + 1));
  t.sigma = column_mean(chain, "sigma");
  if (chain.column("gamma") >= 0) {
    const GalBounds b = gal_bounds(chain.config.p0);
    t.gamma = std::clamp(column_mean(chain, "gamma"), b.L + 1e-6, b.U - 1e-6);
  }
  if (intercept_only) {
    t.phi2 = column_mean(chain, "phi2");
    t.omega = t.phi2 * Eigen::MatrixXd::Identity(data.l, data.l);
  } else {
    t.omega.resize(data.l, data.l);
    for (int i = 0; i < data.l; ++i) {
      for (int j = 0; j <= i; ++j) {
        t.omega(i, j) = t.omega(j, i) =
            column_mean(chain, "omega_" + std::to_string(i + 1) + std::to_string(j + 1));
      }
    }
  }
  return t;
}

LoglikResult loglik_at(const ThetaStar& theta, const PanelDataset& data, double p0, int J,
                       const RngStream& rng) {
  if (J < 100) throw DomainError("loglik_at: J must be at least 100");
  const GalKernel kernel(theta.sigma, p0, theta.gamma);
  Eigen::LLT<Eigen::MatrixXd> llt(theta.omega);
  if (llt.info() != Eigen::Success) throw NumericalError("loglik_at: Omega* not SPD");
  const Eigen::MatrixXd L = llt.matrixL();
  LoglikResult out;
  double var = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const auto& u = data.units[i];
    const Eigen::VectorXd r0 = u.y - u.X * theta.beta;
    RngStream ri = rng.substream({static_cast<std::uint64_t>(i)});
    LogMeanExp acc;
    Eigen::VectorXd z(data.l);
    for (int j = 0; j < J; ++j) {
      for (int c = 0; c < data.l; ++c) z[c] = ri.normal();
      const Eigen::VectorXd r = r0 - u.Z * (L * z);
      double lp = 0.0;
      for (int t = 0; t < u.T(); ++t) lp += kernel.logpdf(r[t]);
      acc.add(lp);
    }
    out.log_lik += acc.value();
    var += acc.log_scale_variance();
  }
  out.mc_se = std::sqrt(var);
  return out;
}

double log_prior_at(const ThetaStar& theta, const PriorSpec& priors, double p0, bool with_gamma) {
  double lp = log_mvn_pdf(theta.beta, priors.beta0, priors.B0) +
              log_invgamma_pdf(theta.sigma, 0.5 * priors.n0, 0.5 * priors.d0);
  if (with_gamma) {
    const GalBounds b = gal_bounds(p0);
    lp -= std::log(b.U - b.L);
  }
  if (const auto* ig = std::get_if<IgPrior>(&priors.heterogeneity)) {
    lp += log_invgamma_pdf(theta.phi2, 0.5 * ig->c1, 0.5 * ig->d1);
  } else {
    const auto& iw = std::get<IwPrior>(priors.heterogeneity);
    lp += log_invwishart_pdf(theta.omega, iw.omega0, iw.O0);
  }
  return lp;
}

MarglikReport marglik_freq(const PanelDataset& data, const PriorSpec& priors,
                           const McmcConfig& cfg, const ChainOutput& chain,
                           const MarglikOptions& options) {
  const bool io = priors.intercept_only();
  const ThetaStar ts = theta_star_from_chain(chain, data, io);
  const GalBounds bounds = gal_bounds(cfg.p0);
  const Eigen::Matrix2d cov = chain.iota_final * chain.iota_final * chain.D_hat;
  const Eigen::Vector2d star(ts.sigma, ts.gamma);
  const long M = chain.n_stored();
  const long M1 = resolve(options.M1, M), M2 = resolve(options.M2, M);
  const long rburn = options.reduced_burn_in >= 0 ? options.reduced_burn_in : std::min(cfg.burn_in, 500L);

  MhCalibration calib = calibrate_proposal(data, cfg.p0, &priors);
  calib.D_hat = chain.D_hat;

  // Numerator of the (sigma, gamma) ordinate over the main chain.
  LogMeanExp numer;
  long index = 0;
  {
    FreqRunOptions opt;
    opt.calibration = calib;
    opt.control.observer = [&](long, const ChainState& s) {
      check_replay(chain, index++, state_row(s, io, true));
      const std::vector<double> resid = residuals(data, s.beta, s.alpha);
      const Eigen::Vector2d cur(s.sigma, s.gamma);
      const double t_cur = freq_log_target(resid, s.sigma, s.gamma, cfg.p0, priors, bounds);
      const double t_star = freq_log_target(resid, ts.sigma, ts.gamma, cfg.p0, priors, bounds);
      numer.add(mh_log_accept(cur, star, t_cur, t_star, cov, bounds) +
                proposal_log_density(cur, star, cov, bounds));
    };
    run_freq(data, priors, chain.config, opt);
  }
  check_positive(numer, "ordinate numerator");

  // Reduced run 1: (sigma, gamma) fixed at Theta1*.
  LogMeanExp denom, beta_ord;
  ChainState after1;
  {
    ChainState init = chain.last_state;
    init.sigma = ts.sigma;
    init.gamma = ts.gamma;
    FreqRunOptions opt;
    opt.calibration = calib;
    opt.initial = init;
    opt.iota = chain.iota_final;
    opt.run_tag = kRunReduced1;
    opt.control.fix_sigma_gamma = true;
    const RngStream prop_base(cfg.seed, kRunProposal);
    opt.control.observer = [&](long sweep, const ChainState& s) {
      beta_ord.add(beta_conditional(s, data, priors, cfg.p0).log_density(ts.beta));
      RngStream rng = prop_base.substream({static_cast<std::uint64_t>(sweep)});
      const Eigen::Vector2d draw = draw_proposal(star, cov, bounds, rng);
      const std::vector<double> resid = residuals(data, s.beta, s.alpha);
      const double t_star = freq_log_target(resid, ts.sigma, ts.gamma, cfg.p0, priors, bounds);
      const double t_draw = freq_log_target(resid, draw[0], draw[1], cfg.p0, priors, bounds);
      denom.add(mh_log_accept(star, draw, t_star, t_draw, cov, bounds));
    };
    after1 = run_freq(data, priors, reduced_config(cfg, rburn, M1), opt).last_state;
  }
  check_positive(denom, "ordinate denominator");

  // Reduced run 2: (beta, sigma, gamma) fixed.
  LogMeanExp omega_ord;
  {
    ChainState init = after1;
    init.beta = ts.beta;
    FreqRunOptions opt;
    opt.calibration = calib;
    opt.initial = init;
    opt.iota = chain.iota_final;
    opt.run_tag = kRunReduced2;
    opt.control.fix_sigma_gamma = true;
    opt.control.fix_beta = true;
    opt.control.observer = [&](long, const ChainState& s) {
      omega_ord.add(omega_conditional(s, priors).log_density(ts.omega, ts.phi2));
    };
    run_freq(data, priors, reduced_config(cfg, rburn, M2), opt);
  }

  MarglikReport rep;
  rep.model = "FREQ";
  rep.p0 = cfg.p0;
  const LoglikResult ll = loglik_at(ts, data, cfg.p0, options.J, RngStream(cfg.seed, kRunLoglik));
  rep.log_lik_star = ll.log_lik;
  rep.log_lik_mc_se = ll.mc_se;
  rep.log_prior_star = log_prior_at(ts, priors, cfg.p0, true);
  rep.log_post_ordinates = {{"sigma_gamma", numer.value() - denom.value()},
                            {"beta", beta_ord.value()},
                            {io ? "phi2" : "omega", omega_ord.value()}};
  rep.log_ml = rep.log_lik_star + rep.log_prior_star - rep.sum_ordinates();
  rep.theta_names = chain.columns;
  rep.theta_star.assign(chain.columns.size(), 0.0);
  ChainState as_state;
  as_state.beta = ts.beta;
  as_state.sigma = ts.sigma;
  as_state.gamma = ts.gamma;
  as_state.omega = ts.omega;
  as_state.phi2 = ts.phi2;
  const Eigen::RowVectorXd row = state_row(as_state, io, true);
  for (Eigen::Index j = 0; j < row.size(); ++j) rep.theta_star[j] = row[j];
  rep.M = M;
  rep.M1 = M1;
  rep.M2 = M2;
  rep.J = options.J;
  return rep;
}

MarglikReport marglik_req(const PanelDataset& data, const PriorSpec& priors,
                          const McmcConfig& cfg, const ChainOutput& chain,
                          const MarglikOptions& options) {
  const bool io = priors.intercept_only();
  const ThetaStar ts = theta_star_from_chain(chain, data, io);
  const long G = chain.n_stored();
  const long G1 = resolve(options.M1, G), G2 = resolve(options.M2, G);
  const long rburn = options.reduced_burn_in >= 0 ? options.reduced_burn_in : std::min(cfg.burn_in, 500L);

  LogMeanExp beta_ord;
  long index = 0;
  {
    ReqRunOptions opt;
    opt.control.observer = [&](long, const ChainState& s) {
      check_replay(chain, index++, state_row(s, io, false));
      beta_ord.add(beta_conditional(s, data, priors, cfg.p0).log_density(ts.beta));
    };
    run_req(data, priors, chain.config, opt);
  }

  LogMeanExp omega_ord;
  ChainState after1;
  {
    ChainState init = chain.last_state;
    init.beta = ts.beta;
    ReqRunOptions opt;
    opt.initial = init;
    opt.run_tag = kRunReduced1;
    opt.control.fix_beta = true;
    opt.control.observer = [&](long, const ChainState& s) {
      omega_ord.add(omega_conditional(s, priors).log_density(ts.omega, ts.phi2));
    };
    after1 = run_req(data, priors, reduced_config(cfg, rburn, G1), opt).last_state;
  }

  LogMeanExp sigma_ord;
  {
    ChainState init = after1;
    init.beta = ts.beta;
    init.omega = ts.omega;
    init.phi2 = ts.phi2;
    ReqRunOptions opt;
    opt.initial = init;
    opt.run_tag = kRunReduced2;
    opt.control.fix_beta = true;
    opt.control.fix_omega = true;
    opt.control.observer = [&](long, const ChainState& s) {
      // The sigma conditional given this sweep's alpha and nu.
      const SigmaConditional c = sigma_conditional_al(s, data, priors, cfg.p0);
      sigma_ord.add(log_invgamma_pdf(ts.sigma, c.shape, c.rate));
    };
    run_req(data, priors, reduced_config(cfg, rburn, G2), opt);
  }

  MarglikReport rep;
  rep.model = "REQ";
  rep.p0 = cfg.p0;
  ThetaStar al = ts;
  al.gamma = 0.0;
  const LoglikResult ll = loglik_at(al, data, cfg.p0, options.J, RngStream(cfg.seed, kRunLoglik));
  rep.log_lik_star = ll.log_lik;
  rep.log_lik_mc_se = ll.mc_se;
  rep.log_prior_star = log_prior_at(al, priors, cfg.p0, false);
  rep.log_post_ordinates = {{"beta", beta_ord.value()},
                            {io ? "phi2" : "omega", omega_ord.value()},
                            {"sigma", sigma_ord.value()}};
  rep.log_ml = rep.log_lik_star + rep.log_prior_star - rep.sum_ordinates();
  rep.theta_names = chain.columns;
  ChainState as_state;
  as_state.beta = ts.beta;
  as_state.sigma = ts.sigma;
  as_state.omega = ts.omega;
  as_state.phi2 = ts.phi2;
  const Eigen::RowVectorXd row = state_row(as_state, io, false);
  rep.theta_star.assign(row.data(), row.data() + row.size());
  rep.M = G;
  rep.M1 = G1;
  rep.M2 = G2;
  rep.J = options.J;
  return rep;
}

ModelComparison compare_models(double log_ml_a, double log_ml_b) {
  ModelComparison c;
  c.log_bf = log_ml_a - log_ml_b;
  // Logistic form, stable for large |log_bf|.
  c.prob_a = c.log_bf >= 0.0 ? 1.0 / (1.0 + std::exp(-c.log_bf))
                             : std::exp(c.log_bf) / (1.0 + std::exp(c.log_bf));
  c.prob_b = 1.0 - c.prob_a;
  c.odds = std::exp(c.log_bf);
  return c;
}

}  // namespace flexqr
