#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <cstdio>

#include "flexqr/errors.hpp"
#include "flexqr/freq_sampler.hpp"
#include "flexqr/gibbs.hpp"
#include "flexqr/marglik.hpp"
#include "flexqr/req_sampler.hpp"
#include "marglik_oracle.hpp"
#include "support.hpp"

using namespace flexqr;
using flexqr::testing::tiny_ml_data;

namespace {

ThetaStar theta1(double beta, double sigma, double gamma, double phi2) {
  ThetaStar t;
  t.beta = Eigen::VectorXd::Constant(1, beta);
  t.sigma = sigma;
  t.gamma = gamma;
  t.phi2 = phi2;
  t.omega = Eigen::MatrixXd::Constant(1, 1, phi2);
  return t;
}

MarglikReport req_estimate(const PanelDataset& d, double p0, std::uint64_t seed, long M) {
  const PriorSpec pr = default_priors(1, 1, Heterogeneity::intercept);
  McmcConfig cfg;
  cfg.p0 = p0;
  cfg.burn_in = 1000;
  cfg.n_draws = 1000 + M;
  cfg.seed = seed;
  const ChainOutput ch = run_req(d, pr, cfg);
  MarglikOptions mo;
  mo.J = 2000;
  return marglik_req(d, pr, cfg, ch, mo);
}

}  // namespace

TEST_CASE("compare_models") {
  const ModelComparison eq = compare_models(-12.5, -12.5);
  CHECK(eq.prob_a == doctest::Approx(0.5));
  CHECK(eq.prob_b == doctest::Approx(0.5));
  const ModelComparison c = compare_models(-5.0, -15.0);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", c.odds);
  CHECK(std::string(buf) == "2.203e+04");
  CHECK(c.prob_a / c.prob_b == doctest::Approx(std::exp(10.0)));
  const ModelComparison far = compare_models(-2000.0, -100.0);
  CHECK(far.prob_a == 0.0);
  CHECK(far.prob_b == 1.0);
}

TEST_CASE("loglik_at: J below 100 is rejected") {
  const PanelDataset d = tiny_ml_data(0.5, 1);
  CHECK_THROWS_AS(loglik_at(theta1(1.0, 1.0, 0.0, 1.0), d, 0.5, 50, RngStream(1, 3)), DomainError);
}

TEST_CASE("loglik_at: vanishing random effects give the plug-in likelihood") {
  const PanelDataset d = tiny_ml_data(0.25, 2);
  const ThetaStar t = theta1(0.9, 1.1, 0.3, 1e-12);
  const LoglikResult r = loglik_at(t, d, 0.25, 500, RngStream(2, 3));
  const auto resid = residuals(d, t.beta, Eigen::MatrixXd::Zero(4, 1));
  CHECK(std::abs(r.log_lik - gal_loglik(resid, 1.1, 0.25, 0.3)) < 1e-4);
}

TEST_CASE("loglik_at: one unit against Gauss-Hermite") {
  PanelDataset d = tiny_ml_data(0.25, 3);
  d.units.resize(1);
  const double p0 = 0.25, sigma = 0.8, gamma = 0.4, phi2 = 0.7, beta = 1.1;
  const auto gh = flexqr::testing::gsl_rule(gsl_integration_fixed_hermite, 64, 0.0, 1.0);
  const GalKernel k(sigma, p0, gamma);
  double sum = 0.0;
  for (std::size_t q = 0; q < gh.x.size(); ++q) {
    const double a = std::sqrt(2.0 * phi2) * gh.x[q];
    double lp = 0.0;
    for (int t = 0; t < 2; ++t) lp += k.logpdf(d.units[0].y[t] - beta - a);
    sum += gh.w[q] * std::exp(lp);
  }
  const double oracle = std::log(sum / std::sqrt(M_PI));
  const LoglikResult r = loglik_at(theta1(beta, sigma, gamma, phi2), d, p0, 20000, RngStream(4, 3));
  INFO("oracle " << oracle << " mc " << r.log_lik << " se " << r.mc_se);
  CHECK(std::abs(r.log_lik - oracle) < 4.0 * r.mc_se);
  CHECK(r.mc_se < 0.02);
}

TEST_CASE("bookkeeping identity, FREQ and REQ") {
  const PanelDataset d = tiny_ml_data(0.25, 3);
  const PriorSpec pr = default_priors(1, 1, Heterogeneity::intercept);
  McmcConfig cfg;
  cfg.p0 = 0.25;
  cfg.burn_in = 500;
  cfg.n_draws = 2500;
  cfg.seed = 8;
  MarglikOptions mo;
  mo.J = 500;
  const ChainOutput cf = run_freq(d, pr, cfg);
  const MarglikReport f = marglik_freq(d, pr, cfg, cf, mo);
  CHECK(f.log_ml == doctest::Approx(f.log_lik_star + f.log_prior_star - f.sum_ordinates()).epsilon(1e-12));
  CHECK(f.log_post_ordinates.size() == 3);
  CHECK(f.theta_star.size() == 4);
  const ChainOutput cr = run_req(d, pr, cfg);
  const MarglikReport r = marglik_req(d, pr, cfg, cr, mo);
  CHECK(r.log_ml == doctest::Approx(r.log_lik_star + r.log_prior_star - r.sum_ordinates()).epsilon(1e-12));
  CHECK(r.log_post_ordinates.size() == 3);
  CHECK(r.theta_star.size() == 3);
  // same seed, same estimate
  const MarglikReport f2 = marglik_freq(d, pr, cfg, run_freq(d, pr, cfg), mo);
  CHECK(f2.log_ml == f.log_ml);
}

TEST_CASE("REQ estimator against the quadrature oracle") {
  const PanelDataset d = tiny_ml_data(0.9, 5);
  const PriorSpec pr = default_priors(1, 1, Heterogeneity::intercept);
  const double oracle = flexqr::testing::TinyMarglikOracle(d, pr, 0.9, false).log_marginal(48);
  const MarglikReport r = req_estimate(d, 0.9, 5, 20000);
  INFO("oracle " << oracle << " estimate " << r.log_ml);
  CHECK(std::abs(r.log_ml - oracle) < 0.15);
}

TEST_CASE("unit order does not matter beyond Monte Carlo error") {
  const PanelDataset d = tiny_ml_data(0.5, 6);
  PanelDataset e = d;
  std::reverse(e.units.begin(), e.units.end());
  std::vector<double> a, b;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    a.push_back(req_estimate(d, 0.5, s, 3000).log_ml);
    b.push_back(req_estimate(e, 0.5, s + 100, 3000).log_ml);
  }
  // MC standard errors of the two averages, from the replicate spread
  const auto ma = flexqr::testing::mean_se(a), mb = flexqr::testing::mean_se(b);
  INFO("original " << ma.mean << " reversed " << mb.mean);
  CHECK(std::abs(ma.mean - mb.mean) < 2.0 * std::hypot(ma.se, mb.se));
}
