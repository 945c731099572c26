#include <doctest.h>

#include <cmath>
#include <numbers>

#include "flexqr/gibbs.hpp"
#include "flexqr/samplers.hpp"
#include "kernel_checks.hpp"
#include "support.hpp"

using namespace flexqr;
using flexqr::testing::mean_se;

namespace {

// n = 1, T = 1, k = l = 1, x = z = 1, AL at the median.
struct OneObs {
  PanelDataset d;
  ChainState s;
  PriorSpec pr;
};

OneObs one_obs(double y, double nu, double omega) {
  OneObs o;
  o.d.k = 1;
  o.d.l = 1;
  o.d.z_in_x = {0};
  PanelUnit u;
  u.id = "a";
  u.y = Eigen::VectorXd::Constant(1, y);
  u.X = Eigen::MatrixXd::Ones(1, 1);
  u.Z = u.X;
  o.d.units.push_back(u);
  o.s.beta = Eigen::VectorXd::Zero(1);
  o.s.alpha = Eigen::MatrixXd::Zero(1, 1);
  o.s.nu = {Eigen::VectorXd::Constant(1, nu)};
  o.s.h = {Eigen::VectorXd::Zero(1)};
  o.s.sigma = 1.0;
  o.s.gamma = 0.0;
  o.s.omega = Eigen::MatrixXd::Constant(1, 1, omega);
  o.s.phi2 = omega;
  o.pr.beta0 = Eigen::VectorXd::Zero(1);
  o.pr.B0 = Eigen::MatrixXd::Identity(1, 1);
  o.pr.heterogeneity = IgPrior{2.0, 2.0};
  return o;
}

}  // namespace

TEST_CASE("beta conditional: scalar arithmetic") {
  // sigma B nu = 8 / 8 = 1, Omega ~ 0 so V = 1.
  OneObs o = one_obs(2.0, 1.0 / 8.0, 1e-300);
  const NormalConditional c = beta_conditional(o.s, o.d, o.pr, 0.5);
  CHECK(1.0 / c.precision(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.mean()[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("beta conditional: flat-prior limit is GLS") {
  OneObs o = one_obs(0.0, 0.3, 0.7);
  o.d.units[0].y = Eigen::Vector3d(1.5, -0.2, 0.9);
  o.d.units[0].X = Eigen::MatrixXd(3, 2);
  o.d.units[0].X << 1, 0.3, 1, -1.2, 1, 2.0;
  o.d.units[0].Z = Eigen::MatrixXd::Ones(3, 1);
  o.d.k = 2;
  o.s.beta = Eigen::VectorXd::Zero(2);
  o.s.nu = {Eigen::Vector3d(0.3, 0.8, 1.4)};
  o.s.h = {Eigen::Vector3d(0.2, 0.0, 0.5)};
  o.s.gamma = 0.4;
  o.pr.beta0 = Eigen::VectorXd::Zero(2);
  o.pr.B0 = 1e14 * Eigen::MatrixXd::Identity(2, 2);
  const double p0 = 0.3;
  const GalConstants k = gal_constants(p0, o.s.gamma);
  const auto& u = o.d.units[0];
  Eigen::MatrixXd V = u.Z * o.s.omega * u.Z.transpose();
  Eigen::VectorXd w(3);
  for (int t = 0; t < 3; ++t) {
    V(t, t) += o.s.sigma * k.B * o.s.nu[0][t];
    w[t] = u.y[t] - k.A * o.s.nu[0][t] - k.C * std::abs(o.s.gamma) * o.s.h[0][t];
  }
  const Eigen::MatrixXd Vi = V.inverse();
  const Eigen::VectorXd gls = (u.X.transpose() * Vi * u.X).ldlt().solve(u.X.transpose() * Vi * w);
  const Eigen::VectorXd m = beta_conditional(o.s, o.d, o.pr, p0).mean();
  CHECK(std::abs(m[0] - gls[0]) < 1e-10);
  CHECK(std::abs(m[1] - gls[1]) < 1e-10);
}

TEST_CASE("beta draws average to the conditional mean") {
  OneObs o = one_obs(2.0, 1.0 / 8.0, 0.5);
  const double mean = beta_conditional(o.s, o.d, o.pr, 0.5).mean()[0];
  RngStream rng(3, 1);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = step_beta(o.s, o.d, o.pr, 0.5, rng)[0];
  const auto ms = mean_se(xs);
  CHECK(std::abs(ms.mean - mean) < 3.0 * ms.se);
}

TEST_CASE("alpha conditional: scalar arithmetic and flat limit") {
  OneObs o = one_obs(2.0, 1.0 / 8.0, 1.0);
  const Eigen::MatrixXd oi = Eigen::MatrixXd::Identity(1, 1);
  const NormalConditional c = alpha_conditional(o.s, o.d, 0, 0.5, oi);
  CHECK(1.0 / c.precision(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.mean()[0] == doctest::Approx(1.0).epsilon(1e-12));

  o.d.units[0].y = Eigen::Vector2d(2.0, 3.0);
  o.d.units[0].X = Eigen::MatrixXd::Ones(2, 1);
  o.d.units[0].Z = o.d.units[0].X;
  o.s.nu = {Eigen::Vector2d(1.0 / 8.0, 3.0 / 8.0)};
  o.s.h = {Eigen::Vector2d::Zero()};
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(1, 1, 1e-8);
  // GLS effect with weights 1 and 1/3
  const double gls = (2.0 + 3.0 / 3.0) / (1.0 + 1.0 / 3.0);
  CHECK(std::abs(alpha_conditional(o.s, o.d, 0, 0.5, flat).mean()[0] - gls) < 1e-6);
}

TEST_CASE("Omega and phi2 conditional arithmetic") {
  ChainState s;
  s.alpha = Eigen::MatrixXd(2, 1);
  s.alpha << 1.0, 2.0;
  PriorSpec pr;
  pr.heterogeneity = IwPrior{5.0, Eigen::MatrixXd::Identity(1, 1)};
  const OmegaConditional c = omega_conditional(s, pr);
  CHECK_FALSE(c.inverse_gamma);
  CHECK(c.df == doctest::Approx(7.0));
  CHECK(c.scale(0, 0) == doctest::Approx(6.0));

  s.alpha = Eigen::MatrixXd::Ones(3, 1);
  pr.heterogeneity = IgPrior{2.0, 2.0};
  const OmegaConditional g = omega_conditional(s, pr);
  CHECK(g.inverse_gamma);
  CHECK(2.0 * g.shape == doctest::Approx(5.0));
  CHECK(2.0 * g.rate == doctest::Approx(5.0));
}

TEST_CASE("nu coefficients and draws") {
  const GalConstants k = gal_constants(0.5, 0.0);
  const GigCoefficients c = nu_coefficients(2.0, 1.0, k);
  CHECK(c.chi == doctest::Approx(0.5));
  CHECK(c.psi == doctest::Approx(2.0));
  RngStream rng(4, 1);
  std::vector<double> xs(1000000);
  for (auto& x : xs) x = draw_gig_half(c.chi, c.psi, rng);
  const auto ms = mean_se(xs);
  const double truth = std::sqrt(c.chi / c.psi) * (1.0 + 1.0 / std::sqrt(c.chi * c.psi));
  CHECK(std::abs(ms.mean - truth) < 3.0 * ms.se);

  const GigCoefficients z = nu_coefficients(0.0, 1.0, k);
  CHECK(z.chi > 0.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = draw_gig_half(z.chi, z.psi, rng);
    CHECK_UNARY(std::isfinite(v));
    CHECK(v > 0.0);
  }
}

TEST_CASE("h conditional arithmetic") {
  GalConstants k{0.5, 0.0, 8.0, 2.0};
  const HalfNormalParams hp = h_conditional(4.0, 1.0, 1.0, 1.0, k);
  CHECK(hp.var == doctest::Approx(2.0 / 3.0));
  CHECK(hp.mean == doctest::Approx(2.0 / 3.0));
  const HalfNormalParams h0 = h_conditional(1.7, 0.6, 1.3, 0.0, gal_constants(0.3, 0.0));
  CHECK(h0.mean == doctest::Approx(0.0));
  CHECK(h0.var == doctest::Approx(1.69));
}

TEST_CASE("h draws grow with the residual") {
  GalConstants k = gal_constants(0.25, 0.5);
  RngStream rng(6, 1);
  const HalfNormalParams a = h_conditional(0.0, 1.0, 1.0, 0.5, k);
  const HalfNormalParams b = h_conditional(k.C > 0 ? 5.0 : -5.0, 1.0, 1.0, 0.5, k);
  std::vector<double> xa(100000), xb(100000);
  for (auto& x : xa) x = draw_halfnormal(a.mean, a.var, rng);
  for (auto& x : xb) x = draw_halfnormal(b.mean, b.var, rng);
  // Mann-Whitney by sorting the pooled sample
  std::vector<std::pair<double, int>> all;
  for (double x : xa) all.push_back({x, 0});
  for (double x : xb) all.push_back({x, 1});
  std::sort(all.begin(), all.end());
  double rank_b = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].second == 1) rank_b += i + 1.0;
  }
  const double n = 100000.0;
  const double u = rank_b - n * (n + 1.0) / 2.0;
  const double z = (u - n * n / 2.0) / std::sqrt(n * n * (2.0 * n + 1.0) / 12.0);
  CHECK(z > 3.0);
}

TEST_CASE("full conditional kernels on the tiny model") {
  for (const auto& c : flexqr::testing::run_kernel_checks(100000)) {
    INFO(c.step << " p=" << c.pvalue);
    CHECK(c.pvalue > 0.001);
  }
}
