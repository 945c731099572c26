#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <vector>

#include "flexqr/errors.hpp"
#include "flexqr/gal.hpp"
#include "support.hpp"

using namespace flexqr;

namespace {

// g(gamma) evaluated directly, without the library's log-space path.
double g_direct(double x) {
  return boost::math::erfc(std::abs(x) / std::sqrt(2.0)) * std::exp(0.5 * x * x);
}

double bisect_oracle(double target, double lo, double hi) {
  // g is decreasing in |x| on the positive half-line.
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g_direct(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Independent quadrature: exp-sinh over each half-line.
double total_mass(const GalParams& gp) {
  boost::math::quadrature::exp_sinh<double> es;
  auto f = [&](double s) { return std::exp(gal_logpdf(gp, s)); };
  const double right = es.integrate([&](double t) { return f(gp.mu + t); }, 1e-14);
  const double left = es.integrate([&](double t) { return f(gp.mu - t); }, 1e-14);
  return left + right;
}

std::vector<GalParams> grid() {
  std::vector<GalParams> out;
  for (double p0 : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const auto b = gal_bounds(p0);
    for (double gamma : {0.0, 0.9 * b.L, 0.5 * b.U}) out.push_back({0.0, 1.0, p0, gamma});
  }
  return out;
}

}  // namespace

TEST_CASE("bounds are symmetric at the median and solve g") {
  const auto b = gal_bounds(0.5);
  CHECK(b.U == doctest::Approx(-b.L).epsilon(1e-12));
  CHECK(b.U == doctest::Approx(bisect_oracle(0.5, 0.0, 10.0)).epsilon(1e-11));
  const auto q = gal_bounds(0.25);
  CHECK(std::abs(g_direct(q.L) - 0.75) < 1e-10);
  CHECK(std::abs(g_direct(q.U) - 0.25) < 1e-10);
  CHECK(q.L < 0.0);
  CHECK(q.U > 0.0);
  CHECK(q.L == doctest::Approx(-0.3931).epsilon(1e-3));
  CHECK(q.U == doctest::Approx(2.9013).epsilon(1e-3));
}

TEST_CASE("constants at gamma zero reduce to the AL ones") {
  const auto k = gal_constants(0.25, 0.0);
  CHECK(k.p == 0.25);
  CHECK(k.A == doctest::Approx(0.5 / 0.1875));
  CHECK(k.B == doctest::Approx(2.0 / 0.1875));
}

TEST_CASE("AL density at the mode") {
  CHECK(gal_logpdf({0.0, 1.0, 0.5, 0.0}, 0.0) == doctest::Approx(std::log(0.25)).epsilon(1e-14));
}

TEST_CASE("density integrates to one on the grid") {
  for (const auto& gp : grid()) {
    CAPTURE(gp.p0);
    CAPTURE(gp.gamma);
    CHECK(std::abs(total_mass(gp) - 1.0) < 1e-6);
  }
  GalParams gp{0.0, 1.0, 0.25, 0.5};
  CHECK(std::abs(total_mass(gp) - 1.0) < 1e-6);
}

TEST_CASE("location-scale identity") {
  for (double s : {-7.0, -1.0, 0.0, 0.3, 2.0, 5.0, 14.0}) {
    const double lhs = gal_logpdf({2.0, 3.0, 0.25, 0.5}, s);
    const double rhs = gal_logpdf({0.0, 1.0, 0.25, 0.5}, (s - 2.0) / 3.0) - std::log(3.0);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("quantile-fixed identity on the grid") {
  for (const auto& gp : grid()) {
    CAPTURE(gp.p0);
    CAPTURE(gp.gamma);
    CHECK(std::abs(gal_cdf(gp, gp.mu) - gp.p0) < 1e-6);
  }
}

TEST_CASE("cdf far-tail proxies for a moderate case") {
  GalParams gp{1.0, 2.0, 0.5, 0.0};
  CHECK(gal_cdf(gp, gp.mu - 50 * gp.sigma) < 1e-8);
  CHECK(gal_cdf(gp, gp.mu + 50 * gp.sigma) > 1 - 1e-8);
}

TEST_CASE("AL limit of the GAL density") {
  for (double p0 : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    for (double gamma : {1e-6, -1e-6}) {
      double gap = 0.0;
      for (double s = -15.0; s <= 15.0; s += 0.01) {
        const double al = p0 * (1 - p0) * std::exp(-s * (p0 - (s < 0 ? 1.0 : 0.0)));
        gap = std::max(gap, std::abs(std::exp(gal_logpdf({0, 1, p0, gamma}, s)) - al));
      }
      CAPTURE(p0);
      CHECK(gap < 1e-4);
    }
  }
}

TEST_CASE("skewness anchors") {
  CHECK(std::abs(gal_moments({0, 1, 0.25, 1.20}).skewness + 0.06) < 0.01);
  CHECK(std::abs(gal_moments({0, 1, 0.25, 0.0}).skewness - 1.64) < 0.01);
  CHECK(std::abs(gal_moments({0, 1, 0.5, 0.0}).skewness) < 1e-6);
  // AL closed form: mean (1-2p)/(p(1-p)), variance (1-2p+2p^2)/(p^2(1-p)^2).
  const auto m = gal_moments({0, 1, 0.25, 0.0});
  CHECK(m.mean == doctest::Approx(0.5 / 0.1875).epsilon(1e-8));
  CHECK(m.var == doctest::Approx((1 - 0.5 + 0.125) / (0.1875 * 0.1875)).epsilon(1e-8));
}

TEST_CASE("mixture draws match the quadrature cdf") {
  RngStream rng(21, 0);
  const GalParams gp{0.0, 1.0, 0.25, 0.5};
  std::vector<double> eps(1000000);
  long below = 0;
  for (auto& e : eps) {
    e = gal_draw_mixture(gp, rng).first;
    below += e <= gp.mu;
  }
  const double frac = static_cast<double>(below) / eps.size();
  CHECK(std::abs(frac - 0.25) < 3 * std::sqrt(0.25 * 0.75 / eps.size()));
  std::sort(eps.begin(), eps.end());
  const auto cdf = gal_cdf_sorted(gp, eps);
  CHECK(flexqr::testing::ks_one_sample(cdf) < 0.002);
}

TEST_CASE("mixture latents respect the transformation") {
  RngStream rng(22, 0);
  const GalParams gp{0.0, 2.5, 0.25, 0.5};
  for (int i = 0; i < 100; ++i) {
    const auto [e, lat] = gal_draw_mixture(gp, rng);
    CHECK(lat.nu == doctest::Approx(2.5 * lat.omega));
    CHECK(lat.h == doctest::Approx(2.5 * lat.s));
    CHECK(lat.h >= 0.0);
  }
}

TEST_CASE("gamma zero mixture equals the AL mixture in distribution") {
  RngStream a(23, 0), b(23, 1);
  const double p = 0.25, A = (1 - 2 * p) / (p * (1 - p)), B = 2 / (p * (1 - p));
  std::vector<double> x(1000000), y(1000000);
  for (auto& v : x) v = gal_draw_mixture({0, 1, p, 0.0}, a).first;
  for (auto& v : y) {
    const double w = b.exponential();
    v = A * w + std::sqrt(B * w) * b.normal();
  }
  CHECK(flexqr::testing::ks_two_sample(x, y) < 0.002);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(gal_logpdf({0, -1, 0.5, 0}, 0), DomainError);
  CHECK_THROWS_AS(gal_logpdf({0, 1, 1.5, 0}, 0), DomainError);
  CHECK_THROWS_AS(gal_logpdf({0, 1, 0.5, 2.0}, 0), DomainError);
}
