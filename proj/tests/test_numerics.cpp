#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <vector>

#include "flexqr/numerics.hpp"

using namespace flexqr;

TEST_CASE("log_norm_cdf matches direct evaluation and the far tail") {
  boost::math::normal nd;
  for (double x : {-7.0, -3.0, -1.0, 0.0, 0.5, 2.0, 6.0}) {
    CHECK(log_norm_cdf(x) == doctest::Approx(std::log(boost::math::cdf(nd, x))).epsilon(1e-13));
  }
  // Far tail against the long-double erfc.
  for (double x : {-20.0, -29.9, -30.1, -40.0}) {
    const long double ref = std::log(0.5L * std::erfc(-static_cast<long double>(x) / std::sqrt(2.0L)));
    CHECK(log_norm_cdf(x) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
  }
  CHECK(std::isfinite(log_norm_cdf(-1e4)));
  CHECK(log_norm_cdf(-1e4) < -4.9e7);
}

TEST_CASE("log_diff_norm_cdf") {
  CHECK(log_diff_norm_cdf(1.0, -1.0) ==
        doctest::Approx(std::log(norm_cdf(1.0) - norm_cdf(-1.0))).epsilon(1e-13));
  CHECK(log_diff_norm_cdf(9.0, 8.0) ==
        doctest::Approx(std::log(0.5 * std::erfc(8.0 / std::sqrt(2.0)) -
                                 0.5 * std::erfc(9.0 / std::sqrt(2.0))))
            .epsilon(1e-12));
  CHECK(log_diff_norm_cdf(2.0, 2.0) == -kInf);
  CHECK(std::isfinite(log_diff_norm_cdf(-38.0, -39.0)));
}

TEST_CASE("log_sum_exp and log_add_exp") {
  std::vector<double> xs{1000.0, 1000.0};
  CHECK(log_sum_exp(xs) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_add_exp(-kInf, 3.0) == 3.0);
  CHECK(log_add_exp(0.0, 0.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("LogMeanExp is order independent and handles large offsets") {
  LogMeanExp a, b;
  const std::vector<double> xs{-800.0, -801.0, -799.5, -850.0};
  for (double x : xs) a.add(x);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) b.add(*it);
  double direct = 0.0;
  for (double x : xs) direct += std::exp(x + 800.0);
  CHECK(a.value() == doctest::Approx(std::log(direct / 4.0) - 800.0).epsilon(1e-13));
  CHECK(a.value() == doctest::Approx(b.value()).epsilon(1e-13));
  CHECK(a.log_scale_variance() > 0.0);
}

TEST_CASE("half-line integration of an exponential tail") {
  auto f = [](double x) { return std::exp(-x / 40.0) / 40.0; };
  CHECK(integrate_half_line(f, 0.0, 1, 40.0) == doctest::Approx(1.0).epsilon(1e-10));
  auto g = [](double x) { return std::exp(x); };
  CHECK(integrate_half_line(g, 0.0, -1, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("bvn_upper against a one-dimensional quadrature oracle") {
  // P(X > h, Y > k) = int_h^inf phi(x) Phi((r x - k) / sqrt(1 - r^2)) dx
  auto oracle = [](double h, double k, double r) {
    auto f = [&](double x) {
      return norm_pdf(x) * norm_cdf((r * x - k) / std::sqrt(1.0 - r * r));
    };
    using Q = boost::math::quadrature::gauss_kronrod<double, 61>;
    return Q::integrate(f, h, 40.0, 15, 1e-13);
  };
  for (double r : {-0.99, -0.95, -0.8, -0.5, -0.1, 0.0, 0.2, 0.6, 0.9, 0.93, 0.999}) {
    for (double h : {-2.0, -0.3, 0.0, 1.1, 3.0}) {
      for (double k : {-1.5, 0.0, 0.7, 2.5}) {
        CHECK(bvn_upper(h, k, r) == doctest::Approx(oracle(h, k, r)).epsilon(1e-8).scale(1e-3));
      }
    }
  }
  CHECK(bvn_upper(-kInf, -kInf, 0.3) == 1.0);
  CHECK(bvn_upper(0.0, -kInf, 0.3) == doctest::Approx(0.5));
  CHECK(bvn_upper(0.0, 0.0, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}
