#include "flexqr/gal.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

#include "flexqr/errors.hpp"
#include "flexqr/numerics.hpp"
#include "flexqr/samplers.hpp"

namespace flexqr {

double gal_log_g(double gamma) {
  return std::log(2.0) + log_norm_cdf(-std::abs(gamma)) + 0.5 * gamma * gamma;
}

namespace {

// Positive root of log g(x) = log(target), target in (0, 1).
double g_root(double target) {
  const double lt = std::log(target);
  auto f = [lt](double x) { return gal_log_g(x) - lt; };
  double hi = 1.0;
  while (f(hi) > 0.0) hi *= 2.0;
  auto tol = [](double a, double b) { return std::abs(b - a) < 1e-13; };
  const auto r = boost::math::tools::bisect(f, 0.0, hi, tol);
  return 0.5 * (r.first + r.second);
}

void check_p0(double p0) {
  if (!(p0 > 0.0 && p0 < 1.0)) {
    std::ostringstream msg;
    msg << "quantile p0 must lie in (0, 1), got " << p0;
    throw DomainError(msg.str());
  }
}

}  // namespace

GalBounds gal_bounds(double p0) {
  check_p0(p0);
  return {-g_root(1.0 - p0), g_root(p0)};
}

GalConstants gal_constants(double p0, double gamma) {
  check_p0(p0);
  GalConstants k;
  const double ind_neg = gamma < 0.0 ? 1.0 : 0.0;
  const double ind_pos = gamma > 0.0 ? 1.0 : 0.0;
  if (std::abs(gamma) <= kAlThreshold) {
    k.p = p0;
  } else {
    k.p = ind_neg + (p0 - ind_neg) / std::exp(gal_log_g(gamma));
  }
  k.A = (1.0 - 2.0 * k.p) / (k.p * (1.0 - k.p));
  k.B = 2.0 / (k.p * (1.0 - k.p));
  k.C = 1.0 / (ind_pos - k.p);
  return k;
}

GalDerived gal_derived(const GalParams& params) {
  gal_validate(params);
  const GalBounds b = gal_bounds(params.p0);
  const GalConstants k = gal_constants(params.p0, params.gamma);
  return {k.p, k.A, k.B, k.C, b.L, b.U};
}

void gal_validate(const GalParams& params) {
  check_p0(params.p0);
  if (!(params.sigma > 0.0) || !std::isfinite(params.sigma) || !std::isfinite(params.mu)) {
    std::ostringstream msg;
    msg << "GAL scale must be positive and finite, got sigma=" << params.sigma;
    throw DomainError(msg.str());
  }
  const GalBounds b = gal_bounds(params.p0);
  if (!(params.gamma > b.L && params.gamma < b.U)) {
    std::ostringstream msg;
    msg << "GAL shape gamma=" << params.gamma << " outside (" << b.L << ", " << b.U
        << ") for p0=" << params.p0;
    throw DomainError(msg.str());
  }
}

GalKernel::GalKernel(double sigma, double p0, double gamma)
    : sigma_(sigma), p0_(p0), gamma_(gamma), abs_gamma_(std::abs(gamma)) {
  gal_validate({0.0, sigma, p0, gamma});
  log_sigma_ = std::log(sigma);
  k_ = gal_constants(p0, gamma);
  al_ = abs_gamma_ <= kAlThreshold;
  pp_ = k_.p - (gamma > 0.0 ? 1.0 : 0.0);
  pm_ = k_.p - (gamma < 0.0 ? 1.0 : 0.0);
  ratio_ = al_ ? 0.0 : pm_ / pp_;
  log_front_ = al_ ? std::log(p0 * (1.0 - p0)) : std::log(2.0 * k_.p * (1.0 - k_.p));
}

double GalKernel::logpdf_standard(double z) const {
  if (al_) return log_front_ - z * (p0_ - (z < 0.0 ? 1.0 : 0.0));
  const bool same_side = z / gamma_ > 0.0;
  const double half_g2 = 0.5 * gamma_ * gamma_;
  double t1 = -kInf;
  if (same_side) {
    const double b = ratio_ * abs_gamma_;
    const double a = -z * pp_ / abs_gamma_ + b;
    if (a > b) t1 = log_diff_norm_cdf(a, b) - z * pm_ + half_g2 * ratio_ * ratio_;
  }
  const double shift = same_side ? z * pp_ / abs_gamma_ : 0.0;
  const double t2 = log_norm_cdf(-abs_gamma_ + shift) - z * pp_ + half_g2;
  return log_front_ + log_add_exp(t1, t2);
}

double GalKernel::logpdf(double err) const {
  return logpdf_standard(err / sigma_) - log_sigma_;
}

double gal_logpdf(const GalParams& params, double s) {
  const GalKernel kernel(params.sigma, params.p0, params.gamma);
  return kernel.logpdf(s - params.mu);
}

namespace {

// Length scales of the standardized density on each side of zero: the
// exponential part decays at rate 1-p on the left and p on the right, and
// the half-normal part C|gamma|s adds a wide shoulder on the side of C.
struct SideScales {
  double inner, outer;
};

SideScales side_scales(const GalKernel& kernel, int direction) {
  const auto& k = kernel.constants();
  const double gamma = kernel.gamma();
  const double expo = direction > 0 ? 1.0 / k.p : 1.0 / (1.0 - k.p);
  const bool shoulder_here = direction > 0 ? gamma > 0.0 : gamma < 0.0;
  const double shoulder = shoulder_here ? std::abs(k.C * gamma) : 0.0;
  return {std::min(expo, std::max(shoulder, 1.0)), std::max(expo, shoulder)};
}

// Integral of f over [from, inf) (direction > 0) or (-inf, from] relative to
// the standardized density, with geometric breakpoints from the inner to the
// outer scale before the mapped tail.
template <class F>
double side_integral(const GalKernel& kernel, F&& f, double from, int direction,
                     double tol) {
  const SideScales sc = side_scales(kernel, direction);
  const double sgn = direction > 0 ? 1.0 : -1.0;
  double acc = 0.0;
  double prev = 0.0;
  double step = sc.inner;
  // Offsets are measured from zero (the kink); `from` may sit inside.
  const double start = sgn * from;
  for (int i = 0; i < 64 && prev < 8.0 * sc.outer; ++i) {
    const double next = prev + step;
    const double a = std::max(prev, start), b = next;
    if (b > a) {
      acc += sgn > 0 ? integrate(f, a, b, tol) : integrate(f, -b, -a, tol);
    }
    prev = next;
    step *= 2.0;
  }
  const double tail_from = std::max(prev, start);
  return acc + integrate_half_line(f, sgn * tail_from, direction, sc.outer, tol);
}

// Integral of z^power f(z) over (-inf, 0] or [0, inf) of the standardized
// density.
double half_moment(const GalKernel& kernel, int power, int direction, double tol) {
  auto f = [&](double z) {
    const double d = std::exp(kernel.logpdf_standard(z));
    return power == 0 ? d : std::pow(z, power) * d;
  };
  return side_integral(kernel, f, 0.0, direction, tol);
}

}  // namespace

double gal_cdf(const GalParams& params, double s) {
  const GalKernel kernel(params.sigma, params.p0, params.gamma);
  const double z = (s - params.mu) / params.sigma;
  if (z == kInf) return 1.0;
  if (z == -kInf) return 0.0;
  auto f = [&](double t) { return std::exp(kernel.logpdf_standard(t)); };
  double value;
  if (z <= 0.0) {
    value = side_integral(kernel, f, z, -1, 1e-11);
  } else {
    value = side_integral(kernel, f, 0.0, -1, 1e-11) + integrate(f, 0.0, z, 1e-10);
  }
  return std::clamp(value, 0.0, 1.0);
}

std::vector<double> gal_cdf_sorted(const GalParams& params,
                                   std::span<const double> sorted) {
  std::vector<double> out(sorted.size());
  if (sorted.empty()) return out;
  const GalKernel kernel(params.sigma, params.p0, params.gamma);
  using boost::math::quadrature::gauss;
  auto f = [&](double t) { return std::exp(kernel.logpdf_standard(t)); };
  auto piece = [&](double a, double b) {
    if (b <= a) return 0.0;
    if (a < 0.0 && b > 0.0) {
      return gauss<double, 10>::integrate(f, a, 0.0) + gauss<double, 10>::integrate(f, 0.0, b);
    }
    return gauss<double, 10>::integrate(f, a, b);
  };
  double prev = (sorted[0] - params.mu) / params.sigma;
  double acc = gal_cdf(params, sorted[0]);
  out[0] = acc;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double z = (sorted[i] - params.mu) / params.sigma;
    if (z < prev) throw DomainError("gal_cdf_sorted: input not ascending");
    // Long gaps go through the adaptive integrator.
    acc += (z - prev > 0.5) ? (prev < 0.0 && z > 0.0
                                   ? integrate(f, prev, 0.0, 1e-12) + integrate(f, 0.0, z, 1e-12)
                                   : integrate(f, prev, z, 1e-12))
                            : piece(prev, z);
    out[i] = std::min(acc, 1.0);
    prev = z;
  }
  return out;
}

GalMoments gal_moments(const GalParams& params) {
  const GalKernel kernel(params.sigma, params.p0, params.gamma);
  double m[4];
  for (int k = 0; k < 4; ++k) {
    m[k] = half_moment(kernel, k, -1, 1e-11) + half_moment(kernel, k, 1, 1e-11);
  }
  // Standardized-scale moments; rescale at the end.
  const double mean = m[1] / m[0];
  const double second = m[2] / m[0];
  const double third = m[3] / m[0];
  const double var = second - mean * mean;
  const double mu3 = third - 3.0 * mean * second + 2.0 * mean * mean * mean;
  if (!(var > 0.0)) throw NumericalError("gal_moments: non-positive variance");
  GalMoments out;
  out.mean = params.mu + params.sigma * mean;
  out.var = params.sigma * params.sigma * var;
  out.skewness = mu3 / std::pow(var, 1.5);
  return out;
}

std::pair<double, MixtureLatents> gal_draw_mixture(const GalParams& params,
                                                   RngStream& rng) {
  const GalConstants k = gal_constants(params.p0, params.gamma);
  MixtureLatents lat;
  lat.omega = rng.exponential();
  lat.s = std::abs(rng.normal());
  lat.u = rng.normal();
  lat.nu = params.sigma * lat.omega;
  lat.h = params.sigma * lat.s;
  const double eps = params.mu + params.sigma * (k.A * lat.omega +
                                                 k.C * std::abs(params.gamma) * lat.s +
                                                 std::sqrt(k.B * lat.omega) * lat.u);
  return {eps, lat};
}

}  // namespace flexqr
