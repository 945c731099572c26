#include "flexqr/numerics.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <numbers>
#include <sstream>

#include "flexqr/errors.hpp"

namespace flexqr {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double log_norm_cdf(double x) {
  if (x == -kInf) return -kInf;
  if (x >= 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Mills-ratio series; the omitted terms are below 1e-15 relative here.
  const double z2 = 1.0 / (x * x);
  double series = 1.0, term = 1.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2.0 * k - 1.0) * z2;
    series += term;
  }
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log(series);
}

double log_diff_norm_cdf(double a, double b) {
  if (a < b) return std::numeric_limits<double>::quiet_NaN();
  if (a == b) return -kInf;
  if (b > 0.0) {
    // Both in the upper tail: Phi(a) - Phi(b) = Phi(-b) - Phi(-a).
    const double hi = log_norm_cdf(-b);
    const double lo = log_norm_cdf(-a);
    return hi + std::log1p(-std::exp(lo - hi));
  }
  const double hi = log_norm_cdf(a);
  const double lo = log_norm_cdf(b);
  return hi + std::log1p(-std::exp(lo - hi));
}

double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_sum_exp(std::span<const double> xs) {
  double m = -kInf;
  for (double x : xs) m = std::max(m, x);
  if (m == -kInf || m == kInf) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

void LogMeanExp::add(double x) {
  ++count_;
  if (x == -kInf) return;
  if (x > max_) {
    const double shrink = std::exp(max_ - x);
    sum_ *= shrink;
    sum_sq_ *= shrink * shrink;
    max_ = x;
  }
  const double w = std::exp(x - max_);
  sum_ += w;
  sum_sq_ += w * w;
}

double LogMeanExp::value() const {
  if (count_ == 0 || sum_ == 0.0) return -kInf;
  return max_ + std::log(sum_ / static_cast<double>(count_));
}

double LogMeanExp::log_scale_variance() const {
  if (count_ < 2 || sum_ == 0.0) return kInf;
  const double n = static_cast<double>(count_);
  const double mean = sum_ / n;
  const double var = std::max(0.0, (sum_sq_ / n - mean * mean) * n / (n - 1.0));
  return var / (n * mean * mean);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, unsigned max_depth, double* error) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  double l1 = 0.0;
  const double value =
      gauss_kronrod<double, 21>::integrate(f, a, b, max_depth, 1e-13, &err, &l1);
  if (error) *error = err;
  if (!std::isfinite(value) || err > std::max(abs_tol, 1e-12 * l1)) {
    std::ostringstream msg;
    msg << "quadrature did not converge on [" << a << ", " << b
        << "]: estimate " << value << ", error " << err << ", tolerance " << abs_tol;
    throw NumericalError(msg.str());
  }
  return value;
}

double integrate_half_line(const std::function<double(double)>& f, double a,
                           int direction, double scale, double abs_tol,
                           double* error) {
  const double sgn = direction > 0 ? 1.0 : -1.0;
  // x = a + sgn * scale * t / (1 - t), t in [0, 1).
  auto mapped = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double u = t / (1.0 - t);
    const double jac = scale / ((1.0 - t) * (1.0 - t));
    const double v = f(a + sgn * scale * u);
    return v == 0.0 ? 0.0 : v * jac;
  };
  return integrate(mapped, 0.0, 1.0, abs_tol, 22, error);
}

namespace {

// Gauss-Legendre nodes on (-1, 1), positive half, for 6, 12 and 20 points.
constexpr std::array<double, 3> kW6 = {0.1713244923791705, 0.3607615730481384,
                                       0.4679139345726904};
constexpr std::array<double, 3> kX6 = {0.9324695142031522, 0.6612093864662647,
                                       0.2386191860831970};
constexpr std::array<double, 6> kW12 = {
    0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
    0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
constexpr std::array<double, 6> kX12 = {
    0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
    0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
constexpr std::array<double, 10> kW20 = {
    0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
    0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
    0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
    0.1527533871307259};
constexpr std::array<double, 10> kX20 = {
    0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
    0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
    0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
    0.07652652113349733};

}  // namespace

// Drezner-Wesolowsky as refined by Genz (bvnu).
double bvn_upper(double h, double k, double r) {
  if (h == kInf || k == kInf) return 0.0;
  if (h == -kInf) return k == -kInf ? 1.0 : norm_cdf(-k);
  if (k == -kInf) return norm_cdf(-h);
  if (r == 0.0) return norm_cdf(-h) * norm_cdf(-k);

  std::span<const double> w, x;
  if (std::abs(r) < 0.3) {
    w = kW6;
    x = kX6;
  } else if (std::abs(r) < 0.75) {
    w = kW12;
    x = kX12;
  } else {
    w = kW20;
    x = kX20;
  }
  const double two_pi = 2.0 * std::numbers::pi;
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r) / 2.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const double sn = std::sin(asr * (1.0 + sgn * x[i]));
        bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    bvn = bvn * asr / two_pi + norm_cdf(-h) * norm_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (std::abs(r) < 1.0) {
      const double as = 1.0 - r * r;
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      double asr = -(bs / as + hk) / 2.0;
      if (asr > -100.0) {
        bvn = a * std::exp(asr) *
              (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      }
      if (hk > -160.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(two_pi) * norm_cdf(-b / a);
        bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a /= 2.0;
      double sum = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        for (double sgn : {-1.0, 1.0}) {
          const double xi = a * (1.0 + sgn * x[i]);
          const double xs = xi * xi;
          asr = -(bs / xs + hk) / 2.0;
          if (asr <= -100.0) continue;
          const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
          const double rs = std::sqrt(1.0 - xs);
          const double ep = std::exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
          sum += w[i] * std::exp(asr) * (sp - ep);
        }
      }
      bvn = (a * sum - bvn) / two_pi;
    }
    if (r > 0.0) {
      bvn += norm_cdf(-std::max(h, k));
    } else {
      bvn = -bvn + std::max(0.0, norm_cdf(-h) - norm_cdf(-k));
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace flexqr
