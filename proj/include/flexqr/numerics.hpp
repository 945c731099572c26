#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>

namespace flexqr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double norm_cdf(double x);
double norm_pdf(double x);
/// log Phi(x), accurate far into the lower tail.
double log_norm_cdf(double x);
/// log(Phi(a) - Phi(b)) for a >= b; -inf when a == b.
double log_diff_norm_cdf(double a, double b);

double log_add_exp(double a, double b);
double log_sum_exp(std::span<const double> xs);

/// Running log of the mean of exp(x_j), rescaled as the maximum moves.
class LogMeanExp {
 public:
  void add(double log_value);
  double value() const;
  /// Variance of the mean of exp(x_j) relative to its square, divided by
  /// the count: the delta-method variance of value().
  double log_scale_variance() const;
  long count() const { return count_; }

 private:
  double max_ = -kInf;
  double sum_ = 0.0;     // sum of exp(x - max_)
  double sum_sq_ = 0.0;  // sum of exp(2 (x - max_))
  long count_ = 0;
};

/// Adaptive Gauss-Kronrod on a finite interval. Throws NumericalError when
/// the error estimate exceeds abs_tol after max_depth bisections.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10, unsigned max_depth = 18,
                 double* error = nullptr);

/// Integral of f over [a, a + infinity) (direction > 0) or (-infinity, a]
/// (direction < 0). `scale` is the characteristic decay length of f.
double integrate_half_line(const std::function<double(double)>& f, double a,
                           int direction, double scale, double abs_tol = 1e-10,
                           double* error = nullptr);

/// P(X > h, Y > k) for a standard bivariate normal with correlation r.
double bvn_upper(double h, double k, double r);

}  // namespace flexqr
