#pragma once

#include <span>
#include <utility>
#include <vector>

#include "flexqr/rng.hpp"

namespace flexqr {

struct GalParams {
  double mu = 0.0;
  double sigma = 1.0;
  double p0 = 0.5;
  double gamma = 0.0;
};

/// Admissible shape interval (L, U) for quantile p0.
struct GalBounds {
  double L = 0.0;
  double U = 0.0;
};

/// Mixture constants that depend on (p0, gamma) only.
struct GalConstants {
  double p = 0.5;
  double A = 0.0;
  double B = 8.0;
  double C = -2.0;
};

struct GalDerived {
  double p, A, B, C, L, U;
};

struct MixtureLatents {
  double nu = 0.0;
  double h = 0.0;
  double omega = 0.0;
  double s = 0.0;
  double u = 0.0;
};

/// Below this |gamma| the AL closed form is used.
inline constexpr double kAlThreshold = 1e-8;

/// log g(gamma) with g(gamma) = 2 Phi(-|gamma|) exp(gamma^2 / 2).
double gal_log_g(double gamma);
GalBounds gal_bounds(double p0);
GalConstants gal_constants(double p0, double gamma);
GalDerived gal_derived(const GalParams& params);

/// Throws DomainError when sigma, p0 or gamma are out of range.
void gal_validate(const GalParams& params);

/// Log density of the quantile-fixed GAL (AL when |gamma| <= kAlThreshold).
double gal_logpdf(const GalParams& params, double s);

/// Log density of a fixed (sigma, p0, gamma), validated once. Used in loops.
class GalKernel {
 public:
  GalKernel(double sigma, double p0, double gamma);
  /// Log density of s - mu, i.e. the error term.
  double logpdf(double err) const;
  /// Log density of the standardized error err / sigma, without the
  /// -log(sigma) term.
  double logpdf_standard(double z) const;
  const GalConstants& constants() const { return k_; }
  double gamma() const { return gamma_; }

 private:
  double sigma_, log_sigma_, p0_, gamma_, abs_gamma_;
  GalConstants k_;
  double pp_, pm_, ratio_, log_front_;
  bool al_;
};

double gal_cdf(const GalParams& params, double s);

/// CDF at every point of an ascending sequence, by cumulative fixed-order
/// Gauss-Legendre over the gaps. Meant for KS statistics on large samples.
std::vector<double> gal_cdf_sorted(const GalParams& params,
                                   std::span<const double> sorted);

struct GalMoments {
  double mean = 0.0;
  double var = 0.0;
  double skewness = 0.0;
};

GalMoments gal_moments(const GalParams& params);

/// One draw from the normal-exponential-half-normal mixture.
std::pair<double, MixtureLatents> gal_draw_mixture(const GalParams& params,
                                                   RngStream& rng);

}  // namespace flexqr
