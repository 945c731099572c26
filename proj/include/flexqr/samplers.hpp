#pragma once

#include <Eigen/Dense>
#include <utility>

#include "flexqr/rng.hpp"

namespace flexqr {

/// GIG(1/2) with density proportional to x^{-1/2} exp(-(chi/x + psi x)/2).
/// `chi` multiplies 1/x and `psi` multiplies x.
double draw_gig_half(double chi, double psi, RngStream& rng);

/// Normal(mu, sd^2) truncated to (lo, hi); either bound may be infinite.
double draw_truncated_normal(double mu, double sd, double lo, double hi,
                             RngStream& rng);

/// Normal(mu, var) truncated to [0, inf).
double draw_halfnormal(double mu, double var, RngStream& rng);

/// log P(lo < X < hi) for X ~ N2(mean, cov).
double btn_log_mass(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov,
                    const Eigen::Vector2d& lo, const Eigen::Vector2d& hi);

/// Log density of the rectangle-truncated bivariate normal at x
/// (normalizer included); -inf outside the rectangle.
double btn_log_density(const Eigen::Vector2d& x, const Eigen::Vector2d& mean,
                       const Eigen::Matrix2d& cov, const Eigen::Vector2d& lo,
                       const Eigen::Vector2d& hi);

Eigen::Vector2d draw_btn_rect(const Eigen::Vector2d& mean,
                              const Eigen::Matrix2d& cov,
                              const Eigen::Vector2d& lo,
                              const Eigen::Vector2d& hi, RngStream& rng);

/// Inverse Wishart with density proportional to
/// |W|^{-(df+l+1)/2} exp(-tr(scale W^{-1})/2).
Eigen::MatrixXd draw_invwishart(double df, const Eigen::MatrixXd& scale,
                                RngStream& rng);
double log_invwishart_pdf(const Eigen::MatrixXd& w, double df,
                          const Eigen::MatrixXd& scale);

/// Inverse gamma with density proportional to x^{-shape-1} exp(-rate/x).
double draw_invgamma(double shape, double rate, RngStream& rng);
double log_invgamma_pdf(double x, double shape, double rate);

/// Draw from N(P^{-1} b, P^{-1}) given the precision P and b.
Eigen::VectorXd draw_mvn_precision(const Eigen::MatrixXd& precision,
                                   const Eigen::VectorXd& b, RngStream& rng);
Eigen::VectorXd draw_mvn(const Eigen::VectorXd& mean,
                         const Eigen::MatrixXd& cov, RngStream& rng);
double log_mvn_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                   const Eigen::MatrixXd& cov);

}  // namespace flexqr
