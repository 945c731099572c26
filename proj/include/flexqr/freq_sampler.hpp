#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flexqr/gal.hpp"
#include "flexqr/model.hpp"
#include "flexqr/rng.hpp"

namespace flexqr {

struct MhCalibration {
  Eigen::Matrix2d D_hat = Eigen::Matrix2d::Identity();
  double iota = 0.0;
  Eigen::VectorXd beta_pooled;
  double sigma_hat = 1.0;
  double gamma_hat = 0.0;
  double loglik_max = 0.0;
  std::vector<std::string> warnings;
};

/// Pooled OLS for beta, then the pooled (alpha = 0) GAL likelihood maximized
/// over (sigma, gamma) by Nelder-Mead from a 5-point restart grid. D_hat is
/// the negative inverse finite-difference Hessian, repaired to SPD if needed.
/// With `priors`, the sigma prior is added to the objective: the pooled
/// likelihood alone can increase without bound along sigma -> 0, gamma -> U.
MhCalibration calibrate_proposal(const PanelDataset& data, double p0,
                                 const PriorSpec* priors = nullptr);

/// Pooled OLS estimate on the stacked panel.
Eigen::VectorXd pooled_ols(const PanelDataset& data);

/// Sum of GAL log densities of the residuals plus log prior of sigma and
/// gamma; -inf outside (0, inf) x (L, U).
double freq_log_target(const std::vector<double>& resid, double sigma, double gamma, double p0,
                       const PriorSpec& priors, const GalBounds& bounds);

/// log of the MH acceptance probability for a move from `from` to `to`
/// under the rectangle-truncated normal proposal centred at the current
/// point, including the truncation normalizers.
double mh_log_accept(const Eigen::Vector2d& from, const Eigen::Vector2d& to, double target_from,
                     double target_to, const Eigen::Matrix2d& proposal_cov,
                     const GalBounds& bounds);

/// Log proposal density q(from, to).
double proposal_log_density(const Eigen::Vector2d& from, const Eigen::Vector2d& to,
                            const Eigen::Matrix2d& proposal_cov, const GalBounds& bounds);
Eigen::Vector2d draw_proposal(const Eigen::Vector2d& from, const Eigen::Matrix2d& proposal_cov,
                              const GalBounds& bounds, RngStream& rng);

struct MhStep {
  double sigma;
  double gamma;
  bool accepted;
};

MhStep step_sigma_gamma(const ChainState& s, const PanelDataset& data, const PriorSpec& priors,
                        const Eigen::Matrix2d& proposal_cov, double p0, RngStream& rng);

struct SweepControl {
  bool fix_beta = false;
  bool fix_sigma_gamma = false;
  bool fix_omega = false;
  /// Test-only: draw beta given alpha instead of marginally.
  bool unblocked = false;
  /// Redraw h with nu integrated out right after the (sigma, gamma) move.
  bool refresh_h = true;
  /// Called after every stored sweep.
  std::function<void(long sweep, const ChainState&)> observer;
};

/// One FREQ sweep; returns whether the MH move was accepted.
bool freq_sweep(ChainState& s, const PanelDataset& data, const PriorSpec& priors, double p0,
                const Eigen::Matrix2d& proposal_cov, const RngStream& base, long sweep,
                const SweepControl& control);

ChainState initial_state(const PanelDataset& data, const PriorSpec& priors,
                         const Eigen::VectorXd& beta, double sigma, double gamma);

struct FreqRunOptions {
  SweepControl control;
  std::optional<MhCalibration> calibration;
  std::optional<ChainState> initial;
  /// Fixed MH scale (skips the default and adaptation when set).
  std::optional<double> iota;
  std::uint64_t run_tag = 0;
};

ChainOutput run_freq(const PanelDataset& data, const PriorSpec& priors, const McmcConfig& cfg,
                     const FreqRunOptions& options = {});

}  // namespace flexqr
