#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "flexqr/model.hpp"
#include "flexqr/rng.hpp"

namespace flexqr {

/// Parameter point at which the marginal likelihood identity is evaluated.
struct ThetaStar {
  Eigen::VectorXd beta;
  double sigma = 1.0;
  double gamma = 0.0;
  Eigen::MatrixXd omega;
  double phi2 = 1.0;
};

struct MarglikOptions {
  /// Reduced-run lengths; 0 selects the number of stored main-chain draws.
  long M1 = 0;
  long M2 = 0;
  /// Burn-in of each reduced run; negative selects min(burn_in, 500).
  long reduced_burn_in = -1;
  int J = 5000;
};

struct MarglikReport {
  std::string model;
  double p0 = 0.0;
  double log_ml = 0.0;
  double log_lik_star = 0.0;
  double log_lik_mc_se = 0.0;
  double log_prior_star = 0.0;
  std::vector<std::pair<std::string, double>> log_post_ordinates;
  std::vector<std::string> theta_names;
  std::vector<double> theta_star;
  long M = 0, M1 = 0, M2 = 0;
  int J = 0;

  double sum_ordinates() const;
};

/// Posterior means from the stored draws; gamma clipped into
/// (L + 1e-6, U - 1e-6) for FREQ chains.
ThetaStar theta_star_from_chain(const ChainOutput& chain, const PanelDataset& data,
                                bool intercept_only);

struct LoglikResult {
  double log_lik = 0.0;
  double mc_se = 0.0;
};

/// log f(y | Theta*) with each alpha_i integrated by J Monte Carlo draws
/// from N(0, Omega*); the GAL density (AL when gamma = 0).
LoglikResult loglik_at(const ThetaStar& theta, const PanelDataset& data, double p0, int J,
                       const RngStream& rng);

double log_prior_at(const ThetaStar& theta, const PriorSpec& priors, double p0, bool with_gamma);

/// Chib-Jeliazkov estimator for a FREQ chain produced by run_freq.
MarglikReport marglik_freq(const PanelDataset& data, const PriorSpec& priors,
                           const McmcConfig& cfg, const ChainOutput& chain,
                           const MarglikOptions& options = {});

/// Chib estimator for a REQ chain produced by run_req.
MarglikReport marglik_req(const PanelDataset& data, const PriorSpec& priors,
                          const McmcConfig& cfg, const ChainOutput& chain,
                          const MarglikOptions& options = {});

struct ModelComparison {
  double log_bf = 0.0;  // log m(y | a) - log m(y | b)
  double prob_a = 0.5;  // posterior model probabilities, equal prior odds
  double prob_b = 0.5;
  double odds = 1.0;    // exp(log_bf)
};

ModelComparison compare_models(double log_ml_a, double log_ml_b);

}  // namespace flexqr
