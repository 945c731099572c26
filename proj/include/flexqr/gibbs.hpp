#pragma once
// Full conditionals shared by the FREQ and REQ samplers. Under AL the state
// carries gamma = 0 and h = 0, which removes every C|gamma|h term.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "flexqr/gal.hpp"
#include "flexqr/model.hpp"
#include "flexqr/rng.hpp"

namespace flexqr {

/// Substream tags; FREQ and REQ share them so their common steps coincide
/// draw for draw.
enum StreamTag : std::uint64_t {
  kTagBeta = 1,
  kTagAlpha = 2,
  kTagOmega = 3,
  kTagMh = 4,
  kTagNu = 5,
  kTagH = 6,
  kTagSigma = 7,
  kTagHMarginal = 8,
  kTagProposal = 9,
};

RngStream sweep_stream(const RngStream& base, StreamTag tag, long sweep,
                       std::uint64_t i = 0, std::uint64_t t = 0);

/// N(P^{-1} b, P^{-1}) held by its precision.
struct NormalConditional {
  Eigen::VectorXd b;
  Eigen::MatrixXd precision;
  Eigen::VectorXd mean() const;
  double log_density(const Eigen::VectorXd& x) const;
};

/// y_i - A nu_i - C|gamma| h_i for one unit.
Eigen::VectorXd latent_offset(const PanelUnit& u, const ChainState& s, int i,
                              const GalConstants& k);

/// beta | y, nu, h, sigma, gamma, Omega with alpha integrated out.
NormalConditional beta_conditional(const ChainState& s, const PanelDataset& data,
                                   const PriorSpec& priors, double p0);
/// beta | y, alpha, nu, h, sigma, gamma (alpha held fixed); test-only
/// unblocked variant.
NormalConditional beta_conditional_given_alpha(const ChainState& s, const PanelDataset& data,
                                               const PriorSpec& priors, double p0);
NormalConditional alpha_conditional(const ChainState& s, const PanelDataset& data, int i,
                                    double p0, const Eigen::MatrixXd& omega_inv);

Eigen::VectorXd step_beta(const ChainState& s, const PanelDataset& data,
                          const PriorSpec& priors, double p0, RngStream& rng);
Eigen::MatrixXd step_alpha(const ChainState& s, const PanelDataset& data, double p0,
                           const RngStream& base, long sweep);

/// Omega | alpha: IW(df, scale), or phi^2 | alpha: IG(shape, rate).
struct OmegaConditional {
  bool inverse_gamma = false;
  double df = 0.0;
  Eigen::MatrixXd scale;
  double shape = 0.0;
  double rate = 0.0;
  double log_density(const Eigen::MatrixXd& omega, double phi2) const;
};

OmegaConditional omega_conditional(const ChainState& s, const PriorSpec& priors);
/// Draws Omega (or phi^2) and stores it in the state.
void step_omega(ChainState& s, const PriorSpec& priors, RngStream& rng);

/// Coefficients of the GIG(1/2) kernel of nu_it: chi on 1/nu, psi on nu.
struct GigCoefficients {
  double chi, psi;
};
GigCoefficients nu_coefficients(double resid, double sigma, const GalConstants& k);

std::vector<Eigen::VectorXd> step_nu(const ChainState& s, const PanelDataset& data, double p0,
                                     const RngStream& base, long sweep);

struct HalfNormalParams {
  double mean, var;
};
/// resid = y - x'beta - z'alpha - A nu.
HalfNormalParams h_conditional(double resid, double nu, double sigma, double abs_gamma,
                               const GalConstants& k);
std::vector<Eigen::VectorXd> step_h(const ChainState& s, const PanelDataset& data, double p0,
                                    const RngStream& base, long sweep);

/// h_it | y, beta, alpha, sigma, gamma with nu_it integrated out: a normal
/// N(0, sigma^2) on [0, inf) tilted by the AL kernel of resid - C|gamma| h,
/// which is a two-piece truncated-normal mixture. resid = y - x'beta - z'alpha.
double draw_h_marginal(double resid, double sigma, double abs_gamma, const GalConstants& k,
                       RngStream& rng);
std::vector<Eigen::VectorXd> step_h_marginal(const ChainState& s, const PanelDataset& data,
                                             double p0, const RngStream& base, long sweep);

/// Flattened y - X beta - Z alpha.
std::vector<double> residuals(const PanelDataset& data, const Eigen::VectorXd& beta,
                              const Eigen::MatrixXd& alpha);

/// sum over observations of log f_GAL(resid | 0, sigma, p0, gamma).
double gal_loglik(const std::vector<double>& resid, double sigma, double p0, double gamma);

/// sigma | everything under AL: IG(shape, rate).
struct SigmaConditional {
  double shape, rate;
};
SigmaConditional sigma_conditional_al(const ChainState& s, const PanelDataset& data,
                                      const PriorSpec& priors, double p0);

}  // namespace flexqr
