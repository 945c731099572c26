#include "flexqr/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flexqr/errors.hpp"
#include "flexqr/numerics.hpp"
#include "flexqr/samplers.hpp"

namespace flexqr {

RngStream sweep_stream(const RngStream& base, StreamTag tag, long sweep, std::uint64_t i,
                       std::uint64_t t) {
  return base.substream({static_cast<std::uint64_t>(tag), static_cast<std::uint64_t>(sweep), i, t});
}

Eigen::VectorXd NormalConditional::mean() const { return precision.llt().solve(b); }

double NormalConditional::log_density(const Eigen::VectorXd& x) const {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("normal conditional: precision not SPD");
  const Eigen::VectorXd mu = llt.solve(b);
  const Eigen::VectorXd d = llt.matrixU() * (x - mu);
  double half_logdet = 0.0;
  for (Eigen::Index i = 0; i < precision.rows(); ++i) half_logdet += std::log(llt.matrixL()(i, i));
  return half_logdet - 0.5 * d.squaredNorm() - static_cast<double>(x.size()) * kLogSqrt2Pi;
}

namespace {

GalConstants constants_for(const ChainState& s, double p0) { return gal_constants(p0, s.gamma); }

double abs_c(const ChainState& s, const GalConstants& k) { return k.C * std::abs(s.gamma); }

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + " not SPD");
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

}  // namespace

Eigen::VectorXd latent_offset(const PanelUnit& u, const ChainState& s, int i, const GalConstants& k) {
  return u.y - k.A * s.nu[i] - abs_c(s, k) * s.h[i];
}

NormalConditional beta_conditional(const ChainState& s, const PanelDataset& data,
                                   const PriorSpec& priors, double p0) {
  const GalConstants k = constants_for(s, p0);
  const Eigen::MatrixXd B0inv = spd_inverse(priors.B0, "B0");
  NormalConditional c;
  c.precision = B0inv;
  c.b = B0inv * priors.beta0;
  for (int i = 0; i < data.n(); ++i) {
    const auto& u = data.units[i];
    Eigen::MatrixXd V = u.Z * s.omega * u.Z.transpose();
    V.diagonal() += s.sigma * k.B * s.nu[i];
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("beta step: V_i not positive definite for unit " + u.id);
    }
    const Eigen::MatrixXd VX = llt.solve(u.X);
    c.precision.noalias() += u.X.transpose() * VX;
    c.b.noalias() += VX.transpose() * latent_offset(u, s, i, k);
  }
  return c;
}

NormalConditional beta_conditional_given_alpha(const ChainState& s, const PanelDataset& data,
                                               const PriorSpec& priors, double p0) {
  const GalConstants k = constants_for(s, p0);
  const Eigen::MatrixXd B0inv = spd_inverse(priors.B0, "B0");
  NormalConditional c;
  c.precision = B0inv;
  c.b = B0inv * priors.beta0;
  for (int i = 0; i < data.n(); ++i) {
    const auto& u = data.units[i];
    const Eigen::VectorXd w = (s.sigma * k.B * s.nu[i]).cwiseInverse();
    const Eigen::VectorXd r = latent_offset(u, s, i, k) - u.Z * s.alpha.row(i).transpose();
    c.precision.noalias() += u.X.transpose() * w.asDiagonal() * u.X;
    c.b.noalias() += u.X.transpose() * w.cwiseProduct(r);
  }
  return c;
}

NormalConditional alpha_conditional(const ChainState& s, const PanelDataset& data, int i,
                                    double p0, const Eigen::MatrixXd& omega_inv) {
  const GalConstants k = constants_for(s, p0);
  const auto& u = data.units[i];
  const Eigen::VectorXd w = (s.sigma * k.B * s.nu[i]).cwiseInverse();
  const Eigen::VectorXd r = latent_offset(u, s, i, k) - u.X * s.beta;
  NormalConditional c;
  c.precision = u.Z.transpose() * w.asDiagonal() * u.Z + omega_inv;
  c.b = u.Z.transpose() * w.cwiseProduct(r);
  return c;
}

Eigen::VectorXd step_beta(const ChainState& s, const PanelDataset& data, const PriorSpec& priors,
                          double p0, RngStream& rng) {
  const NormalConditional c = beta_conditional(s, data, priors, p0);
  return draw_mvn_precision(c.precision, c.b, rng);
}

Eigen::MatrixXd step_alpha(const ChainState& s, const PanelDataset& data, double p0,
                           const RngStream& base, long sweep) {
  const Eigen::MatrixXd omega_inv = spd_inverse(s.omega, "Omega");
  Eigen::MatrixXd alpha(data.n(), data.l);
  for (int i = 0; i < data.n(); ++i) {
    const NormalConditional c = alpha_conditional(s, data, i, p0, omega_inv);
    RngStream rng = sweep_stream(base, kTagAlpha, sweep, static_cast<std::uint64_t>(i));
    try {
      alpha.row(i) = draw_mvn_precision(c.precision, c.b, rng).transpose();
    } catch (const NumericalError&) {
      throw NumericalError("alpha step: precision not positive definite for unit " + data.units[i].id);
    }
  }
  return alpha;
}

double OmegaConditional::log_density(const Eigen::MatrixXd& omega, double phi2) const {
  if (inverse_gamma) return log_invgamma_pdf(phi2, shape, rate);
  return log_invwishart_pdf(omega, df, scale);
}

OmegaConditional omega_conditional(const ChainState& s, const PriorSpec& priors) {
  OmegaConditional c;
  const auto n = static_cast<double>(s.alpha.rows());
  const auto l = static_cast<double>(s.alpha.cols());
  if (const auto* ig = std::get_if<IgPrior>(&priors.heterogeneity)) {
    c.inverse_gamma = true;
    c.shape = 0.5 * (n * l + ig->c1);
    c.rate = 0.5 * (s.alpha.squaredNorm() + ig->d1);
  } else {
    const auto& iw = std::get<IwPrior>(priors.heterogeneity);
    c.df = n + iw.omega0;
    c.scale = s.alpha.transpose() * s.alpha + iw.O0;
  }
  return c;
}

void step_omega(ChainState& s, const PriorSpec& priors, RngStream& rng) {
  const OmegaConditional c = omega_conditional(s, priors);
  const auto l = s.alpha.cols();
  if (c.inverse_gamma) {
    s.phi2 = draw_invgamma(c.shape, c.rate, rng);
    s.omega = s.phi2 * Eigen::MatrixXd::Identity(l, l);
  } else {
    s.omega = draw_invwishart(c.df, c.scale, rng);
  }
}

GigCoefficients nu_coefficients(double resid, double sigma, const GalConstants& k) {
  return {std::max(resid * resid / (sigma * k.B), 1e-300), k.A * k.A / (sigma * k.B) + 2.0 / sigma};
}

std::vector<Eigen::VectorXd> step_nu(const ChainState& s, const PanelDataset& data, double p0,
                                     const RngStream& base, long sweep) {
  const GalConstants k = constants_for(s, p0);
  const double c = abs_c(s, k);
  std::vector<Eigen::VectorXd> nu(data.n());
  for (int i = 0; i < data.n(); ++i) {
    const auto& u = data.units[i];
    const Eigen::VectorXd r = u.y - u.X * s.beta - u.Z * s.alpha.row(i).transpose() - c * s.h[i];
    nu[i].resize(u.T());
    for (int t = 0; t < u.T(); ++t) {
      RngStream rng = sweep_stream(base, kTagNu, sweep, static_cast<std::uint64_t>(i),
                                   static_cast<std::uint64_t>(t));
      const GigCoefficients g = nu_coefficients(r[t], s.sigma, k);
      nu[i][t] = draw_gig_half(g.chi, g.psi, rng);
    }
  }
  return nu;
}

HalfNormalParams h_conditional(double resid, double nu, double sigma, double abs_gamma,
                               const GalConstants& k) {
  const double c = k.C * abs_gamma;
  const double lam = sigma * k.B * nu;
  const double var = 1.0 / (1.0 / (sigma * sigma) + c * c / lam);
  return {var * c * resid / lam, var};
}

std::vector<Eigen::VectorXd> step_h(const ChainState& s, const PanelDataset& data, double p0,
                                    const RngStream& base, long sweep) {
  const GalConstants k = constants_for(s, p0);
  std::vector<Eigen::VectorXd> h(data.n());
  for (int i = 0; i < data.n(); ++i) {
    const auto& u = data.units[i];
    const Eigen::VectorXd r = u.y - u.X * s.beta - u.Z * s.alpha.row(i).transpose() - k.A * s.nu[i];
    h[i].resize(u.T());
    for (int t = 0; t < u.T(); ++t) {
      RngStream rng = sweep_stream(base, kTagH, sweep, static_cast<std::uint64_t>(i),
                                   static_cast<std::uint64_t>(t));
      const HalfNormalParams hp = h_conditional(r[t], s.nu[i][t], s.sigma, std::abs(s.gamma), k);
      h[i][t] = draw_halfnormal(hp.mean, hp.var, rng);
    }
  }
  return h;
}

double draw_h_marginal(double resid, double sigma, double abs_gamma, const GalConstants& k,
                       RngStream& rng) {
  const double c = k.C * abs_gamma;
  if (abs_gamma <= kAlThreshold || c == 0.0) return draw_halfnormal(0.0, sigma * sigma, rng);
  // Piece q = p - I(resid - c h < 0); the exponent is
  // -(h - m)^2 / (2 sigma^2) + m^2 / (2 sigma^2) - resid q / sigma, m = sigma c q.
  const double kink = resid / c;
  struct Piece {
    double lo, hi, m, logw;
  };
  Piece pieces[2];
  for (int ind = 0; ind < 2; ++ind) {
    const double q = k.p - ind;
    // ind = 0 is where c h <= resid.
    double lo, hi;
    if ((c > 0.0) == (ind == 0)) {
      lo = 0.0;
      hi = std::max(0.0, kink);
    } else {
      lo = std::max(0.0, kink);
      hi = kInf;
    }
    const double m = sigma * c * q;
    double logw = -kInf;
    if (hi > lo) {
      logw = log_diff_norm_cdf((hi - m) / sigma, (lo - m) / sigma) + 0.5 * m * m / (sigma * sigma) -
             resid * q / sigma;
    }
    pieces[ind] = {lo, hi, m, logw};
  }
  const double total = log_add_exp(pieces[0].logw, pieces[1].logw);
  const double w0 = std::exp(pieces[0].logw - total);
  const Piece& pick = rng.uniform() < w0 ? pieces[0] : pieces[1];
  return draw_truncated_normal(pick.m, sigma, pick.lo, pick.hi, rng);
}

std::vector<Eigen::VectorXd> step_h_marginal(const ChainState& s, const PanelDataset& data,
                                             double p0, const RngStream& base, long sweep) {
  const GalConstants k = constants_for(s, p0);
  std::vector<Eigen::VectorXd> h(data.n());
  for (int i = 0; i < data.n(); ++i) {
    const auto& u = data.units[i];
    const Eigen::VectorXd r = u.y - u.X * s.beta - u.Z * s.alpha.row(i).transpose();
    h[i].resize(u.T());
    for (int t = 0; t < u.T(); ++t) {
      RngStream rng = sweep_stream(base, kTagHMarginal, sweep, static_cast<std::uint64_t>(i),
                                   static_cast<std::uint64_t>(t));
      h[i][t] = draw_h_marginal(r[t], s.sigma, std::abs(s.gamma), k, rng);
    }
  }
  return h;
}

std::vector<double> residuals(const PanelDataset& data, const Eigen::VectorXd& beta,
                              const Eigen::MatrixXd& alpha) {
  std::vector<double> out;
  out.reserve(data.total_obs());
  for (int i = 0; i < data.n(); ++i) {
    const auto& u = data.units[i];
    const Eigen::VectorXd r = u.y - u.X * beta - u.Z * alpha.row(i).transpose();
    out.insert(out.end(), r.data(), r.data() + r.size());
  }
  return out;
}

double gal_loglik(const std::vector<double>& resid, double sigma, double p0, double gamma) {
  const GalKernel kernel(sigma, p0, gamma);
  double total = 0.0;
  for (double r : resid) total += kernel.logpdf(r);
  return total;
}

SigmaConditional sigma_conditional_al(const ChainState& s, const PanelDataset& data,
                                      const PriorSpec& priors, double p0) {
  const GalConstants k = gal_constants(p0, 0.0);
  double d = priors.d0;
  for (int i = 0; i < data.n(); ++i) {
    const auto& u = data.units[i];
    const Eigen::VectorXd r =
        u.y - u.X * s.beta - u.Z * s.alpha.row(i).transpose() - k.A * s.nu[i];
    d += (r.array().square() / (k.B * s.nu[i].array())).sum() + 2.0 * s.nu[i].sum();
  }
  return {0.5 * (3.0 * data.total_obs() + priors.n0), 0.5 * d};
}

}  // namespace flexqr
