#include "flexqr/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flexqr/errors.hpp"
#include "flexqr/numerics.hpp"

namespace flexqr {

double draw_gig_half(double chi, double psi, RngStream& rng) {
  if (!(chi > 0.0) || !(psi > 0.0) || !std::isfinite(chi) || !std::isfinite(psi)) {
    std::ostringstream msg;
    msg << "draw_gig_half: chi and psi must be positive and finite (chi=" << chi
        << ", psi=" << psi << ")";
    throw DomainError(msg.str());
  }
  // 1/X is inverse Gaussian with mean sqrt(psi/chi) and shape psi; this is
  // the Michael-Schucany-Haas transformation written for X directly.
  const double z = rng.normal();
  const double w = z * z / (2.0 * std::sqrt(chi * psi));
  const double r = w > 0.0 ? 1.0 + w + w * std::sqrt(1.0 + 2.0 / w) : 1.0;
  const double eta = std::sqrt(chi / psi);
  if (rng.uniform() * (r + 1.0) <= r) return r * eta;
  return eta / r;
}

namespace {

// Standard normal truncated to (a, b) with 0 <= a < b.
double tn_upper(double a, double b, RngStream& rng) {
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  const double uniform_cutoff =
      2.0 * std::sqrt(std::exp(1.0)) / (a + std::sqrt(a * a + 4.0)) *
      std::exp(0.25 * (a * a - a * std::sqrt(a * a + 4.0)));
  if (b - a <= uniform_cutoff) {
    for (;;) {
      const double z = a + (b - a) * rng.uniform();
      if (std::log(rng.uniform()) <= 0.5 * (a * a - z * z)) return z;
    }
  }
  for (;;) {
    const double z = a + rng.exponential() / lambda;
    if (z >= b) continue;
    if (std::log(rng.uniform()) <= -0.5 * (z - lambda) * (z - lambda)) return z;
  }
}

// Standard normal truncated to (a, b) with a < 0 < b.
double tn_straddle(double a, double b, RngStream& rng) {
  if (b - a > 2.5) {
    for (;;) {
      const double z = rng.normal();
      if (z > a && z < b) return z;
    }
  }
  for (;;) {
    const double z = a + (b - a) * rng.uniform();
    if (std::log(rng.uniform()) <= -0.5 * z * z) return z;
  }
}

double tn_standard(double a, double b, RngStream& rng) {
  if (a >= 0.0) return tn_upper(a, b, rng);
  if (b <= 0.0) return -tn_upper(-b, -a, rng);
  return tn_straddle(a, b, rng);
}

}  // namespace

double draw_truncated_normal(double mu, double sd, double lo, double hi,
                             RngStream& rng) {
  if (!(sd > 0.0) || !std::isfinite(sd) || !(lo < hi) || !std::isfinite(mu)) {
    std::ostringstream msg;
    msg << "draw_truncated_normal: invalid arguments (mu=" << mu << ", sd=" << sd
        << ", lo=" << lo << ", hi=" << hi << ")";
    throw DomainError(msg.str());
  }
  const double a = (lo - mu) / sd;
  const double b = (hi - mu) / sd;
  const double z = tn_standard(a, b, rng);
  return std::clamp(mu + sd * z, lo, hi);
}

double draw_halfnormal(double mu, double var, RngStream& rng) {
  if (!(var > 0.0) || !std::isfinite(var)) {
    throw DomainError("draw_halfnormal: variance must be positive");
  }
  return draw_truncated_normal(mu, std::sqrt(var), 0.0, kInf, rng);
}

namespace {

Eigen::Matrix2d checked_cholesky(const Eigen::Matrix2d& cov) {
  if (!cov.allFinite() || std::abs(cov(0, 1) - cov(1, 0)) >
                              1e-12 * (std::abs(cov(0, 0)) + std::abs(cov(1, 1)))) {
    throw DomainError("bivariate truncated normal: covariance not symmetric");
  }
  Eigen::LLT<Eigen::Matrix2d> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw DomainError("bivariate truncated normal: covariance not SPD");
  }
  return llt.matrixL();
}

}  // namespace

double btn_log_mass(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov,
                    const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) {
  checked_cholesky(cov);
  if (!(lo[0] < hi[0]) || !(lo[1] < hi[1])) {
    throw DomainError("bivariate truncated normal: empty rectangle");
  }
  const double s1 = std::sqrt(cov(0, 0));
  const double s2 = std::sqrt(cov(1, 1));
  double r = cov(0, 1) / (s1 * s2);
  double a1 = (lo[0] - mean[0]) / s1, b1 = (hi[0] - mean[0]) / s1;
  double a2 = (lo[1] - mean[1]) / s2, b2 = (hi[1] - mean[1]) / s2;
  // Reflect so the rectangle leans into the upper tail, where the
  // inclusion-exclusion terms are small and cancellation is mild.
  if (a1 + b1 < 0.0 || (std::isinf(a1) && std::isinf(b1))) {
    std::swap(a1, b1);
    a1 = -a1;
    b1 = -b1;
    r = -r;
  }
  if (a2 + b2 < 0.0 || (std::isinf(a2) && std::isinf(b2))) {
    std::swap(a2, b2);
    a2 = -a2;
    b2 = -b2;
    r = -r;
  }
  const double mass = bvn_upper(a1, a2, r) - bvn_upper(b1, a2, r) -
                      bvn_upper(a1, b2, r) + bvn_upper(b1, b2, r);
  if (!(mass > 1e-300)) {
    std::ostringstream msg;
    msg << "bivariate truncated normal: degenerate rectangle, probability mass "
        << mass << " at mean (" << mean[0] << ", " << mean[1] << ")";
    throw NumericalError(msg.str());
  }
  return std::log(std::min(mass, 1.0));
}

double btn_log_density(const Eigen::Vector2d& x, const Eigen::Vector2d& mean,
                       const Eigen::Matrix2d& cov, const Eigen::Vector2d& lo,
                       const Eigen::Vector2d& hi) {
  if (!(x[0] > lo[0] && x[0] < hi[0] && x[1] > lo[1] && x[1] < hi[1])) return -kInf;
  const Eigen::Matrix2d L = checked_cholesky(cov);
  const Eigen::Vector2d z = L.triangularView<Eigen::Lower>().solve(x - mean);
  const double log_det = 2.0 * (std::log(L(0, 0)) + std::log(L(1, 1)));
  const double log_phi = -0.5 * z.squaredNorm() - 2.0 * kLogSqrt2Pi - 0.5 * log_det;
  return log_phi - btn_log_mass(mean, cov, lo, hi);
}

Eigen::Vector2d draw_btn_rect(const Eigen::Vector2d& mean,
                              const Eigen::Matrix2d& cov,
                              const Eigen::Vector2d& lo,
                              const Eigen::Vector2d& hi, RngStream& rng) {
  const Eigen::Matrix2d L = checked_cholesky(cov);
  const double log_mass = btn_log_mass(mean, cov, lo, hi);
  if (log_mass > std::log(1e-3)) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      const Eigen::Vector2d x = mean + L * Eigen::Vector2d(rng.normal(), rng.normal());
      if (x[0] > lo[0] && x[0] < hi[0] && x[1] > lo[1] && x[1] < hi[1]) return x;
    }
  }
  // Low-mass rectangle: Gibbs on the exact univariate conditionals.
  Eigen::Vector2d x;
  for (int j = 0; j < 2; ++j) {
    double lo_j = lo[j], hi_j = hi[j];
    if (std::isinf(lo_j)) lo_j = hi_j - 1.0;
    if (std::isinf(hi_j)) hi_j = lo_j + 1.0;
    x[j] = std::clamp(mean[j], lo_j, hi_j);
    if (x[j] == lo[j] || x[j] == hi[j]) x[j] = 0.5 * (lo_j + hi_j);
  }
  const double rho = cov(0, 1) / std::sqrt(cov(0, 0) * cov(1, 1));
  for (int sweep = 0; sweep < 10; ++sweep) {
    for (int j = 0; j < 2; ++j) {
      const int o = 1 - j;
      const double cmean = mean[j] + cov(j, o) / cov(o, o) * (x[o] - mean[o]);
      const double csd = std::sqrt(cov(j, j) * (1.0 - rho * rho));
      x[j] = draw_truncated_normal(cmean, csd, lo[j], hi[j], rng);
    }
  }
  return x;
}

namespace {

Eigen::LLT<Eigen::MatrixXd> spd_factor(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite()) {
    throw DomainError(std::string(what) + ": matrix must be square and finite");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw DomainError(std::string(what) + ": matrix not SPD");
  }
  return llt;
}

double log_multigamma(double a, int l) {
  double out = 0.25 * l * (l - 1) * std::log(M_PI);
  for (int j = 0; j < l; ++j) out += std::lgamma(a - 0.5 * j);
  return out;
}

}  // namespace

Eigen::MatrixXd draw_invwishart(double df, const Eigen::MatrixXd& scale,
                                RngStream& rng) {
  const int l = static_cast<int>(scale.rows());
  if (!(df > l - 1)) {
    std::ostringstream msg;
    msg << "draw_invwishart: df=" << df << " must exceed dimension - 1 = " << l - 1;
    throw DomainError(msg.str());
  }
  const auto llt = spd_factor(scale, "draw_invwishart");
  // W^{-1} ~ Wishart(df, scale^{-1}). With scale = L L', scale^{-1} =
  // L'^{-1} L^{-1}, and the Bartlett factor A gives W^{-1} = L'^{-1} A A' L^{-1},
  // so W = L A'^{-1} A^{-1} L'.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(l, l);
  for (int i = 0; i < l; ++i) {
    A(i, i) = std::sqrt(2.0 * rng.gamma(0.5 * (df - i)));
    for (int j = 0; j < i; ++j) A(i, j) = rng.normal();
  }
  const Eigen::MatrixXd Ainv =
      A.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(l, l));
  const Eigen::MatrixXd M = Eigen::MatrixXd(llt.matrixL()) * Ainv.transpose();
  Eigen::MatrixXd W = M * M.transpose();
  return 0.5 * (W + W.transpose());
}

double log_invwishart_pdf(const Eigen::MatrixXd& w, double df,
                          const Eigen::MatrixXd& scale) {
  const int l = static_cast<int>(scale.rows());
  if (!(df > l - 1)) throw DomainError("log_invwishart_pdf: df too small");
  const auto ls = spd_factor(scale, "log_invwishart_pdf scale");
  const auto lw = spd_factor(w, "log_invwishart_pdf argument");
  double logdet_s = 0.0, logdet_w = 0.0;
  for (int i = 0; i < l; ++i) {
    logdet_s += 2.0 * std::log(ls.matrixL()(i, i));
    logdet_w += 2.0 * std::log(lw.matrixL()(i, i));
  }
  const double tr = lw.solve(scale).trace();
  return 0.5 * df * logdet_s - 0.5 * df * l * std::log(2.0) -
         log_multigamma(0.5 * df, l) - 0.5 * (df + l + 1) * logdet_w - 0.5 * tr;
}

double draw_invgamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    std::ostringstream msg;
    msg << "draw_invgamma: shape and rate must be positive (shape=" << shape
        << ", rate=" << rate << ")";
    throw DomainError(msg.str());
  }
  return rate / rng.gamma(shape);
}

double log_invgamma_pdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("log_invgamma_pdf: bad parameters");
  if (!(x > 0.0)) return -kInf;
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

Eigen::VectorXd draw_mvn_precision(const Eigen::MatrixXd& precision,
                                   const Eigen::VectorXd& b, RngStream& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("normal draw: precision matrix not SPD");
  }
  Eigen::VectorXd z(b.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  const Eigen::VectorXd mean = llt.solve(b);
  return mean + llt.matrixU().solve(z);
}

Eigen::VectorXd draw_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                         RngStream& rng) {
  const auto llt = spd_factor(cov, "draw_mvn");
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + llt.matrixL() * z;
}

double log_mvn_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                   const Eigen::MatrixXd& cov) {
  const auto llt = spd_factor(cov, "log_mvn_pdf");
  const Eigen::VectorXd z = llt.matrixL().solve(x - mean);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * z.squaredNorm() - static_cast<double>(x.size()) * kLogSqrt2Pi - 0.5 * logdet;
}

}  // namespace flexqr
