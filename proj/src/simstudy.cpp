#include "flexqr/simstudy.hpp"

#include <cmath>
#include <limits>

#include "flexqr/diagnostics.hpp"
#include "flexqr/errors.hpp"
#include "flexqr/freq_sampler.hpp"
#include "flexqr/gal.hpp"
#include "flexqr/marglik.hpp"
#include "flexqr/parallel.hpp"
#include "flexqr/req_sampler.hpp"
#include "flexqr/rng.hpp"
#include "flexqr/samplers.hpp"

namespace flexqr {

PanelDataset generate(const DgpSpec& spec) {
  PanelDataset d;
  d.k = 3;
  d.l = 2;
  d.x_names = {"intercept", "x2", "x3"};
  d.z_names = {"intercept", "z2"};
  d.z_in_x = {0, -1};
  const RngStream base(spec.seed, 0x5EED);
  const Eigen::Matrix2d L = spec.re_cov.llt().matrixL();
  for (int i = 0; i < spec.n; ++i) {
    RngStream rng = base.substream({static_cast<std::uint64_t>(i)});
    PanelUnit u;
    u.id = std::to_string(i + 1);
    u.y.resize(spec.T);
    u.X.resize(spec.T, 3);
    u.Z.resize(spec.T, 2);
    Eigen::Vector2d alpha = L * Eigen::Vector2d(rng.normal(), rng.normal());
    if (spec.zero_noise) alpha.setZero();
    for (int t = 0; t < spec.T; ++t) {
      const double z2 = 1.0 + 2.0 * rng.uniform();
      const double x2 = 0.5 * rng.normal();
      const double x3 = 2.0 + 0.5 * rng.normal();
      double eps = 0.0;
      switch (spec.error) {
        case ErrorKind::logistic: {
          const double v = rng.uniform();
          eps = std::log(v / (1.0 - v));
          break;
        }
        case ErrorKind::normal:
          eps = rng.normal();
          break;
        case ErrorKind::gal:
          eps = gal_draw_mixture({0.0, spec.err_sigma, spec.err_p0, spec.err_gamma}, rng).first;
          break;
      }
      if (spec.zero_noise) eps = 0.0;
      u.X.row(t) << 1.0, x2, x3;
      u.Z.row(t) << 1.0, z2;
      u.y[t] = u.X.row(t).dot(spec.beta_true) + alpha[0] + alpha[1] * z2 + eps;
    }
    d.units.push_back(std::move(u));
  }
  return d;
}

std::vector<DgpSpec> study_grid(std::uint64_t seed) {
  std::vector<DgpSpec> out;
  std::uint64_t cell = 0;
  for (int n : {100, 250, 500}) {
    for (int T : {5, 10, 15}) {
      DgpSpec s;
      s.n = n;
      s.T = T;
      s.seed = derive_stream_id(seed, {cell++});
      out.push_back(s);
    }
  }
  return out;
}

StudyReport run_study(const std::vector<DgpSpec>& grid, const StudyConfig& cfg) {
  if (grid.empty() || cfg.quantiles.empty()) throw DomainError("run_study: empty grid");
  for (const auto& spec : grid) {
    if (spec.n < 1 || spec.T < 1) throw DomainError("run_study: n and T must be positive");
  }
  std::vector<PanelDataset> datasets;
  for (const auto& spec : grid) datasets.push_back(generate(spec));

  const std::size_t nq = cfg.quantiles.size();
  StudyReport rep;
  rep.quantiles = cfg.quantiles;
  rep.cells.resize(grid.size() * nq * 2);
  parallel_for(rep.cells.size(), cfg.workers, [&](std::size_t idx) {
    const std::size_t study = idx / (2 * nq);
    const std::size_t q = (idx / 2) % nq;
    const bool freq = idx % 2 == 0;
    StudyCell& cell = rep.cells[idx];
    cell.study = static_cast<int>(study) + 1;
    cell.n = grid[study].n;
    cell.T = grid[study].T;
    cell.p0 = cfg.quantiles[q];
    cell.model = freq ? "FREQ" : "REQ";
    cell.log_ml = std::numeric_limits<double>::quiet_NaN();
    try {
      const PanelDataset& data = datasets[study];
      const PriorSpec priors = default_priors(data.k, data.l, Heterogeneity::full);
      McmcConfig mc;
      mc.n_draws = cfg.n_draws;
      mc.burn_in = cfg.burn_in;
      mc.p0 = cell.p0;
      mc.seed = derive_stream_id(cfg.seed, {study, q, freq ? 0u : 1u});
      const ChainOutput chain = freq ? run_freq(data, priors, mc) : run_req(data, priors, mc);
      cell.accept_rate = chain.accept_rate;
      for (const auto& s : summarize(chain)) {
        cell.columns.push_back(s.name);
        cell.mean.push_back(s.mean);
        cell.sd.push_back(s.sd);
        cell.ineff.push_back(s.ineff);
      }
      if (cfg.marglik) {
        MarglikOptions mo;
        mo.J = cfg.J;
        cell.log_ml = freq ? marglik_freq(data, priors, mc, chain, mo).log_ml
                           : marglik_req(data, priors, mc, chain, mo).log_ml;
      }
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  });

  rep.log_ml_table.resize(static_cast<Eigen::Index>(grid.size() * 2), static_cast<Eigen::Index>(nq));
  for (std::size_t study = 0; study < grid.size(); ++study) {
    rep.table_rows.push_back("SS" + std::to_string(study + 1) + " FREQ");
    rep.table_rows.push_back("SS" + std::to_string(study + 1) + " REQ");
    for (std::size_t q = 0; q < nq; ++q) {
      for (int m = 0; m < 2; ++m) {
        rep.log_ml_table(static_cast<Eigen::Index>(2 * study + m), static_cast<Eigen::Index>(q)) =
            rep.cells[(study * nq + q) * 2 + m].log_ml;
      }
    }
  }
  return rep;
}

}  // namespace flexqr
