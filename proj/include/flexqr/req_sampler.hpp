#pragma once

#include <functional>
#include <optional>

#include "flexqr/model.hpp"
#include "flexqr/rng.hpp"

namespace flexqr {

struct ReqSweepControl {
  bool fix_beta = false;
  bool fix_omega = false;
  bool fix_sigma = false;
  /// Test-only: draw beta given alpha instead of marginally.
  bool unblocked = false;
  std::function<void(long sweep, const ChainState&)> observer;
};

/// sigma | y, beta, alpha, nu under AL: IG(n~/2, d~/2).
double step_sigma_req(const ChainState& s, const PanelDataset& data, const PriorSpec& priors,
                      double p0, RngStream& rng);

/// One REQ sweep: (beta, alpha), Omega, nu, sigma.
void req_sweep(ChainState& s, const PanelDataset& data, const PriorSpec& priors, double p0,
               const RngStream& base, long sweep, const ReqSweepControl& control);

struct ReqRunOptions {
  ReqSweepControl control;
  std::optional<ChainState> initial;
  std::uint64_t run_tag = 0;
};

ChainOutput run_req(const PanelDataset& data, const PriorSpec& priors, const McmcConfig& cfg,
                    const ReqRunOptions& options = {});

}  // namespace flexqr
