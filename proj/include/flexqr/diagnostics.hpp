#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "flexqr/model.hpp"

namespace flexqr {

struct IneffResult {
  double value = 1.0;
  /// Set for a constant sequence (autocorrelation undefined); value is NaN then.
  bool flagged = false;
  long lag = 0;
};

/// 1 + 2 sum_{t=1}^{T} rho(t), rho from the biased autocorrelation estimator,
/// T the first lag with rho(t) < taper_threshold, capped at N/10; floored at 1.
IneffResult inefficiency_factor(std::span<const double> draws, double taper_threshold = 0.05);

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double ineff = 0.0;
  bool ineff_flagged = false;
};

/// Per-column mean, unbiased sd and inefficiency factor of the stored draws.
/// Chains shorter than 100 draws get a flagged NaN inefficiency factor.
std::vector<ParamSummary> summarize(const ChainOutput& chain, double taper_threshold = 0.05);

void write_summary_text(std::ostream& os, const std::vector<ParamSummary>& rows);
void write_summary_csv(std::ostream& os, const std::vector<ParamSummary>& rows);

}  // namespace flexqr
