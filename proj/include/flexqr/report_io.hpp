#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flexqr/diagnostics.hpp"
#include "flexqr/marglik.hpp"
#include "flexqr/model.hpp"

namespace flexqr {

/// Draw history: `# config_hash: <hex>` line, header of the parameter
/// columns plus `accept`, one row per stored sweep, shortest round-trip
/// number formatting.
void write_draws_csv(std::ostream& out, const ChainOutput& chain, const std::string& config_hash);

struct DrawsTable {
  std::string config_hash;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
DrawsTable read_draws_csv(std::istream& in);

// JSON documents are returned as text, indented by two spaces.
std::string chain_summary_json(const ChainOutput& chain, const std::vector<ParamSummary>& summary,
                               const std::string& model, const std::string& config_hash);
std::string marglik_json(const MarglikReport& report, const std::string& config_hash);

/// `extra` is merged into the top-level object (e.g. provenance fields).
std::string prior_to_json(const PriorSpec& priors, const std::string& config_hash,
                          const std::string& extra_json = "{}");
PriorSpec prior_from_json(const std::string& text);

/// First `# config_hash:` value found in the file, or empty.
std::string artifact_hash(const std::string& path);

}  // namespace flexqr
