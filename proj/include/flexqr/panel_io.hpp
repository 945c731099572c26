#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "flexqr/model.hpp"

namespace flexqr {

/// Sidecar configuration, one `key = value` per line, `#` starts a comment.
///   x = intercept, x2, x3      columns entering X
///   z = intercept, z2          columns entering Z
///   time_dummies = year        indicators for every category but the first
/// Any other key is kept in `options` for the caller. The name `intercept`
/// means a column of ones unless the CSV has a column of that name.
struct PanelConfig {
  std::vector<std::string> x;
  std::vector<std::string> z;
  std::string time_dummies;
  std::map<std::string, std::string> options;
};

PanelConfig parse_panel_config(std::istream& in);
PanelConfig read_panel_config(const std::string& path);
void write_panel_config(std::ostream& out, const PanelConfig& cfg);

/// RFC 4180 records; a line starting with '#' outside quotes is skipped.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);
std::string csv_field(std::string_view s);
std::string format_double(double v);

/// Rows are grouped by unit_id in order of first appearance; row order
/// within a unit is kept.
PanelDataset parse_panel_csv(std::istream& in, const PanelConfig& cfg);
PanelDataset read_panel_csv(const std::string& path, const PanelConfig& cfg);

/// Writes unit_id, y, the X columns and any Z-only columns, and returns the
/// config that reads the file back into the same dataset.
PanelConfig write_panel_csv(std::ostream& out, const PanelDataset& data);

/// Keeps the listed units (by id), in the given order.
PanelDataset subset_units(const PanelDataset& data, const std::vector<std::string>& ids);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
std::string read_file(const std::string& path);

}  // namespace flexqr
