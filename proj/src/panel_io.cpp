#include "flexqr/panel_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_map>

#include "flexqr/errors.hpp"

namespace flexqr {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

double parse_number(const std::string& field, const std::string& column, std::size_t line) {
  const std::string t = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ValidationError("column '" + column + "', record " + std::to_string(line) +
                          ": not a finite number: '" + field + "'");
  }
  return v;
}

// Category order for time dummies: numeric order when every label parses,
// otherwise lexicographic.
std::vector<std::string> sorted_categories(std::vector<std::string> cats) {
  bool numeric = true;
  for (const auto& c : cats) {
    double v;
    const auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
    if (ec != std::errc() || p != c.data() + c.size()) numeric = false;
  }
  std::sort(cats.begin(), cats.end(), [numeric](const std::string& a, const std::string& b) {
    if (numeric) return std::stod(a) < std::stod(b);
    return a < b;
  });
  return cats;
}

}  // namespace

PanelConfig parse_panel_config(std::istream& in) {
  PanelConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string val = trim(std::string_view(body).substr(eq + 1));
    if (key == "x") cfg.x = split_list(val);
    else if (key == "z") cfg.z = split_list(val);
    else if (key == "time_dummies") cfg.time_dummies = val;
    else cfg.options[key] = val;
  }
  if (cfg.x.empty()) throw ValidationError("config: no X columns declared (key 'x')");
  if (cfg.z.empty()) throw ValidationError("config: no Z columns declared (key 'z')");
  return cfg;
}

PanelConfig read_panel_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  return parse_panel_config(in);
}

void write_panel_config(std::ostream& out, const PanelConfig& cfg) {
  out << "x = " << join(cfg.x) << '\n' << "z = " << join(cfg.z) << '\n';
  if (!cfg.time_dummies.empty()) out << "time_dummies = " << cfg.time_dummies << '\n';
  for (const auto& [k, v] : cfg.options) out << k << " = " << v << '\n';
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, at_start = true, skipping = false;
  std::size_t i = 0;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  auto end_record = [&]() {
    rec.push_back(field);
    field.clear();
    if (!(rec.size() == 1 && rec[0].empty())) records.push_back(rec);
    rec.clear();
    at_start = true;
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (skipping) {
      if (c == '\n') skipping = false;
      continue;
    }
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (at_start && c == '#') {
      skipping = true;
      continue;
    }
    at_start = false;
    if (c == '"' && field.empty()) quoted = true;
    else if (c == ',') {
      rec.push_back(field);
      field.clear();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      continue;
    } else if (c == '\n') {
      end_record();
    } else {
      field += c;
    }
  }
  if (quoted) throw ValidationError("CSV: unterminated quoted field");
  if (!field.empty() || !rec.empty()) end_record();
  return records;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string format_double(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

PanelDataset parse_panel_csv(std::istream& in, const PanelConfig& cfg) {
  const auto records = parse_csv(in);
  if (records.empty()) throw ValidationError("CSV: no header row");
  const auto& header = records[0];
  std::unordered_map<std::string, int> col;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!col.emplace(trim(header[j]), static_cast<int>(j)).second) {
      throw ValidationError("CSV: duplicate column '" + header[j] + "'");
    }
  }
  for (const char* req : {"unit_id", "y"}) {
    if (!col.count(req)) throw ValidationError(std::string("CSV: missing required column '") + req + "'");
  }
  auto source = [&](const std::string& name) {
    auto it = col.find(name);
    if (it != col.end()) return it->second;
    if (name == "intercept") return -1;
    throw ValidationError("CSV: missing column '" + name + "' declared in config");
  };

  std::vector<int> x_src, z_src;
  for (const auto& name : cfg.x) x_src.push_back(source(name));
  for (const auto& name : cfg.z) z_src.push_back(source(name));

  PanelDataset data;
  data.x_names = cfg.x;
  data.z_names = cfg.z;

  std::vector<std::string> cats;
  int td = -1;
  if (!cfg.time_dummies.empty()) {
    td = source(cfg.time_dummies);
    if (td < 0) throw ValidationError("CSV: missing time-dummy column '" + cfg.time_dummies + "'");
    std::set<std::string> seen;
    for (std::size_t r = 1; r < records.size(); ++r) {
      if (static_cast<int>(records[r].size()) > td) seen.insert(trim(records[r][td]));
    }
    cats = sorted_categories({seen.begin(), seen.end()});
    for (std::size_t c = 1; c < cats.size(); ++c) data.x_names.push_back(cfg.time_dummies + "_" + cats[c]);
  }
  data.k = static_cast<int>(data.x_names.size());
  data.l = static_cast<int>(cfg.z.size());
  for (const auto& zn : cfg.z) {
    const auto it = std::find(data.x_names.begin(), data.x_names.end(), zn);
    data.z_in_x.push_back(it == data.x_names.end() ? -1 : static_cast<int>(it - data.x_names.begin()));
  }

  std::unordered_map<std::string, int> unit_index;
  std::vector<std::vector<std::size_t>> rows_of;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      throw ValidationError("CSV record " + std::to_string(r) + ": expected " +
                            std::to_string(header.size()) + " fields, found " +
                            std::to_string(records[r].size()));
    }
    const std::string id = trim(records[r][col["unit_id"]]);
    if (id.empty()) throw ValidationError("CSV record " + std::to_string(r) + ": empty unit_id");
    auto [it, fresh] = unit_index.emplace(id, static_cast<int>(rows_of.size()));
    if (fresh) {
      rows_of.emplace_back();
      data.units.emplace_back();
      data.units.back().id = id;
    }
    rows_of[it->second].push_back(r);
  }

  const int ycol = col["y"];
  for (std::size_t u = 0; u < rows_of.size(); ++u) {
    PanelUnit& unit = data.units[u];
    const auto& rows = rows_of[u];
    const int T = static_cast<int>(rows.size());
    unit.y.resize(T);
    unit.X.setZero(T, data.k);
    unit.Z.resize(T, data.l);
    for (int t = 0; t < T; ++t) {
      const auto& rec = records[rows[t]];
      unit.y[t] = parse_number(rec[ycol], "y", rows[t]);
      for (std::size_t j = 0; j < x_src.size(); ++j) {
        unit.X(t, j) = x_src[j] < 0 ? 1.0 : parse_number(rec[x_src[j]], cfg.x[j], rows[t]);
      }
      for (std::size_t j = 0; j < z_src.size(); ++j) {
        unit.Z(t, j) = z_src[j] < 0 ? 1.0 : parse_number(rec[z_src[j]], cfg.z[j], rows[t]);
      }
      if (td >= 0) {
        const std::string c = trim(rec[td]);
        const auto pos = std::find(cats.begin(), cats.end(), c) - cats.begin();
        if (pos > 0) unit.X(t, x_src.size() + pos - 1) = 1.0;
      }
    }
  }
  return data;
}

PanelDataset read_panel_csv(const std::string& path, const PanelConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open data file " + path);
  return parse_panel_csv(in, cfg);
}

PanelConfig write_panel_csv(std::ostream& out, const PanelDataset& data) {
  PanelConfig cfg;
  cfg.x = data.x_names;
  cfg.z = data.z_names;
  std::vector<int> z_only;
  for (int j = 0; j < data.l; ++j) {
    const bool in_x = std::find(cfg.x.begin(), cfg.x.end(), cfg.z[j]) != cfg.x.end();
    if (!in_x) z_only.push_back(j);
  }
  out << "unit_id,y";
  for (const auto& name : cfg.x) out << ',' << csv_field(name);
  for (int j : z_only) out << ',' << csv_field(cfg.z[j]);
  out << '\n';
  for (const auto& u : data.units) {
    for (int t = 0; t < u.T(); ++t) {
      out << csv_field(u.id) << ',' << format_double(u.y[t]);
      for (int j = 0; j < data.k; ++j) out << ',' << format_double(u.X(t, j));
      for (int j : z_only) out << ',' << format_double(u.Z(t, j));
      out << '\n';
    }
  }
  return cfg;
}

PanelDataset subset_units(const PanelDataset& data, const std::vector<std::string>& ids) {
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < data.n(); ++i) index.emplace(data.units[i].id, i);
  PanelDataset out = data;
  out.units.clear();
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError("unknown unit '" + id + "'");
    out.units.push_back(data.units[it->second]);
  }
  return out;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace flexqr
