#include "flexqr/report_io.hpp"

#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>

#include "flexqr/errors.hpp"
#include "flexqr/panel_io.hpp"

namespace flexqr {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ValidationError(std::string("prior file: bad matrix ") + what);
  const auto n = static_cast<Eigen::Index>(j.size());
  const auto m = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != m) {
      throw ValidationError(std::string("prior file: ragged matrix ") + what);
    }
    for (Eigen::Index c = 0; c < m; ++c) out(i, c) = j[i][c].get<double>();
  }
  return out;
}

// NaN is not representable in JSON; it becomes null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_draws_csv(std::ostream& out, const ChainOutput& chain, const std::string& config_hash) {
  out << "# config_hash: " << config_hash << '\n';
  for (const auto& c : chain.columns) out << csv_field(c) << ',';
  out << "accept\n";
  for (Eigen::Index r = 0; r < chain.draws.rows(); ++r) {
    for (Eigen::Index c = 0; c < chain.draws.cols(); ++c) out << format_double(chain.draws(r, c)) << ',';
    out << (static_cast<std::size_t>(r) < chain.accepted.size() ? chain.accepted[r] : 1) << '\n';
  }
}

DrawsTable read_draws_csv(std::istream& in) {
  DrawsTable t;
  std::string first;
  const auto start = in.tellg();
  if (std::getline(in, first) && first.rfind("# config_hash:", 0) == 0) {
    t.config_hash = first.substr(14);
    t.config_hash.erase(0, t.config_hash.find_first_not_of(' '));
  }
  in.clear();
  in.seekg(start);
  const auto records = parse_csv(in);
  if (records.empty()) throw ValidationError("draws CSV: no header");
  t.columns = records[0];
  for (std::size_t r = 1; r < records.size(); ++r) {
    std::vector<double> row;
    for (const auto& f : records[r]) row.push_back(std::stod(f));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string chain_summary_json(const ChainOutput& chain, const std::vector<ParamSummary>& summary,
                               const std::string& model, const std::string& config_hash) {
  json j;
  j["config_hash"] = config_hash;
  j["model"] = model;
  j["p0"] = chain.config.p0;
  j["seed"] = chain.config.seed;
  j["n_draws"] = chain.config.n_draws - chain.config.burn_in;
  j["burn_in"] = chain.config.burn_in;
  j["thin"] = chain.config.thin;
  j["stored_draws"] = chain.n_stored();
  j["accept_rate"] = chain.accept_rate;
  j["iota"] = chain.iota_final;
  j["D_hat"] = matrix_json(chain.D_hat);
  j["runtime_seconds"] = chain.runtime_seconds;
  json params = json::array();
  for (const auto& s : summary) {
    params.push_back({{"name", s.name},
                      {"mean", num(s.mean)},
                      {"sd", num(s.sd)},
                      {"ineff", num(s.ineff)},
                      {"ineff_flagged", s.ineff_flagged}});
  }
  j["parameters"] = params;
  return j.dump(2) + "\n";
}

std::string marglik_json(const MarglikReport& r, const std::string& config_hash) {
  json j;
  j["config_hash"] = config_hash;
  j["model"] = r.model;
  j["p0"] = r.p0;
  j["log_ml"] = r.log_ml;
  j["log_lik_star"] = r.log_lik_star;
  j["log_lik_mc_se"] = r.log_lik_mc_se;
  j["log_prior_star"] = r.log_prior_star;
  json ords = json::object();
  for (const auto& [name, v] : r.log_post_ordinates) ords[name] = v;
  j["log_post_ordinates"] = ords;
  json ts = json::object();
  for (std::size_t i = 0; i < r.theta_names.size() && i < r.theta_star.size(); ++i) {
    ts[r.theta_names[i]] = r.theta_star[i];
  }
  j["theta_star"] = ts;
  j["run_sizes"] = {r.M, r.M1, r.M2};
  j["J"] = r.J;
  return j.dump(2) + "\n";
}

std::string prior_to_json(const PriorSpec& p, const std::string& config_hash,
                          const std::string& extra_json) {
  json j = json::parse(extra_json);
  j["config_hash"] = config_hash;
  j["beta0"] = std::vector<double>(p.beta0.data(), p.beta0.data() + p.beta0.size());
  j["B0"] = matrix_json(p.B0);
  j["n0"] = p.n0;
  j["d0"] = p.d0;
  j["gamma"] = "uniform(L, U)";
  if (const auto* ig = std::get_if<IgPrior>(&p.heterogeneity)) {
    j["heterogeneity"] = {{"family", "inverse_gamma"}, {"c1", ig->c1}, {"d1", ig->d1}};
  } else {
    const auto& iw = std::get<IwPrior>(p.heterogeneity);
    j["heterogeneity"] = {{"family", "inverse_wishart"}, {"omega0", iw.omega0}, {"O0", matrix_json(iw.O0)}};
  }
  return j.dump(2) + "\n";
}

PriorSpec prior_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    PriorSpec p;
    const auto b = j.at("beta0").get<std::vector<double>>();
    p.beta0 = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    p.B0 = matrix_from(j.at("B0"), "B0");
    p.n0 = j.at("n0").get<double>();
    p.d0 = j.at("d0").get<double>();
    const json& h = j.at("heterogeneity");
    if (h.at("family") == "inverse_gamma") {
      p.heterogeneity = IgPrior{h.at("c1").get<double>(), h.at("d1").get<double>()};
    } else if (h.at("family") == "inverse_wishart") {
      p.heterogeneity = IwPrior{h.at("omega0").get<double>(), matrix_from(h.at("O0"), "O0")};
    } else {
      throw ValidationError("prior file: unknown heterogeneity family");
    }
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("prior file: ") + e.what());
  }
}

std::string artifact_hash(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::string line;
  while (std::getline(in, line)) {
    auto pos = line.find("config_hash");
    if (pos == std::string::npos) continue;
    pos = line.find_first_of(":", pos);
    if (pos == std::string::npos) continue;
    std::string v = line.substr(pos + 1);
    v.erase(0, v.find_first_not_of(" \""));
    v.erase(v.find_last_not_of(" \",\r") + 1);
    return v;
  }
  return {};
}

}  // namespace flexqr
