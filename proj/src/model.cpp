#include "flexqr/model.hpp"

#include <cmath>
#include <sstream>

#include "flexqr/errors.hpp"

namespace flexqr {

int PanelDataset::total_obs() const {
  int total = 0;
  for (const auto& u : units) total += u.T();
  return total;
}

int ChainOutput::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

PriorSpec default_priors(int k, int l, Heterogeneity het) {
  PriorSpec p;
  p.beta0 = Eigen::VectorXd::Zero(k);
  p.B0 = 100.0 * Eigen::MatrixXd::Identity(k, k);
  p.n0 = 5.0;
  p.d0 = 8.0;
  if (het == Heterogeneity::intercept) {
    p.heterogeneity = IgPrior{6.0, 4.0};
  } else {
    IwPrior iw;
    iw.omega0 = 5.0 + l;
    iw.O0 = (iw.omega0 - l - 1.0) * Eigen::MatrixXd::Identity(l, l);
    p.heterogeneity = iw;
  }
  return p;
}

PriorSpec training_priors(int k, int l, Heterogeneity het) {
  PriorSpec p = default_priors(k, l, het);
  p.B0 = 25.0 * Eigen::MatrixXd::Identity(k, k);
  p.n0 = 10.0;
  p.d0 = 8.0;
  if (het == Heterogeneity::intercept) p.heterogeneity = IgPrior{12.0, 10.0};
  return p;
}

bool is_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite()) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + m.cwiseAbs().maxCoeff())) {
    return false;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

std::vector<std::string> param_columns(int k, int l, bool intercept_only, bool with_gamma) {
  std::vector<std::string> cols;
  for (int j = 0; j < k; ++j) cols.push_back("beta_" + std::to_string(j + 1));
  cols.push_back("sigma");
  if (with_gamma) cols.push_back("gamma");
  if (intercept_only) {
    cols.push_back("phi2");
  } else {
    for (int i = 0; i < l; ++i) {
      for (int j = 0; j <= i; ++j) cols.push_back("omega_" + std::to_string(i + 1) + std::to_string(j + 1));
    }
  }
  return cols;
}

Eigen::RowVectorXd state_row(const ChainState& s, bool intercept_only, bool with_gamma) {
  const auto k = s.beta.size();
  const auto l = s.omega.rows();
  const auto width = k + 1 + (with_gamma ? 1 : 0) + (intercept_only ? 1 : l * (l + 1) / 2);
  Eigen::RowVectorXd row(width);
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < k; ++j) row[c++] = s.beta[j];
  row[c++] = s.sigma;
  if (with_gamma) row[c++] = s.gamma;
  if (intercept_only) {
    row[c++] = s.phi2;
  } else {
    for (Eigen::Index i = 0; i < l; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) row[c++] = s.omega(i, j);
    }
  }
  return row;
}

std::vector<Violation> validate_data(const PanelDataset& data) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string msg) { out.push_back({std::move(field), std::move(msg)}); };
  if (data.units.empty()) add("units", "dataset has no units");
  if (data.k < 1) add("k", "at least one common covariate is required");
  if (data.l < 1) add("l", "at least one random-effects covariate is required");
  if (!data.x_names.empty() && static_cast<int>(data.x_names.size()) != data.k) {
    add("x_names", "x_names length differs from k");
  }
  if (!data.z_names.empty() && static_cast<int>(data.z_names.size()) != data.l) {
    add("z_names", "z_names length differs from l");
  }
  if (static_cast<int>(data.z_in_x.size()) != data.l) {
    add("z_in_x", "every Z column needs a declared X column (or -1)");
  }
  for (int j = 0; j < static_cast<int>(data.z_in_x.size()); ++j) {
    const int xj = data.z_in_x[j];
    if (xj < -1 || xj >= data.k) {
      add("z_in_x", "Z column " + std::to_string(j) + " maps to a non-existent X column");
    }
  }
  for (const auto& u : data.units) {
    const std::string where = "unit " + u.id;
    if (u.T() == 0) {
      add(where, "empty unit");
      continue;
    }
    if (u.X.rows() != u.T() || u.X.cols() != data.k) {
      add(where, "X must be T_i x k");
      continue;
    }
    if (u.Z.rows() != u.T() || u.Z.cols() != data.l) {
      add(where, "Z must be T_i x l");
      continue;
    }
    if (!u.y.allFinite()) add(where, "non-finite response");
    if (!u.X.allFinite()) add(where, "non-finite entry in X");
    if (!u.Z.allFinite()) add(where, "non-finite entry in Z");
    for (int j = 0; j < static_cast<int>(data.z_in_x.size()) && j < data.l; ++j) {
      const int xj = data.z_in_x[j];
      if (xj >= 0 && xj < data.k && (u.Z.col(j) - u.X.col(xj)).cwiseAbs().maxCoeff() > 0.0) {
        add(where, "Z column " + std::to_string(j) + " differs from its declared X column " +
                       std::to_string(xj));
      }
    }
  }
  return out;
}

std::vector<Violation> validate_priors(const PriorSpec& priors, int k, int l) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string msg) { out.push_back({std::move(field), std::move(msg)}); };
  if (priors.beta0.size() != k) add("beta0", "beta0 must have length k");
  if (priors.B0.rows() != k || priors.B0.cols() != k) {
    add("B0", "B0 must be k x k");
  } else if (!is_spd(priors.B0)) {
    add("B0", "B0 not SPD");
  }
  if (!(priors.n0 > 0.0)) add("n0", "n0 must be positive");
  if (!(priors.d0 > 0.0)) add("d0", "d0 must be positive");
  if (const auto* iw = std::get_if<IwPrior>(&priors.heterogeneity)) {
    if (!(iw->omega0 > l - 1)) add("omega0", "omega0 must exceed l - 1");
    if (iw->O0.rows() != l || iw->O0.cols() != l) {
      add("O0", "O0 must be l x l");
    } else if (!is_spd(iw->O0)) {
      add("O0", "O0 not SPD");
    }
  } else {
    const auto& ig = std::get<IgPrior>(priors.heterogeneity);
    if (!(ig.c1 > 0.0)) add("c1", "c1 must be positive");
    if (!(ig.d1 > 0.0)) add("d1", "d1 must be positive");
  }
  return out;
}

std::vector<Violation> validate(const PanelDataset& data, const PriorSpec& priors,
                                const McmcConfig& cfg) {
  auto out = validate_data(data);
  auto pv = validate_priors(priors, data.k, data.l);
  out.insert(out.end(), pv.begin(), pv.end());
  auto add = [&](std::string field, std::string msg) { out.push_back({std::move(field), std::move(msg)}); };
  if (!(cfg.p0 > 0.0 && cfg.p0 < 1.0)) add("p0", "quantile must lie in (0, 1)");
  if (cfg.thin < 1) add("thin", "thin must be at least 1");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.n_draws) add("burn_in", "burn_in must be below the total iterations");
  if (!(cfg.target_accept > 0.0 && cfg.target_accept < 1.0)) {
    add("target_accept", "target acceptance must lie in (0, 1)");
  }
  if (!std::isfinite(cfg.iota)) add("iota", "iota must be finite");
  return out;
}

void require_valid(const PanelDataset& data, const PriorSpec& priors, const McmcConfig& cfg) {
  const auto v = validate(data, priors, cfg);
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid input:";
  for (const auto& x : v) msg << "\n  " << x.field << ": " << x.message;
  throw ValidationError(msg.str());
}

}  // namespace flexqr
