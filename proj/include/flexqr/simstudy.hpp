#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "flexqr/model.hpp"

namespace flexqr {

enum class ErrorKind { logistic, gal, normal };

struct DgpSpec {
  int n = 100;
  int T = 5;
  Eigen::Vector3d beta_true{10.0, 5.0, 2.0};
  Eigen::Matrix2d re_cov = Eigen::Matrix2d::Identity();
  ErrorKind error = ErrorKind::logistic;
  /// GAL error parameters (mu = 0), used when error == gal.
  double err_p0 = 0.5;
  double err_gamma = 0.0;
  double err_sigma = 1.0;
  std::uint64_t seed = 1;
  /// Test hook: epsilon = 0 and alpha = 0.
  bool zero_noise = false;
};

/// y_it = alpha_1i + alpha_2i z2_it + b1 + b2 x2_it + b3 x3_it + eps_it with
/// z2 ~ U(1, 3), x2 ~ N(0, 0.25), x3 ~ N(2, 0.25) (variances), all per (i, t).
PanelDataset generate(const DgpSpec& spec);

/// The nine (n, T) cells in study order: n = 100, 250, 500 outer and
/// T = 5, 10, 15 inner.
std::vector<DgpSpec> study_grid(std::uint64_t seed);

struct StudyConfig {
  std::vector<double> quantiles{0.1, 0.25, 0.5, 0.75, 0.9};
  long n_draws = 12500;
  long burn_in = 2500;
  std::uint64_t seed = 1;
  bool marglik = true;
  /// Monte Carlo draws per unit for the likelihood ordinate.
  int J = 5000;
  unsigned workers = 1;
};

struct StudyCell {
  int study = 0;
  int n = 0;
  int T = 0;
  double p0 = 0.0;
  std::string model;  // "FREQ" or "REQ"
  bool ok = false;
  std::string error;
  double log_ml = 0.0;
  double accept_rate = 0.0;
  std::vector<std::string> columns;
  std::vector<double> mean, sd, ineff;
};

struct StudyReport {
  std::vector<StudyCell> cells;
  /// Rows "SS<k> FREQ" / "SS<k> REQ", one column per quantile, log-ML.
  std::vector<std::string> table_rows;
  std::vector<double> quantiles;
  Eigen::MatrixXd log_ml_table;
};

StudyReport run_study(const std::vector<DgpSpec>& grid, const StudyConfig& cfg);

}  // namespace flexqr
