#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace flexqr {

struct PanelUnit {
  std::string id;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;
  int T() const { return static_cast<int>(y.size()); }
};

struct PanelDataset {
  std::vector<PanelUnit> units;
  int k = 0;
  int l = 0;
  std::vector<std::string> x_names;
  std::vector<std::string> z_names;
  /// For each Z column, the X column it duplicates, or -1 for a declared
  /// Z-only column.
  std::vector<int> z_in_x;

  int n() const { return static_cast<int>(units.size()); }
  int total_obs() const;
};

enum class Heterogeneity { intercept, full };

/// Omega ~ IW(omega0, O0).
struct IwPrior {
  double omega0 = 0.0;
  Eigen::MatrixXd O0;
};

/// phi^2 ~ IG(c1 / 2, d1 / 2), with Omega = phi^2 I.
struct IgPrior {
  double c1 = 0.0;
  double d1 = 0.0;
};

struct PriorSpec {
  Eigen::VectorXd beta0;
  Eigen::MatrixXd B0;
  double n0 = 5.0;
  double d0 = 8.0;
  std::variant<IwPrior, IgPrior> heterogeneity;

  bool intercept_only() const { return std::holds_alternative<IgPrior>(heterogeneity); }
};

/// beta ~ N(0, 100 I), sigma ~ IG(5/2, 8/2), omega0 = 5 + l,
/// O0 = (omega0 - l - 1) I; in intercept-only mode phi^2 ~ IG(6/2, 4/2),
/// the one-dimensional case of the same inverse Wishart.
PriorSpec default_priors(int k, int l, Heterogeneity het);

/// Diffuse priors for a training-sample fit: beta ~ N(0, 25 I),
/// phi^2 ~ IG(12/2, 10/2), sigma ~ IG(10/2, 8/2).
PriorSpec training_priors(int k, int l, Heterogeneity het);

struct ChainState {
  Eigen::VectorXd beta;
  Eigen::MatrixXd alpha;            // n x l
  std::vector<Eigen::VectorXd> nu;  // per unit, length T_i
  std::vector<Eigen::VectorXd> h;   // per unit; zeros under AL
  double sigma = 1.0;
  double gamma = 0.0;
  Eigen::MatrixXd omega;  // l x l; phi^2 I in intercept-only mode
  double phi2 = 1.0;
};

struct McmcConfig {
  /// Total sweeps including burn-in.
  long n_draws = 12500;
  long burn_in = 2500;
  long thin = 1;
  double p0 = 0.5;
  /// Initial MH scale; <= 0 selects 2.4 / sqrt(2).
  double iota = 0.0;
  double target_accept = 0.30;
  bool adapt_burnin = true;
  std::uint64_t seed = 1;
  bool store_alpha = false;
};

struct ChainOutput {
  std::vector<std::string> columns;
  /// One row per stored sweep.
  Eigen::MatrixXd draws;
  /// Optional: stored alpha, one n x l block per stored sweep.
  std::vector<Eigen::MatrixXd> alpha_draws;
  std::vector<int> accepted;  // per stored sweep (FREQ); all ones for REQ
  double accept_rate = 1.0;
  double iota_final = 0.0;
  /// MH proposal shape; the proposal covariance is iota_final^2 D_hat.
  Eigen::Matrix2d D_hat = Eigen::Matrix2d::Identity();
  double runtime_seconds = 0.0;
  McmcConfig config;
  ChainState last_state;

  long n_stored() const { return draws.rows(); }
  int column(const std::string& name) const;
};

struct Violation {
  std::string field;
  std::string message;
};

/// Lists every invariant violation; never throws.
std::vector<Violation> validate(const PanelDataset& data, const PriorSpec& priors,
                                const McmcConfig& cfg);
std::vector<Violation> validate_data(const PanelDataset& data);
std::vector<Violation> validate_priors(const PriorSpec& priors, int k, int l);

/// Throws ValidationError listing all violations when any exist.
void require_valid(const PanelDataset& data, const PriorSpec& priors, const McmcConfig& cfg);

bool is_spd(const Eigen::MatrixXd& m);

/// Draw-table columns: beta_1..k, sigma, [gamma], then phi2 or the lower
/// triangle omega_11, omega_21, omega_22, ...
std::vector<std::string> param_columns(int k, int l, bool intercept_only, bool with_gamma);
Eigen::RowVectorXd state_row(const ChainState& s, bool intercept_only, bool with_gamma);

}  // namespace flexqr
