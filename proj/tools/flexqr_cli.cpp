// flexqr: fit, compare and simulate random-effects quantile panel models.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "flexqr/diagnostics.hpp"
#include "flexqr/errors.hpp"
#include "flexqr/freq_sampler.hpp"
#include "flexqr/gal.hpp"
#include "flexqr/marglik.hpp"
#include "flexqr/panel_io.hpp"
#include "flexqr/parallel.hpp"
#include "flexqr/report_io.hpp"
#include "flexqr/req_sampler.hpp"
#include "flexqr/simstudy.hpp"

namespace fs = std::filesystem;
using namespace flexqr;

namespace {

struct RunArgs {
  std::string data, config, model = "freq", quantiles = "0.1,0.25,0.5,0.75,0.9";
  std::string heterogeneity, prior, units, out;
  long draws = 10000, burnin = 2500, thin = 1;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  bool force = false;
  int J = 5000;
};

std::vector<double> parse_quantiles(const std::string& s) {
  std::vector<double> q;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" ") == std::string::npos) continue;
    double v = 0.0;
    try {
      v = std::stod(item);
    } catch (const std::exception&) {
      throw ValidationError("--quantiles: not a number: '" + item + "'");
    }
    if (!(v > 0.0 && v < 1.0)) throw ValidationError("--quantiles: " + item + " is outside (0, 1)");
    q.push_back(v);
  }
  if (q.empty()) throw ValidationError("--quantiles: empty list");
  return q;
}

std::string label(double p0) { return format_double(p0); }

// Values from the sidecar config apply unless the flag was given.
void apply_config_options(CLI::App* app, RunArgs& a, const PanelConfig& cfg) {
  auto take = [&](const char* key, const char* flag, auto& target) {
    auto it = cfg.options.find(key);
    if (it == cfg.options.end() || app->count(flag) > 0) return;
    std::stringstream ss(it->second);
    ss >> target;
    if (ss.fail()) throw ValidationError(std::string("config: bad value for '") + key + "'");
  };
  take("model", "--model", a.model);
  take("draws", "--draws", a.draws);
  take("burnin", "--burnin", a.burnin);
  take("thin", "--thin", a.thin);
  take("seed", "--seed", a.seed);
  take("heterogeneity", "--heterogeneity", a.heterogeneity);
  if (auto it = cfg.options.find("quantiles"); it != cfg.options.end() && app->count("--quantiles") == 0) {
    a.quantiles = it->second;
  }
}

struct Loaded {
  PanelDataset data;
  PriorSpec priors;
  std::string hash_input;
};

std::vector<std::string> read_unit_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open unit list " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ids.push_back(line);
  }
  return ids;
}

Heterogeneity parse_het(const std::string& s, int l) {
  if (s.empty()) return l == 1 ? Heterogeneity::intercept : Heterogeneity::full;
  if (s == "intercept") return Heterogeneity::intercept;
  if (s == "full") return Heterogeneity::full;
  throw ValidationError("--heterogeneity must be 'intercept' or 'full'");
}

Loaded load(CLI::App* app, RunArgs& a, const std::string& command) {
  const PanelConfig pcfg = read_panel_config(a.config);
  apply_config_options(app, a, pcfg);
  if (a.model != "freq" && a.model != "req") throw ValidationError("--model must be 'freq' or 'req'");
  if (a.draws < 1 || a.burnin < 0 || a.thin < 1) throw ValidationError("--draws, --burnin, --thin out of range");
  Loaded L;
  L.data = read_panel_csv(a.data, pcfg);
  if (!a.units.empty()) L.data = subset_units(L.data, read_unit_list(a.units));
  std::string prior_text;
  if (!a.prior.empty()) {
    prior_text = read_file(a.prior);
    L.priors = prior_from_json(prior_text);
  } else {
    L.priors = default_priors(L.data.k, L.data.l, parse_het(a.heterogeneity, L.data.l));
  }
  if (!a.prior.empty() && !a.heterogeneity.empty() &&
      (parse_het(a.heterogeneity, L.data.l) == Heterogeneity::intercept) != L.priors.intercept_only()) {
    throw ValidationError("--heterogeneity conflicts with the prior file");
  }
  std::ostringstream h;
  h << command << '\n'
    << read_file(a.data) << '\n'
    << read_file(a.config) << '\n'
    << prior_text << '\n'
    << (a.units.empty() ? std::string() : read_file(a.units)) << '\n'
    << "model=" << a.model << ";quantiles=" << a.quantiles << ";draws=" << a.draws
    << ";burnin=" << a.burnin << ";thin=" << a.thin << ";seed=" << a.seed
    << ";heterogeneity=" << (L.priors.intercept_only() ? "intercept" : "full") << ";J=" << a.J;
  L.hash_input = h.str();
  return L;
}

McmcConfig mcmc_config(const RunArgs& a, double p0, std::uint64_t salt) {
  McmcConfig mc;
  mc.n_draws = a.draws + a.burnin;
  mc.burn_in = a.burnin;
  mc.thin = a.thin;
  mc.p0 = p0;
  mc.seed = derive_stream_id(a.seed, {salt});
  return mc;
}

// Creates `dir`, refusing to overwrite artifacts written under another hash.
void prepare_out(const std::string& dir, const std::string& hash, bool force,
                 const std::string& command) {
  if (dir.empty()) throw ValidationError("--out is required");
  const fs::path meta = fs::path(dir) / "run.json";
  if (fs::exists(meta) && !force) {
    const std::string old = artifact_hash(meta.string());
    if (old != hash) {
      throw ValidationError("output directory " + dir + " holds artifacts with config hash " + old +
                            " (this run: " + hash + "); use --force to overwrite");
    }
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  std::ofstream out(meta);
  if (!out) throw IoError("cannot write " + meta.string());
  out << "{\n  \"config_hash\": \"" << hash << "\",\n  \"command\": \"" << command << "\"\n}\n";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

// Runs task(i) on the pool and rethrows the first failure in index order.
void run_tasks(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(n);
  parallel_for(n, workers, [&](std::size_t i) {
    try {
      task(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ChainOutput fit_one(const Loaded& L, const std::string& model, const McmcConfig& mc) {
  require_valid(L.data, L.priors, mc);
  return model == "freq" ? run_freq(L.data, L.priors, mc) : run_req(L.data, L.priors, mc);
}

int cmd_fit(CLI::App* app, RunArgs& a) {
  const Loaded L = load(app, a, "fit");
  const std::vector<double> qs = parse_quantiles(a.quantiles);
  const std::string hash = hex64(fnv1a(L.hash_input));
  prepare_out(a.out, hash, a.force, "fit");
  std::vector<std::string> blocks(qs.size());
  run_tasks(qs.size(), a.workers, [&](std::size_t i) {
    const McmcConfig mc = mcmc_config(a, qs[i], i);
    const ChainOutput chain = fit_one(L, a.model, mc);
    const auto summary = summarize(chain);
    const fs::path dir = fs::path(a.out) / (a.model + "_q" + label(qs[i]));
    fs::create_directories(dir);
    std::ostringstream draws, csv, text;
    write_draws_csv(draws, chain, hash);
    write_text(dir / "draws.csv", draws.str());
    csv << "# config_hash: " << hash << '\n';
    write_summary_csv(csv, summary);
    write_text(dir / "summary.csv", csv.str());
    write_text(dir / "summary.json", chain_summary_json(chain, summary, a.model, hash));
    text << "== " << (a.model == "freq" ? "FREQ" : "REQ") << " quantile " << label(qs[i])
         << " (acceptance " << format_double(std::round(chain.accept_rate * 1e4) / 1e4) << ") ==\n";
    write_summary_text(text, summary);
    write_text(dir / "summary.txt", text.str());
    blocks[i] = text.str();
  });
  for (const auto& b : blocks) std::cout << b << '\n';
  std::cout << "config_hash " << hash << '\n';
  return 0;
}

std::string sig4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

int cmd_compare(CLI::App* app, RunArgs& a) {
  const Loaded L = load(app, a, "compare");
  const std::vector<double> qs = parse_quantiles(a.quantiles);
  const std::string hash = hex64(fnv1a(L.hash_input));
  prepare_out(a.out, hash, a.force, "compare");
  std::vector<MarglikReport> reports(2 * qs.size());
  run_tasks(reports.size(), a.workers, [&](std::size_t i) {
    const std::size_t q = i / 2;
    const std::string model = i % 2 == 0 ? "freq" : "req";
    const McmcConfig mc = mcmc_config(a, qs[q], i);
    const ChainOutput chain = fit_one(L, model, mc);
    MarglikOptions mo;
    mo.J = a.J;
    reports[i] = model == "freq" ? marglik_freq(L.data, L.priors, mc, chain, mo)
                                 : marglik_req(L.data, L.priors, mc, chain, mo);
    write_text(fs::path(a.out) / ("marglik_" + model + "_q" + label(qs[q]) + ".json"),
               marglik_json(reports[i], hash));
  });
  std::ostringstream table, csv;
  csv << "# config_hash: " << hash << '\n'
      << "quantile,log_ml_freq,log_ml_req,log_bf_freq_req,prob_freq,prob_req,odds_freq_req\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-9s %12s %12s %10s %9s %9s %11s\n", "quantile", "logML FREQ",
                "logML REQ", "log BF", "P(FREQ)", "P(REQ)", "odds");
  table << line;
  for (std::size_t q = 0; q < qs.size(); ++q) {
    const double f = reports[2 * q].log_ml, r = reports[2 * q + 1].log_ml;
    const ModelComparison c = compare_models(f, r);
    std::snprintf(line, sizeof line, "%-9s %12.3f %12.3f %10.3f %9s %9s %11s\n", label(qs[q]).c_str(),
                  f, r, c.log_bf, sig4(c.prob_a).c_str(), sig4(c.prob_b).c_str(), sig4(c.odds).c_str());
    table << line;
    csv << label(qs[q]) << ',' << format_double(f) << ',' << format_double(r) << ','
        << format_double(c.log_bf) << ',' << sig4(c.prob_a) << ',' << sig4(c.prob_b) << ','
        << sig4(c.odds) << '\n';
  }
  write_text(fs::path(a.out) / "compare.csv", csv.str());
  write_text(fs::path(a.out) / "compare.txt", table.str());
  std::cout << table.str() << "config_hash " << hash << '\n';
  return 0;
}

// Inverse-gamma (shape, rate) with the given mean and variance.
std::pair<double, double> ig_moment_match(double m, double v) {
  if (!(m > 0.0 && v > 0.0)) throw NumericalError("trainprior: degenerate posterior for moment matching");
  const double a = m * m / v + 2.0;
  return {a, m * (a - 1.0)};
}

int cmd_trainprior(CLI::App* app, RunArgs& a, double fraction, double quantile) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ValidationError("--fraction must lie in (0, 1]");
  if (!(quantile > 0.0 && quantile < 1.0)) throw ValidationError("--quantile must lie in (0, 1)");
  a.quantiles = label(quantile);
  // The first-stage fit always uses the diffuse training priors.
  if (!a.prior.empty()) throw ValidationError("trainprior does not take --prior");
  Loaded L = load(app, a, "trainprior");
  std::ostringstream extra_hash;
  extra_hash << L.hash_input << ";fraction=" << format_double(fraction);
  const std::string hash = hex64(fnv1a(extra_hash.str()));

  const int n = L.data.n();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  RngStream rng(a.seed, 0x7EA1);
  for (int i = n - 1; i > 0; --i) {
    const int j = std::min(i, static_cast<int>(rng.uniform() * (i + 1)));
    std::swap(order[i], order[j]);
  }
  const long n_train = std::lround(fraction * n);
  if (n_train < 20) {
    throw ValidationError("training sample has " + std::to_string(n_train) +
                          " units; at least 20 are required");
  }
  std::vector<int> train_idx(order.begin(), order.begin() + n_train);
  std::vector<int> held_idx(order.begin() + n_train, order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(held_idx.begin(), held_idx.end());
  std::vector<std::string> train_ids, held_ids;
  for (int i : train_idx) train_ids.push_back(L.data.units[i].id);
  for (int i : held_idx) held_ids.push_back(L.data.units[i].id);

  prepare_out(a.out, hash, a.force, "trainprior");
  const PanelDataset train = subset_units(L.data, train_ids);
  const Heterogeneity het = L.priors.intercept_only() ? Heterogeneity::intercept : Heterogeneity::full;
  Loaded T{train, training_priors(train.k, train.l, het), {}};
  const McmcConfig mc = mcmc_config(a, quantile, 0);
  const ChainOutput chain = fit_one(T, a.model, mc);

  const int k = train.k;
  const Eigen::MatrixXd B = chain.draws.leftCols(k);
  PriorSpec out;
  out.beta0 = B.colwise().mean().transpose();
  const Eigen::MatrixXd centred = B.rowwise() - out.beta0.transpose();
  out.B0 = centred.transpose() * centred / static_cast<double>(B.rows() - 1);
  if (!is_spd(out.B0)) throw NumericalError("trainprior: first-stage beta covariance is not SPD");
  auto moments = [&](const std::string& name) {
    const Eigen::VectorXd c = chain.draws.col(chain.column(name));
    const double m = c.mean();
    return std::pair<double, double>{m, (c.array() - m).square().sum() / (c.size() - 1.0)};
  };
  const auto [sm, sv] = moments("sigma");
  const auto [sa, sb] = ig_moment_match(sm, sv);
  out.n0 = 2.0 * sa;
  out.d0 = 2.0 * sb;
  if (het == Heterogeneity::intercept) {
    const auto [pm, pv] = moments("phi2");
    const auto [pa, pb] = ig_moment_match(pm, pv);
    out.heterogeneity = IgPrior{2.0 * pa, 2.0 * pb};
  } else {
    // Inverse Wishart: match the mean, and the degrees of freedom to the
    // diagonal variances, Var(W_jj) = 2 m_jj^2 / (df - l - 3).
    const int l = train.l;
    Eigen::MatrixXd mean(l, l);
    double df_sum = 0.0;
    for (int i = 0; i < l; ++i) {
      for (int j = 0; j <= i; ++j) {
        const auto [m, v] = moments("omega_" + std::to_string(i + 1) + std::to_string(j + 1));
        mean(i, j) = mean(j, i) = m;
        if (i == j) df_sum += l + 3.0 + 2.0 * m * m / v;
      }
    }
    IwPrior iw;
    iw.omega0 = df_sum / l;
    iw.O0 = mean * (iw.omega0 - l - 1.0);
    out.heterogeneity = iw;
  }
  std::ostringstream extra;
  extra << "{\"training\": {\"fraction\": " << format_double(fraction) << ", \"seed\": " << a.seed
        << ", \"model\": \"" << a.model << "\", \"quantile\": " << label(quantile)
        << ", \"training_units\": " << train_ids.size() << ", \"heldout_units\": " << held_ids.size()
        << "}}";
  write_text(fs::path(a.out) / "prior.json", prior_to_json(out, hash, extra.str()));
  auto list = [&](const std::vector<std::string>& ids) {
    std::string s = "# config_hash: " + hash + "\n";
    for (const auto& id : ids) s += id + "\n";
    return s;
  };
  write_text(fs::path(a.out) / "heldout_units.txt", list(held_ids));
  write_text(fs::path(a.out) / "training_units.txt", list(train_ids));
  std::cout << "training units " << train_ids.size() << ", held-out units " << held_ids.size() << '\n'
            << "prior written to " << (fs::path(a.out) / "prior.json").string() << '\n'
            << "config_hash " << hash << '\n';
  return 0;
}

int cmd_simstudy(RunArgs& a, const std::string& grid_name, bool marglik) {
  std::vector<DgpSpec> grid;
  if (grid_name == "study") {
    grid = study_grid(a.seed);
  } else if (grid_name == "small") {
    for (const auto& s : study_grid(a.seed)) {
      if (s.n == 100 && s.T <= 10) grid.push_back(s);
    }
  } else {
    throw ValidationError("--grid must be 'study' or 'small'");
  }
  StudyConfig sc;
  sc.quantiles = parse_quantiles(a.quantiles);
  sc.n_draws = a.draws + a.burnin;
  sc.burn_in = a.burnin;
  sc.seed = a.seed;
  sc.marglik = marglik;
  sc.J = a.J;
  sc.workers = a.workers;
  std::ostringstream h;
  h << "simstudy;grid=" << grid_name << ";quantiles=" << a.quantiles << ";draws=" << a.draws
    << ";burnin=" << a.burnin << ";seed=" << a.seed << ";J=" << a.J << ";marglik=" << marglik;
  const std::string hash = hex64(fnv1a(h.str()));
  prepare_out(a.out, hash, a.force, "simstudy");
  const StudyReport rep = run_study(grid, sc);

  std::ostringstream csv, text, cells;
  csv << "# config_hash: " << hash << "\nstudy";
  text << std::string(12, ' ');
  for (double q : rep.quantiles) {
    csv << ",q" << label(q);
    char b[32];
    std::snprintf(b, sizeof b, "%11s", ("q" + label(q)).c_str());
    text << b;
  }
  csv << '\n';
  text << '\n';
  for (std::size_t r = 0; r < rep.table_rows.size(); ++r) {
    csv << rep.table_rows[r];
    char b[32];
    std::snprintf(b, sizeof b, "%-12s", rep.table_rows[r].c_str());
    text << b;
    for (Eigen::Index c = 0; c < rep.log_ml_table.cols(); ++c) {
      const double v = rep.log_ml_table(static_cast<Eigen::Index>(r), c);
      csv << ',' << (std::isnan(v) ? std::string("NA") : format_double(v));
      std::snprintf(b, sizeof b, "%11.3f", v);
      text << (std::isnan(v) ? std::string("         NA") : std::string(b));
    }
    csv << '\n';
    text << '\n';
  }
  cells << "# config_hash: " << hash << "\nstudy,n,T,quantile,model,ok,accept_rate,log_ml,error\n";
  int failed = 0;
  for (const auto& c : rep.cells) {
    failed += c.ok ? 0 : 1;
    cells << c.study << ',' << c.n << ',' << c.T << ',' << label(c.p0) << ',' << c.model << ','
          << (c.ok ? 1 : 0) << ',' << format_double(c.accept_rate) << ','
          << (std::isnan(c.log_ml) ? std::string("NA") : format_double(c.log_ml)) << ','
          << csv_field(c.error) << '\n';
  }
  write_text(fs::path(a.out) / "log_ml_table.csv", csv.str());
  write_text(fs::path(a.out) / "cells.csv", cells.str());
  write_text(fs::path(a.out) / "log_ml_table.txt", text.str());
  std::cout << text.str();
  if (failed) std::cout << failed << " cell(s) failed, see cells.csv\n";
  std::cout << "config_hash " << hash << '\n';
  return 0;
}

int cmd_gal_curve(double p0, const std::string& gammas, double sigma, double mu, double from,
                  double to, int points, const std::string& out) {
  if (points < 2 || !(to > from)) throw ValidationError("gal-curve: need --points >= 2 and --to > --from");
  std::vector<double> gs;
  {
    std::stringstream ss(gammas);
    std::string item;
    while (std::getline(ss, item, ',')) gs.push_back(std::stod(item));
  }
  std::ostringstream os;
  os << "s,gamma,pdf\n";
  for (double g : gs) {
    const GalParams par{mu, sigma, p0, g};
    gal_validate(par);
    for (int i = 0; i < points; ++i) {
      const double s = from + (to - from) * i / (points - 1);
      os << format_double(s) << ',' << format_double(g) << ',' << format_double(std::exp(gal_logpdf(par, s)))
         << '\n';
    }
  }
  if (out.empty()) std::cout << os.str();
  else write_text(out, os.str());
  return 0;
}

// Synthetic panel with `covariates` regressors and a `year` column whose
// categories become time dummies: k = 1 + covariates + (T - 1).
void write_wide_panel(const fs::path& dir, int n, int T, int covariates, std::uint64_t seed) {
  RngStream base(seed, 0x91DE);
  std::ostringstream csv, cfg;
  csv << "unit_id,year,y";
  for (int j = 1; j <= covariates; ++j) csv << ",x" << j;
  csv << '\n';
  for (int i = 0; i < n; ++i) {
    RngStream rng = base.substream({static_cast<std::uint64_t>(i)});
    const double alpha = 0.5 * rng.normal();
    for (int t = 0; t < T; ++t) {
      std::vector<double> x(covariates);
      double y = 1.0 + alpha + 0.1 * t;
      for (int j = 0; j < covariates; ++j) {
        x[j] = rng.normal();
        y += (j % 3 == 0 ? 0.5 : (j % 3 == 1 ? -0.25 : 0.0)) * x[j];
      }
      const double u = rng.uniform();
      y += 0.5 * std::log(u / (1.0 - u));
      csv << "u" << i << ',' << 2010 + t << ',' << format_double(y);
      for (double v : x) csv << ',' << format_double(v);
      csv << '\n';
    }
  }
  cfg << "x = intercept";
  for (int j = 1; j <= covariates; ++j) cfg << ", x" << j;
  cfg << "\nz = intercept\ntime_dummies = year\n";
  write_text(dir / "panel.csv", csv.str());
  write_text(dir / "panel.cfg", cfg.str());
}

int cmd_simulate(const std::string& out, const std::string& shape, int n, int T, const std::string& error,
                 double p0, double gamma_frac, double sigma, std::uint64_t seed, int covariates) {
  if (out.empty()) throw ValidationError("--out is required");
  if (n < 1 || T < 1) throw ValidationError("--n and --T must be positive");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out);
  if (shape == "wide") {
    write_wide_panel(out, n, T, covariates, seed);
    return 0;
  }
  if (shape != "study") throw ValidationError("--shape must be 'study' or 'wide'");
  DgpSpec spec;
  spec.n = n;
  spec.T = T;
  spec.seed = seed;
  if (error == "logistic") spec.error = ErrorKind::logistic;
  else if (error == "normal") spec.error = ErrorKind::normal;
  else if (error == "gal") {
    spec.error = ErrorKind::gal;
    spec.err_p0 = p0;
    const GalBounds b = gal_bounds(p0);
    spec.err_gamma = gamma_frac >= 0.0 ? gamma_frac * b.U : -gamma_frac * b.L;
    spec.err_sigma = sigma;
  } else {
    throw ValidationError("--error must be logistic, gal or normal");
  }
  const PanelDataset data = generate(spec);
  std::ostringstream csv, cfg;
  PanelConfig pc = write_panel_csv(csv, data);
  write_panel_config(cfg, pc);
  write_text(fs::path(out) / "panel.csv", csv.str());
  write_text(fs::path(out) / "panel.cfg", cfg.str());
  return 0;
}

void add_run_options(CLI::App* c, RunArgs& a, bool with_model, bool with_quantiles) {
  c->add_option("--data", a.data, "panel CSV (columns unit_id, y, covariates)")->required();
  c->add_option("--config", a.config, "sidecar config declaring x, z and time_dummies")->required();
  if (with_model) c->add_option("--model", a.model, "freq or req");
  if (with_quantiles) c->add_option("--quantiles", a.quantiles, "comma-separated quantiles");
  c->add_option("--draws", a.draws, "stored draws after burn-in");
  c->add_option("--burnin", a.burnin, "burn-in sweeps");
  c->add_option("--thin", a.thin, "thinning interval");
  c->add_option("--seed", a.seed, "random seed");
  c->add_option("--heterogeneity", a.heterogeneity, "intercept or full");
  c->add_option("--units", a.units, "restrict to the unit ids listed in this file");
  c->add_option("--workers", a.workers, "worker threads (0 = all cores)");
  c->add_option("--out", a.out, "output directory")->required();
  c->add_flag("--force", a.force, "overwrite artifacts written under another config hash");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian quantile regression for panel data under GAL and AL errors"};
  app.require_subcommand(1);
  RunArgs a;

  auto* fit = app.add_subcommand("fit", "fit FREQ or REQ at each quantile");
  add_run_options(fit, a, true, true);
  fit->add_option("--prior", a.prior, "prior JSON written by trainprior");

  auto* compare = app.add_subcommand("compare", "marginal likelihoods of FREQ and REQ per quantile");
  add_run_options(compare, a, false, true);
  compare->add_option("--prior", a.prior, "prior JSON written by trainprior");
  compare->add_option("--J", a.J, "Monte Carlo draws per unit for the likelihood");

  double fraction = 0.10, quantile = 0.5;
  auto* train = app.add_subcommand("trainprior", "training-sample prior from a unit-level split");
  add_run_options(train, a, true, false);
  train->add_option("--fraction", fraction, "share of units in the training sample");
  train->add_option("--quantile", quantile, "quantile of the first-stage fit");

  std::string grid = "study";
  bool no_marglik = false;
  auto* sim = app.add_subcommand("simstudy", "simulation study over the (n, T) grid");
  sim->add_option("--grid", grid, "study (9 cells) or small");
  sim->add_option("--quantiles", a.quantiles, "comma-separated quantiles");
  sim->add_option("--draws", a.draws, "stored draws after burn-in");
  sim->add_option("--burnin", a.burnin, "burn-in sweeps");
  sim->add_option("--seed", a.seed, "random seed");
  sim->add_option("--J", a.J, "Monte Carlo draws per unit for the likelihood");
  sim->add_option("--workers", a.workers, "worker threads (0 = all cores)");
  sim->add_option("--out", a.out, "output directory")->required();
  sim->add_flag("--force", a.force, "overwrite artifacts written under another config hash");
  sim->add_flag("--no-marglik", no_marglik, "skip marginal likelihoods");

  double p0 = 0.5, sigma = 1.0, mu = 0.0, from = -10.0, to = 10.0;
  std::string gammas = "0";
  int points = 401;
  std::string curve_out;
  auto* curve = app.add_subcommand("gal-curve", "GAL density on a grid, as CSV");
  curve->add_option("--p0", p0, "quantile");
  curve->add_option("--gamma", gammas, "comma-separated shape values");
  curve->add_option("--sigma", sigma, "scale");
  curve->add_option("--mu", mu, "location");
  curve->add_option("--from", from, "grid start");
  curve->add_option("--to", to, "grid end");
  curve->add_option("--points", points, "grid size");
  curve->add_option("--out", curve_out, "output file (default stdout)");

  std::string shape = "study", error = "logistic", sim_out;
  int sn = 100, sT = 5, covariates = 10;
  double sp0 = 0.5, sgamma = 0.0, ssigma = 1.0;
  std::uint64_t sseed = 1;
  auto* simulate = app.add_subcommand("simulate", "write a synthetic panel CSV and config");
  simulate->add_option("--shape", shape, "study (simulation design) or wide (time dummies)");
  simulate->add_option("--n", sn, "units");
  simulate->add_option("--T", sT, "periods per unit");
  simulate->add_option("--error", error, "logistic, gal or normal");
  simulate->add_option("--p0", sp0, "GAL error quantile");
  simulate->add_option("--gamma-frac", sgamma, "GAL shape as a fraction of U (>= 0) or L (< 0)");
  simulate->add_option("--sigma", ssigma, "GAL error scale");
  simulate->add_option("--covariates", covariates, "regressors for the wide shape");
  simulate->add_option("--seed", sseed, "random seed");
  simulate->add_option("--out", sim_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*fit) return cmd_fit(fit, a);
    if (*compare) return cmd_compare(compare, a);
    if (*train) return cmd_trainprior(train, a, fraction, quantile);
    if (*sim) return cmd_simstudy(a, grid, !no_marglik);
    if (*curve) return cmd_gal_curve(p0, gammas, sigma, mu, from, to, points, curve_out);
    if (*simulate) return cmd_simulate(sim_out, shape, sn, sT, error, sp0, sgamma, ssigma, sseed, covariates);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
