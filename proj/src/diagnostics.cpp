#include "flexqr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "flexqr/errors.hpp"

namespace flexqr {

IneffResult inefficiency_factor(std::span<const double> draws, double taper_threshold) {
  const long N = static_cast<long>(draws.size());
  if (N < 100) throw DomainError("inefficiency_factor: need at least 100 draws");
  if (!(taper_threshold > 0.0 && taper_threshold < 1.0)) {
    throw DomainError("inefficiency_factor: taper threshold must lie in (0,1)");
  }
  double mean = 0.0;
  for (double x : draws) mean += x;
  mean /= N;
  std::vector<double> c(draws.size());
  double c0 = 0.0;
  for (long i = 0; i < N; ++i) {
    c[i] = draws[i] - mean;
    c0 += c[i] * c[i];
  }
  IneffResult out;
  if (c0 == 0.0) {
    out.value = std::numeric_limits<double>::quiet_NaN();
    out.flagged = true;
    return out;
  }
  const long cap = N / 10;
  double sum = 0.0;
  long t = 1;
  for (; t <= cap; ++t) {
    double ct = 0.0;
    for (long i = 0; i + t < N; ++i) ct += c[i] * c[i + t];
    const double rho = ct / c0;
    if (rho < taper_threshold) break;
    sum += rho;
  }
  out.lag = std::min(t, cap);
  out.value = std::max(1.0, 1.0 + 2.0 * sum);
  return out;
}

std::vector<ParamSummary> summarize(const ChainOutput& chain, double taper_threshold) {
  if (chain.n_stored() == 0) throw DomainError("summarize: empty chain");
  std::vector<ParamSummary> rows;
  const long N = chain.n_stored();
  for (std::size_t j = 0; j < chain.columns.size(); ++j) {
    const Eigen::VectorXd col = chain.draws.col(static_cast<Eigen::Index>(j));
    ParamSummary s;
    s.name = chain.columns[j];
    s.mean = col.mean();
    s.sd = N > 1 ? std::sqrt((col.array() - s.mean).square().sum() / (N - 1)) : 0.0;
    if (N >= 100) {
      const IneffResult r = inefficiency_factor(std::span<const double>(col.data(), col.size()),
                                                taper_threshold);
      s.ineff = r.value;
      s.ineff_flagged = r.flagged;
    } else {
      s.ineff = std::numeric_limits<double>::quiet_NaN();
      s.ineff_flagged = true;
    }
    rows.push_back(s);
  }
  return rows;
}

namespace {
std::string fmt(double v, int prec) {
  if (std::isnan(v)) return "NA";
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}
}  // namespace

void write_summary_text(std::ostream& os, const std::vector<ParamSummary>& rows) {
  std::size_t w = 9;
  for (const auto& r : rows) w = std::max(w, r.name.size());
  os << std::left << std::setw(static_cast<int>(w)) << "parameter" << std::right
     << std::setw(12) << "mean" << std::setw(12) << "sd" << std::setw(10) << "IF" << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(w)) << r.name << std::right << std::setw(12)
       << fmt(r.mean, 4) << std::setw(12) << fmt(r.sd, 4) << std::setw(10)
       << (r.ineff_flagged ? std::string("flagged") : fmt(r.ineff, 2)) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<ParamSummary>& rows) {
  os << "parameter,mean,sd,ineff,ineff_flagged\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.name << ',' << r.mean << ',' << r.sd << ',';
    if (std::isnan(r.ineff)) os << "NA"; else os << r.ineff;
    os << ',' << (r.ineff_flagged ? 1 : 0) << '\n';
  }
}

}  // namespace flexqr
