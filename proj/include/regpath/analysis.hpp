#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "regpath/tikhonov.hpp"
#include "regpath/time_grid.hpp"

namespace regpath {

/// Experimental orders of convergence along a parameter-halving sequence:
/// EOC_l = log2(e_{l-1} / e_l). The first entry has no predecessor and is
/// reported as NaN (rendered "/").
inline std::vector<double> eoc(const std::vector<double>& errors) {
  std::vector<double> out(errors.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i] <= 0.0) throw std::invalid_argument("eoc: errors must be positive");
    if (i > 0) out[i] = std::log2(errors[i - 1] / errors[i]);
  }
  return out;
}

/// Least-squares power-law fit value = C * alpha^exponent in log-log space.
struct RateFit {
  double exponent = 0.0;
  double constant = 0.0;   // multiplicative constant C
  double residual = 0.0;   // RMS deviation of log(value) from the fit
  int points = 0;
};

inline RateFit fit_rate(const std::vector<double>& values,
                        const std::vector<double>& alphas) {
  if (values.size() != alphas.size() || values.size() < 3)
    throw std::invalid_argument("fit_rate: need >= 3 matching points");
  const int n = static_cast<int>(values.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    if (values[i] <= 0.0 || alphas[i] <= 0.0)
      throw std::invalid_argument("fit_rate: values and alphas must be positive");
    const double x = std::log(alphas[i]), y = std::log(values[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-300) throw std::invalid_argument("fit_rate: degenerate input");
  RateFit fit;
  fit.exponent = (n * sxy - sx * sy) / det;
  const double intercept = (sy - fit.exponent * sx) / n;
  fit.constant = std::exp(intercept);
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = std::log(values[i]) - (intercept + fit.exponent * std::log(alphas[i]));
    rss += d * d;
  }
  fit.residual = std::sqrt(rss / n);
  fit.points = n;
  return fit;
}

/// Exact Lebesgue measure of {t : |q(t)| <= eps} for a piecewise linear q.
inline double level_set_measure(const TimePartition& pt, const std::vector<double>& q,
                                double eps) {
  double meas = 0.0;
  for (int m = 1; m <= pt.intervals(); ++m) {
    const double k = pt.length(m);
    const double q0 = q[m - 1], q1 = q[m];
    if (q0 == q1) {
      if (std::abs(q0) <= eps) meas += k;
      continue;
    }
    // preimage of [-eps, eps] under the linear map s -> q0 + s (q1 - q0)
    double s0 = (-eps - q0) / (q1 - q0);
    double s1 = (eps - q0) / (q1 - q0);
    if (s0 > s1) std::swap(s0, s1);
    meas += k * std::max(0.0, std::min(1.0, s1) - std::max(0.0, s0));
  }
  return meas;
}

/// Level-set measures of |q| for a list of thresholds; feeds fit_rate to
/// estimate the measure-condition exponent and constant.
inline std::vector<double> measure_condition_estimate(const TimePartition& pt,
                                                      const std::vector<double>& q,
                                                      const std::vector<double>& epsilons) {
  std::vector<double> out;
  out.reserve(epsilons.size());
  for (double eps : epsilons) out.push_back(level_set_measure(pt, q, eps));
  return out;
}

/// Fitted exponents of the inactive-set measure and of the control
/// derivative along a computed regularization path.
struct PathConditionReport {
  bool meas_all_zero = false;       // exponent infinite by convention
  RateFit meas_fit;                 // meas(I_alpha) ~ C alpha^kappa
  RateFit deriv_fit;                // ||d_t u_alpha||_L1 ~ C alpha^(kappa-1)
  bool deriv_all_zero = false;
  bool violation = false;           // measure exponent below expectation
  double expected_kappa = std::numeric_limits<double>::quiet_NaN();
};

inline PathConditionReport path_condition_report(const std::vector<RegPathRecord>& records,
                                                 double expected_kappa,
                                                 bool last_four_only = true) {
  if (records.size() < 3)
    throw std::invalid_argument("path_condition_report: need >= 3 records");
  std::size_t first = 0;
  if (last_four_only && records.size() > 4) first = records.size() - 4;
  std::vector<double> alphas, meas, deriv;
  for (std::size_t i = first; i < records.size(); ++i) {
    alphas.push_back(records[i].alpha);
    meas.push_back(records[i].inactive_measure);
    deriv.push_back(records[i].deriv_l1);
  }
  PathConditionReport rep;
  rep.expected_kappa = expected_kappa;
  rep.meas_all_zero = std::all_of(meas.begin(), meas.end(), [](double v) { return v <= 0.0; });
  rep.deriv_all_zero =
      std::all_of(deriv.begin(), deriv.end(), [](double v) { return v <= 0.0; });
  if (!rep.meas_all_zero) {
    rep.meas_fit = fit_rate(meas, alphas);
    rep.violation = rep.meas_fit.exponent < expected_kappa - 0.15;
  }
  if (!rep.deriv_all_zero) rep.deriv_fit = fit_rate(deriv, alphas);
  return rep;
}

/// Table of errors and EOCs over a regularization path, in the layout of the
/// experiment tables: level, alpha, L1 error, L2 error, EOC L1, EOC L2.
struct EOCTable {
  struct Row {
    int level;
    double alpha, err_l1, err_l2, eoc_l1, eoc_l2;
  };
  std::vector<Row> rows;
  double kappa = 0.0;
  int n_per_side = 0, n_steps = 0;
  double tolerance = 0.0;
};

inline EOCTable make_eoc_table(const std::vector<RegPathRecord>& records, double kappa,
                               int n_per_side, int n_steps, double tolerance) {
  EOCTable table;
  table.kappa = kappa;
  table.n_per_side = n_per_side;
  table.n_steps = n_steps;
  table.tolerance = tolerance;
  std::vector<double> e1, e2;
  for (const auto& r : records) {
    e1.push_back(r.err_l1);
    e2.push_back(r.err_l2);
  }
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < records.size(); ++i) {
    EOCTable::Row row{records[i].level, records[i].alpha, e1[i], e2[i], nan, nan};
    if (i > 0 && e1[i - 1] > 0 && e1[i] > 0) row.eoc_l1 = std::log2(e1[i - 1] / e1[i]);
    if (i > 0 && e2[i - 1] > 0 && e2[i] > 0) row.eoc_l2 = std::log2(e2[i - 1] / e2[i]);
    table.rows.push_back(row);
  }
  return table;
}

enum class TableFormat { csv, markdown };

inline std::string emit_table(const EOCTable& table, TableFormat format) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(8);
  auto cell = [&](double v, int prec) {
    std::ostringstream c;
    if (std::isnan(v)) {
      c << "/";
    } else {
      c << std::fixed << std::setprecision(prec) << v;
    }
    return c.str();
  };
  if (format == TableFormat::csv) {
    os << "level,alpha,err_l1,err_l2,eoc_l1,eoc_l2\n";
    for (const auto& r : table.rows)
      os << r.level << ',' << r.alpha << ',' << cell(r.err_l1, 8) << ','
         << cell(r.err_l2, 8) << ',' << cell(r.eoc_l1, 2) << ',' << cell(r.eoc_l2, 2)
         << '\n';
  } else {
    os << "| l | err L1(I) | err L2(I) | EOC L1 | EOC L2 |\n";
    os << "|---|-----------|-----------|--------|--------|\n";
    for (const auto& r : table.rows)
      os << "| " << r.level << " | " << cell(r.err_l1, 8) << " | " << cell(r.err_l2, 8)
         << " | " << cell(r.eoc_l1, 2) << " | " << cell(r.eoc_l2, 2) << " |\n";
  }
  return os.str();
}

}  // namespace regpath
