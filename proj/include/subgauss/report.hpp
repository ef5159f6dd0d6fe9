#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace subgauss {

struct Window {
  double r_min = 0.0, r_max = 0.0;
  double t_min = 0.0, t_max = 0.0;
};

/// Verdict for one named condition, with the fitted constants and the
/// per-sample statistics behind them.
struct ConditionReport {
  std::string condition;
  bool pass = false;
  std::map<std::string, double> constants;
  Window window;
  // (scale, statistic) rows; scale is r or t depending on the condition
  std::vector<std::pair<double, double>> samples;
  std::vector<std::string> warnings;

  std::string to_json() const;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int n = 0;
};

LineFit fit_line(const std::vector<std::pair<double, double>>& xy);

/// Drift exponent of a positive statistic across a scale window: the
/// log-log regression slope of stat against scale. A condition whose
/// constant is genuinely scale-free has drift near zero.
double drift_exponent(const std::vector<std::pair<double, double>>& samples);

/// Default tolerance on |drift| used by the pass/fail verdicts.
inline constexpr double kDriftTol = 0.1;

}  // namespace subgauss
