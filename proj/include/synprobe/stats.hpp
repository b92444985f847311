#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace synprobe {

struct Interval {
  double lo;
  double hi;
};

/// Wilson score interval for k successes in n trials.
Interval wilson_ci(std::int64_t k, std::int64_t n, double level = 0.95);

/// Exact one-sided tail P(X >= k) for X ~ Binomial(n, p0).
double binom_test_above(std::int64_t k, std::int64_t n, double p0 = 0.5);
/// Exact lower tail P(X <= k).
double binom_test_below(std::int64_t k, std::int64_t n, double p0 = 0.5);

struct BinomialSummary {
  std::int64_t k = 0;
  std::int64_t n = 0;
  double accuracy = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double p_above_chance = 1.0;
};

BinomialSummary summarize_binomial(std::int64_t k, std::int64_t n, double level = 0.95,
                                   double p0 = 0.5);

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticRow {
  std::vector<double> x;  // predictors, intercept excluded
  int y = 0;              // 0 or 1
  std::string cluster;    // empty: no clustering
};

struct LogisticOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
  double separation_bound = 30.0;
  bool cluster_robust = true;  // used only when every row carries a cluster id
};

struct LogisticFit {
  std::vector<std::string> terms;  // "(Intercept)" first
  std::vector<double> estimate;
  std::vector<double> se;
  std::vector<double> z;
  std::vector<double> p;
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;  // max-norm of X'(y - p_hat) at the solution
  bool converged = false;
  bool cluster_robust = false;
  int iterations = 0;
  std::vector<std::vector<double>> covariance;

  double predict(std::span<const double> x) const;
  // Standard error of the linear predictor at x.
  double linear_predictor_se(std::span<const double> x) const;
};

/// Newton/IRLS fit of a fixed-effects logistic model with intercept. An
/// empty predictor list fits the intercept-only model.
/// Throws Error(separation) when coefficients diverge past the separation
/// bound while the likelihood is still improving, Error(rank) when the
/// information matrix is singular.
LogisticFit fit_logistic(std::span<const std::string> predictor_names,
                         std::span<const LogisticRow> rows, const LogisticOptions& options = {});

std::string_view significance_stars(double p) noexcept;

struct CurvePoint {
  double exposure;
  double p_hat;
  double se_lo;
  double se_hi;
};

struct AccuracyCurve {
  LogisticFit fit;           // predictor: log10(exposure)
  bool flat_fallback = false;  // set when the fit separated; curve is the pooled rate
  std::vector<CurvePoint> samples;
};

/// Logistic fit of correctness on log10(exposure count), sampled on a
/// log-spaced grid across the observed exposure range.
AccuracyCurve accuracy_curve(std::span<const std::pair<double, int>> points,
                             std::size_t sample_count = 50);

// ---------------------------------------------------------------------------

struct CorrelationResult {
  double r;
  std::int64_t n;
  double t;
  double p;  // two-sided, Student t with n-2 df
};

CorrelationResult pearson_test(std::span<const double> x, std::span<const double> y);

}  // namespace synprobe
