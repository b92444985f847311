#include "synprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "synprobe/error.hpp"

namespace synprobe {

namespace {

void check_binomial_args(std::int64_t k, std::int64_t n, double p0) {
  if (n <= 0) throw Error(ErrorCategory::undefined_input, "binomial: n must be positive");
  if (k < 0 || k > n)
    throw Error(ErrorCategory::undefined_input, fmt::format("binomial: k={} outside [0,{}]", k, n));
  if (!(p0 > 0.0 && p0 < 1.0))
    throw Error(ErrorCategory::undefined_input, "binomial: p0 must lie in (0,1)");
}

// Returns {P(X < k), P(X >= k)} from log-domain pmf terms scaled by the
// largest term.
std::pair<double, double> binomial_split(std::int64_t k, std::int64_t n, double p0) {
  const double lp = std::log(p0);
  const double lq = std::log1p(-p0);
  const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  std::vector<double> logs(static_cast<std::size_t>(n) + 1);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::int64_t j = 0; j <= n; ++j) {
    const double dj = static_cast<double>(j);
    const double l = lg_n1 - std::lgamma(dj + 1.0) - std::lgamma(static_cast<double>(n - j) + 1.0) +
                     dj * lp + static_cast<double>(n - j) * lq;
    logs[static_cast<std::size_t>(j)] = l;
    peak = std::max(peak, l);
  }
  double below = 0.0;
  double above = 0.0;
  for (std::int64_t j = 0; j <= n; ++j) {
    const double t = std::exp(logs[static_cast<std::size_t>(j)] - peak);
    (j < k ? below : above) += t;
  }
  const double total = below + above;
  return {below / total, above / total};
}

double normal_two_sided(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

}  // namespace

Interval wilson_ci(std::int64_t k, std::int64_t n, double level) {
  check_binomial_args(k, n, 0.5);
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorCategory::undefined_input, "wilson_ci: level must lie in (0,1)");
  const boost::math::normal_distribution<double> unit;
  const double z = boost::math::quantile(unit, 1.0 - (1.0 - level) / 2.0);
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn));
  Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (k == 0) ci.lo = 0.0;
  if (k == n) ci.hi = 1.0;
  return ci;
}

double binom_test_above(std::int64_t k, std::int64_t n, double p0) {
  check_binomial_args(k, n, p0);
  if (k == 0) return 1.0;
  if (k == n) return std::pow(p0, static_cast<double>(n));
  return binomial_split(k, n, p0).second;
}

double binom_test_below(std::int64_t k, std::int64_t n, double p0) {
  check_binomial_args(std::clamp<std::int64_t>(k, 0, n), n, p0);
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  return binomial_split(k + 1, n, p0).first;
}

BinomialSummary summarize_binomial(std::int64_t k, std::int64_t n, double level, double p0) {
  BinomialSummary s;
  s.k = k;
  s.n = n;
  s.accuracy = static_cast<double>(k) / static_cast<double>(n);
  const Interval ci = wilson_ci(k, n, level);
  s.ci_lo = ci.lo;
  s.ci_hi = ci.hi;
  s.p_above_chance = binom_test_above(k, n, p0);
  return s;
}

double LogisticFit::predict(std::span<const double> x) const {
  double eta = estimate.at(0);
  for (std::size_t i = 0; i < x.size(); ++i) eta += estimate.at(i + 1) * x[i];
  return 1.0 / (1.0 + std::exp(-eta));
}

double LogisticFit::linear_predictor_se(std::span<const double> x) const {
  std::vector<double> v{1.0};
  v.insert(v.end(), x.begin(), x.end());
  double var = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) var += v[i] * covariance.at(i).at(j) * v[j];
  return std::sqrt(std::max(0.0, var));
}

LogisticFit fit_logistic(std::span<const std::string> predictor_names,
                         std::span<const LogisticRow> rows, const LogisticOptions& options) {
  const std::size_t p = predictor_names.size() + 1;
  const std::size_t n = rows.size();
  if (n < p) throw Error(ErrorCategory::rank, "fit_logistic: fewer rows than coefficients");

  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  bool clustered = options.cluster_robust;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i];
    if (r.x.size() != p - 1)
      throw Error(ErrorCategory::undefined_input,
                  fmt::format("fit_logistic: row {} has {} predictors, expected {}", i, r.x.size(),
                              p - 1));
    if (r.y != 0 && r.y != 1)
      throw Error(ErrorCategory::undefined_input, "fit_logistic: outcomes must be 0 or 1");
    X(i, 0) = 1.0;
    for (std::size_t j = 1; j < p; ++j) X(i, j) = r.x[j - 1];
    y(i) = r.y;
    if (r.cluster.empty()) clustered = false;
  }

  auto loglik = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = X * beta;
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // log(1 + e^eta) without overflow
      const double e = eta(i);
      const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
      ll += y(i) * e - softplus;
    }
    return ll;
  };
  auto probs = [&](const Eigen::VectorXd& beta) {
    Eigen::VectorXd mu = X * beta;
    for (Eigen::Index i = 0; i < mu.size(); ++i) mu(i) = 1.0 / (1.0 + std::exp(-mu(i)));
    return mu;
  };

  LogisticFit fit;
  fit.terms.push_back("(Intercept)");
  fit.terms.insert(fit.terms.end(), predictor_names.begin(), predictor_names.end());

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  double ll = loglik(beta);
  Eigen::MatrixXd info(p, p);
  Eigen::VectorXd grad(p);
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd mu = probs(beta);
    grad = X.transpose() * (y - mu);
    const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
    info = X.transpose() * w.asDiagonal() * X;
    fit.iterations = it - 1;
    if (grad.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
      if (beta.cwiseAbs().maxCoeff() > options.separation_bound)
        throw Error(ErrorCategory::separation, "fit_logistic: complete separation detected");
      throw Error(ErrorCategory::rank, "fit_logistic: singular information matrix");
    }
    Eigen::VectorXd step = ldlt.solve(grad);
    double new_ll = loglik(beta + step);
    int halvings = 0;
    while (new_ll < ll - 1e-12 && halvings < 30) {
      step *= 0.5;
      new_ll = loglik(beta + step);
      ++halvings;
    }
    beta += step;
    const bool improving = new_ll > ll + 1e-12;
    ll = new_ll;
    fit.iterations = it;
    if (beta.cwiseAbs().maxCoeff() > options.separation_bound && improving)
      throw Error(ErrorCategory::separation, "fit_logistic: complete separation detected");
  }
  // A likelihood of 1 means every outcome is fitted exactly.
  if (ll > -1e-6 || beta.cwiseAbs().maxCoeff() > options.separation_bound)
    throw Error(ErrorCategory::separation, "fit_logistic: complete separation detected");
  {
    const Eigen::VectorXd mu = probs(beta);
    grad = X.transpose() * (y - mu);
    const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
    info = X.transpose() * w.asDiagonal() * X;
    fit.converged = grad.lpNorm<Eigen::Infinity>() < options.gradient_tolerance;
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  if (lu.rank() < static_cast<Eigen::Index>(p))
    throw Error(ErrorCategory::rank, "fit_logistic: singular information matrix");
  Eigen::MatrixXd cov = lu.inverse();

  if (clustered) {
    std::map<std::string, Eigen::VectorXd> scores;
    const Eigen::VectorXd mu = probs(beta);
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] = scores.try_emplace(rows[i].cluster, Eigen::VectorXd::Zero(p));
      it->second += X.row(static_cast<Eigen::Index>(i)).transpose() * (y(i) - mu(i));
    }
    const double g = static_cast<double>(scores.size());
    if (g > 1.0) {
      Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
      for (const auto& [id, s] : scores) meat += s * s.transpose();
      cov = (g / (g - 1.0)) * cov * meat * cov;
      fit.cluster_robust = true;
    }
  }

  fit.log_likelihood = ll;
  fit.covariance.assign(p, std::vector<double>(p));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) fit.covariance[i][j] = cov(i, j);
  fit.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  for (std::size_t j = 0; j < p; ++j) {
    const double est = beta(static_cast<Eigen::Index>(j));
    const double se = std::sqrt(std::max(0.0, cov(j, j)));
    fit.estimate.push_back(est);
    fit.se.push_back(se);
    const double z = se > 0 ? est / se : std::numeric_limits<double>::infinity();
    fit.z.push_back(z);
    fit.p.push_back(normal_two_sided(z));
  }
  return fit;
}

std::string_view significance_stars(double p) noexcept {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "n.s.";
}

AccuracyCurve accuracy_curve(std::span<const std::pair<double, int>> points,
                             std::size_t sample_count) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [x, c] : points) {
    if (!(x > 0.0))
      throw Error(ErrorCategory::undefined_input, "accuracy_curve: exposure counts must be > 0");
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (points.empty() || !(hi > lo))
    throw Error(ErrorCategory::undefined_input,
                "accuracy_curve: needs at least two distinct exposure values");

  std::vector<LogisticRow> rows;
  rows.reserve(points.size());
  std::int64_t correct = 0;
  for (const auto& [x, c] : points) {
    rows.push_back({{std::log10(x)}, c, {}});
    correct += c;
  }
  const std::vector<std::string> names{"log10_exposure"};

  AccuracyCurve curve;
  LogisticOptions opt;
  opt.cluster_robust = false;
  try {
    curve.fit = fit_logistic(names, rows, opt);
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::separation) throw;
    curve.flat_fallback = true;
  }

  const double lx0 = std::log10(lo);
  const double lx1 = std::log10(hi);
  const std::size_t m = std::max<std::size_t>(sample_count, 2);
  const double rate = static_cast<double>(correct) / static_cast<double>(points.size());
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = lx0 + (lx1 - lx0) * static_cast<double>(i) / static_cast<double>(m - 1);
    CurvePoint pt{std::pow(10.0, lx), rate, rate, rate};
    if (!curve.flat_fallback) {
      const auto& f = curve.fit;
      const double eta = f.estimate[0] + f.estimate[1] * lx;
      const double xs[] = {lx};
      const double se = f.linear_predictor_se(xs);
      auto logistic = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
      pt.p_hat = logistic(eta);
      pt.se_lo = logistic(eta - se);
      pt.se_hi = logistic(eta + se);
    }
    curve.samples.push_back(pt);
  }
  return curve;
}

CorrelationResult pearson_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorCategory::undefined_input, "pearson_test: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw Error(ErrorCategory::undefined_input, "pearson_test: requires n >= 3");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw Error(ErrorCategory::undefined_input, "pearson_test: constant input");
  CorrelationResult res{};
  res.n = static_cast<std::int64_t>(n);
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n) - 2.0;
  const double one_minus = 1.0 - res.r * res.r;
  if (one_minus <= 0.0) {
    res.t = std::copysign(std::numeric_limits<double>::infinity(), res.r);
    res.p = 0.0;
    return res;
  }
  res.t = res.r * std::sqrt(df / one_minus);
  const boost::math::students_t_distribution<double> dist(df);
  res.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(res.t)));
  return res;
}

}  // namespace synprobe
