#include <chrono>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "doctest.h"
#include "json.hpp"
#include "synprobe/analysis.hpp"
#include "synprobe/error.hpp"
#include "synprobe/stats.hpp"

using namespace synprobe;

namespace {

std::vector<LogisticRow> two_by_two(int k0, int n0, int k1, int n1) {
  std::vector<LogisticRow> rows;
  for (int i = 0; i < n0; ++i) rows.push_back({{0.0}, i < k0 ? 1 : 0, {}});
  for (int i = 0; i < n1; ++i) rows.push_back({{1.0}, i < k1 ? 1 : 0, {}});
  return rows;
}

std::vector<LogisticRow> simulate(double b0, double b1, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-1.0, 2.0), uy(0.0, 1.0);
  std::vector<LogisticRow> rows;
  for (int i = 0; i < n; ++i) {
    const double x = ux(rng);
    const double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * x)));
    rows.push_back({{x}, uy(rng) < p ? 1 : 0, {}});
  }
  return rows;
}

}  // namespace

TEST_CASE("exact binomial tails") {
  CHECK(binom_test_above(5, 10) == doctest::Approx(0.623046875).epsilon(1e-14));
  CHECK(binom_test_above(20, 40) == doctest::Approx(0.5626853438097896).epsilon(1e-12));
  CHECK(binom_test_above(10, 10) == std::ldexp(1.0, -10));
  CHECK(binom_test_above(0, 10) == 1.0);
  CHECK(binom_test_below(10, 10) == 1.0);
  CHECK(binom_test_below(0, 10) == doctest::Approx(std::ldexp(1.0, -10)).epsilon(1e-14));
  CHECK(binom_test_above(3, 3, 0.2) == doctest::Approx(0.008));

  for (int n = 1; n <= 60; ++n)
    for (int k = 1; k <= n; ++k) {
      CAPTURE(n);
      CAPTURE(k);
      CHECK(std::abs(binom_test_above(k, n) + binom_test_below(k - 1, n) - 1.0) < 1e-12);
    }
  CHECK_THROWS_AS(binom_test_above(11, 10), Error);
  CHECK_THROWS_AS(binom_test_above(1, 0), Error);
  CHECK_THROWS_AS(binom_test_above(1, 10, 1.5), Error);
}

TEST_CASE("Wilson score interval") {
  const auto ci = wilson_ci(8, 10);
  CHECK(std::abs(ci.lo - 0.4901624715366418) < 1e-9);
  CHECK(std::abs(ci.hi - 0.9433178485456247) < 1e-9);
  CHECK(std::abs(wilson_ci(5, 10).lo - 0.23659309051293917) < 1e-9);
  CHECK(wilson_ci(0, 10).lo == doctest::Approx(0.0));
  CHECK(wilson_ci(10, 10).hi == doctest::Approx(1.0));

  for (int n = 1; n <= 40; ++n)
    for (int k = 0; k <= n; ++k) {
      const auto a = wilson_ci(k, n);
      const auto b = wilson_ci(n - k, n);
      const double phat = static_cast<double>(k) / n;
      CHECK(a.lo <= phat + 1e-15);
      CHECK(a.hi >= phat - 1e-15);
      CHECK(a.lo >= 0.0);
      CHECK(a.hi <= 1.0);
      CHECK(std::abs(a.lo - (1.0 - b.hi)) < 1e-12);
    }
  CHECK(wilson_ci(8, 10, 0.99).lo < ci.lo);
  CHECK_THROWS_AS(wilson_ci(1, 0), Error);
  CHECK_THROWS_AS(wilson_ci(1, 10, 1.0), Error);
}

TEST_CASE("binomial summary") {
  const auto s = summarize_binomial(8, 10);
  CHECK(s.accuracy == 0.8);
  CHECK(s.ci_lo == wilson_ci(8, 10).lo);
  CHECK(s.p_above_chance == binom_test_above(8, 10));
}

TEST_CASE("logistic regression oracles") {
  SUBCASE("intercept only") {
    std::vector<LogisticRow> rows;
    for (int i = 0; i < 100; ++i) rows.push_back({{}, i < 75 ? 1 : 0, {}});
    const auto fit = fit_logistic({}, rows);
    REQUIRE(fit.terms == std::vector<std::string>{"(Intercept)"});
    CHECK(std::abs(fit.estimate[0] - std::log(3.0)) < 1e-6);
    CHECK(fit.converged);
    CHECK(fit.gradient_norm < 1e-8);
    CHECK(fit.se[0] == doctest::Approx(std::sqrt(1.0 / (100 * 0.75 * 0.25))));
  }
  SUBCASE("two by two table") {
    const std::vector<std::string> names{"g"};
    const auto fit = fit_logistic(names, two_by_two(50, 100, 75, 100));
    CHECK(std::abs(fit.estimate[0]) < 1e-6);
    CHECK(std::abs(fit.estimate[1] - std::log(3.0)) < 1e-6);
    CHECK(fit.gradient_norm < 1e-8);
    const double x1[] = {1.0};
    CHECK(fit.predict(x1) == doctest::Approx(0.75));
  }
}

TEST_CASE("logistic fit properties") {
  const std::vector<std::string> names{"x"};
  const auto rows = simulate(-1.0, 2.0, 500, 3);
  const auto fit = fit_logistic(names, rows);
  CHECK(fit.gradient_norm < 1e-8);

  SUBCASE("affine invariance") {
    for (double a : {0.5, 3.0, -2.0})
      for (double b : {-1.0, 0.0, 4.0}) {
        auto moved = rows;
        for (auto& r : moved) r.x[0] = a * r.x[0] + b;
        const auto f2 = fit_logistic(names, moved);
        CHECK(f2.estimate[1] == doctest::Approx(fit.estimate[1] / a).epsilon(1e-7));
        CHECK(f2.log_likelihood == doctest::Approx(fit.log_likelihood).epsilon(1e-10));
        CHECK(f2.z[1] == doctest::Approx(fit.z[1] * (a > 0 ? 1 : -1)).epsilon(1e-6));
      }
  }
  SUBCASE("clustered errors") {
    auto clustered = rows;
    for (std::size_t i = 0; i < clustered.size(); ++i) clustered[i].cluster = "c" + std::to_string(i % 25);
    const auto f = fit_logistic(names, clustered);
    CHECK(f.cluster_robust);
    CHECK(f.estimate == fit.estimate);
    CHECK(f.se[1] != fit.se[1]);
    LogisticOptions opt;
    opt.cluster_robust = false;
    CHECK_FALSE(fit_logistic(names, clustered, opt).cluster_robust);
  }
}

TEST_CASE("Monte Carlo coefficient recovery") {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> names{"x"};
  const auto one = fit_logistic(names, simulate(-1.0, 2.0, 2000, 1));
  CHECK(std::abs(one.estimate[0] + 1.0) < 0.15);
  CHECK(std::abs(one.estimate[1] - 2.0) < 0.15);

  double b0 = 0.0, b1 = 0.0;
  const int reps = 20;
  for (int seed = 100; seed < 100 + reps; ++seed) {
    const auto fit = fit_logistic(names, simulate(-1.0, 2.0, 2000, static_cast<std::uint64_t>(seed)));
    b0 += fit.estimate[0] / reps;
    b1 += fit.estimate[1] / reps;
  }
  CHECK(std::abs(b0 + 1.0) < 0.05);
  CHECK(std::abs(b1 - 2.0) < 0.05);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 5.0);
}

TEST_CASE("degenerate logistic inputs") {
  const std::vector<std::string> names{"x"};
  std::vector<LogisticRow> separated;
  for (int i = 0; i < 20; ++i) separated.push_back({{static_cast<double>(i)}, i >= 10 ? 1 : 0, {}});
  try {
    fit_logistic(names, separated);
    FAIL("expected separation");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::separation);
  }

  const std::vector<std::string> two{"x", "x_copy"};
  std::vector<LogisticRow> collinear;
  for (int i = 0; i < 20; ++i) collinear.push_back({{i * 0.1, i * 0.1}, i % 3 == 0 ? 1 : 0, {}});
  try {
    fit_logistic(two, collinear);
    FAIL("expected a rank error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::rank);
  }
  CHECK_THROWS_AS(fit_logistic(names, std::vector<LogisticRow>{}), Error);
  std::vector<LogisticRow> ragged{{{1.0, 2.0}, 1, {}}};
  CHECK_THROWS_AS(fit_logistic(names, ragged), Error);
}

TEST_CASE("significance stars") {
  CHECK(significance_stars(0.0005) == "***");
  CHECK(significance_stars(0.005) == "**");
  CHECK(significance_stars(0.03) == "*");
  CHECK(significance_stars(0.05) == "n.s.");
}

TEST_CASE("accuracy curves") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<double, int>> pts;
  for (int i = 0; i < 800; ++i) {
    const double e = std::pow(10.0, 2.0 * u(rng));
    const double p = 1.0 / (1.0 + std::exp(-(-1.0 + 2.0 * std::log10(e))));
    pts.emplace_back(e, u(rng) < p ? 1 : 0);
  }
  const auto curve = accuracy_curve(pts, 20);
  CHECK_FALSE(curve.flat_fallback);
  REQUIRE(curve.samples.size() == 20);
  for (std::size_t i = 1; i < curve.samples.size(); ++i) {
    CHECK(curve.samples[i].exposure > curve.samples[i - 1].exposure);
    CHECK(curve.samples[i].p_hat > curve.samples[i - 1].p_hat);
  }
  for (const auto& s : curve.samples) {
    CHECK(s.se_lo <= s.p_hat);
    CHECK(s.se_hi >= s.p_hat);
  }

  std::vector<std::pair<double, int>> perfect{{2, 1}, {3, 1}, {10, 1}, {100, 1}};
  const auto flat = accuracy_curve(perfect, 5);
  CHECK(flat.flat_fallback);
  for (const auto& s : flat.samples) CHECK(s.p_hat == 1.0);

  std::vector<std::pair<double, int>> one_x{{5, 1}, {5, 0}};
  CHECK_THROWS_AS(accuracy_curve(one_x), Error);
}

TEST_CASE("Pearson correlation") {
  const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
  const auto r = pearson_test(x, y);
  CHECK(r.r == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(r.n == 4);
  const std::vector<double> neg{4, 3, 2, 1};
  CHECK(pearson_test(x, neg).r == doctest::Approx(-1.0));
  const std::vector<double> constant{1, 1, 1, 1};
  CHECK_THROWS_AS(pearson_test(x, constant), Error);
  CHECK_THROWS_AS(pearson_test(x, std::vector<double>{1, 2}), Error);
}

// ---------------------------------------------------------------------------
// Exposure and supervision analyses


namespace {

std::vector<ItemRow> synthetic_items() {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ItemRow> out;
  const std::pair<int, int> buckets[] = {{2, 2}, {3, 3}, {10, 7}, {20, 15}, {100, 70}};
  for (const char* model : {"lstm", "rnng"}) {
    const double shift = std::string(model) == "rnng" ? 0.8 : 0.0;
    for (const auto& [bucket, exposure] : buckets)
      for (int w = 0; w < 8; ++w)
        for (int f = 0; f < 10; ++f) {
          ItemRow r;
          r.suite = "s";
          r.model = model;
          r.result.item_id = fmt::format("s-{}-{}-{}", bucket, w, f);
          r.result.target = fmt::format("w{}_{}", bucket, w);
          r.result.category = w % 2 ? Category::plural : Category::singular;
          r.result.bucket = bucket;
          r.result.exposure = exposure;
          r.result.frame = f;
          const double p = 1.0 / (1.0 + std::exp(-(-0.5 + shift + 1.2 * std::log10(exposure))));
          r.result.correct = u(rng) < p ? 1 : 0;
          out.push_back(r);
        }
  }
  return out;
}

}  // namespace

TEST_CASE("exposure and supervision fits") {
  const auto items = synthetic_items();
  CHECK(pick_reference_model(items, "") == "lstm");
  CHECK(pick_reference_model(items, "rnng") == "rnng");
  const auto res = analyze(items, "lstm", 10);

  std::map<std::string, int> by_analysis;
  for (const auto& f : res.fits) {
    CHECK(f.status == "ok");
    ++by_analysis[f.model + "/" + f.analysis];
  }
  CHECK(by_analysis["lstm/exposure"] == 2);
  CHECK(by_analysis["rnng/exposure"] == 2);
  CHECK(by_analysis["rnng/supervision:rnng"] == 3);
  CHECK(by_analysis.count("lstm/supervision:lstm") == 0);
  for (const auto& f : res.fits) {
    if (f.analysis == "supervision:rnng" && f.term == "model=rnng") {
      CHECK(f.estimate > 0.0);
      CHECK(f.n == 800);
      CHECK(f.clusters == 400);
    }
    if (f.analysis == "exposure" && f.term == "exposure") CHECK(f.clusters == 40);
  }
  // Curves per model for each category plus the pooled one.
  CHECK(res.curves.size() == 2 * 3 * 10);

  const auto fits_back = read_fits_csv(write_fits_csv(res.fits));
  REQUIRE(fits_back.size() == res.fits.size());
  CHECK(fits_back[1].estimate == res.fits[1].estimate);
  CHECK(write_fits_csv(fits_back) == write_fits_csv(res.fits));
  const auto curves_back = read_curves_csv(write_curves_csv(res.curves));
  CHECK(write_curves_csv(curves_back) == write_curves_csv(res.curves));
  CHECK_THROWS_AS(read_fits_csv("suite,model\n"), Error);
}

TEST_CASE("failed fits are reported as rows") {
  auto items = synthetic_items();
  for (auto& r : items) r.result.correct = 1;
  const auto res = analyze(items, "lstm", 5);
  bool separated = false;
  for (const auto& f : res.fits) separated = separated || (f.status == "separation" && f.term == "-");
  CHECK(separated);
  const auto csv = write_fits_csv(res.fits);
  CHECK(csv.find(",separation,-,,,,,") != std::string::npos);
  CHECK(read_fits_csv(csv).size() == res.fits.size());
}

TEST_CASE("summary table and chart spec") {
  std::vector<EvalRow> rows;
  for (const char* model : {"rnng", "lstm"})
    for (int b : {2, 3, 10, 100}) {
      const int k = std::string(model) == "lstm" ? 10 : (b >= 10 ? 20 : 11);
      rows.push_back({"s", model, std::to_string(b), "all", summarize_binomial(k, 20)});
      rows.push_back({"s", model, std::to_string(b), "singular", summarize_binomial(k / 2, 10)});
    }
  std::vector<FitRow> fits{{"s", "rnng", "supervision:rnng", "ok", "model=rnng", 1.0, 0.2, 5.0, 1e-5, 800, 400}};
  const auto t = build_table1(rows, fits, "lstm");
  CHECK(t.suites == std::vector<std::string>{"s"});
  CHECK(t.models == std::vector<std::string>{"lstm", "rnng"});
  CHECK(t.above_chance[0][0] == "0/4");
  CHECK(t.above_chance[0][1] == "2/4");
  CHECK(t.supervision[0][0] == "***");
  CHECK(write_table1_csv(t).find("s,0/4,2/4,***") != std::string::npos);
  CHECK(write_table1_text(t).find("---") != std::string::npos);

  const std::vector<CurveRow> curves{{"s", "lstm", "all", false, {2.0, 0.4, 0.35, 0.45}},
                                     {"s", "lstm", "all", false, {100.0, 0.6, 0.55, 0.65}}};
  const auto spec = nlohmann::json::parse(chart_spec("s", rows, curves));
  CHECK(spec.at("$schema").get<std::string>().find("vega-lite/v5") != std::string::npos);
  CHECK(spec.at("data").at("values").size() == rows.size() + curves.size());
}
