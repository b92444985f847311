#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "synprobe/scoring.hpp"

namespace synprobe {

struct FitRow {
  std::string suite;
  std::string model;
  std::string analysis;  // exposure | supervision:<model>
  std::string status;    // ok | separation | rank | undefined-input | numeric
  std::string term;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p = 1.0;
  std::int64_t n = 0;
  std::int64_t clusters = 0;
};

struct CurveRow {
  std::string suite;
  std::string model;
  std::string category;  // category or "all"
  bool flat = false;
  CurvePoint point;
};

struct AnalysisResult {
  std::vector<FitRow> fits;
  std::vector<CurveRow> curves;
};

/// Exposure GLM per (suite, model): correct ~ exposure count, clustered by
/// target word. Supervision GLM per suite and non-reference model:
/// correct ~ model + log10(bucket upper bound) on the two models' items,
/// clustered by item. Accuracy curves per (suite, model, category) on
/// log10 exposure.
AnalysisResult analyze(const std::vector<ItemRow>& items, std::string_view reference_model,
                       std::size_t curve_samples = 50);

/// First model name in sorted order unless `configured` is nonempty.
std::string pick_reference_model(const std::vector<ItemRow>& items, std::string_view configured);

inline constexpr std::string_view kFitsHeader = "suite,model,analysis,status,term,estimate,se,z,p,stars,n,clusters";
inline constexpr std::string_view kCurvesHeader = "suite,model,category,flat,x,p_hat,se_lo,se_hi";

std::string write_fits_csv(const std::vector<FitRow>& fits);
std::vector<FitRow> read_fits_csv(std::string_view text);
std::string write_curves_csv(const std::vector<CurveRow>& curves);
std::vector<CurveRow> read_curves_csv(std::string_view text);

struct Table1 {
  std::vector<std::string> suites;
  std::vector<std::string> models;                      // reference first
  std::vector<std::string> comparisons;                 // non-reference models
  std::vector<std::vector<std::string>> above_chance;   // [suite][model] "k/n" or "-"
  std::vector<std::vector<std::string>> supervision;    // [suite][comparison] stars, "n.s." or "-"
};

/// Buckets above chance (pooled categories, one-sided exact p < alpha) per
/// suite and model, plus supervision-effect stars from `fits`.
Table1 build_table1(const std::vector<EvalRow>& rows, const std::vector<FitRow>& fits,
                    std::string_view reference_model, double alpha = 0.05);
std::string write_table1_csv(const Table1& t);
std::string write_table1_text(const Table1& t);

/// Vega-Lite spec for one suite: bucket accuracies with CI bars plus the
/// fitted curves and their standard-error bands on a log10 exposure axis.
std::string chart_spec(std::string_view suite, const std::vector<EvalRow>& rows,
                       const std::vector<CurveRow>& curves);

}  // namespace synprobe
