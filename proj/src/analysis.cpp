#include "synprobe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "json.hpp"
#include "synprobe/error.hpp"
#include "synprobe/exposure.hpp"
#include "synprobe/text.hpp"

namespace synprobe {

namespace {

using Key = std::pair<std::string, std::string>;  // (suite, model)

void add_fit(std::vector<FitRow>& out, const FitRow& base, const std::vector<std::string>& names,
             const std::vector<LogisticRow>& rows) {
  std::set<std::string> clusters;
  for (const auto& r : rows) clusters.insert(r.cluster);
  try {
    const LogisticFit fit = fit_logistic(names, rows);
    for (std::size_t i = 0; i < fit.terms.size(); ++i) {
      FitRow f = base;
      f.status = "ok";
      f.term = fit.terms[i];
      f.estimate = fit.estimate[i];
      f.se = fit.se[i];
      f.z = fit.z[i];
      f.p = fit.p[i];
      f.n = static_cast<std::int64_t>(rows.size());
      f.clusters = fit.cluster_robust ? static_cast<std::int64_t>(clusters.size()) : 0;
      out.push_back(std::move(f));
    }
  } catch (const Error& e) {
    FitRow f = base;
    f.status = std::string(category_token(e.category()));
    f.term = "-";
    f.n = static_cast<std::int64_t>(rows.size());
    out.push_back(std::move(f));
  }
}

std::string num(double v, bool ok) { return ok ? format_double(v) : std::string(); }

std::vector<std::vector<std::string_view>> rows_of(std::string_view text, std::string_view header,
                                                   std::string_view what) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != header)
    throw Error(ErrorCategory::format, fmt::format("{}: expected header '{}'", what, header));
  const std::size_t width = split(header, ',').size();
  std::vector<std::vector<std::string_view>> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split(lines[i], ',');
    if (f.size() != width)
      throw Error(ErrorCategory::format, fmt::format("{} line {}: {} fields, expected {}", what, i + 1, f.size(), width));
    out.push_back(std::move(f));
  }
  return out;
}

double opt_double(std::string_view s, std::string_view what, std::size_t line) {
  return s.empty() ? std::nan("") : parse_double(s, what, line);
}

}  // namespace

std::string pick_reference_model(const std::vector<ItemRow>& items, std::string_view configured) {
  if (!configured.empty()) return std::string(configured);
  std::set<std::string> models;
  for (const auto& r : items) models.insert(r.model);
  return models.empty() ? std::string() : *models.begin();
}

AnalysisResult analyze(const std::vector<ItemRow>& items, std::string_view reference_model,
                       std::size_t curve_samples) {
  AnalysisResult out;
  std::map<Key, std::vector<const ItemRow*>> groups;
  std::map<std::string, std::set<std::string>> models_by_suite;
  for (const auto& r : items) {
    groups[{r.suite, r.model}].push_back(&r);
    models_by_suite[r.suite].insert(r.model);
  }

  for (const auto& [key, rows] : groups) {
    std::vector<LogisticRow> design;
    for (const ItemRow* r : rows)
      design.push_back({{static_cast<double>(r->result.exposure)}, r->result.correct, r->result.target});
    add_fit(out.fits, FitRow{key.first, key.second, "exposure", "", ""}, {"exposure"}, design);

    std::map<std::string, std::vector<std::pair<double, int>>> points;
    for (const ItemRow* r : rows) {
      const std::pair<double, int> p{static_cast<double>(r->result.exposure), r->result.correct};
      points["all"].push_back(p);
      points[std::string(to_string(r->result.category))].push_back(p);
    }
    for (const auto& [cat, pts] : points) {
      try {
        const AccuracyCurve curve = accuracy_curve(pts, curve_samples);
        for (const auto& s : curve.samples) out.curves.push_back({key.first, key.second, cat, curve.flat_fallback, s});
      } catch (const Error&) {
        // fewer than two exposure values, or a degenerate design
      }
    }
  }

  for (const auto& [suite, models] : models_by_suite) {
    const std::string ref(reference_model);
    if (!models.count(ref)) continue;
    for (const auto& m : models) {
      if (m == ref) continue;
      std::vector<LogisticRow> design;
      for (const std::string* name : {&ref, &m})
        for (const ItemRow* r : groups.at({suite, *name})) {
          const auto b = bucket_by_id(r->result.bucket);
          if (!b) throw Error(ErrorCategory::format, fmt::format("item {}: unknown bucket {}", r->result.item_id, r->result.bucket));
          design.push_back({{name == &m ? 1.0 : 0.0, std::log10(static_cast<double>(b->hi))}, r->result.correct,
                            r->result.item_id});
        }
      add_fit(out.fits, FitRow{suite, m, "supervision:" + m, "", ""}, {"model=" + m, "log10_bucket"}, design);
    }
  }
  return out;
}

std::string write_fits_csv(const std::vector<FitRow>& fits) {
  std::string out(kFitsHeader);
  out += '\n';
  for (const auto& f : fits) {
    const bool ok = f.status == "ok";
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", f.suite, f.model, f.analysis, f.status, f.term,
                       num(f.estimate, ok), num(f.se, ok), num(f.z, ok), num(f.p, ok),
                       ok ? significance_stars(f.p) : std::string_view(), f.n, f.clusters);
  }
  return out;
}

std::vector<FitRow> read_fits_csv(std::string_view text) {
  std::vector<FitRow> out;
  std::size_t line = 1;
  for (const auto& f : rows_of(text, kFitsHeader, "fits csv")) {
    ++line;
    FitRow r{std::string(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3]), std::string(f[4])};
    r.estimate = opt_double(f[5], "fits csv", line);
    r.se = opt_double(f[6], "fits csv", line);
    r.z = opt_double(f[7], "fits csv", line);
    r.p = opt_double(f[8], "fits csv", line);
    r.n = parse_int(f[10], "fits csv", line);
    r.clusters = parse_int(f[11], "fits csv", line);
    out.push_back(std::move(r));
  }
  return out;
}

std::string write_curves_csv(const std::vector<CurveRow>& curves) {
  std::string out(kCurvesHeader);
  out += '\n';
  for (const auto& c : curves)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", c.suite, c.model, c.category, c.flat ? 1 : 0,
                       format_double(c.point.exposure), format_double(c.point.p_hat), format_double(c.point.se_lo),
                       format_double(c.point.se_hi));
  return out;
}

std::vector<CurveRow> read_curves_csv(std::string_view text) {
  std::vector<CurveRow> out;
  std::size_t line = 1;
  for (const auto& f : rows_of(text, kCurvesHeader, "curves csv")) {
    ++line;
    CurveRow c{std::string(f[0]), std::string(f[1]), std::string(f[2]), parse_int(f[3], "curves csv", line) != 0, {}};
    c.point = {parse_double(f[4], "curves csv", line), parse_double(f[5], "curves csv", line),
               parse_double(f[6], "curves csv", line), parse_double(f[7], "curves csv", line)};
    out.push_back(std::move(c));
  }
  return out;
}

Table1 build_table1(const std::vector<EvalRow>& rows, const std::vector<FitRow>& fits,
                    std::string_view reference_model, double alpha) {
  Table1 t;
  std::set<std::string> others;
  bool have_ref = false;
  for (const auto& r : rows) {
    if (std::find(t.suites.begin(), t.suites.end(), r.suite) == t.suites.end()) t.suites.push_back(r.suite);
    if (r.model == reference_model)
      have_ref = true;
    else
      others.insert(r.model);
  }
  if (have_ref) t.models.emplace_back(reference_model);
  t.models.insert(t.models.end(), others.begin(), others.end());
  if (have_ref) t.comparisons.assign(others.begin(), others.end());

  for (const auto& s : t.suites) {
    std::vector<std::string> row;
    for (const auto& m : t.models) {
      int n = 0, above = 0;
      for (const auto& r : rows) {
        if (r.suite != s || r.model != m || r.bucket == "all" || r.category != "all") continue;
        ++n;
        if (r.summary.p_above_chance < alpha) ++above;
      }
      row.push_back(n ? fmt::format("{}/{}", above, n) : "-");
    }
    t.above_chance.push_back(std::move(row));
    std::vector<std::string> sup;
    for (const auto& m : t.comparisons) {
      std::string cell = "-";
      for (const auto& f : fits)
        if (f.suite == s && f.analysis == "supervision:" + m && (f.term == "model=" + m || f.status != "ok"))
          cell = f.status == "ok" ? std::string(significance_stars(f.p)) : f.status;
      sup.push_back(cell);
    }
    t.supervision.push_back(std::move(sup));
  }
  return t;
}

namespace {

std::vector<std::vector<std::string>> table_cells(const Table1& t) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"suite"};
  head.insert(head.end(), t.models.begin(), t.models.end());
  for (const auto& m : t.comparisons) head.push_back(m + " vs " + t.models.front());
  cells.push_back(std::move(head));
  for (std::size_t i = 0; i < t.suites.size(); ++i) {
    std::vector<std::string> row{t.suites[i]};
    row.insert(row.end(), t.above_chance[i].begin(), t.above_chance[i].end());
    row.insert(row.end(), t.supervision[i].begin(), t.supervision[i].end());
    cells.push_back(std::move(row));
  }
  return cells;
}

}  // namespace

std::string write_table1_csv(const Table1& t) {
  std::string out;
  for (const auto& row : table_cells(t)) out += join(row, ",") + '\n';
  return out;
}

std::string write_table1_text(const Table1& t) {
  const auto cells = table_cells(t);
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells)
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::string line;
    for (std::size_t j = 0; j < cells[i].size(); ++j) {
      if (j) line += "  ";
      line += j == 0 ? fmt::format("{:<{}}", cells[i][j], width[j]) : fmt::format("{:>{}}", cells[i][j], width[j]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    }
  }
  return out;
}

std::string chart_spec(std::string_view suite, const std::vector<EvalRow>& rows, const std::vector<CurveRow>& curves) {
  using nlohmann::json;
  json values = json::array();
  for (const auto& c : curves) {
    if (c.suite != suite) continue;
    values.push_back({{"kind", "curve"},
                      {"model", c.model},
                      {"category", c.category},
                      {"x", c.point.exposure},
                      {"p_hat", c.point.p_hat},
                      {"se_lo", c.point.se_lo},
                      {"se_hi", c.point.se_hi}});
  }
  for (const auto& r : rows) {
    if (r.suite != suite || r.bucket == "all") continue;
    const auto b = bucket_by_id(static_cast<int>(parse_int(r.bucket, "eval rows", 0)));
    if (!b) continue;
    values.push_back({{"kind", "bucket"},
                      {"model", r.model},
                      {"category", r.category},
                      {"x", b->hi},
                      {"accuracy", r.summary.accuracy},
                      {"ci_lo", r.summary.ci_lo},
                      {"ci_hi", r.summary.ci_hi}});
  }
  const json x = {{"field", "x"}, {"type", "quantitative"}, {"scale", {{"type", "log"}}}, {"title", "exposures"}};
  const json color = {{"field", "model"}, {"type", "nominal"}};
  auto only = [](const char* kind) { return json::array({{{"filter", fmt::format("datum.kind == '{}'", kind)}}}); };
  json spec = {
      {"$schema", "https://vega.github.io/schema/vega-lite/v5.json"},
      {"title", std::string(suite)},
      {"data", {{"values", values}}},
      {"facet", {{"column", {{"field", "category"}, {"type", "nominal"}}}}},
      {"spec",
       {{"layer",
         json::array({
             {{"transform", only("curve")},
              {"mark", {{"type", "area"}, {"opacity", 0.2}}},
              {"encoding", {{"x", x}, {"y", {{"field", "se_lo"}, {"type", "quantitative"}}}, {"y2", {{"field", "se_hi"}}}, {"color", color}}}},
             {{"transform", only("curve")},
              {"mark", "line"},
              {"encoding",
               {{"x", x},
                {"y", {{"field", "p_hat"}, {"type", "quantitative"}, {"scale", {{"domain", {0, 1}}}}, {"title", "accuracy"}}},
                {"color", color}}}},
             {{"transform", only("bucket")},
              {"mark", "rule"},
              {"encoding", {{"x", x}, {"y", {{"field", "ci_lo"}, {"type", "quantitative"}}}, {"y2", {{"field", "ci_hi"}}}, {"color", color}}}},
             {{"transform", only("bucket")},
              {"mark", "point"},
              {"encoding", {{"x", x}, {"y", {{"field", "accuracy"}, {"type", "quantitative"}}}, {"color", color}}}},
         })}}},
  };
  return spec.dump(2) + '\n';
}

}  // namespace synprobe
