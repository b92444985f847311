#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "synprobe/beam.hpp"
#include "synprobe/config.hpp"
#include "synprobe/error.hpp"
#include "synprobe/exposure.hpp"
#include "synprobe/lexicon.hpp"
#include "synprobe/ngram.hpp"
#include "synprobe/pipeline.hpp"
#include "synprobe/scoring.hpp"
#include "synprobe/stats.hpp"
#include "synprobe/suite.hpp"
#include "synprobe/tree.hpp"

namespace py = pybind11;
using namespace synprobe;

namespace {

py::dict fit_to_dict(const LogisticFit& f) {
  py::dict d;
  d["terms"] = f.terms;
  d["estimate"] = f.estimate;
  d["se"] = f.se;
  d["z"] = f.z;
  d["p"] = f.p;
  d["log_likelihood"] = f.log_likelihood;
  d["converged"] = f.converged;
  d["cluster_robust"] = f.cluster_robust;
  return d;
}

py::dict marginal_to_dict(const PrefixMarginal& m) {
  py::dict d;
  d["marginals"] = m.marginals;
  d["surprisals"] = m.surprisals;
  d["sentence_logprob"] = m.sentence_logprob;
  d["top_parse"] = m.top_parse;
  return d;
}

// Runs one pipeline command; returns what it logged.
std::string run_command(const std::string& command, const std::string& config,
                        const std::map<std::string, std::string>& overrides,
                        const std::vector<std::string>& suites) {
  RunConfig cfg = load_config(config);
  for (const auto& [k, v] : overrides) set_config_value(cfg, k, v);
  validate_config(cfg);
  std::ostringstream log;
  if (command == "ingest") cmd_ingest(cfg, log);
  else if (command == "stats") cmd_stats(cfg, log);
  else if (command == "gen") cmd_gen(cfg, suites, log);
  else if (command == "train-ngram") cmd_train_ngram(cfg, log);
  else if (command == "score") cmd_score(cfg, suites, log);
  else if (command == "eval") cmd_eval(cfg, suites, "", log);
  else if (command == "analyze") cmd_analyze(cfg, log);
  else if (command == "report") cmd_report(cfg, log);
  else throw Error(ErrorCategory::usage, "unknown command '" + command + "'");
  return log.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Targeted syntactic evaluation core";

  static py::handle error_type = py::exception<Error>(m, "Error").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error_type.ptr(), (std::string(category_token(e.category())) + ": " + e.what()).c_str());
    }
  });

  m.def("exposure_bucket", [](std::int64_t count) -> std::optional<int> {
    if (auto b = exposure_bucket(count)) return b->id;
    return std::nullopt;
  }, py::arg("count"));

  m.def("parse_treebank", [](const std::string& text) {
    std::vector<std::string> out;
    for (const auto& t : parse_treebank(text)) out.push_back(to_string(t));
    return out;
  }, py::arg("text"), "Canonical one-line rendering of every tree.");

  m.def("lexicon_table", [](const std::string& text) { return write_lexicon_table(build_lexicon(parse_treebank(text))); },
        py::arg("treebank_text"));

  py::class_<NGramModel>(m, "NGramModel")
      .def_static("train", [](const std::vector<std::vector<std::string>>& sentences, int order, bool unk_singletons) {
        return NGramModel::train(sentences, {order, unk_singletons});
      }, py::arg("sentences"), py::arg("order") = 5, py::arg("unk_singletons") = false)
      .def_static("deserialize", &NGramModel::deserialize)
      .def_property_readonly("order", &NGramModel::order)
      .def_property_readonly("warnings", &NGramModel::warnings)
      .def("logprob", [](const NGramModel& self, const std::vector<std::string>& context, const std::string& word) {
        return self.logprob(context, word);
      }, py::arg("context"), py::arg("word"))
      .def("surprisals", [](const NGramModel& self, const std::vector<std::string>& tokens, bool include_end) {
        return self.surprisals(tokens, include_end);
      }, py::arg("tokens"), py::arg("include_end") = false)
      .def("sentence_logprob", [](const NGramModel& self, const std::vector<std::string>& tokens) {
        return self.sentence_logprob(tokens);
      })
      .def("serialize", &NGramModel::serialize);

  m.def("wilson_ci", [](std::int64_t k, std::int64_t n, double level) {
    const auto ci = wilson_ci(k, n, level);
    return std::make_pair(ci.lo, ci.hi);
  }, py::arg("k"), py::arg("n"), py::arg("level") = 0.95);
  m.def("binom_test_above", &binom_test_above, py::arg("k"), py::arg("n"), py::arg("p0") = 0.5);
  m.def("binom_test_below", &binom_test_below, py::arg("k"), py::arg("n"), py::arg("p0") = 0.5);
  m.def("pearson_test", [](const std::vector<double>& x, const std::vector<double>& y) {
    const auto r = pearson_test(x, y);
    return std::make_pair(r.r, r.p);
  });
  m.def("fit_logistic", [](const std::vector<std::string>& names, const std::vector<std::vector<double>>& x,
                           const std::vector<int>& y, const std::vector<std::string>& clusters) {
    if (x.size() != y.size() || (!clusters.empty() && clusters.size() != y.size()))
      throw Error(ErrorCategory::undefined_input, "fit_logistic: x, y and clusters differ in length");
    std::vector<LogisticRow> rows;
    for (std::size_t i = 0; i < y.size(); ++i) rows.push_back({x[i], y[i], clusters.empty() ? "" : clusters[i]});
    return fit_to_dict(fit_logistic(names, rows));
  }, py::arg("names"), py::arg("x"), py::arg("y"), py::arg("clusters") = std::vector<std::string>{});
  m.def("item_accuracy", &item_accuracy, py::arg("grammatical_bits"), py::arg("ungrammatical_bits"),
        py::arg("epsilon_tie") = 1e-9);

  m.def("word_sync_beam", [](const std::string& grammar, const std::vector<std::string>& sentence,
                             std::size_t word_beam_k, std::size_t action_beam_k, std::size_t fast_track_k) {
    PcfgActionModel model(ToyPCFG::parse(grammar));
    BeamOptions o;
    o.word_beam_k = word_beam_k;
    o.action_beam_k = action_beam_k;
    o.fast_track_k = fast_track_k;
    return marginal_to_dict(word_sync_beam(model, sentence, o));
  }, py::arg("grammar"), py::arg("sentence"), py::arg("word_beam_k") = 100, py::arg("action_beam_k") = 1000,
     py::arg("fast_track_k") = 5);
  m.def("exact_marginal", [](const std::string& grammar, const std::vector<std::string>& sentence) {
    PcfgActionModel model(ToyPCFG::parse(grammar));
    return marginal_to_dict(exact_marginal(model, sentence));
  }, py::arg("grammar"), py::arg("sentence"));

  m.def("run", &run_command, py::arg("command"), py::arg("config") = "",
        py::arg("overrides") = std::map<std::string, std::string>{}, py::arg("suites") = std::vector<std::string>{},
        "Run one pipeline command and return its log.");
}
