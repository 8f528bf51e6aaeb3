#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "certmon/cli.hpp"
#include "certmon/crossroad.hpp"
#include "certmon/dataset.hpp"
#include "certmon/error.hpp"
#include "certmon/monitors.hpp"
#include "certmon/serialize.hpp"

namespace py = pybind11;
using namespace certmon;

namespace {

using Matrix = std::vector<std::vector<double>>;

Episode episode_from(const Matrix& mu) {
  Episode ep;
  ep.mu = mu;
  ep.validate();
  return ep;
}

Extremum extremum_from(const std::string& mode) {
  if (mode == "min") return Extremum::Min;
  if (mode == "max") return Extremum::Max;
  throw ValidationError("mode must be 'min' or 'max'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Certified past-time STL monitoring with conformal radii.";

  // Translators are tried newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<TimeInterval>(m, "TimeInterval")
      .def(py::init<std::size_t, std::size_t>(), py::arg("a"), py::arg("b"))
      .def_readonly("a", &TimeInterval::a)
      .def_readonly("b", &TimeInterval::b);

  py::class_<Formula>(m, "Formula")
      .def("__str__", [](const Formula& f) { return to_string(f); })
      .def("__repr__", [](const Formula& f) { return "Formula('" + to_string(f) + "')"; })
      .def_property_readonly("horizon", [](const Formula& f) { return horizon(f); })
      .def("predicate_lag_support", [](const Formula& f) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& c : predicate_lag_support(f)) out.emplace_back(c.predicate, c.lag);
        return out;
      });

  m.def("parse_formula",
        [](const std::string& text, const std::vector<std::string>& names) {
          return parse_formula(text, names);
        },
        py::arg("text"), py::arg("predicate_names"));

  m.def("robustness",
        [](const Formula& f, const Matrix& mu, std::size_t t) {
          return robustness(f, episode_from(mu), t);
        },
        py::arg("formula"), py::arg("mu"), py::arg("t"));
  m.def("robustness_trace",
        [](const Formula& f, const Matrix& mu) { return robustness_trace(f, episode_from(mu)); },
        py::arg("formula"), py::arg("mu"));
  m.def("windowed_extrema",
        [](const std::vector<double>& x, std::size_t a, std::size_t b, const std::string& mode) {
          return windowed_extrema(x, TimeInterval{a, b}, extremum_from(mode));
        },
        py::arg("series"), py::arg("a"), py::arg("b"), py::arg("mode") = "min");

  py::class_<AtomicDictionary>(m, "AtomicDictionary")
      .def("__len__", &AtomicDictionary::size)
      .def_property_readonly("k_max", &AtomicDictionary::k_max)
      .def_property_readonly("predicate_names", &AtomicDictionary::predicate_names)
      .def("atoms", [](const AtomicDictionary& d) {
        std::vector<std::string> out;
        for (const auto& a : d.atoms()) out.push_back(to_string(a));
        return out;
      })
      .def("atom_support", [](const AtomicDictionary& d, const Formula& f) {
        return atom_support(f, d);
      });

  m.def("build_depth1_dictionary",
        [](const std::vector<std::string>& names,
           const std::vector<std::pair<std::size_t, std::size_t>>& intervals) {
          std::vector<TimeInterval> ivs;
          for (auto [a, b] : intervals) ivs.push_back({a, b});
          return build_depth1_dictionary(names, ivs);
        },
        py::arg("predicate_names"), py::arg("intervals"));

  m.def("semantic_basis",
        [](const Matrix& mu, const AtomicDictionary& d, std::size_t t) {
          return semantic_basis(episode_from(mu), d, t).values;
        },
        py::arg("mu"), py::arg("dictionary"), py::arg("t"));
  m.def("predicate_history_basis",
        [](const Matrix& mu, std::size_t k_max, std::size_t t) {
          return predicate_history_basis(episode_from(mu), k_max, t).values;
        },
        py::arg("mu"), py::arg("k_max"), py::arg("t"));

  py::class_<Decoder>(m, "Decoder")
      .def_property_readonly("dim", &Decoder::dim)
      .def_property_readonly("support", &Decoder::support)
      .def("__call__", [](const Decoder& d, const std::vector<double>& b) { return d(b); })
      .def("to_json", [](const Decoder& d) { return decoder_to_json(d); });

  m.def("semantic_decoder", &compile_semantic_decoder, py::arg("formula"), py::arg("dictionary"));
  m.def("history_decoder",
        [](const Formula& f, std::size_t m, std::size_t k_max) {
          return compile_history_decoder(f, HistoryLayout{m, k_max});
        },
        py::arg("formula"), py::arg("m"), py::arg("k_max"));

  m.def("split_quantile_rank", &split_quantile_rank, py::arg("n"), py::arg("alpha"));
  m.def("split_quantile",
        [](const std::vector<double>& s, double alpha) { return split_quantile(s, alpha); },
        py::arg("scores"), py::arg("alpha"));
  m.def("certified_lower_bound",
        [](double radius, const std::vector<double>& sigma, const std::vector<double>& predicted,
           const Decoder& d) { return certified_lower_bound(radius, sigma, predicted, d); },
        py::arg("radius"), py::arg("sigma"), py::arg("predicted"), py::arg("decoder"));
  m.def("interval_propagate",
        [](const Formula& f, std::size_t m, std::size_t k_max, const std::vector<double>& lo,
           const std::vector<double>& hi) {
          return interval_propagate(f, HistoryLayout{m, k_max}, lo, hi);
        },
        py::arg("formula"), py::arg("m"), py::arg("k_max"), py::arg("lower"), py::arg("upper"));

  m.def("predicate_names", &CrossroadPredicates::names);
  m.def("simulate_episode",
        [](std::uint64_t seed, std::size_t T) {
          CrossroadConfig cfg;
          cfg.T = T;
          return simulate_episode(cfg, seed).mu;
        },
        py::arg("seed"), py::arg("T") = 200,
        "Predicate traces mu[k][t] of one crossroad episode.");
  m.def("generate_dataset",
        [](const std::filesystem::path& dir, std::size_t train, std::size_t calib,
           std::size_t test, std::uint64_t seed, std::size_t T) {
          CrossroadConfig cfg;
          cfg.T = T;
          generate_dataset(cfg, {train, calib, test}, seed, dir);
        },
        py::arg("dir"), py::arg("train"), py::arg("calib"), py::arg("test"), py::arg("seed") = 0,
        py::arg("T") = 200);

  py::class_<StoredModel>(m, "Model")
      .def_static("load", &load_model, py::arg("path"))
      .def_property_readonly("kind", [](const StoredModel& s) { return to_string(s.monitor.kind); })
      .def_property_readonly("level", [](const StoredModel& s) { return level_number(s.monitor.level); })
      .def_property_readonly("alpha", [](const StoredModel& s) { return s.monitor.alpha; })
      .def_property_readonly("radius", [](const StoredModel& s) { return s.monitor.radius; })
      .def_property_readonly("dim", [](const StoredModel& s) { return s.monitor.dim(); })
      .def_property_readonly("k_max", [](const StoredModel& s) { return s.monitor.k_max; })
      .def("radius_for",
           [](const StoredModel& s, const std::string& text) {
             return s.monitor.radius_for(s.monitor.parse(text));
           },
           py::arg("formula"))
      .def("certify",
           [](const StoredModel& s, const std::string& text, const std::vector<double>& predicted) {
             const CompiledQuery q = prepare_query(s.monitor, s.monitor.parse(text));
             return certified_lower_bound(q.radius, s.monitor.sigma, predicted, q.decoder);
           },
           py::arg("formula"), py::arg("predicted"),
           "Certified lower bound from a predicted basis vector.");

  m.def("cli",
        [](std::vector<std::string> args) {
          args.insert(args.begin(), "certmon");
          std::vector<char*> argv;
          for (auto& a : args) argv.push_back(a.data());
          return run_cli(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"), "Runs a certmon subcommand; returns the exit code.");
}
