#include "certmon/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "certmon/dataset.hpp"
#include "certmon/error.hpp"
#include "certmon/keyvalue.hpp"
#include "certmon/monitors.hpp"
#include "certmon/report.hpp"
#include "certmon/serialize.hpp"

namespace certmon {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SplitCounts parse_counts(const std::string& text) {
  std::vector<std::uint64_t> parts;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) parts.push_back(parse_uint(cell));
  if (parts.size() != 3) throw ValidationError("--counts expects TRAIN,CALIB,TEST");
  return SplitCounts{parts[0], parts[1], parts[2]};
}

std::vector<std::string> read_formula_file(const std::string& path) {
  std::vector<std::string> out;
  std::stringstream ss(read_text(path));
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(first, last - first + 1));
  }
  if (out.empty()) throw ValidationError("formula file '" + path + "' lists no formulas");
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

struct SimulateArgs {
  std::string config, counts, out;
  std::uint64_t seed = 0;
};

void run_simulate(const SimulateArgs& a) {
  const CrossroadConfig cfg =
      a.config.empty() ? CrossroadConfig{} : CrossroadConfig::from_text(read_text(a.config));
  const SplitCounts counts = parse_counts(a.counts);
  generate_dataset(cfg, counts, a.seed, a.out);
  std::cout << "wrote " << counts.train + counts.calib + counts.test << " episodes to " << a.out
            << '\n';
}

struct CalibrateArgs {
  std::string dataset, monitor = "semantic", scope = "active", formula, noise, sigma = "unit", out;
  int level = 2;
  double alpha = 0.1;
  std::uint64_t seed = 0;
};

void run_calibrate(const CalibrateArgs& a) {
  const Manifest man = load_manifest(a.dataset);
  const MonitorKind kind = parse_monitor_kind(a.monitor);
  const Scope scope = parse_scope(a.scope);
  const Level level = parse_level(a.level);
  const StubMode default_mode =
      kind == MonitorKind::Semantic ? StubMode::NoisyBasis : StubMode::NoisyPredicates;
  const PredictorStub predictor =
      a.noise.empty() ? PredictorStub(default_mode, NoiseModel{}, a.seed)
                      : parse_predictor_config(read_text(a.noise), default_mode);

  BasisSpec spec = kind == MonitorKind::Semantic
                       ? BasisSpec::semantic(build_depth1_dictionary(man.predicate_names,
                                                                     man.intervals))
                       : BasisSpec::history(man.predicate_names, man.k_max);
  std::optional<Formula> formula;
  if (!a.formula.empty()) formula = parse_formula(a.formula, man.predicate_names);
  if (!formula && (scope == Scope::ActiveSupport || kind == MonitorKind::Observer)) {
    throw ValidationError("--formula is required for active-support and observer monitors");
  }
  if (kind == MonitorKind::Observer && level != Level::Level2) {
    throw ValidationError("the observer baseline is Level-2 only");
  }
  if (formula) basis_support(spec, *formula);  // reject unsupported formulas before any work

  std::vector<double> sigma;
  if (a.sigma == "median") {
    sigma = estimate_sigma(load_split(a.dataset, "train"), predictor, spec);
  } else if (a.sigma != "unit") {
    throw ValidationError("--sigma must be unit or median");
  }

  const std::vector<Episode> calib = load_split(a.dataset, "calib");
  StoredModel model{CalibratedMonitor{}, predictor};
  if (kind == MonitorKind::Observer) {
    model.monitor = observer_calibrate(calib, predictor, *formula, man.predicate_names, man.k_max,
                                       a.alpha, a.seed, sigma);
  } else {
    ScoreConfig cfg;
    cfg.sigma = sigma;
    cfg.scope = scope;
    cfg.alpha = a.alpha;
    cfg.level = level;
    if (scope == Scope::ActiveSupport) cfg.support = basis_support(spec, *formula);
    model.monitor = calibrate(calib, predictor, cfg, spec, a.seed);
    if (formula) model.monitor.formula = to_string(*formula);
  }
  save_model(model, a.out);
  std::cout << to_string(kind) << " level-" << a.level << " radius " << model.monitor.radius
            << " from " << calib.size() << " episodes -> " << a.out << '\n';
}

struct CertifyArgs {
  std::string model, dataset, split = "test", out, csv;
  std::vector<std::string> formulas;
};

void run_certify(const CertifyArgs& a) {
  const StoredModel model = load_model(a.model);
  if (!model.predictor) throw ValidationError("model has no predictor configuration");
  const CalibratedMonitor& mon = model.monitor;
  std::vector<std::string> texts = a.formulas;
  if (texts.empty() && !mon.formula.empty()) texts.push_back(mon.formula);
  if (texts.empty()) throw ValidationError("no --formula given and the model has none");
  std::vector<Formula> formulas;
  for (const auto& t : texts) formulas.push_back(mon.parse(t));

  const std::vector<Episode> episodes = load_split(a.dataset, a.split);
  std::ofstream out(a.out);
  if (!out) throw IoError("cannot write '" + a.out + "'");
  std::ofstream csv;
  if (!a.csv.empty()) {
    csv.open(a.csv);
    if (!csv) throw IoError("cannot write '" + a.csv + "'");
    csv << "episode,t,formula,lb,label\n";
  }
  std::size_t failures = 0;
  for (const Episode& ep : episodes) {
    const EpisodeRun run = run_episode(ep, *model.predictor, mon, formulas);
    for (const FormulaRun& fr : run.formulas) {
      if (fr.error) {
        if (&ep == &episodes.front()) std::cerr << "error: " << *fr.error << '\n';
        ++failures;
        continue;
      }
      for (const MonitorVerdict& v : fr.verdicts) {
        const bool warm = std::isnan(v.lower_bound);
        json line = {{"episode", run.episode},
                     {"t", v.t},
                     {"formula", fr.formula},
                     {"lb", warm ? json(nullptr) : json(v.lower_bound)},
                     {"label", to_string(v.label)}};
        out << line.dump() << '\n';
        if (csv.is_open()) {
          csv << run.episode << ',' << v.t << ",\"" << fr.formula << "\","
              << (warm ? std::string() : json(v.lower_bound).dump()) << ',' << to_string(v.label)
              << '\n';
        }
      }
    }
  }
  if (!out) throw IoError("failed writing '" + a.out + "'");
  if (failures == formulas.size() * episodes.size() && failures > 0) {
    throw ValidationError("no formula could be certified by this model");
  }
}

struct ReportArgs {
  std::string models, dataset, formulas, sweep = "1,2,4,8,16", sweep_predicate = "p_f",
                                         split = "test", out;
  std::uint64_t seed = 0;
};

void run_report(const ReportArgs& a) {
  std::vector<NamedModel> models;
  for (const auto& path : split_list(a.models)) {
    models.push_back(NamedModel{fs::path(path).stem().string(), load_model(path)});
  }
  ReportOptions opts;
  opts.formulas = read_formula_file(a.formulas);
  opts.sweep.clear();
  for (const auto& k : split_list(a.sweep)) opts.sweep.push_back(parse_uint(k));
  opts.sweep_predicate = a.sweep_predicate;
  opts.split = a.split;
  opts.seed = a.seed;
  const Report report = build_report(models, a.dataset, opts);
  write_report(report, a.out);
  std::cout << "wrote " << report.rows.size() << " rows to " << a.out << '\n';
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"certified reusable monitoring of past-time STL"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "simulate a crossroad dataset");
  simulate->add_option("--config", sim.config, "crossroad config file (key = value)");
  simulate->add_option("--counts", sim.counts, "episode counts TRAIN,CALIB,TEST")->required();
  simulate->add_option("--seed", sim.seed, "dataset seed");
  simulate->add_option("--out", sim.out, "output directory")->required();

  CalibrateArgs cal;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "calibrate a monitor on the calib split");
  calibrate_cmd->add_option("--dataset", cal.dataset, "dataset directory")->required();
  calibrate_cmd->add_option("--monitor", cal.monitor, "semantic|rolling|observer")
      ->capture_default_str();
  calibrate_cmd->add_option("--level", cal.level, "1 or 2")->capture_default_str();
  calibrate_cmd->add_option("--alpha", cal.alpha, "miscoverage level")->capture_default_str();
  calibrate_cmd->add_option("--scope", cal.scope, "fragment|active")->capture_default_str();
  calibrate_cmd->add_option("--formula", cal.formula, "formula for active-support scoring");
  calibrate_cmd->add_option("--noise", cal.noise, "predictor stub config file");
  calibrate_cmd->add_option("--sigma", cal.sigma, "unit|median")->capture_default_str();
  calibrate_cmd->add_option("--seed", cal.seed, "Level-2 time sampling seed");
  calibrate_cmd->add_option("--out", cal.out, "model JSON path")->required();

  CertifyArgs cert;
  auto* certify = app.add_subcommand("certify", "stream a split through a calibrated monitor");
  certify->add_option("--model", cert.model, "model JSON")->required();
  certify->add_option("--dataset", cert.dataset, "dataset directory")->required();
  certify->add_option("--split", cert.split, "train|calib|test")->capture_default_str();
  certify->add_option("--formula", cert.formulas, "formula to certify (repeatable)");
  certify->add_option("--out", cert.out, "verdict JSONL path")->required();
  certify->add_option("--csv", cert.csv, "also write verdicts as CSV");

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "metrics table and horizon sweep");
  report_cmd->add_option("--models", rep.models, "comma-separated model JSON paths")->required();
  report_cmd->add_option("--dataset", rep.dataset, "dataset directory")->required();
  report_cmd->add_option("--formulas", rep.formulas, "file with one formula per line")
      ->required();
  report_cmd->add_option("--sweep", rep.sweep, "horizons K for G[0,K] sweep")
      ->capture_default_str();
  report_cmd->add_option("--sweep-predicate", rep.sweep_predicate, "predicate of the sweep")
      ->capture_default_str();
  report_cmd->add_option("--split", rep.split, "split to evaluate")->capture_default_str();
  report_cmd->add_option("--seed", rep.seed, "Level-2 coverage time sampling seed");
  report_cmd->add_option("--out", rep.out, "report CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) run_simulate(sim);
    if (calibrate_cmd->parsed()) run_calibrate(cal);
    if (certify->parsed()) run_certify(cert);
    if (report_cmd->parsed()) run_report(rep);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace certmon
