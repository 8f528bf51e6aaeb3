#include "certmon/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "certmon/dataset.hpp"
#include "certmon/error.hpp"
#include "certmon/parallel.hpp"

namespace certmon {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

ReportRow compute_metrics(std::span<const FormulaRun* const> runs, Level level,
                          std::span<const std::size_t> sampled_times) {
  if (level == Level::Level2 && sampled_times.size() != runs.size()) {
    throw ValidationError("one sampled time per episode is needed for Level-2 coverage");
  }
  ReportRow row;
  row.level = level;
  MetricCounts& c = row.counts;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const FormulaRun& run = *runs[i];
    if (run.verdicts.size() != run.truth.size()) {
      throw ValidationError("verdicts and truths are misaligned for '" + run.formula + "'");
    }
    bool all_covered = true;
    bool any_valid = false;
    for (std::size_t t = 0; t < run.verdicts.size(); ++t) {
      const MonitorVerdict& v = run.verdicts[t];
      if (v.t != t) throw ValidationError("verdict times are misaligned");
      const double rho = run.truth[t];
      if (v.label == Label::WarmingUp || std::isnan(rho)) continue;
      any_valid = true;
      ++c.valid;
      const bool safe = v.label == Label::Safe;
      if (rho >= 0.0) {
        ++c.gt_safe;
        if (safe) ++c.true_safe;
      } else {
        ++c.gt_unsafe;
        if (safe) ++c.false_safe;
      }
      if (safe) ++c.safe;
      if (!(v.lower_bound <= rho)) all_covered = false;
    }
    if (level == Level::Level2) {
      const std::size_t tau = sampled_times[i];
      if (tau >= run.verdicts.size() || run.verdicts[tau].label == Label::WarmingUp ||
          std::isnan(run.truth[tau])) {
        throw ValidationError("sampled time " + std::to_string(tau) + " is not a valid time");
      }
      ++c.coverage_points;
      if (run.verdicts[tau].lower_bound <= run.truth[tau]) ++c.covered;
    } else if (any_valid) {
      ++c.coverage_points;
      if (all_covered) ++c.covered;
    }
  }
  row.csr = percent(c.safe, c.valid);
  if (c.safe > 0) row.prec = percent(c.true_safe, c.safe);
  if (c.gt_unsafe > 0) row.fpr = percent(c.false_safe, c.gt_unsafe);
  row.gt = percent(c.gt_safe, c.valid);
  row.coverage = percent(c.covered, c.coverage_points);
  return row;
}

Report build_report(const std::vector<NamedModel>& models, const fs::path& dataset,
                    const ReportOptions& opts) {
  if (models.empty()) throw ValidationError("report needs at least one model");
  const Manifest man = load_manifest(dataset);
  const std::vector<Episode> episodes = load_split(dataset, opts.split);
  Report report;

  for (const NamedModel& nm : models) {
    const CalibratedMonitor& mon = nm.model.monitor;
    if (!nm.model.predictor) {
      throw ValidationError("model '" + nm.name + "' has no predictor configuration");
    }
    if (mon.predicate_names != man.predicate_names) {
      throw ValidationError("model '" + nm.name + "' was calibrated on other predicates");
    }
    std::vector<Formula> formulas;
    for (const auto& text : opts.formulas) formulas.push_back(mon.parse(text));

    std::vector<EpisodeRun> runs(episodes.size());
    parallel_for(episodes.size(), [&](std::size_t i) {
      runs[i] = run_episode(episodes[i], *nm.model.predictor, mon, formulas);
    });
    std::vector<std::size_t> taus;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      taus.push_back(sample_time(opts.seed, i, mon.k_max, episodes[i].last_time()));
    }

    for (std::size_t f = 0; f < formulas.size(); ++f) {
      ReportRow row;
      if (!runs.empty() && runs.front().formulas[f].error) {
        row.error = runs.front().formulas[f].error;
      } else {
        std::vector<const FormulaRun*> per_episode;
        for (const auto& r : runs) per_episode.push_back(&r.formulas[f]);
        row = compute_metrics(per_episode, mon.level, taus);
        row.q = runs.empty() ? mon.radius_for(formulas[f]) : runs.front().formulas[f].radius;
      }
      row.formula = to_string(formulas[f]);
      row.monitor = nm.name;
      row.kind = mon.kind;
      row.level = mon.level;
      report.rows.push_back(std::move(row));
    }

    for (std::size_t k : opts.sweep) {
      SweepPoint p{nm.name, mon.kind, mon.level, k, std::nullopt};
      try {
        p.q = mon.radius_for(mon.parse("G[0," + std::to_string(k) + "] " + opts.sweep_predicate));
      } catch (const ValidationError&) {
        // not expressible in this monitor's basis; left blank
      }
      report.sweep.push_back(p);
    }
  }
  return report;
}

void write_report(const Report& report, const fs::path& out) {
  std::ofstream csv(out);
  if (!csv) throw IoError("cannot write report '" + out.string() + "'");
  csv << "formula,monitor,kind,level,q,CSR,Prec,FPR,GT,coverage,error\n";
  for (const ReportRow& r : report.rows) {
    csv << csv_quote(r.formula) << ',' << csv_quote(r.monitor) << ',' << to_string(r.kind) << ','
        << level_number(r.level) << ',';
    if (r.error) {
      csv << ",,,,,," << csv_quote(*r.error) << '\n';
      continue;
    }
    csv << fixed(r.q, 4) << ',' << fixed(r.csr, 1) << ',' << (r.prec ? fixed(*r.prec, 1) : "")
        << ',' << (r.fpr ? fixed(*r.fpr, 1) : "") << ',' << fixed(r.gt, 1) << ','
        << fixed(r.coverage, 1) << ",\n";
  }
  if (!csv) throw IoError("failed writing report '" + out.string() + "'");

  json rows = json::array();
  for (const ReportRow& r : report.rows) {
    json j = {{"formula", r.formula}, {"monitor", r.monitor}, {"kind", to_string(r.kind)},
              {"level", level_number(r.level)}};
    if (r.error) {
      j["error"] = *r.error;
    } else {
      j["q"] = r.q;
      j["CSR"] = r.csr;
      j["Prec"] = optional_number(r.prec);
      j["FPR"] = optional_number(r.fpr);
      j["GT"] = r.gt;
      j["coverage"] = r.coverage;
      const MetricCounts& c = r.counts;
      j["counts"] = {{"valid", c.valid},         {"safe", c.safe},
                     {"true_safe", c.true_safe}, {"false_safe", c.false_safe},
                     {"gt_safe", c.gt_safe},     {"gt_unsafe", c.gt_unsafe},
                     {"coverage_points", c.coverage_points}, {"covered", c.covered}};
    }
    rows.push_back(std::move(j));
  }
  json sweep = json::array();
  for (const SweepPoint& p : report.sweep) {
    sweep.push_back({{"monitor", p.monitor}, {"kind", to_string(p.kind)},
                     {"level", level_number(p.level)}, {"K", p.k}, {"q", optional_number(p.q)}});
  }
  fs::path side = out;
  side.replace_extension(".json");
  std::ofstream js(side);
  if (!js) throw IoError("cannot write '" + side.string() + "'");
  js << json{{"rows", rows}, {"sweep", sweep}}.dump(2) << '\n';

  fs::path sweep_path = out.parent_path() / (out.stem().string() + "_sweep.csv");
  std::ofstream sw(sweep_path);
  if (!sw) throw IoError("cannot write '" + sweep_path.string() + "'");
  sw << "monitor,kind,level,K,q\n";
  for (const SweepPoint& p : report.sweep) {
    char q[40] = "";
    if (p.q) std::snprintf(q, sizeof q, "%.17g", *p.q);
    sw << csv_quote(p.monitor) << ',' << to_string(p.kind) << ',' << level_number(p.level) << ','
       << p.k << ',' << q << '\n';
  }
  if (!sw) throw IoError("failed writing '" + sweep_path.string() + "'");
}

}  // namespace certmon
