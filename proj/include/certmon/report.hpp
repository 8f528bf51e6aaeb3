#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "certmon/monitors.hpp"
#include "certmon/serialize.hpp"

namespace certmon {

/// Raw counts behind one report row.
struct MetricCounts {
  std::size_t valid = 0;      // times with a verdict and a defined truth
  std::size_t safe = 0;       // Safe verdicts
  std::size_t true_safe = 0;  // Safe and rho >= 0
  std::size_t false_safe = 0; // Safe and rho < 0
  std::size_t gt_safe = 0;    // rho >= 0
  std::size_t gt_unsafe = 0;  // rho < 0
  std::size_t coverage_points = 0;
  std::size_t covered = 0;
};

struct ReportRow {
  std::string formula;
  std::string monitor;  // model name
  MonitorKind kind = MonitorKind::Semantic;
  Level level = Level::Level2;
  double q = 0.0;
  /// Percentages in [0, 100]; Prec is unset without Safe verdicts, FPR when GT is 100%.
  double csr = 0.0;
  std::optional<double> prec;
  std::optional<double> fpr;
  double gt = 0.0;
  double coverage = 0.0;
  MetricCounts counts;
  /// Set when the monitor cannot certify the formula; metrics are then empty.
  std::optional<std::string> error;
};

/// Metrics for one formula over per-episode runs. Level-2 coverage is read at
/// `sampled_times[i]` of episode i; Level-1 coverage is the per-episode event
/// that the lower bound stays below the truth at every valid time.
/// Throws ValidationError when verdicts and truths are misaligned.
ReportRow compute_metrics(std::span<const FormulaRun* const> runs, Level level,
                          std::span<const std::size_t> sampled_times);

struct NamedModel {
  std::string name;
  StoredModel model;
};

struct ReportOptions {
  std::vector<std::string> formulas;
  std::vector<std::size_t> sweep{1, 2, 4, 8, 16};
  std::string sweep_predicate = "p_f";
  std::string split = "test";
  std::uint64_t seed = 0;
};

struct SweepPoint {
  std::string monitor;
  MonitorKind kind = MonitorKind::Semantic;
  Level level = Level::Level2;
  std::size_t k = 0;
  std::optional<double> q;
};

struct Report {
  std::vector<ReportRow> rows;
  std::vector<SweepPoint> sweep;
};

/// Runs every model on the dataset split and collects one row per
/// (formula, model) plus the G[0,K] radius sweep for each model.
Report build_report(const std::vector<NamedModel>& models, const std::filesystem::path& dataset,
                    const ReportOptions& opts);

/// Writes `out` (CSV, percentages at one decimal), `<stem>.json` with full
/// precision and counts, and `<stem>_sweep.csv`.
void write_report(const Report& report, const std::filesystem::path& out);

}  // namespace certmon
