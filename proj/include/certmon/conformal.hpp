#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "certmon/dictionary.hpp"
#include "certmon/fragment.hpp"
#include "certmon/predictor.hpp"
#include "certmon/robustness.hpp"

namespace certmon {

enum class Level { Level1, Level2 };
enum class Scope { FragmentWide, ActiveSupport };
enum class MonitorKind { Semantic, Rolling, Observer };

const char* to_string(MonitorKind kind);
MonitorKind parse_monitor_kind(const std::string& text);
const char* to_string(Scope scope);
Scope parse_scope(const std::string& text);
int level_number(Level level);
Level parse_level(int number);

struct ScoreConfig {
  /// Per-coordinate scale; empty means 1 everywhere.
  std::vector<double> sigma;
  Scope scope = Scope::FragmentWide;
  /// Coordinates the score reads under ActiveSupport.
  std::set<std::size_t> support;
  double alpha = 0.1;
  Level level = Level::Level2;

  /// Throws ValidationError when alpha, sigma or support are unusable for `dim`.
  void validate(std::size_t dim) const;
};

/// max(0, predicted - truth), coordinatewise.
std::vector<double> one_sided_errors(std::span<const double> predicted,
                                     std::span<const double> truth);
std::vector<double> one_sided_errors(const BasisVector& predicted, const BasisVector& truth);

/// Largest sigma-normalized error over all coordinates or the active support.
double score(std::span<const double> errors, const ScoreConfig& cfg);

/// 1-based rank min(n, ceil((n+1)(1-alpha))).
std::size_t split_quantile_rank(std::size_t n, double alpha);

/// Order statistic of `scores` at split_quantile_rank.
double split_quantile(std::span<const double> scores, double alpha);

/// Per-episode aggregated coordinate errors kept from calibration so that
/// radii for new supports need no new data.
struct ScoreCache {
  static constexpr int kVersion = 1;
  /// True for the observer's symmetric |error|, false for one-sided errors.
  bool symmetric = false;
  std::size_t dim = 0;
  /// Level-2 evaluation time per episode; empty for Level-1.
  std::vector<std::size_t> sampled_times;
  /// rows() x dim, raw (not sigma-scaled) errors. Level-1 rows hold the
  /// per-coordinate maximum over all valid times.
  std::vector<double> errors;

  std::size_t rows() const { return dim == 0 ? 0 : errors.size() / dim; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(errors).subspan(i * dim, dim);
  }
};

/// Frozen calibration result; enough to certify at runtime.
struct CalibratedMonitor {
  MonitorKind kind = MonitorKind::Semantic;
  Level level = Level::Level2;
  double alpha = 0.1;
  Scope scope = Scope::FragmentWide;
  /// Calibrated active support (ActiveSupport and observer monitors).
  std::set<std::size_t> support;
  /// Formula the monitor was calibrated for, if any.
  std::string formula;
  std::vector<double> sigma;
  std::vector<std::string> predicate_names;
  /// Present for semantic monitors.
  std::optional<AtomicDictionary> dictionary;
  std::size_t k_max = 0;
  double radius = 0.0;
  std::size_t n_calibration = 0;
  std::uint64_t seed = 0;
  ScoreCache cache;

  BasisKind basis_kind() const {
    return kind == MonitorKind::Semantic ? BasisKind::Semantic : BasisKind::PredicateHistory;
  }
  HistoryLayout history_layout() const { return {predicate_names.size(), k_max}; }
  std::size_t dim() const { return sigma.size(); }

  /// Basis coordinates formula f reads in this monitor's basis.
  std::set<std::size_t> support_of(const Formula& f) const;
  Formula parse(const std::string& text) const;
  Decoder compile(const Formula& f) const;

  /// Radius recomputed from the score cache for the given support:
  /// active-support quantile for semantic/rolling, Bonferroni max for observer.
  double radius_for_support(const std::set<std::size_t>& support) const;
  /// Fragment-wide monitors return `radius`; otherwise radius_for_support(support_of(f)).
  double radius_for(const Formula& f) const;
};

/// Which basis to calibrate on.
struct BasisSpec {
  BasisKind kind = BasisKind::Semantic;
  std::vector<std::string> predicate_names;
  std::size_t k_max = 0;
  std::optional<AtomicDictionary> dictionary;

  static BasisSpec semantic(const AtomicDictionary& dict);
  static BasisSpec history(std::vector<std::string> names, std::size_t k_max);
  std::size_t dim() const;
};

/// Coordinates of `spec`'s basis that formula f reads.
std::set<std::size_t> basis_support(const BasisSpec& spec, const Formula& f);

/// Split-conformal calibration of a semantic (semantic spec) or rolling
/// (history spec) monitor. Level-2 time samples come from `seed`.
CalibratedMonitor calibrate(std::span<const Episode> episodes, const Predictor& predictor,
                            const ScoreConfig& cfg, const BasisSpec& spec, std::uint64_t seed);

/// Bonferroni observer: symmetric per-coordinate scores over the predicate-lag
/// support of f, each calibrated at level 1 - alpha/|support|; the reported
/// radius is the largest per-coordinate quantile.
CalibratedMonitor observer_calibrate(std::span<const Episode> episodes, const Predictor& predictor,
                                     const Formula& f, const std::vector<std::string>& names,
                                     std::size_t k_max, double alpha, std::uint64_t seed,
                                     std::vector<double> sigma = {});

/// decode(d, predicted - radius * sigma) with explicit radius.
double certified_lower_bound(double radius, std::span<const double> sigma,
                             std::span<const double> predicted, const Decoder& d);

/// Uses the monitor's calibrated radius. Throws on kind or dimension mismatch
/// and when an ActiveSupport monitor is asked about coordinates outside its support.
double certified_lower_bound(const CalibratedMonitor& mon, const BasisVector& predicted,
                             const Decoder& d);

/// Interval evaluation of f over predicate-history bounds; returns
/// (lower, upper) robustness. Throws ValidationError on crossed bounds.
std::pair<double, double> interval_propagate(const Formula& f, const HistoryLayout& layout,
                                             std::span<const double> lower,
                                             std::span<const double> upper);

/// Same over a compiled decoder.
std::pair<double, double> interval_propagate(const Decoder& d, std::span<const double> lower,
                                             std::span<const double> upper);

/// Median absolute prediction error per coordinate over a held-out slice,
/// floored at 1e-6. Used as an optional sigma before calibration.
std::vector<double> estimate_sigma(std::span<const Episode> episodes, const Predictor& predictor,
                                   const BasisSpec& spec);

/// Uniform draw from {k_max, ..., last_time} for episode `index`.
std::size_t sample_time(std::uint64_t seed, std::size_t index, std::size_t k_max,
                        std::size_t last_time);

}  // namespace certmon
