#include "certmon/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

#include "certmon/error.hpp"
#include "certmon/parallel.hpp"

namespace certmon {

const char* to_string(MonitorKind kind) {
  switch (kind) {
    case MonitorKind::Semantic: return "semantic";
    case MonitorKind::Rolling: return "rolling";
    case MonitorKind::Observer: return "observer";
  }
  return "?";
}

MonitorKind parse_monitor_kind(const std::string& text) {
  if (text == "semantic") return MonitorKind::Semantic;
  if (text == "rolling") return MonitorKind::Rolling;
  if (text == "observer") return MonitorKind::Observer;
  throw ValidationError("unknown monitor kind '" + text + "'");
}

const char* to_string(Scope scope) {
  return scope == Scope::FragmentWide ? "fragment" : "active";
}

Scope parse_scope(const std::string& text) {
  if (text == "fragment") return Scope::FragmentWide;
  if (text == "active") return Scope::ActiveSupport;
  throw ValidationError("unknown scope '" + text + "' (expected fragment|active)");
}

int level_number(Level level) { return level == Level::Level1 ? 1 : 2; }

Level parse_level(int number) {
  if (number == 1) return Level::Level1;
  if (number == 2) return Level::Level2;
  throw ValidationError("level must be 1 or 2");
}

void ScoreConfig::validate(std::size_t dim) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (!sigma.empty() && sigma.size() != dim) {
    throw DimensionMismatch("sigma has " + std::to_string(sigma.size()) + " entries, basis has " +
                            std::to_string(dim));
  }
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("every sigma must be > 0");
  }
  if (scope == Scope::ActiveSupport) {
    if (support.empty()) throw ValidationError("active-support score needs a nonempty support");
    if (*support.rbegin() >= dim) throw DimensionMismatch("support index outside basis");
  }
}

std::vector<double> one_sided_errors(std::span<const double> predicted,
                                     std::span<const double> truth) {
  if (predicted.size() != truth.size()) {
    throw DimensionMismatch("predicted and true bases differ in dimension");
  }
  std::vector<double> out(predicted.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, predicted[i] - truth[i]);
  return out;
}

std::vector<double> one_sided_errors(const BasisVector& predicted, const BasisVector& truth) {
  if (predicted.kind != truth.kind) throw DimensionMismatch("basis kinds differ");
  return one_sided_errors(predicted.values, truth.values);
}

double score(std::span<const double> errors, const ScoreConfig& cfg) {
  cfg.validate(errors.size());
  auto term = [&](std::size_t l) { return errors[l] / (cfg.sigma.empty() ? 1.0 : cfg.sigma[l]); };
  double best = 0.0;
  if (cfg.scope == Scope::ActiveSupport) {
    for (std::size_t l : cfg.support) best = std::max(best, term(l));
  } else {
    for (std::size_t l = 0; l < errors.size(); ++l) best = std::max(best, term(l));
  }
  return best;
}

std::size_t split_quantile_rank(std::size_t n, double alpha) {
  if (n == 0) throw ValidationError("split quantile of an empty score list");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  // The epsilon absorbs representation error in (n+1)(1-alpha), e.g. 20 * 0.9.
  const double raw = std::ceil(static_cast<double>(n + 1) * (1.0 - alpha) - 1e-9);
  const auto rank = static_cast<std::size_t>(std::max(1.0, raw));
  return std::min(n, rank);
}

double split_quantile(std::span<const double> scores, double alpha) {
  const std::size_t rank = split_quantile_rank(scores.size(), alpha);
  std::vector<double> sorted(scores.begin(), scores.end());
  std::stable_sort(sorted.begin(), sorted.end());
  return sorted[rank - 1];
}

BasisSpec BasisSpec::semantic(const AtomicDictionary& dict) {
  BasisSpec spec;
  spec.kind = BasisKind::Semantic;
  spec.predicate_names = dict.predicate_names();
  spec.k_max = dict.k_max();
  spec.dictionary = dict;
  return spec;
}

BasisSpec BasisSpec::history(std::vector<std::string> names, std::size_t k_max) {
  BasisSpec spec;
  spec.kind = BasisKind::PredicateHistory;
  spec.predicate_names = std::move(names);
  spec.k_max = k_max;
  return spec;
}

std::size_t BasisSpec::dim() const {
  return kind == BasisKind::Semantic ? dictionary->size()
                                     : HistoryLayout{predicate_names.size(), k_max}.dim();
}

std::size_t sample_time(std::uint64_t seed, std::size_t index, std::size_t k_max,
                        std::size_t last_time) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> pick(k_max, last_time);
  return pick(rng);
}

namespace {

enum class ErrorKind { OneSided, Absolute };

double error_of(double predicted, double truth, ErrorKind kind) {
  return kind == ErrorKind::OneSided ? std::max(0.0, predicted - truth)
                                     : std::abs(predicted - truth);
}

// Coordinate errors for t = k_max .. T, one row per time.
BasisTrack coordinate_errors(const Episode& ep, const Predictor& predictor, const BasisSpec& spec,
                             ErrorKind kind) {
  if (ep.length() <= spec.k_max) {
    throw ValidationError("episode " + std::to_string(ep.id) + " has " +
                          std::to_string(ep.length()) + " steps, need more than k_max=" +
                          std::to_string(spec.k_max));
  }
  if (ep.predicate_count() != spec.predicate_names.size()) {
    throw DimensionMismatch("episode predicate count does not match the basis");
  }
  if (spec.kind == BasisKind::Semantic) {
    const BasisTrack truth = semantic_basis_track(ep, *spec.dictionary);
    BasisTrack predicted = predictor.predict_semantic(ep, *spec.dictionary);
    if (predicted.dim != truth.dim || predicted.first_time != truth.first_time ||
        predicted.values.size() != truth.values.size()) {
      throw DimensionMismatch("predictor output does not match the semantic basis");
    }
    for (std::size_t i = 0; i < predicted.values.size(); ++i) {
      predicted.values[i] = error_of(predicted.values[i], truth.values[i], kind);
    }
    return predicted;
  }

  const auto mu_hat = predictor.predict_predicates(ep);
  const HistoryLayout layout{ep.predicate_count(), spec.k_max};
  if (mu_hat.size() != layout.m) {
    throw DimensionMismatch("predictor output does not match the predicate count");
  }
  std::vector<std::vector<double>> step_err(layout.m, std::vector<double>(ep.length()));
  for (std::size_t k = 0; k < layout.m; ++k) {
    if (mu_hat[k].size() != ep.length()) {
      throw DimensionMismatch("predictor output does not match the episode length");
    }
    for (std::size_t s = 0; s < ep.length(); ++s) {
      step_err[k][s] = error_of(mu_hat[k][s], ep.mu[k][s], kind);
    }
  }
  BasisTrack out{BasisKind::PredicateHistory, spec.k_max, layout.dim(), {}};
  out.values.reserve((ep.length() - spec.k_max) * layout.dim());
  for (std::size_t t = spec.k_max; t < ep.length(); ++t) {
    for (std::size_t k = 0; k < layout.m; ++k) {
      for (std::size_t j = 0; j <= spec.k_max; ++j) out.values.push_back(step_err[k][t - j]);
    }
  }
  return out;
}

ScoreCache build_cache(std::span<const Episode> episodes, const Predictor& predictor,
                       const BasisSpec& spec, Level level, ErrorKind kind, std::uint64_t seed) {
  if (episodes.empty()) throw ValidationError("calibration needs at least one episode");
  ScoreCache cache;
  cache.symmetric = kind == ErrorKind::Absolute;
  cache.dim = spec.dim();
  cache.errors.assign(episodes.size() * cache.dim, 0.0);
  if (level == Level::Level2) cache.sampled_times.assign(episodes.size(), 0);
  parallel_for(episodes.size(), [&](std::size_t i) {
    const BasisTrack errors = coordinate_errors(episodes[i], predictor, spec, kind);
    auto out = cache.errors.begin() + static_cast<std::ptrdiff_t>(i * cache.dim);
    if (level == Level::Level2) {
      const std::size_t tau = sample_time(seed, i, spec.k_max, episodes[i].last_time());
      cache.sampled_times[i] = tau;
      const auto row = errors.at(tau);
      std::copy(row.begin(), row.end(), out);
    } else {
      for (std::size_t t = errors.first_time; t <= errors.last_time(); ++t) {
        const auto row = errors.at(t);
        for (std::size_t l = 0; l < cache.dim; ++l) out[l] = std::max(out[l], row[l]);
      }
    }
  });
  return cache;
}

void warn_if_small(std::size_t n, double alpha) {
  if (static_cast<double>(n) < std::ceil(1.0 / alpha) - 1.0) {
    std::cerr << "warning: only " << n << " calibration episodes for alpha=" << alpha
              << "; the radius is the largest score\n";
  }
}

}  // namespace

CalibratedMonitor calibrate(std::span<const Episode> episodes, const Predictor& predictor,
                            const ScoreConfig& cfg, const BasisSpec& spec, std::uint64_t seed) {
  const std::size_t dim = spec.dim();
  cfg.validate(dim);
  CalibratedMonitor mon;
  mon.kind = spec.kind == BasisKind::Semantic ? MonitorKind::Semantic : MonitorKind::Rolling;
  mon.level = cfg.level;
  mon.alpha = cfg.alpha;
  mon.scope = cfg.scope;
  mon.support = cfg.scope == Scope::ActiveSupport ? cfg.support : std::set<std::size_t>{};
  mon.sigma = cfg.sigma.empty() ? std::vector<double>(dim, 1.0) : cfg.sigma;
  mon.predicate_names = spec.predicate_names;
  mon.dictionary = spec.dictionary;
  mon.k_max = spec.k_max;
  mon.n_calibration = episodes.size();
  mon.seed = seed;
  mon.cache = build_cache(episodes, predictor, spec, cfg.level, ErrorKind::OneSided, seed);
  warn_if_small(episodes.size(), cfg.alpha);

  std::set<std::size_t> all;
  for (std::size_t l = 0; l < dim; ++l) all.insert(all.end(), l);
  mon.radius = mon.radius_for_support(cfg.scope == Scope::ActiveSupport ? cfg.support : all);
  return mon;
}

CalibratedMonitor observer_calibrate(std::span<const Episode> episodes, const Predictor& predictor,
                                     const Formula& f, const std::vector<std::string>& names,
                                     std::size_t k_max, double alpha, std::uint64_t seed,
                                     std::vector<double> sigma) {
  const BasisSpec spec = BasisSpec::history(names, k_max);
  CalibratedMonitor mon;
  mon.kind = MonitorKind::Observer;
  mon.level = Level::Level2;
  mon.alpha = alpha;
  mon.scope = Scope::ActiveSupport;
  mon.formula = to_string(f);
  mon.predicate_names = names;
  mon.k_max = k_max;
  mon.support = mon.support_of(f);
  mon.sigma = sigma.empty() ? std::vector<double>(spec.dim(), 1.0) : std::move(sigma);

  ScoreConfig cfg{mon.sigma, Scope::ActiveSupport, mon.support, alpha, Level::Level2};
  cfg.validate(spec.dim());
  mon.n_calibration = episodes.size();
  mon.seed = seed;
  mon.cache = build_cache(episodes, predictor, spec, Level::Level2, ErrorKind::Absolute, seed);
  warn_if_small(episodes.size(), alpha / static_cast<double>(mon.support.size()));
  mon.radius = mon.radius_for_support(mon.support);
  return mon;
}

std::set<std::size_t> basis_support(const BasisSpec& spec, const Formula& f) {
  if (spec.kind == BasisKind::Semantic) return atom_support(f, *spec.dictionary);
  const HistoryLayout layout{spec.predicate_names.size(), spec.k_max};
  if (horizon(f) > spec.k_max) {
    throw HorizonExceeded("formula horizon " + std::to_string(horizon(f)) +
                          " exceeds monitor history " + std::to_string(spec.k_max));
  }
  std::set<std::size_t> out;
  for (const auto& c : predicate_lag_support(f)) {
    if (c.predicate >= layout.m) throw ValidationError("formula uses an undeclared predicate");
    out.insert(layout.index(c));
  }
  return out;
}

std::set<std::size_t> CalibratedMonitor::support_of(const Formula& f) const {
  BasisSpec spec;
  spec.kind = basis_kind();
  spec.predicate_names = predicate_names;
  spec.k_max = k_max;
  spec.dictionary = dictionary;
  return basis_support(spec, f);
}

Formula CalibratedMonitor::parse(const std::string& text) const {
  return parse_formula(text, predicate_names);
}

Decoder CalibratedMonitor::compile(const Formula& f) const {
  if (kind == MonitorKind::Semantic) return compile_semantic_decoder(f, *dictionary);
  return compile_history_decoder(f, history_layout());
}

double CalibratedMonitor::radius_for_support(const std::set<std::size_t>& coords) const {
  if (coords.empty()) throw ValidationError("radius requested for an empty support");
  if (*coords.rbegin() >= cache.dim || cache.dim != sigma.size()) {
    throw DimensionMismatch("support outside the cached basis");
  }
  const std::size_t n = cache.rows();
  if (kind == MonitorKind::Observer) {
    const double per_coordinate_alpha = alpha / static_cast<double>(coords.size());
    double worst = 0.0;
    std::vector<double> column(n);
    for (std::size_t l : coords) {
      for (std::size_t i = 0; i < n; ++i) column[i] = cache.row(i)[l] / sigma[l];
      worst = std::max(worst, split_quantile(column, per_coordinate_alpha));
    }
    return worst;
  }
  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = cache.row(i);
    for (std::size_t l : coords) scores[i] = std::max(scores[i], row[l] / sigma[l]);
  }
  return split_quantile(scores, alpha);
}

double CalibratedMonitor::radius_for(const Formula& f) const {
  if (kind != MonitorKind::Observer && scope == Scope::FragmentWide) {
    support_of(f);  // still reject formulas the basis cannot express
    return radius;
  }
  return radius_for_support(support_of(f));
}

double certified_lower_bound(double radius, std::span<const double> sigma,
                             std::span<const double> predicted, const Decoder& d) {
  if (predicted.size() != d.dim() || sigma.size() != d.dim()) {
    throw DimensionMismatch("predicted basis, sigma and decoder dimensions disagree");
  }
  std::vector<double> lowered(predicted.begin(), predicted.end());
  for (std::size_t l = 0; l < lowered.size(); ++l) lowered[l] -= radius * sigma[l];
  return d(lowered);
}

double certified_lower_bound(const CalibratedMonitor& mon, const BasisVector& predicted,
                             const Decoder& d) {
  if (predicted.kind != mon.basis_kind() || d.basis_kind() != mon.basis_kind()) {
    throw DimensionMismatch("basis kind does not match the monitor");
  }
  if (mon.scope == Scope::ActiveSupport &&
      !std::includes(mon.support.begin(), mon.support.end(), d.support().begin(),
                     d.support().end())) {
    throw ValidationError("decoder reads coordinates outside the calibrated active support");
  }
  return certified_lower_bound(mon.radius, mon.sigma, predicted.values, d);
}

namespace {

using Bounds = std::pair<double, double>;

Bounds propagate(const Formula& f, const HistoryLayout& layout, std::size_t lag,
                 std::span<const double> lower, std::span<const double> upper) {
  switch (f.op()) {
    case Op::Predicate: {
      const std::size_t l = layout.index(f.predicate_index(), lag);
      return {lower[l], upper[l]};
    }
    case Op::And:
    case Op::Or: {
      const Bounds a = propagate(f.left(), layout, lag, lower, upper);
      const Bounds b = propagate(f.right(), layout, lag, lower, upper);
      if (f.op() == Op::And) return {std::min(a.first, b.first), std::min(a.second, b.second)};
      return {std::max(a.first, b.first), std::max(a.second, b.second)};
    }
    case Op::Always:
    case Op::Eventually: {
      const bool is_min = f.op() == Op::Always;
      Bounds acc = propagate(f.child(), layout, lag + f.interval().a, lower, upper);
      for (std::size_t j = f.interval().a + 1; j <= f.interval().b; ++j) {
        const Bounds b = propagate(f.child(), layout, lag + j, lower, upper);
        acc = is_min ? Bounds{std::min(acc.first, b.first), std::min(acc.second, b.second)}
                     : Bounds{std::max(acc.first, b.first), std::max(acc.second, b.second)};
      }
      return acc;
    }
  }
  return {0.0, 0.0};
}

void check_bounds(std::span<const double> lower, std::span<const double> upper, std::size_t dim) {
  if (lower.size() != dim || upper.size() != dim) {
    throw DimensionMismatch("interval bounds do not match the basis dimension");
  }
  for (std::size_t l = 0; l < dim; ++l) {
    if (!(lower[l] <= upper[l])) {
      throw ValidationError("crossed interval bounds at coordinate " + std::to_string(l));
    }
  }
}

}  // namespace

std::pair<double, double> interval_propagate(const Formula& f, const HistoryLayout& layout,
                                             std::span<const double> lower,
                                             std::span<const double> upper) {
  check_bounds(lower, upper, layout.dim());
  if (horizon(f) > layout.k_max) throw HorizonExceeded("formula horizon exceeds the history");
  for (const auto& c : predicate_lag_support(f)) {
    if (c.predicate >= layout.m) throw ValidationError("formula uses an undeclared predicate");
  }
  return propagate(f, layout, 0, lower, upper);
}

std::pair<double, double> interval_propagate(const Decoder& d, std::span<const double> lower,
                                             std::span<const double> upper) {
  check_bounds(lower, upper, d.dim());
  // Min and max are monotone, so endpoints propagate independently.
  return {d(lower), d(upper)};
}

std::vector<double> estimate_sigma(std::span<const Episode> episodes, const Predictor& predictor,
                                   const BasisSpec& spec) {
  const std::size_t dim = spec.dim();
  std::vector<std::vector<double>> samples(dim);
  for (const auto& ep : episodes) {
    const BasisTrack errors = coordinate_errors(ep, predictor, spec, ErrorKind::Absolute);
    for (std::size_t t = errors.first_time; t <= errors.last_time(); ++t) {
      const auto row = errors.at(t);
      for (std::size_t l = 0; l < dim; ++l) samples[l].push_back(row[l]);
    }
  }
  std::vector<double> sigma(dim, 1.0);
  for (std::size_t l = 0; l < dim; ++l) {
    auto& s = samples[l];
    if (s.empty()) continue;
    std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(s.size() / 2), s.end());
    sigma[l] = std::max(1e-6, s[s.size() / 2]);
  }
  return sigma;
}

}  // namespace certmon
