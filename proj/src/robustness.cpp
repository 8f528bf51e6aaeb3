#include "certmon/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "certmon/error.hpp"

namespace certmon {

void Episode::validate() const {
  if (mu.empty()) throw ValidationError("episode has no predicates");
  const std::size_t n = mu.front().size();
  if (n == 0) throw ValidationError("episode has no timesteps");
  for (const auto& row : mu) {
    if (row.size() != n) throw ValidationError("ragged predicate matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw ValidationError("non-finite predicate value");
    }
  }
  if (!states.empty() && states.size() != n) {
    throw ValidationError("state count does not match predicate length");
  }
}

const char* to_string(BasisKind kind) {
  return kind == BasisKind::Semantic ? "semantic" : "predicate_history";
}

std::span<const double> BasisTrack::at(std::size_t t) const {
  if (t < first_time || t > last_time() || rows() == 0) {
    throw TimeOutOfRange("time " + std::to_string(t) + " outside basis track [" +
                         std::to_string(first_time) + "," + std::to_string(last_time()) + "]");
  }
  return std::span<const double>(values).subspan((t - first_time) * dim, dim);
}

BasisVector BasisTrack::vector_at(std::size_t t) const {
  auto row = at(t);
  return BasisVector{kind, t, std::vector<double>(row.begin(), row.end())};
}

std::vector<double> windowed_extrema(std::span<const double> series, TimeInterval interval,
                                     Extremum mode) {
  const std::size_t n = series.size();
  const std::size_t a = interval.a, b = interval.b;
  std::vector<double> out;
  if (n <= b) return out;
  out.reserve(n - b);

  // Strict comparison keeps the earliest of equal values at the front, which
  // is the element a left-to-right scan would keep.
  auto dominated = [mode](double back, double incoming) {
    return mode == Extremum::Min ? back > incoming : back < incoming;
  };
  std::deque<std::size_t> window;
  std::size_t next = 0;  // next series index to enter the window
  for (std::size_t t = b; t < n; ++t) {
    const std::size_t hi = t - a;
    for (; next <= hi; ++next) {
      while (!window.empty() && dominated(series[window.back()], series[next])) {
        window.pop_back();
      }
      window.push_back(next);
    }
    while (window.front() < t - b) window.pop_front();
    out.push_back(series[window.front()]);
  }
  return out;
}

namespace {

void check_predicates(const Formula& f, const Episode& ep) {
  for (const auto& c : predicate_lag_support(f)) {
    if (c.predicate >= ep.predicate_count()) {
      throw ValidationError("formula references predicate " + std::to_string(c.predicate) +
                            " but the episode has " + std::to_string(ep.predicate_count()));
    }
  }
}

double eval(const Formula& f, const Episode& ep, std::size_t t) {
  switch (f.op()) {
    case Op::Predicate:
      return ep.mu[f.predicate_index()][t];
    case Op::And:
      return std::min(eval(f.left(), ep, t), eval(f.right(), ep, t));
    case Op::Or:
      return std::max(eval(f.left(), ep, t), eval(f.right(), ep, t));
    case Op::Always:
    case Op::Eventually: {
      const bool is_min = f.op() == Op::Always;
      double best = eval(f.child(), ep, t - f.interval().b);
      for (std::size_t s = t - f.interval().b + 1; s <= t - f.interval().a; ++s) {
        const double v = eval(f.child(), ep, s);
        if (is_min ? v < best : v > best) best = v;
      }
      return best;
    }
  }
  return 0.0;
}

// Trace of f over t = horizon(f) .. T.
std::vector<double> trace(const Formula& f, const Episode& ep) {
  switch (f.op()) {
    case Op::Predicate:
      return ep.mu[f.predicate_index()];
    case Op::And:
    case Op::Or: {
      const std::size_t hl = horizon(f.left()), hr = horizon(f.right());
      const std::size_t h = std::max(hl, hr);
      const auto l = trace(f.left(), ep);
      const auto r = trace(f.right(), ep);
      std::vector<double> out(ep.length() - h);
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double lv = l[i + h - hl], rv = r[i + h - hr];
        out[i] = f.op() == Op::And ? std::min(lv, rv) : std::max(lv, rv);
      }
      return out;
    }
    case Op::Always:
    case Op::Eventually:
      return windowed_extrema(trace(f.child(), ep), f.interval(),
                              f.op() == Op::Always ? Extremum::Min : Extremum::Max);
  }
  return {};
}

void check_time(std::size_t t, std::size_t first_valid, const Episode& ep) {
  if (ep.length() == 0 || t < first_valid || t > ep.last_time()) {
    throw TimeOutOfRange("time " + std::to_string(t) + " outside valid range [" +
                         std::to_string(first_valid) + "," +
                         std::to_string(ep.length() == 0 ? 0 : ep.last_time()) + "]");
  }
}

}  // namespace

double robustness(const Formula& f, const Episode& ep, std::size_t t) {
  check_predicates(f, ep);
  check_time(t, horizon(f), ep);
  return eval(f, ep, t);
}

std::vector<double> robustness_trace(const Formula& f, const Episode& ep) {
  check_predicates(f, ep);
  if (ep.length() <= horizon(f)) return {};
  return trace(f, ep);
}

BasisVector predicate_history_basis(const Episode& ep, std::size_t k_max, std::size_t t) {
  check_time(t, k_max, ep);
  const HistoryLayout layout{ep.predicate_count(), k_max};
  BasisVector out{BasisKind::PredicateHistory, t, std::vector<double>(layout.dim())};
  for (std::size_t k = 0; k < layout.m; ++k) {
    for (std::size_t j = 0; j <= k_max; ++j) out.values[layout.index(k, j)] = ep.mu[k][t - j];
  }
  return out;
}

BasisTrack predicate_history_track(const Episode& ep, std::size_t k_max) {
  const HistoryLayout layout{ep.predicate_count(), k_max};
  BasisTrack track{BasisKind::PredicateHistory, k_max, layout.dim(), {}};
  if (ep.length() <= k_max) return track;
  track.values.reserve((ep.length() - k_max) * layout.dim());
  for (std::size_t t = k_max; t < ep.length(); ++t) {
    for (std::size_t k = 0; k < layout.m; ++k) {
      for (std::size_t j = 0; j <= k_max; ++j) track.values.push_back(ep.mu[k][t - j]);
    }
  }
  return track;
}

BasisVector semantic_basis(const Episode& ep, const AtomicDictionary& dict, std::size_t t) {
  check_time(t, dict.k_max(), ep);
  BasisVector out{BasisKind::Semantic, t, {}};
  out.values.reserve(dict.size());
  for (const auto& atom : dict.atoms()) out.values.push_back(robustness(atom, ep, t));
  return out;
}

BasisTrack semantic_basis_track(const Episode& ep, const AtomicDictionary& dict) {
  const std::size_t k_max = dict.k_max();
  const std::size_t r = dict.size();
  BasisTrack track{BasisKind::Semantic, k_max, r, {}};
  if (ep.length() <= k_max) return track;
  const std::size_t rows = ep.length() - k_max;
  track.values.resize(rows * r);
  for (std::size_t q = 0; q < r; ++q) {
    const auto& atom = dict.atom(q);
    const auto series = robustness_trace(atom, ep);
    const std::size_t offset = k_max - horizon(atom);
    for (std::size_t i = 0; i < rows; ++i) track.values[i * r + q] = series[i + offset];
  }
  return track;
}

}  // namespace certmon
