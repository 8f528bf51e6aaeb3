#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "certmon/dictionary.hpp"
#include "certmon/formula.hpp"

namespace certmon {

/// A finite trajectory x_0..x_T with the robustness h_k(x_t) of every predicate.
struct Episode {
  /// Stream key; predictors derive their noise from it.
  std::uint64_t id = 0;
  double dt = 0.1;
  /// Optional raw states, one row per step.
  std::vector<std::vector<double>> states;
  /// mu[k][t] = h_k(x_t).
  std::vector<std::vector<double>> mu;

  std::size_t predicate_count() const { return mu.size(); }
  std::size_t length() const { return mu.empty() ? 0 : mu.front().size(); }
  /// Last time index T.
  std::size_t last_time() const { return length() - 1; }

  /// Throws ValidationError on ragged, empty, or non-finite data.
  void validate() const;
};

enum class BasisKind { PredicateHistory, Semantic };

const char* to_string(BasisKind kind);

/// Shape of the predicate-history basis: coordinate (k, j) sits at k*(k_max+1)+j.
struct HistoryLayout {
  std::size_t m = 0;
  std::size_t k_max = 0;

  std::size_t dim() const { return m * (k_max + 1); }
  std::size_t index(std::size_t k, std::size_t j) const { return k * (k_max + 1) + j; }
  std::size_t index(const PredicateLag& c) const { return index(c.predicate, c.lag); }
};

struct BasisVector {
  BasisKind kind = BasisKind::Semantic;
  std::size_t t = 0;
  std::vector<double> values;
};

/// Basis vectors for the consecutive times first_time .. first_time+rows-1.
struct BasisTrack {
  BasisKind kind = BasisKind::Semantic;
  std::size_t first_time = 0;
  std::size_t dim = 0;
  std::vector<double> values;  // row-major, one row per time

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  std::size_t last_time() const { return first_time + rows() - 1; }
  std::span<const double> at(std::size_t t) const;
  BasisVector vector_at(std::size_t t) const;
};

enum class Extremum { Min, Max };

/// out[i] is the extremum of series over [t-b, t-a] for t = b + i, i.e. only
/// for times whose whole window lies inside the series. Uses a monotone deque,
/// amortized O(1) per step; returns exactly the value a naive scan would.
std::vector<double> windowed_extrema(std::span<const double> series, TimeInterval interval,
                                     Extremum mode);

/// Robustness of f at time t, by direct recursion.
/// Throws TimeOutOfRange unless horizon(f) <= t <= T.
double robustness(const Formula& f, const Episode& ep, std::size_t t);

/// Robustness of f at every valid time; element i belongs to t = horizon(f) + i.
std::vector<double> robustness_trace(const Formula& f, const Episode& ep);

BasisVector predicate_history_basis(const Episode& ep, std::size_t k_max, std::size_t t);
BasisTrack predicate_history_track(const Episode& ep, std::size_t k_max);

BasisVector semantic_basis(const Episode& ep, const AtomicDictionary& dict, std::size_t t);
/// All valid times k_max..T, one deque pass per atom.
BasisTrack semantic_basis_track(const Episode& ep, const AtomicDictionary& dict);

}  // namespace certmon
