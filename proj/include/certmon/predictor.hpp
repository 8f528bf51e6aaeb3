#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "certmon/dictionary.hpp"
#include "certmon/robustness.hpp"

namespace certmon {

/// Source of basis estimates; stands in for a learned perception model.
class Predictor {
 public:
  virtual ~Predictor() = default;

  /// Per-step predicate estimates, same [k][t] layout as Episode::mu.
  virtual std::vector<std::vector<double>> predict_predicates(const Episode& ep) const = 0;

  /// Semantic basis estimates for t = k_max .. T.
  virtual BasisTrack predict_semantic(const Episode& ep, const AtomicDictionary& dict) const = 0;
};

/// Additive noise applied to ground truth: bias + scale * z_t with
/// z_t = ar * z_{t-1} + sqrt(1 - ar^2) * N(0, 1), independently per coordinate.
struct NoiseModel {
  /// One entry, broadcast to every coordinate, or one per coordinate.
  std::vector<double> scale{0.2};
  std::vector<double> bias{0.0};
  double ar = 0.0;

  void validate() const;
  double scale_at(std::size_t coord) const;
  double bias_at(std::size_t coord) const;
};

enum class StubMode { NoisyBasis, NoisyPredicates };

const char* to_string(StubMode mode);
StubMode parse_stub_mode(const std::string& text);

/// Noisy oracle over the ground-truth basis. Deterministic in (seed, episode id).
class PredictorStub final : public Predictor {
 public:
  PredictorStub(StubMode mode, NoiseModel noise, std::uint64_t seed);

  StubMode mode() const { return mode_; }
  const NoiseModel& noise() const { return noise_; }
  std::uint64_t seed() const { return seed_; }

  /// Throws ValidationError unless mode() is NoisyPredicates.
  std::vector<std::vector<double>> predict_predicates(const Episode& ep) const override;
  /// Throws ValidationError unless mode() is NoisyBasis.
  BasisTrack predict_semantic(const Episode& ep, const AtomicDictionary& dict) const override;

  /// Number of prediction calls served by any stub in this process.
  static std::size_t invocation_count();

 private:
  // rows x cols noise matrix, rows indexed by time; AR(1) along time per column.
  std::vector<double> draw(std::uint64_t stream, std::size_t rows, std::size_t cols) const;

  StubMode mode_;
  NoiseModel noise_;
  std::uint64_t seed_;
};

/// Parses "key = value" text with keys mode, scale, bias, ar, seed.
/// Missing mode falls back to `default_mode`.
PredictorStub parse_predictor_config(const std::string& text, StubMode default_mode);

}  // namespace certmon
