#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "certmon/conformal.hpp"
#include "certmon/formula.hpp"
#include "certmon/predictor.hpp"
#include "certmon/robustness.hpp"

namespace certmon {

/// Ring of the last k_max+1 per-step predicate predictions.
class RollingBuffer {
 public:
  RollingBuffer(std::size_t m, std::size_t k_max);

  std::size_t predicate_count() const { return m_; }
  std::size_t capacity() const { return capacity_; }
  /// Consecutive predictions held, at most capacity().
  std::size_t fill() const { return fill_; }
  /// Time of the latest step, or nullopt before the first step.
  std::optional<std::size_t> time() const;

  /// Appends one prediction, evicting the oldest once full. Throws DimensionMismatch.
  void push(std::span<const double> mu_hat);
  /// Records a missing prediction: time advances and the window must refill.
  void drop();

  /// Prediction at `lag` steps back; requires lag < fill().
  std::span<const double> at_lag(std::size_t lag) const;

  /// Predicate-history vector for the current time. Lags not yet filled are NaN.
  BasisVector window() const;

 private:
  std::size_t m_;
  std::size_t capacity_;
  std::vector<double> ring_;  // capacity_ x m_
  std::size_t head_ = 0;      // slot of the latest prediction
  std::size_t fill_ = 0;
  std::size_t steps_ = 0;
};

/// Appends mu_hat to the buffer; returns it for chaining.
RollingBuffer& rolling_step(RollingBuffer& buf, std::span<const double> mu_hat);

enum class Label { Safe, Uncertain, WarmingUp };

const char* to_string(Label label);

struct MonitorVerdict {
  std::size_t t = 0;
  std::size_t formula = 0;
  /// NaN while warming up.
  double lower_bound = 0.0;
  Label label = Label::WarmingUp;
};

/// A formula prepared against one monitor: decoder and radius resolved once.
struct CompiledQuery {
  Formula formula;
  std::string text;
  Decoder decoder;
  double radius = 0.0;
  std::size_t horizon = 0;
};

/// Throws NotInFragment, HorizonExceeded or ValidationError when the monitor
/// cannot certify f.
CompiledQuery prepare_query(const CalibratedMonitor& mon, const Formula& f);

/// Lower bound for a rolling or observer monitor from the buffered predictions.
MonitorVerdict rolling_certify(const RollingBuffer& buf, const CalibratedMonitor& mon,
                               const CompiledQuery& query, std::size_t formula_id = 0);
MonitorVerdict rolling_certify(const RollingBuffer& buf, const CalibratedMonitor& mon,
                               const Formula& f);

MonitorVerdict semantic_certify(const BasisVector& basis_hat, const CalibratedMonitor& mon,
                                const CompiledQuery& query, std::size_t formula_id = 0);
MonitorVerdict semantic_certify(const BasisVector& basis_hat, const CalibratedMonitor& mon,
                                const Formula& f);

struct FormulaRun {
  std::string formula;
  /// Set when the monitor cannot certify this formula; verdicts are then empty.
  std::optional<std::string> error;
  double radius = 0.0;
  std::vector<MonitorVerdict> verdicts;  // one per time step
  std::vector<double> truth;             // NaN before the formula horizon
};

struct EpisodeRun {
  std::uint64_t episode = 0;
  std::size_t length = 0;
  std::vector<FormulaRun> formulas;
};

/// Streams an episode through the monitor once, certifying every formula at
/// every step. Per-formula failures are recorded and the run continues.
EpisodeRun run_episode(const Episode& ep, const Predictor& predictor, const CalibratedMonitor& mon,
                       const std::vector<Formula>& formulas);

}  // namespace certmon
