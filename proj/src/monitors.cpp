#include "certmon/monitors.hpp"

#include <cmath>
#include <limits>

#include "certmon/error.hpp"

namespace certmon {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

RollingBuffer::RollingBuffer(std::size_t m, std::size_t k_max)
    : m_(m), capacity_(k_max + 1), ring_(capacity_ * m, kNaN) {
  if (m == 0) throw ValidationError("rolling buffer needs at least one predicate");
}

std::optional<std::size_t> RollingBuffer::time() const {
  if (steps_ == 0) return std::nullopt;
  return steps_ - 1;
}

void RollingBuffer::push(std::span<const double> mu_hat) {
  if (mu_hat.size() != m_) {
    throw DimensionMismatch("rolling buffer expects " + std::to_string(m_) +
                            " predicate values, got " + std::to_string(mu_hat.size()));
  }
  head_ = steps_ == 0 ? 0 : (head_ + 1) % capacity_;
  std::copy(mu_hat.begin(), mu_hat.end(), ring_.begin() + static_cast<std::ptrdiff_t>(head_ * m_));
  fill_ = std::min(fill_ + 1, capacity_);
  ++steps_;
}

void RollingBuffer::drop() {
  head_ = steps_ == 0 ? 0 : (head_ + 1) % capacity_;
  std::fill_n(ring_.begin() + static_cast<std::ptrdiff_t>(head_ * m_), m_, kNaN);
  fill_ = 0;
  ++steps_;
}

std::span<const double> RollingBuffer::at_lag(std::size_t lag) const {
  if (lag >= fill_) throw ValidationError("lag beyond the filled part of the rolling buffer");
  const std::size_t slot = (head_ + capacity_ - lag) % capacity_;
  return std::span<const double>(ring_).subspan(slot * m_, m_);
}

BasisVector RollingBuffer::window() const {
  const HistoryLayout layout{m_, capacity_ - 1};
  BasisVector out{BasisKind::PredicateHistory, steps_ == 0 ? 0 : steps_ - 1,
                  std::vector<double>(layout.dim(), kNaN)};
  for (std::size_t j = 0; j < fill_; ++j) {
    const auto row = at_lag(j);
    for (std::size_t k = 0; k < m_; ++k) out.values[layout.index(k, j)] = row[k];
  }
  return out;
}

RollingBuffer& rolling_step(RollingBuffer& buf, std::span<const double> mu_hat) {
  buf.push(mu_hat);
  return buf;
}

const char* to_string(Label label) {
  switch (label) {
    case Label::Safe: return "Safe";
    case Label::Uncertain: return "Uncertain";
    case Label::WarmingUp: return "WarmingUp";
  }
  return "?";
}

CompiledQuery prepare_query(const CalibratedMonitor& mon, const Formula& f) {
  Decoder decoder = mon.compile(f);
  const double radius = mon.radius_for(f);
  return CompiledQuery{f, to_string(f), std::move(decoder), radius, horizon(f)};
}

namespace {

MonitorVerdict warming(std::size_t t, std::size_t id) {
  return MonitorVerdict{t, id, kNaN, Label::WarmingUp};
}

MonitorVerdict finish(std::size_t t, std::size_t id, double lb) {
  return MonitorVerdict{t, id, lb, lb >= 0.0 ? Label::Safe : Label::Uncertain};
}

}  // namespace

MonitorVerdict rolling_certify(const RollingBuffer& buf, const CalibratedMonitor& mon,
                               const CompiledQuery& query, std::size_t formula_id) {
  if (mon.kind == MonitorKind::Semantic) {
    throw ValidationError("rolling_certify needs a rolling or observer monitor");
  }
  if (buf.predicate_count() != mon.predicate_names.size() || buf.capacity() != mon.k_max + 1) {
    throw DimensionMismatch("rolling buffer shape does not match the monitor");
  }
  const auto now = buf.time();
  if (!now) throw ValidationError("rolling buffer is empty");
  if (*now < mon.k_max || buf.fill() < query.horizon + 1) return warming(*now, formula_id);

  const BasisVector window = buf.window();
  if (mon.kind == MonitorKind::Rolling) {
    return finish(*now, formula_id,
                  certified_lower_bound(query.radius, mon.sigma, window.values, query.decoder));
  }
  // Observer: symmetric intervals on the coordinates the formula reads; the
  // rest of the window is never evaluated.
  std::vector<double> lower(window.values.size(), 0.0), upper(window.values.size(), 0.0);
  for (std::size_t l : query.decoder.support()) {
    lower[l] = window.values[l] - query.radius * mon.sigma[l];
    upper[l] = window.values[l] + query.radius * mon.sigma[l];
  }
  return finish(*now, formula_id, interval_propagate(query.decoder, lower, upper).first);
}

MonitorVerdict rolling_certify(const RollingBuffer& buf, const CalibratedMonitor& mon,
                               const Formula& f) {
  return rolling_certify(buf, mon, prepare_query(mon, f));
}

MonitorVerdict semantic_certify(const BasisVector& basis_hat, const CalibratedMonitor& mon,
                                const CompiledQuery& query, std::size_t formula_id) {
  if (mon.kind != MonitorKind::Semantic) {
    throw ValidationError("semantic_certify needs a semantic monitor");
  }
  if (basis_hat.kind != BasisKind::Semantic) {
    throw DimensionMismatch("semantic monitor needs a semantic basis estimate");
  }
  if (basis_hat.t < mon.k_max) return warming(basis_hat.t, formula_id);
  return finish(basis_hat.t, formula_id,
                certified_lower_bound(query.radius, mon.sigma, basis_hat.values, query.decoder));
}

MonitorVerdict semantic_certify(const BasisVector& basis_hat, const CalibratedMonitor& mon,
                                const Formula& f) {
  return semantic_certify(basis_hat, mon, prepare_query(mon, f));
}

EpisodeRun run_episode(const Episode& ep, const Predictor& predictor, const CalibratedMonitor& mon,
                       const std::vector<Formula>& formulas) {
  EpisodeRun run;
  run.episode = ep.id;
  run.length = ep.length();

  std::vector<std::optional<CompiledQuery>> queries;
  for (const auto& f : formulas) {
    FormulaRun fr;
    fr.formula = to_string(f);
    try {
      queries.push_back(prepare_query(mon, f));
      fr.radius = queries.back()->radius;
      fr.truth.assign(ep.length(), kNaN);
      const auto trace = robustness_trace(f, ep);
      for (std::size_t i = 0; i < trace.size(); ++i) fr.truth[horizon(f) + i] = trace[i];
    } catch (const ValidationError& e) {
      queries.emplace_back();
      fr.error = e.what();
    }
    run.formulas.push_back(std::move(fr));
  }

  auto emit = [&](auto&& certify_one) {
    for (std::size_t i = 0; i < queries.size(); ++i) {
      if (queries[i]) run.formulas[i].verdicts.push_back(certify_one(*queries[i], i));
    }
  };

  if (mon.kind == MonitorKind::Semantic) {
    const BasisTrack predicted = predictor.predict_semantic(ep, *mon.dictionary);
    for (std::size_t t = 0; t < ep.length(); ++t) {
      if (t < mon.k_max) {
        emit([&](const CompiledQuery&, std::size_t id) { return warming(t, id); });
        continue;
      }
      const BasisVector basis = predicted.vector_at(t);
      emit([&](const CompiledQuery& q, std::size_t id) {
        return semantic_certify(basis, mon, q, id);
      });
    }
    return run;
  }

  const auto mu_hat = predictor.predict_predicates(ep);
  RollingBuffer buf(mon.predicate_names.size(), mon.k_max);
  std::vector<double> step(buf.predicate_count());
  for (std::size_t t = 0; t < ep.length(); ++t) {
    for (std::size_t k = 0; k < step.size(); ++k) step[k] = mu_hat.at(k).at(t);
    rolling_step(buf, step);
    emit([&](const CompiledQuery& q, std::size_t id) { return rolling_certify(buf, mon, q, id); });
  }
  return run;
}

}  // namespace certmon
