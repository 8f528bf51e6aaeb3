#include "certmon/predictor.hpp"

#include <atomic>
#include <cmath>
#include <random>

#include "certmon/error.hpp"
#include "certmon/keyvalue.hpp"

namespace certmon {
namespace {

std::atomic<std::size_t> g_invocations{0};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void NoiseModel::validate() const {
  if (scale.empty() || bias.empty()) throw ValidationError("noise scale and bias must be given");
  for (double s : scale) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("noise scale must be >= 0");
  }
  for (double b : bias) {
    if (!std::isfinite(b)) throw ValidationError("noise bias must be finite");
  }
  if (!(ar >= 0.0 && ar < 1.0)) throw ValidationError("AR coefficient must lie in [0, 1)");
}

double NoiseModel::scale_at(std::size_t coord) const {
  return scale.size() == 1 ? scale.front() : scale.at(coord);
}

double NoiseModel::bias_at(std::size_t coord) const {
  return bias.size() == 1 ? bias.front() : bias.at(coord);
}

const char* to_string(StubMode mode) {
  return mode == StubMode::NoisyBasis ? "basis" : "predicates";
}

StubMode parse_stub_mode(const std::string& text) {
  if (text == "basis") return StubMode::NoisyBasis;
  if (text == "predicates") return StubMode::NoisyPredicates;
  throw ValidationError("unknown predictor mode '" + text + "' (expected basis|predicates)");
}

PredictorStub::PredictorStub(StubMode mode, NoiseModel noise, std::uint64_t seed)
    : mode_(mode), noise_(std::move(noise)), seed_(seed) {
  noise_.validate();
}

std::vector<double> PredictorStub::draw(std::uint64_t stream, std::size_t rows,
                                        std::size_t cols) const {
  if (noise_.scale.size() != 1 && noise_.scale.size() != cols) {
    throw DimensionMismatch("noise scale has " + std::to_string(noise_.scale.size()) +
                            " entries for " + std::to_string(cols) + " coordinates");
  }
  if (noise_.bias.size() != 1 && noise_.bias.size() != cols) {
    throw DimensionMismatch("noise bias has " + std::to_string(noise_.bias.size()) +
                            " entries for " + std::to_string(cols) + " coordinates");
  }
  std::mt19937_64 rng(splitmix64(seed_ ^ splitmix64(stream)));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double innovation = std::sqrt(1.0 - noise_.ar * noise_.ar);
  std::vector<double> z(rows * cols);
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double fresh = normal(rng);
      z[t * cols + c] = t == 0 ? fresh : noise_.ar * z[(t - 1) * cols + c] + innovation * fresh;
    }
  }
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t c = 0; c < cols; ++c) {
      z[t * cols + c] = noise_.bias_at(c) + noise_.scale_at(c) * z[t * cols + c];
    }
  }
  return z;
}

std::vector<std::vector<double>> PredictorStub::predict_predicates(const Episode& ep) const {
  if (mode_ != StubMode::NoisyPredicates) {
    throw ValidationError("predictor stub in basis mode cannot predict per-step predicates");
  }
  ++g_invocations;
  const std::size_t m = ep.predicate_count(), n = ep.length();
  const auto noise = draw(ep.id, n, m);
  auto out = ep.mu;
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < m; ++k) out[k][t] += noise[t * m + k];
  }
  return out;
}

BasisTrack PredictorStub::predict_semantic(const Episode& ep, const AtomicDictionary& dict) const {
  if (mode_ != StubMode::NoisyBasis) {
    throw ValidationError("predictor stub in predicates mode cannot predict the semantic basis");
  }
  ++g_invocations;
  BasisTrack track = semantic_basis_track(ep, dict);
  const auto noise = draw(ep.id, track.rows(), track.dim);
  for (std::size_t i = 0; i < track.values.size(); ++i) track.values[i] += noise[i];
  return track;
}

std::size_t PredictorStub::invocation_count() { return g_invocations.load(); }

PredictorStub parse_predictor_config(const std::string& text, StubMode default_mode) {
  const auto cfg = KeyValueConfig::parse(text);
  NoiseModel noise;
  noise.scale = cfg.get_doubles("scale", noise.scale);
  noise.bias = cfg.get_doubles("bias", noise.bias);
  noise.ar = cfg.get_double("ar", noise.ar);
  const StubMode mode =
      cfg.has("mode") ? parse_stub_mode(cfg.get_string("mode", "")) : default_mode;
  const std::uint64_t seed = cfg.get_uint("seed", 0);
  if (auto extra = cfg.unused_keys(); !extra.empty()) {
    throw ValidationError("unknown noise config key '" + extra.front() + "'");
  }
  return PredictorStub(mode, std::move(noise), seed);
}

}  // namespace certmon
