#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "certmon/crossroad.hpp"
#include "certmon/formula.hpp"
#include "certmon/robustness.hpp"

namespace certmon {

struct SplitCounts {
  std::size_t train = 0;
  std::size_t calib = 0;
  std::size_t test = 0;
};

/// Contents of manifest.json.
///
/// Layout of a dataset directory:
///   manifest.json                 this struct
///   train/NNNNNN.jsonl            one episode per file, one line per step:
///   calib/NNNNNN.jsonl              {"t": int, "state": [..], "mu": [m numbers]}
///   test/NNNNNN.jsonl
/// Episode i of a split has id (and simulator seed) split_seed + i.
struct Manifest {
  static constexpr int kVersion = 1;
  int version = kVersion;
  std::vector<std::string> predicate_names;
  std::vector<std::string> predicate_definitions;
  double dt = 0.1;
  std::size_t k_max = 0;
  std::vector<TimeInterval> intervals;
  SplitCounts counts;
  CrossroadConfig config;
  std::uint64_t seed = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t calib_seed = 0;
  std::uint64_t test_seed = 0;

  std::size_t count(const std::string& split) const;
  std::uint64_t split_seed(const std::string& split) const;
};

/// Default depth-1 window set {[0,1],[0,2],[0,4],[0,8],[0,16]}.
std::vector<TimeInterval> default_intervals();

/// Simulates and writes a dataset; deterministic in (cfg, counts, seed).
Manifest generate_dataset(const CrossroadConfig& cfg, const SplitCounts& counts, std::uint64_t seed,
                          const std::filesystem::path& dir,
                          const std::vector<TimeInterval>& intervals = default_intervals());

Manifest load_manifest(const std::filesystem::path& dir);
/// Loads every episode of `split` ("train", "calib" or "test").
std::vector<Episode> load_split(const std::filesystem::path& dir, const std::string& split);

void write_episode(const Episode& ep, const std::filesystem::path& file);
Episode read_episode(const std::filesystem::path& file, std::uint64_t id, double dt);

/// Process-wide counters of dataset file reads.
struct IoStats {
  std::size_t manifests_read = 0;
  std::size_t episodes_read = 0;
};
IoStats io_stats();

}  // namespace certmon
