#include "certmon/dataset.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "certmon/error.hpp"

namespace certmon {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<std::size_t> g_manifests_read{0};
std::atomic<std::size_t> g_episodes_read{0};

const char* const kSplits[] = {"train", "calib", "test"};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  // Keep split seeds far apart so split_seed + i never collides across splits.
  return (x ^ (x >> 31)) & 0x0000ffffffffffffULL;
}

std::string episode_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.jsonl", i);
  return buf;
}

void check_split(const std::string& split) {
  if (split != "train" && split != "calib" && split != "test") {
    throw ValidationError("unknown split '" + split + "' (expected train|calib|test)");
  }
}

}  // namespace

std::size_t Manifest::count(const std::string& split) const {
  check_split(split);
  return split == "train" ? counts.train : split == "calib" ? counts.calib : counts.test;
}

std::uint64_t Manifest::split_seed(const std::string& split) const {
  check_split(split);
  return split == "train" ? train_seed : split == "calib" ? calib_seed : test_seed;
}

std::vector<TimeInterval> default_intervals() {
  return {{0, 1}, {0, 2}, {0, 4}, {0, 8}, {0, 16}};
}

void write_episode(const Episode& ep, const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write episode file '" + file.string() + "'");
  for (std::size_t t = 0; t < ep.length(); ++t) {
    json line;
    line["t"] = t;
    line["state"] = ep.states.empty() ? json::array() : json(ep.states[t]);
    json mu = json::array();
    for (const auto& row : ep.mu) mu.push_back(row[t]);
    line["mu"] = std::move(mu);
    out << line.dump() << '\n';
  }
  if (!out) throw IoError("failed writing episode file '" + file.string() + "'");
}

Episode read_episode(const fs::path& file, std::uint64_t id, double dt) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open episode file '" + file.string() + "'");
  ++g_episodes_read;
  Episode ep;
  ep.id = id;
  ep.dt = dt;
  std::string text;
  std::size_t expected_t = 0;
  bool has_states = false;
  while (std::getline(in, text)) {
    if (text.empty()) continue;
    json line;
    try {
      line = json::parse(text);
      if (line.at("t").get<std::size_t>() != expected_t) {
        throw ValidationError("episode file '" + file.string() + "' has non-consecutive t");
      }
      const auto mu = line.at("mu").get<std::vector<double>>();
      if (expected_t == 0) ep.mu.assign(mu.size(), {});
      if (mu.size() != ep.mu.size()) {
        throw ValidationError("episode file '" + file.string() + "' has ragged mu");
      }
      for (std::size_t k = 0; k < mu.size(); ++k) ep.mu[k].push_back(mu[k]);
      auto state = line.value("state", std::vector<double>{});
      if (expected_t == 0) has_states = !state.empty();
      if (has_states) ep.states.push_back(std::move(state));
    } catch (const json::exception& e) {
      throw ValidationError("malformed episode file '" + file.string() + "': " + e.what());
    }
    ++expected_t;
  }
  ep.validate();
  return ep;
}

Manifest generate_dataset(const CrossroadConfig& cfg, const SplitCounts& counts, std::uint64_t seed,
                          const fs::path& dir, const std::vector<TimeInterval>& intervals) {
  cfg.validate();
  if (counts.train == 0 || counts.calib == 0 || counts.test == 0) {
    throw ValidationError("every split needs at least one episode");
  }
  if (intervals.empty()) throw ValidationError("interval list must not be empty");
  Manifest man;
  man.predicate_names = CrossroadPredicates::names();
  man.predicate_definitions = CrossroadPredicates::definitions();
  man.dt = cfg.dt;
  man.intervals = intervals;
  for (const auto& iv : intervals) man.k_max = std::max(man.k_max, iv.b);
  if (cfg.T < man.k_max) {
    throw ValidationError("episode length T=" + std::to_string(cfg.T) +
                          " is shorter than k_max=" + std::to_string(man.k_max));
  }
  man.counts = counts;
  man.config = cfg;
  man.seed = seed;
  man.train_seed = derive_seed(seed, 1);
  man.calib_seed = derive_seed(seed, 2);
  man.test_seed = derive_seed(seed, 3);

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create dataset directory '" + dir.string() + "'");
  for (const char* split : kSplits) {
    const fs::path sub = dir / split;
    fs::create_directories(sub, ec);
    if (ec) throw IoError("cannot create '" + sub.string() + "'");
    for (std::size_t i = 0; i < man.count(split); ++i) {
      write_episode(simulate_episode(cfg, man.split_seed(split) + i), sub / episode_name(i));
    }
  }

  json j;
  j["version"] = man.version;
  j["m"] = man.predicate_names.size();
  j["predicate_names"] = man.predicate_names;
  j["predicate_definitions"] = man.predicate_definitions;
  j["dt"] = man.dt;
  j["K_max"] = man.k_max;
  json ivs = json::array();
  for (const auto& iv : man.intervals) ivs.push_back({iv.a, iv.b});
  j["intervals"] = ivs;
  j["counts"] = {{"train", counts.train}, {"calib", counts.calib}, {"test", counts.test}};
  j["config"] = cfg.to_text();
  j["seed"] = seed;
  j["split_seeds"] = {{"train", man.train_seed}, {"calib", man.calib_seed}, {"test", man.test_seed}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in '" + dir.string() + "'");
  out << j.dump(2) << '\n';
  return man;
}

Manifest load_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("cannot open '" + (dir / "manifest.json").string() + "'");
  ++g_manifests_read;
  Manifest man;
  try {
    const json j = json::parse(in);
    man.version = j.at("version").get<int>();
    if (man.version != Manifest::kVersion) {
      throw ValidationError("unsupported manifest version " + std::to_string(man.version));
    }
    man.predicate_names = j.at("predicate_names").get<std::vector<std::string>>();
    man.predicate_definitions =
        j.value("predicate_definitions", std::vector<std::string>{});
    if (j.at("m").get<std::size_t>() != man.predicate_names.size()) {
      throw ValidationError("manifest m does not match predicate_names");
    }
    man.dt = j.at("dt").get<double>();
    man.k_max = j.at("K_max").get<std::size_t>();
    for (const auto& iv : j.at("intervals")) {
      man.intervals.emplace_back(iv.at(0).get<std::size_t>(), iv.at(1).get<std::size_t>());
    }
    man.counts.train = j.at("counts").at("train").get<std::size_t>();
    man.counts.calib = j.at("counts").at("calib").get<std::size_t>();
    man.counts.test = j.at("counts").at("test").get<std::size_t>();
    man.config = CrossroadConfig::from_text(j.at("config").get<std::string>());
    man.seed = j.at("seed").get<std::uint64_t>();
    man.train_seed = j.at("split_seeds").at("train").get<std::uint64_t>();
    man.calib_seed = j.at("split_seeds").at("calib").get<std::uint64_t>();
    man.test_seed = j.at("split_seeds").at("test").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  return man;
}

std::vector<Episode> load_split(const fs::path& dir, const std::string& split) {
  const Manifest man = load_manifest(dir);
  std::vector<Episode> out;
  out.reserve(man.count(split));
  for (std::size_t i = 0; i < man.count(split); ++i) {
    out.push_back(read_episode(dir / split / episode_name(i), man.split_seed(split) + i, man.dt));
    if (out.back().predicate_count() != man.predicate_names.size()) {
      throw ValidationError("episode predicate count does not match the manifest");
    }
  }
  return out;
}

IoStats io_stats() { return IoStats{g_manifests_read.load(), g_episodes_read.load()}; }

}  // namespace certmon
