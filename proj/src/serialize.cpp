#include "certmon/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "certmon/error.hpp"
#include "certmon/keyvalue.hpp"

namespace certmon {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kModelVersion = 1;
constexpr const char* kCacheMagic = "# certmon-score-cache version=";

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

fs::path score_cache_path(const fs::path& model_path) {
  fs::path p = model_path;
  p.replace_extension(".scores.csv");
  return p;
}

void save_score_cache(const ScoreCache& cache, MonitorKind kind, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write score cache '" + path.string() + "'");
  out << kCacheMagic << ScoreCache::kVersion << '\n';
  out << "# kind=" << to_string(kind) << " symmetric=" << (cache.symmetric ? 1 : 0)
      << " rows=" << cache.rows() << " dim=" << cache.dim << '\n';
  out << "tau";
  for (std::size_t l = 0; l < cache.dim; ++l) out << ",c" << l;
  out << '\n';
  for (std::size_t i = 0; i < cache.rows(); ++i) {
    if (cache.sampled_times.empty()) {
      out << -1;
    } else {
      out << cache.sampled_times[i];
    }
    for (double e : cache.row(i)) out << ',' << fmt17(e);
    out << '\n';
  }
  if (!out) throw IoError("failed writing score cache '" + path.string() + "'");
}

ScoreCache load_score_cache(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open score cache '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind(kCacheMagic, 0) != 0) {
    throw ValidationError("'" + path.string() + "' is not a score cache");
  }
  if (std::stoi(line.substr(std::string(kCacheMagic).size())) != ScoreCache::kVersion) {
    throw ValidationError("unsupported score cache version in '" + path.string() + "'");
  }
  ScoreCache cache;
  std::size_t rows = 0;
  std::getline(in, line);
  {
    std::stringstream ss(line.substr(1));
    std::string field;
    while (ss >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
      if (key == "symmetric") cache.symmetric = value == "1";
      if (key == "rows") rows = parse_uint(value);
      if (key == "dim") cache.dim = parse_uint(value);
    }
  }
  std::getline(in, line);  // column header
  if (split_commas(line).size() != cache.dim + 1) {
    throw ValidationError("score cache header does not match dim");
  }
  cache.errors.reserve(rows * cache.dim);
  bool level1 = false;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw ValidationError("score cache is truncated");
    const auto cells = split_commas(line);
    if (cells.size() != cache.dim + 1) throw ValidationError("ragged score cache row");
    if (cells[0] == "-1") {
      level1 = true;
    } else {
      if (level1) throw ValidationError("score cache mixes Level-1 and Level-2 rows");
      cache.sampled_times.push_back(parse_uint(cells[0]));
    }
    for (std::size_t l = 0; l < cache.dim; ++l) cache.errors.push_back(parse_double(cells[l + 1]));
  }
  if (level1 && !cache.sampled_times.empty()) {
    throw ValidationError("score cache mixes Level-1 and Level-2 rows");
  }
  return cache;
}

void save_model(const StoredModel& model, const fs::path& path) {
  const CalibratedMonitor& mon = model.monitor;
  const fs::path cache_path = score_cache_path(path);
  json j;
  j["version"] = kModelVersion;
  j["kind"] = to_string(mon.kind);
  j["level"] = level_number(mon.level);
  j["alpha"] = mon.alpha;
  j["scope"] = to_string(mon.scope);
  j["support"] = mon.support;
  j["formula"] = mon.formula;
  j["radius"] = mon.radius;
  j["sigma"] = mon.sigma;
  j["predicate_names"] = mon.predicate_names;
  j["m"] = mon.predicate_names.size();
  j["kmax"] = mon.k_max;
  if (mon.dictionary) {
    json atoms = json::array();
    for (const auto& a : mon.dictionary->atoms()) atoms.push_back(to_string(a));
    j["dictionary"] = atoms;
  }
  j["n"] = mon.n_calibration;
  j["seed"] = mon.seed;
  if (model.predictor) {
    const auto& p = *model.predictor;
    j["predictor"] = {{"mode", to_string(p.mode())},
                      {"scale", p.noise().scale},
                      {"bias", p.noise().bias},
                      {"ar", p.noise().ar},
                      {"seed", p.seed()}};
  }
  j["score_cache_path"] = cache_path.filename().string();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing model '" + path.string() + "'");
  save_score_cache(mon.cache, mon.kind, cache_path);
}

StoredModel load_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  StoredModel model;
  CalibratedMonitor& mon = model.monitor;
  fs::path cache_path;
  try {
    const json j = json::parse(in);
    if (j.at("version").get<int>() != kModelVersion) {
      throw ValidationError("unsupported model version");
    }
    mon.kind = parse_monitor_kind(j.at("kind").get<std::string>());
    mon.level = parse_level(j.at("level").get<int>());
    mon.alpha = j.at("alpha").get<double>();
    mon.scope = parse_scope(j.at("scope").get<std::string>());
    mon.support = j.at("support").get<std::set<std::size_t>>();
    mon.formula = j.value("formula", std::string{});
    mon.radius = j.at("radius").get<double>();
    mon.sigma = j.at("sigma").get<std::vector<double>>();
    mon.predicate_names = j.at("predicate_names").get<std::vector<std::string>>();
    if (j.at("m").get<std::size_t>() != mon.predicate_names.size()) {
      throw ValidationError("model m does not match predicate_names");
    }
    mon.k_max = j.at("kmax").get<std::size_t>();
    if (j.contains("dictionary")) {
      std::vector<Formula> atoms;
      for (const auto& text : j.at("dictionary")) {
        atoms.push_back(parse_formula(text.get<std::string>(), mon.predicate_names));
      }
      mon.dictionary.emplace(std::move(atoms), mon.predicate_names);
    } else if (mon.kind == MonitorKind::Semantic) {
      throw ValidationError("semantic model without a dictionary");
    }
    mon.n_calibration = j.at("n").get<std::size_t>();
    mon.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("predictor")) {
      const json& p = j.at("predictor");
      NoiseModel noise;
      noise.scale = p.at("scale").get<std::vector<double>>();
      noise.bias = p.at("bias").get<std::vector<double>>();
      noise.ar = p.at("ar").get<double>();
      model.predictor.emplace(parse_stub_mode(p.at("mode").get<std::string>()), std::move(noise),
                              p.at("seed").get<std::uint64_t>());
    }
    cache_path = path.parent_path() / j.at("score_cache_path").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError("malformed model '" + path.string() + "': " + e.what());
  }
  mon.cache = load_score_cache(cache_path);
  if (mon.cache.dim != mon.sigma.size() || mon.cache.rows() != mon.n_calibration) {
    throw ValidationError("score cache does not match the model");
  }
  if (mon.dictionary && mon.kind == MonitorKind::Semantic && mon.dictionary->size() != mon.dim()) {
    throw ValidationError("dictionary size does not match sigma");
  }
  return model;
}

}  // namespace certmon
