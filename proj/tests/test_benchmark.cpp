#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "certmon/crossroad.hpp"
#include "certmon/dataset.hpp"
#include "certmon/error.hpp"
#include "certmon/keyvalue.hpp"
#include "certmon/predictor.hpp"
#include "support/oracles.hpp"

using namespace certmon;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("certmon_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// robot at origin heading +x, at rest
std::vector<double> state_with(std::vector<Vec2> peds, double speed = 0.0) {
  std::vector<double> s{0.0, 0.0, 0.0, speed};
  for (const auto& p : peds) s.insert(s.end(), p.begin(), p.end());
  return s;
}

}  // namespace

TEST_CASE("predicate definitions") {
  CrossroadConfig cfg;
  cfg.ped_starts = {{1.5, 0.0}};
  cfg.ped_speeds = {0.0};
  const CrossroadPredicates preds(cfg);
  const auto mu = preds.evaluate(state_with({{1.5, 0.0}}));
  CHECK(mu[1] == doctest::Approx(0.5).epsilon(1e-15));        // p_f, dead ahead
  CHECK(mu[2] == cfg.sector_max - cfg.d_safe);                  // p_l, empty cone
  CHECK(mu[3] == cfg.sector_max - cfg.d_safe);                  // p_r
  CHECK(mu[0] == doctest::Approx(0.5).epsilon(1e-15));          // p_clear
  CHECK(mu[6] == cfg.v_max);

  const auto left = preds.evaluate(state_with({{0.0, 2.0}}));
  CHECK(left[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(left[1] == cfg.sector_max - cfg.d_safe);

  const auto moving = preds.evaluate(state_with({{4.0, 0.5}}, 1.0));
  CHECK(moving[4] == doctest::Approx(4.0 - cfg.d_safe - cfg.headway * 1.0).epsilon(1e-15));

  std::vector<double> at_goal{cfg.goal[0], cfg.goal[1], 0.0, 0.0, 1.5, 0.0};
  CHECK(preds.evaluate(at_goal)[5] == cfg.goal_radius);
  CHECK_THROWS_AS(preds.evaluate({0.0, 0.0}), DimensionMismatch);
}

TEST_CASE("pedestrian inside d_safe at t=0 makes the clearance negative") {
  CrossroadConfig cfg;
  cfg.ped_starts = {{-7.5, 0.0}};
  cfg.ped_speeds = {0.5};
  cfg.start_jitter = 0.0;
  const Episode ep = simulate_episode(cfg, 3);
  CHECK(ep.mu[0][0] < 0.0);
}

TEST_CASE("static scene far from the robot keeps the clearance constant and positive") {
  CrossroadConfig cfg;
  cfg.ped_starts = {{0.0, 9.0}, {5.0, -9.0}};
  cfg.ped_speeds = {0.0, 0.0};
  cfg.start_jitter = 0.0;
  cfg.v_des = 0.0;
  cfg.process_noise = 0.0;
  cfg.T = 30;
  const Episode ep = simulate_episode(cfg, 1);
  for (double v : ep.mu[0]) {
    CHECK(v == ep.mu[0][0]);
    CHECK(v > 0.0);
  }
}

TEST_CASE("simulation is deterministic and mu matches the predicates of each state") {
  CrossroadConfig cfg;
  cfg.T = 80;
  const Episode a = simulate_episode(cfg, 17), b = simulate_episode(cfg, 17);
  CHECK(a.mu == b.mu);
  CHECK(a.states == b.states);
  CHECK(a.id == 17);
  CHECK(a.length() == 81);
  CHECK(simulate_episode(cfg, 18).mu != a.mu);
  const CrossroadPredicates preds(cfg);
  for (std::size_t t = 0; t < a.length(); ++t) {
    const auto mu = preds.evaluate(a.states[t]);
    for (std::size_t k = 0; k < mu.size(); ++k) CHECK(a.mu[k][t] == mu[k]);
  }
}

TEST_CASE("config text round trip and validation") {
  CrossroadConfig cfg;
  cfg.d_safe = 1.25;
  cfg.ped_starts = {{1, 2}};
  cfg.ped_speeds = {0.3};
  const auto back = CrossroadConfig::from_text(cfg.to_text());
  CHECK(back.to_text() == cfg.to_text());
  CHECK(back.pedestrian_count() == 1);
  CHECK(CrossroadConfig::from_text("pedestrians = 0\n").pedestrian_count() == 0);
  CHECK_THROWS_AS(CrossroadConfig::from_text("pedestrians = 2\n"), ValidationError);
  CHECK_THROWS_AS(CrossroadConfig::from_text("d_save = 1\n"), ValidationError);
  CHECK_THROWS_AS(CrossroadConfig::from_text("d_safe = -1\n"), ValidationError);
  CHECK_THROWS_AS(CrossroadConfig::from_text("d_safe = abc\n"), ValidationError);
  CHECK_THROWS_AS(CrossroadConfig::from_text("d_safe = 1\nd_safe = 2\n"), ValidationError);
}

TEST_CASE("key-value config") {
  const auto kv = KeyValueConfig::parse("# comment\n a = 1.5 \nlist = 1, 2,3\n\nname = x # trailing\n");
  CHECK(kv.get_double("a", 0) == 1.5);
  CHECK(kv.get_doubles("list", {}) == std::vector<double>{1, 2, 3});
  CHECK(kv.get_string("name", "") == "x");
  CHECK(kv.get_double("missing", 7) == 7);
  CHECK(kv.unused_keys().empty());
  CHECK_THROWS_AS(KeyValueConfig::parse("novalue\n"), ValidationError);
  CHECK_THROWS_AS(KeyValueConfig::load("/nonexistent/file"), IoError);
  CHECK_THROWS_AS(parse_uint("-3"), ValidationError);
}

TEST_CASE("predictor stub: zero noise, determinism, and mode checks") {
  std::mt19937_64 rng(1);
  Episode ep = oracle::episode(rng, 3, 40);
  ep.id = 5;
  NoiseModel none;
  none.scale = {0.0};
  const PredictorStub exact(StubMode::NoisyPredicates, none, 1);
  CHECK(exact.predict_predicates(ep) == ep.mu);
  const auto dict = build_depth1_dictionary(3, {{0, 2}});
  const PredictorStub exact_basis(StubMode::NoisyBasis, none, 1);
  CHECK(exact_basis.predict_semantic(ep, dict).values == semantic_basis_track(ep, dict).values);
  CHECK_THROWS_AS(exact.predict_semantic(ep, dict), ValidationError);
  CHECK_THROWS_AS(exact_basis.predict_predicates(ep), ValidationError);

  const PredictorStub noisy(StubMode::NoisyPredicates, NoiseModel{}, 2);
  CHECK(noisy.predict_predicates(ep) == noisy.predict_predicates(ep));
  CHECK(noisy.predict_predicates(ep) != PredictorStub(StubMode::NoisyPredicates, NoiseModel{}, 3)
                                           .predict_predicates(ep));
  NoiseModel bad;
  bad.ar = 1.0;
  CHECK_THROWS_AS(PredictorStub(StubMode::NoisyPredicates, bad, 0), ValidationError);
  bad = NoiseModel{};
  bad.scale = {0.1, 0.2};
  CHECK_THROWS_AS(PredictorStub(StubMode::NoisyPredicates, bad, 0).predict_predicates(ep),
                  DimensionMismatch);
}

TEST_CASE("predictor stub: noise statistics follow the AR(1) model") {
  Episode ep;
  ep.id = 9;
  ep.mu.assign(1, std::vector<double>(20000, 0.0));
  auto lag1 = [](const std::vector<double>& z) {
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      den += (z[i] - mean) * (z[i] - mean);
      if (i) num += (z[i] - mean) * (z[i - 1] - mean);
    }
    return num / den;
  };
  NoiseModel iid;
  iid.scale = {0.5};
  const auto z = PredictorStub(StubMode::NoisyPredicates, iid, 1).predict_predicates(ep)[0];
  CHECK(std::abs(lag1(z)) < 0.03);
  double var = 0.0;
  for (double v : z) var += v * v;
  CHECK(std::sqrt(var / z.size()) == doctest::Approx(0.5).epsilon(0.03));

  NoiseModel ar = iid;
  ar.ar = 0.8;
  const auto za = PredictorStub(StubMode::NoisyPredicates, ar, 1).predict_predicates(ep)[0];
  CHECK(lag1(za) == doctest::Approx(0.8).epsilon(0.05));
}

TEST_CASE("predictor config text") {
  const auto p = parse_predictor_config("scale = 0.3\nbias = 0.1\nar = 0.2\nseed = 4\n",
                                        StubMode::NoisyBasis);
  CHECK(p.mode() == StubMode::NoisyBasis);
  CHECK(p.noise().scale == std::vector<double>{0.3});
  CHECK(p.noise().ar == 0.2);
  CHECK(p.seed() == 4);
  CHECK(parse_predictor_config("mode = predicates\n", StubMode::NoisyBasis).mode() ==
        StubMode::NoisyPredicates);
  CHECK_THROWS_AS(parse_predictor_config("scael = 1\n", StubMode::NoisyBasis), ValidationError);
  CHECK_THROWS_AS(parse_predictor_config("mode = pixels\n", StubMode::NoisyBasis), ValidationError);
}

TEST_CASE("dataset generation, manifest and reload") {
  const fs::path dir = scratch("dataset");
  CrossroadConfig cfg;
  cfg.T = 40;
  const Manifest man = generate_dataset(cfg, {10, 10, 10}, 7, dir);
  std::size_t files = 0;
  for (const char* split : {"train", "calib", "test"})
    for (const auto& e : fs::directory_iterator(dir / split)) files += e.path().extension() == ".jsonl";
  CHECK(files == 30);
  CHECK(fs::exists(dir / "manifest.json"));

  const Manifest back = load_manifest(dir);
  CHECK(back.predicate_names.size() == 7);
  CHECK(back.k_max == 16);
  CHECK(back.intervals == default_intervals());
  CHECK(back.counts.calib == 10);
  CHECK(back.config.to_text() == cfg.to_text());
  CHECK(back.calib_seed == man.calib_seed);
  CHECK(back.predicate_definitions.size() == 7);

  const auto calib = load_split(dir, "calib");
  REQUIRE(calib.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    const Episode direct = simulate_episode(cfg, man.calib_seed + i);
    CHECK(calib[i].id == man.calib_seed + i);
    CHECK(calib[i].mu == direct.mu);
    CHECK(calib[i].states == direct.states);
  }
  CHECK_THROWS_AS(load_split(dir, "valid"), ValidationError);

  const fs::path again = scratch("dataset2");
  generate_dataset(cfg, {10, 10, 10}, 7, again);
  CHECK(slurp(dir / "manifest.json") == slurp(again / "manifest.json"));
  CHECK(slurp(dir / "test" / "000003.jsonl") == slurp(again / "test" / "000003.jsonl"));
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("dataset IO errors") {
  CHECK_THROWS_AS(load_manifest("/nonexistent/dataset"), IoError);
  const fs::path dir = scratch("broken");
  fs::create_directories(dir);
  std::ofstream(dir / "manifest.json") << "{ not json";
  CHECK_THROWS_AS(load_manifest(dir), ValidationError);
  std::ofstream(dir / "ep.jsonl") << "{\"t\":0,\"mu\":[1,2]}\n{\"t\":2,\"mu\":[1,2]}\n";
  CHECK_THROWS_AS(read_episode(dir / "ep.jsonl", 0, 0.1), ValidationError);
  CHECK_THROWS_AS(generate_dataset(CrossroadConfig{}, {0, 1, 1}, 0, dir), ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("io counters track episode reads") {
  const fs::path dir = scratch("counters");
  CrossroadConfig cfg;
  cfg.T = 20;
  generate_dataset(cfg, {2, 3, 2}, 1, dir);
  const auto before = io_stats();
  load_split(dir, "calib");
  const auto after = io_stats();
  CHECK(after.episodes_read - before.episodes_read == 3);
  CHECK(after.manifests_read - before.manifests_read == 1);
  fs::remove_all(dir);
}
