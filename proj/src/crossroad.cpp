#include "certmon/crossroad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "certmon/error.hpp"

namespace certmon {
namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a < -kPi) a += 2.0 * kPi;
  return a;
}

double deg2rad(double d) { return d * kPi / 180.0; }

Vec2 parse_vec2(const std::vector<double>& v, const std::string& key) {
  if (v.size() != 2) throw ValidationError("config key '" + key + "' needs two numbers");
  return {v[0], v[1]};
}

std::string join(const std::vector<double>& v) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

}  // namespace

void CrossroadConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(what) + " must be > 0");
  };
  auto nonnegative = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string(what) + " must be >= 0");
    }
  };
  positive(arena_half_width, "arena_half_width");
  positive(d_safe, "d_safe");
  positive(dt, "dt");
  positive(sector_max, "sector_max");
  positive(goal_radius, "goal_radius");
  positive(a_max, "a_max");
  nonnegative(v_des, "v_des");
  nonnegative(v_max, "v_max");
  nonnegative(start_jitter, "start_jitter");
  nonnegative(speed_jitter, "speed_jitter");
  nonnegative(process_noise, "process_noise");
  nonnegative(headway, "headway");
  if (!(activation_radius > d_safe)) throw ValidationError("activation_radius must exceed d_safe");
  if (!(sector_half_angle_deg > 0.0 && sector_half_angle_deg <= 90.0)) {
    throw ValidationError("sector_half_angle_deg must lie in (0, 90]");
  }
  if (ped_starts.size() != ped_speeds.size()) {
    throw ValidationError("ped_starts and ped_speeds describe different pedestrian counts");
  }
  for (double s : ped_speeds) nonnegative(s, "pedestrian speed");
  if (T == 0) throw ValidationError("episode length T must be >= 1");
}

CrossroadConfig CrossroadConfig::from_text(const std::string& text) {
  const auto kv = KeyValueConfig::parse(text);
  CrossroadConfig cfg;
  cfg.arena_half_width = kv.get_double("arena_half_width", cfg.arena_half_width);
  if (kv.has("robot_start")) {
    cfg.robot_start = parse_vec2(kv.get_doubles("robot_start", {}), "robot_start");
  }
  if (kv.has("goal")) cfg.goal = parse_vec2(kv.get_doubles("goal", {}), "goal");
  cfg.goal_radius = kv.get_double("goal_radius", cfg.goal_radius);
  cfg.v_des = kv.get_double("v_des", cfg.v_des);
  cfg.v_max = kv.get_double("v_max", cfg.v_max);
  cfg.a_max = kv.get_double("a_max", cfg.a_max);
  if (kv.has("ped_starts")) {
    const auto flat = kv.get_doubles("ped_starts", {});
    if (flat.size() % 2 != 0) throw ValidationError("ped_starts needs x,y pairs");
    cfg.ped_starts.clear();
    for (std::size_t i = 0; i < flat.size(); i += 2) cfg.ped_starts.push_back({flat[i], flat[i + 1]});
  }
  if (kv.has("ped_speeds")) cfg.ped_speeds = kv.get_doubles("ped_speeds", {});
  if (kv.has("pedestrians")) {
    const auto count = kv.get_uint("pedestrians", 0);
    if (count == 0 && !kv.has("ped_starts")) {
      cfg.ped_starts.clear();
      cfg.ped_speeds.clear();
    }
    if (count != cfg.ped_starts.size()) {
      throw ValidationError("pedestrians does not match the number of ped_starts");
    }
  }
  cfg.start_jitter = kv.get_double("start_jitter", cfg.start_jitter);
  cfg.speed_jitter = kv.get_double("speed_jitter", cfg.speed_jitter);
  cfg.d_safe = kv.get_double("d_safe", cfg.d_safe);
  cfg.sector_half_angle_deg = kv.get_double("sector_half_angle_deg", cfg.sector_half_angle_deg);
  cfg.sector_max = kv.get_double("sector_max", cfg.sector_max);
  cfg.activation_radius = kv.get_double("activation_radius", cfg.activation_radius);
  cfg.headway = kv.get_double("headway", cfg.headway);
  cfg.dt = kv.get_double("dt", cfg.dt);
  cfg.T = kv.get_uint("T", cfg.T);
  cfg.process_noise = kv.get_double("process_noise", cfg.process_noise);
  cfg.seed = kv.get_uint("seed", cfg.seed);
  if (auto extra = kv.unused_keys(); !extra.empty()) {
    throw ValidationError("unknown config key '" + extra.front() + "'");
  }
  cfg.validate();
  return cfg;
}

std::string CrossroadConfig::to_text() const {
  std::ostringstream out;
  out.precision(17);
  std::vector<double> starts;
  for (const auto& p : ped_starts) starts.insert(starts.end(), p.begin(), p.end());
  out << "arena_half_width = " << arena_half_width << "\n"
      << "robot_start = " << join({robot_start[0], robot_start[1]}) << "\n"
      << "goal = " << join({goal[0], goal[1]}) << "\n"
      << "goal_radius = " << goal_radius << "\n"
      << "v_des = " << v_des << "\n"
      << "v_max = " << v_max << "\n"
      << "a_max = " << a_max << "\n"
      << "pedestrians = " << ped_starts.size() << "\n";
  if (!ped_starts.empty()) {
    out << "ped_starts = " << join(starts) << "\n"
        << "ped_speeds = " << join(ped_speeds) << "\n";
  }
  out << "start_jitter = " << start_jitter << "\n"
      << "speed_jitter = " << speed_jitter << "\n"
      << "d_safe = " << d_safe << "\n"
      << "sector_half_angle_deg = " << sector_half_angle_deg << "\n"
      << "sector_max = " << sector_max << "\n"
      << "activation_radius = " << activation_radius << "\n"
      << "headway = " << headway << "\n"
      << "dt = " << dt << "\n"
      << "T = " << T << "\n"
      << "process_noise = " << process_noise << "\n"
      << "seed = " << seed << "\n";
  return out.str();
}

CrossroadPredicates::CrossroadPredicates(CrossroadConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
}

const std::vector<std::string>& CrossroadPredicates::names() {
  static const std::vector<std::string> kNames{"p_clear", "p_f",    "p_l",    "p_r",
                                               "p_front_margin", "p_goal", "p_speed"};
  return kNames;
}

const std::vector<std::string>& CrossroadPredicates::definitions() {
  static const std::vector<std::string> kDefs{
      "min(sector_max, min pedestrian distance) - d_safe",
      "min(sector_max, nearest pedestrian within the front cone) - d_safe",
      "min(sector_max, nearest pedestrian within the left cone) - d_safe",
      "min(sector_max, nearest pedestrian within the right cone) - d_safe",
      "min(sector_max, nearest longitudinal gap in the lane |lateral| <= d_safe) - d_safe - "
      "headway * speed",
      "goal_radius - distance to goal",
      "v_max - speed"};
  return kDefs;
}

std::vector<double> CrossroadPredicates::evaluate(const std::vector<double>& state) const {
  const std::size_t peds = cfg_.pedestrian_count();
  if (state.size() != 4 + 2 * peds) {
    throw DimensionMismatch("crossroad state has " + std::to_string(state.size()) +
                            " entries, expected " + std::to_string(4 + 2 * peds));
  }
  const double x = state[0], y = state[1], heading = state[2], speed = state[3];
  const double half = deg2rad(cfg_.sector_half_angle_deg);
  const double cap = cfg_.sector_max;
  double clear = cap, front = cap, left = cap, right = cap, gap = cap;
  for (std::size_t i = 0; i < peds; ++i) {
    const double dx = state[4 + 2 * i] - x, dy = state[5 + 2 * i] - y;
    const double dist = std::hypot(dx, dy);
    const double bearing = wrap_angle(std::atan2(dy, dx) - heading);
    clear = std::min(clear, dist);
    if (std::abs(bearing) <= half) front = std::min(front, dist);
    if (std::abs(wrap_angle(bearing - kPi / 2)) <= half) left = std::min(left, dist);
    if (std::abs(wrap_angle(bearing + kPi / 2)) <= half) right = std::min(right, dist);
    const double lon = dx * std::cos(heading) + dy * std::sin(heading);
    const double lat = -dx * std::sin(heading) + dy * std::cos(heading);
    if (lon > 0.0 && std::abs(lat) <= cfg_.d_safe) gap = std::min(gap, lon);
  }
  const double to_goal = std::hypot(cfg_.goal[0] - x, cfg_.goal[1] - y);
  return {clear - cfg_.d_safe,
          front - cfg_.d_safe,
          left - cfg_.d_safe,
          right - cfg_.d_safe,
          gap - cfg_.d_safe - cfg_.headway * speed,
          cfg_.goal_radius - to_goal,
          cfg_.v_max - speed};
}

CrossroadPredicates crossroad_predicates(const CrossroadConfig& cfg) {
  return CrossroadPredicates(cfg);
}

Episode simulate_episode(const CrossroadConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const CrossroadPredicates predicates(cfg);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t peds = cfg.pedestrian_count();
  std::vector<Vec2> pos(peds), dir(peds);
  std::vector<double> speed(peds);
  for (std::size_t i = 0; i < peds; ++i) {
    const Vec2 start = cfg.ped_starts[i];
    pos[i] = {start[0] + cfg.start_jitter * unit(rng), start[1] + cfg.start_jitter * unit(rng)};
    const double dx = start[0] - pos[i][0], dy = -start[1] - pos[i][1];
    const double norm = std::hypot(dx, dy);
    dir[i] = norm > 0.0 ? Vec2{dx / norm, dy / norm} : Vec2{0.0, 0.0};
    speed[i] = cfg.ped_speeds[i] > 0.0
                   ? std::max(0.0, cfg.ped_speeds[i] + cfg.speed_jitter * unit(rng))
                   : 0.0;
  }

  double x = cfg.robot_start[0], y = cfg.robot_start[1];
  double heading = std::atan2(cfg.goal[1] - y, cfg.goal[0] - x);
  double v = 0.0;
  const double front_half = deg2rad(90.0);

  Episode ep;
  ep.id = seed;
  ep.dt = cfg.dt;
  ep.mu.assign(CrossroadPredicates::names().size(), {});
  for (std::size_t t = 0; t <= cfg.T; ++t) {
    std::vector<double> state{x, y, heading, v};
    for (const auto& p : pos) state.insert(state.end(), p.begin(), p.end());
    const auto values = predicates.evaluate(state);
    for (std::size_t k = 0; k < values.size(); ++k) ep.mu[k].push_back(values[k]);
    ep.states.push_back(std::move(state));
    if (t == cfg.T) break;

    // Steer toward the goal; brake in proportion to the closest pedestrian ahead.
    const double gx = cfg.goal[0] - x, gy = cfg.goal[1] - y;
    const double to_goal = std::hypot(gx, gy);
    const double turn = std::clamp(2.0 * wrap_angle(std::atan2(gy, gx) - heading), -1.5, 1.5);
    double v_cmd = std::min(cfg.v_des, 0.8 * to_goal);
    for (std::size_t i = 0; i < peds; ++i) {
      const double dx = pos[i][0] - x, dy = pos[i][1] - y;
      const double bearing = wrap_angle(std::atan2(dy, dx) - heading);
      if (std::abs(bearing) > front_half) continue;
      const double dist = std::hypot(dx, dy);
      const double factor = std::clamp(
          (dist - cfg.d_safe) / (cfg.activation_radius - cfg.d_safe), 0.0, 1.0);
      v_cmd *= factor;
    }
    const double dv = std::clamp(v_cmd - v, -cfg.a_max * cfg.dt, cfg.a_max * cfg.dt);
    v = std::max(0.0, v + dv + cfg.process_noise * cfg.dt * normal(rng));
    heading = wrap_angle(heading + turn * cfg.dt);
    x += v * cfg.dt * std::cos(heading);
    y += v * cfg.dt * std::sin(heading);
    for (std::size_t i = 0; i < peds; ++i) {
      const double step = speed[i] * std::max(0.0, 1.0 + cfg.process_noise * normal(rng));
      pos[i][0] += cfg.dt * step * dir[i][0];
      pos[i][1] += cfg.dt * step * dir[i][1];
    }
  }
  return ep;
}

}  // namespace certmon
