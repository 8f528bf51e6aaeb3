#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "certmon/keyvalue.hpp"
#include "certmon/robustness.hpp"

namespace certmon {

using Vec2 = std::array<double, 2>;

/// Pedestrian crossroad scene. Lengths in metres, speeds in m/s, angles in degrees.
struct CrossroadConfig {
  double arena_half_width = 10.0;
  Vec2 robot_start{-8.0, 0.0};
  Vec2 goal{8.0, 0.0};
  double goal_radius = 0.5;
  double v_des = 1.2;
  double v_max = 1.5;
  double a_max = 1.0;
  /// Pedestrians walk straight across the robot lane toward (x0, -y0).
  std::vector<Vec2> ped_starts{{-3.0, -5.0}, {0.5, 5.0}, {3.5, -5.0}};
  std::vector<double> ped_speeds{0.8, 0.6, 0.7};
  /// Per-episode uniform jitter of start positions (m) and speeds (m/s).
  double start_jitter = 1.0;
  double speed_jitter = 0.2;
  double d_safe = 1.0;
  double sector_half_angle_deg = 45.0;
  /// Cap on clearances when nothing is in range.
  double sector_max = 10.0;
  /// Braking starts when a pedestrian ahead is closer than this.
  double activation_radius = 3.0;
  /// Time headway of the front-margin predicate (s).
  double headway = 1.0;
  double dt = 0.1;
  std::size_t T = 200;
  /// Relative per-step pedestrian speed noise and robot acceleration noise.
  double process_noise = 0.05;
  std::uint64_t seed = 0;

  std::size_t pedestrian_count() const { return ped_starts.size(); }
  /// Throws ValidationError.
  void validate() const;

  static CrossroadConfig from_text(const std::string& text);
  std::string to_text() const;
};

/// The seven crossroad predicates, evaluated on a simulator state
/// [x, y, heading, speed, ped_0x, ped_0y, ...].
class CrossroadPredicates {
 public:
  explicit CrossroadPredicates(CrossroadConfig cfg);

  static const std::vector<std::string>& names();
  /// One-line definition of every predicate, for the dataset manifest.
  static const std::vector<std::string>& definitions();

  std::vector<double> evaluate(const std::vector<double>& state) const;

 private:
  CrossroadConfig cfg_;
};

CrossroadPredicates crossroad_predicates(const CrossroadConfig& cfg);

/// Deterministic in (cfg, seed); the episode id is the seed.
Episode simulate_episode(const CrossroadConfig& cfg, std::uint64_t seed);

}  // namespace certmon
