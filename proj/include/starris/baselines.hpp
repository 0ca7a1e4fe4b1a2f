#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "starris/channel.hpp"
#include "starris/environment.hpp"
#include "starris/lrcppo.hpp"

namespace starris {

enum class BaselineKind {
  kRewardShapingPpo,
  kZeroPhase,
  kRandomPhase,
  kEqualTime,
  kCircularTrajectory,
  kReflectingOnlyRis,
  kOma,
};

std::string to_string(BaselineKind kind);
// Accepts the snake_case tags (reward_shaping_ppo, zero_phase, ...).
BaselineKind parse_baseline(const std::string& tag);

// r - chi_r * sum_k c_r - chi_e * sum_k c_e
double reward_shaping_reward(double reward, std::span<const double> c_r,
                             std::span<const double> c_e, double chi_r, double chi_e);

// zero_phase clears every angle; random_phase redraws each angle uniformly
// over [0, 2pi). Nothing else in the action is touched.
void apply_phase_override(Action& action, BaselineKind kind, Rng& rng);

void apply_equal_time(Action& action);

struct CircularPath {
  double center_x = 400.0;
  double center_y = 400.0;
  double radius = 400.0;
};

// Centered in the area with radius half its side (400 m circle about
// (400, 400) for the 800 m area).
CircularPath default_circle(const ScenarioConfig& config);

// Counter-clockwise tangent at the projection of the position onto the
// circle, flown at v_max. At the center the heading is due east (0).
std::pair<double, double> circular_motion(const State& state, const CircularPath& path,
                                          double v_max);

// STAR-RIS composite when flag == 1; the direct link alone when flag == 0.
Complex reflecting_only_channel(std::span<const Complex> h_ris_ubs,
                                std::span<const Complex> h_ue_ris,
                                std::span<const double> theta_t,
                                std::span<const double> theta_r, int flag, Complex h_direct);

// Action dimensions a baseline sets itself.
std::vector<bool> fixed_dims(BaselineKind kind, const ActionLayout& layout);

// Training hooks for a baseline: the action override with its mask, and for
// reward shaping the multipliers frozen at (chi_r, chi_e).
TrainingHooks baseline_hooks(BaselineKind kind, const ScenarioConfig& config,
                             std::optional<std::pair<double, double>> chi = std::nullopt);

// Environment variant a baseline runs in (surface kind, access scheme).
EnvOptions baseline_env_options(BaselineKind kind);

}  // namespace starris
