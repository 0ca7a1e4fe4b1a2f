#include "starris/baselines.hpp"

#include <cmath>
#include <numbers>

#include "starris/errors.hpp"

namespace starris {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Tag {
  BaselineKind kind;
  const char* name;
};

constexpr Tag kTags[] = {
    {BaselineKind::kRewardShapingPpo, "reward_shaping_ppo"},
    {BaselineKind::kZeroPhase, "zero_phase"},
    {BaselineKind::kRandomPhase, "random_phase"},
    {BaselineKind::kEqualTime, "equal_time"},
    {BaselineKind::kCircularTrajectory, "circular_trajectory"},
    {BaselineKind::kReflectingOnlyRis, "reflecting_only_ris"},
    {BaselineKind::kOma, "oma"},
};

}  // namespace

std::string to_string(BaselineKind kind) {
  for (const auto& t : kTags)
    if (t.kind == kind) return t.name;
  return "unknown";
}

BaselineKind parse_baseline(const std::string& tag) {
  for (const auto& t : kTags)
    if (tag == t.name) return t.kind;
  throw ConfigError("unknown baseline: " + tag);
}

double reward_shaping_reward(double reward, std::span<const double> c_r,
                             std::span<const double> c_e, double chi_r, double chi_e) {
  double r = reward;
  for (double c : c_r) r -= chi_r * c;
  for (double c : c_e) r -= chi_e * c;
  return r;
}

void apply_phase_override(Action& action, BaselineKind kind, Rng& rng) {
  if (kind != BaselineKind::kZeroPhase && kind != BaselineKind::kRandomPhase)
    throw UsageError("apply_phase_override: not a phase baseline");
  for (auto* set : {&action.phases.theta_r, &action.phases.theta_t}) {
    for (auto& surface : *set) {
      for (double& theta : surface) {
        if (kind == BaselineKind::kZeroPhase) {
          theta = 0.0;
        } else {
          theta = uniform(rng, 0.0, kTwoPi);
          if (theta >= kTwoPi) theta = 0.0;
        }
      }
    }
  }
}

void apply_equal_time(Action& action) {
  for (double& s : action.splits) s = 0.5;
}

CircularPath default_circle(const ScenarioConfig& config) {
  const double half = config.area_size / 2.0;
  return {half, half, half};
}

std::pair<double, double> circular_motion(const State& state, const CircularPath& path,
                                          double v_max) {
  const double dx = state.x - path.center_x;
  const double dy = state.y - path.center_y;
  if (dx == 0.0 && dy == 0.0) return {0.0, v_max};
  double heading = std::atan2(dy, dx) + std::numbers::pi / 2.0;
  heading = std::fmod(heading, kTwoPi);
  if (heading < 0.0) heading += kTwoPi;
  if (heading >= kTwoPi) heading = 0.0;
  return {heading, v_max};
}

Complex reflecting_only_channel(std::span<const Complex> h_ris_ubs,
                                std::span<const Complex> h_ue_ris,
                                std::span<const double> theta_t,
                                std::span<const double> theta_r, int flag, Complex h_direct) {
  if (flag == 0) return h_direct;
  return composite_channel(h_ris_ubs, h_ue_ris, theta_t, theta_r, flag, h_direct);
}

std::vector<bool> fixed_dims(BaselineKind kind, const ActionLayout& layout) {
  std::vector<bool> fixed(layout.dim(), false);
  switch (kind) {
    case BaselineKind::kZeroPhase:
    case BaselineKind::kRandomPhase:
      for (int i = 0; i < layout.num_ris(); ++i)
        for (int m = 0; m < layout.elements(); ++m) {
          fixed[layout.phase_r(i, m)] = true;
          fixed[layout.phase_t(i, m)] = true;
        }
      break;
    case BaselineKind::kEqualTime:
      for (int i = 0; i < layout.num_ris(); ++i) fixed[layout.split(i)] = true;
      break;
    case BaselineKind::kCircularTrajectory:
      fixed[layout.heading()] = true;
      fixed[layout.speed()] = true;
      break;
    default:
      break;
  }
  return fixed;
}

TrainingHooks baseline_hooks(BaselineKind kind, const ScenarioConfig& config,
                             std::optional<std::pair<double, double>> chi) {
  TrainingHooks hooks;
  const ActionLayout layout(config.num_ues, config.num_ris, config.elements_per_ris,
                            config.v_max, config.p_max);
  switch (kind) {
    case BaselineKind::kRewardShapingPpo: {
      const auto unit = unit_penalty_weights(config);
      const auto [chi_r, chi_e] =
          chi.value_or(std::make_pair(unit.lambda_r.front(), unit.lambda_e.front()));
      hooks.freeze_multipliers = true;
      hooks.initial_multipliers = LagrangeMultipliers::uniform(config.num_ues, chi_r, chi_e);
      break;
    }
    case BaselineKind::kZeroPhase:
    case BaselineKind::kRandomPhase:
      hooks.override_action = [kind](const State&, Action& a, Rng& rng) {
        apply_phase_override(a, kind, rng);
      };
      break;
    case BaselineKind::kEqualTime:
      hooks.override_action = [](const State&, Action& a, Rng&) { apply_equal_time(a); };
      break;
    case BaselineKind::kCircularTrajectory: {
      const CircularPath path = default_circle(config);
      const double v_max = config.v_max;
      hooks.override_action = [path, v_max](const State& s, Action& a, Rng&) {
        const auto [heading, speed] = circular_motion(s, path, v_max);
        a.heading = heading;
        a.speed = speed;
      };
      break;
    }
    case BaselineKind::kReflectingOnlyRis:
    case BaselineKind::kOma:
      break;
  }
  if (hooks.override_action) hooks.fixed_dims = fixed_dims(kind, layout);
  return hooks;
}

EnvOptions baseline_env_options(BaselineKind kind) {
  EnvOptions o;
  if (kind == BaselineKind::kReflectingOnlyRis) o.surface = SurfaceKind::kReflectingOnly;
  if (kind == BaselineKind::kOma) o.access = AccessScheme::kOma;
  return o;
}

}  // namespace starris
