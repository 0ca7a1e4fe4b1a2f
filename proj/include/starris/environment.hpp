#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "starris/access.hpp"
#include "starris/channel.hpp"
#include "starris/random.hpp"
#include "starris/scenario.hpp"

namespace starris {

struct State {
  double x = 0.0;  // UAV position, m
  double y = 0.0;
  int slot = 0;
};

struct Action {
  double heading = 0.0;         // rad, [0, 2pi)
  double speed = 0.0;           // m/s, [0, v_max]
  std::vector<double> powers;   // per UE, W, [0, p_max]
  std::vector<double> splits;   // per surface, left share of the slot, [0, 1]
  PhaseConfig phases;           // per surface, M angles each, [0, 2pi)
};

/// Flat layout of the continuous action vector:
///   [heading, speed, powers(K), splits(I), theta_r(I*M), theta_t(I*M)]
/// for a total dimension of 2 + K + I + 2MI.
class ActionLayout {
 public:
  ActionLayout(int num_ues, int num_ris, int elements, double v_max, double p_max);

  int dim() const { return 2 + K_ + I_ + 2 * M_ * I_; }
  int num_ues() const { return K_; }
  int num_ris() const { return I_; }
  int elements() const { return M_; }

  int heading() const { return 0; }
  int speed() const { return 1; }
  int power(int k) const { return 2 + k; }
  int split(int i) const { return 2 + K_ + i; }
  int phase_r(int i, int m) const { return 2 + K_ + I_ + i * M_ + m; }
  int phase_t(int i, int m) const { return 2 + K_ + I_ + I_ * M_ + i * M_ + m; }

  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  // Angles: the upper bound is excluded and values wrap around.
  const std::vector<bool>& periodic() const { return periodic_; }

  std::vector<double> flatten(const Action& a) const;
  Action unflatten(std::span<const double> v) const;

 private:
  int K_, I_, M_;
  std::vector<double> lower_, upper_;
  std::vector<bool> periodic_;
};

// Throws ValidationError naming the first out-of-range component.
void validate_action(const Action& action, const ActionLayout& layout);

struct StepOutcome {
  double reward = 0.0;              // sum of per-UE spectral efficiencies, bit/s/Hz
  std::vector<double> c_r;          // r_min - rate_bps
  std::vector<double> c_e;          // energy - e_max / N
  std::vector<double> rates_se;     // bit/s/Hz
  std::vector<double> rates_bps;
  std::vector<double> energies;     // J
  std::vector<double> gains;        // |h_k|^2
  std::vector<double> powers;
  std::vector<double> splits;       // left fraction per surface
  State next_state;
};

struct ImmediateConstraints {
  std::vector<double> c_r;
  std::vector<double> c_e;
};

ImmediateConstraints immediate_constraints(std::span<const double> rates_bps,
                                           std::span<const double> powers,
                                           std::span<const TimeSplit> splits,
                                           const Association& association,
                                           double r_min, double e_max, int num_slots);

struct EpisodeTrace {
  std::vector<StepOutcome> steps;
  double j_r = 0.0;
  std::vector<double> j_cr;  // per UE, sum of c_r over slots
  std::vector<double> j_ce;

  void append(StepOutcome step);
  int length() const { return static_cast<int>(steps.size()); }
  // Mean per-slot sum spectral efficiency.
  double throughput() const;
  std::vector<double> average_rate_bps() const;
  std::vector<double> total_energy() const;

  // One row per slot: position, reward, and per-UE rate/energy/constraints.
  void write_csv(std::ostream& os) const;
};

struct EnvOptions {
  AccessScheme access = AccessScheme::kNoma;
  SurfaceKind surface = SurfaceKind::kStar;
};

class Environment {
 public:
  explicit Environment(Scenario scenario, EnvOptions options = {});

  const Scenario& scenario() const { return scenario_; }
  const Association& association() const { return association_; }
  const ActionLayout& layout() const { return layout_; }
  const EnvOptions& options() const { return options_; }
  int num_slots() const { return scenario_.config.num_slots; }

  State reset() const;

  // UAV moves first; rates are evaluated at the post-move position.
  StepOutcome step(const State& state, const Action& action, Rng& rng) const;

  // Kinematic update only, clamped to the area square.
  State move(const State& state, double heading, double speed) const;

 private:
  Scenario scenario_;
  Association association_;
  ActionLayout layout_;
  EnvOptions options_;
};

using Policy = std::function<Action(const State&, Rng&)>;

EpisodeTrace rollout(const Policy& policy, const Environment& env, Rng& rng);

}  // namespace starris
