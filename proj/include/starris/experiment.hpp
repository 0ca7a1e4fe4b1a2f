#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "starris/baselines.hpp"
#include "starris/environment.hpp"
#include "starris/lrcppo.hpp"

namespace starris {

enum class ConstraintCase { kCase1, kCase2, kCase3, kCustom };
enum class Architecture { kStarNoma, kReflectingNoma, kStarOma };
// How baselines that override part of the action obtain the rest of it.
enum class BaselineMode { kRetrain, kOverrideTrained };

std::string to_string(ConstraintCase c);
std::string to_string(Architecture a);
ConstraintCase parse_case(const std::string& s);  // case1 | case2 | case3 | custom
Architecture parse_architecture(const std::string& s);

struct Thresholds {
  double r_min = 0.0;  // bit/s per UE, time-averaged
  double e_max = 0.0;  // J per UE per episode
};

// Named-case thresholds. Desk scale keeps the rate floors and the per-slot
// energy budget of the full-size scenario (E_max / N).
Thresholds case_thresholds(ConstraintCase c, const std::string& preset);

// Training defaults per preset. Desk scale: batch 16 (same number of updates
// per episode as 64 at N = 200), 64-unit layers, faster rates on all three
// timescales, 2000 episodes.
TrainConfig preset_train_config(const std::string& preset);

struct ExperimentSpec {
  std::string preset = "desk";  // desk | paper
  ScenarioConfig scenario = desk_preset();
  ConstraintCase constraint_case = ConstraintCase::kCase2;
  std::optional<BaselineKind> baseline;  // nullopt: LRCPPO
  Architecture architecture = Architecture::kStarNoma;
  BaselineMode baseline_mode = BaselineMode::kRetrain;
  std::optional<std::pair<double, double>> chi;  // reward shaping weights
  std::vector<int> elements;                      // empty: scenario value
  std::vector<std::uint64_t> seeds = {1};
  std::uint64_t scenario_seed = 0;
  int eval_episodes = 20;
  TrainConfig train = preset_train_config("desk");

  std::string algorithm_tag() const;
  std::vector<int> element_values() const;
  // Scenario for one sweep point with the case thresholds applied.
  ScenarioConfig scenario_for(int elements) const;
  EnvOptions env_options() const;
  TrainingHooks training_hooks(const ScenarioConfig& scenario) const;
  // Hooks applied on top of the trained policy during evaluation.
  TrainingHooks evaluation_hooks(const ScenarioConfig& scenario) const;

  void validate() const;
};

inline constexpr int kSpecVersion = 1;

nlohmann::json to_json(const ExperimentSpec& spec);
// Starts from the named preset, then applies every key present. Unknown
// keys and a wrong version are rejected with ConfigError.
ExperimentSpec spec_from_json(const nlohmann::json& j);
ExperimentSpec load_spec(const std::string& path);

struct EvalMetrics {
  std::vector<double> throughputs;  // per episode, bit/s/Hz
  double throughput_mean = 0.0;
  double throughput_std = 0.0;      // sample stddev over episodes
  std::vector<double> avg_rate_bps;     // per UE, mean over episodes
  std::vector<double> total_energy_j;   // per UE, mean over episodes
  std::vector<double> j_cr;             // per UE, mean cumulative constraint
  std::vector<double> j_ce;
  std::vector<double> rate_violation;   // max(0, j_cr), bit/s summed over slots
  std::vector<double> energy_violation; // max(0, j_ce), J
  EpisodeTrace first_episode;
};

// Runs the policy for `episodes` episodes with fresh channel noise.
EvalMetrics evaluate(const Policy& policy, const Environment& env, int episodes,
                     std::uint64_t seed);

// Seeds shared by every algorithm, case and sweep point of a run so that
// comparisons are paired.
std::uint64_t training_seed(std::uint64_t seed);
std::uint64_t evaluation_seed(std::uint64_t seed);

struct CellResult {
  int elements = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::vector<EpisodeLog> log;
  EvalMetrics metrics;
  nlohmann::json checkpoint;
};

CellResult run_cell(const ExperimentSpec& spec, int elements, std::uint64_t seed);

// Worker count from STARRIS_WORKERS, else the hardware concurrency.
int default_workers();

// Trains and evaluates every (sweep point, seed) cell on a worker pool and
// writes the CSV outputs into out_dir. Results are in sweep-major order.
std::vector<CellResult> run(const ExperimentSpec& spec, const std::string& out_dir,
                            int workers, bool write_checkpoints = false);

// Output writers (the CSV schemas are documented in docs/outputs.md).
void write_summary_csv(const std::string& path, const ExperimentSpec& spec,
                       const std::vector<CellResult>& cells, bool append = false);
void write_per_ue_csv(const std::string& path, const ExperimentSpec& spec,
                      const std::vector<CellResult>& cells, bool append = false);

// Non-learning policies for single rollouts: hover, circular, random.
Policy fixed_policy(const std::string& name, const Environment& env);

}  // namespace starris
