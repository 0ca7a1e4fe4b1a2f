#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "starris/environment.hpp"
#include "starris/mlp.hpp"
#include "starris/random.hpp"

namespace starris {

struct LagrangeMultipliers {
  std::vector<double> lambda_r;  // per UE, >= 0
  std::vector<double> lambda_e;

  static LagrangeMultipliers zeros(int num_ues);
  static LagrangeMultipliers uniform(int num_ues, double rate, double energy);
};

enum class SurrogateForm {
  kPessimistic,   // min(rho * A, clip(rho) * A)
  kClippedRatio,  // min(rho, clip(rho)) * A
};

struct TrainConfig {
  double eta_c = 1e-3;   // critic
  double eta_a = 3e-4;   // actor
  // Multiplier rates. With scale_multiplier_rates they are dimensionless and
  // multiplied by multiplier_scale() of the scenario.
  double eta_lr = 2e-4;
  double eta_le = 2e-4;
  bool scale_multiplier_rates = true;
  double gamma = 0.99;
  double epsilon = 0.2;
  int batch_size = 64;
  int sync_interval = 4;  // actor updates between behavior syncs
  int episodes = 1000;
  std::vector<int> hidden = {128, 128};
  double init_log_std = -0.5;  // pre-squash exploration scale, every dimension
  double min_log_std = -5.0;
  double max_log_std = 1.0;
  // Exploration schedule: the learnable log-stddev is capped by a value that
  // falls linearly from init_log_std to final_log_std over `episodes`.
  // Disabled when final_log_std >= init_log_std.
  double final_log_std = -2.0;
  // Pre-squash means are kept inside (-mean_bound, mean_bound) by a scaled
  // tanh so saturated components keep exploring. 0 disables.
  double mean_bound = 2.0;
  StepRule step_rule = StepRule::kRmsProp;
  SurrogateForm surrogate = SurrogateForm::kPessimistic;
  bool normalize_rewards = true;
  bool normalize_advantages = true;
  bool spread_initial_angles = true;
  // Weight of the newest episode in the cumulative-constraint estimate;
  // 1 uses the latest episode only.
  double constraint_averaging = 1.0;

  // Rejects eta_c <= eta_a, eta_a <= max(eta_lr, eta_le) and other
  // out-of-range values with ConfigError.
  void validate() const;

  double log_std_cap(int episode) const;
};

/// Factors that turn dimensionless multiplier rates into per-unit ones:
/// 1 / r_min^2 and N^2 / E_max^2. With them, a cumulative violation of f
/// per-slot thresholds moves the penalty per unit of relative violation
/// (lambda_r * r_min, lambda_e * E_max / N) by eta * f for either kind of
/// constraint. A zero threshold gives a zero factor.
struct MultiplierScale {
  double rate = 0.0;
  double energy = 0.0;
};
MultiplierScale multiplier_scale(const ScenarioConfig& scenario);

// Reward-shaping weights that put both penalties on a unit scale:
// chi_r = 1 / r_min, chi_e = N / E_max.
LagrangeMultipliers unit_penalty_weights(const ScenarioConfig& scenario);

double penalized_reward(double reward, std::span<const double> c_r,
                        std::span<const double> c_e, const LagrangeMultipliers& lambdas);

// Network input: the UAV position scaled to the unit square.
Eigen::Vector2d observe(const State& s, double area_size);

double critic_value(const Mlp& critic, const Eigen::Vector2d& obs);

// V'_j = r_j + gamma * V'_{j+1}, with V'_{|B|} = bootstrap.
std::vector<double> critic_targets(std::span<const double> rewards, double bootstrap,
                                   double gamma);

struct LossAndGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

// Mean squared TD error over the batch and its gradient.
LossAndGradient critic_loss(const Mlp& critic, const Eigen::MatrixXd& obs,
                            std::span<const double> targets);

// One descent step; returns the pre-step loss. Throws TrainingFault when the
// loss or the updated parameters are not finite.
double critic_update(Mlp& critic, AdaptiveStep& step, const Eigen::MatrixXd& obs,
                     std::span<const double> targets, double eta_c);

/// Diagonal Gaussian over pre-squash actions u with a state-dependent mean
/// and state-independent log-stddev. Each component is mapped into its
/// bounds by a = lo + (hi - lo) * (1 + tanh(u)) / 2; angles wrap so the
/// upper bound is never produced. With mean_bound = c > 0 the mean is
/// c * tanh(z / c) of the network output z.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(const ActionLayout& layout, const std::vector<int>& hidden,
                 double init_log_std, double mean_bound = 0.0);

  // Glorot weights with a small output layer. With spread_angles the output
  // biases of angle dimensions start at random points of the circle instead
  // of all at its midpoint.
  void init(Rng& rng, bool spread_angles = false);

  int action_dim() const { return static_cast<int>(lower_.size()); }
  std::size_t num_params() const { return mean_net.num_params() + log_std.size(); }
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
  bool all_finite() const;
  bool operator==(const GaussianPolicy& other) const;

  Eigen::MatrixXd raw_mean(const Eigen::MatrixXd& obs) const;
  std::vector<double> squash(const Eigen::VectorXd& raw) const;
  // log |d squash / du| summed over the unmasked dimensions.
  double log_jacobian(const Eigen::VectorXd& raw, const std::vector<bool>& fixed) const;

  struct Sample {
    Eigen::VectorXd raw;
    std::vector<double> action;
  };
  Sample sample(const Eigen::Vector2d& obs, Rng& rng) const;

  // Log density of the pre-squash sample over the unmasked dimensions.
  double raw_log_prob(const Eigen::Vector2d& obs, const Eigen::VectorXd& raw,
                      const std::vector<bool>& fixed) const;
  // Log density of the squashed action (change of variables applied).
  double log_prob(const Eigen::Vector2d& obs, const Eigen::VectorXd& raw,
                  const std::vector<bool>& fixed) const;

  Mlp mean_net;
  Eigen::VectorXd log_std;
  double mean_bound = 0.0;

 private:
  std::vector<double> lower_, upper_;
  std::vector<bool> periodic_;
};

struct PolicyOutput {
  std::vector<double> mean;    // squashed into the action bounds
  std::vector<double> stddev;  // pre-squash
};

PolicyOutput policy_forward(const GaussianPolicy& policy, const Eigen::Vector2d& obs);

// Per-sample clipped surrogate.
double clipped_surrogate(double logp_target, double logp_behavior, double advantage,
                         double epsilon, SurrogateForm form = SurrogateForm::kPessimistic);

struct Batch {
  std::vector<Eigen::Vector2d> obs;
  std::vector<Eigen::VectorXd> raw_actions;
  std::vector<double> rewards;  // penalized
  std::vector<Eigen::Vector2d> next_obs;
  std::vector<double> behavior_logp;

  std::size_t size() const { return rewards.size(); }
  bool empty() const { return rewards.empty(); }
  void clear();
  Eigen::MatrixXd obs_matrix() const;
};

// Mean clipped surrogate over the batch and its gradient w.r.t. the policy
// parameters (mean network followed by log-stddev).
LossAndGradient actor_objective(const GaussianPolicy& policy, const Batch& batch,
                                std::span<const double> advantages, double epsilon,
                                SurrogateForm form, const std::vector<bool>& fixed);

// One ascent step; returns the pre-step surrogate.
double actor_update(GaussianPolicy& policy, AdaptiveStep& step, const Batch& batch,
                    std::span<const double> advantages, double eta_a, double epsilon,
                    SurrogateForm form, const std::vector<bool>& fixed,
                    double min_log_std = -20.0, double max_log_std = 2.0);

// Projected multiplier ascent on the cumulative constraints of one full
// episode (or of an averaged estimate with the same layout).
LagrangeMultipliers lagrange_update(const LagrangeMultipliers& lambdas,
                                    std::span<const double> j_cr, std::span<const double> j_ce,
                                    double eta_lr, double eta_le);
LagrangeMultipliers lagrange_update(const LagrangeMultipliers& lambdas,
                                    const EpisodeTrace& trace, int num_slots,
                                    double eta_lr, double eta_le);

// Welford running mean / variance.
struct RunningStats {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x);
  double stddev() const;
};

struct LrcppoState {
  Mlp critic;
  GaussianPolicy actor_target;
  GaussianPolicy actor_behavior;
  LagrangeMultipliers multipliers;
  AdaptiveStep critic_step;
  AdaptiveStep actor_step;
  RunningStats reward_stats;
  std::vector<double> j_cr_estimate;
  std::vector<double> j_ce_estimate;
  long updates = 0;
  long syncs = 0;
  int episode = 0;
  Rng rng;
};

// Copies the target actor into the behavior actor.
void sync_behavior(LrcppoState& state);

/// Variations of the training loop used by the comparison schemes.
struct TrainingHooks {
  // Applied to every action after sampling (and to evaluation actions).
  std::function<void(const State&, Action&, Rng&)> override_action;
  // Action dimensions set by override_action; excluded from densities.
  std::vector<bool> fixed_dims;
  // Multipliers stay at their initial value (unconstrained or reward shaping).
  bool freeze_multipliers = false;
  std::optional<LagrangeMultipliers> initial_multipliers;
};

struct EpisodeLog {
  int episode = 0;
  double throughput = 0.0;        // bit/s/Hz, mean per slot
  double min_avg_rate_bps = 0.0;
  double max_energy_j = 0.0;
  double lambda_r_mean = 0.0;     // after this episode's update
  double lambda_e_mean = 0.0;
  double critic_loss = 0.0;       // mean over the episode's updates
  double actor_surrogate = 0.0;
  int updates = 0;
};

void write_training_log_csv(std::ostream& os, std::span<const EpisodeLog> log);

class LrcppoTrainer {
 public:
  LrcppoTrainer(const Environment& env, TrainConfig config, std::uint64_t seed,
                TrainingHooks hooks = {});

  EpisodeLog run_episode();
  std::vector<EpisodeLog> train(int episodes);

  const LrcppoState& state() const { return state_; }
  LrcppoState& mutable_state() { return state_; }
  const TrainConfig& config() const { return config_; }
  const TrainingHooks& hooks() const { return hooks_; }
  const EpisodeTrace& last_trace() const { return last_trace_; }

  // Acts with the squashed mean of the target actor, then the hooks' override.
  Policy deterministic_policy() const;

  // Everything needed to continue training bit-identically, except hooks.
  nlohmann::json checkpoint() const;
  void restore(const nlohmann::json& checkpoint);

 private:
  double update_from_batch(double& critic_loss_out);

  const Environment* env_;
  TrainConfig config_;
  TrainingHooks hooks_;
  LrcppoState state_;
  Batch batch_;
  EpisodeTrace last_trace_;
};

struct TrainResult {
  GaussianPolicy policy;
  std::vector<EpisodeLog> log;
  LagrangeMultipliers multipliers;
};

TrainResult train(const Environment& env, const TrainConfig& config, std::uint64_t seed,
                  const TrainingHooks& hooks = {});

}  // namespace starris
