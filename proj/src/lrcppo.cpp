#include "starris/lrcppo.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <ostream>

#include "starris/errors.hpp"

namespace starris {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

// log(1 - tanh(u)^2) without cancellation for large |u|.
double log_sech2(double u) {
  const double a = std::abs(u);
  return 2.0 * (std::numbers::ln2 - a - std::log1p(std::exp(-2.0 * a)));
}

bool is_fixed(const std::vector<bool>& fixed, int d) {
  return d < static_cast<int>(fixed.size()) && fixed[d];
}

nlohmann::json to_json_vec(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd from_json_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

LagrangeMultipliers LagrangeMultipliers::zeros(int num_ues) {
  return uniform(num_ues, 0.0, 0.0);
}

LagrangeMultipliers LagrangeMultipliers::uniform(int num_ues, double rate, double energy) {
  LagrangeMultipliers l;
  l.lambda_r.assign(num_ues, rate);
  l.lambda_e.assign(num_ues, energy);
  return l;
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& m) { throw ConfigError("train config: " + m); };
  if (!(eta_c > 0.0) || !(eta_a > 0.0)) bad("learning rates must be positive");
  if (eta_lr < 0.0 || eta_le < 0.0) bad("multiplier rates must be non-negative");
  if (!(eta_c > eta_a)) bad("critic rate must exceed actor rate");
  if (!(eta_a > std::max(eta_lr, eta_le))) bad("actor rate must exceed multiplier rates");
  if (!(gamma >= 0.0 && gamma <= 1.0)) bad("gamma outside [0, 1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) bad("epsilon outside (0, 1)");
  if (batch_size < 1) bad("batch_size < 1");
  if (sync_interval < 1) bad("sync_interval < 1");
  if (episodes < 0) bad("episodes < 0");
  for (int h : hidden)
    if (h < 1) bad("hidden layer width < 1");
  if (!(min_log_std < max_log_std)) bad("log-stddev bounds inverted");
  if (!(init_log_std >= min_log_std && init_log_std <= max_log_std))
    bad("init_log_std outside its bounds");
  if (!(constraint_averaging > 0.0 && constraint_averaging <= 1.0))
    bad("constraint_averaging outside (0, 1]");
  if (!(final_log_std >= min_log_std)) bad("final_log_std below min_log_std");
  if (!(mean_bound >= 0.0)) bad("mean_bound must be non-negative");
}

double TrainConfig::log_std_cap(int episode) const {
  if (final_log_std >= init_log_std || episodes <= 1) return max_log_std;
  const double t = std::clamp(static_cast<double>(episode) / (episodes - 1), 0.0, 1.0);
  return std::min(max_log_std, init_log_std + t * (final_log_std - init_log_std));
}

MultiplierScale multiplier_scale(const ScenarioConfig& s) {
  const double n = s.num_slots;
  MultiplierScale m;
  m.rate = s.r_min > 0.0 ? 1.0 / (s.r_min * s.r_min) : 0.0;
  m.energy = s.e_max > 0.0 ? n * n / (s.e_max * s.e_max) : 0.0;
  return m;
}

LagrangeMultipliers unit_penalty_weights(const ScenarioConfig& s) {
  const double chi_r = s.r_min > 0.0 ? 1.0 / s.r_min : 0.0;
  const double chi_e = s.e_max > 0.0 ? s.num_slots / s.e_max : 0.0;
  return LagrangeMultipliers::uniform(s.num_ues, chi_r, chi_e);
}

double penalized_reward(double reward, std::span<const double> c_r, std::span<const double> c_e,
                        const LagrangeMultipliers& l) {
  if (c_r.size() != l.lambda_r.size() || c_e.size() != l.lambda_e.size())
    throw ShapeError("penalized_reward: constraint/multiplier length mismatch");
  double r = reward;
  for (std::size_t k = 0; k < c_r.size(); ++k) r -= l.lambda_r[k] * c_r[k];
  for (std::size_t k = 0; k < c_e.size(); ++k) r -= l.lambda_e[k] * c_e[k];
  return r;
}

Eigen::Vector2d observe(const State& s, double area_size) {
  return Eigen::Vector2d(s.x / area_size, s.y / area_size);
}

double critic_value(const Mlp& critic, const Eigen::Vector2d& obs) {
  return critic.forward(obs)(0, 0);
}

std::vector<double> critic_targets(std::span<const double> rewards, double bootstrap,
                                   double gamma) {
  if (rewards.empty()) throw UsageError("critic_targets: empty batch");
  std::vector<double> out(rewards.size());
  double next = bootstrap;
  for (std::size_t j = rewards.size(); j-- > 0;) {
    next = rewards[j] + gamma * next;
    out[j] = next;
  }
  return out;
}

LossAndGradient critic_loss(const Mlp& critic, const Eigen::MatrixXd& obs,
                            std::span<const double> targets) {
  const auto b = static_cast<Eigen::Index>(targets.size());
  if (obs.cols() != b || b == 0) throw ShapeError("critic_loss: batch shape mismatch");
  Mlp::Tape tape;
  const Eigen::MatrixXd v = critic.forward(obs, tape);
  Eigen::MatrixXd d(1, b);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < b; ++j) {
    const double e = v(0, j) - targets[j];
    loss += e * e;
    d(0, j) = 2.0 * e / static_cast<double>(b);
  }
  return {loss / static_cast<double>(b), critic.backward(tape, d)};
}

double critic_update(Mlp& critic, AdaptiveStep& step, const Eigen::MatrixXd& obs,
                     std::span<const double> targets, double eta_c) {
  auto lg = critic_loss(critic, obs, targets);
  if (!std::isfinite(lg.value) || !lg.gradient.allFinite())
    throw TrainingFault("critic loss is not finite");
  Eigen::VectorXd p = critic.flatten();
  step.apply(p, lg.gradient, eta_c, -1.0);
  critic.assign(p);
  if (!critic.all_finite()) throw TrainingFault("critic parameters diverged");
  return lg.value;
}

// ---------------------------------------------------------------- policy

GaussianPolicy::GaussianPolicy(const ActionLayout& layout, const std::vector<int>& hidden,
                               double init_log_std, double mean_bound)
    : mean_bound(mean_bound), lower_(layout.lower()), upper_(layout.upper()), periodic_(layout.periodic()) {
  std::vector<int> sizes{2};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(layout.dim());
  mean_net = Mlp(sizes);
  log_std = Eigen::VectorXd::Constant(layout.dim(), init_log_std);
}

void GaussianPolicy::init(Rng& rng, bool spread_angles) {
  mean_net.init(rng, 0.01);
  if (!spread_angles) return;
  auto& bias = mean_net.biases.back();
  for (int d = 0; d < action_dim(); ++d) {
    if (!periodic_[d]) continue;
    const double mu = std::atanh(uniform(rng, -0.9, 0.9));
    bias[d] = mean_bound > 0.0 ? mean_bound * std::atanh(mu / mean_bound) : mu;
  }
}

Eigen::VectorXd GaussianPolicy::flatten() const {
  Eigen::VectorXd out(num_params());
  const auto n = static_cast<Eigen::Index>(mean_net.num_params());
  out.head(n) = mean_net.flatten();
  out.tail(log_std.size()) = log_std;
  return out;
}

void GaussianPolicy::assign(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != num_params())
    throw ShapeError("GaussianPolicy::assign: wrong parameter count");
  const auto n = static_cast<Eigen::Index>(mean_net.num_params());
  mean_net.assign(flat.head(n));
  log_std = flat.tail(log_std.size());
}

bool GaussianPolicy::all_finite() const { return mean_net.all_finite() && log_std.allFinite(); }

bool GaussianPolicy::operator==(const GaussianPolicy& o) const {
  return mean_net == o.mean_net && log_std.size() == o.log_std.size() &&
         log_std == o.log_std && mean_bound == o.mean_bound && lower_ == o.lower_ && upper_ == o.upper_ &&
         periodic_ == o.periodic_;
}

Eigen::MatrixXd GaussianPolicy::raw_mean(const Eigen::MatrixXd& obs) const {
  Eigen::MatrixXd z = mean_net.forward(obs);
  if (mean_bound > 0.0) z = mean_bound * (z / mean_bound).array().tanh();
  return z;
}

std::vector<double> GaussianPolicy::squash(const Eigen::VectorXd& raw) const {
  const int n = action_dim();
  if (raw.size() != n) throw ShapeError("squash: wrong action dimension");
  std::vector<double> a(n);
  for (int d = 0; d < n; ++d) {
    const double lo = lower_[d];
    const double hi = upper_[d];
    double v = lo + (hi - lo) * 0.5 * (1.0 + std::tanh(raw[d]));
    v = std::clamp(v, lo, hi);
    if (periodic_[d] && v >= hi) v = lo;
    a[d] = v;
  }
  return a;
}

double GaussianPolicy::log_jacobian(const Eigen::VectorXd& raw,
                                    const std::vector<bool>& fixed) const {
  double s = 0.0;
  for (int d = 0; d < action_dim(); ++d) {
    if (is_fixed(fixed, d)) continue;
    s += std::log(0.5 * (upper_[d] - lower_[d])) + log_sech2(raw[d]);
  }
  return s;
}

GaussianPolicy::Sample GaussianPolicy::sample(const Eigen::Vector2d& obs, Rng& rng) const {
  const Eigen::VectorXd mu = raw_mean(obs).col(0);
  Sample s;
  s.raw.resize(mu.size());
  for (Eigen::Index d = 0; d < mu.size(); ++d)
    s.raw[d] = mu[d] + std::exp(log_std[d]) * standard_normal(rng);
  s.action = squash(s.raw);
  return s;
}

double GaussianPolicy::raw_log_prob(const Eigen::Vector2d& obs, const Eigen::VectorXd& raw,
                                    const std::vector<bool>& fixed) const {
  const Eigen::VectorXd mu = raw_mean(obs).col(0);
  double lp = 0.0;
  for (int d = 0; d < action_dim(); ++d) {
    if (is_fixed(fixed, d)) continue;
    const double z = (raw[d] - mu[d]) * std::exp(-log_std[d]);
    lp += -0.5 * z * z - log_std[d] - 0.5 * kLog2Pi;
  }
  return lp;
}

double GaussianPolicy::log_prob(const Eigen::Vector2d& obs, const Eigen::VectorXd& raw,
                                const std::vector<bool>& fixed) const {
  return raw_log_prob(obs, raw, fixed) - log_jacobian(raw, fixed);
}

PolicyOutput policy_forward(const GaussianPolicy& policy, const Eigen::Vector2d& obs) {
  PolicyOutput out;
  out.mean = policy.squash(policy.raw_mean(obs).col(0));
  out.stddev.resize(policy.action_dim());
  for (int d = 0; d < policy.action_dim(); ++d) out.stddev[d] = std::exp(policy.log_std[d]);
  return out;
}

// ---------------------------------------------------------------- actor

double clipped_surrogate(double logp_target, double logp_behavior, double advantage,
                         double epsilon, SurrogateForm form) {
  const double rho = std::exp(logp_target - logp_behavior);
  const double clipped = std::clamp(rho, 1.0 - epsilon, 1.0 + epsilon);
  if (form == SurrogateForm::kClippedRatio) return std::min(rho, clipped) * advantage;
  return std::min(rho * advantage, clipped * advantage);
}

void Batch::clear() {
  obs.clear();
  raw_actions.clear();
  rewards.clear();
  next_obs.clear();
  behavior_logp.clear();
}

Eigen::MatrixXd Batch::obs_matrix() const {
  Eigen::MatrixXd m(2, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t j = 0; j < obs.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = obs[j];
  return m;
}

LossAndGradient actor_objective(const GaussianPolicy& policy, const Batch& batch,
                                std::span<const double> advantages, double epsilon,
                                SurrogateForm form, const std::vector<bool>& fixed) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  if (b == 0 || advantages.size() != batch.size() || batch.behavior_logp.size() != batch.size())
    throw ShapeError("actor_objective: batch shape mismatch");
  const int n = policy.action_dim();
  Mlp::Tape tape;
  Eigen::MatrixXd mu = policy.mean_net.forward(batch.obs_matrix(), tape);
  Eigen::MatrixXd dmu_dz = Eigen::MatrixXd::Ones(n, b);
  if (policy.mean_bound > 0.0) {
    const Eigen::ArrayXXd t = (mu / policy.mean_bound).array().tanh();
    mu = policy.mean_bound * t;
    dmu_dz = 1.0 - t.square();
  }
  const Eigen::VectorXd inv_var = (-2.0 * policy.log_std.array()).exp();

  Eigen::MatrixXd d_mu = Eigen::MatrixXd::Zero(n, b);
  Eigen::VectorXd d_log_std = Eigen::VectorXd::Zero(n);
  double total = 0.0;
  for (Eigen::Index j = 0; j < b; ++j) {
    const Eigen::VectorXd& u = batch.raw_actions[j];
    double lp = 0.0;
    for (int d = 0; d < n; ++d) {
      if (is_fixed(fixed, d)) continue;
      const double e = u[d] - mu(d, j);
      lp += -0.5 * e * e * inv_var[d] - policy.log_std[d] - 0.5 * kLog2Pi;
    }
    const double a = advantages[j];
    const double lb = batch.behavior_logp[j];
    total += clipped_surrogate(lp, lb, a, epsilon, form);

    const double rho = std::exp(lp - lb);
    bool active;
    if (form == SurrogateForm::kClippedRatio) {
      active = rho < 1.0 + epsilon;
    } else {
      active = (a > 0.0 && rho < 1.0 + epsilon) || (a < 0.0 && rho > 1.0 - epsilon);
    }
    if (!active) continue;
    const double coef = a * rho / static_cast<double>(b);
    for (int d = 0; d < n; ++d) {
      if (is_fixed(fixed, d)) continue;
      const double e = u[d] - mu(d, j);
      d_mu(d, j) = coef * e * inv_var[d];
      d_log_std[d] += coef * (e * e * inv_var[d] - 1.0);
    }
  }
  LossAndGradient out;
  out.value = total / static_cast<double>(b);
  out.gradient.resize(static_cast<Eigen::Index>(policy.num_params()));
  const auto np = static_cast<Eigen::Index>(policy.mean_net.num_params());
  out.gradient.head(np) = policy.mean_net.backward(tape, d_mu.cwiseProduct(dmu_dz));
  out.gradient.tail(n) = d_log_std;
  return out;
}

double actor_update(GaussianPolicy& policy, AdaptiveStep& step, const Batch& batch,
                    std::span<const double> advantages, double eta_a, double epsilon,
                    SurrogateForm form, const std::vector<bool>& fixed, double min_log_std,
                    double max_log_std) {
  auto lg = actor_objective(policy, batch, advantages, epsilon, form, fixed);
  if (!std::isfinite(lg.value) || !lg.gradient.allFinite())
    throw TrainingFault("actor gradient is not finite");
  Eigen::VectorXd p = policy.flatten();
  step.apply(p, lg.gradient, eta_a, +1.0);
  policy.assign(p);
  policy.log_std = policy.log_std.cwiseMax(min_log_std).cwiseMin(max_log_std);
  if (!policy.all_finite()) throw TrainingFault("actor parameters diverged");
  return lg.value;
}

// ---------------------------------------------------------------- multipliers

LagrangeMultipliers lagrange_update(const LagrangeMultipliers& l, std::span<const double> j_cr,
                                    std::span<const double> j_ce, double eta_lr,
                                    double eta_le) {
  if (j_cr.size() != l.lambda_r.size() || j_ce.size() != l.lambda_e.size())
    throw ShapeError("lagrange_update: constraint/multiplier length mismatch");
  LagrangeMultipliers out = l;
  for (std::size_t k = 0; k < j_cr.size(); ++k)
    out.lambda_r[k] = std::max(0.0, l.lambda_r[k] + eta_lr * j_cr[k]);
  for (std::size_t k = 0; k < j_ce.size(); ++k)
    out.lambda_e[k] = std::max(0.0, l.lambda_e[k] + eta_le * j_ce[k]);
  return out;
}

LagrangeMultipliers lagrange_update(const LagrangeMultipliers& l, const EpisodeTrace& trace,
                                    int num_slots, double eta_lr, double eta_le) {
  if (trace.length() != num_slots)
    throw UsageError("lagrange_update: trace does not cover the full horizon");
  return lagrange_update(l, trace.j_cr, trace.j_ce, eta_lr, eta_le);
}

void RunningStats::push(double x) {
  count += 1.0;
  const double delta = x - mean;
  mean += delta / count;
  m2 += delta * (x - mean);
}

double RunningStats::stddev() const {
  if (count < 2.0) return 1.0;
  const double s = std::sqrt(m2 / (count - 1.0));
  return s > 1e-8 ? s : 1.0;
}

void sync_behavior(LrcppoState& state) {
  state.actor_behavior = state.actor_target;
  ++state.syncs;
}

void write_training_log_csv(std::ostream& os, std::span<const EpisodeLog> log) {
  os << "episode,throughput_bps_hz,min_avg_rate_bps,max_energy_j,lambda_r_mean,"
        "lambda_e_mean,critic_loss,actor_surrogate,updates\n";
  os << std::setprecision(17);
  for (const auto& e : log) {
    os << e.episode << ',' << e.throughput << ',' << e.min_avg_rate_bps << ','
       << e.max_energy_j << ',' << e.lambda_r_mean << ',' << e.lambda_e_mean << ','
       << e.critic_loss << ',' << e.actor_surrogate << ',' << e.updates << '\n';
  }
}

// ---------------------------------------------------------------- trainer

LrcppoTrainer::LrcppoTrainer(const Environment& env, TrainConfig config, std::uint64_t seed,
                             TrainingHooks hooks)
    : env_(&env), config_(std::move(config)), hooks_(std::move(hooks)) {
  config_.validate();
  const auto& layout = env.layout();
  const int K = layout.num_ues();
  if (!hooks_.fixed_dims.empty() && static_cast<int>(hooks_.fixed_dims.size()) != layout.dim())
    throw ConfigError("fixed_dims length does not match the action dimension");

  Rng init_rng(derive_seed(seed, 1));
  std::vector<int> critic_sizes{2};
  critic_sizes.insert(critic_sizes.end(), config_.hidden.begin(), config_.hidden.end());
  critic_sizes.push_back(1);
  state_.critic = Mlp(critic_sizes);
  state_.critic.init(init_rng);
  state_.actor_target = GaussianPolicy(layout, config_.hidden, config_.init_log_std, config_.mean_bound);
  state_.actor_target.init(init_rng, config_.spread_initial_angles);
  state_.actor_behavior = state_.actor_target;
  state_.multipliers = hooks_.initial_multipliers.value_or(LagrangeMultipliers::zeros(K));
  if (static_cast<int>(state_.multipliers.lambda_r.size()) != K ||
      static_cast<int>(state_.multipliers.lambda_e.size()) != K)
    throw ConfigError("initial multipliers have the wrong length");
  state_.critic_step = AdaptiveStep(state_.critic.num_params(), config_.step_rule);
  state_.actor_step = AdaptiveStep(state_.actor_target.num_params(), config_.step_rule);
  state_.rng = Rng(derive_seed(seed, 2));
}

double LrcppoTrainer::update_from_batch(double& critic_loss_out) {
  const int b = static_cast<int>(batch_.size());
  std::vector<double> rewards(batch_.rewards);
  if (config_.normalize_rewards) {
    const double m = state_.reward_stats.mean;
    const double s = state_.reward_stats.stddev();
    for (double& r : rewards) r = (r - m) / s;
  }
  const Eigen::MatrixXd obs = batch_.obs_matrix();
  const double bootstrap = critic_value(state_.critic, batch_.next_obs.back());
  const auto targets = critic_targets(rewards, bootstrap, config_.gamma);
  critic_loss_out =
      critic_update(state_.critic, state_.critic_step, obs, targets, config_.eta_c);

  const Eigen::MatrixXd v = state_.critic.forward(obs);
  std::vector<double> adv(b);
  for (int j = 0; j < b; ++j) adv[j] = targets[j] - v(0, j);
  if (config_.normalize_advantages && b > 1) {
    const double m = mean_of(adv);
    double var = 0.0;
    for (double a : adv) var += (a - m) * (a - m);
    const double s = std::sqrt(var / (b - 1));
    for (double& a : adv) a = s > 1e-8 ? (a - m) / s : 0.0;
  }
  const double surrogate = actor_update(
      state_.actor_target, state_.actor_step, batch_, adv, config_.eta_a, config_.epsilon,
      config_.surrogate, hooks_.fixed_dims, config_.min_log_std,
      config_.log_std_cap(state_.episode));

  ++state_.updates;
  if (state_.updates % config_.sync_interval == 0) sync_behavior(state_);
  batch_.clear();
  return surrogate;
}

EpisodeLog LrcppoTrainer::run_episode() {
  const Environment& env = *env_;
  const auto& layout = env.layout();
  const double area = env.scenario().config.area_size;
  const int N = env.num_slots();

  const double cap = config_.log_std_cap(state_.episode);
  for (auto* p : {&state_.actor_target, &state_.actor_behavior})
    p->log_std = p->log_std.cwiseMin(cap);

  EpisodeTrace trace;
  State s = env.reset();
  double loss_sum = 0.0;
  double surrogate_sum = 0.0;
  int updates = 0;
  batch_.clear();
  for (int n = 0; n < N; ++n) {
    const Eigen::Vector2d obs = observe(s, area);
    auto smp = state_.actor_behavior.sample(obs, state_.rng);
    Action action = layout.unflatten(smp.action);
    if (hooks_.override_action) hooks_.override_action(s, action, state_.rng);
    StepOutcome out = env.step(s, action, state_.rng);

    const double r_hat =
        penalized_reward(out.reward, out.c_r, out.c_e, state_.multipliers);
    state_.reward_stats.push(r_hat);
    batch_.obs.push_back(obs);
    batch_.raw_actions.push_back(smp.raw);
    batch_.rewards.push_back(r_hat);
    batch_.next_obs.push_back(observe(out.next_state, area));
    batch_.behavior_logp.push_back(
        state_.actor_behavior.raw_log_prob(obs, smp.raw, hooks_.fixed_dims));
    s = out.next_state;
    trace.append(std::move(out));

    if (static_cast<int>(batch_.size()) == config_.batch_size || n == N - 1) {
      double loss = 0.0;
      surrogate_sum += update_from_batch(loss);
      loss_sum += loss;
      ++updates;
    }
  }

  if (!hooks_.freeze_multipliers) {
    const double w = state_.episode == 0 ? 1.0 : config_.constraint_averaging;
    if (state_.j_cr_estimate.empty()) {
      state_.j_cr_estimate = trace.j_cr;
      state_.j_ce_estimate = trace.j_ce;
    } else {
      for (std::size_t k = 0; k < trace.j_cr.size(); ++k) {
        state_.j_cr_estimate[k] = (1.0 - w) * state_.j_cr_estimate[k] + w * trace.j_cr[k];
        state_.j_ce_estimate[k] = (1.0 - w) * state_.j_ce_estimate[k] + w * trace.j_ce[k];
      }
    }
    if (trace.length() != N) throw UsageError("episode ended early");
    MultiplierScale scale{1.0, 1.0};
    if (config_.scale_multiplier_rates) scale = multiplier_scale(env.scenario().config);
    state_.multipliers =
        lagrange_update(state_.multipliers, state_.j_cr_estimate, state_.j_ce_estimate,
                        config_.eta_lr * scale.rate, config_.eta_le * scale.energy);
  }

  EpisodeLog log;
  log.episode = state_.episode;
  log.throughput = trace.throughput();
  const auto rates = trace.average_rate_bps();
  const auto energy = trace.total_energy();
  log.min_avg_rate_bps = *std::min_element(rates.begin(), rates.end());
  log.max_energy_j = *std::max_element(energy.begin(), energy.end());
  log.lambda_r_mean = mean_of(state_.multipliers.lambda_r);
  log.lambda_e_mean = mean_of(state_.multipliers.lambda_e);
  log.critic_loss = updates ? loss_sum / updates : 0.0;
  log.actor_surrogate = updates ? surrogate_sum / updates : 0.0;
  log.updates = updates;
  ++state_.episode;
  last_trace_ = std::move(trace);
  return log;
}

std::vector<EpisodeLog> LrcppoTrainer::train(int episodes) {
  std::vector<EpisodeLog> log;
  log.reserve(episodes);
  for (int g = 0; g < episodes; ++g) log.push_back(run_episode());
  return log;
}

Policy LrcppoTrainer::deterministic_policy() const {
  const double area = env_->scenario().config.area_size;
  const ActionLayout layout = env_->layout();
  const GaussianPolicy policy = state_.actor_target;
  const auto hook = hooks_.override_action;
  return [=](const State& s, Rng& rng) {
    Action a = layout.unflatten(policy.squash(policy.raw_mean(observe(s, area)).col(0)));
    if (hook) hook(s, a, rng);
    return a;
  };
}

nlohmann::json LrcppoTrainer::checkpoint() const {
  nlohmann::json j;
  j["version"] = 1;
  j["critic"] = to_json_vec(state_.critic.flatten());
  j["actor_target"] = to_json_vec(state_.actor_target.flatten());
  j["actor_behavior"] = to_json_vec(state_.actor_behavior.flatten());
  j["lambda_r"] = state_.multipliers.lambda_r;
  j["lambda_e"] = state_.multipliers.lambda_e;
  j["critic_step"] = {{"sq", to_json_vec(state_.critic_step.second_moment())},
                      {"steps", state_.critic_step.steps()}};
  j["actor_step"] = {{"sq", to_json_vec(state_.actor_step.second_moment())},
                     {"steps", state_.actor_step.steps()}};
  j["reward_stats"] = {state_.reward_stats.count, state_.reward_stats.mean,
                       state_.reward_stats.m2};
  j["j_cr_estimate"] = state_.j_cr_estimate;
  j["j_ce_estimate"] = state_.j_ce_estimate;
  j["updates"] = state_.updates;
  j["syncs"] = state_.syncs;
  j["episode"] = state_.episode;
  j["rng"] = serialize_rng(state_.rng);
  j["config"] = {{"eta_c", config_.eta_c},       {"eta_a", config_.eta_a},
                 {"eta_lr", config_.eta_lr},     {"eta_le", config_.eta_le},
                 {"scale_multiplier_rates", config_.scale_multiplier_rates},
                 {"gamma", config_.gamma},       {"epsilon", config_.epsilon},
                 {"batch_size", config_.batch_size},
                 {"sync_interval", config_.sync_interval},
                 {"hidden", config_.hidden},
                 {"mean_bound", config_.mean_bound}};
  return j;
}

void LrcppoTrainer::restore(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw ConfigError("unsupported checkpoint version");
    LrcppoState s = state_;
    s.critic.assign(from_json_vec(j.at("critic")));
    s.actor_target.assign(from_json_vec(j.at("actor_target")));
    s.actor_behavior.assign(from_json_vec(j.at("actor_behavior")));
    s.multipliers.lambda_r = j.at("lambda_r").get<std::vector<double>>();
    s.multipliers.lambda_e = j.at("lambda_e").get<std::vector<double>>();
    s.critic_step.restore(from_json_vec(j.at("critic_step").at("sq")),
                          j.at("critic_step").at("steps").get<long>());
    s.actor_step.restore(from_json_vec(j.at("actor_step").at("sq")),
                         j.at("actor_step").at("steps").get<long>());
    const auto rs = j.at("reward_stats").get<std::vector<double>>();
    if (rs.size() != 3) throw ConfigError("corrupt reward statistics");
    s.reward_stats = {rs[0], rs[1], rs[2]};
    s.j_cr_estimate = j.at("j_cr_estimate").get<std::vector<double>>();
    s.j_ce_estimate = j.at("j_ce_estimate").get<std::vector<double>>();
    s.updates = j.at("updates").get<long>();
    s.syncs = j.at("syncs").get<long>();
    s.episode = j.at("episode").get<int>();
    s.rng = deserialize_rng(j.at("rng").get<std::string>());
    const auto K = state_.multipliers.lambda_r.size();
    if (s.multipliers.lambda_r.size() != K || s.multipliers.lambda_e.size() != K)
      throw ConfigError("checkpoint multipliers have the wrong length");
    state_ = std::move(s);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("checkpoint does not match the network: ") + e.what());
  }
}

TrainResult train(const Environment& env, const TrainConfig& config, std::uint64_t seed,
                  const TrainingHooks& hooks) {
  LrcppoTrainer trainer(env, config, seed, hooks);
  TrainResult r;
  r.log = trainer.train(config.episodes);
  r.policy = trainer.state().actor_target;
  r.multipliers = trainer.state().multipliers;
  return r;
}

}  // namespace starris
