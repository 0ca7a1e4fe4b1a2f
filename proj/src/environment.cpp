#include "starris/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "starris/errors.hpp"

namespace starris {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_range(double v, double lo, double hi, bool open_top, const std::string& what) {
  const bool ok = std::isfinite(v) && v >= lo && (open_top ? v < hi : v <= hi);
  if (!ok) throw ValidationError("action component out of range: " + what);
}

}  // namespace

ActionLayout::ActionLayout(int num_ues, int num_ris, int elements, double v_max, double p_max)
    : K_(num_ues), I_(num_ris), M_(elements) {
  const int n = dim();
  lower_.assign(n, 0.0);
  upper_.assign(n, kTwoPi);
  periodic_.assign(n, true);
  upper_[speed()] = v_max;
  periodic_[speed()] = false;
  for (int k = 0; k < K_; ++k) {
    upper_[power(k)] = p_max;
    periodic_[power(k)] = false;
  }
  for (int i = 0; i < I_; ++i) {
    upper_[split(i)] = 1.0;
    periodic_[split(i)] = false;
  }
}

std::vector<double> ActionLayout::flatten(const Action& a) const {
  std::vector<double> v(dim());
  v[heading()] = a.heading;
  v[speed()] = a.speed;
  for (int k = 0; k < K_; ++k) v[power(k)] = a.powers.at(k);
  for (int i = 0; i < I_; ++i) {
    v[split(i)] = a.splits.at(i);
    for (int m = 0; m < M_; ++m) {
      v[phase_r(i, m)] = a.phases.theta_r.at(i).at(m);
      v[phase_t(i, m)] = a.phases.theta_t.at(i).at(m);
    }
  }
  return v;
}

Action ActionLayout::unflatten(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != dim()) throw ShapeError("action vector has wrong length");
  Action a;
  a.heading = v[heading()];
  a.speed = v[speed()];
  a.powers.resize(K_);
  for (int k = 0; k < K_; ++k) a.powers[k] = v[power(k)];
  a.splits.resize(I_);
  a.phases = PhaseConfig::zeros(I_, M_);
  for (int i = 0; i < I_; ++i) {
    a.splits[i] = v[split(i)];
    for (int m = 0; m < M_; ++m) {
      a.phases.theta_r[i][m] = v[phase_r(i, m)];
      a.phases.theta_t[i][m] = v[phase_t(i, m)];
    }
  }
  return a;
}

void validate_action(const Action& a, const ActionLayout& layout) {
  const int K = layout.num_ues();
  const int I = layout.num_ris();
  const int M = layout.elements();
  if (static_cast<int>(a.powers.size()) != K || static_cast<int>(a.splits.size()) != I ||
      static_cast<int>(a.phases.theta_r.size()) != I ||
      static_cast<int>(a.phases.theta_t.size()) != I) {
    throw ShapeError("action has wrong shape");
  }
  check_range(a.heading, 0.0, kTwoPi, true, "heading");
  check_range(a.speed, 0.0, layout.upper()[layout.speed()], false, "speed");
  for (int k = 0; k < K; ++k) {
    check_range(a.powers[k], 0.0, layout.upper()[layout.power(k)], false,
                "power[" + std::to_string(k) + "]");
  }
  for (int i = 0; i < I; ++i) {
    check_range(a.splits[i], 0.0, 1.0, false, "split[" + std::to_string(i) + "]");
    if (static_cast<int>(a.phases.theta_r[i].size()) != M ||
        static_cast<int>(a.phases.theta_t[i].size()) != M) {
      throw ShapeError("phase vector has wrong length");
    }
    for (int m = 0; m < M; ++m) {
      check_range(a.phases.theta_r[i][m], 0.0, kTwoPi, true, "theta_r");
      check_range(a.phases.theta_t[i][m], 0.0, kTwoPi, true, "theta_t");
    }
  }
}

ImmediateConstraints immediate_constraints(std::span<const double> rates_bps,
                                           std::span<const double> powers,
                                           std::span<const TimeSplit> splits,
                                           const Association& association,
                                           double r_min, double e_max, int num_slots) {
  const auto energy = slot_energy(powers, splits, association);
  const double per_slot_budget = e_max / num_slots;
  ImmediateConstraints c;
  c.c_r.resize(rates_bps.size());
  c.c_e.resize(energy.size());
  for (std::size_t k = 0; k < rates_bps.size(); ++k) c.c_r[k] = r_min - rates_bps[k];
  for (std::size_t k = 0; k < energy.size(); ++k) c.c_e[k] = energy[k] - per_slot_budget;
  return c;
}

void EpisodeTrace::append(StepOutcome step) {
  if (steps.empty()) {
    j_cr.assign(step.c_r.size(), 0.0);
    j_ce.assign(step.c_e.size(), 0.0);
  }
  j_r += step.reward;
  for (std::size_t k = 0; k < step.c_r.size(); ++k) j_cr[k] += step.c_r[k];
  for (std::size_t k = 0; k < step.c_e.size(); ++k) j_ce[k] += step.c_e[k];
  steps.push_back(std::move(step));
}

double EpisodeTrace::throughput() const {
  return steps.empty() ? 0.0 : j_r / static_cast<double>(steps.size());
}

std::vector<double> EpisodeTrace::average_rate_bps() const {
  if (steps.empty()) return {};
  std::vector<double> avg(steps.front().rates_bps.size(), 0.0);
  for (const auto& s : steps) {
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += s.rates_bps[k];
  }
  for (auto& v : avg) v /= static_cast<double>(steps.size());
  return avg;
}

std::vector<double> EpisodeTrace::total_energy() const {
  if (steps.empty()) return {};
  std::vector<double> tot(steps.front().energies.size(), 0.0);
  for (const auto& s : steps) {
    for (std::size_t k = 0; k < tot.size(); ++k) tot[k] += s.energies[k];
  }
  return tot;
}

void EpisodeTrace::write_csv(std::ostream& os) const {
  const std::size_t K = steps.empty() ? 0 : steps.front().rates_bps.size();
  const std::size_t I = steps.empty() ? 0 : steps.front().splits.size();
  os << "slot,x_m,y_m,reward_bps_hz";
  for (const char* col : {"rate_bps", "energy_j", "c_r_bps", "c_e_j", "power_w"}) {
    for (std::size_t k = 0; k < K; ++k) os << ',' << col << '_' << k;
  }
  for (std::size_t i = 0; i < I; ++i) os << ",split_left_" << i;
  os << '\n';
  const auto old_precision = os.precision(17);
  for (std::size_t n = 0; n < steps.size(); ++n) {
    const auto& s = steps[n];
    os << n << ',' << s.next_state.x << ',' << s.next_state.y << ',' << s.reward;
    for (const auto* v : {&s.rates_bps, &s.energies, &s.c_r, &s.c_e, &s.powers, &s.splits}) {
      for (double x : *v) os << ',' << x;
    }
    os << '\n';
  }
  os.precision(old_precision);
}

Environment::Environment(Scenario scenario, EnvOptions options)
    : scenario_(std::move(scenario)),
      association_(associate(scenario_)),
      layout_(scenario_.num_ues(), scenario_.num_ris(), scenario_.elements(),
              scenario_.config.v_max, scenario_.config.p_max),
      options_(options) {}

State Environment::reset() const {
  return {scenario_.config.uav_start.x, scenario_.config.uav_start.y, 0};
}

State Environment::move(const State& state, double heading, double speed) const {
  const double area = scenario_.config.area_size;
  const double step = speed * scenario_.config.slot_length;
  State next;
  next.x = std::clamp(state.x + step * std::cos(heading), 0.0, area);
  next.y = std::clamp(state.y + step * std::sin(heading), 0.0, area);
  next.slot = state.slot + 1;
  return next;
}

StepOutcome Environment::step(const State& state, const Action& action, Rng& rng) const {
  if (state.slot < 0 || state.slot >= num_slots()) {
    throw UsageError("step called outside the episode horizon");
  }
  validate_action(action, layout_);
  const auto& c = scenario_.config;
  const int K = scenario_.num_ues();
  const int I = scenario_.num_ris();

  StepOutcome out;
  out.next_state = move(state, action.heading, action.speed);
  const Position3D uav{out.next_state.x, out.next_state.y, c.uav_height};
  const auto chan = realize_slot(scenario_, association_, uav, action.phases, rng, options_.surface);

  out.gains.resize(K);
  for (int k = 0; k < K; ++k) out.gains[k] = std::norm(chan.composite[k]);
  out.powers = action.powers;
  out.splits = action.splits;

  std::vector<TimeSplit> splits;
  splits.reserve(I);
  for (int i = 0; i < I; ++i) splits.emplace_back(action.splits[i], c.slot_length);

  out.rates_se.assign(K, 0.0);
  std::vector<double> g, p;
  for (int i = 0; i < I; ++i) {
    for (Side side : {Side::kLeft, Side::kRight}) {
      const auto& members = association_.cluster(i, side);
      if (members.empty()) continue;
      g.clear();
      p.clear();
      for (int k : members) {
        g.push_back(out.gains[k]);
        p.push_back(action.powers[k]);
      }
      const double fraction = splits[i].tau(side) / c.slot_length;
      const auto r = options_.access == AccessScheme::kNoma
                         ? noma_cluster_rates(g, p, fraction, I, c.noise_power)
                         : oma_cluster_rates(g, p, fraction, I, c.noise_power);
      for (std::size_t j = 0; j < members.size(); ++j) out.rates_se[members[j]] = r[j];
    }
  }

  out.rates_bps.resize(K);
  out.reward = 0.0;
  for (int k = 0; k < K; ++k) {
    out.reward += out.rates_se[k];
    out.rates_bps[k] = c.bandwidth * out.rates_se[k];
  }
  out.energies = slot_energy(action.powers, splits, association_);
  auto cons = immediate_constraints(out.rates_bps, action.powers, splits, association_,
                                    c.r_min, c.e_max, c.num_slots);
  out.c_r = std::move(cons.c_r);
  out.c_e = std::move(cons.c_e);
  return out;
}

EpisodeTrace rollout(const Policy& policy, const Environment& env, Rng& rng) {
  EpisodeTrace trace;
  State s = env.reset();
  for (int n = 0; n < env.num_slots(); ++n) {
    const Action a = policy(s, rng);
    auto out = env.step(s, a, rng);
    s = out.next_state;
    trace.append(std::move(out));
  }
  return trace;
}

}  // namespace starris
