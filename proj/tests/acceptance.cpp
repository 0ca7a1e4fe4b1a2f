// Acceptance suite: one PASS/FAIL line per criterion. Arguments select a
// subset of criteria by number; with none, all eleven run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "gradcheck.hpp"
#include "starris/access.hpp"
#include "starris/channel.hpp"
#include "starris/experiment.hpp"
#include "starris/lrcppo.hpp"

using namespace starris;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ------------------------------------------------------------------ 1

Outcome sic_telescoping() {
  Rng rng(101);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + t % 6;
    std::vector<double> g(n), p(n);
    for (auto& x : g) x = std::exp(uniform(rng, -25, -12));
    for (auto& x : p) x = uniform(rng, 0, 1);
    const double s2 = 1e-9;
    double rx = 0.0;
    for (int k = 0; k < n; ++k) rx += p[k] * g[k];
    const double expect = std::log2(1.0 + rx / s2);
    const auto r = noma_cluster_rates(g, p, 1.0, 1, s2);
    const double got = std::accumulate(r.begin(), r.end(), 0.0);
    worst = std::max(worst, std::abs(got - expect) / std::max(expect, 1e-300));
  }
  return {worst < 1e-9, fmt("max relative error %.3g over 1000 clusters", worst)};
}

// ------------------------------------------------------------------ 2

Outcome composite_oracle() {
  Rng rng(202);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int M = 1 + t % 16;
    ComplexVector g(M), h(M);
    std::vector<double> tt(M), tr(M);
    for (int m = 0; m < M; ++m) {
      g[m] = complex_normal(rng) * uniform(rng, 0.1, 10);
      h[m] = complex_normal(rng) * uniform(rng, 0.1, 10);
      tt[m] = uniform(rng, 0, kTwoPi);
      tr[m] = uniform(rng, 0, kTwoPi);
    }
    const Complex d = complex_normal(rng);
    const int flag = t % 2;
    Complex oracle = d;
    for (int m = 0; m < M; ++m)
      oracle += std::conj(g[m]) * std::polar(1.0, flag ? tr[m] : tt[m]) * h[m];
    const Complex got = composite_channel(g, h, tt, tr, flag, d);
    worst = std::max(worst, std::abs(got - oracle) / std::max(1.0, std::abs(oracle)));
  }
  return {worst < 1e-12, fmt("max error %.3g over 1000 instances", worst)};
}

// ------------------------------------------------------------------ 3

Outcome rician_statistics() {
  const ScenarioConfig c = paper_preset();
  const Scenario sc = build_scenario(c, 0);
  const Position3D uav = c.uav_start;
  const auto& ue = sc.ues[0];
  const auto& ris = sc.ris[0];
  struct Link {
    const char* name;
    double d, cos, alpha, rician;
    int M;
  };
  const double d_ki = distance(ue, ris), d_iu = distance(ris, uav), d_ku = distance(ue, uav);
  const Link links[] = {
      {"ue-ris", d_ki, (ris.x - ue.x) / d_ki, c.alpha_ue_ris, c.rician_ue_ris, c.elements_per_ris},
      {"ris-ubs", d_iu, (uav.x - ris.x) / d_iu, c.alpha_ris_uav, c.rician_ris_uav,
       c.elements_per_ris},
      {"ue-ubs", d_ku, 1.0, c.alpha_ue_uav, c.rician_ue_uav, 1},
  };
  Rng rng(303);
  double worst = 0.0;
  std::string detail;
  for (const auto& l : links) {
    const double xi = large_scale_gain(l.d, l.alpha, c.ref_gain);
    const auto los = ula_los(l.d, l.cos, l.M, c.element_spacing(), c.wavelength());
    std::vector<double> power(l.M, 0.0);
    const int draws = 100000;
    for (int n = 0; n < draws; ++n) {
      const auto h = rician_sample(los, l.rician, xi, rng);
      for (int m = 0; m < l.M; ++m) power[m] += std::norm(h[m]) / draws;
    }
    double link_worst = 0.0;
    for (double p : power) link_worst = std::max(link_worst, std::abs(p / xi - 1.0));
    worst = std::max(worst, link_worst);
    detail += fmt("%s %.2f%% ", l.name, 100 * link_worst);
  }
  return {worst < 0.02, "max deviation of mean |h_m|^2 from xi: " + detail};
}

// ------------------------------------------------------------------ 4

Outcome gradient_checks() {
  Rng rng(404);
  double worst_critic = 0.0, worst_actor = 0.0;
  const ActionLayout layout(4, 2, 2, 10.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int h1 = 3 + trial % 6, h2 = 2 + trial % 5;

    Mlp critic({2, h1, h2, 1});
    critic.init(rng);
    Eigen::MatrixXd obs(2, 8);
    std::vector<double> targets(8);
    for (int j = 0; j < 8; ++j) {
      obs(0, j) = uniform(rng, 0, 1);
      obs(1, j) = uniform(rng, 0, 1);
      targets[j] = uniform(rng, -2, 2);
    }
    const auto cl = critic_loss(critic, obs, targets);
    Mlp cprobe = critic;
    worst_critic = std::max(
        worst_critic, starris::testing::max_relative_error(
                          cl.gradient,
                          [&](const Eigen::VectorXd& p) {
                            cprobe.assign(p);
                            return critic_loss(cprobe, obs, targets).value;
                          },
                          critic.flatten()));

    GaussianPolicy behavior(layout, {h1, h2}, -0.5, trial % 2 ? 2.0 : 0.0);
    behavior.init(rng, true);
    for (auto& W : behavior.mean_net.weights)
      for (Eigen::Index i = 0; i < W.size(); ++i) W(i) = uniform(rng, -1, 1);
    for (Eigen::Index d = 0; d < behavior.log_std.size(); ++d)
      behavior.log_std[d] = uniform(rng, -1.0, 0.0);
    GaussianPolicy target = behavior;
    Eigen::VectorXd p = target.flatten();
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] += uniform(rng, -0.02, 0.02);
    target.assign(p);
    std::vector<bool> fixed;
    if (trial % 4 == 0) {
      fixed.assign(layout.dim(), false);
      fixed[layout.phase_r(0, 0)] = fixed[layout.split(1)] = true;
    }
    Batch b;
    std::vector<double> adv;
    for (int j = 0; j < 8; ++j) {
      const Eigen::Vector2d o(uniform(rng, 0, 1), uniform(rng, 0, 1));
      const auto s = behavior.sample(o, rng);
      b.obs.push_back(o);
      b.raw_actions.push_back(s.raw);
      b.rewards.push_back(0.0);
      b.next_obs.push_back(o);
      b.behavior_logp.push_back(behavior.raw_log_prob(o, s.raw, fixed));
      adv.push_back(uniform(rng, -1, 1));
    }
    const auto form = trial % 3 ? SurrogateForm::kPessimistic : SurrogateForm::kClippedRatio;
    const auto al = actor_objective(target, b, adv, 0.2, form, fixed);
    GaussianPolicy aprobe = target;
    worst_actor = std::max(
        worst_actor, starris::testing::max_relative_error(
                         al.gradient,
                         [&](const Eigen::VectorXd& q) {
                           aprobe.assign(q);
                           return actor_objective(aprobe, b, adv, 0.2, form, fixed).value;
                         },
                         target.flatten()));
  }
  return {worst_critic < 1e-4 && worst_actor < 1e-4,
          fmt("max relative error critic %.3g, actor %.3g over 100 trials", worst_critic,
              worst_actor)};
}

// ------------------------------------------------------------------ training runs

struct RunKey {
  std::string algorithm;
  std::string architecture;
  std::string constraint_case;
  int elements;
  bool operator<(const RunKey& o) const {
    return std::tie(algorithm, architecture, constraint_case, elements) <
           std::tie(o.algorithm, o.architecture, o.constraint_case, o.elements);
  }
};

struct Aggregate {
  double throughput = 0.0;       // mean over seeds
  double rate_violation = 0.0;   // max over UEs of the seed-averaged fraction
  double energy_violation = 0.0;
  int seeds = 0;
  int failed = 0;
};

class Runs {
 public:
  explicit Runs(fs::path dir) : dir_(std::move(dir)) {}

  const Aggregate& get(ConstraintCase c, std::optional<BaselineKind> baseline,
                       Architecture arch, int elements) {
    ExperimentSpec spec;
    spec.constraint_case = c;
    spec.baseline = baseline;
    spec.architecture = arch;
    spec.elements = {elements};
    spec.seeds = {1, 2, 3, 4, 5};
    const RunKey key{spec.algorithm_tag(), to_string(arch), to_string(c), elements};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    const fs::path out = dir_ / (key.algorithm + "_" + key.architecture + "_" +
                                 key.constraint_case + "_M" + std::to_string(elements));
    const auto t0 = std::chrono::steady_clock::now();
    const auto cells = run(spec, out.string(), default_workers());
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const ScenarioConfig sc = spec.scenario_for(elements);
    Aggregate a;
    std::vector<double> rv(sc.num_ues, 0.0), ev(sc.num_ues, 0.0);
    for (const auto& cell : cells) {
      if (!cell.ok) {
        ++a.failed;
        continue;
      }
      ++a.seeds;
      a.throughput += cell.metrics.throughput_mean;
      for (int k = 0; k < sc.num_ues; ++k) {
        if (sc.r_min > 0) rv[k] += cell.metrics.rate_violation[k] / (sc.num_slots * sc.r_min);
        ev[k] += cell.metrics.energy_violation[k] / sc.e_max;
      }
    }
    if (a.seeds > 0) {
      a.throughput /= a.seeds;
      for (int k = 0; k < sc.num_ues; ++k) {
        a.rate_violation = std::max(a.rate_violation, rv[k] / a.seeds);
        a.energy_violation = std::max(a.energy_violation, ev[k] / a.seeds);
      }
    }
    std::printf("  run %-20s %-16s %s M=%-3d throughput %.4f bps/Hz  (%d seeds, %.0f s)\n",
                key.algorithm.c_str(), key.architecture.c_str(), key.constraint_case.c_str(),
                elements, a.throughput, a.seeds, secs);
    std::fflush(stdout);
    return cache_.emplace(key, a).first->second;
  }

 private:
  fs::path dir_;
  std::map<RunKey, Aggregate> cache_;
};

Outcome constraint_mechanics(Runs& runs) {
  const auto& a = runs.get(ConstraintCase::kCase2, std::nullopt, Architecture::kStarNoma, 8);
  return {a.failed == 0 && a.rate_violation < 0.05 && a.energy_violation < 0.05,
          fmt("case2 M=8: worst per-UE rate violation %.2f%%, energy violation %.2f%% "
              "(limit 5%%)",
              100 * a.rate_violation, 100 * a.energy_violation)};
}

Outcome case_ordering(Runs& runs) {
  const double t1 = runs.get(ConstraintCase::kCase1, std::nullopt, Architecture::kStarNoma, 8)
                        .throughput;
  const double t2 = runs.get(ConstraintCase::kCase2, std::nullopt, Architecture::kStarNoma, 8)
                        .throughput;
  const double t3 = runs.get(ConstraintCase::kCase3, std::nullopt, Architecture::kStarNoma, 8)
                        .throughput;
  return {t1 >= t2 && t2 >= t3,
          fmt("case1 %.4f, case2 %.4f, case3 %.4f bps/Hz", t1, t2, t3)};
}

Outcome element_trend(Runs& runs) {
  std::vector<double> lr, zp;
  for (int m : {8, 16, 32}) {
    lr.push_back(
        runs.get(ConstraintCase::kCase2, std::nullopt, Architecture::kStarNoma, m).throughput);
    zp.push_back(runs.get(ConstraintCase::kCase2, BaselineKind::kZeroPhase,
                          Architecture::kStarNoma, m)
                     .throughput);
  }
  const bool monotone = lr[0] <= lr[1] && lr[1] <= lr[2];
  const auto [lo, hi] = std::minmax_element(zp.begin(), zp.end());
  const double spread = (*hi - *lo) / *lo;
  return {monotone && spread < 0.10,
          fmt("lrcppo M=8/16/32: %.4f, %.4f, %.4f; zero_phase: %.4f, %.4f, %.4f "
              "(spread %.1f%%)",
              lr[0], lr[1], lr[2], zp[0], zp[1], zp[2], 100 * spread)};
}

Outcome architecture_ordering(Runs& runs) {
  const double star =
      runs.get(ConstraintCase::kCase2, std::nullopt, Architecture::kStarNoma, 8).throughput;
  const double refl =
      runs.get(ConstraintCase::kCase2, std::nullopt, Architecture::kReflectingNoma, 8).throughput;
  const double oma =
      runs.get(ConstraintCase::kCase2, std::nullopt, Architecture::kStarOma, 8).throughput;
  return {star >= refl && star >= oma,
          fmt("star_noma %.4f, reflecting_noma %.4f, star_oma %.4f bps/Hz", star, refl, oma)};
}

Outcome algorithm_ordering(Runs& runs) {
  const double lr =
      runs.get(ConstraintCase::kCase2, std::nullopt, Architecture::kStarNoma, 8).throughput;
  const double rs = runs.get(ConstraintCase::kCase2, BaselineKind::kRewardShapingPpo,
                             Architecture::kStarNoma, 8)
                        .throughput;
  return {lr >= rs, fmt("lrcppo %.4f, reward_shaping_ppo %.4f bps/Hz", lr, rs)};
}

// ------------------------------------------------------------------ 10

Outcome determinism(const fs::path& dir) {
  ExperimentSpec spec;
  spec.seeds = {1, 2};
  spec.train.episodes = 200;
  const fs::path a = dir / "determinism_a", b = dir / "determinism_b";
  run(spec, a.string(), default_workers());
  run(spec, b.string(), 1);
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
  };
  int compared = 0, identical = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    ++compared;
    if (slurp(e.path()) == slurp(b / e.path().filename())) ++identical;
  }
  return {compared > 0 && identical == compared,
          fmt("%d of %d output CSVs byte-identical across two runs", identical, compared)};
}

// ------------------------------------------------------------------ 11

Outcome multiplier_dynamics() {
  auto trace = [](double c_r, double c_e) {
    EpisodeTrace t;
    for (int n = 0; n < 50; ++n) {
      StepOutcome s;
      s.c_r.assign(4, c_r);
      s.c_e.assign(4, c_e);
      s.rates_bps.assign(4, 0.0);
      s.energies.assign(4, 0.0);
      t.append(s);
    }
    return t;
  };
  bool up = true;
  const auto bad = trace(1e5, 0.1);
  auto l = LagrangeMultipliers::zeros(4);
  for (int e = 0; e < 200; ++e) {
    const auto n = lagrange_update(l, bad, 50, 1e-7, 1e-3);
    for (int k = 0; k < 4; ++k)
      up &= n.lambda_r[k] > l.lambda_r[k] && n.lambda_e[k] > l.lambda_e[k];
    l = n;
  }
  bool down = true, reached = false;
  int zero_at = -1;
  const auto good = trace(-1e5, -0.1);
  l = LagrangeMultipliers::uniform(4, 1e-3, 0.5);
  for (int e = 0; e < 200; ++e) {
    const auto n = lagrange_update(l, good, 50, 1e-7, 1e-3);
    for (int k = 0; k < 4; ++k) {
      down &= n.lambda_r[k] <= l.lambda_r[k] && n.lambda_e[k] <= l.lambda_e[k];
      down &= n.lambda_r[k] >= 0.0 && n.lambda_e[k] >= 0.0;
      if (reached) down &= n.lambda_r[k] == 0.0 && n.lambda_e[k] == 0.0;
    }
    l = n;
    const bool all_zero =
        std::all_of(l.lambda_r.begin(), l.lambda_r.end(), [](double x) { return x == 0.0; }) &&
        std::all_of(l.lambda_e.begin(), l.lambda_e.end(), [](double x) { return x == 0.0; });
    if (all_zero && !reached) zero_at = e;
    reached |= all_zero;
  }
  return {up && down && reached,
          fmt("violating: strictly increasing %s; satisfied: non-increasing %s, zero from "
              "episode %d",
              up ? "yes" : "no", down ? "yes" : "no", zero_at)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const fs::path dir = fs::temp_directory_path() / "starris_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Runs runs(dir);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"SIC telescoping identity", sic_telescoping},
      {"composite channel oracle", composite_oracle},
      {"Rician statistics", rician_statistics},
      {"gradient checks", gradient_checks},
      {"constraint satisfaction", [&] { return constraint_mechanics(runs); }},
      {"case ordering", [&] { return case_ordering(runs); }},
      {"element-count trend", [&] { return element_trend(runs); }},
      {"architecture ordering", [&] { return architecture_ordering(runs); }},
      {"algorithm ordering", [&] { return algorithm_ordering(runs); }},
      {"determinism", [&] { return determinism(dir); }},
      {"multiplier dynamics", multiplier_dynamics},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s [%2d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  fs::remove_all(dir);
  return failures == 0 ? 0 : 1;
}
