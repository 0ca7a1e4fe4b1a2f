#include "starris/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <thread>

#include "starris/errors.hpp"

namespace starris {

namespace fs = std::filesystem;

namespace {

const std::pair<ConstraintCase, const char*> kCases[] = {
    {ConstraintCase::kCase1, "case1"},
    {ConstraintCase::kCase2, "case2"},
    {ConstraintCase::kCase3, "case3"},
    {ConstraintCase::kCustom, "custom"},
};

const std::pair<Architecture, const char*> kArchitectures[] = {
    {Architecture::kStarNoma, "star_noma"},
    {Architecture::kReflectingNoma, "reflecting_noma"},
    {Architecture::kStarOma, "star_oma"},
};

bool has_override(BaselineKind k) {
  return k == BaselineKind::kZeroPhase || k == BaselineKind::kRandomPhase ||
         k == BaselineKind::kEqualTime || k == BaselineKind::kCircularTrajectory;
}

std::ofstream open_out(const std::string& path, bool append) {
  std::ofstream os(path, append ? std::ios::app : std::ios::trunc);
  if (!os) throw IoError("cannot write " + path);
  return os;
}

void check_written(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw IoError("write failed: " + path);
}

std::string cell_tag(int elements, std::uint64_t seed) {
  return "M" + std::to_string(elements) + "_seed" + std::to_string(seed);
}

nlohmann::json train_to_json(const TrainConfig& t) {
  return {{"eta_c", t.eta_c},
          {"eta_a", t.eta_a},
          {"eta_lr", t.eta_lr},
          {"eta_le", t.eta_le},
          {"scale_multiplier_rates", t.scale_multiplier_rates},
          {"gamma", t.gamma},
          {"epsilon", t.epsilon},
          {"batch_size", t.batch_size},
          {"sync_interval", t.sync_interval},
          {"episodes", t.episodes},
          {"hidden", t.hidden},
          {"init_log_std", t.init_log_std},
          {"min_log_std", t.min_log_std},
          {"max_log_std", t.max_log_std},
          {"final_log_std", t.final_log_std},
          {"mean_bound", t.mean_bound},
          {"step_rule", t.step_rule == StepRule::kRmsProp ? "rmsprop" : "plain"},
          {"surrogate", t.surrogate == SurrogateForm::kPessimistic ? "pessimistic"
                                                                   : "clipped_ratio"},
          {"normalize_rewards", t.normalize_rewards},
          {"normalize_advantages", t.normalize_advantages},
          {"spread_initial_angles", t.spread_initial_angles},
          {"constraint_averaging", t.constraint_averaging}};
}

void train_from_json(const nlohmann::json& j, TrainConfig& t) {
  static const std::vector<std::string> known = {
      "eta_c",        "eta_a",          "eta_lr",         "eta_le",
      "scale_multiplier_rates",         "gamma",          "epsilon",
      "batch_size",   "sync_interval",  "episodes",       "hidden",
      "init_log_std", "min_log_std",    "max_log_std",    "final_log_std",    "mean_bound", "step_rule",
      "surrogate",    "normalize_rewards", "normalize_advantages", "constraint_averaging",
      "spread_initial_angles"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ConfigError("unknown train key: " + k);
  auto get = [&](const char* k, auto& dst) {
    if (j.contains(k)) j.at(k).get_to(dst);
  };
  get("eta_c", t.eta_c);
  get("eta_a", t.eta_a);
  get("eta_lr", t.eta_lr);
  get("eta_le", t.eta_le);
  get("scale_multiplier_rates", t.scale_multiplier_rates);
  get("gamma", t.gamma);
  get("epsilon", t.epsilon);
  get("batch_size", t.batch_size);
  get("sync_interval", t.sync_interval);
  get("episodes", t.episodes);
  get("hidden", t.hidden);
  get("init_log_std", t.init_log_std);
  get("min_log_std", t.min_log_std);
  get("max_log_std", t.max_log_std);
  get("final_log_std", t.final_log_std);
  get("mean_bound", t.mean_bound);
  get("normalize_rewards", t.normalize_rewards);
  get("normalize_advantages", t.normalize_advantages);
  get("constraint_averaging", t.constraint_averaging);
  get("spread_initial_angles", t.spread_initial_angles);
  if (j.contains("step_rule")) {
    const auto s = j.at("step_rule").get<std::string>();
    if (s == "rmsprop") t.step_rule = StepRule::kRmsProp;
    else if (s == "plain") t.step_rule = StepRule::kPlain;
    else throw ConfigError("unknown step_rule: " + s);
  }
  if (j.contains("surrogate")) {
    const auto s = j.at("surrogate").get<std::string>();
    if (s == "pessimistic") t.surrogate = SurrogateForm::kPessimistic;
    else if (s == "clipped_ratio") t.surrogate = SurrogateForm::kClippedRatio;
    else throw ConfigError("unknown surrogate: " + s);
  }
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

}  // namespace

std::string to_string(ConstraintCase c) {
  for (const auto& [k, n] : kCases)
    if (k == c) return n;
  return "unknown";
}

std::string to_string(Architecture a) {
  for (const auto& [k, n] : kArchitectures)
    if (k == a) return n;
  return "unknown";
}

ConstraintCase parse_case(const std::string& s) {
  for (const auto& [k, n] : kCases)
    if (s == n) return k;
  throw ConfigError("unknown constraint case: " + s);
}

Architecture parse_architecture(const std::string& s) {
  for (const auto& [k, n] : kArchitectures)
    if (s == n) return k;
  throw ConfigError("unknown architecture: " + s);
}

TrainConfig preset_train_config(const std::string& preset) {
  TrainConfig t;
  if (preset == "paper") return t;
  if (preset != "desk") throw ConfigError("unknown preset: " + preset);
  t.episodes = 2000;
  t.batch_size = 16;
  t.hidden = {64, 64};
  t.eta_c = 2e-3;
  t.eta_a = 1e-3;
  t.eta_lr = 9e-4;
  t.eta_le = 9e-4;
  t.final_log_std = -1.5;
  return t;
}

Thresholds case_thresholds(ConstraintCase c, const std::string& preset) {
  if (c == ConstraintCase::kCase1 || c == ConstraintCase::kCustom)
    throw UsageError("case_thresholds: only case2 and case3 have fixed thresholds");
  const bool case2 = c == ConstraintCase::kCase2;
  if (preset == "paper") return case2 ? Thresholds{300000.0, 180.0} : Thresholds{1000000.0, 90.0};
  if (preset == "desk") return case2 ? Thresholds{300000.0, 45.0} : Thresholds{1000000.0, 22.5};
  throw ConfigError("unknown preset: " + preset);
}

std::string ExperimentSpec::algorithm_tag() const {
  return baseline ? to_string(*baseline) : "lrcppo";
}

std::vector<int> ExperimentSpec::element_values() const {
  return elements.empty() ? std::vector<int>{scenario.elements_per_ris} : elements;
}

ScenarioConfig ExperimentSpec::scenario_for(int m) const {
  ScenarioConfig s = scenario;
  s.elements_per_ris = m;
  switch (constraint_case) {
    case ConstraintCase::kCase1:
      s.r_min = 0.0;
      s.e_max = s.p_max * s.slot_length * s.num_slots;
      break;
    case ConstraintCase::kCase2:
    case ConstraintCase::kCase3: {
      const auto t = case_thresholds(constraint_case, preset);
      s.r_min = t.r_min;
      s.e_max = t.e_max;
      break;
    }
    case ConstraintCase::kCustom:
      break;
  }
  return s;
}

EnvOptions ExperimentSpec::env_options() const {
  EnvOptions o;
  if (architecture == Architecture::kReflectingNoma) o.surface = SurfaceKind::kReflectingOnly;
  if (architecture == Architecture::kStarOma) o.access = AccessScheme::kOma;
  if (baseline) {
    const auto b = baseline_env_options(*baseline);
    if (b.surface != SurfaceKind::kStar) o.surface = b.surface;
    if (b.access != AccessScheme::kNoma) o.access = b.access;
  }
  return o;
}

TrainingHooks ExperimentSpec::training_hooks(const ScenarioConfig& s) const {
  TrainingHooks hooks;
  if (baseline) {
    const bool trained_override =
        baseline_mode == BaselineMode::kOverrideTrained && has_override(*baseline);
    if (!trained_override) hooks = baseline_hooks(*baseline, s, chi);
  }
  if (constraint_case == ConstraintCase::kCase1) {
    hooks.freeze_multipliers = true;
    hooks.initial_multipliers = LagrangeMultipliers::zeros(s.num_ues);
  }
  return hooks;
}

TrainingHooks ExperimentSpec::evaluation_hooks(const ScenarioConfig& s) const {
  if (baseline && baseline_mode == BaselineMode::kOverrideTrained && has_override(*baseline))
    return baseline_hooks(*baseline, s, chi);
  return {};
}

void ExperimentSpec::validate() const {
  if (preset != "desk" && preset != "paper") throw ConfigError("unknown preset: " + preset);
  if (seeds.empty()) throw ConfigError("no seeds given");
  if (eval_episodes < 1) throw ConfigError("eval_episodes < 1");
  train.validate();
  for (int m : element_values()) {
    if (m < 1) throw ConfigError("element count < 1");
    const auto s = scenario_for(m);
    s.validate();
  }
}

nlohmann::json to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["version"] = kSpecVersion;
  j["preset"] = spec.preset;
  j["scenario"] = spec.scenario;
  j["case"] = to_string(spec.constraint_case);
  j["algorithm"] = spec.algorithm_tag();
  j["architecture"] = to_string(spec.architecture);
  j["baseline_mode"] =
      spec.baseline_mode == BaselineMode::kRetrain ? "retrain" : "override_trained";
  if (spec.chi) j["chi"] = {spec.chi->first, spec.chi->second};
  j["elements"] = spec.element_values();
  j["seeds"] = spec.seeds;
  j["scenario_seed"] = spec.scenario_seed;
  j["eval_episodes"] = spec.eval_episodes;
  j["train"] = train_to_json(spec.train);
  return j;
}

ExperimentSpec spec_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {
      "version", "preset", "scenario", "case", "algorithm", "architecture", "baseline_mode",
      "chi", "elements", "seeds", "scenario_seed", "eval_episodes", "train"};
  try {
    if (!j.is_object()) throw ConfigError("experiment spec must be a JSON object");
    for (const auto& [k, v] : j.items())
      if (std::find(known.begin(), known.end(), k) == known.end())
        throw ConfigError("unknown spec key: " + k);
    if (j.value("version", kSpecVersion) != kSpecVersion)
      throw ConfigError("unsupported spec version");
    ExperimentSpec spec;
    spec.preset = j.value("preset", std::string("desk"));
    if (spec.preset == "desk") spec.scenario = desk_preset();
    else if (spec.preset == "paper") spec.scenario = paper_preset();
    else throw ConfigError("unknown preset: " + spec.preset);
    spec.train = preset_train_config(spec.preset);
    if (j.contains("scenario")) from_json(j.at("scenario"), spec.scenario);
    if (j.contains("case")) spec.constraint_case = parse_case(j.at("case").get<std::string>());
    if (j.contains("algorithm")) {
      const auto a = j.at("algorithm").get<std::string>();
      if (a == "lrcppo") spec.baseline.reset();
      else spec.baseline = parse_baseline(a);
    }
    if (j.contains("architecture"))
      spec.architecture = parse_architecture(j.at("architecture").get<std::string>());
    if (j.contains("baseline_mode")) {
      const auto m = j.at("baseline_mode").get<std::string>();
      if (m == "retrain") spec.baseline_mode = BaselineMode::kRetrain;
      else if (m == "override_trained") spec.baseline_mode = BaselineMode::kOverrideTrained;
      else throw ConfigError("unknown baseline_mode: " + m);
    }
    if (j.contains("chi")) {
      const auto c = j.at("chi").get<std::vector<double>>();
      if (c.size() != 2) throw ConfigError("chi must be [chi_r, chi_e]");
      spec.chi = {c[0], c[1]};
    }
    if (j.contains("elements")) spec.elements = j.at("elements").get<std::vector<int>>();
    if (j.contains("seeds")) spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    spec.scenario_seed = j.value("scenario_seed", spec.scenario_seed);
    spec.eval_episodes = j.value("eval_episodes", spec.eval_episodes);
    if (j.contains("train")) train_from_json(j.at("train"), spec.train);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed experiment spec: ") + e.what());
  }
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return spec_from_json(j);
}

EvalMetrics evaluate(const Policy& policy, const Environment& env, int episodes,
                     std::uint64_t seed) {
  if (episodes < 1) throw UsageError("evaluate: episodes < 1");
  const int K = env.scenario().num_ues();
  EvalMetrics m;
  m.avg_rate_bps.assign(K, 0.0);
  m.total_energy_j.assign(K, 0.0);
  m.j_cr.assign(K, 0.0);
  m.j_ce.assign(K, 0.0);
  Rng rng(seed);
  for (int e = 0; e < episodes; ++e) {
    EpisodeTrace trace = rollout(policy, env, rng);
    m.throughputs.push_back(trace.throughput());
    const auto rates = trace.average_rate_bps();
    const auto energy = trace.total_energy();
    for (int k = 0; k < K; ++k) {
      m.avg_rate_bps[k] += rates[k] / episodes;
      m.total_energy_j[k] += energy[k] / episodes;
      m.j_cr[k] += trace.j_cr[k] / episodes;
      m.j_ce[k] += trace.j_ce[k] / episodes;
    }
    if (e == 0) m.first_episode = std::move(trace);
  }
  m.throughput_mean = mean(m.throughputs);
  double ss = 0.0;
  for (double t : m.throughputs) ss += (t - m.throughput_mean) * (t - m.throughput_mean);
  m.throughput_std = episodes > 1 ? std::sqrt(ss / (episodes - 1)) : 0.0;
  for (int k = 0; k < K; ++k) {
    m.rate_violation.push_back(std::max(0.0, m.j_cr[k]));
    m.energy_violation.push_back(std::max(0.0, m.j_ce[k]));
  }
  return m;
}

std::uint64_t training_seed(std::uint64_t seed) { return derive_seed(seed, 0x7261696eULL); }
std::uint64_t evaluation_seed(std::uint64_t seed) { return derive_seed(seed, 0x6576616cULL); }

CellResult run_cell(const ExperimentSpec& spec, int elements, std::uint64_t seed) {
  CellResult cell;
  cell.elements = elements;
  cell.seed = seed;
  const ScenarioConfig sc = spec.scenario_for(elements);
  const Environment env(build_scenario(sc, spec.scenario_seed), spec.env_options());
  const TrainConfig& tc = spec.train;
  try {
    LrcppoTrainer trainer(env, tc, training_seed(seed), spec.training_hooks(sc));
    cell.log = trainer.train(tc.episodes);
    Policy policy = trainer.deterministic_policy();
    const auto extra = spec.evaluation_hooks(sc).override_action;
    if (extra) {
      policy = [policy, extra](const State& s, Rng& rng) {
        Action a = policy(s, rng);
        extra(s, a, rng);
        return a;
      };
    }
    cell.metrics = evaluate(policy, env, spec.eval_episodes, evaluation_seed(seed));
    cell.checkpoint = trainer.checkpoint();
  } catch (const TrainingFault& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  return cell;
}

int default_workers() {
  if (const char* v = std::getenv("STARRIS_WORKERS")) {
    const int n = std::atoi(v);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_summary_csv(const std::string& path, const ExperimentSpec& spec,
                       const std::vector<CellResult>& cells, bool append) {
  const bool header = !append || !fs::exists(path) || fs::file_size(path) == 0;
  auto os = open_out(path, append);
  if (header)
    os << "algorithm,architecture,case,elements,seed,status,throughput_mean_bps_hz,"
          "throughput_std_bps_hz,min_avg_rate_bps,max_energy_j,max_rate_violation_frac,"
          "max_energy_violation_frac\n";
  os << std::setprecision(17);
  for (const auto& c : cells) {
    const auto sc = spec.scenario_for(c.elements);
    os << spec.algorithm_tag() << ',' << to_string(spec.architecture) << ','
       << to_string(spec.constraint_case) << ',' << c.elements << ',' << c.seed << ','
       << (c.ok ? "ok" : "diverged");
    if (!c.ok) {
      os << ",,,,,,\n";
      continue;
    }
    const auto& m = c.metrics;
    double rv = 0.0, ev = 0.0;
    for (double v : m.rate_violation)
      rv = std::max(rv, sc.r_min > 0.0 ? v / (sc.num_slots * sc.r_min) : 0.0);
    for (double v : m.energy_violation) ev = std::max(ev, v / sc.e_max);
    os << ',' << m.throughput_mean << ',' << m.throughput_std << ','
       << *std::min_element(m.avg_rate_bps.begin(), m.avg_rate_bps.end()) << ','
       << *std::max_element(m.total_energy_j.begin(), m.total_energy_j.end()) << ',' << rv
       << ',' << ev << '\n';
  }
  check_written(os, path);
}

void write_per_ue_csv(const std::string& path, const ExperimentSpec& spec,
                      const std::vector<CellResult>& cells, bool append) {
  const bool header = !append || !fs::exists(path) || fs::file_size(path) == 0;
  auto os = open_out(path, append);
  if (header)
    os << "algorithm,architecture,case,elements,seed,ue,avg_rate_bps,total_energy_j,"
          "j_cr_bps,j_ce_j,rate_violation_bps,energy_violation_j\n";
  os << std::setprecision(17);
  for (const auto& c : cells) {
    if (!c.ok) continue;
    const auto& m = c.metrics;
    for (std::size_t k = 0; k < m.avg_rate_bps.size(); ++k) {
      os << spec.algorithm_tag() << ',' << to_string(spec.architecture) << ','
         << to_string(spec.constraint_case) << ',' << c.elements << ',' << c.seed << ',' << k
         << ',' << m.avg_rate_bps[k] << ',' << m.total_energy_j[k] << ',' << m.j_cr[k] << ','
         << m.j_ce[k] << ',' << m.rate_violation[k] << ',' << m.energy_violation[k] << '\n';
    }
  }
  check_written(os, path);
}

std::vector<CellResult> run(const ExperimentSpec& spec, const std::string& out_dir,
                            int workers, bool write_checkpoints) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  struct Job {
    int elements;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int m : spec.element_values())
    for (auto s : spec.seeds) jobs.push_back({m, s});

  std::vector<CellResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();)
      results[i] = run_cell(spec, jobs[i].elements, jobs[i].seed);
  };
  const int n = std::clamp<int>(workers, 1, static_cast<int>(std::max<std::size_t>(1, jobs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  const fs::path dir(out_dir);
  {
    auto os = open_out((dir / "spec.json").string(), false);
    os << to_json(spec).dump(2) << '\n';
    check_written(os, (dir / "spec.json").string());
  }
  for (const auto& c : results) {
    const std::string tag = cell_tag(c.elements, c.seed);
    const std::string conv = (dir / ("convergence_" + tag + ".csv")).string();
    auto os = open_out(conv, false);
    write_training_log_csv(os, c.log);
    check_written(os, conv);
    if (!c.ok) continue;
    const std::string traj = (dir / ("trajectory_" + tag + ".csv")).string();
    auto ts = open_out(traj, false);
    c.metrics.first_episode.write_csv(ts);
    check_written(ts, traj);
    if (write_checkpoints) {
      const std::string ck = (dir / ("checkpoint_" + tag + ".json")).string();
      auto cs = open_out(ck, false);
      cs << c.checkpoint.dump() << '\n';
      check_written(cs, ck);
    }
  }
  write_summary_csv((dir / "summary.csv").string(), spec, results);
  write_per_ue_csv((dir / "per_ue.csv").string(), spec, results);
  return results;
}

Policy fixed_policy(const std::string& name, const Environment& env) {
  const ScenarioConfig& c = env.scenario().config;
  const ActionLayout layout = env.layout();
  auto base = [layout, c]() {
    Action a = layout.unflatten(std::vector<double>(layout.dim(), 0.0));
    std::fill(a.powers.begin(), a.powers.end(), c.p_max);
    std::fill(a.splits.begin(), a.splits.end(), 0.5);
    return a;
  };
  if (name == "hover") return [base](const State&, Rng&) { return base(); };
  if (name == "circular") {
    const CircularPath path = default_circle(c);
    return [base, path, v = c.v_max](const State& s, Rng&) {
      Action a = base();
      std::tie(a.heading, a.speed) = circular_motion(s, path, v);
      return a;
    };
  }
  if (name == "random") {
    return [layout](const State&, Rng& rng) {
      std::vector<double> v(layout.dim());
      for (int d = 0; d < layout.dim(); ++d) {
        const double lo = layout.lower()[d];
        const double hi = layout.upper()[d];
        double x = uniform(rng, lo, hi);
        if (layout.periodic()[d] && x >= hi) x = lo;
        v[d] = std::min(x, hi);
      }
      return layout.unflatten(v);
    };
  }
  throw ConfigError("unknown fixed policy: " + name + " (hover, circular, random)");
}

}  // namespace starris
