// Command-line front end: simulate, train, evaluate, sweep, compare.
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "starris/errors.hpp"
#include "starris/experiment.hpp"

using namespace starris;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kDivergence = 3, kIo = 4 };

struct Options {
  std::string config;
  std::string out_dir = "out";
  std::string case_name;
  std::string preset;
  std::string algorithm;
  std::string architecture;
  std::vector<std::uint64_t> seeds;
  std::vector<int> elements;
  int episodes = -1;
  int eval_episodes = -1;
  int workers = 0;
  double eta_l = -1.0;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("-c,--config", o.config, "experiment spec (JSON)");
  cmd->add_option("--seed", o.seeds, "seed(s); overrides the spec");
  cmd->add_option("-o,--out-dir", o.out_dir, "output directory");
  cmd->add_option("--case", o.case_name, "case1 | case2 | case3 | custom");
  cmd->add_option("--preset", o.preset, "desk | paper (when no config file)");
  cmd->add_option("-M,--elements", o.elements, "elements per surface (sweep list)");
}

void add_training(CLI::App* cmd, Options& o) {
  cmd->add_option("--algorithm", o.algorithm,
                  "lrcppo | reward_shaping_ppo | zero_phase | random_phase | equal_time | "
                  "circular_trajectory | reflecting_only_ris | oma");
  cmd->add_option("--architecture", o.architecture, "star_noma | reflecting_noma | star_oma");
  cmd->add_option("--episodes", o.episodes, "training episodes");
  cmd->add_option("--eval-episodes", o.eval_episodes, "evaluation episodes");
  cmd->add_option("--eta-l", o.eta_l, "multiplier rate (both constraints)");
  cmd->add_option("-j,--workers", o.workers, "worker threads (default STARRIS_WORKERS or cores)");
}

ExperimentSpec make_spec(const Options& o) {
  ExperimentSpec spec;
  if (!o.config.empty()) {
    spec = load_spec(o.config);
  } else if (!o.preset.empty()) {
    nlohmann::json j{{"preset", o.preset}};
    spec = spec_from_json(j);
  }
  if (!o.case_name.empty()) spec.constraint_case = parse_case(o.case_name);
  if (!o.algorithm.empty()) {
    if (o.algorithm == "lrcppo") spec.baseline.reset();
    else spec.baseline = parse_baseline(o.algorithm);
  }
  if (!o.architecture.empty()) spec.architecture = parse_architecture(o.architecture);
  if (!o.seeds.empty()) spec.seeds = o.seeds;
  if (!o.elements.empty()) spec.elements = o.elements;
  if (o.episodes >= 0) spec.train.episodes = o.episodes;
  if (o.eval_episodes >= 0) spec.eval_episodes = o.eval_episodes;
  if (o.eta_l >= 0.0) spec.train.eta_lr = spec.train.eta_le = o.eta_l;
  spec.validate();
  return spec;
}

void ensure_dir(const std::string& d) {
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw IoError("cannot create " + d + ": " + ec.message());
}

int report(const ExperimentSpec& spec, const std::vector<CellResult>& cells) {
  int status = kOk;
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& c : cells) {
    std::cout << spec.algorithm_tag() << ' ' << to_string(spec.architecture) << ' '
              << to_string(spec.constraint_case) << " M=" << c.elements << " seed=" << c.seed;
    if (c.ok) {
      std::cout << "  throughput " << c.metrics.throughput_mean << " +- "
                << c.metrics.throughput_std << " bps/Hz\n";
    } else {
      std::cout << "  diverged: " << c.error << '\n';
      status = kDivergence;
    }
  }
  return status;
}

int cmd_simulate(const Options& o, const std::string& policy_name) {
  const ExperimentSpec spec = make_spec(o);
  const int m = spec.element_values().front();
  const auto sc = spec.scenario_for(m);
  const Environment env(build_scenario(sc, spec.scenario_seed), spec.env_options());
  Rng rng(spec.seeds.front());
  const EpisodeTrace trace = rollout(fixed_policy(policy_name, env), env, rng);
  ensure_dir(o.out_dir);
  const std::string path = (fs::path(o.out_dir) / "trajectory.csv").string();
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  trace.write_csv(os);
  if (!os) throw IoError("write failed: " + path);
  std::cout << std::fixed << std::setprecision(4) << policy_name << " M=" << m
            << "  throughput " << trace.throughput() << " bps/Hz  -> " << path << '\n';
  return kOk;
}

int cmd_train(const Options& o, bool checkpoints) {
  const ExperimentSpec spec = make_spec(o);
  const auto cells = run(spec, o.out_dir, o.workers > 0 ? o.workers : default_workers(),
                         checkpoints);
  return report(spec, cells);
}

int cmd_evaluate(const Options& o, const std::string& checkpoint) {
  const ExperimentSpec spec = make_spec(o);
  const int m = spec.element_values().front();
  const auto sc = spec.scenario_for(m);
  const Environment env(build_scenario(sc, spec.scenario_seed), spec.env_options());
  std::ifstream is(checkpoint);
  if (!is) throw IoError("cannot read " + checkpoint);
  nlohmann::json ck;
  try {
    is >> ck;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(checkpoint + ": " + e.what());
  }
  LrcppoTrainer trainer(env, spec.train, training_seed(spec.seeds.front()),
                        spec.training_hooks(sc));
  trainer.restore(ck);
  Policy policy = trainer.deterministic_policy();
  if (const auto extra = spec.evaluation_hooks(sc).override_action) {
    policy = [policy, extra](const State& s, Rng& rng) {
      Action a = policy(s, rng);
      extra(s, a, rng);
      return a;
    };
  }
  CellResult cell;
  cell.elements = m;
  cell.seed = spec.seeds.front();
  cell.metrics = evaluate(policy, env, spec.eval_episodes, evaluation_seed(cell.seed));
  ensure_dir(o.out_dir);
  const fs::path dir(o.out_dir);
  write_summary_csv((dir / "summary.csv").string(), spec, {cell});
  write_per_ue_csv((dir / "per_ue.csv").string(), spec, {cell});
  const std::string traj = (dir / "trajectory.csv").string();
  std::ofstream ts(traj);
  if (!ts) throw IoError("cannot write " + traj);
  cell.metrics.first_episode.write_csv(ts);
  return report(spec, {cell});
}

int cmd_compare(const Options& o) {
  ExperimentSpec spec = make_spec(o);
  ensure_dir(o.out_dir);
  const std::string summary = (fs::path(o.out_dir) / "compare.csv").string();
  if (fs::exists(summary)) fs::remove(summary);
  int status = kOk;
  for (auto arch : {Architecture::kStarNoma, Architecture::kReflectingNoma,
                    Architecture::kStarOma}) {
    spec.architecture = arch;
    const std::string sub = (fs::path(o.out_dir) / to_string(arch)).string();
    const auto cells = run(spec, sub, o.workers > 0 ? o.workers : default_workers());
    write_summary_csv(summary, spec, cells, true);
    status = std::max(status, report(spec, cells));
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STAR-RIS assisted UAV NOMA simulator and LRCPPO trainer"};
  app.require_subcommand(1);
  Options o;
  std::string policy_name = "circular";
  std::string checkpoint;

  auto* sim = app.add_subcommand("simulate", "single rollout of a fixed policy");
  add_common(sim, o);
  sim->add_option("--policy", policy_name, "hover | circular | random");

  auto* train = app.add_subcommand("train", "train and evaluate every seed");
  add_common(train, o);
  add_training(train, o);

  auto* eval = app.add_subcommand("evaluate", "evaluate a saved checkpoint");
  add_common(eval, o);
  add_training(eval, o);
  eval->add_option("--checkpoint", checkpoint, "checkpoint JSON from train")->required();

  auto* sweep = app.add_subcommand("sweep", "train over a list of element counts");
  add_common(sweep, o);
  add_training(sweep, o);

  auto* compare = app.add_subcommand("compare", "STAR+NOMA vs reflecting-only vs OMA");
  add_common(compare, o);
  add_training(compare, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*sim) return cmd_simulate(o, policy_name);
    if (*train) return cmd_train(o, true);
    if (*eval) return cmd_evaluate(o, checkpoint);
    if (*sweep) {
      if (o.elements.empty() && o.config.empty()) o.elements = {8, 16, 32};
      return cmd_train(o, false);
    }
    if (*compare) return cmd_compare(o);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {  // config, validation, shape
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const TrainingFault& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
