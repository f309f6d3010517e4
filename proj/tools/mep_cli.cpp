#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "mep/harness.hpp"

namespace {

void print_row(const mep::ResultRow& row) {
  std::printf("%s %s: success %.1f%%", row.env.c_str(), row.planner.c_str(), row.success_rate);
  if (row.steps_mean) std::printf(", steps %.2f +- %.2f", *row.steps_mean, *row.steps_std);
  std::printf(" (%zu runs, seed %llu)\n", row.n_runs, static_cast<unsigned long long>(row.seed));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skill-learning planner for binary-state environments"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string config_path;
  std::string out;

  // gen-env
  auto* gen = app.add_subcommand("gen-env", "Generate an environment and write it to a file");
  mep::EnvSpec spec;
  std::string noise_mode = "per_step";
  gen->add_option("--generator", spec.generator, "chain or random")->check(CLI::IsMember({"chain", "random"}));
  gen->add_option("--nodes", spec.nodes, "Number of state features")->check(CLI::Range(2, 1 << 20));
  gen->add_option("--edges", spec.avg_edges, "Average number of dependency edges per node");
  gen->add_flag("--consuming", spec.consuming, "Let some actions reset their preconditions");
  gen->add_option("--noise", spec.noise, "Exogenous flip probability")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--noise-mode", noise_mode)->check(CLI::IsMember({"per_step", "per_dimension"}));
  gen->add_option("--episode-length", spec.episode_length)->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed);
  gen->add_option("--out", out, "Output file")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a skill library on an environment file");
  std::string env_path;
  std::size_t steps = 5000;
  train->add_option("--env", env_path)->required()->check(CLI::ExistingFile);
  train->add_option("--steps", steps, "Primitive training actions")->check(CLI::PositiveNumber);
  train->add_option("--seed", seed);
  train->add_option("--config", config_path, "JSON experiment config supplying learner settings");
  train->add_option("--out", out, "Output library file")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate one planner on an environment file");
  std::string planner_kind = "mep";
  std::size_t budget = 1000, runs = 10, threads = 0;
  std::string library_path;
  eval->add_option("--env", env_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--planner", planner_kind)->check(CLI::IsMember({"mep", "q", "mcts", "rrt", "idle"}));
  eval->add_option("--budget", budget, "MCTS simulations or RRT nodes")->check(CLI::PositiveNumber);
  eval->add_option("--runs", runs)->check(CLI::PositiveNumber);
  eval->add_option("--steps", steps, "MEP training actions per run")->check(CLI::PositiveNumber);
  eval->add_option("--library", library_path, "Start MEP from a trained library")->check(CLI::ExistingFile);
  eval->add_option("--threads", threads);
  eval->add_option("--seed", seed);
  eval->add_option("--config", config_path, "JSON experiment config supplying planner settings");
  eval->add_option("--out", out, "Write per-run records as JSON lines");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a full benchmark grid");
  std::optional<std::uint64_t> bench_seed;
  bench->add_option("--config", config_path, "JSON experiment config; defaults to the standard grid");
  bench->add_option("--seed", bench_seed, "Override the config's base seed");
  bench->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    mep::ExperimentConfig cfg = config_path.empty() ? mep::ExperimentConfig{} : mep::load_config(config_path);

    if (*gen) {
      spec.name = "generated";
      spec.noise_mode = noise_mode == "per_step" ? mep::NoiseMode::kPerStep : mep::NoiseMode::kPerDimension;
      spec.seed = seed;
      const auto env = mep::build_env(spec, seed);
      mep::save_env(env, out);
      std::printf("wrote %s: %zu features, %zu actions, goal %zu\n", out.c_str(), env.dim(), env.num_actions(),
                  env.goal_dim());
    } else if (*train) {
      const auto env = mep::load_env(env_path);
      auto agent = mep::make_rng(seed, mep::Stream::kAgent);
      auto noise = mep::make_rng(seed, mep::Stream::kEnvNoise);
      auto lib = mep::train_mep(env, mep::SkillLibrary::seeded(env, cfg.learner), steps, agent, noise);
      mep::save_library(lib, out);
      std::printf("wrote %s: %zu skills, %zu arms\n", out.c_str(), lib.skills().size(), lib.total_arms());
    } else if (*eval) {
      const auto env = mep::load_env(env_path);
      std::unique_ptr<mep::Planner> planner;
      if (planner_kind == "mep") {
        std::optional<mep::SkillLibrary> lib;
        if (!library_path.empty()) lib = mep::load_library(library_path);
        const bool steps_given = eval->count("--steps") > 0;
        const std::size_t train_steps = steps_given ? steps : (lib ? 0 : cfg.mep_training_steps);
        planner = std::make_unique<mep::MepPlanner>(lib ? lib->config() : cfg.learner, train_steps, std::move(lib));
      } else {
        planner = mep::build_planner({planner_kind, budget}, cfg);
      }
      std::vector<mep::RunRecord> records;
      const auto row = mep::evaluate(env, *planner, runs, seed, &records, env_path, threads);
      print_row(row);
      if (!out.empty()) {
        std::ofstream file(out, std::ios::binary);
        file << mep::format_jsonl(records, false);
      }
    } else if (*bench) {
      if (config_path.empty()) cfg = mep::ExperimentConfig::table2();
      if (bench_seed) cfg.base_seed = *bench_seed;
      const auto result = mep::run_benchmark(cfg, out);
      for (const auto& row : result.rows) print_row(row);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
