#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mep/arm.hpp"
#include "mep/baselines.hpp"
#include "mep/environment.hpp"

namespace mep {

struct RunOutcome {
  bool success = false;
  std::size_t steps = 0;  // primitive environment actions in the evaluation episode
  double time_ms = 0.0;
  bool out_of_memory = false;
};

class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::string name() const = 0;
  virtual std::string params() const { return ""; }
  /// Trains (when the method needs it) and runs one evaluation episode. All randomness derives from `seed`.
  virtual RunOutcome run(const Environment& env, std::uint64_t seed) const = 0;
};

/// Repeatedly executes random not-yet-satisfied skills for `steps` primitive actions,
/// resetting at the goal or at the episode length, harvesting after every skill call.
SkillLibrary train_mep(const Environment& env, SkillLibrary lib, std::size_t steps, Rng& agent_rng, Rng& noise_rng);

/// One evaluation episode that keeps invoking the goal skill until the goal or the budget.
RunOutcome run_mep_episode(const Environment& env, SkillLibrary& lib, Rng& agent_rng, Rng& noise_rng);

class MepPlanner : public Planner {
 public:
  explicit MepPlanner(LearnerConfig config = {}, std::size_t training_steps = 5000,
                      std::optional<SkillLibrary> pretrained = std::nullopt)
      : config_(config), training_steps_(training_steps), pretrained_(std::move(pretrained)) {}
  std::string name() const override { return "MEP"; }
  std::string params() const override;
  RunOutcome run(const Environment& env, std::uint64_t seed) const override;

 private:
  LearnerConfig config_;
  std::size_t training_steps_;
  std::optional<SkillLibrary> pretrained_;
};

class QLearningPlanner : public Planner {
 public:
  explicit QLearningPlanner(QLearningConfig config = {}) : config_(config) {}
  std::string name() const override { return "Q-Learning"; }
  std::string params() const override;
  RunOutcome run(const Environment& env, std::uint64_t seed) const override;

 private:
  QLearningConfig config_;
};

class MctsPlanner : public Planner {
 public:
  explicit MctsPlanner(MctsConfig config = {}) : config_(config) {}
  std::string name() const override { return "MCTS (" + std::to_string(config_.budget) + ")"; }
  std::string params() const override;
  RunOutcome run(const Environment& env, std::uint64_t seed) const override;

 private:
  MctsConfig config_;
};

class RrtPlanner : public Planner {
 public:
  explicit RrtPlanner(RrtConfig config = {}) : config_(config) {}
  std::string name() const override { return "RRT(" + std::to_string(config_.max_nodes) + ")"; }
  std::string params() const override;
  RunOutcome run(const Environment& env, std::uint64_t seed) const override;

 private:
  RrtConfig config_;
};

/// Never acts; the reference point for an all-failure row.
class IdlePlanner : public Planner {
 public:
  std::string name() const override { return "Idle"; }
  RunOutcome run(const Environment&, std::uint64_t) const override { return {}; }
};

struct RunRecord {
  std::string env;
  std::string planner;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  RunOutcome outcome;
};

/// Step and time statistics cover successful runs only.
struct ResultRow {
  std::string env;
  std::string planner;
  std::string params;
  double success_rate = 0.0;  // percent
  std::optional<double> steps_mean;
  std::optional<double> steps_std;  // population standard deviation
  std::optional<double> time_mean_ms;
  std::size_t n_runs = 0;
  std::uint64_t seed = 0;
};

ResultRow summarize(const std::string& env, const Planner& planner, const std::vector<RunRecord>& records,
                    std::uint64_t base_seed, bool record_timing);

/// Runs `num_runs` episodes with seeds base_seed + i.
ResultRow evaluate(const Environment& env, const Planner& planner, std::size_t num_runs, std::uint64_t base_seed,
                   std::vector<RunRecord>* records = nullptr, const std::string& env_name = "env",
                   std::size_t threads = 1);

struct EnvSpec {
  std::string name;
  std::string generator = "random";  // chain | random | file
  std::size_t nodes = 22;
  double avg_edges = 2.27;
  bool consuming = false;
  std::optional<std::uint64_t> seed;  // defaults to the experiment's base seed
  std::size_t episode_length = 40;
  double noise = 0.05;
  NoiseMode noise_mode = NoiseMode::kPerStep;
  std::string path;  // for generator == "file"
};

struct PlannerSpec {
  std::string kind;  // mep | q | mcts | rrt | idle
  std::size_t budget = 0;  // MCTS simulations or RRT node cap
};

struct ExperimentConfig {
  std::vector<EnvSpec> envs;
  std::vector<PlannerSpec> planners;
  std::size_t num_runs = 10;
  std::uint64_t base_seed = 0;
  std::size_t mep_training_steps = 5000;
  LearnerConfig learner{};
  QLearningConfig q{};
  double rrt_goal_bias = 0.05;
  double mcts_exploration = 0.70710678118654752;
  std::size_t threads = 0;  // 0 -> hardware concurrency
  bool record_timing = false;

  /// Throws std::invalid_argument on the first problem found.
  void validate() const;

  /// The four benchmark environments against all seven planners.
  static ExperimentConfig table2();
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

Environment build_env(const EnvSpec& spec, std::uint64_t base_seed);
std::unique_ptr<Planner> build_planner(const PlannerSpec& spec, const ExperimentConfig& cfg);

struct BenchmarkResult {
  std::vector<ResultRow> rows;
  std::vector<RunRecord> records;
};

/// Executes envs x planners x runs, then writes results.jsonl, results.csv and results.md into `out_dir`.
BenchmarkResult run_benchmark(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

std::string format_csv(const std::vector<ResultRow>& rows);
std::string format_jsonl(const std::vector<RunRecord>& records, bool record_timing);
std::string format_table(const std::vector<ResultRow>& rows);

}  // namespace mep
