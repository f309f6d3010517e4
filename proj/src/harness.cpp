#include "mep/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "mep/skills.hpp"

namespace mep {

namespace {

// Safety valve for skill calls that make no environment progress.
constexpr std::size_t kMaxIdleCalls = 1000;

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SkillLibrary train_mep(const Environment& env, SkillLibrary lib, std::size_t steps, Rng& agent_rng, Rng& noise_rng) {
  expects(steps >= 1, "training needs at least one step");
  const auto& cfg = lib.config();
  std::size_t used = 0;
  Episode episode(env, noise_rng, steps);
  TrajectoryRecord traj;
  std::size_t windows = 0, idle = 0, segment = 0;
  std::vector<UnitEffect> candidates;

  for (;;) {
    if (episode.done() || idle >= kMaxIdleCalls) {
      used += episode.steps_taken();
      if (used >= steps) break;
      episode.reset(steps - used);
      traj.entries.clear();
      windows = 0;
      idle = 0;
      segment = 0;
    }
    // The harvest budget renews every episode_length steps of the long training episode.
    if (episode.steps_taken() / env.episode_length() != segment) {
      segment = episode.steps_taken() / env.episode_length();
      windows = 0;
    }
    candidates.clear();
    for (const auto& [effect, skill] : lib.skills())
      if (!effect.holds(episode.state())) candidates.push_back(effect);
    if (candidates.empty()) {
      idle = kMaxIdleCalls;
      continue;
    }
    const UnitEffect effect = candidates[uniform_index(agent_rng, candidates.size())];

    TrajectoryEntry entry;
    entry.before = episode.state();
    entry.step = Step::skill(effect);
    const std::size_t steps_before = episode.steps_taken();
    auto exec = execute_skill(lib, effect, episode, agent_rng);
    entry.after = episode.state();
    entry.succeeded = exec.succeeded;
    entry.nested = std::move(exec.trajectory.entries);
    idle = episode.steps_taken() == steps_before ? idle + 1 : 0;
    // Calls that left the state unchanged contribute no steps to any harvested arm.
    if (entry.before == entry.after) continue;
    traj.entries.push_back(std::move(entry));

    if (windows < cfg.windows_per_episode) {
      ++windows;
      const std::size_t last = traj.size() - 1;
      const std::size_t len = 1 + uniform_index(agent_rng, std::min(cfg.max_window, traj.size()));
      for (auto& [e, arm] : harvest_window(traj, last + 1 - len, last, lib))
        admit_candidate(lib, e, std::move(arm), agent_rng);
    }
  }
  return lib;
}

RunOutcome run_mep_episode(const Environment& env, SkillLibrary& lib, Rng& agent_rng, Rng& noise_rng) {
  const UnitEffect goal{env.goal_dim(), Transform::kSetOne};
  expects(lib.has_skill(goal), "library has no skill for the goal feature");
  Episode episode(env, noise_rng);
  std::size_t idle = 0;
  while (!episode.done() && idle < kMaxIdleCalls) {
    const std::size_t before = episode.steps_taken();
    execute_skill(lib, goal, episode, agent_rng);
    idle = episode.steps_taken() == before ? idle + 1 : 0;
  }
  RunOutcome out;
  out.success = episode.goal_reached();
  out.steps = episode.steps_taken();
  return out;
}

std::string MepPlanner::params() const {
  return "epsilon=" + number(config_.epsilon) + ";delta=" + number(config_.delta) + ";gamma=" +
         number(config_.gamma) + ";train_steps=" + std::to_string(training_steps_);
}

RunOutcome MepPlanner::run(const Environment& env, std::uint64_t seed) const {
  Rng agent = make_rng(seed, Stream::kAgent);
  Rng noise = make_rng(seed, Stream::kEnvNoise);
  SkillLibrary lib = pretrained_ ? *pretrained_ : SkillLibrary::seeded(env, config_);
  lib.config() = config_;
  if (training_steps_ > 0) lib = train_mep(env, std::move(lib), training_steps_, agent, noise);
  // Refinement belongs to training; evaluation exploits the learned arm set.
  lib.config().epsilon = 0.0;
  lib.config().exploit_only = true;
  Rng eval_agent = make_rng(seed, Stream::kEvalAgent);
  Rng eval_noise = make_rng(seed, Stream::kEvalNoise);
  return run_mep_episode(env, lib, eval_agent, eval_noise);
}

std::string QLearningPlanner::params() const {
  return "episodes=" + std::to_string(config_.episodes) + ";lr=" + number(config_.learning_rate) +
         ";discount=" + number(config_.discount) + ";eps=" + number(config_.eps_greedy);
}

RunOutcome QLearningPlanner::run(const Environment& env, std::uint64_t seed) const {
  Rng train_rng = make_rng(seed, Stream::kAgent);
  auto trained = q_train(env, config_, train_rng);
  RunOutcome out;
  if (trained.out_of_memory) {
    out.out_of_memory = true;
    return out;
  }
  Rng agent = make_rng(seed, Stream::kEvalAgent);
  Rng noise = make_rng(seed, Stream::kEvalNoise);
  Episode episode(env, noise);
  while (!episode.done()) episode.act(q_act(trained.table, episode.state(), agent));
  out.success = episode.goal_reached();
  out.steps = episode.steps_taken();
  return out;
}

std::string MctsPlanner::params() const {
  return "budget=" + std::to_string(config_.budget) + ";c=" + number(config_.exploration_c);
}

RunOutcome MctsPlanner::run(const Environment& env, std::uint64_t seed) const {
  Rng planner = make_rng(seed, Stream::kPlanner);
  Rng noise = make_rng(seed, Stream::kEvalNoise);
  Episode episode(env, noise);
  while (!episode.done()) episode.act(mcts_plan(env, episode.state(), episode.remaining(), config_, planner).action);
  return {episode.goal_reached(), episode.steps_taken(), 0.0, false};
}

std::string RrtPlanner::params() const {
  return "max_nodes=" + std::to_string(config_.max_nodes) + ";goal_bias=" + number(config_.goal_bias);
}

RunOutcome RrtPlanner::run(const Environment& env, std::uint64_t seed) const {
  Rng planner = make_rng(seed, Stream::kPlanner);
  Rng noise = make_rng(seed, Stream::kEvalNoise);
  Episode episode(env, noise);
  std::vector<ActionId> plan;
  std::size_t cursor = 0;
  std::optional<State> expected;
  while (!episode.done()) {
    if (!expected || episode.state() != *expected || cursor >= plan.size()) {
      auto result = rrt_plan(env, episode.state(), config_, planner);
      plan = result.plan.value_or(std::vector<ActionId>{});
      cursor = 0;
    }
    if (plan.empty()) {
      // No path found from here: perturb the state and search again.
      episode.act(uniform_index(planner, env.num_actions()));
      expected.reset();
      continue;
    }
    const ActionId a = plan[cursor++];
    expected = model_step(env, episode.state(), a);
    episode.act(a);
  }
  return {episode.goal_reached(), episode.steps_taken(), 0.0, false};
}

ResultRow summarize(const std::string& env, const Planner& planner, const std::vector<RunRecord>& records,
                    std::uint64_t base_seed, bool record_timing) {
  ResultRow row;
  row.env = env;
  row.planner = planner.name();
  row.params = planner.params();
  row.n_runs = records.size();
  row.seed = base_seed;
  std::vector<double> steps, times;
  for (const auto& r : records) {
    if (!r.outcome.success) continue;
    steps.push_back(static_cast<double>(r.outcome.steps));
    times.push_back(r.outcome.time_ms);
  }
  row.success_rate = records.empty() ? 0.0 : 100.0 * static_cast<double>(steps.size()) / static_cast<double>(records.size());
  if (!steps.empty()) {
    double mean = 0.0;
    for (double s : steps) mean += s;
    mean /= static_cast<double>(steps.size());
    double var = 0.0;
    for (double s : steps) var += (s - mean) * (s - mean);
    row.steps_mean = mean;
    row.steps_std = std::sqrt(var / static_cast<double>(steps.size()));
    if (record_timing) {
      double t = 0.0;
      for (double x : times) t += x;
      row.time_mean_ms = t / static_cast<double>(times.size());
    }
  }
  return row;
}

namespace {

RunRecord timed_run(const Environment& env, const std::string& env_name, const Planner& planner, std::size_t run,
                    std::uint64_t seed) {
  RunRecord rec;
  rec.env = env_name;
  rec.planner = planner.name();
  rec.run = run;
  rec.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  rec.outcome = planner.run(env, seed);
  rec.outcome.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

// Runs task(i) for i in [0, n) on a pool of workers; rethrows the first failure.
template <typename Task>
void parallel_for(std::size_t n, std::size_t threads, Task task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

ResultRow evaluate(const Environment& env, const Planner& planner, std::size_t num_runs, std::uint64_t base_seed,
                   std::vector<RunRecord>* records, const std::string& env_name, std::size_t threads) {
  expects(num_runs >= 1, "evaluation needs at least one run");
  std::vector<RunRecord> local(num_runs);
  parallel_for(num_runs, threads, [&](std::size_t i) { local[i] = timed_run(env, env_name, planner, i, base_seed + i); });
  auto row = summarize(env_name, planner, local, base_seed, true);
  if (records) *records = std::move(local);
  return row;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid config: " + what); };
  if (num_runs < 1) fail("num_runs must be at least 1");
  if (envs.empty()) fail("no environments");
  if (planners.empty()) fail("no planners");
  if (mep_training_steps < 1) fail("mep_training_steps must be at least 1");
  if (learner.epsilon < 0.0 || learner.epsilon > 1.0) fail("epsilon must lie in [0, 1]");
  if (learner.delta < 0.0 || learner.delta >= 1.0) fail("delta must lie in [0, 1)");
  if (!(learner.gamma > 0.0)) fail("gamma must be positive");
  if (learner.max_window < 1 || learner.max_depth < 1) fail("max_window and max_depth must be positive");
  if (q.learning_rate <= 0.0 || q.learning_rate > 1.0) fail("Q-learning rate must lie in (0, 1]");
  if (q.discount < 0.0 || q.discount > 1.0) fail("Q-learning discount must lie in [0, 1]");
  if (q.eps_greedy < 0.0 || q.eps_greedy > 1.0) fail("Q-learning epsilon must lie in [0, 1]");
  if (rrt_goal_bias < 0.0 || rrt_goal_bias > 1.0) fail("rrt_goal_bias must lie in [0, 1]");
  std::set<std::string> names;
  for (const auto& e : envs) {
    if (e.name.empty()) fail("environment without a name");
    if (!names.insert(e.name).second) fail("duplicate environment name '" + e.name + "'");
    if (e.generator != "chain" && e.generator != "random" && e.generator != "file")
      fail("unknown generator '" + e.generator + "'");
    if (e.generator == "file" && e.path.empty()) fail("file environment '" + e.name + "' has no path");
    if (e.generator != "file" && e.nodes < 2) fail("environment '" + e.name + "' needs at least 2 nodes");
    if (e.avg_edges < 0.0) fail("environment '" + e.name + "' has negative avg_edges");
    if (e.episode_length < 1) fail("environment '" + e.name + "' has episode_length 0");
    if (e.noise < 0.0 || e.noise > 1.0) fail("environment '" + e.name + "' noise outside [0, 1]");
  }
  for (const auto& p : planners) {
    if (p.kind != "mep" && p.kind != "q" && p.kind != "mcts" && p.kind != "rrt" && p.kind != "idle")
      fail("unknown planner kind '" + p.kind + "'");
    if ((p.kind == "mcts" || p.kind == "rrt") && p.budget < 1) fail(p.kind + " needs a positive budget");
  }
}

ExperimentConfig ExperimentConfig::table2() {
  ExperimentConfig cfg;
  auto env = [](std::string name, std::size_t nodes, double edges, bool consuming, std::size_t len) {
    EnvSpec e;
    e.name = std::move(name);
    e.nodes = nodes;
    e.avg_edges = edges;
    e.consuming = consuming;
    e.episode_length = len;
    return e;
  };
  cfg.envs = {env("Mining", 22, 2.27, false, 40), env("MiningV2", 22, 3.18, true, 80), env("Baking", 30, 2.00, false, 60),
              env("Random", 100, 1.32, false, 100)};
  cfg.planners = {{"mep", 0}, {"q", 0}, {"mcts", 100}, {"mcts", 1000}, {"mcts", 5000}, {"rrt", 1000}, {"rrt", 10000}};
  return cfg;
}

ExperimentConfig parse_config(const std::string& json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("invalid config: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.num_runs = j.value("num_runs", cfg.num_runs);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.mep_training_steps = j.value("mep_training_steps", cfg.mep_training_steps);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.record_timing = j.value("record_timing", cfg.record_timing);
    cfg.rrt_goal_bias = j.value("rrt_goal_bias", cfg.rrt_goal_bias);
    cfg.mcts_exploration = j.value("mcts_exploration", cfg.mcts_exploration);
    if (j.contains("learner")) {
      const auto& l = j.at("learner");
      auto& c = cfg.learner;
      c.epsilon = l.value("epsilon", c.epsilon);
      c.delta = l.value("delta", c.delta);
      c.gamma = l.value("gamma", c.gamma);
      c.max_window = l.value("max_window", c.max_window);
      c.max_depth = l.value("max_depth", c.max_depth);
      c.windows_per_episode = l.value("windows_per_episode", c.windows_per_episode);
      c.probe_states = l.value("probe_states", c.probe_states);
      c.first_fit = l.value("first_fit", c.first_fit);
      c.refit_every = l.value("refit_every", c.refit_every);
      c.max_training_samples = l.value("max_training_samples", c.max_training_samples);
      c.reg_c = l.value("reg_c", c.reg_c);
      c.harvest_nested = l.value("harvest_nested", c.harvest_nested);
    }
    if (j.contains("q_learning")) {
      const auto& q = j.at("q_learning");
      cfg.q.episodes = q.value("episodes", cfg.q.episodes);
      cfg.q.learning_rate = q.value("learning_rate", cfg.q.learning_rate);
      cfg.q.discount = q.value("discount", cfg.q.discount);
      cfg.q.eps_greedy = q.value("eps_greedy", cfg.q.eps_greedy);
      cfg.q.max_states = q.value("max_states", cfg.q.max_states);
    }
    for (const auto& e : j.value("envs", json::array())) {
      EnvSpec s;
      s.name = e.at("name").get<std::string>();
      s.generator = e.value("generator", s.generator);
      s.nodes = e.value("nodes", s.nodes);
      s.avg_edges = e.value("avg_edges", s.avg_edges);
      s.consuming = e.value("consuming", s.consuming);
      if (e.contains("seed")) s.seed = e.at("seed").get<std::uint64_t>();
      s.episode_length = e.value("episode_length", s.episode_length);
      s.noise = e.value("noise", s.noise);
      const auto mode = e.value("noise_mode", std::string("per_step"));
      if (mode == "per_step") {
        s.noise_mode = NoiseMode::kPerStep;
      } else if (mode == "per_dimension") {
        s.noise_mode = NoiseMode::kPerDimension;
      } else {
        throw std::invalid_argument("invalid config: unknown noise_mode '" + mode + "'");
      }
      s.path = e.value("path", s.path);
      cfg.envs.push_back(std::move(s));
    }
    for (const auto& p : j.value("planners", json::array())) {
      PlannerSpec s;
      s.kind = p.at("kind").get<std::string>();
      s.budget = p.value("budget", s.budget);
      cfg.planners.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Environment build_env(const EnvSpec& spec, std::uint64_t base_seed) {
  const NoiseModel noise{spec.noise, spec.noise_mode};
  const std::uint64_t seed = spec.seed.value_or(base_seed);
  if (spec.generator == "chain") return generate_chain_env(spec.nodes, seed, noise, spec.episode_length);
  if (spec.generator == "file") return load_env(spec.path);
  RandomEnvOptions opts;
  opts.noise = noise;
  opts.episode_length = spec.episode_length;
  return generate_random_env(spec.nodes, spec.avg_edges, spec.consuming, seed, opts);
}

std::unique_ptr<Planner> build_planner(const PlannerSpec& spec, const ExperimentConfig& cfg) {
  if (spec.kind == "mep") return std::make_unique<MepPlanner>(cfg.learner, cfg.mep_training_steps);
  if (spec.kind == "q") return std::make_unique<QLearningPlanner>(cfg.q);
  if (spec.kind == "mcts") return std::make_unique<MctsPlanner>(MctsConfig{spec.budget, cfg.mcts_exploration});
  if (spec.kind == "rrt") return std::make_unique<RrtPlanner>(RrtConfig{spec.budget, cfg.rrt_goal_bias});
  if (spec.kind == "idle") return std::make_unique<IdlePlanner>();
  throw std::invalid_argument("unknown planner kind '" + spec.kind + "'");
}

BenchmarkResult run_benchmark(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::vector<Environment> envs;
  for (const auto& e : cfg.envs) envs.push_back(build_env(e, cfg.base_seed));
  std::vector<std::unique_ptr<Planner>> planners;
  for (const auto& p : cfg.planners) planners.push_back(build_planner(p, cfg));

  const std::size_t n_cells = envs.size() * planners.size();
  std::vector<RunRecord> records(n_cells * cfg.num_runs);
  parallel_for(records.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t cell = k / cfg.num_runs, run = k % cfg.num_runs;
    const std::size_t e = cell / planners.size(), p = cell % planners.size();
    records[k] = timed_run(envs[e], cfg.envs[e].name, *planners[p], run, cfg.base_seed + run);
  });

  BenchmarkResult result;
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    const std::size_t e = cell / planners.size(), p = cell % planners.size();
    std::vector<RunRecord> slice(records.begin() + static_cast<std::ptrdiff_t>(cell * cfg.num_runs),
                                 records.begin() + static_cast<std::ptrdiff_t>((cell + 1) * cfg.num_runs));
    result.rows.push_back(summarize(cfg.envs[e].name, *planners[p], slice, cfg.base_seed, cfg.record_timing));
  }
  result.records = std::move(records);

  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (out_dir / name).string());
    out << body;
  };
  write("results.jsonl", format_jsonl(result.records, cfg.record_timing));
  write("results.csv", format_csv(result.rows));
  write("results.md", format_table(result.rows));
  return result;
}

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "env,planner,params,success_rate,steps_mean,steps_std,time_mean_ms,n_runs,seed\n";
  auto opt = [](const std::optional<double>& v) { return v ? fixed(*v) : std::string("NA"); };
  for (const auto& r : rows) {
    os << r.env << "," << r.planner << "," << r.params << "," << fixed(r.success_rate) << "," << opt(r.steps_mean)
       << "," << opt(r.steps_std) << "," << opt(r.time_mean_ms) << "," << r.n_runs << "," << r.seed << "\n";
  }
  return os.str();
}

std::string format_jsonl(const std::vector<RunRecord>& records, bool record_timing) {
  std::ostringstream os;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["env"] = r.env;
    j["planner"] = r.planner;
    j["run"] = r.run;
    j["seed"] = r.seed;
    j["success"] = r.outcome.success;
    j["steps"] = r.outcome.steps;
    j["out_of_memory"] = r.outcome.out_of_memory;
    if (record_timing) j["time_ms"] = r.outcome.time_ms;
    os << j.dump() << "\n";
  }
  return os.str();
}

std::string format_table(const std::vector<ResultRow>& rows) {
  std::vector<std::string> envs, planners;
  for (const auto& r : rows) {
    if (std::find(envs.begin(), envs.end(), r.env) == envs.end()) envs.push_back(r.env);
    if (std::find(planners.begin(), planners.end(), r.planner) == planners.end()) planners.push_back(r.planner);
  }
  std::ostringstream os;
  os << "| Planner |";
  for (const auto& e : envs) os << " " << e << " Success | " << e << " Steps |";
  os << "\n|---|";
  for (std::size_t i = 0; i < envs.size(); ++i) os << "---|---|";
  os << "\n";
  for (const auto& p : planners) {
    os << "| " << p << " |";
    for (const auto& e : envs) {
      auto it = std::find_if(rows.begin(), rows.end(), [&](const ResultRow& r) { return r.env == e && r.planner == p; });
      if (it == rows.end()) {
        os << " | |";
        continue;
      }
      os << " " << fixed(it->success_rate, 1) << "% | ";
      if (it->steps_mean) {
        os << fixed(*it->steps_mean, 2) << " ± " << fixed(*it->steps_std, 2);
      } else {
        os << "--";
      }
      os << " |";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace mep
