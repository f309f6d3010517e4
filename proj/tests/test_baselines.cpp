#include <gtest/gtest.h>

#include <numeric>

#include "mep/baselines.hpp"
#include "oracles.hpp"

namespace mep {
namespace {

std::size_t greedy_rollout(const Environment& env, const QTable& q, Rng& rng) {
  Rng noise = make_rng(0, Stream::kEvalNoise);
  Episode ep(env, noise);
  while (!ep.done()) ep.act(q_act(q, ep.state(), rng));
  return ep.goal_reached() ? ep.steps_taken() : std::numeric_limits<std::size_t>::max();
}

TEST(QLearning, OneStepWorld) {
  PrimitiveAction a{0, Effect{{{1, Transform::kSetOne}}}, {}};
  const Environment env(2, {a}, {0.0, NoiseMode::kPerStep}, 5, 1);
  QLearningConfig cfg;
  cfg.episodes = 50;
  Rng rng = make_rng(1, Stream::kAgent);
  const auto trained = q_train(env, cfg, rng);
  EXPECT_EQ(greedy_rollout(env, trained.table, rng), 1u);
}

TEST(QLearning, ChainGreedyRolloutMatchesBfs) {
  for (std::size_t n : {4, 5, 6}) {
    const auto env = generate_chain_env(n, 0);
    Rng rng = make_rng(n, Stream::kAgent);
    const auto trained = q_train(env, QLearningConfig{}, rng);
    EXPECT_FALSE(trained.out_of_memory);
    EXPECT_EQ(greedy_rollout(env, trained.table, rng), *oracle::bfs_length(env)) << "n=" << n;
  }
}

TEST(QLearning, RandomSmallWorldsConvergeToBfsOptimum) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto env = generate_random_env(8, 1.5, false, seed, {{0.0, NoiseMode::kPerStep}, 30});
    Rng rng = make_rng(seed, Stream::kAgent);
    QLearningConfig cfg;
    cfg.episodes = 30000;
    const auto trained = q_train(env, cfg, rng);
    EXPECT_EQ(greedy_rollout(env, trained.table, rng), *oracle::bfs_length(env)) << "seed " << seed;
  }
}

TEST(QLearning, MemoryBudgetIsReported) {
  const auto env = generate_random_env(22, 2.27, false, 0, {{0.05, NoiseMode::kPerStep}, 40});
  QLearningConfig cfg;
  cfg.max_states = 50;
  Rng rng = make_rng(2, Stream::kAgent);
  const auto trained = q_train(env, cfg, rng);
  EXPECT_TRUE(trained.out_of_memory);
  EXPECT_LE(trained.table.num_states(), cfg.max_states + 1);
}

TEST(QLearning, TableStartsAtZero) {
  QTable q(3);
  EXPECT_DOUBLE_EQ(q.value(State{0, 1}, 2), 0.0);
  EXPECT_EQ(q.row(State{0, 1}), (std::vector<double>{0, 0, 0}));
}

TEST(QAct, DominantActionWins) {
  QTable q(3);
  q.row(State{1, 0}) = {-1.0, 0.5, -2.0};
  Rng rng = make_rng(3, Stream::kAgent);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(q_act(q, State{1, 0}, rng), 1u);
}

TEST(QAct, TiesSplitEvenly) {
  QTable q(3);
  q.row(State{1, 0}) = {0.0, 0.0, -1.0};
  Rng rng = make_rng(4, Stream::kAgent);
  int first = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = q_act(q, State{1, 0}, rng);
    ASSERT_NE(a, 2u);
    first += a == 0;
  }
  EXPECT_NEAR(first / 1000.0, 0.5, 0.05);
}

TEST(QAct, UnseenStateIsUniform) {
  QTable q(4);
  Rng rng = make_rng(5, Stream::kAgent);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 4000; ++i) ++counts[q_act(q, State{0, 0}, rng)];
  for (int c : counts) EXPECT_NEAR(c / 4000.0, 0.25, 0.03);
}

TEST(Mcts, PicksTheOneStepGoalAction) {
  std::vector<PrimitiveAction> actions;
  for (std::size_t i = 0; i < 4; ++i) actions.push_back({i, Effect{{{i, Transform::kSetOne}}}, {}});
  const Environment env(4, actions, {0.05, NoiseMode::kPerStep}, 10, 2);
  MctsConfig cfg;
  cfg.budget = 100;
  int correct = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng = make_rng(seed, Stream::kPlanner);
    correct += mcts_plan(env, env.initial_state(), env.episode_length(), cfg, rng).action == 2;
  }
  EXPECT_GE(correct, 95);
}

TEST(Mcts, RootVisitsSumToBudget) {
  const auto env = generate_random_env(10, 1.5, false, 1, {{0.05, NoiseMode::kPerStep}, 20});
  for (std::size_t budget : {1, 10, 100, 1000}) {
    MctsConfig cfg;
    cfg.budget = budget;
    Rng rng = make_rng(budget, Stream::kPlanner);
    const auto d = mcts_plan(env, env.initial_state(), env.episode_length(), cfg, rng);
    EXPECT_EQ(std::accumulate(d.root_visits.begin(), d.root_visits.end(), std::size_t{0}), budget);
    EXPECT_LT(d.action, env.num_actions());
  }
}

TEST(Mcts, ZeroBudgetIsAContractViolation) {
  const auto env = generate_chain_env(3, 0);
  MctsConfig cfg;
  cfg.budget = 0;
  Rng rng = make_rng(6, Stream::kPlanner);
  EXPECT_THROW(mcts_plan(env, env.initial_state(), 5, cfg, rng), ContractViolation);
}

TEST(Rrt, FindsChainPath) {
  const auto env = generate_chain_env(4, 0);
  int found = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(seed, Stream::kPlanner);
    const auto r = rrt_plan(env, env.initial_state(), RrtConfig{}, rng);
    if (!r.plan) continue;
    ++found;
    State s = env.initial_state();
    for (ActionId a : *r.plan) s = model_step(env, s, a);
    EXPECT_TRUE(env.goal_reached(s));
  }
  EXPECT_GE(found, 9);
}

TEST(Rrt, TreeRespectsNodeCapAndParentStructure) {
  const auto env = generate_random_env(22, 2.27, false, 2);
  for (std::size_t cap : {1, 5, 50, 500}) {
    RrtConfig cfg;
    cfg.max_nodes = cap;
    Rng rng = make_rng(cap, Stream::kPlanner);
    const auto r = rrt_plan(env, env.initial_state(), cfg, rng);
    EXPECT_LE(r.tree_size, cap);
    ASSERT_EQ(r.parents.size(), r.tree_size);
    EXPECT_EQ(r.parents[0], 0u);
    for (std::size_t i = 1; i < r.parents.size(); ++i) EXPECT_LT(r.parents[i], i);
  }
}

TEST(Rrt, GoalAtRootGivesEmptyPlan) {
  PrimitiveAction a{0, Effect{{{0, Transform::kSetOne}}}, {}};
  const Environment env(2, {a}, {}, 5, 1);
  Rng rng = make_rng(7, Stream::kPlanner);
  const auto r = rrt_plan(env, State{0, 1}, RrtConfig{}, rng);
  ASSERT_TRUE(r.plan);
  EXPECT_TRUE(r.plan->empty());
}

TEST(ModelStep, IsTheNoiselessTransition) {
  const auto env = generate_random_env(6, 1.5, true, 3, {{0.5, NoiseMode::kPerStep}, 12});
  const auto quiet = env.with_noise({0.0, NoiseMode::kPerStep});
  Rng rng = make_rng(8, Stream::kEnvNoise);
  for (const auto& s : oracle::all_states(6))
    for (ActionId a = 0; a < env.num_actions(); ++a) EXPECT_EQ(model_step(env, s, a), quiet.step(s, a, rng));
}

}  // namespace
}  // namespace mep
