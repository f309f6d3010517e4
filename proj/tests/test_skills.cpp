#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "mep/harness.hpp"
#include "mep/skills.hpp"
#include "oracles.hpp"

namespace mep {
namespace {

constexpr UnitEffect set1(std::size_t d) { return {d, Transform::kSetOne}; }
constexpr UnitEffect set0(std::size_t d) { return {d, Transform::kSetZero}; }

Arm arm_of(std::vector<Step> steps) {
  Arm a;
  a.steps = std::move(steps);
  return a;
}

TrajectoryRecord replay(const Environment& env, const std::vector<ActionId>& actions, Rng& rng) {
  TrajectoryRecord traj;
  State s = env.initial_state();
  for (ActionId a : actions) {
    TrajectoryEntry e;
    e.before = s;
    e.step = Step::primitive(a);
    s = env.step(s, a, rng);
    e.after = s;
    e.succeeded = infer_success(e.before, e.after, env.action(a).effect) == Outcome::kSuccess;
    traj.entries.push_back(e);
  }
  return traj;
}

void expect_library_invariants(const SkillLibrary& lib) {
  for (const auto& [effect, skill] : lib.skills()) {
    std::set<std::vector<Step>> sequences;
    for (const auto& arm : skill.arms) {
      EXPECT_LE(arm.n_success, arm.n_tries);
      EXPECT_GE(arm.length(), 1u);
      EXPECT_TRUE(sequences.insert(arm.steps).second) << "duplicate arm in skill " << effect.to_string();
      EXPECT_FALSE(arm.contains_skill_ref(effect));
      // Harvested arms carry their window's start as one extra sample; seeded arms and mutants do not.
      const std::size_t extra = arm.samples.size() - arm.n_tries;
      EXPECT_TRUE(extra == 0 || (extra == 1 && !arm.seeded)) << "arm " << arm.id;
    }
  }
}

TEST(Step, TextRoundTrip) {
  for (const Step s : {Step::primitive(0), Step::primitive(17), Step::skill(set1(3)), Step::skill(set0(12))})
    EXPECT_EQ(Step::parse(s.to_string()), s);
  EXPECT_EQ(Step::primitive(3).to_string(), "a3");
  EXPECT_EQ(Step::skill(set1(5)).to_string(), "s5:1");
  for (const char* bad : {"", "a", "b3", "a3x", "s3", "s3:2", "s:1"}) EXPECT_THROW(Step::parse(bad), std::invalid_argument);
}

TEST(InferSuccess, WorkedCases) {
  EXPECT_EQ(infer_success(State{0, 0}, State{1, 0}, set1(0)), Outcome::kSuccess);
  EXPECT_EQ(infer_success(State{0, 0}, State{0, 0}, set1(0)), Outcome::kFailure);
  EXPECT_EQ(infer_success(State{1, 0}, State{1, 0}, set1(0)), Outcome::kInconclusive);
  EXPECT_EQ(infer_success(State{1, 1}, State{0, 1}, Effect{{set0(0), set1(1)}}), Outcome::kSuccess);
  EXPECT_EQ(infer_success(State{1, 0}, State{0, 0}, Effect{{set0(0), set1(1)}}), Outcome::kFailure);
}

TEST(InferSuccess, SuccessImpliesObservedEffect) {
  for (const auto& before : oracle::all_states(3))
    for (const auto& after : oracle::all_states(3))
      for (std::size_t d = 0; d < 3; ++d)
        for (const auto& e : {set1(d), set0(d)}) {
          if (infer_success(before, after, e) != Outcome::kSuccess) continue;
          const auto observed = observed_unit_effects(before, after);
          EXPECT_NE(std::find(observed.begin(), observed.end(), e), observed.end());
        }
}

TEST(ObservedEffects, WorkedCases) {
  EXPECT_TRUE(observed_unit_effects(State{0, 0}, State{0, 0}).empty());
  EXPECT_EQ(observed_unit_effects(State{0, 1}, State{1, 0}), (std::vector<UnitEffect>{set1(0), set0(1)}));
  EXPECT_EQ(observed_unit_effects(State{0, 0, 0}, State{1, 1, 0}), (std::vector<UnitEffect>{set1(0), set1(1)}));
}

TEST(SkillLibrary, SeededWithCarryingPrimitives) {
  const auto env = generate_random_env(22, 3.18, true, 5);
  const auto lib = SkillLibrary::seeded(env);
  std::set<UnitEffect> effects;
  for (const auto& a : env.actions())
    for (const auto& u : a.effect.units) effects.insert(u);
  EXPECT_EQ(lib.skills().size(), effects.size());
  for (const auto& [effect, skill] : lib.skills()) {
    std::set<ActionId> expected, got;
    for (const auto& a : env.actions())
      if (a.effect.contains(effect)) expected.insert(a.id);
    for (const auto& arm : skill.arms) {
      ASSERT_EQ(arm.length(), 1u);
      EXPECT_TRUE(arm.seeded);
      got.insert(arm.steps[0].action);
    }
    EXPECT_EQ(got, expected);
  }
  EXPECT_THROW(lib.skill(set0(0)), ContractViolation);
}

TEST(Harvest, FullChainEpisodeYieldsGoalArm) {
  const std::size_t n = 5;
  const auto env = generate_chain_env(n, 0);
  auto lib = SkillLibrary::seeded(env);
  Rng rng = make_rng(1, Stream::kEnvNoise);
  const auto traj = replay(env, {0, 1, 2, 3, 4}, rng);
  const auto arms = harvest_window(traj, 0, n - 1, lib);
  ASSERT_EQ(arms.size(), n);
  auto goal = std::find_if(arms.begin(), arms.end(), [&](const auto& p) { return p.first == set1(n - 1); });
  ASSERT_NE(goal, arms.end());
  std::vector<Step> expected;
  for (ActionId a = 0; a < n; ++a) expected.push_back(Step::primitive(a));
  EXPECT_EQ(goal->second.steps, expected);
  ASSERT_EQ(goal->second.samples.size(), 1u);
  EXPECT_EQ(goal->second.samples[0], (Sample{env.initial_state(), true}));
  EXPECT_EQ(goal->second.n_tries, 0u);
}

TEST(Harvest, FailedStepWithoutNoiseYieldsNothing) {
  const auto env = generate_chain_env(3, 0);
  auto lib = SkillLibrary::seeded(env);
  Rng rng = make_rng(2, Stream::kEnvNoise);
  const auto traj = replay(env, {2}, rng);
  EXPECT_TRUE(harvest_window(traj, 0, 0, lib).empty());
}

TEST(Harvest, NoiseOnlyEffectsYieldNothing) {
  const auto env = generate_chain_env(3, 0);
  auto lib = SkillLibrary::seeded(env);
  TrajectoryRecord traj;
  traj.entries.push_back({State{0, 0, 0}, Step::primitive(2), State{0, 1, 0}, false, {}});
  EXPECT_TRUE(harvest_window(traj, 0, 0, lib).empty());
}

TEST(Harvest, SkillCallIsReplacedByItsCause) {
  // Skill 1:1 ran the arm [a0, a1]; a later window must end with the primitive that set feature 1.
  const auto env = generate_chain_env(3, 0);
  auto lib = SkillLibrary::seeded(env);
  TrajectoryEntry inner0{State{0, 0, 0}, Step::primitive(0), State{1, 0, 0}, true, {}};
  TrajectoryEntry inner1{State{1, 0, 0}, Step::primitive(1), State{1, 1, 0}, true, {}};
  TrajectoryRecord traj;
  traj.entries.push_back({State{0, 0, 0}, Step::skill(set1(1)), State{1, 1, 0}, true, {inner0, inner1}});
  traj.entries.push_back({State{1, 1, 0}, Step::primitive(2), State{1, 1, 1}, true, {}});
  const auto arms = harvest_window(traj, 0, 1, lib);
  std::map<UnitEffect, std::vector<Step>> by_effect;
  for (const auto& [e, a] : arms) by_effect[e] = a.steps;
  EXPECT_EQ(by_effect[set1(2)], (std::vector<Step>{Step::skill(set1(1)), Step::primitive(2)}));
  EXPECT_EQ(by_effect[set1(1)], (std::vector<Step>{Step::primitive(0), Step::primitive(1)}));
  EXPECT_EQ(by_effect[set1(0)], (std::vector<Step>{Step::primitive(0)}));
}

TEST(Harvest, ArmsAreOrderedSubsequencesOfTheTrajectory) {
  const auto env = generate_random_env(12, 1.5, true, 3, {{0.2, NoiseMode::kPerStep}, 24});
  LearnerConfig cfg;
  cfg.windows_per_episode = 64;
  auto lib = SkillLibrary::seeded(env, cfg);
  Rng rng = make_rng(3, Stream::kAgent), noise = make_rng(3, Stream::kEnvNoise);
  std::vector<ActionId> actions;
  for (int i = 0; i < 40; ++i) actions.push_back(uniform_index(rng, env.num_actions()));
  const auto traj = replay(env, actions, noise);
  const auto arms = harvest_arms(traj, lib, rng);
  EXPECT_FALSE(arms.empty());
  for (const auto& [effect, arm] : arms) {
    EXPECT_TRUE(lib.has_skill(effect));
    // Each arm embeds into the step sequence in order.
    std::size_t cursor = 0;
    for (const auto& step : arm.steps) {
      while (cursor < traj.size() && traj.entries[cursor].step != step) ++cursor;
      ASSERT_LT(cursor, traj.size());
      ++cursor;
    }
    EXPECT_TRUE(env.action(arm.steps.back().action).effect.contains(effect));
  }
}

TEST(Harvest, EmptyTrajectoryIsAContractViolation) {
  SkillLibrary lib;
  Rng rng = make_rng(4, Stream::kAgent);
  EXPECT_THROW(harvest_arms(TrajectoryRecord{}, lib, rng), ContractViolation);
}

TEST(Admission, DuplicateIsMerged) {
  Skill skill;
  skill.intended_effect = set1(2);
  Arm existing = arm_of({Step::primitive(0), Step::primitive(2)});
  existing.n_tries = 3;
  existing.n_success = 1;
  existing.samples.assign(3, Sample{State(3), false});
  skill.arms.push_back(existing);
  Arm candidate = arm_of(existing.steps);
  candidate.samples.push_back({State(3), true});
  EXPECT_EQ(admit_arm(skill, candidate, {}, LearnerConfig{}), Admission::kMerged);
  ASSERT_EQ(skill.arms.size(), 1u);
  EXPECT_EQ(skill.arms[0].n_tries, 4u);
  EXPECT_EQ(skill.arms[0].n_success, 2u);
  EXPECT_EQ(skill.arms[0].samples.size(), 4u);
}

TEST(Admission, FreshArmWithoutModelIsAccepted) {
  Skill skill;
  skill.intended_effect = set1(2);
  EXPECT_EQ(admit_arm(skill, arm_of({Step::primitive(1)}), {}, LearnerConfig{}), Admission::kAccepted);
  EXPECT_EQ(skill.arms.size(), 1u);
}

TEST(Admission, LowMarginalSuccessIsRejected) {
  Skill skill;
  skill.intended_effect = set1(2);
  Arm candidate = arm_of({Step::primitive(1)});
  SuccessModel<double> m;
  m.support_states = State(3).as_vector<double>().transpose();
  m.dual_coefs = Vector<double>::Zero(1);
  m.platt_b = std::log(0.95 / 0.05);
  m.calibrated = true;
  candidate.model = m;
  const std::vector<State> probes(10, State(3));
  LearnerConfig cfg;
  cfg.delta = 0.1;
  EXPECT_EQ(admit_arm(skill, candidate, probes, cfg), Admission::kRejected);
  EXPECT_TRUE(skill.arms.empty());
}

TEST(Admission, SelfReferenceIsRejected) {
  Skill skill;
  skill.intended_effect = set1(2);
  EXPECT_EQ(admit_arm(skill, arm_of({Step::primitive(0), Step::skill(set1(2))}), {}, LearnerConfig{}),
            Admission::kRejected);
}

TEST(Mutation, TwoStepArmBecomesOneOfItsSteps) {
  const Arm arm = arm_of({Step::primitive(0), Step::primitive(1)});
  Rng rng = make_rng(5, Stream::kAgent);
  std::set<std::vector<Step>> seen;
  for (int i = 0; i < 200; ++i) {
    const Arm m = mutate_arm(arm, rng);
    ASSERT_EQ(m.length(), 1u);
    seen.insert(m.steps);
  }
  EXPECT_EQ(seen.size(), 2u);
}

TEST(Mutation, ResultIsAStrictSubsequenceWithFreshStatistics) {
  Rng rng = make_rng(6, Stream::kAgent);
  for (int trial = 0; trial < 500; ++trial) {
    Arm arm;
    const std::size_t len = 2 + uniform_index(rng, 7);
    for (std::size_t i = 0; i < len; ++i) arm.steps.push_back(Step::primitive(i));
    arm.n_tries = 5;
    arm.n_success = 3;
    arm.samples.assign(5, Sample{State(2), true});
    const Arm before = arm;
    const Arm m = mutate_arm(arm, rng);
    EXPECT_EQ(arm, before);
    ASSERT_GE(m.length(), 1u);
    ASSERT_LT(m.length(), len);
    EXPECT_TRUE(std::is_sorted(m.steps.begin(), m.steps.end()));
    EXPECT_EQ(m.n_tries, 0u);
    EXPECT_TRUE(m.samples.empty());
  }
}

TEST(Mutation, SingleStepArmIsReturnedUnchanged) {
  const Arm arm = arm_of({Step::primitive(4)});
  Rng rng = make_rng(7, Stream::kAgent);
  EXPECT_EQ(mutate_arm(arm, rng), arm);
}

TEST(Mutation, ShorterArmOutscoresOriginalOnEqualStatistics) {
  Arm original = arm_of({Step::primitive(0), Step::primitive(1), Step::primitive(2)});
  Rng rng = make_rng(8, Stream::kAgent);
  Arm pruned = mutate_arm(original, rng);
  original.n_tries = pruned.n_tries = 10;
  original.n_success = pruned.n_success = 7;
  EXPECT_GT(ucb_score(pruned, 0.9, 20, 1.0).total, ucb_score(original, 0.9, 20, 1.0).total);
}

TEST(Refit, FollowsSchedule) {
  LearnerConfig cfg;
  Arm arm = arm_of({Step::primitive(0)});
  for (std::size_t i = 0; i < 7; ++i) arm.samples.push_back({State{static_cast<int>(i % 2), 0}, i % 2 == 0});
  EXPECT_FALSE(maybe_refit(arm, cfg));
  arm.samples.push_back({State{1, 1}, false});
  EXPECT_TRUE(maybe_refit(arm, cfg));
  EXPECT_TRUE(arm.model.has_value());
  EXPECT_TRUE(arm.model->calibrated);
  for (int i = 0; i < 15; ++i) arm.samples.push_back({State{0, 1}, true});
  EXPECT_FALSE(maybe_refit(arm, cfg));
  arm.samples.push_back({State{0, 1}, true});
  EXPECT_TRUE(maybe_refit(arm, cfg));
}

TEST(Refit, SingleClassLeavesNoModel) {
  Arm arm = arm_of({Step::primitive(0)});
  arm.samples.assign(8, Sample{State{1, 0}, true});
  EXPECT_FALSE(maybe_refit(arm, LearnerConfig{}));
  EXPECT_FALSE(arm.model.has_value());
  EXPECT_EQ(arm.samples_at_fit, 8u);
}

Environment one_action_env(bool condition_met) {
  PrimitiveAction a{0, Effect{{set1(1)}}, Condition{{{0, Predicate::kMustBeOne}}}};
  State init{condition_met ? 1 : 0, 0};
  return Environment(2, {a}, {0.0, NoiseMode::kPerStep}, 10, 1, init);
}

TEST(ExecuteSkill, PrimitiveArmSucceedsWhenConditionHolds) {
  const auto env = one_action_env(true);
  auto lib = SkillLibrary::seeded(env);
  Rng noise = make_rng(9, Stream::kEnvNoise), rng = make_rng(9, Stream::kAgent);
  Episode ep(env, noise);
  const auto exec = execute_skill(lib, set1(1), ep, rng);
  EXPECT_TRUE(exec.succeeded);
  EXPECT_EQ(exec.trajectory.size(), 1u);
  EXPECT_EQ(ep.steps_taken(), 1u);
  const Arm& arm = lib.skill(set1(1)).arms[0];
  EXPECT_EQ(arm.n_tries, 1u);
  EXPECT_EQ(arm.n_success, 1u);
}

TEST(ExecuteSkill, PrimitiveArmFailsWhenConditionDoesNot) {
  const auto env = one_action_env(false);
  auto lib = SkillLibrary::seeded(env);
  Rng noise = make_rng(10, Stream::kEnvNoise), rng = make_rng(10, Stream::kAgent);
  Episode ep(env, noise);
  const auto exec = execute_skill(lib, set1(1), ep, rng);
  EXPECT_FALSE(exec.succeeded);
  EXPECT_EQ(exec.outcome, Outcome::kFailure);
  const Arm& arm = lib.skill(set1(1)).arms[0];
  EXPECT_EQ(arm.n_tries, 1u);
  EXPECT_EQ(arm.n_success, 0u);
  EXPECT_EQ(arm.samples.size(), 1u);
}

TEST(ExecuteSkill, SatisfiedEffectIsInconclusiveAndRecordsNothing) {
  PrimitiveAction a{0, Effect{{set1(0)}}, {}};
  const Environment env(2, {a}, {0.0, NoiseMode::kPerStep}, 10, 1, State{1, 0});
  auto lib = SkillLibrary::seeded(env);
  Rng noise = make_rng(11, Stream::kEnvNoise), rng = make_rng(11, Stream::kAgent);
  Episode ep(env, noise);
  const auto exec = execute_skill(lib, set1(0), ep, rng);
  EXPECT_EQ(exec.outcome, Outcome::kInconclusive);
  EXPECT_EQ(ep.steps_taken(), 0u);
  EXPECT_EQ(lib.skill(set1(0)).arms[0].n_tries, 0u);
  EXPECT_TRUE(lib.skill(set1(0)).arms[0].samples.empty());
}

TEST(ExecuteSkill, DepthBeyondCapFailsWithoutActing) {
  const auto env = one_action_env(true);
  LearnerConfig cfg;
  cfg.max_depth = 2;
  auto lib = SkillLibrary::seeded(env, cfg);
  Rng noise = make_rng(12, Stream::kEnvNoise), rng = make_rng(12, Stream::kAgent);
  Episode ep(env, noise);
  const auto exec = execute_skill(lib, set1(1), ep, rng, 3);
  EXPECT_FALSE(exec.succeeded);
  EXPECT_EQ(ep.steps_taken(), 0u);
  EXPECT_EQ(lib.skill(set1(1)).arms[0].n_tries, 0u);
}

TEST(ExecuteSkill, UnknownEffectIsAContractViolation) {
  const auto env = one_action_env(true);
  auto lib = SkillLibrary::seeded(env);
  Rng noise = make_rng(13, Stream::kEnvNoise), rng = make_rng(13, Stream::kAgent);
  Episode ep(env, noise);
  EXPECT_THROW(execute_skill(lib, set0(1), ep, rng), ContractViolation);
}

TEST(ExecuteSkill, NestedSkillRecordsOneTopLevelEntry) {
  const auto env = generate_chain_env(3, 0);
  auto lib = SkillLibrary::seeded(env);
  lib.config().epsilon = 0.0;
  auto& goal = lib.skill(set1(2));
  Arm composite = arm_of({Step::skill(set1(1)), Step::primitive(2)});
  composite.id = lib.next_arm_id();
  goal.arms.insert(goal.arms.begin(), composite);
  goal.arms[1].n_tries = 5;  // make the composite arm the only untried one
  auto& mid = lib.skill(set1(1));
  Arm sub = arm_of({Step::primitive(0), Step::primitive(1)});
  sub.id = lib.next_arm_id();
  mid.arms.insert(mid.arms.begin(), sub);
  mid.arms[1].n_tries = 5;
  lib.config().harvest_nested = false;

  Rng noise = make_rng(14, Stream::kEnvNoise), rng = make_rng(14, Stream::kAgent);
  Episode ep(env, noise);
  const auto exec = execute_skill(lib, set1(2), ep, rng);
  EXPECT_TRUE(exec.succeeded);
  EXPECT_EQ(ep.steps_taken(), 3u);
  ASSERT_EQ(exec.trajectory.size(), 2u);
  EXPECT_EQ(exec.trajectory.entries[0].step, Step::skill(set1(1)));
  EXPECT_EQ(exec.trajectory.entries[0].nested.size(), 2u);
  EXPECT_EQ(exec.trajectory.entries[0].after, exec.trajectory.entries[1].before);
}

TEST(ExecuteSkill, NeverExceedsEpisodeBudget) {
  const auto env = generate_random_env(16, 2.0, true, 4, {{0.1, NoiseMode::kPerStep}, 32});
  auto lib = SkillLibrary::seeded(env);
  Rng noise = make_rng(15, Stream::kEnvNoise), rng = make_rng(15, Stream::kAgent);
  lib = train_mep(env, std::move(lib), 2000, rng, noise);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng n2 = make_rng(seed, Stream::kEvalNoise), r2 = make_rng(seed, Stream::kEvalAgent);
    Episode ep(env, n2, 5);
    while (!ep.done()) {
      const auto before = ep.steps_taken();
      execute_skill(lib, set1(env.goal_dim()), ep, r2);
      if (ep.steps_taken() == before) break;
    }
    EXPECT_LE(ep.steps_taken(), 5u);
  }
}

TEST(Training, SingleStepBudget) {
  const auto env = generate_chain_env(4, 0);
  const auto seeded = SkillLibrary::seeded(env);
  Rng rng = make_rng(16, Stream::kAgent), noise = make_rng(16, Stream::kEnvNoise);
  const auto lib = train_mep(env, seeded, 1, rng, noise);
  EXPECT_LE(lib.total_arms(), seeded.total_arms() + 1);
  for (const auto& [e, skill] : lib.skills())
    for (const auto& arm : skill.arms)
      if (!arm.seeded) EXPECT_EQ(arm.length(), 1u);
  EXPECT_THROW(train_mep(env, seeded, 0, rng, noise), ContractViolation);
}

TEST(Training, ChainGoalSkillLearnsAMultiStepArm) {
  const auto env = generate_chain_env(6, 0);
  Rng rng = make_rng(17, Stream::kAgent), noise = make_rng(17, Stream::kEnvNoise);
  auto lib = train_mep(env, SkillLibrary::seeded(env), 5000, rng, noise);
  const auto& goal = lib.skill(set1(5));
  EXPECT_TRUE(std::any_of(goal.arms.begin(), goal.arms.end(), [](const Arm& a) { return a.length() >= 2; }));
  expect_library_invariants(lib);
}

TEST(Training, ChainGoalReachedWithinTwiceTheOptimum) {
  const auto env = generate_chain_env(3, 0);
  const std::size_t optimum = *oracle::bfs_length(env);
  Rng rng = make_rng(18, Stream::kAgent), noise = make_rng(18, Stream::kEnvNoise);
  auto lib = train_mep(env, SkillLibrary::seeded(env), 5000, rng, noise);
  lib.config().epsilon = 0.0;
  lib.config().exploit_only = true;
  Rng eval_noise = make_rng(18, Stream::kEvalNoise);
  Episode ep(env, eval_noise);
  execute_skill(lib, set1(2), ep, rng);
  EXPECT_TRUE(ep.goal_reached());
  EXPECT_LE(ep.steps_taken(), 2 * optimum);
}

TEST(Training, InvariantsHoldOnNoisyConsumingWorld) {
  const auto env = generate_random_env(22, 3.18, true, 9, {{0.05, NoiseMode::kPerStep}, 80});
  Rng rng = make_rng(19, Stream::kAgent), noise = make_rng(19, Stream::kEnvNoise);
  const auto lib = train_mep(env, SkillLibrary::seeded(env), 3000, rng, noise);
  EXPECT_GT(lib.total_arms(), SkillLibrary::seeded(env).total_arms());
  expect_library_invariants(lib);
}

TEST(LibraryFile, RoundTripIsIdentity) {
  const auto env = generate_random_env(12, 2.0, true, 2, {{0.05, NoiseMode::kPerStep}, 30});
  Rng rng = make_rng(20, Stream::kAgent), noise = make_rng(20, Stream::kEnvNoise);
  const auto lib = train_mep(env, SkillLibrary::seeded(env), 3000, rng, noise);
  bool any_model = false;
  for (const auto& [e, s] : lib.skills())
    for (const auto& a : s.arms) any_model |= a.model.has_value();
  EXPECT_TRUE(any_model);
  EXPECT_EQ(parse_library(format_library(lib)), lib);
  const auto path = std::filesystem::temp_directory_path() / "mep_library_roundtrip.txt";
  save_library(lib, path);
  EXPECT_EQ(load_library(path), lib);
  std::filesystem::remove(path);
}

TEST(LibraryFile, MalformedInputIsRejected) {
  const auto env = generate_chain_env(3, 0);
  const std::string text = format_library(SkillLibrary::seeded(env));
  EXPECT_ANY_THROW(parse_library(text.substr(0, text.size() / 2)));
  EXPECT_ANY_THROW(parse_library("MEP-LIBRARY 99\n"));
}

}  // namespace
}  // namespace mep
