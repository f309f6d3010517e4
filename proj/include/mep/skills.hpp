#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mep/arm.hpp"
#include "mep/bandit.hpp"

namespace mep {

enum class Outcome : std::uint8_t { kSuccess, kFailure, kInconclusive };

/// Success iff every unit of `e` holds afterwards and at least one did not hold before.
/// Inconclusive when `e` already held entirely in `before`.
Outcome infer_success(const State& before, const State& after, const Effect& e);
Outcome infer_success(const State& before, const State& after, const UnitEffect& e);

/// Features that went 0 -> 1 (SetOne) or 1 -> 0 (SetZero) between the two states.
std::vector<UnitEffect> observed_unit_effects(const State& start, const State& end);

struct TrajectoryEntry {
  State before;
  Step step;
  State after;
  bool succeeded = false;
  std::vector<TrajectoryEntry> nested;  // entries of the arm a skill step ran; empty when skipped or primitive
};

struct TrajectoryRecord {
  std::vector<TrajectoryEntry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

/// Candidate arms for the window [first, last] of `traj`, one per observed unit effect.
///
/// The candidate for effect e keeps the state-changing steps up to the entry that last made e
/// hold. When that entry is a skill call, it is replaced by the same construction over the
/// call's nested entries, so every candidate ends with a primitive whose effect contains e.
/// Effects that only noise produced yield no candidate.
std::vector<std::pair<UnitEffect, Arm>> harvest_window(const TrajectoryRecord& traj, std::size_t first,
                                                       std::size_t last, SkillLibrary& lib);

/// Up to `windows_per_episode` uniformly drawn windows of at most `max_window` steps.
std::vector<std::pair<UnitEffect, Arm>> harvest_arms(const TrajectoryRecord& traj, SkillLibrary& lib, Rng& rng);

enum class Admission : std::uint8_t { kAccepted, kMerged, kRejected };

/// Dedup by step sequence, then the marginal-success threshold test for modelled candidates.
Admission admit_arm(Skill& skill, Arm arm, std::span<const State> probe_states, const LearnerConfig& cfg);

/// Admits a harvested candidate into its skill, creating nothing if the skill is unknown.
Admission admit_candidate(SkillLibrary& lib, const UnitEffect& effect, Arm arm, Rng& rng);

/// Strict non-empty subsequence of a multi-step arm with fresh statistics.
Arm mutate_arm(const Arm& arm, Rng& rng);

/// Up to `count` states drawn from the arm's own samples.
std::vector<State> probe_states(const Arm& arm, std::size_t count, Rng& rng);

/// Retrains the arm's model if the refit schedule says so. Returns true when a fit happened.
bool maybe_refit(Arm& arm, const LearnerConfig& cfg);

struct SkillExecution {
  TrajectoryRecord trajectory;  // one entry per top-level step of the chosen arm
  State final_state;
  bool succeeded = false;
  Outcome outcome = Outcome::kFailure;
  std::vector<Step> executed_steps;  // the chosen arm; empty when nothing ran
  std::uint64_t arm_id = 0;
};

/// Runs skill `effect` from the episode's current state.
///
/// A skill whose effect already holds returns immediately (inconclusive, no env step).
/// Calls beyond `max_depth` fail without touching the environment.
SkillExecution execute_skill(SkillLibrary& lib, const UnitEffect& effect, Episode& episode, Rng& rng,
                             std::size_t depth = 0);

}  // namespace mep
