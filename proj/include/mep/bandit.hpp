#pragma once

#include <span>

#include <cstddef>

#include "mep/arm.hpp"

namespace mep {

struct ArmScore {
  double exploit = 0.0;
  double explore = 0.0;
  double total = 0.0;
};

/// State-conditional success estimate used in the exploit term.
///
/// A calibrated model is queried when present. Before an arm has collected
/// `first_fit` samples the estimate is optimistic (1.0); afterwards, if no model
/// could be trained (single-class data), the Laplace ratio (N_s+1)/(N_t+2).
double estimate_success(const Arm& arm, const State& s, const LearnerConfig& cfg);

/// exploit = p * N_s / (|arm| * N_t), explore = gamma * sqrt(ln(total_tries) / N_t).
/// Untried arms score +inf.
ArmScore ucb_score(const Arm& arm, double success_estimate, std::size_t total_tries, double gamma);
ArmScore ucb_score(const Arm& arm, const State& s, std::size_t total_tries, const LearnerConfig& cfg);

/// Index of the UCB-maximising arm; ties are broken uniformly at random.
/// Arms calling any skill in `blocked` are ineligible; returns arms.size() when none is eligible.
std::size_t argmax_arm(const Skill& skill, const State& s, const LearnerConfig& cfg, Rng& rng,
                       std::span<const UnitEffect> blocked = {});

/// With probability epsilon proposes a pruned copy of a random multi-step arm
/// (admitted like any other candidate), then returns the argmax arm index.
std::size_t select_arm(Skill& skill, SkillLibrary& lib, const State& s, Rng& rng,
                       std::span<const UnitEffect> blocked = {});

}  // namespace mep
