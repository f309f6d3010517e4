#include "mep/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mep/skills.hpp"

namespace mep {

double estimate_success(const Arm& arm, const State& s, const LearnerConfig& cfg) {
  if (arm.model && arm.model->calibrated) return predict_success(*arm.model, s);
  if (arm.samples.size() < cfg.first_fit) return 1.0;
  return (static_cast<double>(arm.n_success) + 1.0) / (static_cast<double>(arm.n_tries) + 2.0);
}

ArmScore ucb_score(const Arm& arm, double success_estimate, std::size_t total_tries, double gamma) {
  ArmScore score;
  if (arm.n_tries == 0) {
    score.total = std::numeric_limits<double>::infinity();
    score.explore = std::numeric_limits<double>::infinity();
    return score;
  }
  const auto tries = static_cast<double>(arm.n_tries);
  score.exploit = success_estimate * static_cast<double>(arm.n_success) / (static_cast<double>(arm.length()) * tries);
  const double log_total = total_tries > 1 ? std::log(static_cast<double>(total_tries)) : 0.0;
  score.explore = gamma * std::sqrt(log_total / tries);
  score.total = score.exploit + score.explore;
  return score;
}

ArmScore ucb_score(const Arm& arm, const State& s, std::size_t total_tries, const LearnerConfig& cfg) {
  if (cfg.exploit_only) {
    // Without exploration an arm earns its score from recorded successes only.
    ArmScore score;
    if (arm.n_tries > 0) score = ucb_score(arm, estimate_success(arm, s, cfg), total_tries, 0.0);
    return score;
  }
  if (arm.n_tries == 0) return ucb_score(arm, 1.0, total_tries, cfg.gamma);
  return ucb_score(arm, estimate_success(arm, s, cfg), total_tries, cfg.gamma);
}

std::size_t argmax_arm(const Skill& skill, const State& s, const LearnerConfig& cfg, Rng& rng,
                       std::span<const UnitEffect> blocked) {
  expects(!skill.arms.empty(), "skill has no arms");
  const std::size_t total = skill.total_tries();
  std::vector<std::size_t> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < skill.arms.size(); ++i) {
    const auto& arm = skill.arms[i];
    if (std::any_of(blocked.begin(), blocked.end(), [&](const UnitEffect& e) { return arm.contains_skill_ref(e); }))
      continue;
    const double score = ucb_score(skill.arms[i], s, total, cfg).total;
    if (score > best_score) {
      best_score = score;
      best.assign(1, i);
    } else if (score == best_score) {
      best.push_back(i);
    }
  }
  if (best.empty()) return skill.arms.size();
  return best.size() == 1 ? best.front() : best[uniform_index(rng, best.size())];
}

std::size_t select_arm(Skill& skill, SkillLibrary& lib, const State& s, Rng& rng,
                       std::span<const UnitEffect> blocked) {
  expects(!skill.arms.empty(), "skill has no arms");
  const auto& cfg = lib.config();
  if (bernoulli(rng, cfg.epsilon)) {
    std::vector<std::size_t> multi;
    for (std::size_t i = 0; i < skill.arms.size(); ++i)
      if (skill.arms[i].length() >= 2) multi.push_back(i);
    if (!multi.empty()) {
      const Arm& parent = skill.arms[multi[uniform_index(rng, multi.size())]];
      Arm mutant = mutate_arm(parent, rng);
      mutant.id = lib.next_arm_id();
      const auto probes = probe_states(parent, cfg.probe_states, rng);
      admit_arm(skill, std::move(mutant), probes, cfg);
    }
  }
  return argmax_arm(skill, s, cfg, rng, blocked);
}

}  // namespace mep
