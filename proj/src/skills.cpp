#include "mep/skills.hpp"

#include <algorithm>

namespace mep {

std::string Step::to_string() const {
  if (is_primitive()) return "a" + std::to_string(action);
  return "s" + effect.to_string();
}

Step Step::parse(const std::string& text) {
  auto bad = [&] { return std::invalid_argument("bad step '" + text + "'"); };
  if (text.size() < 2) throw bad();
  try {
    if (text[0] == 'a') {
      std::size_t pos = 0;
      auto id = std::stoull(text.substr(1), &pos);
      if (pos + 1 != text.size()) throw bad();
      return primitive(static_cast<ActionId>(id));
    }
    if (text[0] == 's') {
      auto colon = text.find(':');
      if (colon == std::string::npos || colon + 2 != text.size() || (text.back() != '0' && text.back() != '1'))
        throw bad();
      std::size_t pos = 0;
      auto dim = std::stoull(text.substr(1, colon - 1), &pos);
      if (pos + 1 != colon) throw bad();
      return skill({static_cast<std::size_t>(dim), text.back() == '1' ? Transform::kSetOne : Transform::kSetZero});
    }
  } catch (const std::logic_error&) {
    throw bad();
  }
  throw bad();
}

bool Arm::contains_skill_ref(const UnitEffect& e) const {
  return std::any_of(steps.begin(), steps.end(), [&](const Step& s) { return s.is_skill() && s.effect == e; });
}

std::size_t Skill::total_tries() const {
  std::size_t total = 0;
  for (const auto& a : arms) total += a.n_tries;
  return total;
}

Arm* Skill::find_arm(std::uint64_t id) {
  auto it = std::find_if(arms.begin(), arms.end(), [&](const Arm& a) { return a.id == id; });
  return it == arms.end() ? nullptr : &*it;
}

const Arm* Skill::find_arm(std::uint64_t id) const {
  auto it = std::find_if(arms.begin(), arms.end(), [&](const Arm& a) { return a.id == id; });
  return it == arms.end() ? nullptr : &*it;
}

SkillLibrary SkillLibrary::seeded(const Environment& env, LearnerConfig config) {
  SkillLibrary lib(config);
  for (const auto& action : env.actions()) {
    for (const auto& unit : action.effect.units) {
      Skill& skill = lib.add_skill(unit);
      Arm arm;
      arm.id = lib.next_arm_id();
      arm.steps.push_back(Step::primitive(action.id));
      arm.seeded = true;
      skill.arms.push_back(std::move(arm));
    }
  }
  return lib;
}

Skill& SkillLibrary::skill(const UnitEffect& e) {
  auto it = skills_.find(e);
  expects(it != skills_.end(), "no skill for this unit effect");
  return it->second;
}

const Skill& SkillLibrary::skill(const UnitEffect& e) const {
  auto it = skills_.find(e);
  expects(it != skills_.end(), "no skill for this unit effect");
  return it->second;
}

Skill& SkillLibrary::add_skill(const UnitEffect& e) {
  auto [it, inserted] = skills_.try_emplace(e);
  if (inserted) it->second.intended_effect = e;
  return it->second;
}

std::size_t SkillLibrary::total_arms() const {
  std::size_t n = 0;
  for (const auto& [e, s] : skills_) n += s.arms.size();
  return n;
}

Outcome infer_success(const State& before, const State& after, const Effect& e) {
  expects(before.dim() == after.dim(), "states differ in dimension");
  const bool held_before = std::all_of(e.units.begin(), e.units.end(), [&](const UnitEffect& u) { return u.holds(before); });
  if (held_before) return Outcome::kInconclusive;
  const bool holds_after = std::all_of(e.units.begin(), e.units.end(), [&](const UnitEffect& u) { return u.holds(after); });
  return holds_after ? Outcome::kSuccess : Outcome::kFailure;
}

Outcome infer_success(const State& before, const State& after, const UnitEffect& e) {
  return infer_success(before, after, Effect{{e}});
}

std::vector<UnitEffect> observed_unit_effects(const State& start, const State& end) {
  expects(start.dim() == end.dim(), "states differ in dimension");
  std::vector<UnitEffect> out;
  for (std::size_t d = 0; d < start.dim(); ++d) {
    if (start[d] == end[d]) continue;
    out.push_back({d, end[d] ? Transform::kSetOne : Transform::kSetZero});
  }
  return out;
}

namespace {

bool achieves(const TrajectoryEntry& entry, const UnitEffect& e) { return !e.holds(entry.before) && e.holds(entry.after); }

// Appends the state-changing steps that lead up to, and cause, the last switch of e to true.
bool causal_steps(std::span<const TrajectoryEntry> entries, const UnitEffect& e, const Skill& skill,
                  std::vector<Step>& out) {
  auto producer = std::find_if(entries.rbegin(), entries.rend(), [&](const TrajectoryEntry& x) { return achieves(x, e); });
  if (producer == entries.rend()) return false;
  const auto k = static_cast<std::size_t>(std::distance(producer, entries.rend()) - 1);
  for (std::size_t i = 0; i < k; ++i)
    if (entries[i].before != entries[i].after) out.push_back(entries[i].step);
  const auto& p = entries[k];
  if (p.step.is_skill()) return causal_steps(p.nested, e, skill, out);
  // A primitive causes e only when e is part of its effect, i.e. it seeds skill e.
  const bool causes = std::any_of(skill.arms.begin(), skill.arms.end(), [&](const Arm& a) {
    return a.seeded && a.steps.front() == p.step;
  });
  if (causes) out.push_back(p.step);
  return causes;
}

}  // namespace

std::vector<std::pair<UnitEffect, Arm>> harvest_window(const TrajectoryRecord& traj, std::size_t first,
                                                       std::size_t last, SkillLibrary& lib) {
  expects(first <= last && last < traj.size(), "window outside the trajectory");
  const State& start = traj.entries[first].before;
  const State& end = traj.entries[last].after;
  const std::span<const TrajectoryEntry> window(traj.entries.data() + first, last - first + 1);
  std::vector<std::pair<UnitEffect, Arm>> out;
  for (const auto& effect : observed_unit_effects(start, end)) {
    if (!lib.has_skill(effect)) continue;
    Arm arm;
    if (!causal_steps(window, effect, lib.skill(effect), arm.steps)) continue;
    if (arm.contains_skill_ref(effect)) continue;
    arm.id = lib.next_arm_id();
    arm.samples.push_back({start, true});
    out.emplace_back(effect, std::move(arm));
  }
  return out;
}

std::vector<std::pair<UnitEffect, Arm>> harvest_arms(const TrajectoryRecord& traj, SkillLibrary& lib, Rng& rng) {
  expects(!traj.empty(), "cannot harvest an empty trajectory");
  const auto& cfg = lib.config();
  std::vector<std::pair<UnitEffect, Arm>> out;
  for (std::size_t w = 0; w < cfg.windows_per_episode; ++w) {
    const std::size_t last = uniform_index(rng, traj.size());
    const std::size_t len = 1 + uniform_index(rng, std::min(cfg.max_window, last + 1));
    auto arms = harvest_window(traj, last + 1 - len, last, lib);
    std::move(arms.begin(), arms.end(), std::back_inserter(out));
  }
  return out;
}

Admission admit_arm(Skill& skill, Arm arm, std::span<const State> probe_states, const LearnerConfig& cfg) {
  if (arm.steps.empty() || arm.contains_skill_ref(skill.intended_effect)) return Admission::kRejected;
  auto same = std::find_if(skill.arms.begin(), skill.arms.end(), [&](const Arm& a) { return a.steps == arm.steps; });
  if (same != skill.arms.end()) {
    // Every candidate sample is one more observed attempt of the existing sequence.
    for (const auto& s : arm.samples) {
      same->samples.push_back(s);
      ++same->n_tries;
      if (s.success) ++same->n_success;
    }
    return Admission::kMerged;
  }
  if (arm.model && arm.model->calibrated && !probe_states.empty() &&
      marginal_success(*arm.model, probe_states) < cfg.delta)
    return Admission::kRejected;
  skill.arms.push_back(std::move(arm));
  return Admission::kAccepted;
}

Admission admit_candidate(SkillLibrary& lib, const UnitEffect& effect, Arm arm, Rng& rng) {
  if (!lib.has_skill(effect)) return Admission::kRejected;
  const auto probes = probe_states(arm, lib.config().probe_states, rng);
  return admit_arm(lib.skill(effect), std::move(arm), probes, lib.config());
}

Arm mutate_arm(const Arm& arm, Rng& rng) {
  if (arm.length() < 2) return arm;
  const double drop = 1.0 / static_cast<double>(arm.length());
  Arm out;
  for (;;) {
    out.steps.clear();
    for (const auto& s : arm.steps)
      if (!bernoulli(rng, drop)) out.steps.push_back(s);
    if (!out.steps.empty() && out.steps.size() < arm.length()) break;
  }
  return out;
}

std::vector<State> probe_states(const Arm& arm, std::size_t count, Rng& rng) {
  std::vector<State> out;
  if (arm.samples.empty()) return out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(arm.samples[uniform_index(rng, arm.samples.size())].state);
  return out;
}

bool maybe_refit(Arm& arm, const LearnerConfig& cfg) {
  const std::size_t n = arm.samples.size();
  if (n < cfg.first_fit) return false;
  if (arm.samples_at_fit != 0 && n - arm.samples_at_fit < cfg.refit_every) return false;
  arm.samples_at_fit = n;

  const std::size_t used = std::min(n, cfg.max_training_samples);
  std::vector<State> states;
  std::vector<int> labels;
  states.reserve(used);
  labels.reserve(used);
  for (std::size_t i = n - used; i < n; ++i) {
    states.push_back(arm.samples[i].state);
    labels.push_back(arm.samples[i].success ? 1 : -1);
  }
  auto data = TrainingSet<double>::from(states, labels);
  SvmOptions opts;
  opts.reg_c = cfg.reg_c;
  auto model = train(data, opts);
  // A single-class window keeps the previous model.
  if (!model) return false;
  calibrate(*model, data);
  arm.model = std::move(model);
  return true;
}

namespace {

void record_outcome(const LearnerConfig& cfg, Skill& skill, std::uint64_t arm_id, const State& start, bool success) {
  Arm* arm = skill.find_arm(arm_id);
  if (!arm) return;
  arm->samples.push_back({start, success});
  ++arm->n_tries;
  if (success) ++arm->n_success;
  maybe_refit(*arm, cfg);
}

}  // namespace

namespace {

// `active` holds the skills currently executing above this call.
SkillExecution run_skill(SkillLibrary& lib, const UnitEffect& effect, Episode& episode, Rng& rng, std::size_t depth,
                         std::vector<UnitEffect>& active) {
  expects(lib.has_skill(effect), "no skill for this unit effect");
  SkillExecution out;
  const State start = episode.state();
  out.final_state = start;
  if (effect.holds(start)) {
    out.outcome = Outcome::kInconclusive;
    out.succeeded = true;
    return out;
  }
  if (depth > lib.config().max_depth || episode.done()) return out;

  Skill& skill = lib.skill(effect);
  active.push_back(effect);
  const std::size_t chosen = select_arm(skill, lib, start, rng, active);
  if (chosen == skill.arms.size()) {
    active.pop_back();
    return out;
  }
  out.arm_id = skill.arms[chosen].id;
  out.executed_steps = skill.arms[chosen].steps;

  bool aborted = false;
  for (const auto& step : out.executed_steps) {
    if (episode.done()) {
      aborted = !episode.goal_reached();
      break;
    }
    TrajectoryEntry entry;
    entry.before = episode.state();
    entry.step = step;
    if (step.is_primitive()) {
      episode.act(step.action);
      entry.succeeded =
          infer_success(entry.before, episode.state(), episode.env().action(step.action).effect) == Outcome::kSuccess;
    } else {
      auto sub = run_skill(lib, step.effect, episode, rng, depth + 1, active);
      entry.succeeded = sub.succeeded;
      entry.nested = std::move(sub.trajectory.entries);
    }
    entry.after = episode.state();
    out.trajectory.entries.push_back(std::move(entry));
  }

  active.pop_back();
  out.final_state = episode.state();
  out.outcome = aborted ? Outcome::kFailure : infer_success(start, out.final_state, effect);
  out.succeeded = out.outcome == Outcome::kSuccess;
  record_outcome(lib.config(), skill, out.arm_id, start, out.succeeded);

  if (lib.config().harvest_nested && !out.trajectory.empty()) {
    const auto& traj = out.trajectory;
    const std::size_t last = uniform_index(rng, traj.size());
    const std::size_t len = 1 + uniform_index(rng, std::min(lib.config().max_window, last + 1));
    for (auto& [e, arm] : harvest_window(traj, last + 1 - len, last, lib)) {
      // The executed arm itself was already counted by record_outcome.
      if (e == effect && arm.steps == out.executed_steps) continue;
      admit_candidate(lib, e, std::move(arm), rng);
    }
  }
  return out;
}

}  // namespace

SkillExecution execute_skill(SkillLibrary& lib, const UnitEffect& effect, Episode& episode, Rng& rng,
                             std::size_t depth) {
  std::vector<UnitEffect> active;
  return run_skill(lib, effect, episode, rng, depth, active);
}

}  // namespace mep
