#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mep/environment.hpp"
#include "mep/success_model.hpp"

namespace mep {

/// One element of an arm: a primitive action or a call to another skill.
struct Step {
  enum class Kind : std::uint8_t { kPrimitive, kSkill };

  Kind kind = Kind::kPrimitive;
  ActionId action = 0;  // valid for kPrimitive
  UnitEffect effect{};  // valid for kSkill

  static Step primitive(ActionId id) { return Step{Kind::kPrimitive, id, {}}; }
  static Step skill(UnitEffect e) { return Step{Kind::kSkill, 0, e}; }

  bool is_primitive() const { return kind == Kind::kPrimitive; }
  bool is_skill() const { return kind == Kind::kSkill; }

  /// "a3" for action 3, "s5:1" for the skill that sets feature 5.
  std::string to_string() const;
  static Step parse(const std::string& text);

  friend auto operator<=>(const Step&, const Step&) = default;
};

struct Sample {
  State state;
  bool success = false;
  friend bool operator==(const Sample&, const Sample&) = default;
};

/// A stored step sequence with its success statistics and per-arm success classifier.
struct Arm {
  std::uint64_t id = 0;
  std::vector<Step> steps;
  std::size_t n_success = 0;
  std::size_t n_tries = 0;
  std::vector<Sample> samples;
  std::optional<SuccessModel<double>> model;
  std::size_t samples_at_fit = 0;  // sample count when the model was last (re)trained
  bool seeded = false;             // primitive arm the skill was created with

  std::size_t length() const { return steps.size(); }
  bool contains_skill_ref(const UnitEffect& e) const;

  friend bool operator==(const Arm&, const Arm&) = default;
};

struct LearnerConfig {
  double epsilon = 0.2;  // mutation probability at arm selection
  double delta = 0.1;    // admission threshold on marginal success probability
  double gamma = 1.0;    // UCB exploration weight
  std::size_t max_window = 8;
  std::size_t max_depth = 8;
  std::size_t windows_per_episode = 32;
  std::size_t probe_states = 64;
  std::size_t first_fit = 8;               // samples before the first model fit
  std::size_t refit_every = 16;            // new samples between refits
  std::size_t max_training_samples = 256;  // most recent samples used per fit
  double reg_c = 1.0;
  bool harvest_nested = true;  // harvest inside each executed arm's own frame
  bool exploit_only = false;   // drop the exploration bonus when selecting arms

  friend bool operator==(const LearnerConfig&, const LearnerConfig&) = default;
};

/// A bandit over arms sharing one intended unit effect.
struct Skill {
  UnitEffect intended_effect;
  std::vector<Arm> arms;

  std::size_t total_tries() const;
  Arm* find_arm(std::uint64_t id);
  const Arm* find_arm(std::uint64_t id) const;

  friend bool operator==(const Skill&, const Skill&) = default;
};

class SkillLibrary {
 public:
  SkillLibrary() = default;
  explicit SkillLibrary(LearnerConfig config) : config_(config) {}

  /// One skill per distinct unit effect of `env`, each seeded with the primitives that carry it.
  static SkillLibrary seeded(const Environment& env, LearnerConfig config = {});

  const LearnerConfig& config() const { return config_; }
  LearnerConfig& config() { return config_; }

  bool has_skill(const UnitEffect& e) const { return skills_.count(e) != 0; }
  Skill& skill(const UnitEffect& e);
  const Skill& skill(const UnitEffect& e) const;
  std::map<UnitEffect, Skill>& skills() { return skills_; }
  const std::map<UnitEffect, Skill>& skills() const { return skills_; }

  /// Creates an empty skill; used when restoring checkpoints.
  Skill& add_skill(const UnitEffect& e);

  std::uint64_t next_arm_id() { return next_arm_id_++; }
  std::uint64_t peek_next_arm_id() const { return next_arm_id_; }
  void set_next_arm_id(std::uint64_t id) { next_arm_id_ = id; }

  std::size_t total_arms() const;

  friend bool operator==(const SkillLibrary&, const SkillLibrary&) = default;

 private:
  LearnerConfig config_;
  std::map<UnitEffect, Skill> skills_;
  std::uint64_t next_arm_id_ = 0;
};

std::string format_library(const SkillLibrary& lib);
SkillLibrary parse_library(const std::string& text);
void save_library(const SkillLibrary& lib, const std::filesystem::path& path);
SkillLibrary load_library(const std::filesystem::path& path);

}  // namespace mep
