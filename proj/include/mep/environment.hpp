#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mep/core.hpp"
#include "mep/state.hpp"

namespace mep {

enum class Predicate : std::uint8_t { kMustBeOne, kMustBeZero };
enum class Transform : std::uint8_t { kSetOne, kSetZero };

struct UnitCondition {
  std::size_t dim = 0;
  Predicate predicate = Predicate::kMustBeOne;

  bool holds(const State& s) const { return s.at(dim) == (predicate == Predicate::kMustBeOne); }
  friend auto operator<=>(const UnitCondition&, const UnitCondition&) = default;
};

/// Conjunction of unit conditions; empty means always fulfilled.
struct Condition {
  std::vector<UnitCondition> units;
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct UnitEffect {
  std::size_t dim = 0;
  Transform transform = Transform::kSetOne;

  bool value() const { return transform == Transform::kSetOne; }
  /// True when the feature already carries the value this effect would write.
  bool holds(const State& s) const { return s.at(dim) == value(); }
  std::string to_string() const;

  friend auto operator<=>(const UnitEffect&, const UnitEffect&) = default;
};

struct Effect {
  std::vector<UnitEffect> units;
  bool contains(const UnitEffect& u) const;
  friend bool operator==(const Effect&, const Effect&) = default;
};

using ActionId = std::size_t;

/// An action's effect is public; its condition is only consulted by the environment.
struct PrimitiveAction {
  ActionId id = 0;
  Effect effect;
  Condition condition;
  friend bool operator==(const PrimitiveAction&, const PrimitiveAction&) = default;
};

enum class NoiseMode : std::uint8_t {
  kPerStep,       // with probability p, one uniformly chosen feature flips
  kPerDimension,  // every feature flips independently with probability p
};

struct NoiseModel {
  double flip_prob = 0.05;
  NoiseMode mode = NoiseMode::kPerStep;
  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

bool evaluate_condition(const State& s, const Condition& c);
State apply_effect(const State& s, const Effect& e);
State apply_noise(const State& s, const NoiseModel& n, Rng& rng);

/// Immutable world description. Action ids equal their position in actions().
class Environment {
 public:
  Environment(std::size_t dim, std::vector<PrimitiveAction> actions, NoiseModel noise, std::size_t episode_length,
              std::size_t goal_dim, std::optional<State> initial_state = std::nullopt);

  std::size_t dim() const { return dim_; }
  const std::vector<PrimitiveAction>& actions() const { return actions_; }
  const PrimitiveAction& action(ActionId id) const {
    expects(id < actions_.size(), "unknown action id");
    return actions_[id];
  }
  std::size_t num_actions() const { return actions_.size(); }
  const NoiseModel& noise() const { return noise_; }
  std::size_t episode_length() const { return episode_length_; }
  std::size_t goal_dim() const { return goal_dim_; }
  const State& initial_state() const { return initial_state_; }

  bool goal_reached(const State& s) const { return s.at(goal_dim_); }

  /// One transition of the world for action `id` from `s`.
  State step(const State& s, ActionId id, Rng& rng) const;

  /// Same world with a different noise model.
  Environment with_noise(NoiseModel noise) const;
  Environment with_episode_length(std::size_t episode_length) const;

  friend bool operator==(const Environment&, const Environment&) = default;

 private:
  std::size_t dim_;
  std::vector<PrimitiveAction> actions_;
  NoiseModel noise_;
  std::size_t episode_length_;
  std::size_t goal_dim_;
  State initial_state_;
};

State env_step(const Environment& env, const State& s, const PrimitiveAction& a, Rng& rng);
inline bool goal_reached(const Environment& env, const State& s) { return env.goal_reached(s); }

/// Mutable run of one episode: the current state plus the primitive-step budget.
class Episode {
 public:
  Episode(const Environment& env, Rng& noise_rng)
      : Episode(env, noise_rng, env.episode_length()) {}
  Episode(const Environment& env, Rng& noise_rng, std::size_t budget)
      : env_(&env), noise_rng_(&noise_rng), state_(env.initial_state()), budget_(budget) {}

  const Environment& env() const { return *env_; }
  const State& state() const { return state_; }
  std::size_t steps_taken() const { return steps_; }
  std::size_t remaining() const { return budget_ - steps_; }
  bool exhausted() const { return steps_ >= budget_; }
  bool goal_reached() const { return env_->goal_reached(state_); }
  bool done() const { return exhausted() || goal_reached(); }

  const State& act(ActionId id);
  void reset(std::size_t budget);

 private:
  const Environment* env_;
  Rng* noise_rng_;
  State state_;
  std::size_t budget_;
  std::size_t steps_ = 0;
};

/// Feature-level dependency graph; an edge (source, action) means the action needs source = 1.
struct DependencyGraph {
  std::size_t num_nodes = 0;
  std::vector<std::pair<std::size_t, ActionId>> edges;

  /// Kahn ordering over node -> node edges induced through the actions' SetOne effects.
  std::optional<std::vector<std::size_t>> topological_order(const Environment& env) const;
};

DependencyGraph dependency_graph(const Environment& env);

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Environment generate_chain_env(std::size_t n, std::uint64_t seed, NoiseModel noise = {0.0, NoiseMode::kPerStep},
                               std::size_t episode_length = 0);

struct RandomEnvOptions {
  NoiseModel noise{};
  std::size_t episode_length = 0;  // 0 -> 2 * n
  double consume_fraction = 0.5;   // share of actions that try to consume a parent
  double locality = 0.0;           // parent preference decay over creation distance; 0 = uniform
};

Environment generate_random_env(std::size_t n, double avg_edges, bool consuming, std::uint64_t seed,
                                const RandomEnvOptions& options = {});

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::string format_env(const Environment& env);
Environment parse_env(const std::string& text);
void save_env(const Environment& env, const std::filesystem::path& path);
Environment load_env(const std::filesystem::path& path);

}  // namespace mep
