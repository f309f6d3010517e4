#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mep/environment.hpp"

namespace mep {

// ---- Tabular Q-learning -----------------------------------------------------

/// Q(s, a) with an implicit zero for unseen pairs.
class QTable {
 public:
  explicit QTable(std::size_t num_actions = 0) : num_actions_(num_actions) {}

  std::size_t num_actions() const { return num_actions_; }
  std::size_t num_states() const { return table_.size(); }

  double value(const State& s, ActionId a) const;
  /// Row for `s`, inserted as zeros when unseen.
  std::vector<double>& row(const State& s);
  const std::vector<double>* find(const State& s) const;

 private:
  std::size_t num_actions_;
  std::unordered_map<State, std::vector<double>, StateHash> table_;
};

struct QLearningConfig {
  std::size_t episodes = 20000;
  double learning_rate = 0.1;
  double discount = 0.99;
  double eps_greedy = 0.1;
  std::size_t max_states = 2'000'000;  // table memory budget
};

struct QTrainResult {
  QTable table;
  bool out_of_memory = false;
  std::size_t episodes_run = 0;
};

/// One-step Q-learning; reward 0 on reaching the goal, -1 otherwise.
QTrainResult q_train(const Environment& env, const QLearningConfig& cfg, Rng& rng);

/// Greedy action with uniform tie-breaking.
ActionId q_act(const QTable& table, const State& s, Rng& rng);

// ---- Monte-Carlo tree search --------------------------------------------------

struct MctsConfig {
  std::size_t budget = 1000;  // simulations per decision
  double exploration_c = 0.70710678118654752;
};

struct MctsDecision {
  ActionId action = 0;
  std::vector<std::size_t> root_visits;  // per action
};

/// UCT over the true generative model. `horizon` bounds simulated steps.
MctsDecision mcts_plan(const Environment& env, const State& s, std::size_t horizon, const MctsConfig& cfg, Rng& rng);

// ---- Rapidly-exploring random tree ---------------------------------------------

struct RrtConfig {
  std::size_t max_nodes = 1000;
  double goal_bias = 0.05;
};

struct RrtResult {
  std::optional<std::vector<ActionId>> plan;
  std::size_t tree_size = 0;
  std::vector<std::size_t> parents;  // parent index per node; the root is its own parent
};

/// Grows a tree over the noiseless model from `s` until some node reaches the goal.
RrtResult rrt_plan(const Environment& env, const State& s, const RrtConfig& cfg, Rng& rng);

/// Noiseless successor under the environment's true conditions.
State model_step(const Environment& env, const State& s, ActionId a);

}  // namespace mep
