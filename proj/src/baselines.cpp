#include "mep/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace mep {

namespace {

template <typename Values>
std::size_t argmax_random_tie(const Values& values, Rng& rng) {
  std::vector<std::size_t> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > best_value) {
      best_value = values[i];
      best.assign(1, i);
    } else if (values[i] == best_value) {
      best.push_back(i);
    }
  }
  return best.size() == 1 ? best.front() : best[uniform_index(rng, best.size())];
}

}  // namespace

double QTable::value(const State& s, ActionId a) const {
  const auto* r = find(s);
  return r ? (*r)[a] : 0.0;
}

std::vector<double>& QTable::row(const State& s) {
  auto [it, inserted] = table_.try_emplace(s);
  if (inserted) it->second.assign(num_actions_, 0.0);
  return it->second;
}

const std::vector<double>* QTable::find(const State& s) const {
  auto it = table_.find(s);
  return it == table_.end() ? nullptr : &it->second;
}

QTrainResult q_train(const Environment& env, const QLearningConfig& cfg, Rng& rng) {
  QTrainResult result{QTable(env.num_actions()), false, 0};
  QTable& q = result.table;
  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    State s = env.initial_state();
    for (std::size_t t = 0; t < env.episode_length(); ++t) {
      auto& row = q.row(s);
      if (q.num_states() > cfg.max_states) {
        result.out_of_memory = true;
        return result;
      }
      const ActionId a = bernoulli(rng, cfg.eps_greedy) ? uniform_index(rng, env.num_actions())
                                                        : argmax_random_tie(row, rng);
      State next = env.step(s, a, rng);
      const bool terminal = env.goal_reached(next);
      double target = terminal ? 0.0 : -1.0;
      if (!terminal) {
        const auto* next_row = q.find(next);
        target += cfg.discount * (next_row ? *std::max_element(next_row->begin(), next_row->end()) : 0.0);
      }
      row[a] += cfg.learning_rate * (target - row[a]);
      if (terminal) break;
      s = std::move(next);
    }
    result.episodes_run = ep + 1;
  }
  return result;
}

ActionId q_act(const QTable& table, const State& s, Rng& rng) {
  expects(table.num_actions() > 0, "Q-table has no actions");
  const auto* row = table.find(s);
  if (!row) return uniform_index(rng, table.num_actions());
  return argmax_random_tie(*row, rng);
}

namespace {

struct ActionStats {
  std::size_t visits = 0;
  double value_sum = 0.0;
  std::vector<std::pair<State, std::size_t>> outcomes;  // successor state -> node
};

struct TreeNode {
  State state;
  std::size_t visits = 0;
  std::vector<ActionStats> actions;
  std::vector<ActionId> untried;
};

class UctSearch {
 public:
  UctSearch(const Environment& env, std::size_t horizon, const MctsConfig& cfg, Rng& rng)
      : env_(env), horizon_(horizon), cfg_(cfg), rng_(rng) {}

  MctsDecision run(const State& root_state) {
    nodes_.clear();
    add_node(root_state);
    for (std::size_t i = 0; i < cfg_.budget; ++i) simulate();
    MctsDecision d;
    for (const auto& a : nodes_[0].actions) d.root_visits.push_back(a.visits);
    d.action = argmax_random_tie(d.root_visits, rng_);
    return d;
  }

 private:
  std::size_t add_node(const State& s) {
    TreeNode n;
    n.state = s;
    n.actions.resize(env_.num_actions());
    n.untried.resize(env_.num_actions());
    for (std::size_t a = 0; a < n.untried.size(); ++a) n.untried[a] = a;
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  // Steps not ending at the goal each cost 1; the return is normalised into [0, 1].
  double normalised(std::size_t cost) const {
    return horizon_ == 0 ? 0.0 : 1.0 - static_cast<double>(cost) / static_cast<double>(horizon_);
  }

  std::size_t rollout(State s, std::size_t depth) {
    std::size_t cost = 0;
    while (depth < horizon_ && !env_.goal_reached(s)) {
      s = env_.step(s, uniform_index(rng_, env_.num_actions()), rng_);
      ++depth;
      if (!env_.goal_reached(s)) ++cost;
    }
    return cost;
  }

  std::size_t child_for(std::size_t node, ActionId a, const State& next, bool& created) {
    auto& outcomes = nodes_[node].actions[a].outcomes;
    for (const auto& [st, idx] : outcomes)
      if (st == next) {
        created = false;
        return idx;
      }
    created = true;
    const std::size_t idx = add_node(next);
    nodes_[node].actions[a].outcomes.emplace_back(next, idx);
    return idx;
  }

  ActionId select(std::size_t node) {
    const auto& n = nodes_[node];
    const double log_n = std::log(static_cast<double>(std::max<std::size_t>(n.visits, 1)));
    std::vector<double> scores(n.actions.size());
    for (std::size_t a = 0; a < n.actions.size(); ++a) {
      const auto& st = n.actions[a];
      scores[a] = st.value_sum / static_cast<double>(st.visits) +
                  2.0 * cfg_.exploration_c * std::sqrt(2.0 * log_n / static_cast<double>(st.visits));
    }
    return argmax_random_tie(scores, rng_);
  }

  void simulate() {
    std::vector<std::pair<std::size_t, ActionId>> path;
    std::size_t node = 0, depth = 0, cost = 0;
    for (;;) {
      if (depth >= horizon_ || env_.goal_reached(nodes_[node].state)) break;
      ActionId a;
      bool expand = false;
      if (!nodes_[node].untried.empty()) {
        auto& untried = nodes_[node].untried;
        const std::size_t pick = uniform_index(rng_, untried.size());
        a = untried[pick];
        untried.erase(untried.begin() + static_cast<std::ptrdiff_t>(pick));
        expand = true;
      } else {
        a = select(node);
      }
      State next = env_.step(nodes_[node].state, a, rng_);
      ++depth;
      if (!env_.goal_reached(next)) ++cost;
      path.emplace_back(node, a);
      bool created = false;
      const std::size_t child = child_for(node, a, next, created);
      node = child;
      if (expand || created) {
        cost += rollout(nodes_[child].state, depth);
        break;
      }
    }
    const double value = normalised(cost);
    nodes_[0].visits += path.empty() ? 1 : 0;
    for (const auto& [n, a] : path) {
      ++nodes_[n].visits;
      ++nodes_[n].actions[a].visits;
      nodes_[n].actions[a].value_sum += value;
    }
  }

  const Environment& env_;
  std::size_t horizon_;
  const MctsConfig& cfg_;
  Rng& rng_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

MctsDecision mcts_plan(const Environment& env, const State& s, std::size_t horizon, const MctsConfig& cfg, Rng& rng) {
  expects(cfg.budget >= 1, "search budget must be positive");
  expects(env.num_actions() > 0, "environment has no actions");
  UctSearch search(env, horizon, cfg, rng);
  return search.run(s);
}

State model_step(const Environment& env, const State& s, ActionId a) {
  const auto& action = env.action(a);
  return evaluate_condition(s, action.condition) ? apply_effect(s, action.effect) : s;
}

RrtResult rrt_plan(const Environment& env, const State& s, const RrtConfig& cfg, Rng& rng) {
  expects(cfg.max_nodes >= 1, "tree needs room for at least the root");
  RrtResult result;
  std::vector<State> states{s};
  std::vector<ActionId> via{0};
  result.parents.push_back(0);
  std::unordered_set<State, StateHash> seen{s};

  auto path_to = [&](std::size_t node) {
    std::vector<ActionId> plan;
    for (; node != 0; node = result.parents[node]) plan.push_back(via[node]);
    std::reverse(plan.begin(), plan.end());
    return plan;
  };

  if (env.goal_reached(s)) {
    result.plan = std::vector<ActionId>{};
    result.tree_size = 1;
    return result;
  }

  State goal_target(env.dim());
  for (std::size_t d = 0; d < env.dim(); ++d) goal_target.set(d, true);

  const std::size_t max_iterations = 10 * cfg.max_nodes;
  for (std::size_t it = 0; it < max_iterations && states.size() < cfg.max_nodes; ++it) {
    State target(env.dim());
    if (bernoulli(rng, cfg.goal_bias)) {
      target = goal_target;
    } else {
      for (std::size_t d = 0; d < env.dim(); ++d) target.set(d, bernoulli(rng, 0.5));
    }

    std::vector<std::size_t> nearest;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < states.size(); ++i) {
      const std::size_t d = hamming_distance(states[i], target);
      if (d < best) {
        best = d;
        nearest.assign(1, i);
      } else if (d == best) {
        nearest.push_back(i);
      }
    }
    const std::size_t from = nearest[uniform_index(rng, nearest.size())];

    // Steer: among applicable actions that lead somewhere new, prefer those landing closest to the target.
    std::vector<std::pair<ActionId, State>> options;
    std::size_t best_distance = std::numeric_limits<std::size_t>::max();
    for (ActionId a = 0; a < env.num_actions(); ++a) {
      if (!evaluate_condition(states[from], env.action(a).condition)) continue;
      State next = apply_effect(states[from], env.action(a).effect);
      if (seen.count(next)) continue;
      const std::size_t d = hamming_distance(next, target);
      if (d < best_distance) {
        best_distance = d;
        options.clear();
      }
      if (d == best_distance) options.emplace_back(a, std::move(next));
    }
    if (options.empty()) continue;
    auto& [action, next] = options[uniform_index(rng, options.size())];
    seen.insert(next);
    states.push_back(next);
    via.push_back(action);
    result.parents.push_back(from);
    if (env.goal_reached(next)) {
      result.plan = path_to(states.size() - 1);
      break;
    }
  }
  result.tree_size = states.size();
  return result;
}

}  // namespace mep
