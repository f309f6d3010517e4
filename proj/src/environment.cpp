#include "mep/environment.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace mep {

State State::parse(std::string_view text) {
  State s(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '0' && text[i] != '1') throw std::invalid_argument("state string must contain only 0 and 1");
    s.bits_[i] = text[i] == '1' ? 1 : 0;
  }
  return s;
}

std::size_t State::count_ones() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::string State::to_string() const {
  std::string out(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) out[i] = bits_[i] ? '1' : '0';
  return out;
}

std::size_t State::hash() const {
  // FNV-1a over packed 64-bit words.
  std::uint64_t h = 1469598103934665603ULL;
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    word |= static_cast<std::uint64_t>(bits_[i]) << (i % 64);
    if (i % 64 == 63 || i + 1 == bits_.size()) {
      h ^= word;
      h *= 1099511628211ULL;
      word = 0;
    }
  }
  h ^= bits_.size();
  return static_cast<std::size_t>(splitmix64(h));
}

std::size_t hamming_distance(const State& a, const State& b) {
  expects(a.dim() == b.dim(), "hamming distance needs equal dimensions");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) d += a[i] != b[i];
  return d;
}

std::string UnitEffect::to_string() const {
  return std::to_string(dim) + (transform == Transform::kSetOne ? ":1" : ":0");
}

bool Effect::contains(const UnitEffect& u) const {
  return std::find(units.begin(), units.end(), u) != units.end();
}

bool evaluate_condition(const State& s, const Condition& c) {
  for (const auto& unit : c.units) {
    expects(unit.dim < s.dim(), "condition dimension out of range");
    if (!unit.holds(s)) return false;
  }
  return true;
}

State apply_effect(const State& s, const Effect& e) {
  State out = s;
  for (const auto& unit : e.units) {
    expects(unit.dim < s.dim(), "effect dimension out of range");
    out.set(unit.dim, unit.value());
  }
  return out;
}

State apply_noise(const State& s, const NoiseModel& n, Rng& rng) {
  if (n.flip_prob <= 0.0 || s.dim() == 0) return s;
  State out = s;
  switch (n.mode) {
    case NoiseMode::kPerStep:
      if (bernoulli(rng, n.flip_prob)) out.flip(uniform_index(rng, s.dim()));
      break;
    case NoiseMode::kPerDimension:
      for (std::size_t i = 0; i < s.dim(); ++i)
        if (bernoulli(rng, n.flip_prob)) out.flip(i);
      break;
  }
  return out;
}

namespace {

template <typename Unit>
void check_units(const std::vector<Unit>& units, std::size_t dim, const char* what) {
  std::set<std::size_t> seen;
  for (const auto& u : units) {
    if (u.dim >= dim) throw std::invalid_argument(std::string(what) + " dimension out of range");
    if (!seen.insert(u.dim).second) throw std::invalid_argument(std::string(what) + " repeats a dimension");
  }
}

}  // namespace

Environment::Environment(std::size_t dim, std::vector<PrimitiveAction> actions, NoiseModel noise,
                         std::size_t episode_length, std::size_t goal_dim, std::optional<State> initial_state)
    : dim_(dim),
      actions_(std::move(actions)),
      noise_(noise),
      episode_length_(episode_length),
      goal_dim_(goal_dim),
      initial_state_(initial_state.value_or(State(dim))) {
  if (dim_ == 0) throw std::invalid_argument("environment dimension must be positive");
  if (goal_dim_ >= dim_) throw std::invalid_argument("goal dimension out of range");
  if (initial_state_.dim() != dim_) throw std::invalid_argument("initial state has wrong dimension");
  if (initial_state_[goal_dim_]) throw std::invalid_argument("initial state already satisfies the goal");
  if (noise_.flip_prob < 0.0 || noise_.flip_prob > 1.0) throw std::invalid_argument("noise probability outside [0,1]");
  if (episode_length_ == 0) throw std::invalid_argument("episode length must be positive");
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    const auto& a = actions_[i];
    if (a.id != i) throw std::invalid_argument("action ids must equal their position");
    if (a.effect.units.empty()) throw std::invalid_argument("action " + std::to_string(i) + " has an empty effect");
    check_units(a.effect.units, dim_, "effect");
    check_units(a.condition.units, dim_, "condition");
  }
}

Environment Environment::with_noise(NoiseModel noise) const {
  return Environment(dim_, actions_, noise, episode_length_, goal_dim_, initial_state_);
}

Environment Environment::with_episode_length(std::size_t episode_length) const {
  return Environment(dim_, actions_, noise_, episode_length, goal_dim_, initial_state_);
}

State Environment::step(const State& s, ActionId id, Rng& rng) const {
  const auto& a = action(id);
  if (evaluate_condition(s, a.condition)) return apply_noise(apply_effect(s, a.effect), noise_, rng);
  return apply_noise(s, noise_, rng);
}

State env_step(const Environment& env, const State& s, const PrimitiveAction& a, Rng& rng) {
  expects(a.id < env.num_actions() && env.action(a.id) == a, "action does not belong to this environment");
  return env.step(s, a.id, rng);
}

const State& Episode::act(ActionId id) {
  expects(!exhausted(), "episode budget exhausted");
  state_ = env_->step(state_, id, *noise_rng_);
  ++steps_;
  return state_;
}

void Episode::reset(std::size_t budget) {
  state_ = env_->initial_state();
  budget_ = budget;
  steps_ = 0;
}

DependencyGraph dependency_graph(const Environment& env) {
  DependencyGraph g;
  g.num_nodes = env.dim();
  for (const auto& a : env.actions())
    for (const auto& u : a.condition.units)
      if (u.predicate == Predicate::kMustBeOne) g.edges.emplace_back(u.dim, a.id);
  return g;
}

std::optional<std::vector<std::size_t>> DependencyGraph::topological_order(const Environment& env) const {
  std::vector<std::vector<std::size_t>> out(num_nodes);
  std::vector<std::size_t> indegree(num_nodes, 0);
  for (const auto& [source, action] : edges) {
    for (const auto& u : env.action(action).effect.units) {
      if (u.transform != Transform::kSetOne) continue;
      out[source].push_back(u.dim);
      ++indegree[u.dim];
    }
  }
  std::queue<std::size_t> ready;
  for (std::size_t v = 0; v < num_nodes; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    auto v = ready.front();
    ready.pop();
    order.push_back(v);
    for (auto w : out[v])
      if (--indegree[w] == 0) ready.push(w);
  }
  if (order.size() != num_nodes) return std::nullopt;
  return order;
}

}  // namespace mep
