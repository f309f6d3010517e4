#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mep/environment.hpp"

namespace mep {

Environment generate_chain_env(std::size_t n, std::uint64_t seed, NoiseModel noise, std::size_t episode_length) {
  expects(n >= 2, "chain environment needs at least two nodes");
  (void)seed;  // the chain has no random structure
  std::vector<PrimitiveAction> actions;
  actions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    PrimitiveAction a;
    a.id = i;
    a.effect.units.push_back({i, Transform::kSetOne});
    if (i > 0) a.condition.units.push_back({i - 1, Predicate::kMustBeOne});
    actions.push_back(std::move(a));
  }
  return Environment(n, std::move(actions), noise, episode_length == 0 ? 4 * n : episode_length, n - 1);
}

namespace {

// Weighted sampling without replacement of `count` parents among nodes [0, node).
std::vector<std::size_t> sample_parents(std::size_t node, std::size_t count, double locality, Rng& rng) {
  std::vector<std::size_t> candidates(node);
  std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  std::vector<double> weights(node);
  for (std::size_t j = 0; j < node; ++j)
    weights[j] = locality > 0.0 ? std::exp(-static_cast<double>(node - 1 - j) / locality) : 1.0;
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < count; ++c) {
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    auto idx = pick(rng);
    chosen.push_back(candidates[idx]);
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(idx));
    weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

Environment generate_random_env(std::size_t n, double avg_edges, bool consuming, std::uint64_t seed,
                                const RandomEnvOptions& options) {
  expects(n >= 2, "random environment needs at least two nodes");
  expects(avg_edges >= 0.0, "average edge count must be non-negative");
  const auto total = static_cast<std::size_t>(std::llround(avg_edges * static_cast<double>(n)));
  const std::size_t max_total = n * (n - 1) / 2;
  if (total > max_total)
    throw GenerationError("average of " + std::to_string(avg_edges) + " edges per node is infeasible for " +
                          std::to_string(n) + " nodes");

  Rng rng = make_rng(seed, Stream::kGenerator);

  // In-degree per node: node k may only depend on nodes [0, k).
  const std::size_t min_degree = total >= n - 1 ? 1 : 0;
  const double mean = static_cast<double>(total) / static_cast<double>(n - 1);
  std::vector<std::size_t> degree(n, 0);
  std::size_t sum = 0;
  for (std::size_t k = 1; k < n; ++k) {
    std::size_t d = 0;
    if (mean > 1.0) {
      d = 1 + std::poisson_distribution<std::size_t>(mean - 1.0)(rng);
    } else {
      d = bernoulli(rng, mean) ? 1 : 0;
    }
    degree[k] = std::clamp(d, min_degree, k);
    sum += degree[k];
  }
  while (sum != total) {
    const std::size_t k = 1 + uniform_index(rng, n - 1);
    if (sum < total && degree[k] < k) {
      ++degree[k];
      ++sum;
    } else if (sum > total && degree[k] > min_degree) {
      --degree[k];
      --sum;
    }
  }

  std::vector<std::vector<std::size_t>> parents(n);
  for (std::size_t k = 1; k < n; ++k) parents[k] = sample_parents(k, degree[k], options.locality, rng);

  std::vector<std::size_t> depth(n, 0);
  for (std::size_t k = 1; k < n; ++k)
    for (auto p : parents[k]) depth[k] = std::max(depth[k], depth[p] + 1);
  std::size_t goal = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (depth[k] >= depth[goal]) goal = k;

  // The last child of each node (in creation order) may consume it; earlier children are
  // always served first by a creation-order plan, so the goal stays reachable.
  std::vector<std::size_t> last_child(n, n);
  for (std::size_t k = 1; k < n; ++k)
    for (auto p : parents[k]) last_child[p] = k;

  std::vector<PrimitiveAction> actions(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto& a = actions[k];
    a.id = k;
    a.effect.units.push_back({k, Transform::kSetOne});
    for (auto p : parents[k]) a.condition.units.push_back({p, Predicate::kMustBeOne});
    if (consuming && !parents[k].empty() && bernoulli(rng, options.consume_fraction)) {
      std::vector<std::size_t> consumable;
      for (auto p : parents[k])
        if (last_child[p] == k) consumable.push_back(p);
      if (!consumable.empty()) a.effect.units.push_back({consumable[uniform_index(rng, consumable.size())], Transform::kSetZero});
    }
  }
  const std::size_t episode_length = options.episode_length == 0 ? 2 * n : options.episode_length;
  return Environment(n, std::move(actions), options.noise, episode_length, goal);
}

}  // namespace mep
