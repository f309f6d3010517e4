#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mep/core.hpp"
#include "mep/state.hpp"

namespace mep {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// exp(-|x - y|^2 / (2 bandwidth^2))
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar rbf_kernel(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                                     typename DerivedX::Scalar bandwidth) {
  using Scalar = typename DerivedX::Scalar;
  expects(x.size() == y.size(), "kernel arguments differ in dimension");
  expects(bandwidth > Scalar(0), "kernel bandwidth must be positive");
  return std::exp(-(x - y).squaredNorm() / (Scalar(2) * bandwidth * bandwidth));
}

inline double rbf_kernel(const State& x, const State& y, double bandwidth) {
  return rbf_kernel(x.as_vector<double>(), y.as_vector<double>(), bandwidth);
}

/// Kernel matrix between the rows of `a` and the rows of `b`.
template <typename Scalar>
Matrix<Scalar> rbf_gram(const Matrix<Scalar>& a, const Matrix<Scalar>& b, Scalar bandwidth) {
  expects(a.cols() == b.cols(), "kernel arguments differ in dimension");
  expects(bandwidth > Scalar(0), "kernel bandwidth must be positive");
  const Vector<Scalar> na = a.rowwise().squaredNorm();
  const Vector<Scalar> nb = b.rowwise().squaredNorm();
  Matrix<Scalar> d2 = (-Scalar(2) * a * b.transpose()).colwise() + na;
  d2.rowwise() += nb.transpose();
  const Scalar scale = Scalar(-1) / (Scalar(2) * bandwidth * bandwidth);
  return (d2.cwiseMax(Scalar(0)) * scale).array().exp().matrix();
}

template <typename Scalar>
Matrix<Scalar> stack_states(std::span<const State> states) {
  expects(!states.empty(), "cannot stack an empty state list");
  Matrix<Scalar> m(static_cast<Eigen::Index>(states.size()), static_cast<Eigen::Index>(states.front().dim()));
  for (std::size_t i = 0; i < states.size(); ++i) {
    expects(states[i].dim() == states.front().dim(), "states differ in dimension");
    m.row(static_cast<Eigen::Index>(i)) = states[i].as_vector<Scalar>().transpose();
  }
  return m;
}

/// Labelled observations: +1 success, -1 failure.
template <typename Scalar>
struct TrainingSet {
  Matrix<Scalar> states;
  Vector<Scalar> labels;

  Eigen::Index size() const { return labels.size(); }
  bool has_both_classes() const {
    return (labels.array() > Scalar(0)).any() && (labels.array() < Scalar(0)).any();
  }

  static TrainingSet from(std::span<const State> states, std::span<const int> labels) {
    expects(states.size() == labels.size(), "states and labels differ in length");
    TrainingSet t;
    t.states = stack_states<Scalar>(states);
    t.labels.resize(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      expects(labels[i] == 1 || labels[i] == -1, "labels must be +1 or -1");
      t.labels(static_cast<Eigen::Index>(i)) = static_cast<Scalar>(labels[i]);
    }
    return t;
  }
};

/// Median Euclidean distance over distinct row pairs; 1 when every pair coincides.
template <typename Scalar>
Scalar median_pairwise_distance(const Matrix<Scalar>& rows) {
  std::vector<Scalar> d;
  const auto n = rows.rows();
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((rows.row(i) - rows.row(j)).norm());
  if (d.empty()) return Scalar(1);
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > Scalar(0) ? *mid : Scalar(1);
}

/// Kernel soft-margin classifier with a logistic calibration of its decision value.
template <typename Scalar>
struct SuccessModel {
  Matrix<Scalar> support_states;  // one support state per row
  Vector<Scalar> dual_coefs;      // label times dual weight
  Scalar bias = 0;
  Scalar bandwidth = 1;
  Scalar reg_c = 1;
  Scalar platt_a = 0;
  Scalar platt_b = 0;
  bool calibrated = false;

  friend bool operator==(const SuccessModel& a, const SuccessModel& b) {
    return a.support_states == b.support_states && a.dual_coefs == b.dual_coefs && a.bias == b.bias &&
           a.bandwidth == b.bandwidth && a.reg_c == b.reg_c && a.platt_a == b.platt_a && a.platt_b == b.platt_b &&
           a.calibrated == b.calibrated;
  }
};

struct SvmOptions {
  double reg_c = 1.0;
  bool balanced = false;  // scale each class's bound by n / (2 n_class)
  std::optional<double> bandwidth;  // median heuristic when unset
  double tolerance = 1e-3;
  std::size_t max_passes = 10;  // iteration cap is max_passes * N * N pair updates
};

struct SvmReport {
  std::size_t iterations = 0;
  bool converged = false;
};

/// Dual soft-margin training with maximal-gain pair selection. Returns nullopt for single-class data.
template <typename Scalar>
std::optional<SuccessModel<Scalar>> train(const TrainingSet<Scalar>& data, const SvmOptions& options = {},
                                          SvmReport* report = nullptr) {
  expects(data.states.rows() == data.labels.size(), "training set is inconsistent");
  if (data.size() == 0 || !data.has_both_classes()) return std::nullopt;
  expects(options.reg_c > 0.0, "regularisation weight must be positive");

  const Eigen::Index n = data.size();
  const Scalar c = static_cast<Scalar>(options.reg_c);
  const Scalar eps = static_cast<Scalar>(options.tolerance);
  const Scalar tau = Scalar(1e-12);
  const Scalar bandwidth =
      options.bandwidth ? static_cast<Scalar>(*options.bandwidth) : median_pairwise_distance(data.states);
  const Matrix<Scalar> kernel = rbf_gram(data.states, data.states, bandwidth);
  const Vector<Scalar>& y = data.labels;
  const Eigen::Index n_pos = (y.array() > 0).count();
  const Scalar c_pos = options.balanced ? c * Scalar(n) / (Scalar(2) * Scalar(n_pos)) : c;
  const Scalar c_neg = options.balanced ? c * Scalar(n) / (Scalar(2) * Scalar(n - n_pos)) : c;
  auto bound = [&](Eigen::Index t) { return y(t) > 0 ? c_pos : c_neg; };

  Vector<Scalar> alpha = Vector<Scalar>::Zero(n);
  Vector<Scalar> grad = Vector<Scalar>::Constant(n, Scalar(-1));
  auto in_up = [&](Eigen::Index t) { return (y(t) > 0 && alpha(t) < bound(t)) || (y(t) < 0 && alpha(t) > 0); };
  auto in_low = [&](Eigen::Index t) { return (y(t) > 0 && alpha(t) > 0) || (y(t) < 0 && alpha(t) < bound(t)); };
  auto q = [&](Eigen::Index a, Eigen::Index b) { return y(a) * y(b) * kernel(a, b); };

  const std::size_t max_iter = std::max<std::size_t>(1000, options.max_passes * static_cast<std::size_t>(n * n));
  SvmReport local;
  for (local.iterations = 0; local.iterations < max_iter; ++local.iterations) {
    Eigen::Index i = -1;
    Scalar gmax = -std::numeric_limits<Scalar>::infinity();
    Scalar gmin = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index t = 0; t < n; ++t)
      if (in_up(t) && -y(t) * grad(t) >= gmax) {
        gmax = -y(t) * grad(t);
        i = t;
      }
    Eigen::Index j = -1;
    Scalar best_gain = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const Scalar v = -y(t) * grad(t);
      gmin = std::min(gmin, v);
      if (i < 0) continue;
      const Scalar b = gmax - v;
      if (b > 0) {
        Scalar a = kernel(i, i) + kernel(t, t) - Scalar(2) * kernel(i, t);
        if (a <= 0) a = tau;
        const Scalar gain = -(b * b) / a;
        if (gain <= best_gain) {
          best_gain = gain;
          j = t;
        }
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < eps) {
      local.converged = true;
      break;
    }

    const Scalar old_i = alpha(i), old_j = alpha(j);
    const Scalar ci = bound(i), cj = bound(j);
    if (y(i) != y(j)) {
      Scalar quad = kernel(i, i) + kernel(j, j) + Scalar(2) * q(i, j);
      if (quad <= 0) quad = tau;
      const Scalar delta = (-grad(i) - grad(j)) / quad;
      const Scalar diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0) {
        if (alpha(j) < 0) {
          alpha(j) = 0;
          alpha(i) = diff;
        }
      } else if (alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = -diff;
      }
      if (diff > ci - cj) {
        if (alpha(i) > ci) {
          alpha(i) = ci;
          alpha(j) = ci - diff;
        }
      } else if (alpha(j) > cj) {
        alpha(j) = cj;
        alpha(i) = cj + diff;
      }
    } else {
      Scalar quad = kernel(i, i) + kernel(j, j) - Scalar(2) * q(i, j);
      if (quad <= 0) quad = tau;
      const Scalar delta = (grad(i) - grad(j)) / quad;
      const Scalar sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > ci) {
        if (alpha(i) > ci) {
          alpha(i) = ci;
          alpha(j) = sum - ci;
        }
      } else if (alpha(j) < 0) {
        alpha(j) = 0;
        alpha(i) = sum;
      }
      if (sum > cj) {
        if (alpha(j) > cj) {
          alpha(j) = cj;
          alpha(i) = sum - cj;
        }
      } else if (alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = sum;
      }
    }
    const Scalar di = alpha(i) - old_i, dj = alpha(j) - old_j;
    for (Eigen::Index t = 0; t < n; ++t) grad(t) += q(t, i) * di + q(t, j) * dj;
  }

  // Bias from free vectors, or the midpoint of the feasible interval.
  Scalar ub = std::numeric_limits<Scalar>::infinity(), lb = -ub, sum_free = 0;
  Eigen::Index n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Scalar yg = y(t) * grad(t);
    if (alpha(t) >= bound(t)) {
      if (y(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha(t) <= 0) {
      if (y(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const Scalar rho = n_free > 0 ? sum_free / static_cast<Scalar>(n_free) : (ub + lb) / Scalar(2);

  std::vector<Eigen::Index> support;
  for (Eigen::Index t = 0; t < n; ++t)
    if (alpha(t) > 0) support.push_back(t);
  if (support.empty()) support.push_back(0);

  SuccessModel<Scalar> m;
  m.support_states.resize(static_cast<Eigen::Index>(support.size()), data.states.cols());
  m.dual_coefs.resize(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    const auto t = support[k];
    m.support_states.row(static_cast<Eigen::Index>(k)) = data.states.row(t);
    m.dual_coefs(static_cast<Eigen::Index>(k)) = y(t) * alpha(t);
  }
  m.bias = -rho;
  m.bandwidth = bandwidth;
  m.reg_c = c;
  if (report) *report = local;
  return m;
}

template <typename Scalar, typename Derived>
Scalar decision_value(const SuccessModel<Scalar>& m, const Eigen::MatrixBase<Derived>& x) {
  expects(x.size() == m.support_states.cols(), "query dimension does not match the model");
  Scalar f = m.bias;
  const Scalar scale = Scalar(-1) / (Scalar(2) * m.bandwidth * m.bandwidth);
  for (Eigen::Index i = 0; i < m.support_states.rows(); ++i)
    f += m.dual_coefs(i) * std::exp((m.support_states.row(i).transpose() - x).squaredNorm() * scale);
  return f;
}

template <typename Scalar>
Scalar decision_value(const SuccessModel<Scalar>& m, const State& s) {
  return decision_value(m, s.as_vector<Scalar>());
}

/// Decision values for every row of `rows`.
template <typename Scalar>
Vector<Scalar> decision_values(const SuccessModel<Scalar>& m, const Matrix<Scalar>& rows) {
  return ((rbf_gram(rows, m.support_states, m.bandwidth) * m.dual_coefs).array() + m.bias).matrix();
}

/// 1 / (1 + exp(a f + b)), with the exponent split by sign to stay finite.
template <typename Scalar>
Scalar platt_probability(Scalar a, Scalar b, Scalar f) {
  const Scalar z = a * f + b;
  if (z >= 0) {
    const Scalar e = std::exp(-z);
    return e / (Scalar(1) + e);
  }
  return Scalar(1) / (Scalar(1) + std::exp(z));
}

template <typename Scalar>
Scalar predict_success(const SuccessModel<Scalar>& m, const State& s) {
  expects(m.calibrated, "success model has not been calibrated");
  const Scalar p = platt_probability(m.platt_a, m.platt_b, decision_value(m, s));
  // Keep the result strictly inside (0,1) even when the sigmoid saturates.
  constexpr Scalar lo = std::numeric_limits<Scalar>::epsilon();
  return std::clamp(p, lo, Scalar(1) - lo);
}

template <typename Scalar>
Scalar marginal_success(const SuccessModel<Scalar>& m, std::span<const State> probe) {
  expects(!probe.empty(), "probe set must not be empty");
  Scalar total = 0;
  for (const auto& s : probe) total += predict_success(m, s);
  return total / static_cast<Scalar>(probe.size());
}

/// C * sum(hinge) + 1/2 |h|^2 on `data`.
template <typename Scalar>
Scalar primal_objective(const SuccessModel<Scalar>& m, const TrainingSet<Scalar>& data) {
  const Vector<Scalar> f = decision_values(m, data.states);
  const Scalar hinge = (Scalar(1) - data.labels.cwiseProduct(f).array()).cwiseMax(Scalar(0)).sum();
  const Matrix<Scalar> k = rbf_gram(m.support_states, m.support_states, m.bandwidth);
  const Scalar norm2 = m.dual_coefs.dot(k * m.dual_coefs);
  return m.reg_c * hinge + norm2 / Scalar(2);
}

struct PlattOptions {
  std::size_t max_iterations = 100;
  double min_step = 1e-10;
  double sigma = 1e-12;
  double tolerance = 1e-5;
};

template <typename Scalar>
struct PlattFit {
  Scalar a = 0;
  Scalar b = 0;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<Scalar> log_likelihood;  // per accepted iterate, starting with the initial point
};

/// Maximum-likelihood sigmoid fit with smoothed targets and backtracking Newton steps.
template <typename Scalar>
PlattFit<Scalar> fit_platt(std::span<const Scalar> scores, std::span<const int> labels, const PlattOptions& opt = {}) {
  expects(scores.size() == labels.size(), "scores and labels differ in length");
  Scalar n_pos = 0, n_neg = 0;
  for (int l : labels) {
    expects(l == 1 || l == -1, "labels must be +1 or -1");
    (l > 0 ? n_pos : n_neg) += 1;
  }
  expects(n_pos > 0 && n_neg > 0, "calibration needs both labels");

  const Scalar hi = (n_pos + 1) / (n_pos + 2);
  const Scalar lo = Scalar(1) / (n_neg + 2);
  std::vector<Scalar> target(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) target[i] = labels[i] > 0 ? hi : lo;

  // Negative log-likelihood of the smoothed targets.
  auto nll = [&](Scalar a, Scalar b) {
    Scalar f = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const Scalar z = scores[i] * a + b;
      f += z >= 0 ? target[i] * z + std::log1p(std::exp(-z)) : (target[i] - 1) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  PlattFit<Scalar> fit;
  fit.b = std::log((n_neg + 1) / (n_pos + 1));
  Scalar fval = nll(fit.a, fit.b);
  fit.log_likelihood.push_back(-fval);
  for (fit.iterations = 0; fit.iterations < opt.max_iterations; ++fit.iterations) {
    Scalar h11 = static_cast<Scalar>(opt.sigma), h22 = h11, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const Scalar z = scores[i] * fit.a + fit.b;
      Scalar p, q;
      if (z >= 0) {
        const Scalar e = std::exp(-z);
        p = e / (1 + e);
        q = 1 / (1 + e);
      } else {
        const Scalar e = std::exp(z);
        p = 1 / (1 + e);
        q = e / (1 + e);
      }
      const Scalar d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const Scalar d1 = target[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < opt.tolerance && std::abs(g2) < opt.tolerance) {
      fit.converged = true;
      break;
    }
    const Scalar det = h11 * h22 - h21 * h21;
    const Scalar da = -(h22 * g1 - h21 * g2) / det;
    const Scalar db = -(-h21 * g1 + h11 * g2) / det;
    const Scalar gd = g1 * da + g2 * db;
    Scalar step = 1;
    bool accepted = false;
    while (step >= opt.min_step) {
      const Scalar na = fit.a + step * da, nb = fit.b + step * db;
      const Scalar nf = nll(na, nb);
      if (nf < fval + Scalar(1e-4) * step * gd) {
        fit.a = na;
        fit.b = nb;
        fval = nf;
        accepted = true;
        break;
      }
      step /= 2;
    }
    if (!accepted) break;  // line search failed; keep the best iterate
    fit.log_likelihood.push_back(-fval);
  }
  return fit;
}

/// Fits the model's sigmoid on its own decision values over `data`.
template <typename Scalar>
bool calibrate(SuccessModel<Scalar>& m, const TrainingSet<Scalar>& data, const PlattOptions& opt = {}) {
  const Vector<Scalar> f = decision_values(m, data.states);
  std::vector<Scalar> scores(f.data(), f.data() + f.size());
  std::vector<int> labels(static_cast<std::size_t>(data.size()));
  for (Eigen::Index i = 0; i < data.size(); ++i) labels[static_cast<std::size_t>(i)] = data.labels(i) > 0 ? 1 : -1;
  const auto fit = fit_platt<Scalar>(scores, labels, opt);
  m.platt_a = fit.a;
  m.platt_b = fit.b;
  m.calibrated = true;
  return fit.converged;
}

}  // namespace mep
