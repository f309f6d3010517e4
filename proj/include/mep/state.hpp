#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mep/core.hpp"

namespace mep {

/// Fixed-length binary feature vector.
class State {
 public:
  State() = default;
  explicit State(std::size_t dim) : bits_(dim, 0) {}
  State(std::initializer_list<int> bits) {
    bits_.reserve(bits.size());
    for (int b : bits) {
      expects(b == 0 || b == 1, "state bits must be 0 or 1");
      bits_.push_back(static_cast<std::uint8_t>(b));
    }
  }

  /// Parses a string of '0'/'1' characters.
  static State parse(std::string_view text);

  std::size_t dim() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  bool at(std::size_t i) const {
    expects(i < bits_.size(), "state index out of range");
    return bits_[i] != 0;
  }
  void set(std::size_t i, bool value) {
    expects(i < bits_.size(), "state index out of range");
    bits_[i] = value ? 1 : 0;
  }
  void flip(std::size_t i) {
    expects(i < bits_.size(), "state index out of range");
    bits_[i] ^= 1;
  }
  std::size_t count_ones() const;

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::string to_string() const;

  template <typename Scalar = double>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> as_vector() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(static_cast<Eigen::Index>(bits_.size()));
    for (std::size_t i = 0; i < bits_.size(); ++i) v(static_cast<Eigen::Index>(i)) = static_cast<Scalar>(bits_[i]);
    return v;
  }

  std::size_t hash() const;

  friend bool operator==(const State&, const State&) = default;
  friend auto operator<=>(const State&, const State&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

std::size_t hamming_distance(const State& a, const State& b);

struct StateHash {
  std::size_t operator()(const State& s) const { return s.hash(); }
};

}  // namespace mep
