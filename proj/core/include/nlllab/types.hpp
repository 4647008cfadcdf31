#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nlllab {

/// State label in 0..d-1.
using State = int;

/// Integer occupation numbers of a point of the simplex lattice.
using Counts = std::vector<int>;

/// Dense real vector (probability vectors, rate vectors, value vectors).
using Vec = std::vector<double>;
using VecView = std::span<const double>;

/// Real value attached to every (state, lattice node) pair.
class NodeValues {
 public:
  NodeValues() = default;
  NodeValues(int d, std::size_t nodes, double fill = 0.0)
      : d_(d), nodes_(nodes), data_(static_cast<std::size_t>(d) * nodes, fill) {}

  int dim() const { return d_; }
  std::size_t nodes() const { return nodes_; }

  double& operator()(State x, std::size_t node) { return data_[index(x, node)]; }
  double operator()(State x, std::size_t node) const { return data_[index(x, node)]; }

  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }

  friend bool operator==(const NodeValues&, const NodeValues&) = default;

 private:
  std::size_t index(State x, std::size_t node) const {
    return static_cast<std::size_t>(x) * nodes_ + node;
  }

  int d_ = 0;
  std::size_t nodes_ = 0;
  std::vector<double> data_;
};

/// A d-vector (transition probabilities or rates) attached to every
/// (state, lattice node) pair.
class NodePolicy {
 public:
  NodePolicy() = default;
  NodePolicy(int d, std::size_t nodes)
      : d_(d), nodes_(nodes), data_(static_cast<std::size_t>(d) * d * nodes, 0.0) {}

  int dim() const { return d_; }
  std::size_t nodes() const { return nodes_; }

  std::span<double> row(State x, std::size_t node) {
    return {data_.data() + offset(x, node), static_cast<std::size_t>(d_)};
  }
  std::span<const double> row(State x, std::size_t node) const {
    return {data_.data() + offset(x, node), static_cast<std::size_t>(d_)};
  }

  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }

  friend bool operator==(const NodePolicy&, const NodePolicy&) = default;

 private:
  std::size_t offset(State x, std::size_t node) const {
    return (static_cast<std::size_t>(x) * nodes_ + node) * static_cast<std::size_t>(d_);
  }

  int d_ = 0;
  std::size_t nodes_ = 0;
  std::vector<double> data_;
};

/// |a - b|_1 over two equally sized vectors.
double l1_distance(VecView a, VecView b);

/// Largest entrywise |a - b|.
double sup_distance(VecView a, VecView b);

}  // namespace nlllab
