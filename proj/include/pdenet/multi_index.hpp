#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pdenet {

/// Derivative counts per input coordinate: alpha[i] = number of d/dx_i.
using MultiIndex = std::vector<int>;

int total_order(const MultiIndex& alpha);

/// Graded-lex comparison: lower total order first, then (1,0) before (0,1).
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

/// A downward-closed set of multi-indices in graded-lex order, with the
/// product (Leibniz) and composition (Faa di Bruno) tables precomputed.
///
/// Position 0 is always the zero multi-index.
class MultiIndexSet {
 public:
  /// One term of D^alpha (a*b): coefficient * a[left] * b[right].
  struct LeibnizTerm {
    double coefficient;
    std::size_t left;
    std::size_t right;
  };

  /// One term of D^alpha f(a): multiplicity * f^(blocks.size())(a0) * prod a[block].
  struct Partition {
    double multiplicity;
    std::vector<std::size_t> blocks;
  };

  /// Every multi-index with |alpha| <= order over `dims` coordinates.
  static std::shared_ptr<const MultiIndexSet> full(int dims, int order);

  /// Smallest downward-closed set containing `required` and zero.
  static std::shared_ptr<const MultiIndexSet> closure(int dims, std::span<const MultiIndex> required);

  int dims() const { return dims_; }
  int order() const { return order_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  std::optional<std::size_t> find(const MultiIndex& alpha) const;
  /// Throws std::out_of_range when alpha is not in the set.
  std::size_t position(const MultiIndex& alpha) const;
  /// Position of the first-order index along `coordinate`, if present.
  std::optional<std::size_t> unit(int coordinate) const;

  std::span<const LeibnizTerm> leibniz(std::size_t i) const { return leibniz_[i]; }
  std::span<const Partition> partitions(std::size_t i) const { return partitions_[i]; }

  bool operator==(const MultiIndexSet& other) const {
    return dims_ == other.dims_ && indices_ == other.indices_;
  }

  std::string describe(const std::vector<std::string>& variables) const;

 private:
  MultiIndexSet(int dims, std::vector<MultiIndex> indices);

  int dims_;
  int order_ = 0;
  std::vector<MultiIndex> indices_;
  std::vector<std::vector<LeibnizTerm>> leibniz_;
  std::vector<std::vector<Partition>> partitions_;
};

/// Subscript rendering of a multi-index, e.g. "xxt" for (2,1) over [x,t].
std::string subscript(const MultiIndex& alpha, const std::vector<std::string>& variables);

}  // namespace pdenet
