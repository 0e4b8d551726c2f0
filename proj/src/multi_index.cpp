#include "pdenet/multi_index.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace pdenet {

int total_order(const MultiIndex& alpha) {
  return std::accumulate(alpha.begin(), alpha.end(), 0);
}

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  const int oa = total_order(a);
  const int ob = total_order(b);
  if (oa != ob) return oa < ob;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void enumerate_full(int dims, int order, MultiIndex& current, int coordinate, int remaining,
                    std::vector<MultiIndex>& out) {
  if (coordinate == dims) {
    out.push_back(current);
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    current[coordinate] = k;
    enumerate_full(dims, order, current, coordinate + 1, remaining - k, out);
  }
  current[coordinate] = 0;
}

// Calls visit(block_of_position) for every set partition of {0..n-1},
// encoded as a restricted growth string.
template <class Visit>
void for_each_set_partition(int n, Visit&& visit) {
  std::vector<int> rgs(n, 0);
  if (n == 0) {
    visit(rgs, 0);
    return;
  }
  auto recurse = [&](auto&& self, int pos, int blocks) -> void {
    if (pos == n) {
      visit(rgs, blocks);
      return;
    }
    for (int b = 0; b <= blocks; ++b) {
      rgs[pos] = b;
      self(self, pos + 1, std::max(blocks, b + 1));
    }
  };
  recurse(recurse, 0, 0);
}

}  // namespace

MultiIndexSet::MultiIndexSet(int dims, std::vector<MultiIndex> indices)
    : dims_(dims), indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end(), graded_lex_less);
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  for (const auto& a : indices_) order_ = std::max(order_, total_order(a));

  leibniz_.resize(indices_.size());
  partitions_.resize(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    const MultiIndex& alpha = indices_[i];

    // D^alpha (ab) = sum_{beta <= alpha} C(alpha, beta) D^beta a D^(alpha-beta) b
    for (std::size_t j = 0; j < indices_.size(); ++j) {
      const MultiIndex& beta = indices_[j];
      bool below = true;
      double coefficient = 1.0;
      MultiIndex rest(dims_);
      for (int d = 0; d < dims_; ++d) {
        if (beta[d] > alpha[d]) {
          below = false;
          break;
        }
        rest[d] = alpha[d] - beta[d];
        coefficient *= binomial(alpha[d], beta[d]);
      }
      if (!below) continue;
      leibniz_[i].push_back({coefficient, j, position(rest)});
    }

    if (i == 0) continue;
    // Expand alpha into a list of coordinates, one per derivative.
    std::vector<int> slots;
    for (int d = 0; d < dims_; ++d)
      for (int k = 0; k < alpha[d]; ++k) slots.push_back(d);

    std::map<std::vector<std::size_t>, double> merged;
    for_each_set_partition(static_cast<int>(slots.size()), [&](const std::vector<int>& rgs, int blocks) {
      std::vector<MultiIndex> parts(blocks, MultiIndex(dims_, 0));
      for (std::size_t s = 0; s < slots.size(); ++s) parts[rgs[s]][slots[s]] += 1;
      std::vector<std::size_t> key;
      for (const auto& p : parts) key.push_back(position(p));
      std::sort(key.begin(), key.end());
      merged[key] += 1.0;
    });
    for (auto& [blocks, count] : merged) partitions_[i].push_back({count, blocks});
    std::stable_sort(partitions_[i].begin(), partitions_[i].end(),
                     [](const Partition& a, const Partition& b) { return a.blocks.size() < b.blocks.size(); });
  }
}

std::shared_ptr<const MultiIndexSet> MultiIndexSet::full(int dims, int order) {
  if (dims < 1 || order < 0) throw std::invalid_argument("multi-index set needs dims >= 1 and order >= 0");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const MultiIndexSet>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dims, order}];
  if (!slot) {
    std::vector<MultiIndex> all;
    MultiIndex current(dims, 0);
    enumerate_full(dims, order, current, 0, order, all);
    slot = std::shared_ptr<const MultiIndexSet>(new MultiIndexSet(dims, std::move(all)));
  }
  return slot;
}

std::shared_ptr<const MultiIndexSet> MultiIndexSet::closure(int dims, std::span<const MultiIndex> required) {
  if (dims < 1) throw std::invalid_argument("multi-index set needs dims >= 1");
  std::vector<MultiIndex> all{MultiIndex(dims, 0)};
  for (const auto& alpha : required) {
    if (static_cast<int>(alpha.size()) != dims) throw std::invalid_argument("multi-index dimension mismatch");
    // Every beta <= alpha, enumerated as a mixed-radix counter.
    MultiIndex beta(dims, 0);
    while (true) {
      all.push_back(beta);
      int d = 0;
      while (d < dims && beta[d] == alpha[d]) beta[d++] = 0;
      if (d == dims) break;
      ++beta[d];
    }
  }
  return std::shared_ptr<const MultiIndexSet>(new MultiIndexSet(dims, std::move(all)));
}

std::optional<std::size_t> MultiIndexSet::find(const MultiIndex& alpha) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), alpha, graded_lex_less);
  if (it == indices_.end() || *it != alpha) return std::nullopt;
  return static_cast<std::size_t>(it - indices_.begin());
}

std::size_t MultiIndexSet::position(const MultiIndex& alpha) const {
  if (auto p = find(alpha)) return *p;
  throw std::out_of_range("multi-index not in set");
}

std::optional<std::size_t> MultiIndexSet::unit(int coordinate) const {
  MultiIndex e(dims_, 0);
  e[coordinate] = 1;
  return find(e);
}

std::string MultiIndexSet::describe(const std::vector<std::string>& variables) const {
  std::string out;
  for (const auto& a : indices_) {
    if (!out.empty()) out += ",";
    out += total_order(a) == 0 ? "u" : "u_" + subscript(a, variables);
  }
  return out;
}

std::string subscript(const MultiIndex& alpha, const std::vector<std::string>& variables) {
  std::string s;
  for (std::size_t d = 0; d < alpha.size(); ++d)
    for (int k = 0; k < alpha[d]; ++k) s += d < variables.size() ? variables[d] : "x" + std::to_string(d);
  return s;
}

}  // namespace pdenet
