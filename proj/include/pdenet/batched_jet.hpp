#pragma once

#include <memory>

#include "pdenet/multi_index.hpp"
#include "pdenet/tape.hpp"

namespace pdenet {

// Jets for a batch of K points live in one tape node of shape
// width x (C * K): columns [c*K, (c+1)*K) hold derivative c of the index set
// (C = set.size()) for every point. Linear layers act on all blocks with one
// product; only the value block receives the bias.

/// Jets of the coordinate functions at `points` (dims x K).
/// With as_variable the node is a differentiable leaf (derivatives with
/// respect to the input values flow back into its value block).
Var input_jet(Tape& tape, const Matrix& points, const MultiIndexSet& set, bool as_variable = false);

/// weight * x with the bias added to the value block.
Var affine_jet(Var weight, Var bias, Var x, Eigen::Index points);

/// Elementwise softplus of a batched jet via the Faa di Bruno tables of `set`.
Var softplus_jet(Var z, std::shared_ptr<const MultiIndexSet> set, Eigen::Index points);

}  // namespace pdenet
