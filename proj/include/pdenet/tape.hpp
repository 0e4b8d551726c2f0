#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pdenet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Tape;

/// Handle to a matrix-valued node on a Tape. Cheap to copy; valid until the
/// owning tape is cleared.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr && id_ >= 0; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// The (0,0) entry; convenient for 1x1 losses.
  double scalar() const { return value()(0, 0); }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Wengert list of matrix-valued operations for reverse-mode differentiation.
///
/// Single-threaded. Evaluation order is the recording order, so replaying the
/// same program reproduces every value bit for bit. clear() keeps node storage
/// so a training loop that records the same shapes each epoch does not
/// reallocate.
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable leaf.
  Var variable(const Matrix& value);
  Var constant(const Matrix& value);

  /// Reserves an output node of the given shape. The caller fills
  /// mutable_value(id) before recording anything else.
  Var push(Eigen::Index rows, Eigen::Index cols, std::vector<int> inputs, Backward backward);

  Matrix& mutable_value(int id) { return nodes_[id].value; }
  const Matrix& value(int id) const { return nodes_[id].value; }
  /// Scratch matrices owned by a node (saved activations for its backward).
  std::vector<Matrix>& aux(int id) { return nodes_[id].aux; }

  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  bool has_grad(int id) const { return nodes_[id].grad_live; }
  /// Gradient of the last backward() output with respect to node id; empty
  /// when the node is not on a path to it.
  const Matrix& grad(int id) const;

  /// grad(id) += expr (or = on first touch). No-op for nodes without gradient.
  template <class Expr>
  void accumulate(int id, const Expr& expr) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (!n.grad_live) {
      n.grad.noalias() = expr;
      n.grad_live = true;
    } else {
      n.grad.noalias() += expr;
    }
  }

  /// Zero-initialized gradient slot for block-wise accumulation.
  Matrix& grad_slot(int id);

  /// Reverse sweep from a 1x1 output.
  void backward(Var output);

  /// Runs backward(loss) and returns d loss / d wrt, flattened column-major
  /// in the order given. Leaves off the path contribute zeros. Throws
  /// std::invalid_argument if loss was not recorded on this tape.
  std::vector<double> gradient(Var loss, std::span<const Var> wrt);

  void clear();
  std::size_t size() const { return count_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<Matrix> aux;
    std::vector<int> inputs;
    Backward backward;
    bool requires_grad = false;
    bool grad_live = false;
  };

  Node& next_node();

  std::vector<Node> nodes_;
  std::size_t count_ = 0;
  Matrix empty_;
};

// Elementwise and linear-algebra operations. Binary operations require both
// operands on the same tape.
Var matmul(Var a, Var b);
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(double s, Var a);
Var operator+(Var a, double s);
Var hadamard(Var a, Var b);
Var square(Var a);
Var sqrt(Var a);
Var abs(Var a);
Var ipow(Var a, int exponent);
/// Sum of all entries, as 1x1.
Var sum(Var a);
/// Columns [start, start + count).
Var columns(Var a, Eigen::Index start, Eigen::Index count);
/// Stacks row vectors (1 x K each) into an L x K matrix.
Var vstack(std::span<const Var> rows);

}  // namespace pdenet
