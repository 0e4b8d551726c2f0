#include "pdenet/tape.hpp"

#include <stdexcept>

namespace pdenet {

const Matrix& Var::value() const { return tape_->value(id_); }

Tape::Node& Tape::next_node() {
  if (count_ == nodes_.size()) nodes_.emplace_back();
  Node& n = nodes_[count_++];
  n.inputs.clear();
  n.backward = nullptr;
  n.grad_live = false;
  n.requires_grad = false;
  return n;
}

Var Tape::variable(const Matrix& value) {
  Node& n = next_node();
  n.value = value;
  n.requires_grad = true;
  return Var(this, static_cast<int>(count_ - 1));
}

Var Tape::constant(const Matrix& value) {
  Node& n = next_node();
  n.value = value;
  return Var(this, static_cast<int>(count_ - 1));
}

Var Tape::push(Eigen::Index rows, Eigen::Index cols, std::vector<int> inputs, Backward backward) {
  bool needs_grad = false;
  for (int in : inputs) needs_grad = needs_grad || nodes_[in].requires_grad;
  Node& n = next_node();
  n.value.resize(rows, cols);
  n.inputs = std::move(inputs);
  n.requires_grad = needs_grad;
  if (needs_grad) n.backward = std::move(backward);
  return Var(this, static_cast<int>(count_ - 1));
}

const Matrix& Tape::grad(int id) const {
  const Node& n = nodes_[id];
  return n.grad_live ? n.grad : empty_;
}

Matrix& Tape::grad_slot(int id) {
  Node& n = nodes_[id];
  if (!n.grad_live) {
    n.grad.setZero(n.value.rows(), n.value.cols());
    n.grad_live = true;
  }
  return n.grad;
}

void Tape::backward(Var output) {
  if (output.tape() != this || !output.valid() || static_cast<std::size_t>(output.id()) >= count_)
    throw std::invalid_argument("output is not recorded on this tape (empty path)");
  if (output.rows() != 1 || output.cols() != 1) throw std::invalid_argument("backward needs a 1x1 output");
  for (std::size_t i = 0; i < count_; ++i) nodes_[i].grad_live = false;
  Node& out = nodes_[output.id()];
  if (!out.requires_grad) return;
  out.grad.setOnes(1, 1);
  out.grad_live = true;
  for (int id = output.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad_live && n.backward) n.backward(*this, id);
  }
}

std::vector<double> Tape::gradient(Var loss, std::span<const Var> wrt) {
  backward(loss);
  std::vector<double> flat;
  for (const Var& v : wrt) {
    if (v.tape() != this) throw std::invalid_argument("gradient requested for a variable of another tape");
    const Node& n = nodes_[v.id()];
    const Eigen::Index count = n.value.size();
    if (n.grad_live) {
      flat.insert(flat.end(), n.grad.data(), n.grad.data() + count);
    } else {
      flat.insert(flat.end(), static_cast<std::size_t>(count), 0.0);
    }
  }
  return flat;
}

void Tape::clear() { count_ = 0; }

namespace {

Tape& same_tape(Var a, Var b) {
  if (!a.valid() || a.tape() != b.tape()) throw std::invalid_argument("operands on different tapes");
  return *a.tape();
}

void require_same_size(Var a, Var b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("operand shapes differ");
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul shape mismatch");
  const int ia = a.id(), ib = b.id();
  Var out = t.push(a.rows(), b.cols(), {ia, ib}, [ia, ib](Tape& tape, int self) {
    const Matrix& g = tape.grad(self);
    tape.accumulate(ia, g * tape.value(ib).transpose());
    tape.accumulate(ib, tape.value(ia).transpose() * g);
  });
  t.mutable_value(out.id()).noalias() = a.value() * b.value();
  return out;
}

Var operator+(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_size(a, b);
  const int ia = a.id(), ib = b.id();
  Var out = t.push(a.rows(), a.cols(), {ia, ib}, [ia, ib](Tape& tape, int self) {
    tape.accumulate(ia, tape.grad(self));
    tape.accumulate(ib, tape.grad(self));
  });
  t.mutable_value(out.id()) = a.value() + b.value();
  return out;
}

Var operator-(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_size(a, b);
  const int ia = a.id(), ib = b.id();
  Var out = t.push(a.rows(), a.cols(), {ia, ib}, [ia, ib](Tape& tape, int self) {
    tape.accumulate(ia, tape.grad(self));
    tape.accumulate(ib, -tape.grad(self));
  });
  t.mutable_value(out.id()) = a.value() - b.value();
  return out;
}

Var operator*(double s, Var a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  Var out = t.push(a.rows(), a.cols(), {ia}, [ia, s](Tape& tape, int self) { tape.accumulate(ia, s * tape.grad(self)); });
  t.mutable_value(out.id()) = s * a.value();
  return out;
}

Var operator+(Var a, double s) {
  Tape& t = *a.tape();
  const int ia = a.id();
  Var out = t.push(a.rows(), a.cols(), {ia}, [ia](Tape& tape, int self) { tape.accumulate(ia, tape.grad(self)); });
  t.mutable_value(out.id()) = (a.value().array() + s).matrix();
  return out;
}

Var hadamard(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_size(a, b);
  const int ia = a.id(), ib = b.id();
  Var out = t.push(a.rows(), a.cols(), {ia, ib}, [ia, ib](Tape& tape, int self) {
    const Matrix& g = tape.grad(self);
    tape.accumulate(ia, g.cwiseProduct(tape.value(ib)));
    tape.accumulate(ib, g.cwiseProduct(tape.value(ia)));
  });
  t.mutable_value(out.id()) = a.value().cwiseProduct(b.value());
  return out;
}

Var square(Var a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  Var out = t.push(a.rows(), a.cols(), {ia}, [ia](Tape& tape, int self) {
    tape.accumulate(ia, 2.0 * tape.grad(self).cwiseProduct(tape.value(ia)));
  });
  t.mutable_value(out.id()) = a.value().cwiseAbs2();
  return out;
}

Var sqrt(Var a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  Var out = t.push(a.rows(), a.cols(), {ia}, [ia](Tape& tape, int self) {
    tape.accumulate(ia, (0.5 * tape.grad(self).array() / tape.value(self).array()).matrix());
  });
  t.mutable_value(out.id()) = a.value().cwiseSqrt();
  return out;
}

Var abs(Var a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  Var out = t.push(a.rows(), a.cols(), {ia}, [ia](Tape& tape, int self) {
    tape.accumulate(ia, tape.grad(self).cwiseProduct(tape.value(ia).unaryExpr([](double x) {
      return static_cast<double>((x > 0.0) - (x < 0.0));
    })));
  });
  t.mutable_value(out.id()) = a.value().cwiseAbs();
  return out;
}

Var ipow(Var a, int exponent) {
  if (exponent < 1) throw std::invalid_argument("ipow needs a positive exponent");
  if (exponent == 1) return a;
  Tape& t = *a.tape();
  const int ia = a.id();
  Var out = t.push(a.rows(), a.cols(), {ia}, [ia, exponent](Tape& tape, int self) {
    const auto x = tape.value(ia).array();
    tape.accumulate(ia, (tape.grad(self).array() * exponent * x.pow(exponent - 1)).matrix());
  });
  Matrix& v = t.mutable_value(out.id());
  v = a.value();
  for (int k = 1; k < exponent; ++k) v.array() *= a.value().array();
  return out;
}

Var sum(Var a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  Var out = t.push(1, 1, {ia}, [ia](Tape& tape, int self) {
    const double g = tape.grad(self)(0, 0);
    const Matrix& v = tape.value(ia);
    tape.accumulate(ia, Matrix::Constant(v.rows(), v.cols(), g));
  });
  t.mutable_value(out.id())(0, 0) = a.value().sum();
  return out;
}

Var columns(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw std::invalid_argument("column range out of bounds");
  Tape& t = *a.tape();
  const int ia = a.id();
  Var out = t.push(a.rows(), count, {ia}, [ia, start, count](Tape& tape, int self) {
    if (!tape.requires_grad(ia)) return;
    tape.grad_slot(ia).middleCols(start, count) += tape.grad(self);
  });
  t.mutable_value(out.id()) = a.value().middleCols(start, count);
  return out;
}

Var vstack(std::span<const Var> rows) {
  if (rows.empty()) throw std::invalid_argument("vstack of nothing");
  Tape& t = *rows[0].tape();
  const Eigen::Index width = rows[0].cols();
  std::vector<int> ids;
  for (const Var& r : rows) {
    if (r.tape() != &t || r.rows() != 1 || r.cols() != width) throw std::invalid_argument("vstack needs 1xK rows on one tape");
    ids.push_back(r.id());
  }
  Var out = t.push(static_cast<Eigen::Index>(rows.size()), width, ids, [ids](Tape& tape, int self) {
    const Matrix& g = tape.grad(self);
    for (std::size_t i = 0; i < ids.size(); ++i) tape.accumulate(ids[i], g.row(static_cast<Eigen::Index>(i)));
  });
  Matrix& v = t.mutable_value(out.id());
  for (std::size_t i = 0; i < rows.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = rows[i].value();
  return out;
}

}  // namespace pdenet
