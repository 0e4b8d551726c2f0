#include "pdenet/batched_jet.hpp"

#include <stdexcept>

namespace pdenet {

using Array = Eigen::ArrayXXd;

Var input_jet(Tape& tape, const Matrix& points, const MultiIndexSet& set, bool as_variable) {
  if (points.rows() != set.dims()) throw std::invalid_argument("point dimension does not match the index set");
  const Eigen::Index K = points.cols();
  Matrix x = Matrix::Zero(points.rows(), static_cast<Eigen::Index>(set.size()) * K);
  x.leftCols(K) = points;
  for (int d = 0; d < set.dims(); ++d)
    if (auto p = set.unit(d)) x.block(d, static_cast<Eigen::Index>(*p) * K, 1, K).setOnes();
  return as_variable ? tape.variable(x) : tape.constant(x);
}

Var affine_jet(Var weight, Var bias, Var x, Eigen::Index points) {
  Tape& t = *x.tape();
  if (weight.tape() != &t || bias.tape() != &t) throw std::invalid_argument("operands on different tapes");
  if (weight.cols() != x.rows() || bias.rows() != weight.rows() || bias.cols() != 1 || x.cols() % points != 0)
    throw std::invalid_argument("affine_jet shape mismatch");
  const int iw = weight.id(), ib = bias.id(), ix = x.id();
  const Eigen::Index K = points;
  Var out = t.push(weight.rows(), x.cols(), {iw, ib, ix}, [iw, ib, ix, K](Tape& tape, int self) {
    const Matrix& g = tape.grad(self);
    tape.accumulate(iw, g * tape.value(ix).transpose());
    tape.accumulate(ib, g.leftCols(K).rowwise().sum());
    tape.accumulate(ix, tape.value(iw).transpose() * g);
  });
  Matrix& v = t.mutable_value(out.id());
  v.noalias() = weight.value() * x.value();
  v.leftCols(K).colwise() += bias.value().col(0);
  return out;
}

namespace {

// prod_{b in blocks, b != skip} z_b over K-column blocks of z.
void block_product(const Matrix& z, const std::vector<std::size_t>& blocks, std::size_t skip, Eigen::Index K,
                   Array& out) {
  bool first = true;
  for (std::size_t q = 0; q < blocks.size(); ++q) {
    if (q == skip) continue;
    const auto zb = z.middleCols(static_cast<Eigen::Index>(blocks[q]) * K, K).array();
    if (first) {
      out = zb;
      first = false;
    } else {
      out *= zb;
    }
  }
  if (first) out.setOnes(z.rows(), K);
}

}  // namespace

Var softplus_jet(Var z, std::shared_ptr<const MultiIndexSet> set, Eigen::Index points) {
  Tape& t = *z.tape();
  const Eigen::Index K = points;
  const Eigen::Index C = static_cast<Eigen::Index>(set->size());
  if (z.cols() != C * K) throw std::invalid_argument("softplus_jet block layout mismatch");
  const int iz = z.id();
  const int m = set->order();

  Var out = t.push(z.rows(), z.cols(), {iz}, [iz, set, K, C](Tape& tape, int self) {
    const Matrix& g = tape.grad(self);
    const Matrix& zv = tape.value(iz);
    const std::vector<Matrix>& f = tape.aux(self);  // f[k-1] = softplus^(k)(z0)
    Matrix& dz = tape.grad_slot(iz);
    Array prod;
    dz.leftCols(K).array() += g.leftCols(K).array() * f[0].array();
    for (Eigen::Index i = 1; i < C; ++i) {
      const auto gi = g.middleCols(i * K, K).array();
      for (const auto& p : set->partitions(static_cast<std::size_t>(i))) {
        const std::size_t k = p.blocks.size();
        block_product(zv, p.blocks, p.blocks.size(), K, prod);
        dz.leftCols(K).array() += p.multiplicity * gi * f[k].array() * prod;
        for (std::size_t q = 0; q < k; ++q) {
          block_product(zv, p.blocks, q, K, prod);
          dz.middleCols(static_cast<Eigen::Index>(p.blocks[q]) * K, K).array() +=
              p.multiplicity * gi * f[k - 1].array() * prod;
        }
      }
    }
  });

  const Matrix& zv = z.value();
  const auto z0 = zv.leftCols(K).array();
  std::vector<Matrix>& f = t.aux(out.id());
  f.resize(static_cast<std::size_t>(m) + 1);
  // One exp per entry: e = exp(-|z|) gives both the logistic and softplus;
  // log1p(e) via log(u) * e / (u - 1), u = 1 + e, keeps full accuracy and
  // vectorizes.
  const Array e = (-z0.abs()).exp();
  const Array u = 1.0 + e;
  f[0] = (z0 >= 0.0).select(1.0 / u, e / u).matrix();
  const auto s = f[0].array();
  if (m >= 1) f[1] = (s * (1.0 - s)).matrix();
  if (m >= 2) f[2] = (f[1].array() * (1.0 - 2.0 * s)).matrix();
  if (m >= 3) f[3] = (f[1].array() * (1.0 - 6.0 * s + 6.0 * s * s)).matrix();

  Matrix& v = t.mutable_value(out.id());
  v.leftCols(K) = (z0.max(0.0) + (u == 1.0).select(e, u.log() * e / (u - 1.0))).matrix();
  Array prod;
  for (Eigen::Index i = 1; i < C; ++i) {
    auto vi = v.middleCols(i * K, K).array();
    vi.setZero();
    for (const auto& p : set->partitions(static_cast<std::size_t>(i))) {
      block_product(zv, p.blocks, p.blocks.size(), K, prod);
      vi += p.multiplicity * f[p.blocks.size() - 1].array() * prod;
    }
  }
  return out;
}

}  // namespace pdenet
