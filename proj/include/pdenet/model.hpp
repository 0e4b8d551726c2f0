#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "pdenet/jet.hpp"
#include "pdenet/tape.hpp"

namespace pdenet {

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// Weights and biases of a fully connected softplus network with scalar output.
class Params {
 public:
  Params() = default;
  Params(int input_dim, std::vector<int> hidden);

  int input_dim() const { return input_dim_; }
  const std::vector<int>& hidden() const { return hidden_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Total number of scalars.
  std::size_t size() const;
  /// Layer by layer: weight (column-major) then bias.
  Vector flatten() const;
  void assign(std::span<const double> flat);

  bool operator==(const Params& other) const;

 private:
  int input_dim_ = 0;
  std::vector<int> hidden_;
  std::vector<Layer> layers_;
};

inline const std::vector<int> kDefaultHidden{50, 50, 50, 50};

/// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
Params init_params(std::uint64_t seed, int input_dim, const std::vector<int>& hidden = kDefaultHidden);

double forward(const Params& params, std::span<const double> x);

/// Jet of the network at x with all derivatives up to `order`. The value
/// coefficient equals forward(params, x) bit for bit.
Jet forward_jet(const Params& params, std::span<const double> x, int order);

/// Parameters recorded as tape leaves, in flatten() order.
struct ParamVars {
  std::vector<Var> weights;
  std::vector<Var> biases;

  std::vector<Var> leaves() const;
};

ParamVars attach(Tape& tape, const Params& params);

/// Batched network jet: `input` is a batched jet (see batched_jet.hpp) with
/// `points` columns per block; returns the 1 x (C*points) output jet.
Var forward_batch(const ParamVars& params, Var input, std::shared_ptr<const MultiIndexSet> set, Eigen::Index points);

/// Binary snapshot: one JSON header line {"input_dim","hidden","count"}
/// followed by `count` little-endian float64 values in flatten() order.
void save_params(const Params& params, const std::filesystem::path& path);
Params load_params(const std::filesystem::path& path);

}  // namespace pdenet
