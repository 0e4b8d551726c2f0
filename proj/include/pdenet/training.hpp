#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdenet/dictionary.hpp"
#include "pdenet/model.hpp"
#include "pdenet/tape.hpp"

namespace pdenet {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weights of lambda_u * sqrt(L_u + eps) * (1 + lambda_d L_d + lambda_sparse L_sparse).
struct LossWeights {
  double lambda_u = 1.0;
  double lambda_d = 1.0;
  double lambda_sparse = 0.01;
  double epsilon_sqrt = 1e-12;

  void validate() const;
};

struct TrainConfig {
  int epochs = 5000;
  double lr_theta = 0.002;
  double lr_phi = 0.02;
  double decay = 0.9998;
  int num_samples = 10000;      // J
  int num_collocation = 10000;  // K; only used when resampling
  std::uint64_t seed = 0;
  bool resample_collocation = false;
  /// Stop once the singular gap of the feature matrix has stayed within a
  /// band of early_stop_tolerance (relative) for this many epochs. 0 disables.
  int early_stop_patience = 500;
  double early_stop_tolerance = 1e-3;
  std::vector<int> hidden = kDefaultHidden;

  void validate() const;
};

/// Axis-aligned box [lower_i, upper_i].
struct Box {
  Vector lower;
  Vector upper;

  int dims() const { return static_cast<int>(lower.size()); }
  bool contains(std::span<const double> x) const;
  /// Smallest box containing every column of points.
  static Box bounding(const Matrix& points);
};

/// Everything a training run consumes: dictionary, noisy samples, the domain
/// for collocation resampling and, for synthetic cases, the true coefficients.
struct Problem {
  std::string name;
  DictionarySpec dictionary;
  Matrix points;  // dims x J
  Vector values;  // J
  Box domain;
  std::optional<Vector> phi_star;
};

struct EpochRecord {
  int epoch = 0;
  double loss_u = 0.0;
  double loss_d = 0.0;
  double total = 0.0;
  double phi_norm = 0.0;  // before renormalization
  double err = 0.0;       // NaN when phi_star is unknown
  double sigma_min = 0.0;
  double gap = 0.0;
};

struct TrainResult {
  Vector phi;
  Vector initial_phi;
  Params theta;
  std::vector<EpochRecord> history;
  double sigma_min = 0.0;
  double gap = 0.0;
  bool early_stopped = false;
  int reinitializations = 0;
};

// Plain (untaped) losses, used for evaluation and as test oracles.
double loss_u(const Params& theta, const Matrix& points, const Vector& values);
/// |D(u_hat, x') phi|^2 / K.
double loss_d(const Params& theta, const Vector& phi, const Matrix& collocation, const DictionarySpec& spec);
double loss_sparse(const Vector& phi);
double combined_loss(const Params& theta, const Vector& phi, const Matrix& points, const Vector& values,
                     const Matrix& collocation, const DictionarySpec& spec, const LossWeights& w);

/// Network jets at every column of points: row c of the result is derivative
/// set[c] of u_hat at each point (C x K).
Matrix network_jets(const Params& theta, const Matrix& points, std::shared_ptr<const MultiIndexSet> set);
/// K x L feature matrix of the network at the collocation points.
Matrix network_feature_matrix(const Params& theta, const Matrix& collocation, const DictionarySpec& spec);

/// Taped combined loss with its parts, for gradient checks and the training loop.
struct LossGraph {
  Var total;
  Var loss_u;
  Var loss_d;
  Var loss_sparse;
  Var features;  // L x K
  ParamVars theta;
  Var phi;  // 1 x L
};

LossGraph record_loss(Tape& tape, const Params& theta, const Vector& phi, const Matrix& points, const Vector& values,
                      const Matrix& collocation, const DictionarySpec& spec, const LossWeights& w,
                      std::shared_ptr<const MultiIndexSet> set);

/// Loss parts and the gradient of the combined loss with respect to theta
/// (flattened as Params::flatten) and phi.
struct LossEvaluation {
  double loss_u = 0.0;
  double loss_d = 0.0;
  double loss_sparse = 0.0;
  double total = 0.0;
  Matrix features;  // L x K
  Vector grad_theta;
  Vector grad_phi;
};

/// Evaluates the same loss as record_loss, but records and differentiates the
/// points in fixed-size chunks so the working set stays in cache. The outer
/// sqrt couples all points, so the per-chunk sums are taken first and each
/// chunk is then swept backward with the chain-rule weights of the totals.
/// Tapes are kept between calls to reuse their storage.
class ChunkedLoss {
 public:
  explicit ChunkedLoss(Eigen::Index chunk = 256);

  LossEvaluation evaluate(const Params& theta, const Vector& phi, const Matrix& points, const Vector& values,
                          const Matrix& collocation, const DictionarySpec& spec, const LossWeights& w,
                          std::shared_ptr<const MultiIndexSet> set);

 private:
  Tape& tape(std::size_t i);

  Eigen::Index chunk_;
  std::vector<std::unique_ptr<Tape>> tapes_;
};

struct AdamState {
  Vector m;
  Vector v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update in place. Throws TrainingError on a
/// non-finite gradient.
void adam_step(AdamState& state, Eigen::Ref<Vector> params, const Vector& gradient, double lr);

double lr_at(int epoch, double base, double decay = 0.9998);

/// phi / |phi|. Returns false (phi untouched) for the zero vector.
bool renormalize(Vector& phi);

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(const Problem& problem, const TrainConfig& cfg, const LossWeights& w,
                  const EpochCallback& on_epoch = {});

}  // namespace pdenet
