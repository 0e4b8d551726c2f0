#include "pdenet/training.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <span>
#include <sstream>

#include "pdenet/analysis.hpp"
#include "pdenet/batched_jet.hpp"
#include "pdenet/null_space.hpp"
#include "pdenet/random.hpp"

namespace pdenet {

void LossWeights::validate() const {
  if (lambda_u < 0.0 || lambda_d < 0.0 || lambda_sparse < 0.0)
    throw std::invalid_argument("loss weights must be non-negative");
  if (!(epsilon_sqrt > 0.0)) throw std::invalid_argument("epsilon_sqrt must be positive");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (!(lr_theta > 0.0) || !(lr_phi > 0.0)) throw std::invalid_argument("learning rates must be positive");
  if (!(decay > 0.0 && decay <= 1.0)) throw std::invalid_argument("decay must lie in (0, 1]");
  if (num_samples < 1) throw std::invalid_argument("num_samples must be >= 1");
  if (resample_collocation && num_collocation < 1) throw std::invalid_argument("num_collocation must be >= 1");
  if (early_stop_patience < 0) throw std::invalid_argument("early_stop_patience must be non-negative");
}

bool Box::contains(std::span<const double> x) const {
  for (Eigen::Index d = 0; d < lower.size(); ++d)
    if (x[static_cast<std::size_t>(d)] < lower(d) || x[static_cast<std::size_t>(d)] > upper(d)) return false;
  return true;
}

Box Box::bounding(const Matrix& points) {
  return {points.rowwise().minCoeff(), points.rowwise().maxCoeff()};
}

double loss_u(const Params& theta, const Matrix& points, const Vector& values) {
  if (points.cols() < 1 || points.cols() != values.size()) throw std::invalid_argument("loss_u needs J >= 1 matching samples");
  double acc = 0.0;
  std::vector<double> x(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    Eigen::Map<Vector>(x.data(), points.rows()) = points.col(j);
    const double r = values(j) - forward(theta, x);
    acc += r * r;
  }
  return acc / static_cast<double>(points.cols());
}

Matrix network_jets(const Params& theta, const Matrix& points, std::shared_ptr<const MultiIndexSet> set) {
  Tape tape;
  ParamVars pv;
  for (const auto& l : theta.layers()) {
    pv.weights.push_back(tape.constant(l.weight));
    pv.biases.push_back(tape.constant(l.bias));
  }
  const Eigen::Index K = points.cols();
  Var out = forward_batch(pv, input_jet(tape, points, *set), set, K);
  return out.value().reshaped(K, static_cast<Eigen::Index>(set->size())).transpose();
}

Matrix network_feature_matrix(const Params& theta, const Matrix& collocation, const DictionarySpec& spec) {
  const auto set = MultiIndexSet::full(spec.dims(), required_order(spec));
  const Matrix jets = network_jets(theta, collocation, set);
  std::vector<Jet> per_point;
  per_point.reserve(static_cast<std::size_t>(collocation.cols()));
  for (Eigen::Index k = 0; k < collocation.cols(); ++k) {
    Jet j(set);
    for (std::size_t c = 0; c < set->size(); ++c) j[c] = jets(static_cast<Eigen::Index>(c), k);
    per_point.push_back(std::move(j));
  }
  return feature_matrix(spec, collocation, per_point);
}

double loss_d(const Params& theta, const Vector& phi, const Matrix& collocation, const DictionarySpec& spec) {
  const Matrix d = network_feature_matrix(theta, collocation, spec);
  return (d * phi).squaredNorm() / static_cast<double>(collocation.cols());
}

double loss_sparse(const Vector& phi) { return phi.lpNorm<1>(); }

double combined_loss(const Params& theta, const Vector& phi, const Matrix& points, const Vector& values,
                     const Matrix& collocation, const DictionarySpec& spec, const LossWeights& w) {
  const double lu = loss_u(theta, points, values);
  const double ld = loss_d(theta, phi, collocation, spec);
  return w.lambda_u * std::sqrt(lu + w.epsilon_sqrt) * (1.0 + w.lambda_d * ld + w.lambda_sparse * loss_sparse(phi));
}

LossGraph record_loss(Tape& tape, const Params& theta, const Vector& phi, const Matrix& points, const Vector& values,
                      const Matrix& collocation, const DictionarySpec& spec, const LossWeights& w,
                      std::shared_ptr<const MultiIndexSet> set) {
  LossGraph g;
  g.theta = attach(tape, theta);
  g.phi = tape.variable(phi.transpose());

  const Eigen::Index K = collocation.cols();
  Var out = forward_batch(g.theta, input_jet(tape, collocation, *set), set, K);
  std::vector<Var> rows;
  for (std::size_t c = 0; c < set->size(); ++c) rows.push_back(columns(out, static_cast<Eigen::Index>(c) * K, K));
  g.features = feature_rows(spec, collocation, *set, rows);
  g.loss_d = (1.0 / static_cast<double>(K)) * sum(square(matmul(g.phi, g.features)));

  // Collocation at the sample sites shares the value block; otherwise the
  // samples get their own value-only pass.
  Var prediction;
  if (&collocation == &points || (collocation.cols() == points.cols() && collocation == points)) {
    prediction = rows[0];
  } else {
    const auto value_only = MultiIndexSet::full(spec.dims(), 0);
    prediction = forward_batch(g.theta, input_jet(tape, points, *value_only), value_only, points.cols());
  }
  Var residual = prediction - tape.constant(values.transpose());
  g.loss_u = (1.0 / static_cast<double>(points.cols())) * sum(square(residual));
  g.loss_sparse = sum(abs(g.phi));

  Var data_term = w.lambda_u * sqrt(g.loss_u + w.epsilon_sqrt);
  Var regularizer = (w.lambda_d * g.loss_d + w.lambda_sparse * g.loss_sparse) + 1.0;
  g.total = hadamard(data_term, regularizer);
  return g;
}

ChunkedLoss::ChunkedLoss(Eigen::Index chunk) : chunk_(chunk) {
  if (chunk < 1) throw std::invalid_argument("chunk size must be >= 1");
}

Tape& ChunkedLoss::tape(std::size_t i) {
  while (tapes_.size() <= i) tapes_.push_back(std::make_unique<Tape>());
  return *tapes_[i];
}

LossEvaluation ChunkedLoss::evaluate(const Params& theta, const Vector& phi, const Matrix& points, const Vector& values,
                                     const Matrix& collocation, const DictionarySpec& spec, const LossWeights& w,
                                     std::shared_ptr<const MultiIndexSet> set) {
  const Eigen::Index J = points.cols(), K = collocation.cols();
  if (J < 1 || J != values.size()) throw std::invalid_argument("loss needs J >= 1 matching samples");
  if (K < 1) throw std::invalid_argument("loss needs at least one collocation point");
  const bool shared = &collocation == &points || (K == J && collocation == points);
  const Eigen::Index C = static_cast<Eigen::Index>(set->size());

  struct Chunk {
    Tape* tape;
    ParamVars theta;
    Var phi;
    Var ld;  // sum of squared residuals of D phi over the chunk
    Var lu;  // sum of squared data residuals over the chunk
  };
  std::vector<Chunk> chunks;
  LossEvaluation ev;
  ev.features.resize(static_cast<Eigen::Index>(spec.size()), K);
  double ld_sum = 0.0, lu_sum = 0.0;
  std::size_t next = 0;

  for (Eigen::Index start = 0; start < K; start += chunk_) {
    const Eigen::Index n = std::min(chunk_, K - start);
    Chunk c{&tape(next++), {}, {}, {}, {}};
    Tape& t = *c.tape;
    t.clear();
    c.theta = attach(t, theta);
    c.phi = t.variable(phi.transpose());
    const Matrix where = collocation.middleCols(start, n);
    Var out = forward_batch(c.theta, input_jet(t, where, *set), set, n);
    std::vector<Var> rows;
    for (Eigen::Index i = 0; i < C; ++i) rows.push_back(columns(out, i * n, n));
    Var features = feature_rows(spec, where, *set, rows);
    ev.features.middleCols(start, n) = features.value();
    c.ld = sum(square(matmul(c.phi, features)));
    ld_sum += c.ld.scalar();
    if (shared) {
      c.lu = sum(square(rows[0] - t.constant(values.segment(start, n).transpose())));
      lu_sum += c.lu.scalar();
    }
    chunks.push_back(c);
  }
  if (!shared) {
    const auto value_only = MultiIndexSet::full(spec.dims(), 0);
    for (Eigen::Index start = 0; start < J; start += chunk_) {
      const Eigen::Index n = std::min(chunk_, J - start);
      Chunk c{&tape(next++), {}, {}, {}, {}};
      Tape& t = *c.tape;
      t.clear();
      c.theta = attach(t, theta);
      Var out = forward_batch(c.theta, input_jet(t, points.middleCols(start, n), *value_only), value_only, n);
      c.lu = sum(square(out - t.constant(values.segment(start, n).transpose())));
      lu_sum += c.lu.scalar();
      chunks.push_back(c);
    }
  }

  ev.loss_u = lu_sum / static_cast<double>(J);
  ev.loss_d = ld_sum / static_cast<double>(K);
  ev.loss_sparse = loss_sparse(phi);
  const double root = std::sqrt(ev.loss_u + w.epsilon_sqrt);
  const double regularizer = 1.0 + w.lambda_d * ev.loss_d + w.lambda_sparse * ev.loss_sparse;
  ev.total = w.lambda_u * root * regularizer;
  if (!std::isfinite(ev.total)) return ev;

  // d total / d lu_sum and d total / d ld_sum.
  const double a = w.lambda_u * regularizer / (2.0 * root) / static_cast<double>(J);
  const double b = w.lambda_u * root * w.lambda_d / static_cast<double>(K);
  ev.grad_theta = Vector::Zero(static_cast<Eigen::Index>(theta.size()));
  ev.grad_phi = Vector::Zero(phi.size());
  for (Chunk& c : chunks) {
    Tape& t = *c.tape;
    Var seed = c.ld.valid() ? (c.lu.valid() ? a * c.lu + b * c.ld : b * c.ld) : a * c.lu;
    std::vector<Var> wrt = c.theta.leaves();
    if (c.phi.valid()) wrt.push_back(c.phi);
    const std::vector<double> g = t.gradient(seed, wrt);
    ev.grad_theta += Eigen::Map<const Vector>(g.data(), ev.grad_theta.size());
    if (c.phi.valid()) ev.grad_phi += Eigen::Map<const Vector>(g.data() + ev.grad_theta.size(), phi.size());
  }
  const double sparse = w.lambda_u * root * w.lambda_sparse;
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    ev.grad_phi(i) += sparse * static_cast<double>((phi(i) > 0.0) - (phi(i) < 0.0));
  return ev;
}

void adam_step(AdamState& state, Eigen::Ref<Vector> params, const Vector& gradient, double lr) {
  if (gradient.size() != params.size()) throw std::invalid_argument("gradient and parameter sizes differ");
  if (!gradient.allFinite()) throw TrainingError("non-finite gradient in Adam step " + std::to_string(state.step + 1));
  if (state.m.size() != params.size()) {
    state.m = Vector::Zero(params.size());
    state.v = Vector::Zero(params.size());
    state.step = 0;
  }
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * gradient;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.epsilon);
}

double lr_at(int epoch, double base, double decay) {
  if (epoch < 0) throw std::invalid_argument("epoch must be non-negative");
  return base * std::pow(decay, static_cast<double>(epoch));
}

bool renormalize(Vector& phi) {
  const double n = phi.norm();
  if (!(n > 0.0) || !std::isfinite(n)) return false;
  phi /= n;
  return true;
}

namespace {

Vector random_unit(Rng& rng, Eigen::Index n) {
  Vector v(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  } while (!renormalize(v));
  return v;
}

Matrix uniform_points(Rng& rng, const Box& box, Eigen::Index count) {
  Matrix p(box.dims(), count);
  for (Eigen::Index k = 0; k < count; ++k)
    for (Eigen::Index d = 0; d < box.dims(); ++d) p(d, k) = rng.uniform(box.lower(d), box.upper(d));
  return p;
}

}  // namespace

TrainResult train(const Problem& problem, const TrainConfig& cfg, const LossWeights& w, const EpochCallback& on_epoch) {
  cfg.validate();
  w.validate();
  const DictionarySpec& spec = problem.dictionary;
  if (required_order(spec) > kMaxJetOrder) throw TrainingError("dictionary needs derivatives above order 3");
  if (problem.points.rows() != spec.dims() || problem.points.cols() != problem.values.size() || problem.values.size() < 1)
    throw TrainingError("problem samples do not match the dictionary variables");

  const auto set = MultiIndexSet::closure(spec.dims(), required_indices(spec));
  const Eigen::Index L = static_cast<Eigen::Index>(spec.size());
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainResult result;
  result.theta = init_params(cfg.seed, spec.dims(), cfg.hidden);

  Matrix collocation = cfg.resample_collocation ? uniform_points(rng, problem.domain, cfg.num_collocation) : problem.points;
  if (collocation.cols() < L) throw TrainingError("fewer collocation points than dictionary terms");

  auto svd_init = [&](const Matrix& features_k_by_l) {
    try {
      return smallest_singular_vector(features_k_by_l).vector;
    } catch (const std::exception& e) {
      std::clog << "[train] SVD initialization failed (" << e.what() << "); using a random unit vector\n";
      return random_unit(rng, L);
    }
  };
  Vector phi;
  {
    Matrix d0;
    try {
      d0 = network_feature_matrix(result.theta, collocation, spec);
      phi = svd_init(d0);
    } catch (const DictionaryError& e) {
      std::clog << "[train] " << e.what() << "; using a random unit vector\n";
      phi = random_unit(rng, L);
    }
  }
  result.initial_phi = phi;

  AdamState theta_state, phi_state;
  ChunkedLoss loss;
  std::vector<double> gap_trace;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.resample_collocation && epoch > 0) collocation = uniform_points(rng, problem.domain, cfg.num_collocation);
    const Matrix& colloc_ref = cfg.resample_collocation ? collocation : problem.points;
    const LossEvaluation ev = loss.evaluate(result.theta, phi, problem.points, problem.values, colloc_ref, spec, w, set);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss_u = ev.loss_u;
    rec.loss_d = ev.loss_d;
    rec.total = ev.total;
    if (!std::isfinite(rec.total)) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << epoch << " (L_u=" << rec.loss_u << ", L_d=" << rec.loss_d
          << ", L_sparse=" << ev.loss_sparse << ")";
      throw TrainingError(msg.str());
    }

    const Matrix& features = ev.features;  // L x K at the pre-step parameters
    {
      const SingularPair sp = smallest_singular_vector_from_gram(features * features.transpose());
      rec.sigma_min = sp.sigma_min;
      rec.gap = sp.gap;
    }
    const Vector& grad_theta = ev.grad_theta;
    // Only the component tangent to the unit sphere: the radial part is
    // undone by renormalization anyway, but Adam's per-coordinate scaling
    // would turn it into a spurious tangential drift.
    const Vector grad_phi = ev.grad_phi - phi.dot(ev.grad_phi) * phi;

    Vector flat = result.theta.flatten();
    try {
      adam_step(theta_state, flat, grad_theta, lr_at(epoch, cfg.lr_theta, cfg.decay));
      adam_step(phi_state, phi, grad_phi, lr_at(epoch, cfg.lr_phi, cfg.decay));
    } catch (const TrainingError& e) {
      throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch));
    }
    result.theta.assign(std::span<const double>(flat.data(), static_cast<std::size_t>(flat.size())));

    rec.phi_norm = phi.norm();
    if (!renormalize(phi)) {
      std::clog << "[train] phi collapsed to zero at epoch " << epoch << "; re-initializing from the feature matrix\n";
      phi = svd_init(features.transpose());
      ++result.reinitializations;
    }
    rec.err = problem.phi_star ? recovery_error(phi, *problem.phi_star) : std::numeric_limits<double>::quiet_NaN();
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    gap_trace.push_back(rec.gap);
    const auto patience = static_cast<std::size_t>(cfg.early_stop_patience);
    if (patience > 0 && gap_trace.size() > patience) {
      // The whole window must stay flat; comparing only its endpoints stops
      // on traces that rise and fall back (e.g. on a loss plateau).
      const auto window = std::span<const double>(gap_trace).last(patience + 1);
      const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
      if (*hi - *lo <= cfg.early_stop_tolerance * std::max(std::abs(gap_trace.back()), 1e-300)) {
        result.early_stopped = true;
        break;
      }
    }
  }

  result.phi = phi;
  try {
    const SingularPair final_pair = smallest_singular_vector(network_feature_matrix(result.theta, collocation, spec));
    result.sigma_min = final_pair.sigma_min;
    result.gap = final_pair.gap;
  } catch (const std::exception& e) {
    std::clog << "[train] final feature matrix unavailable: " << e.what() << "\n";
    result.sigma_min = result.gap = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

}  // namespace pdenet
