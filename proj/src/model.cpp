#include "pdenet/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "pdenet/batched_jet.hpp"
#include "pdenet/random.hpp"

namespace pdenet {

Params::Params(int input_dim, std::vector<int> hidden) : input_dim_(input_dim), hidden_(std::move(hidden)) {
  if (input_dim < 1) throw std::invalid_argument("input dimension must be >= 1");
  int fan_in = input_dim;
  for (int width : hidden_) {
    if (width < 1) throw std::invalid_argument("hidden width must be >= 1");
    layers_.push_back({Matrix::Zero(width, fan_in), Vector::Zero(width)});
    fan_in = width;
  }
  layers_.push_back({Matrix::Zero(1, fan_in), Vector::Zero(1)});
}

std::size_t Params::size() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Vector Params::flatten() const {
  Vector flat(static_cast<Eigen::Index>(size()));
  Eigen::Index at = 0;
  for (const auto& l : layers_) {
    flat.segment(at, l.weight.size()) = l.weight.reshaped();
    at += l.weight.size();
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return flat;
}

void Params::assign(std::span<const double> flat) {
  if (flat.size() != size()) throw std::invalid_argument("flat parameter vector has the wrong length");
  std::size_t at = 0;
  for (auto& l : layers_) {
    std::memcpy(l.weight.data(), flat.data() + at, sizeof(double) * static_cast<std::size_t>(l.weight.size()));
    at += static_cast<std::size_t>(l.weight.size());
    std::memcpy(l.bias.data(), flat.data() + at, sizeof(double) * static_cast<std::size_t>(l.bias.size()));
    at += static_cast<std::size_t>(l.bias.size());
  }
}

bool Params::operator==(const Params& other) const {
  if (input_dim_ != other.input_dim_ || hidden_ != other.hidden_) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (layers_[i].weight != other.layers_[i].weight || layers_[i].bias != other.layers_[i].bias) return false;
  return true;
}

Params init_params(std::uint64_t seed, int input_dim, const std::vector<int>& hidden) {
  Params p(input_dim, hidden);
  Rng rng(seed);
  for (auto& l : p.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.weight.rows() + l.weight.cols()));
    for (Eigen::Index j = 0; j < l.weight.cols(); ++j)
      for (Eigen::Index i = 0; i < l.weight.rows(); ++i) l.weight(i, j) = rng.uniform(-limit, limit);
  }
  return p;
}

double forward(const Params& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.input_dim()) throw std::invalid_argument("input dimension mismatch");
  std::vector<double> a(x.begin(), x.end()), z;
  const auto& layers = params.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    z.assign(static_cast<std::size_t>(layer.weight.rows()), 0.0);
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) acc += layer.weight(i, j) * a[static_cast<std::size_t>(j)];
      acc += layer.bias(i);
      z[static_cast<std::size_t>(i)] = l + 1 < layers.size() ? softplus(acc) : acc;
    }
    a.swap(z);
  }
  return a[0];
}

Jet forward_jet(const Params& params, std::span<const double> x, int order) {
  if (static_cast<int>(x.size()) != params.input_dim()) throw std::invalid_argument("input dimension mismatch");
  if (order < 0 || order > kMaxJetOrder) throw std::invalid_argument("jet order must be in [0, 3]");
  auto set = MultiIndexSet::full(params.input_dim(), order);
  std::vector<Jet> a, z;
  for (int d = 0; d < params.input_dim(); ++d) a.push_back(Jet::variable(set, x[static_cast<std::size_t>(d)], d));
  const auto& layers = params.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    z.clear();
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      Jet acc(set);
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        const double w = layer.weight(i, j);
        const Jet& in = a[static_cast<std::size_t>(j)];
        for (std::size_t c = 0; c < set->size(); ++c) acc[c] += w * in[c];
      }
      acc[0] += layer.bias(i);
      z.push_back(l + 1 < layers.size() ? jet_softplus(acc) : std::move(acc));
    }
    a.swap(z);
  }
  return a[0];
}

std::vector<Var> ParamVars::leaves() const {
  std::vector<Var> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(weights[l]);
    out.push_back(biases[l]);
  }
  return out;
}

ParamVars attach(Tape& tape, const Params& params) {
  ParamVars vars;
  for (const auto& l : params.layers()) {
    vars.weights.push_back(tape.variable(l.weight));
    vars.biases.push_back(tape.variable(l.bias));
  }
  return vars;
}

Var forward_batch(const ParamVars& params, Var input, std::shared_ptr<const MultiIndexSet> set, Eigen::Index points) {
  Var a = input;
  const std::size_t n = params.weights.size();
  for (std::size_t l = 0; l < n; ++l) {
    a = affine_jet(params.weights[l], params.biases[l], a, points);
    if (l + 1 < n) a = softplus_jet(a, set, points);
  }
  return a;
}

void save_params(const Params& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const Vector flat = params.flatten();
  nlohmann::json header{{"input_dim", params.input_dim()}, {"hidden", params.hidden()}, {"count", flat.size()}};
  out << header.dump() << '\n';
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(flat(i));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

Params load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  const auto header = nlohmann::json::parse(line);
  Params p(header.at("input_dim").get<int>(), header.at("hidden").get<std::vector<int>>());
  const auto count = header.at("count").get<std::size_t>();
  if (count != p.size()) throw std::runtime_error("parameter snapshot header does not match its architecture");
  std::vector<double> flat(count);
  for (double& v : flat) {
    std::uint64_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) throw std::runtime_error("truncated parameter snapshot");
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
  }
  p.assign(flat);
  return p;
}

}  // namespace pdenet
