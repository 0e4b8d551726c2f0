// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// writes them to <out>/report.txt. The exit status is non-zero when a check
// could not be evaluated, or, with --strict, when any criterion fails.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fd.hpp"
#include "pdenet/analysis.hpp"
#include "pdenet/csv.hpp"
#include "pdenet/datagen.hpp"
#include "pdenet/experiment.hpp"
#include "pdenet/model.hpp"
#include "pdenet/null_space.hpp"
#include "pdenet/random.hpp"
#include "pdenet/training.hpp"

using namespace pdenet;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

std::string fixed(double v, int digits = 1) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

void note(const std::string& line) { std::cout << "    " << line << std::endl; }

// ---------------------------------------------------------------- 1

Verdict derivative_engine() {
  const auto t0 = std::chrono::steady_clock::now();
  Params net = init_params(2024, 2);
  Rng rng(2024);
  // Non-zero biases so the hidden units do not all switch at the origin.
  for (auto& l : net.layers())
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = rng.uniform(-0.5, 0.5);

  // Input derivatives against an 8th-order central stencil, nested per order.
  const fdcheck::ScalarField f = [&](const std::vector<double>& x) { return forward(net, x); };
  double worst_low = 0.0, worst_third = 0.0;
  for (int rep = 0; rep < 6; ++rep) {
    const std::vector<double> x{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
    const Jet j = forward_jet(net, x, 3);
    for (std::size_t i = 1; i < j.size(); ++i) {
      const MultiIndex& alpha = j.indices()[i];
      const double fd = fdcheck::fd_derivative(f, x, alpha, 2e-2);
      const double rel = std::abs(fd - j[i]) / std::max(std::abs(j[i]), 1e-3);
      double& worst = total_order(alpha) <= 2 ? worst_low : worst_third;
      worst = std::max(worst, rel);
    }
  }

  // Parameter gradients of the combined loss: tape vs FD over phi, every bias
  // and a seeded sample of weights from every layer.
  const DictionarySpec spec = parse_dictionary({"x", "t"}, "u_xxx, u_tt, u_xx, u_t, u, uu_x");
  const auto set = MultiIndexSet::closure(2, required_indices(spec));
  Matrix pts(2, 20), colloc(2, 20);
  Vector y(20);
  for (int k = 0; k < 20; ++k) {
    for (int d = 0; d < 2; ++d) pts(d, k) = rng.uniform(-1, 1), colloc(d, k) = rng.uniform(-1, 1);
    y(k) = std::sin(pts(0, k) - pts(1, k)) + 0.5 * std::sin(2 * (pts(0, k) + pts(1, k)));
  }
  Vector phi(6);
  for (Eigen::Index i = 0; i < 6; ++i) phi(i) = rng.normal();
  phi.normalize();
  const LossWeights w;

  Tape tape;
  const LossGraph g = record_loss(tape, net, phi, pts, y, colloc, spec, w, set);
  std::vector<Var> wrt = g.theta.leaves();
  wrt.push_back(g.phi);
  const std::vector<double> grad = tape.gradient(g.total, wrt);

  const Eigen::Index n_theta = static_cast<Eigen::Index>(net.size());
  Vector flat(n_theta + phi.size());
  flat << net.flatten(), phi;
  std::vector<Eigen::Index> picks;
  {
    Eigen::Index offset = 0;
    for (const auto& l : net.layers()) {
      const Eigen::Index nw = l.weight.size(), nb = l.bias.size();
      for (int s = 0; s < 60; ++s) picks.push_back(offset + static_cast<Eigen::Index>(rng.uniform() * nw));
      for (Eigen::Index b = 0; b < nb; ++b) picks.push_back(offset + nw + b);
      offset += nw + nb;
    }
    // Guard the flat layout assumption (weights then bias, per layer).
    if (offset != n_theta) return {false, "unexpected parameter layout"};
    for (Eigen::Index i = 0; i < phi.size(); ++i) picks.push_back(n_theta + i);
  }
  Params scratch = net;
  auto loss_at = [&](const Vector& v) {
    scratch.assign(std::span<const double>(v.data(), static_cast<std::size_t>(n_theta)));
    return combined_loss(scratch, v.tail(phi.size()), pts, y, colloc, spec, w);
  };
  static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  const double h = 1e-3;
  double worst_grad = 0.0;
  for (Eigen::Index i : picks) {
    double acc = 0.0;
    for (int k = 1; k <= 4; ++k) {
      Vector a = flat, b = flat;
      a(i) += k * h;
      b(i) -= k * h;
      acc += c[k - 1] * (loss_at(a) - loss_at(b));
    }
    const double fd = acc / h;
    const double tape_value = grad[static_cast<std::size_t>(i)];
    const double rel = std::abs(tape_value - fd) / std::max({std::abs(fd), std::abs(tape_value), 1e-8});
    worst_grad = std::max(worst_grad, rel);
  }
  const double elapsed = seconds_since(t0);
  note("max rel err |a|<=2: " + sci(worst_low) + ", |a|=3: " + sci(worst_third) + ", gradient (" +
       std::to_string(picks.size()) + " coords): " + sci(worst_grad) + ", " + fixed(elapsed) + " s");
  const bool pass = worst_low < 1e-6 && worst_third < 1e-4 && worst_grad < 1e-5 && elapsed < 10.0;
  return {pass, "derivative engine (jets < 1e-6 / 1e-4, gradients < 1e-5, < 10 s)"};
}

// ---------------------------------------------------------------- 2

Verdict generator_certification() {
  const auto t0 = std::chrono::steady_clock::now();
  bool all = true;
  for (const std::string& name : case_names()) {
    const EquationCase c = make_case(name);
    const ResidualReport r = residual_check(c, 2000, c.residual_tolerance);
    note(name + ": max residual " + sci(r.max_residual) + " (tol " + sci(c.residual_tolerance) + ")" +
         (r.passed ? "" : "  FAILED"));
    all = all && r.passed;
  }
  const double elapsed = seconds_since(t0);
  note(fixed(elapsed) + " s");
  return {all && elapsed < 60.0, "generator certification (all 7 residual checks, < 60 s)"};
}

// ---------------------------------------------------------------- 3

Verdict oracle_null_space(const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(dir);
  std::ofstream out(dir / "oracle.csv", std::ios::binary);
  CsvWriter csv(out);
  csv.row({"case", "err", "sigma_min", "gap", "phi"});
  bool all = true;
  double worst = 0.0;
  for (const std::string& name : case_names()) {
    const EquationCase c = make_case(name);
    const Dataset d = sample_dataset(c, 2000, 0.0, trial_seed(0, name, 0.0, 0));
    const std::vector<Jet> jets = oracle_jets(c, d.points, required_order(c.dictionary));
    const SingularPair p = smallest_singular_vector(feature_matrix(c.dictionary, d.points, jets));
    const double err = recovery_error(p.vector, c.phi_star);
    std::string phi;
    for (Eigen::Index i = 0; i < p.vector.size(); ++i) phi += (i ? ";" : "") + format_number(p.vector(i));
    csv.row({name, format_number(err), format_number(p.sigma_min), format_number(p.gap), phi});
    worst = std::max(worst, err);
    all = all && err < 1e-8;
  }
  const double elapsed = seconds_since(t0);
  note("worst err " + sci(worst) + ", " + fixed(elapsed, 2) + " s");
  return {all && elapsed < 5.0, "oracle null space (err < 1e-8 for every case, < 5 s)"};
}

// ---------------------------------------------------------------- 4, 5

ExperimentConfig matrix_config(const std::string& name, std::vector<double> sigmas, const fs::path& dir) {
  ExperimentConfig cfg;
  cfg.cases = {CaseEntry{name, std::nullopt}};
  cfg.noise_levels = std::move(sigmas);
  cfg.trials = 3;
  cfg.train.epochs = 5000;
  cfg.train.num_samples = 10000;
  cfg.train.num_collocation = 10000;
  cfg.output_dir = dir;
  cfg.master_seed = 0;
  return cfg;
}

void report_rows(const MatrixReport& r) {
  for (const ResultRow& row : r.rows)
    note(row.case_name + " sigma=" + format_number(row.sigma) + " trial " + std::to_string(row.trial) + ": " +
         (row.status == "ok" ? "err " + sci(row.err.value_or(NAN)) : "aborted: " + row.message) + " after " +
         std::to_string(row.epochs) + " epochs, " + fixed(row.seconds / 60.0) + " min");
}

double mean_err(const MatrixReport& r, const std::string& name, double sigma) {
  double sum = 0.0;
  int n = 0;
  for (const ResultRow& row : r.rows)
    if (row.case_name == name && row.sigma == sigma && row.status == "ok" && row.err) sum += *row.err, ++n;
  return n == 3 ? sum / n : NAN;
}

Verdict noiseless_wave(const fs::path& dir) {
  const MatrixReport r = run_matrix(matrix_config("wave", {0.0}, dir));
  report_rows(r);
  double slowest = 0.0;
  for (const ResultRow& row : r.rows) slowest = std::max(slowest, row.seconds);
  const double m = mean_err(r, "wave", 0.0);
  note("mean err " + sci(m) + "; slowest trial " + fixed(slowest / 60.0) +
       " min (target < 15 min)" + (slowest < 900.0 ? "" : "  MISSED"));
  return {r.aborted == 0 && m < 5e-3, "noiseless wave, 3 trials, mean err < 5e-3"};
}

Verdict low_noise(const fs::path& dir) {
  const MatrixReport wave = run_matrix(matrix_config("wave", {0.01, 1.0}, dir / "wave"));
  report_rows(wave);
  const MatrixReport helm = run_matrix(matrix_config("helmholtz", {0.0}, dir / "helmholtz"));
  report_rows(helm);
  const double wave_low = mean_err(wave, "wave", 0.01);
  const double helm_clean = mean_err(helm, "helmholtz", 0.0);
  std::map<int, double> low, high;
  bool high_ok = true;
  for (const ResultRow& row : wave.rows) {
    if (row.status != "ok" || !row.err) {
      high_ok = false;
      continue;
    }
    (row.sigma == 1.0 ? high : low)[row.trial] = *row.err;
    if (row.sigma == 1.0 && *row.err > 1.0) high_ok = false;
  }
  int trend = 0;
  for (const auto& [trial, e] : high)
    if (low.count(trial) && e > low[trial]) ++trend;
  note("wave sigma=0.01 mean err " + sci(wave_low) + "; helmholtz sigma=0 mean err " +
       sci(helm_clean) + "; err(1) > err(0.01) in " + std::to_string(trend) + " of 3 trials");
  const bool pass = wave_low < 1.5e-2 && helm_clean < 5e-2 && high_ok && high.size() == 3 && trend >= 2 &&
                    helm.aborted == 0;
  return {pass, "low noise (wave 0.01 < 1.5e-2, helmholtz 0 < 5e-2, sigma=1 completes with the noise trend)"};
}

// ---------------------------------------------------------------- 6

Verdict crlb_vs_quadrature() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double a : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
    const CrlbParams p{a, 1.0, 1.0, 1000};
    const double numeric = fisher_numeric(a, p.amplitude, p.sigma).inverse_aa() / static_cast<double>(p.samples);
    worst = std::max(worst, std::abs(crlb_bound(p) - numeric) / numeric);
  }
  const double elapsed = seconds_since(t0);
  note("worst relative difference " + sci(worst) + ", " + sci(elapsed) + " s");
  return {worst < 1e-8 && elapsed < 1.0, "CRLB closed form vs quadrature (relative 1e-8, < 1 s)"};
}

// ---------------------------------------------------------------- 7

ExperimentConfig ode_config(const fs::path& dir) {
  ExperimentConfig cfg;
  cfg.cases = {};
  cfg.output_dir = dir;
  cfg.master_seed = 0;
  cfg.crlb.noise_levels = {0.01, 0.1, 1.0};
  cfg.crlb.trials = 3;
  cfg.crlb.num_samples = 1000;
  return cfg;
}

Verdict ode_experiment_check(const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(dir);
  const OdeExperiment e = run_crlb_plot(ode_config(dir));
  const double elapsed = seconds_since(t0);
  bool pass = elapsed < 600.0;
  for (const OdeLevel& l : e.levels) {
    const double ratio = l.mse / l.crlb;
    const bool lower = l.used_trials > 0 && ratio >= 0.5;
    const bool upper = l.sigma < 0.05 || ratio <= 50.0;
    note("sigma=" + format_number(l.sigma) + ": MSE " + sci(l.mse) + ", CRLB " + sci(l.crlb) + ", ratio " +
         fixed(ratio, 2) + " over " + std::to_string(l.used_trials) + " trials" + (lower && upper ? "" : "  FAILED"));
    pass = pass && lower && upper;
  }
  note(fixed(elapsed) + " s");
  return {pass && e.levels.size() == 3, "ODE vs CRLB (MSE >= 0.5 CRLB everywhere, <= 50 CRLB at 0.1 and 1, < 10 min)"};
}

// ---------------------------------------------------------------- 8

Verdict metric_properties() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(8);
  long failures = 0;
  double worst_collinear = 0.0, smallest_apart = 1.0, worst_real_scale = 0.0;
  for (int rep = 0; rep < 100000; ++rep) {
    const Eigen::Index n = 2 + rep % 7;
    Vector a(n), b(n);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = rng.normal(), b(i) = rng.normal();
    if (rep % 4 == 1) b = rng.uniform(-3, 3) * a + 1e-6 * b;  // near-collinear branch
    const double e = recovery_error(a, b);
    // Power-of-two scalings and sign flips are exact in floating point, so
    // the invariance must be exact; other scalings round the inputs.
    const double s = std::ldexp(rng.uniform() < 0.5 ? -1.0 : 1.0, static_cast<int>(rng.uniform(-30, 30)));
    const double t = std::ldexp(1.0, static_cast<int>(rng.uniform(-30, 30)));
    const bool ok = e >= 0.0 && e <= 1.0 && e == recovery_error(b, a) && e == recovery_error(s * a, t * b) &&
                    e == recovery_error(-a, b);
    if (!ok) ++failures;
    const double r = rng.uniform(0.1, 10.0);
    worst_real_scale = std::max(worst_real_scale, std::abs(recovery_error(r * a, b) - e));
    const double collinear = recovery_error(a, rng.uniform(-5, 5) * a + 0.0 * b);
    worst_collinear = std::max(worst_collinear, collinear);
    if (rep % 4 != 1) smallest_apart = std::min(smallest_apart, e);
  }
  const double elapsed = seconds_since(t0);
  note(std::to_string(failures) + " range/symmetry/invariance failures; worst collinear err " + sci(worst_collinear) +
       "; smallest non-collinear err " + sci(smallest_apart) + "; arbitrary-scale drift " + sci(worst_real_scale) +
       "; " + fixed(elapsed, 2) + " s");
  const bool pass = failures == 0 && worst_collinear <= 1e-12 && smallest_apart > 1e-12 && elapsed < 5.0;
  return {pass, "recovery_error properties (1e5 randomized checks, < 5 s)"};
}

// ---------------------------------------------------------------- 9

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    if (entry.path().filename() == "timings.csv") continue;  // wall-clock times, not results
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[fs::relative(entry.path(), dir).generic_string()] = s.str();
  }
  return out;
}

Verdict determinism(const fs::path& root, bool have_first_runs) {
  const fs::path again = root / "rerun";
  fs::remove_all(again);
  if (!have_first_runs) {
    oracle_null_space(root / "c3");
    noiseless_wave(root / "c4");
    ode_experiment_check(root / "c7");
  }
  oracle_null_space(again / "c3");
  noiseless_wave(again / "c4");
  ode_experiment_check(again / "c7");
  bool same = true;
  std::size_t compared = 0;
  for (const char* part : {"c3", "c4", "c7"}) {
    const auto first = csv_files(root / part), second = csv_files(again / part);
    if (first.empty() || first.size() != second.size()) same = false;
    for (const auto& [name, bytes] : first) {
      const auto it = second.find(name);
      const bool equal = it != second.end() && it->second == bytes;
      if (!equal) note(std::string(part) + "/" + name + " differs");
      same = same && equal;
      ++compared;
    }
  }
  note(std::to_string(compared) + " CSV files compared");
  return {same, "determinism (byte-identical CSVs on rerun of criteria 3, 4, 7)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pdenet acceptance checks"};
  fs::path out = "acceptance_out";
  std::vector<int> only;
  bool strict = false;
  app.add_option("--out", out, "Directory for the CSV artifacts");
  app.add_option("--only", only, "Run only these criteria (1-9)")->delimiter(',')->check(CLI::Range(1, 9));
  app.add_flag("--strict", strict, "Exit non-zero when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected = only.empty() ? std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 9}
                                              : std::set<int>(only.begin(), only.end());
  fs::remove_all(out);
  fs::create_directories(out);

  const std::map<int, std::function<Verdict()>> checks{
      {1, [] { return derivative_engine(); }},
      {2, [] { return generator_certification(); }},
      {3, [&] { return oracle_null_space(out / "c3"); }},
      {4, [&] { return noiseless_wave(out / "c4"); }},
      {5, [&] { return low_noise(out / "c5"); }},
      {6, [] { return crlb_vs_quadrature(); }},
      {7, [&] { return ode_experiment_check(out / "c7"); }},
      {8, [] { return metric_properties(); }},
      {9, [&] { return determinism(out, selected.count(3) && selected.count(4) && selected.count(7)); }},
  };

  int failed = 0, errors = 0;
  std::vector<std::string> lines;
  for (int id : selected) {
    std::cout << "criterion " << id << std::endl;
    Verdict v;
    try {
      v = checks.at(id)();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
      ++errors;
    }
    const std::string line = std::string(v.pass ? "PASS" : "FAIL") + " " + std::to_string(id) + ": " + v.detail;
    std::cout << line << std::endl;
    lines.push_back(line);
    if (!v.pass) ++failed;
  }
  std::ofstream report(out / "report.txt", std::ios::binary);
  std::cout << "\nsummary\n";
  for (const std::string& l : lines) {
    std::cout << l << "\n";
    report << l << "\n";
  }
  std::cout << failed << " of " << lines.size() << " criteria failed" << std::endl;
  return errors > 0 || (strict && failed > 0) ? 1 : 0;
}
