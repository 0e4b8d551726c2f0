#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "pdenet/csv.hpp"
#include "pdenet/experiment.hpp"

namespace fs = std::filesystem;
using namespace pdenet;

namespace {

int discover(const std::string& config_path, const std::string& out) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out.empty()) cfg.output_dir = out;
  const MatrixReport r = run_matrix(cfg);
  std::cout << "wrote " << r.rows.size() << " result rows to " << (cfg.output_dir / "results.csv").string() << "\n";
  for (const SummaryRow& s : summarize(r.rows))
    std::cout << s.case_name << " sigma=" << format_number(s.sigma) << " err=" << format_number(s.mean_err)
              << " +- " << format_number(s.std_err) << " (" << s.count << " trials)\n";
  if (r.aborted) std::cerr << r.aborted << " trial(s) aborted\n";
  return r.aborted ? 1 : 0;
}

int crlb(const std::string& config_path, const std::string& out) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out.empty()) cfg.output_dir = out;
  const OdeExperiment ex = run_crlb_plot(cfg);
  for (const OdeLevel& l : ex.levels)
    std::cout << "sigma=" << format_number(l.sigma) << " mse=" << format_number(l.mse)
              << " crlb=" << format_number(l.crlb) << " (" << l.used_trials << " trials)\n";
  return 0;
}

int datagen(const std::string& name, double sigma, int samples, std::uint64_t seed, const std::string& out) {
  const EquationCase c = make_case(name);
  const Dataset d = sample_dataset(c, samples, sigma, seed);
  write_dataset(out, c.variables, d);
  return 0;
}

int ingest(const std::string& data, const std::string& vars, const std::string& dict, const std::string& config_path,
           const std::string& out, std::uint64_t seed) {
  TrainConfig tc;
  LossWeights w;
  if (!config_path.empty()) {
    const ExperimentConfig cfg = load_config(config_path);
    tc = cfg.train;
    w = cfg.weights;
  }
  const Problem p = ingest_external(data, split_list(vars), dict);
  tc.seed = seed;
  tc.num_samples = static_cast<int>(p.points.cols());
  const TrainResult r = train(p, tc, w);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + out + " for writing");
    os = &file;
  }
  CsvWriter csv(*os);
  csv.row({"term", "phi"});
  const auto labels = p.dictionary.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) csv.row({labels[i], format_number(r.phi(static_cast<Eigen::Index>(i)))});
  std::cerr << "sigma_min=" << format_number(r.sigma_min) << " gap=" << format_number(r.gap) << " err=n/a\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recover PDE coefficients from noisy samples of a solution"};
  app.require_subcommand(1);

  std::string config, out;
  auto* disc = app.add_subcommand("discover", "Run the case x noise x trial matrix of a config");
  disc->add_option("--config", config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  disc->add_option("--out", out, "Output directory (overrides output_dir)");

  auto* cr = app.add_subcommand("crlb", "Growth-rate experiment against the Cramer-Rao bound");
  cr->add_option("--config", config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  cr->add_option("--out", out, "Output directory (overrides output_dir)");

  std::string case_name;
  double sigma = 0.0;
  int samples = 10000;
  std::uint64_t seed = 0;
  auto* dg = app.add_subcommand("datagen", "Sample a catalog case to CSV");
  dg->add_option("--case", case_name, "Case name")->required();
  dg->add_option("--sigma", sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
  dg->add_option("--samples", samples, "Number of samples")->check(CLI::PositiveNumber);
  dg->add_option("--seed", seed, "RNG seed");
  dg->add_option("--out", out, "Output CSV")->required();

  std::string data, vars, dict;
  auto* ing = app.add_subcommand("ingest", "Fit a dictionary to user data");
  ing->add_option("--data", data, "CSV with the variables then y")->required();
  ing->add_option("--vars", vars, "Comma-separated variable names")->required();
  ing->add_option("--dict", dict, "Comma-separated dictionary terms")->required();
  ing->add_option("--config", config, "JSON config for train/weights")->check(CLI::ExistingFile);
  ing->add_option("--seed", seed, "Training seed");
  ing->add_option("--out", out, "Output CSV of coefficients (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*disc) return discover(config, out);
    if (*cr) return crlb(config, out);
    if (*dg) return datagen(case_name, sigma, samples, seed, out);
    if (*ing) return ingest(data, vars, dict, config, out, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
