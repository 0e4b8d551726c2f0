#include "pdenet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "pdenet/csv.hpp"

namespace pdenet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string sigma_tag(double sigma) {
  std::string s = format_number(sigma);
  std::replace(s.begin(), s.end(), '.', 'p');
  std::replace(s.begin(), s.end(), '-', 'm');
  return s;
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (char c : text) {
    if (c == sep) flush();
    else cur += c;
  }
  flush();
  return out;
}

TrainConfig parse_train_config(const json& j, TrainConfig t) {
  const std::string w = "train";
  check_keys(j,
             {"epochs", "lr_theta", "lr_phi", "decay", "num_samples", "num_collocation", "resample_collocation",
              "early_stop_patience", "early_stop_tolerance", "hidden"},
             w);
  read(j, "epochs", t.epochs, w);
  read(j, "lr_theta", t.lr_theta, w);
  read(j, "lr_phi", t.lr_phi, w);
  read(j, "decay", t.decay, w);
  read(j, "num_samples", t.num_samples, w);
  read(j, "num_collocation", t.num_collocation, w);
  read(j, "resample_collocation", t.resample_collocation, w);
  read(j, "early_stop_patience", t.early_stop_patience, w);
  read(j, "early_stop_tolerance", t.early_stop_tolerance, w);
  read(j, "hidden", t.hidden, w);
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  return t;
}

LossWeights parse_weights(const json& j, LossWeights lw) {
  const std::string w = "weights";
  check_keys(j, {"lambda_u", "lambda_d", "lambda_sparse", "epsilon_sqrt"}, w);
  read(j, "lambda_u", lw.lambda_u, w);
  read(j, "lambda_d", lw.lambda_d, w);
  read(j, "lambda_sparse", lw.lambda_sparse, w);
  read(j, "epsilon_sqrt", lw.epsilon_sqrt, w);
  try {
    lw.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("weights: ") + e.what());
  }
  return lw;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  for (double s : noise_levels)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("noise levels must be finite and >= 0");
  for (double s : crlb.noise_levels)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("crlb noise levels must be finite and >= 0");
  if (crlb.trials < 1) throw ConfigError("crlb.trials must be >= 1");
  if (crlb.num_samples < 2) throw ConfigError("crlb.num_samples must be >= 2");
  const auto names = case_names();
  std::set<std::string> seen;
  for (const CaseEntry& c : cases) {
    if (!seen.insert(c.name).second) throw ConfigError("case '" + c.name + "' listed twice");
    if (c.data) {
      if (!fs::exists(c.data->data)) throw ConfigError("data file not found: " + c.data->data.string());
    } else if (std::find(names.begin(), names.end(), c.name) == names.end()) {
      throw ConfigError("unknown case '" + c.name + "'");
    }
  }
  train.validate();
  weights.validate();
}

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  const std::string w = "config";
  check_keys(j,
             {"cases", "noise_levels", "trials", "train", "weights", "output_dir", "master_seed", "crlb", "workers",
              "write_history"},
             w);
  ExperimentConfig cfg;
  if (j.contains("cases")) {
    const json& cases = j.at("cases");
    if (!cases.is_array()) throw ConfigError("cases must be an array");
    for (const json& c : cases) {
      if (c.is_string()) {
        cfg.cases.push_back({c.get<std::string>(), std::nullopt});
        continue;
      }
      check_keys(c, {"name", "variables", "dictionary", "data"}, "cases[]");
      InlineCase ic;
      ic.name = c.value("name", std::string("external"));
      try {
        const json& vars = c.at("variables");
        ic.variables = vars.is_string() ? split_list(vars.get<std::string>()) : vars.get<std::vector<std::string>>();
        ic.dictionary = c.at("dictionary").get<std::string>();
        ic.data = c.at("data").get<std::string>();
      } catch (const json::exception& e) {
        throw ConfigError("inline case '" + ic.name + "' needs variables, dictionary and data: " + e.what());
      }
      if (ic.data.is_relative() && !base_dir.empty()) ic.data = base_dir / ic.data;
      cfg.cases.push_back({ic.name, ic});
    }
  }
  read(j, "noise_levels", cfg.noise_levels, w);
  read(j, "trials", cfg.trials, w);
  if (j.contains("train")) cfg.train = parse_train_config(j.at("train"));
  if (j.contains("weights")) cfg.weights = parse_weights(j.at("weights"));
  if (j.contains("output_dir")) {
    cfg.output_dir = j.at("output_dir").get<std::string>();
    if (cfg.output_dir.is_relative() && !base_dir.empty()) cfg.output_dir = base_dir / cfg.output_dir;
  }
  read(j, "master_seed", cfg.master_seed, w);
  read(j, "workers", cfg.workers, w);
  read(j, "write_history", cfg.write_history, w);
  if (j.contains("crlb")) {
    const json& c = j.at("crlb");
    check_keys(c, {"noise_levels", "trials", "num_samples"}, "crlb");
    read(c, "noise_levels", cfg.crlb.noise_levels, "crlb");
    read(c, "trials", cfg.crlb.trials, "crlb");
    read(c, "num_samples", cfg.crlb.num_samples, "crlb");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

Problem ingest_external(const fs::path& path, const std::vector<std::string>& variables, const std::string& dictionary,
                        const std::string& name) {
  if (!fs::exists(path)) throw std::runtime_error("data file not found: " + path.string());
  const CsvTable t = read_csv(path);
  std::vector<std::string> expected = variables;
  expected.push_back("y");
  for (std::size_t i = 0; i < std::max(expected.size(), t.header.size()); ++i) {
    if (i >= t.header.size()) throw CsvError(path.string() + ": header lacks column '" + expected[i] + "'");
    if (i >= expected.size()) throw CsvError(path.string() + ": unexpected header column '" + t.header[i] + "'");
    if (t.header[i] != expected[i])
      throw CsvError(path.string() + ": header column " + std::to_string(i + 1) + " is '" + t.header[i] +
                     "', expected '" + expected[i] + "'");
  }
  if (t.rows.empty()) throw CsvError(path.string() + ": no data rows");
  const Eigen::Index dims = static_cast<Eigen::Index>(variables.size());
  const Eigen::Index n = static_cast<Eigen::Index>(t.rows.size());
  Problem p;
  p.name = name;
  p.dictionary = parse_dictionary(variables, dictionary);
  p.points.resize(dims, n);
  p.values.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = t.rows[static_cast<std::size_t>(r)];
    const long line = t.lines[static_cast<std::size_t>(r)];
    for (Eigen::Index d = 0; d < dims; ++d)
      p.points(d, r) = parse_number(row[static_cast<std::size_t>(d)], line, t.header[static_cast<std::size_t>(d)]);
    p.values(r) = parse_number(row.back(), line, "y");
    if (!p.points.col(r).allFinite() || !std::isfinite(p.values(r)))
      throw CsvError(path.string() + ": line " + std::to_string(line) + ": non-finite value");
  }
  p.domain = Box::bounding(p.points);
  return p;
}

void write_dataset(const fs::path& path, const std::vector<std::string>& variables, const Dataset& d) {
  std::ofstream out = open_out(path);
  CsvWriter w(out);
  std::vector<std::string> header = variables;
  header.push_back("y");
  w.row(header);
  std::vector<std::string> fields(header.size());
  for (Eigen::Index j = 0; j < d.points.cols(); ++j) {
    for (Eigen::Index i = 0; i < d.points.rows(); ++i) fields[static_cast<std::size_t>(i)] = format_number(d.points(i, j));
    fields.back() = format_number(d.values(j));
    w.row(fields);
  }
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::vector<std::vector<double>> errs;
  for (const ResultRow& r : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const SummaryRow& s) { return s.case_name == r.case_name && s.sigma == r.sigma; });
    if (it == out.end()) {
      out.push_back({r.case_name, r.sigma, 0, 0.0, 0.0});
      errs.emplace_back();
      it = out.end() - 1;
    }
    if (r.status == "ok" && r.err) errs[static_cast<std::size_t>(it - out.begin())].push_back(*r.err);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& e = errs[i];
    out[i].count = static_cast<int>(e.size());
    if (e.empty()) {
      out[i].mean_err = out[i].std_err = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(e.size());
    double ss = 0.0;
    for (double v : e) ss += (v - mean) * (v - mean);
    out[i].mean_err = mean;
    out[i].std_err = e.size() > 1 ? std::sqrt(ss / static_cast<double>(e.size() - 1)) : 0.0;
  }
  return out;
}

namespace {

struct Job {
  const CaseEntry* entry;
  double sigma;
  int trial;
};

// Catalog cases are built once and shared read-only between workers.
struct PreparedCase {
  std::optional<EquationCase> catalog;
  std::optional<Problem> data;
};

ResultRow run_job(const Job& job, const PreparedCase& prepared, const ExperimentConfig& cfg,
                  std::vector<EpochRecord>* history) {
  ResultRow row;
  row.case_name = job.entry->name;
  row.sigma = job.sigma;
  row.trial = job.trial;
  row.seed = trial_seed(cfg.master_seed, job.entry->name, job.sigma, job.trial);
  const auto start = std::chrono::steady_clock::now();
  try {
    TrainConfig tc = cfg.train;
    tc.seed = row.seed;
    Problem problem;
    if (prepared.catalog) {
      problem = make_problem(*prepared.catalog, tc.num_samples, job.sigma, row.seed);
    } else {
      problem = *prepared.data;
    }
    row.terms = problem.dictionary.labels();
    TrainResult r = train(problem, tc, cfg.weights);
    row.phi = r.phi;
    row.sigma_min = r.sigma_min;
    row.gap = r.gap;
    row.epochs = static_cast<int>(r.history.size());
    if (problem.phi_star) row.err = recovery_error(r.phi, *problem.phi_star);
    if (history) *history = std::move(r.history);
  } catch (const std::exception& e) {
    row.status = "aborted";
    row.message = e.what();
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

void write_history(const fs::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream out = open_out(path);
  CsvWriter w(out);
  w.row({"epoch", "L_u", "L_d", "total", "err"});
  for (const EpochRecord& e : history)
    w.row({std::to_string(e.epoch), format_number(e.loss_u), format_number(e.loss_d), format_number(e.total),
           std::isnan(e.err) ? "n/a" : format_number(e.err)});
}

}  // namespace

MatrixReport run_matrix(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  if (cfg.write_history) fs::create_directories(cfg.output_dir / "history");

  std::vector<PreparedCase> prepared(cfg.cases.size());
  std::size_t max_terms = 0;
  for (std::size_t i = 0; i < cfg.cases.size(); ++i) {
    const CaseEntry& c = cfg.cases[i];
    if (c.data) {
      prepared[i].data = ingest_external(c.data->data, c.data->variables, c.data->dictionary, c.name);
      max_terms = std::max(max_terms, prepared[i].data->dictionary.size());
    } else {
      prepared[i].catalog = make_case(c.name);
      max_terms = std::max(max_terms, prepared[i].catalog->dictionary.size());
    }
  }

  std::vector<Job> jobs;
  std::vector<std::size_t> job_case;
  // User data already carries its own noise, so it runs once per trial at
  // sigma = 0 rather than across the noise levels.
  const std::vector<double> no_added_noise{0.0};
  for (std::size_t i = 0; i < cfg.cases.size(); ++i)
    for (double sigma : cfg.cases[i].data ? no_added_noise : cfg.noise_levels)
      for (int t = 0; t < cfg.trials; ++t) {
        jobs.push_back({&cfg.cases[i], sigma, t});
        job_case.push_back(i);
      }

  std::ofstream results = open_out(cfg.output_dir / "results.csv");
  std::ofstream timings = open_out(cfg.output_dir / "timings.csv");
  CsvWriter results_csv(results), timings_csv(timings);
  {
    std::vector<std::string> header{"case", "sigma", "trial", "seed", "status", "err", "sigma_min", "gap", "epochs"};
    for (std::size_t k = 0; k < max_terms; ++k) header.push_back("phi_" + std::to_string(k));
    header.push_back("terms");
    header.push_back("message");
    results_csv.row(header);
    timings_csv.row({"case", "sigma", "trial", "seconds"});
  }

  MatrixReport report;
  report.rows.resize(jobs.size());
  std::vector<bool> done(jobs.size(), false);
  std::size_t next_to_write = 0;
  std::mutex mu;

  // Single collector: rows are written in job order as soon as every earlier
  // job has finished.
  auto emit_ready = [&] {
    while (next_to_write < jobs.size() && done[next_to_write]) {
      const ResultRow& r = report.rows[next_to_write];
      std::vector<std::string> f{r.case_name,
                                 format_number(r.sigma),
                                 std::to_string(r.trial),
                                 std::to_string(r.seed),
                                 r.status,
                                 r.err ? format_number(*r.err) : "n/a",
                                 r.status == "ok" ? format_number(r.sigma_min) : "",
                                 r.status == "ok" ? format_number(r.gap) : "",
                                 std::to_string(r.epochs)};
      for (std::size_t k = 0; k < max_terms; ++k)
        f.push_back(static_cast<Eigen::Index>(k) < r.phi.size() ? format_number(r.phi(static_cast<Eigen::Index>(k)))
                                                                : "");
      std::string terms;
      for (std::size_t k = 0; k < r.terms.size(); ++k) terms += (k ? ";" : "") + r.terms[k];
      f.push_back(terms);
      f.push_back(r.message);
      results_csv.row(f);
      results.flush();
      timings_csv.row({r.case_name, format_number(r.sigma), std::to_string(r.trial), format_number(r.seconds)});
      timings.flush();
      if (r.status != "ok")
        std::clog << "[run] " << r.case_name << " sigma=" << r.sigma << " trial " << r.trial
                  << " aborted: " << r.message << "\n";
      else
        std::clog << "[run] " << r.case_name << " sigma=" << r.sigma << " trial " << r.trial
                  << " err=" << (r.err ? format_number(*r.err) : "n/a") << " (" << r.seconds << " s)\n";
      ++next_to_write;
    }
  };

  std::atomic<std::size_t> next_job{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next_job.fetch_add(1);
      if (i >= jobs.size()) return;
      std::vector<EpochRecord> history;
      ResultRow row = run_job(jobs[i], prepared[job_case[i]], cfg, cfg.write_history ? &history : nullptr);
      if (cfg.write_history && row.status == "ok") {
        const fs::path p = cfg.output_dir / "history" /
                           (row.case_name + "_s" + sigma_tag(row.sigma) + "_t" + std::to_string(row.trial) + ".csv");
        write_history(p, history);
      }
      std::lock_guard lock(mu);
      report.rows[i] = std::move(row);
      done[i] = true;
      emit_ready();
    }
  };
  const int n_workers = std::min<int>(cfg.workers, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_workers; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const ResultRow& r : report.rows)
    if (r.status != "ok") ++report.aborted;

  std::ofstream summary = open_out(cfg.output_dir / "summary.csv");
  CsvWriter summary_csv(summary);
  summary_csv.row({"case", "sigma", "trials", "mean_err", "std_err"});
  for (const SummaryRow& s : summarize(report.rows))
    summary_csv.row({s.case_name, format_number(s.sigma), std::to_string(s.count),
                     s.count ? format_number(s.mean_err) : "n/a", s.count ? format_number(s.std_err) : "n/a"});
  return report;
}

OdeExperiment run_crlb_plot(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  const OdeExperiment ex = ode_experiment(cfg.crlb.noise_levels, cfg.crlb.trials, cfg.crlb.num_samples,
                                          cfg.master_seed, cfg.train, cfg.weights);
  {
    std::ofstream out = open_out(cfg.output_dir / "crlb.csv");
    CsvWriter w(out);
    w.row({"sigma", "trial", "a_hat", "squared_error", "mse", "crlb", "status"});
    for (const OdeTrial& t : ex.trials) {
      const auto level = std::find_if(ex.levels.begin(), ex.levels.end(),
                                      [&](const OdeLevel& l) { return l.sigma == t.sigma; });
      w.row({format_number(t.sigma), std::to_string(t.trial), t.degenerate ? "n/a" : format_number(t.a_hat),
             t.degenerate ? "n/a" : format_number(t.squared_error), format_number(level->mse),
             format_number(level->crlb), t.degenerate ? "degenerate" : "ok"});
    }
  }
  std::ofstream svg = open_out(cfg.output_dir / "crlb.svg");
  svg << render_crlb_svg(ex);
  return ex;
}

std::string render_crlb_svg(const OdeExperiment& ex) {
  const double width = 640, height = 420, left = 80, right = 160, top = 40, bottom = 60;
  std::vector<std::pair<double, double>> mse, bound;
  for (const OdeLevel& l : ex.levels) {
    if (!(l.sigma > 0.0)) continue;
    if (std::isfinite(l.mse) && l.mse > 0.0) mse.emplace_back(l.sigma, l.mse);
    if (l.crlb > 0.0) bound.emplace_back(l.sigma, l.crlb);
  }
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto* series : {&mse, &bound})
    for (auto [x, y] : *series) {
      x0 = std::min(x0, std::log10(x));
      x1 = std::max(x1, std::log10(x));
      y0 = std::min(y0, std::log10(y));
      y1 = std::max(y1, std::log10(y));
    }
  if (x0 > x1) x0 = -2, x1 = 0, y0 = -6, y1 = 0;
  x0 = std::floor(x0), x1 = std::ceil(x1), y0 = std::floor(y0), y1 = std::ceil(y1);
  if (x1 == x0) x1 += 1;
  if (y1 == y0) y1 += 1;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (std::log10(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - std::log10(y)) / (y1 - y0) * ph; };

  std::ostringstream s;
  s.precision(6);
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
    << "Growth-rate MSE vs Cramer-Rao bound</text>\n"
    << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(x0); e <= static_cast<int>(x1); ++e) {
    const double x = px(std::pow(10.0, e));
    s << "<line x1=\"" << x << "\" y1=\"" << top + ph << "\" x2=\"" << x << "\" y2=\"" << top + ph + 5
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << x << "\" y=\"" << top + ph + 20 << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  for (int e = static_cast<int>(y0); e <= static_cast<int>(y1); ++e) {
    const double y = py(std::pow(10.0, e));
    s << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">noise sigma</text>\n"
    << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << top + ph / 2
    << ")\">MSE of a_hat</text>\n";
  auto polyline = [&](const std::vector<std::pair<double, double>>& pts, const char* id, const char* color,
                      const char* dash) {
    s << "<polyline id=\"" << id << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash
      << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) s << (i ? " " : "") << px(pts[i].first) << ',' << py(pts[i].second);
    s << "\"/>\n";
    for (auto [x, y] : pts)
      s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
  };
  polyline(mse, "empirical", "#1f77b4", "");
  polyline(bound, "crlb", "#d62728", " stroke-dasharray=\"6 4\"");
  const double lx = left + pw + 15;
  s << "<line x1=\"" << lx << "\" y1=\"" << top + 10 << "\" x2=\"" << lx + 25 << "\" y2=\"" << top + 10
    << "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n"
    << "<text x=\"" << lx + 30 << "\" y=\"" << top + 14 << "\">empirical MSE</text>\n"
    << "<line x1=\"" << lx << "\" y1=\"" << top + 30 << "\" x2=\"" << lx + 25 << "\" y2=\"" << top + 30
    << "\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n"
    << "<text x=\"" << lx + 30 << "\" y=\"" << top + 34 << "\">CRLB</text>\n"
    << "</svg>\n";
  return s.str();
}

}  // namespace pdenet
