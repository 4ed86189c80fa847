// Command-line front end over the pprobit C API.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pprobit/pprobit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int code;
  std::string message;
};

int exit_code(pprobit_status s) {
  return s == PPROBIT_E_NUMERIC || s == PPROBIT_E_RANK_DEFICIENT ? kExitNumeric : kExitUsage;
}

void check(pprobit_status s, const std::string& context) {
  if (s == PPROBIT_OK) return;
  std::string msg = context + ": " + pprobit_last_error();
  if (s == PPROBIT_E_RANK_DEFICIENT) msg += " (try dropping collinear or constant columns)";
  throw Failure{exit_code(s), msg};
}

struct DatasetDeleter {
  void operator()(pprobit_dataset* d) const { pprobit_dataset_free(d); }
};
struct CoresetDeleter {
  void operator()(pprobit_coreset* c) const { pprobit_coreset_free(c); }
};
using DatasetPtr = std::unique_ptr<pprobit_dataset, DatasetDeleter>;
using CoresetPtr = std::unique_ptr<pprobit_coreset, CoresetDeleter>;

struct DataArgs {
  std::string path;
  std::string format = "csv";
  bool header = false;
  long label_column = -1;
  std::size_t dim = 0;
  bool intercept = false;
  bool scale = false;

  void attach(CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--data", path, "input file (CSV or LIBSVM)");
    if (required) opt->required();
    cmd->add_option("--format", format, "input format")->check(CLI::IsMember({"csv", "libsvm"}));
    cmd->add_flag("--header", header, "CSV has a header line");
    cmd->add_option("--label-column", label_column, "CSV label column, negative counts from the end");
    cmd->add_option("--dim", dim, "LIBSVM feature count (enables streaming)");
    cmd->add_flag("--intercept", intercept, "prepend a constant feature");
    cmd->add_flag("--scale-features", scale, "scale columns to unit max-abs");
  }

  pprobit_load_options options() const {
    pprobit_load_options o;
    pprobit_load_options_init(&o);
    o.format = format == "libsvm" ? PPROBIT_FORMAT_LIBSVM : PPROBIT_FORMAT_CSV;
    o.has_header = header;
    o.label_column = label_column;
    o.libsvm_dim = dim;
    o.add_intercept = intercept;
    o.scale_features = scale;
    return o;
  }

  DatasetPtr load() const {
    const pprobit_load_options o = options();
    pprobit_dataset* ds = nullptr;
    check(pprobit_dataset_load(path.c_str(), &o, &ds), "cannot load '" + path + "'");
    return DatasetPtr(ds);
  }
};

struct SolverArgs {
  std::string method = "newton";
  std::size_t max_iter = 0;
  double tol = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--solver", method, "newton or gd")->check(CLI::IsMember({"newton", "gd"}));
    cmd->add_option("--max-iter", max_iter, "iteration cap (0 = default)");
    cmd->add_option("--tol", tol, "gradient-norm tolerance (0 = default)");
  }

  pprobit_fit_options options() const {
    pprobit_fit_options o;
    pprobit_fit_options_init(&o);
    o.method = method == "gd" ? PPROBIT_SOLVER_GRADIENT : PPROBIT_SOLVER_NEWTON;
    o.max_iter = max_iter;
    o.grad_tol = tol;
    return o;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure{kExitUsage, "cannot write '" + path + "'"};
}

std::string format_vector(const std::vector<double>& v) {
  std::string s = "[";
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s%.10g", i ? ", " : "", v[i]);
    s += buf;
  }
  return s + "]";
}

int cmd_fit(const DataArgs& data, const SolverArgs& solver, double p, const std::string& out) {
  const DatasetPtr ds = data.load();
  const std::size_t d = pprobit_dataset_cols(ds.get());
  std::vector<double> beta(d);
  pprobit_fit_summary s{};
  const pprobit_fit_options o = solver.options();
  check(pprobit_fit(ds.get(), p, &o, beta.data(), beta.size(), &s), "fit failed");

  std::printf("beta = %s\n", format_vector(beta).c_str());
  std::printf("loss = %.12g\niterations = %zu\nconverged = %s\ngradient_norm = %.3g\n", s.loss,
              s.iterations, s.converged ? "true" : "false", s.gradient_norm);
  if (s.mle_may_not_exist)
    std::fprintf(stderr, "warning: the loss keeps decreasing along a direction; the MLE may not exist\n");
  if (!out.empty()) {
    nlohmann::ordered_json j;
    j["p"] = p;
    j["beta"] = beta;
    j["loss"] = s.loss;
    j["iterations"] = s.iterations;
    j["converged"] = s.converged != 0;
    j["gradient_norm"] = s.gradient_norm;
    j["mle_may_not_exist"] = s.mle_may_not_exist != 0;
    j["rows"] = pprobit_dataset_rows(ds.get());
    j["cols"] = d;
    j["label_mapping"] = pprobit_dataset_label_mapping(ds.get());
    write_text(out, j.dump(2) + "\n");
  }
  if (!s.converged) {
    std::fprintf(stderr, "error: solver did not converge\n");
    return kExitNumeric;
  }
  return kExitOk;
}

struct CoresetArgs {
  std::string method = "pprobit";
  double p = 2.0;
  std::size_t k = 0;
  std::uint64_t seed = 1;
  bool rounding = false;
  bool no_jl = false;
  bool in_memory = false;
  std::string out;
  std::string json;
  bool fit = false;
};

int cmd_coreset(const DataArgs& data, const CoresetArgs& a, const SolverArgs& solver) {
  pprobit_coreset_options o;
  pprobit_coreset_options_init(&o);
  check(pprobit_method_from_string(a.method.c_str(), &o.method), "bad --method");
  if (o.method == PPROBIT_METHOD_ONLINE_L2 && a.p != 2.0)
    throw Failure{kExitUsage, "online-l2 requires --p 2"};
  o.p = a.p;
  o.k = a.k;
  o.seed = a.seed;
  o.rounding = a.rounding;
  o.use_jl = !a.no_jl;

  pprobit_coreset* raw = nullptr;
  if (a.in_memory) {
    const DatasetPtr ds = data.load();
    check(pprobit_coreset_build(ds.get(), &o, &raw), "coreset construction failed");
  } else {
    const pprobit_load_options lo = data.options();
    check(pprobit_coreset_build_from_file(data.path.c_str(), &lo, &o, &raw), "coreset construction failed");
  }
  const CoresetPtr c(raw);
  pprobit_stream_stats st{};
  check(pprobit_coreset_stats(c.get(), &st), "stats");
  if (st.k_clamped)
    std::fprintf(stderr, "warning: k = %zu is not smaller than n = %zu; the coreset is the full data\n",
                 a.k, st.rows);

  const std::string json = a.json.empty() ? a.out + ".json" : a.json;
  check(pprobit_coreset_write(c.get(), a.out.c_str(), json.c_str()), "cannot write the coreset");
  std::printf("method = %s\nrows = %zu\ncoreset size = %zu\nsketch rows = %zu\npasses = %zu\n",
              pprobit_coreset_tag(c.get()), st.rows, pprobit_coreset_size(c.get()), st.sketch_rows,
              st.passes);
  std::printf("state bytes = %zu (budget %zu)\nfirst pass = %.1f ms\nsampling = %.1f ms\n",
              st.state_bytes, st.budget_bytes, st.t_sketch_ms, st.t_sample_ms);

  if (a.fit) {
    std::vector<double> beta(pprobit_coreset_cols(c.get()));
    pprobit_fit_summary s{};
    const pprobit_fit_options fo = solver.options();
    check(pprobit_coreset_fit(c.get(), &fo, beta.data(), beta.size(), &s), "fit failed");
    std::printf("beta = %s\nloss = %.12g\nconverged = %s\n", format_vector(beta).c_str(), s.loss,
                s.converged ? "true" : "false");
    if (!s.converged) return kExitNumeric;
  }
  return kExitOk;
}

struct ExperimentArgs {
  std::string p_list;
  std::string methods;
  std::string k_list;
  std::size_t trials = 21;
  std::uint64_t seed = 1;
  bool rounding = false;
  unsigned threads = 0;
  std::string out = "experiment";
  std::string name;
  bool no_timings = false;
  // synthetic input when --data is absent
  std::size_t n = 50000;
  std::size_t d = 10;
  double outliers = 0.05;
  double outlier_scale = 10.0;
  double separation = 2.0;
  std::uint64_t data_seed = 1;
};

int cmd_experiment(const DataArgs& data, const ExperimentArgs& a) {
  DatasetPtr ds;
  std::string name = a.name;
  if (!data.path.empty()) {
    ds = data.load();
    if (name.empty()) name = data.path;
  } else {
    pprobit_synthetic_spec spec;
    pprobit_synthetic_spec_init(&spec);
    spec.n = a.n;
    spec.d = a.d;
    spec.seed = a.data_seed;
    spec.outlier_fraction = a.outliers;
    spec.outlier_scale = a.outlier_scale;
    spec.target_separation = a.separation;
    pprobit_dataset* raw = nullptr;
    check(pprobit_dataset_synthesize(&spec, &raw), "synthetic data");
    ds.reset(raw);
    check(pprobit_dataset_prepare(ds.get(), data.intercept, data.scale), "prepare");
    if (name.empty()) name = "synthetic";
  }

  std::vector<double> ps;
  for (const auto& s : split_list(a.p_list)) ps.push_back(std::stod(s));
  std::vector<pprobit_method> methods;
  for (const auto& s : split_list(a.methods)) {
    pprobit_method m;
    check(pprobit_method_from_string(s.c_str(), &m), "bad --methods");
    methods.push_back(m);
  }
  std::vector<std::size_t> ks;
  for (const auto& s : split_list(a.k_list)) ks.push_back(std::stoul(s));

  pprobit_experiment_options o;
  pprobit_experiment_options_init(&o);
  o.dataset_name = name.c_str();
  if (!ps.empty()) {
    o.p_values = ps.data();
    o.num_p = ps.size();
  }
  if (!methods.empty()) {
    o.methods = methods.data();
    o.num_methods = methods.size();
  }
  if (!ks.empty()) {
    o.k_grid = ks.data();
    o.num_k = ks.size();
  }
  o.trials = a.trials;
  o.seed = a.seed;
  o.rounding = a.rounding;
  o.threads = a.threads;
  o.omit_timings = a.no_timings;

  const std::string records = a.out + ".jsonl";
  const std::string summary = a.out + "_summary.csv";
  char* report = nullptr;
  check(pprobit_experiment_run(ds.get(), &o, records.c_str(), summary.c_str(), &report), "experiment failed");
  const auto j = nlohmann::json::parse(report);
  pprobit_string_free(report);

  int code = kExitOk;
  for (const auto& f : j["full_fits"]) {
    if (!f["converged"].get<bool>()) {
      std::fprintf(stderr, "error: p = %g skipped: %s\n", f["p"].get<double>(),
                   f["diagnostic"].get<std::string>().c_str());
      code = kExitNumeric;
    }
  }
  std::printf("%-6s %-10s %8s %12s %10s\n", "p", "method", "k", "median", "niqr");
  for (const auto& s : j["summary"])
    std::printf("%-6g %-10s %8zu %12.6f %10.4f\n", s["p"].get<double>(),
                s["method"].get<std::string>().c_str(), s["k"].get<std::size_t>(),
                s["median_ratio"].get<double>(), s["niqr"].get<double>());
  std::printf("records: %s\nsummary: %s\n", records.c_str(), summary.c_str());
  return code;
}

int cmd_mu(const DataArgs& data, double p, std::size_t directions, std::uint64_t seed) {
  const DatasetPtr ds = data.load();
  std::vector<double> dir(pprobit_dataset_cols(ds.get()));
  pprobit_mu_result r{};
  check(pprobit_estimate_mu(ds.get(), p, directions, seed, dir.data(), dir.size(), &r), "mu estimate failed");
  if (r.unbounded) {
    std::printf("mu lower bound = inf\n");
    std::printf("unbounded along direction %s: the data are separable there and the MLE does not exist\n",
                format_vector(dir).c_str());
  } else {
    std::printf("mu lower bound = %.10g\ndirection = %s\n", r.mu_lower, format_vector(dir).c_str());
  }
  std::printf("directions tried = %zu\n", r.directions_tried);
  return kExitOk;
}

int cmd_synth(const ExperimentArgs& a, const std::string& out, bool header) {
  pprobit_synthetic_spec spec;
  pprobit_synthetic_spec_init(&spec);
  spec.n = a.n;
  spec.d = a.d;
  spec.seed = a.data_seed;
  spec.outlier_fraction = a.outliers;
  spec.outlier_scale = a.outlier_scale;
  spec.target_separation = a.separation;
  pprobit_dataset* raw = nullptr;
  check(pprobit_dataset_synthesize(&spec, &raw), "synthetic data");
  const DatasetPtr ds(raw);
  check(pprobit_dataset_write_csv(ds.get(), out.c_str(), header), "cannot write '" + out + "'");
  std::printf("wrote %zu rows x %zu features to %s\n", pprobit_dataset_rows(ds.get()),
              pprobit_dataset_cols(ds.get()), out.c_str());
  return kExitOk;
}

void add_synth_options(CLI::App* cmd, ExperimentArgs& a) {
  cmd->add_option("--n", a.n, "rows");
  cmd->add_option("--d", a.d, "features");
  cmd->add_option("--outlier-fraction", a.outliers, "fraction of displaced label-1 points");
  cmd->add_option("--outlier-scale", a.outlier_scale, "outlier displacement factor");
  cmd->add_option("--separation", a.separation, "distance between class centres");
  cmd->add_option("--data-seed", a.data_seed, "generator seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-generalized probit regression with coreset reduction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pprobit_version());

  DataArgs data;
  SolverArgs solver;
  double p = 2.0;
  std::string out;

  auto* fit = app.add_subcommand("fit", "fit the model on the full data");
  data.attach(fit);
  solver.attach(fit);
  fit->add_option("--p", p, "shape parameter p >= 1");
  fit->add_option("--out", out, "write the result as JSON");

  CoresetArgs ca;
  auto* coreset = app.add_subcommand("coreset", "build a weighted coreset");
  data.attach(coreset);
  solver.attach(coreset);
  coreset->add_option("--method", ca.method, "pprobit, uniform, l2, sqrt-l2 or online-l2");
  coreset->add_option("--p", ca.p, "shape parameter p >= 1");
  coreset->add_option("--k", ca.k, "coreset size")->required();
  coreset->add_option("--seed", ca.seed, "random seed");
  coreset->add_flag("--rounding", ca.rounding, "round scores up to powers of two");
  coreset->add_flag("--no-jl", ca.no_jl, "skip the Gaussian compression for p = 2");
  coreset->add_flag("--in-memory", ca.in_memory, "load the file instead of streaming it");
  coreset->add_flag("--fit", ca.fit, "also fit the model on the coreset");
  coreset->add_option("--out", ca.out, "coreset CSV (weight, x1..xd)")->required();
  coreset->add_option("--json", ca.json, "metadata file (default: <out>.json)");

  ExperimentArgs ea;
  auto* experiment = app.add_subcommand("experiment", "approximation-ratio sweep");
  data.attach(experiment, false);
  add_synth_options(experiment, ea);
  experiment->add_option("--p", ea.p_list, "comma-separated p values (default 1,1.5,2,3,5)");
  experiment->add_option("--method", ea.methods, "comma-separated methods (default all)");
  experiment->add_option("--k", ea.k_list, "comma-separated sizes (default geometric 5d..n/10)");
  experiment->add_option("--trials", ea.trials, "trials per (p, method, k)");
  experiment->add_option("--seed", ea.seed, "master seed");
  experiment->add_flag("--rounding", ea.rounding, "round scores up to powers of two");
  experiment->add_option("--threads", ea.threads, "worker threads (0 = default)");
  experiment->add_option("--name", ea.name, "dataset label in the records");
  experiment->add_flag("--no-timings", ea.no_timings, "omit timings from the records");
  experiment->add_option("--out", ea.out, "output prefix for .jsonl and _summary.csv");

  std::size_t directions = 1000;
  std::uint64_t mu_seed = 1;
  auto* mu = app.add_subcommand("mu", "sampled lower bound on the complexity parameter mu");
  data.attach(mu);
  mu->add_option("--p", p, "shape parameter p >= 1");
  mu->add_option("--directions", directions, "random directions to try");
  mu->add_option("--seed", mu_seed, "random seed");

  ExperimentArgs sa;
  bool header = false;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset as CSV");
  add_synth_options(synth, sa);
  synth->add_option("--seed", sa.data_seed, "generator seed");
  synth->add_option("--out", out, "output CSV")->required();
  synth->add_flag("--header", header, "write a header line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit) return cmd_fit(data, solver, p, out);
    if (*coreset) return cmd_coreset(data, ca, solver);
    if (*experiment) return cmd_experiment(data, ea);
    if (*mu) return cmd_mu(data, p, directions, mu_seed);
    if (*synth) return cmd_synth(sa, out, header);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
