#include "core/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <tuple>

#include "json.hpp"

#include "core/error.hpp"
#include "core/objective.hpp"
#include "core/parallel.hpp"
#include "core/random.hpp"

namespace pprobit {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t hash_bytes(std::uint64_t h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& c) {
  const SolverConfig s = c.solver;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const int method = static_cast<int>(s.method);
  h = hash_bytes(h, &method, sizeof(method));
  h = hash_bytes(h, &s.max_iter, sizeof(s.max_iter));
  h = hash_bytes(h, &s.grad_tol, sizeof(s.grad_tol));
  h = hash_bytes(h, &s.damping_init, sizeof(s.damping_init));
  h = hash_bytes(h, &s.shrink, sizeof(s.shrink));
  h = hash_bytes(h, &s.sufficient_decrease, sizeof(s.sufficient_decrease));
  const char rounding = c.rounding ? 1 : 0;
  h = hash_bytes(h, &rounding, 1);
  return hex64(h);
}

struct Task {
  std::size_t fit;  // index into the converged full fits
  CoresetMethod method;
  std::size_t k;
  std::size_t trial;
};

}  // namespace

std::vector<std::size_t> default_k_grid(std::size_t n, std::size_t d) {
  const double lo = static_cast<double>(5 * d);
  const double hi = std::max(lo, static_cast<double>(n) / 10.0);
  std::vector<std::size_t> grid;
  constexpr int kPoints = 6;
  for (int i = 0; i < kPoints; ++i) {
    const double v = lo * std::pow(hi / lo, static_cast<double>(i) / (kPoints - 1));
    const auto k = static_cast<std::size_t>(std::llround(v));
    if (grid.empty() || k > grid.back()) grid.push_back(k);
  }
  return grid;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) {
  return rng::key(master_seed, rng::kTrial, trial);
}

std::string data_fingerprint(const RowMatrix& x) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::int64_t shape[2] = {x.rows(), x.cols()};
  h = hash_bytes(h, shape, sizeof(shape));
  h = hash_bytes(h, x.data(), static_cast<std::size_t>(x.size()) * sizeof(double));
  return hex64(h);
}

ExperimentResult run_experiment(const RowMatrix& x, const ExperimentConfig& config) {
  if (x.rows() == 0 || x.cols() == 0) fail(ErrorCode::InvalidArgument, "the input has no rows");
  if (config.trials == 0) fail(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (config.p_values.empty() || config.methods.empty())
    fail(ErrorCode::InvalidArgument, "the experiment grid is empty");
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  const unsigned threads = config.threads ? config.threads : default_threads();
  const std::vector<std::size_t> k_grid = config.k_grid.empty() ? default_k_grid(n, d) : config.k_grid;
  for (const auto k : k_grid)
    if (k == 0) fail(ErrorCode::InvalidArgument, "k values must be >= 1");
  const std::string chash = config_hash(config);
  const std::string dhash = data_fingerprint(x);

  ExperimentResult result;
  std::vector<FitResult> full;  // parallel to the converged entries of full_fits
  std::vector<std::size_t> full_index;
  for (const double p : config.p_values) {
    const Shape shape(p);
    FullFitInfo info;
    info.p = p;
    const auto t0 = Clock::now();
    FitResult f = fit(x, Vector(), shape, config.solver);
    info.t_solve_ms = ms_since(t0);
    info.objective = f.final_loss;
    info.iterations = f.iterations;
    info.converged = f.converged;
    if (!f.converged) {
      info.diagnostic = "full-data fit did not converge";
      if (!f.diagnostic.empty()) info.diagnostic += ": " + f.diagnostic;
    }
    result.full_fits.push_back(info);
    if (f.converged) {
      full.push_back(std::move(f));
      full_index.push_back(result.full_fits.size() - 1);
    }
  }

  std::vector<Task> tasks;
  for (std::size_t fi = 0; fi < full.size(); ++fi) {
    const double p = result.full_fits[full_index[fi]].p;
    for (const auto m : config.methods) {
      if (m == CoresetMethod::OnlineL2 && p != 2.0) continue;
      for (const auto k : k_grid)
        for (std::size_t t = 0; t < config.trials; ++t) tasks.push_back({fi, m, k, t});
    }
  }

  std::vector<ExperimentRecord> records(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const Task& task = tasks[i];
    const FitResult& ref = full[task.fit];
    const double p = result.full_fits[full_index[task.fit]].p;
    const Shape shape(p);
    ExperimentRecord& r = records[i];
    r.dataset = config.dataset;
    r.p = p;
    r.method = method_name(task.method);
    r.k = task.k;
    r.trial = task.trial;
    r.trial_seed = trial_seed(config.seed, task.trial);
    r.config_hash = chash;
    r.data_hash = dhash;

    CoresetOptions opt;
    opt.method = task.method;
    opt.p = p;
    opt.k = task.k;
    opt.seed = r.trial_seed;
    opt.rounding = config.rounding;
    const auto t0 = Clock::now();
    const CoresetResult c = build_coreset(x, opt);
    r.t_reduce_ms = ms_since(t0);
    r.t_sketch_ms = c.stats.t_sketch_ms;
    r.t_sample_ms = c.stats.t_sample_ms;

    const auto t1 = Clock::now();
    const FitResult f = fit(c.coreset.rows, c.coreset.weights, shape, config.solver);
    r.t_solve_ms = ms_since(t1);
    r.solver_converged = f.converged;
    r.solver_iterations = f.iterations;
    const SolverConfig used = resolve_config(config.solver, c.coreset.weights.sum());
    r.solver_method = used.method == SolverMethod::Newton ? "newton" : "gd";
    r.solver_max_iter = used.max_iter;
    r.solver_grad_tol = used.grad_tol;
    r.full_objective = ref.final_loss;
    r.coreset_objective = loss(x, Vector(), f.beta, shape);
    r.raw_ratio = r.coreset_objective / r.full_objective;
    r.ratio = r.raw_ratio < 1.0 && r.raw_ratio >= 1.0 - 1e-6 ? 1.0 : r.raw_ratio;
  });
  result.records = std::move(records);
  result.summary = summarize(result.records);
  return result;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) fail(ErrorCode::InvalidArgument, "quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
  struct Group {
    std::vector<double> ratio, reduce, solve;
  };
  // Keyed by first appearance so the summary follows record order.
  std::vector<std::tuple<double, std::string, std::size_t>> order;
  std::map<std::tuple<double, std::string, std::size_t>, Group> groups;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.p, r.method, r.k);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.ratio.push_back(r.ratio);
    it->second.reduce.push_back(r.t_reduce_ms);
    it->second.solve.push_back(r.t_solve_ms);
  }
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const Group& g = groups.at(key);
    SummaryRow s;
    std::tie(s.p, s.method, s.k) = key;
    s.trials = g.ratio.size();
    s.median = quantile(g.ratio, 0.5);
    s.q1 = quantile(g.ratio, 0.25);
    s.q3 = quantile(g.ratio, 0.75);
    s.niqr = (s.q3 - s.q1) / s.median;
    s.median_t_reduce_ms = quantile(g.reduce, 0.5);
    s.median_t_solve_ms = quantile(g.solve, 0.5);
    out.push_back(s);
  }
  return out;
}

std::string record_to_json(const ExperimentRecord& r, bool with_timings) {
  nlohmann::ordered_json j;
  j["dataset"] = r.dataset;
  j["p"] = r.p;
  j["method"] = r.method;
  j["k"] = r.k;
  j["trial"] = r.trial;
  j["trial_seed"] = r.trial_seed;
  j["ratio"] = r.ratio;
  j["raw_ratio"] = r.raw_ratio;
  j["coreset_objective"] = r.coreset_objective;
  j["full_objective"] = r.full_objective;
  if (with_timings) {
    j["t_sketch_ms"] = r.t_sketch_ms;
    j["t_sample_ms"] = r.t_sample_ms;
    j["t_reduce_ms"] = r.t_reduce_ms;
    j["t_solve_ms"] = r.t_solve_ms;
  }
  j["solver_converged"] = r.solver_converged;
  j["solver_iterations"] = r.solver_iterations;
  j["solver"] = r.solver_method;
  j["solver_max_iter"] = r.solver_max_iter;
  j["solver_grad_tol"] = r.solver_grad_tol;
  j["config_hash"] = r.config_hash;
  j["data_hash"] = r.data_hash;
  return j.dump();
}

void write_records(const std::vector<ExperimentRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  for (const auto& r : records) out << record_to_json(r) << '\n';
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  out << "p,method,k,trials,median_ratio,q1,q3,niqr,median_t_reduce_ms,median_t_solve_ms\n";
  char buf[512];
  for (const auto& s : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%s,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.6g,%.6g\n", s.p,
                  s.method.c_str(), s.k, s.trials, s.median, s.q1, s.q3, s.niqr,
                  s.median_t_reduce_ms, s.median_t_solve_ms);
    out << buf;
  }
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace pprobit
