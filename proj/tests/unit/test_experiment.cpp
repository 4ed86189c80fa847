#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "core/data_io.hpp"
#include "core/experiment.hpp"

using namespace pprobit;
namespace fs = std::filesystem;

namespace {

RowMatrix small_data() {
  SyntheticSpec spec;
  spec.n = 4000;
  spec.d = 3;
  spec.seed = 2;
  spec.outlier_fraction = 0.01;
  return fold_labels(make_synthetic(spec), true);
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.dataset = "unit";
  c.p_values = {1.0, 2.0};
  c.k_grid = {60, 400};
  c.trials = 5;
  c.seed = 3;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("quantiles interpolate linearly") {
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == 2.5);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == 1.75);
  CHECK(quantile({7.0}, 0.75) == 7.0);
  CHECK(quantile({1.0, 9.0}, 0.0) == 1.0);
  CHECK(quantile({1.0, 9.0}, 1.0) == 9.0);
}

TEST_CASE("default size grid") {
  const auto g = default_k_grid(50000, 10);
  CHECK(g.size() == 6);
  CHECK(g.front() == 50);
  CHECK(g.back() == 5000);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  CHECK(g[1] == doctest::Approx(50.0 * std::pow(100.0, 0.2)).epsilon(0.02));
  const auto tiny = default_k_grid(100, 10);
  CHECK(tiny.size() >= 1);
}

TEST_CASE("trial seeds are shared and distinct") {
  CHECK(trial_seed(1, 0) == trial_seed(1, 0));
  CHECK(trial_seed(1, 0) != trial_seed(1, 1));
  CHECK(trial_seed(1, 0) != trial_seed(2, 0));
}

TEST_CASE("summary statistics") {
  std::vector<ExperimentRecord> recs;
  for (int t = 0; t < 5; ++t) {
    ExperimentRecord r;
    r.p = 2.0;
    r.method = "uniform";
    r.k = 10;
    r.trial = static_cast<std::size_t>(t);
    r.ratio = 1.0 + 0.1 * t;
    recs.push_back(r);
  }
  const auto rows = summarize(recs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].trials == 5);
  CHECK(rows[0].median == doctest::Approx(1.2));
  CHECK(rows[0].q1 == doctest::Approx(1.1));
  CHECK(rows[0].q3 == doctest::Approx(1.3));
  CHECK(rows[0].niqr == doctest::Approx(0.2 / 1.2));
}

TEST_CASE("experiment records") {
  const RowMatrix x = small_data();
  const ExperimentConfig cfg = small_config();
  const ExperimentResult res = run_experiment(x, cfg);
  // online-l2 only runs for p = 2.
  CHECK(res.records.size() == (2 * 4 + 1) * 2 * 5);
  CHECK(res.full_fits.size() == 2);
  for (const auto& f : res.full_fits) {
    CHECK(f.converged);
    CHECK(f.diagnostic.empty());
  }
  std::set<std::string> hashes;
  for (const auto& r : res.records) {
    CHECK(r.ratio >= 1.0);
    CHECK(r.raw_ratio > 1.0 - 1e-6);
    CHECK(r.ratio == doctest::Approx(r.coreset_objective / r.full_objective).epsilon(1e-6));
    CHECK(r.trial_seed == trial_seed(cfg.seed, r.trial));
    CHECK(r.dataset == "unit");
    CHECK(r.data_hash == data_fingerprint(x));
    hashes.insert(r.config_hash);
  }
  CHECK(hashes.size() == 1);
  CHECK(res.summary.size() == (2 * 4 + 1) * 2);

  // Larger samples do better for the sensitivity method.
  for (const auto& row : res.summary) {
    if (row.method != "pprobit" || row.k != 60) continue;
    for (const auto& other : res.summary)
      if (other.method == "pprobit" && other.p == row.p && other.k == 400)
        CHECK(other.median <= row.median);
  }
}

TEST_CASE("records do not depend on the thread count") {
  const RowMatrix x = small_data();
  ExperimentConfig cfg = small_config();
  cfg.p_values = {1.5};
  cfg.trials = 3;
  const ExperimentResult one = run_experiment(x, cfg);
  cfg.threads = 4;
  const ExperimentResult four = run_experiment(x, cfg);
  REQUIRE(one.records.size() == four.records.size());
  for (std::size_t i = 0; i < one.records.size(); ++i)
    CHECK(record_to_json(one.records[i], false) == record_to_json(four.records[i], false));
}

TEST_CASE("output files") {
  const RowMatrix x = small_data();
  ExperimentConfig cfg = small_config();
  cfg.p_values = {2.0};
  cfg.methods = {CoresetMethod::Uniform};
  cfg.trials = 2;
  const ExperimentResult res = run_experiment(x, cfg);
  const fs::path dir = fs::temp_directory_path() / "pprobit_unit";
  fs::create_directories(dir);
  write_records(res.records, (dir / "r.jsonl").string());
  write_summary_csv(res.summary, (dir / "s.csv").string());
  std::ifstream in(dir / "r.jsonl");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["method"] == "uniform");
    CHECK(j.contains("t_solve_ms"));
    CHECK(j.contains("trial_seed"));
    CHECK(j["solver"] == "newton");
    CHECK(j["solver_max_iter"] == 100);
    CHECK(j["solver_grad_tol"].get<double>() > 0.0);
    ++n;
  }
  CHECK(n == 4);
  const auto bare = nlohmann::json::parse(record_to_json(res.records[0], false));
  CHECK_FALSE(bare.contains("t_solve_ms"));
  std::ifstream s(dir / "s.csv");
  std::getline(s, line);
  CHECK(line.find("median") != std::string::npos);
  CHECK(line.find("niqr") != std::string::npos);
}

TEST_CASE("fingerprint") {
  RowMatrix a = RowMatrix::Zero(3, 2);
  const std::string h = data_fingerprint(a);
  CHECK(h.size() == 16);
  a(1, 1) = 1e-300;
  CHECK(data_fingerprint(a) != h);
  CHECK(data_fingerprint(RowMatrix::Zero(2, 3)) != h);
}

}  // TEST_SUITE
