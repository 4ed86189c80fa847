#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "pprobit/pprobit.h"

namespace fs = std::filesystem;

namespace {

struct Dataset {
  pprobit_dataset* ptr = nullptr;
  ~Dataset() { pprobit_dataset_free(ptr); }
};

struct Coreset {
  pprobit_coreset* ptr = nullptr;
  ~Coreset() { pprobit_coreset_free(ptr); }
};

std::string temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pprobit_capi";
  fs::create_directories(dir);
  return (dir / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset synth(size_t n, size_t d, uint64_t seed) {
  pprobit_synthetic_spec spec;
  pprobit_synthetic_spec_init(&spec);
  spec.n = n;
  spec.d = d;
  spec.seed = seed;
  spec.outlier_fraction = 0.02;
  Dataset ds;
  REQUIRE(pprobit_dataset_synthesize(&spec, &ds.ptr) == PPROBIT_OK);
  return ds;
}

}  // namespace

TEST_CASE("status strings and version") {
  CHECK(std::strlen(pprobit_version()) > 0);
  CHECK(std::string(pprobit_status_string(PPROBIT_OK)) == "ok");
  CHECK(std::strlen(pprobit_status_string(PPROBIT_E_RANK_DEFICIENT)) > 0);
}

TEST_CASE("scalar functions") {
  double v = 0.0;
  REQUIRE(pprobit_cdf(0.0, 2.0, &v) == PPROBIT_OK);
  CHECK(v == 0.5);
  REQUIRE(pprobit_g(0.0, 1.5, &v) == PPROBIT_OK);
  CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  REQUIRE(pprobit_pdf(0.0, 2.0, &v) == PPROBIT_OK);
  CHECK(v == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0) * std::tgamma(1.5))));
  REQUIRE(pprobit_g_prime(3.0, 2.0, &v) == PPROBIT_OK);
  CHECK(v > 3.0);
  REQUIRE(pprobit_g_second(-1.0, 2.0, &v) == PPROBIT_OK);
  CHECK(v > 0.0);
  REQUIRE(pprobit_log_sf(10.0, 2.0, &v) == PPROBIT_OK);
  CHECK(v < -50.0);

  double untouched = 42.0;
  CHECK(pprobit_cdf(0.0, 0.5, &untouched) == PPROBIT_E_DOMAIN);
  CHECK(untouched == 42.0);
  CHECK(std::strlen(pprobit_last_error()) > 0);
  CHECK(pprobit_cdf(0.0, 2.0, nullptr) == PPROBIT_E_INVALID_ARGUMENT);
}

TEST_CASE("datasets from arrays") {
  const double z[] = {1.0, 2.0, -1.0, 0.5, 0.0, 1.0};
  const int y[] = {1, 0, 1};
  Dataset ds;
  REQUIRE(pprobit_dataset_from_arrays(z, y, 3, 2, &ds.ptr) == PPROBIT_OK);
  CHECK(pprobit_dataset_rows(ds.ptr) == 3);
  CHECK(pprobit_dataset_cols(ds.ptr) == 2);
  std::vector<double> x(6);
  REQUIRE(pprobit_dataset_design(ds.ptr, x.data(), x.size()) == PPROBIT_OK);
  CHECK(x == std::vector<double>{-1.0, -2.0, -1.0, 0.5, -0.0, -1.0});
  REQUIRE(pprobit_dataset_prepare(ds.ptr, 1, 0) == PPROBIT_OK);
  CHECK(pprobit_dataset_cols(ds.ptr) == 3);
  CHECK(pprobit_dataset_design(ds.ptr, x.data(), x.size()) == PPROBIT_E_DIMENSION);

  const int bad[] = {1, 2, 0};
  Dataset other;
  CHECK(pprobit_dataset_from_arrays(z, bad, 3, 2, &other.ptr) == PPROBIT_E_INVALID_ARGUMENT);
  CHECK(other.ptr == nullptr);
}

TEST_CASE("load, write and reload") {
  Dataset ds = synth(300, 3, 1);
  const std::string path = temp_path("d.csv");
  REQUIRE(pprobit_dataset_write_csv(ds.ptr, path.c_str(), 1) == PPROBIT_OK);
  pprobit_load_options lo;
  pprobit_load_options_init(&lo);
  lo.has_header = 1;
  Dataset back;
  REQUIRE(pprobit_dataset_load(path.c_str(), &lo, &back.ptr) == PPROBIT_OK);
  CHECK(pprobit_dataset_rows(back.ptr) == 300);
  CHECK(std::string(pprobit_dataset_label_mapping(back.ptr)) == "0/1");
  std::vector<double> a(900), b(900);
  pprobit_dataset_design(ds.ptr, a.data(), a.size());
  pprobit_dataset_design(back.ptr, b.data(), b.size());
  CHECK(a == b);

  Dataset missing;
  CHECK(pprobit_dataset_load("/nonexistent.csv", &lo, &missing.ptr) == PPROBIT_E_IO);
  std::ofstream(temp_path("bad.csv")) << "a,b\n1,zz,0\n";
  CHECK(pprobit_dataset_load(temp_path("bad.csv").c_str(), &lo, &missing.ptr) == PPROBIT_E_PARSE);
}

TEST_CASE("fit through arrays and datasets") {
  const double x[] = {1.0, -1.0};
  pprobit_fit_summary s;
  double beta = 7.0;
  REQUIRE(pprobit_fit_arrays(x, nullptr, 2, 1, 2.0, nullptr, &beta, &s) == PPROBIT_OK);
  CHECK(s.converged == 1);
  CHECK(std::fabs(beta) < 1e-12);
  CHECK(s.loss == doctest::Approx(2.0 * std::log(2.0)));

  double l = 0.0, g = 0.0;
  const double b2 = 2.0;
  REQUIRE(pprobit_loss_arrays(x, nullptr, 2, 1, 2.0, &b2, &l) == PPROBIT_OK);
  CHECK(l == doctest::Approx(3.806197243).epsilon(1e-9));
  REQUIRE(pprobit_gradient_arrays(x, nullptr, 2, 1, 2.0, &b2, &g) == PPROBIT_OK);
  CHECK(g > 0.0);

  const double sep[] = {-1.0};
  REQUIRE(pprobit_fit_arrays(sep, nullptr, 1, 1, 2.0, nullptr, &beta, &s) == PPROBIT_OK);
  CHECK(s.converged == 0);
  CHECK(s.mle_may_not_exist == 1);

  Dataset ds = synth(2000, 3, 2);
  pprobit_dataset_prepare(ds.ptr, 1, 0);
  std::vector<double> bn(4), bg(4);
  pprobit_fit_options fo;
  pprobit_fit_options_init(&fo);
  REQUIRE(pprobit_fit(ds.ptr, 1.5, &fo, bn.data(), bn.size(), &s) == PPROBIT_OK);
  CHECK(s.converged == 1);
  fo.method = PPROBIT_SOLVER_GRADIENT;
  pprobit_fit_summary sg;
  REQUIRE(pprobit_fit(ds.ptr, 1.5, &fo, bg.data(), bg.size(), &sg) == PPROBIT_OK);
  CHECK(sg.loss == doctest::Approx(s.loss).epsilon(1e-8));
  CHECK(pprobit_fit(ds.ptr, 1.5, &fo, bg.data(), 2, &sg) == PPROBIT_E_DIMENSION);
  double full = 0.0;
  REQUIRE(pprobit_loss(ds.ptr, 1.5, bn.data(), bn.size(), &full) == PPROBIT_OK);
  CHECK(full == doctest::Approx(s.loss));
}

TEST_CASE("mu estimate") {
  Dataset ds = synth(1000, 2, 3);
  pprobit_mu_result mu;
  std::vector<double> dir(2);
  REQUIRE(pprobit_estimate_mu(ds.ptr, 2.0, 200, 1, dir.data(), dir.size(), &mu) == PPROBIT_OK);
  CHECK(mu.unbounded == 0);
  CHECK(mu.mu_lower >= 1.0);
  CHECK(mu.directions_tried == 204);
  CHECK(std::hypot(dir[0], dir[1]) == doctest::Approx(1.0));

  const double sep[] = {1.0, 2.0, 3.0, 1.0};
  const int y[] = {0, 0};
  Dataset s;
  REQUIRE(pprobit_dataset_from_arrays(sep, y, 2, 2, &s.ptr) == PPROBIT_OK);
  REQUIRE(pprobit_estimate_mu(s.ptr, 2.0, 50, 1, nullptr, 0, &mu) == PPROBIT_OK);
  CHECK(mu.unbounded == 1);
  CHECK(std::isinf(mu.mu_lower));
}

TEST_CASE("coresets") {
  Dataset ds = synth(5000, 4, 4);
  pprobit_dataset_prepare(ds.ptr, 1, 0);
  pprobit_method m;
  REQUIRE(pprobit_method_from_string("sqrt-l2", &m) == PPROBIT_OK);
  CHECK(m == PPROBIT_METHOD_SQRT_L2);
  CHECK(std::string(pprobit_method_name(PPROBIT_METHOD_ONLINE_L2)) == "online-l2");
  CHECK(pprobit_method_from_string("nope", &m) == PPROBIT_E_INVALID_ARGUMENT);

  pprobit_coreset_options co;
  pprobit_coreset_options_init(&co);
  CHECK(co.k == 100);
  co.k = 250;
  co.p = 1.0;
  co.threads = 1;
  Coreset c;
  REQUIRE(pprobit_coreset_build(ds.ptr, &co, &c.ptr) == PPROBIT_OK);
  CHECK(pprobit_coreset_size(c.ptr) == 250);
  CHECK(pprobit_coreset_cols(c.ptr) == 5);
  CHECK(std::string(pprobit_coreset_tag(c.ptr)) == "pprobit");
  std::vector<double> w(250), rows(250 * 5);
  std::vector<size_t> idx(250);
  REQUIRE(pprobit_coreset_weights(c.ptr, w.data(), w.size()) == PPROBIT_OK);
  REQUIRE(pprobit_coreset_rows(c.ptr, rows.data(), rows.size()) == PPROBIT_OK);
  REQUIRE(pprobit_coreset_indices(c.ptr, idx.data(), idx.size()) == PPROBIT_OK);
  std::vector<double> design(5000 * 5);
  pprobit_dataset_design(ds.ptr, design.data(), design.size());
  for (size_t j = 0; j < 250; ++j)
    for (size_t c2 = 0; c2 < 5; ++c2) CHECK(rows[j * 5 + c2] == design[idx[j] * 5 + c2]);
  pprobit_stream_stats st;
  REQUIRE(pprobit_coreset_stats(c.ptr, &st) == PPROBIT_OK);
  CHECK(st.passes == 2);
  CHECK(st.rows == 5000);
  CHECK(st.state_bytes <= st.budget_bytes);
  CHECK(pprobit_coreset_total_score(c.ptr) > 1.0);

  std::vector<double> beta(5);
  pprobit_fit_summary s;
  REQUIRE(pprobit_coreset_fit(c.ptr, nullptr, beta.data(), beta.size(), &s) == PPROBIT_OK);
  CHECK(s.converged == 1);

  co.threads = 4;
  Coreset c4;
  REQUIRE(pprobit_coreset_build(ds.ptr, &co, &c4.ptr) == PPROBIT_OK);
  const std::string p1 = temp_path("c1.csv"), p4 = temp_path("c4.csv");
  REQUIRE(pprobit_coreset_write(c.ptr, p1.c_str(), temp_path("c1.json").c_str()) == PPROBIT_OK);
  REQUIRE(pprobit_coreset_write(c4.ptr, p4.c_str(), nullptr) == PPROBIT_OK);
  CHECK(slurp(p1) == slurp(p4));
  CHECK(slurp(temp_path("c1.json")).find("\"method\"") != std::string::npos);

  co.method = PPROBIT_METHOD_ONLINE_L2;
  Coreset bad;
  CHECK(pprobit_coreset_build(ds.ptr, &co, &bad.ptr) == PPROBIT_E_INVALID_ARGUMENT);
  co.p = 2.0;
  co.k = 0;
  CHECK(pprobit_coreset_build(ds.ptr, &co, &bad.ptr) == PPROBIT_E_INVALID_ARGUMENT);
}

TEST_CASE("coreset from a file stream") {
  Dataset ds = synth(3000, 3, 5);
  const std::string path = temp_path("stream.csv");
  REQUIRE(pprobit_dataset_write_csv(ds.ptr, path.c_str(), 0) == PPROBIT_OK);
  pprobit_load_options lo;
  pprobit_load_options_init(&lo);
  lo.add_intercept = 1;
  pprobit_coreset_options co;
  pprobit_coreset_options_init(&co);
  co.k = 120;
  Coreset streamed, memory;
  REQUIRE(pprobit_coreset_build_from_file(path.c_str(), &lo, &co, &streamed.ptr) == PPROBIT_OK);
  pprobit_dataset_prepare(ds.ptr, 1, 0);
  REQUIRE(pprobit_coreset_build(ds.ptr, &co, &memory.ptr) == PPROBIT_OK);
  std::vector<double> a(120), b(120);
  pprobit_coreset_weights(streamed.ptr, a.data(), a.size());
  pprobit_coreset_weights(memory.ptr, b.data(), b.size());
  CHECK(a == b);
  pprobit_stream_stats st;
  pprobit_coreset_stats(streamed.ptr, &st);
  CHECK(st.passes == 2);

  Coreset none;
  CHECK(pprobit_coreset_build_from_file("/nonexistent.csv", &lo, &co, &none.ptr) == PPROBIT_E_IO);
}

TEST_CASE("experiment run") {
  Dataset ds = synth(3000, 2, 6);
  pprobit_dataset_prepare(ds.ptr, 1, 0);
  pprobit_experiment_options eo;
  pprobit_experiment_options_init(&eo);
  CHECK(eo.trials == 21);
  const double ps[] = {2.0};
  const pprobit_method methods[] = {PPROBIT_METHOD_PPROBIT, PPROBIT_METHOD_UNIFORM};
  const size_t ks[] = {50, 200};
  eo.dataset_name = "capi";
  eo.p_values = ps;
  eo.num_p = 1;
  eo.methods = methods;
  eo.num_methods = 2;
  eo.k_grid = ks;
  eo.num_k = 2;
  eo.trials = 3;
  eo.omit_timings = 1;
  char* summary = nullptr;
  const std::string rec = temp_path("e.jsonl"), sum = temp_path("e.csv");
  REQUIRE(pprobit_experiment_run(ds.ptr, &eo, rec.c_str(), sum.c_str(), &summary) == PPROBIT_OK);
  REQUIRE(summary != nullptr);
  CHECK(std::string(summary).find("\"summary\"") != std::string::npos);
  pprobit_string_free(summary);
  const std::string first = slurp(rec);
  CHECK(first.find("t_solve_ms") == std::string::npos);
  size_t lines = 0;
  for (char ch : first) lines += ch == '\n';
  CHECK(lines == 2 * 2 * 3);

  eo.threads = 3;
  REQUIRE(pprobit_experiment_run(ds.ptr, &eo, rec.c_str(), nullptr, nullptr) == PPROBIT_OK);
  CHECK(slurp(rec) == first);
}
