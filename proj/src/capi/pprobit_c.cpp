#include "pprobit/pprobit.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"

#include "core/data_io.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/gennorm.hpp"
#include "core/objective.hpp"
#include "core/parallel.hpp"
#include "core/pipeline.hpp"
#include "core/row_source.hpp"
#include "core/solver.hpp"

struct pprobit_dataset {
  pprobit::LabeledDataset data;
  pprobit::RowMatrix x;
  bool intercept = false;
};

struct pprobit_coreset {
  pprobit::CoresetResult result;
  pprobit::CoresetOptions options;
};

namespace {

thread_local std::string last_error;

pprobit_status to_status(pprobit::ErrorCode code) {
  using pprobit::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return PPROBIT_E_INVALID_ARGUMENT;
    case ErrorCode::Domain: return PPROBIT_E_DOMAIN;
    case ErrorCode::Dimension: return PPROBIT_E_DIMENSION;
    case ErrorCode::Io: return PPROBIT_E_IO;
    case ErrorCode::Parse: return PPROBIT_E_PARSE;
    case ErrorCode::RankDeficient: return PPROBIT_E_RANK_DEFICIENT;
    case ErrorCode::Numeric: return PPROBIT_E_NUMERIC;
  }
  return PPROBIT_E_INTERNAL;
}

template <typename F>
pprobit_status guarded(F&& body) {
  try {
    body();
    return PPROBIT_OK;
  } catch (const pprobit::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PPROBIT_E_NO_MEMORY;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PPROBIT_E_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return PPROBIT_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) pprobit::fail(pprobit::ErrorCode::InvalidArgument, what);
}

void require_len(std::size_t have, std::size_t need) {
  if (have < need)
    pprobit::fail(pprobit::ErrorCode::Dimension,
                  "output buffer holds " + std::to_string(have) + " values, need " + std::to_string(need));
}

template <typename F>
pprobit_status scalar(double x, double p, double* out, F&& f) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    if (!std::isfinite(x)) pprobit::fail(pprobit::ErrorCode::Domain, "argument must be finite");
    *out = f(x, pprobit::Shape(p));
  });
}

pprobit::RowMatrix map_rows(const double* x, std::size_t n, std::size_t d) {
  require(x != nullptr, "matrix pointer is null");
  require(n > 0 && d > 0, "matrix must be non-empty");
  return Eigen::Map<const pprobit::RowMatrix>(x, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
}

pprobit::Vector map_weights(const double* w, std::size_t n) {
  if (w == nullptr) return pprobit::Vector();
  return Eigen::Map<const pprobit::Vector>(w, static_cast<Eigen::Index>(n));
}

pprobit::SolverConfig solver_config(const pprobit_fit_options* o) {
  pprobit::SolverConfig c;
  if (o == nullptr) return c;
  c.method = o->method == PPROBIT_SOLVER_GRADIENT ? pprobit::SolverMethod::GradientDescent
                                                  : pprobit::SolverMethod::Newton;
  c.max_iter = o->max_iter;
  c.grad_tol = o->grad_tol;
  return c;
}

void fill_summary(const pprobit::FitResult& f, pprobit_fit_summary* s) {
  if (s == nullptr) return;
  s->loss = f.final_loss;
  s->iterations = f.iterations;
  s->converged = f.converged ? 1 : 0;
  s->gradient_norm = f.gradient_norm;
  s->mle_may_not_exist = f.mle_may_not_exist ? 1 : 0;
  s->gradient_fallbacks = f.gradient_fallbacks;
}

void copy_beta(const pprobit::Vector& beta, double* out, std::size_t len) {
  require(out != nullptr, "beta output pointer is null");
  require_len(len, static_cast<std::size_t>(beta.size()));
  std::copy(beta.data(), beta.data() + beta.size(), out);
}

pprobit::CoresetMethod to_method(pprobit_method m) {
  switch (m) {
    case PPROBIT_METHOD_PPROBIT: return pprobit::CoresetMethod::Pprobit;
    case PPROBIT_METHOD_UNIFORM: return pprobit::CoresetMethod::Uniform;
    case PPROBIT_METHOD_L2: return pprobit::CoresetMethod::L2;
    case PPROBIT_METHOD_SQRT_L2: return pprobit::CoresetMethod::SqrtL2;
    case PPROBIT_METHOD_ONLINE_L2: return pprobit::CoresetMethod::OnlineL2;
  }
  pprobit::fail(pprobit::ErrorCode::InvalidArgument, "unknown coreset method");
}

pprobit::CoresetOptions coreset_options(const pprobit_coreset_options* o) {
  require(o != nullptr, "coreset options are null");
  pprobit::CoresetOptions c;
  c.method = to_method(o->method);
  c.p = o->p;
  c.k = o->k;
  c.seed = o->seed;
  c.rounding = o->rounding != 0;
  c.use_jl = o->use_jl != 0;
  c.threads = o->threads ? o->threads : pprobit::default_threads();
  return c;
}

void rebuild(pprobit_dataset& ds, bool intercept, bool scale) {
  if (scale && ds.data.column_scale.empty()) pprobit::scale_features(ds.data);
  ds.x = pprobit::fold_labels(ds.data, intercept);
  ds.intercept = intercept;
}

pprobit::LabeledDataset load_any(const char* path, const pprobit_load_options& o) {
  if (o.format == PPROBIT_FORMAT_LIBSVM) return pprobit::load_libsvm(path, o.libsvm_dim);
  pprobit::CsvOptions csv;
  csv.has_header = o.has_header != 0;
  csv.label_column = o.label_column;
  return pprobit::load_csv(path, csv);
}

}  // namespace

extern "C" {

const char* pprobit_version(void) { return "0.1.0"; }

const char* pprobit_status_string(pprobit_status status) {
  switch (status) {
    case PPROBIT_OK: return "ok";
    case PPROBIT_E_INVALID_ARGUMENT: return "invalid argument";
    case PPROBIT_E_DOMAIN: return "domain error";
    case PPROBIT_E_DIMENSION: return "dimension mismatch";
    case PPROBIT_E_IO: return "i/o error";
    case PPROBIT_E_PARSE: return "parse error";
    case PPROBIT_E_RANK_DEFICIENT: return "rank deficient";
    case PPROBIT_E_NUMERIC: return "numeric failure";
    case PPROBIT_E_NO_MEMORY: return "out of memory";
    case PPROBIT_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* pprobit_last_error(void) { return last_error.c_str(); }

pprobit_status pprobit_pdf(double x, double p, double* out) {
  return scalar(x, p, out, [](double v, const pprobit::Shape& s) { return pprobit::pdf(v, s); });
}
pprobit_status pprobit_cdf(double x, double p, double* out) {
  return scalar(x, p, out, [](double v, const pprobit::Shape& s) { return pprobit::cdf(v, s); });
}
pprobit_status pprobit_log_sf(double x, double p, double* out) {
  return scalar(x, p, out, [](double v, const pprobit::Shape& s) { return pprobit::log_sf(v, s); });
}
pprobit_status pprobit_g(double r, double p, double* out) {
  return scalar(r, p, out, [](double v, const pprobit::Shape& s) { return pprobit::g(v, s); });
}
pprobit_status pprobit_g_prime(double r, double p, double* out) {
  return scalar(r, p, out, [](double v, const pprobit::Shape& s) { return pprobit::g_prime(v, s); });
}
pprobit_status pprobit_g_second(double r, double p, double* out) {
  return scalar(r, p, out, [](double v, const pprobit::Shape& s) { return pprobit::g_second(v, s); });
}

void pprobit_load_options_init(pprobit_load_options* o) {
  if (o == nullptr) return;
  o->format = PPROBIT_FORMAT_CSV;
  o->has_header = 0;
  o->label_column = -1;
  o->libsvm_dim = 0;
  o->add_intercept = 0;
  o->scale_features = 0;
}

void pprobit_synthetic_spec_init(pprobit_synthetic_spec* s) {
  if (s == nullptr) return;
  const pprobit::SyntheticSpec d;
  s->n = d.n;
  s->d = d.d;
  s->seed = d.seed;
  s->outlier_fraction = d.outlier_fraction;
  s->outlier_scale = d.outlier_scale;
  s->target_separation = d.target_separation;
}

pprobit_status pprobit_dataset_load(const char* path, const pprobit_load_options* options,
                                    pprobit_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path or output pointer is null");
    pprobit_load_options o;
    pprobit_load_options_init(&o);
    if (options != nullptr) o = *options;
    auto ds = std::make_unique<pprobit_dataset>();
    ds->data = load_any(path, o);
    rebuild(*ds, o.add_intercept != 0, o.scale_features != 0);
    *out = ds.release();
  });
}

pprobit_status pprobit_dataset_synthesize(const pprobit_synthetic_spec* spec, pprobit_dataset** out) {
  return guarded([&] {
    require(spec != nullptr && out != nullptr, "spec or output pointer is null");
    pprobit::SyntheticSpec s;
    s.n = spec->n;
    s.d = spec->d;
    s.seed = spec->seed;
    s.outlier_fraction = spec->outlier_fraction;
    s.outlier_scale = spec->outlier_scale;
    s.target_separation = spec->target_separation;
    auto ds = std::make_unique<pprobit_dataset>();
    ds->data = pprobit::make_synthetic(s);
    rebuild(*ds, false, false);
    *out = ds.release();
  });
}

pprobit_status pprobit_dataset_from_arrays(const double* z, const int* y, size_t n, size_t d,
                                           pprobit_dataset** out) {
  return guarded([&] {
    require(y != nullptr && out != nullptr, "label or output pointer is null");
    auto ds = std::make_unique<pprobit_dataset>();
    ds->data.z = map_rows(z, n, d);
    if (!ds->data.z.allFinite()) pprobit::fail(pprobit::ErrorCode::InvalidArgument, "features must be finite");
    ds->data.y.assign(y, y + n);
    for (const int v : ds->data.y)
      if (v != 0 && v != 1) pprobit::fail(pprobit::ErrorCode::InvalidArgument, "labels must be 0 or 1");
    rebuild(*ds, false, false);
    *out = ds.release();
  });
}

void pprobit_dataset_free(pprobit_dataset* ds) { delete ds; }

pprobit_status pprobit_dataset_prepare(pprobit_dataset* ds, int add_intercept, int scale_features) {
  return guarded([&] {
    require(ds != nullptr, "dataset is null");
    rebuild(*ds, add_intercept != 0, scale_features != 0);
  });
}

size_t pprobit_dataset_rows(const pprobit_dataset* ds) {
  return ds ? static_cast<size_t>(ds->x.rows()) : 0;
}

size_t pprobit_dataset_cols(const pprobit_dataset* ds) {
  return ds ? static_cast<size_t>(ds->x.cols()) : 0;
}

const char* pprobit_dataset_label_mapping(const pprobit_dataset* ds) {
  return ds ? ds->data.label_mapping.c_str() : "";
}

pprobit_status pprobit_dataset_design(const pprobit_dataset* ds, double* out, size_t len) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "dataset or output pointer is null");
    require_len(len, static_cast<std::size_t>(ds->x.size()));
    std::copy(ds->x.data(), ds->x.data() + ds->x.size(), out);
  });
}

pprobit_status pprobit_dataset_write_csv(const pprobit_dataset* ds, const char* path, int header) {
  return guarded([&] {
    require(ds != nullptr && path != nullptr, "dataset or path is null");
    pprobit::write_csv(ds->data, path, header != 0);
  });
}

void pprobit_fit_options_init(pprobit_fit_options* o) {
  if (o == nullptr) return;
  o->method = PPROBIT_SOLVER_NEWTON;
  o->max_iter = 0;
  o->grad_tol = 0.0;
}

pprobit_status pprobit_loss_arrays(const double* x, const double* weights, size_t n, size_t d,
                                   double p, const double* beta, double* out) {
  return guarded([&] {
    require(beta != nullptr && out != nullptr, "beta or output pointer is null");
    const auto b = Eigen::Map<const pprobit::Vector>(beta, static_cast<Eigen::Index>(d));
    *out = pprobit::loss(map_rows(x, n, d), map_weights(weights, n), b, pprobit::Shape(p));
  });
}

pprobit_status pprobit_gradient_arrays(const double* x, const double* weights, size_t n, size_t d,
                                       double p, const double* beta, double* grad_out) {
  return guarded([&] {
    require(beta != nullptr && grad_out != nullptr, "beta or output pointer is null");
    const auto b = Eigen::Map<const pprobit::Vector>(beta, static_cast<Eigen::Index>(d));
    const pprobit::Vector gr =
        pprobit::gradient(map_rows(x, n, d), map_weights(weights, n), b, pprobit::Shape(p));
    std::copy(gr.data(), gr.data() + gr.size(), grad_out);
  });
}

pprobit_status pprobit_fit_arrays(const double* x, const double* weights, size_t n, size_t d,
                                  double p, const pprobit_fit_options* options, double* beta_out,
                                  pprobit_fit_summary* summary) {
  return guarded([&] {
    const pprobit::FitResult f = pprobit::fit(map_rows(x, n, d), map_weights(weights, n),
                                              pprobit::Shape(p), solver_config(options));
    copy_beta(f.beta, beta_out, d);
    fill_summary(f, summary);
  });
}

pprobit_status pprobit_loss(const pprobit_dataset* ds, double p, const double* beta, size_t beta_len,
                            double* out) {
  return guarded([&] {
    require(ds != nullptr && beta != nullptr && out != nullptr, "null argument");
    if (beta_len != static_cast<std::size_t>(ds->x.cols()))
      pprobit::fail(pprobit::ErrorCode::Dimension, "beta length does not match the column count");
    const auto b = Eigen::Map<const pprobit::Vector>(beta, static_cast<Eigen::Index>(beta_len));
    *out = pprobit::loss(ds->x, pprobit::Vector(), b, pprobit::Shape(p));
  });
}

pprobit_status pprobit_fit(const pprobit_dataset* ds, double p, const pprobit_fit_options* options,
                           double* beta_out, size_t beta_len, pprobit_fit_summary* summary) {
  return guarded([&] {
    require(ds != nullptr, "dataset is null");
    const pprobit::FitResult f = pprobit::fit(ds->x, pprobit::Vector(), pprobit::Shape(p), solver_config(options));
    copy_beta(f.beta, beta_out, beta_len);
    fill_summary(f, summary);
  });
}

pprobit_status pprobit_estimate_mu(const pprobit_dataset* ds, double p, size_t num_directions,
                                   uint64_t seed, double* direction_out, size_t direction_len,
                                   pprobit_mu_result* out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "dataset or output pointer is null");
    const pprobit::MuEstimate mu = pprobit::estimate_mu_lower(ds->x, pprobit::Shape(p), num_directions, seed);
    if (direction_out != nullptr) copy_beta(mu.direction, direction_out, direction_len);
    out->mu_lower = mu.mu_lower;
    out->directions_tried = mu.directions_tried;
    out->unbounded = mu.unbounded ? 1 : 0;
  });
}

pprobit_status pprobit_method_from_string(const char* name, pprobit_method* out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    switch (pprobit::parse_method(name)) {
      case pprobit::CoresetMethod::Pprobit: *out = PPROBIT_METHOD_PPROBIT; break;
      case pprobit::CoresetMethod::Uniform: *out = PPROBIT_METHOD_UNIFORM; break;
      case pprobit::CoresetMethod::L2: *out = PPROBIT_METHOD_L2; break;
      case pprobit::CoresetMethod::SqrtL2: *out = PPROBIT_METHOD_SQRT_L2; break;
      case pprobit::CoresetMethod::OnlineL2: *out = PPROBIT_METHOD_ONLINE_L2; break;
    }
  });
}

const char* pprobit_method_name(pprobit_method method) {
  switch (method) {
    case PPROBIT_METHOD_PPROBIT: return "pprobit";
    case PPROBIT_METHOD_UNIFORM: return "uniform";
    case PPROBIT_METHOD_L2: return "l2";
    case PPROBIT_METHOD_SQRT_L2: return "sqrt-l2";
    case PPROBIT_METHOD_ONLINE_L2: return "online-l2";
  }
  return "unknown";
}

void pprobit_coreset_options_init(pprobit_coreset_options* o) {
  if (o == nullptr) return;
  o->method = PPROBIT_METHOD_PPROBIT;
  o->p = 2.0;
  o->k = 100;
  o->seed = 1;
  o->rounding = 0;
  o->use_jl = 1;
  o->threads = 0;
}

pprobit_status pprobit_coreset_build(const pprobit_dataset* ds, const pprobit_coreset_options* options,
                                     pprobit_coreset** out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "dataset or output pointer is null");
    auto c = std::make_unique<pprobit_coreset>();
    c->options = coreset_options(options);
    c->result = pprobit::build_coreset(ds->x, c->options);
    *out = c.release();
  });
}

pprobit_status pprobit_coreset_build_from_file(const char* path, const pprobit_load_options* load,
                                               const pprobit_coreset_options* options,
                                               pprobit_coreset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path or output pointer is null");
    pprobit_load_options lo;
    pprobit_load_options_init(&lo);
    if (load != nullptr) lo = *load;
    auto c = std::make_unique<pprobit_coreset>();
    c->options = coreset_options(options);
    if (lo.format == PPROBIT_FORMAT_LIBSVM && lo.libsvm_dim == 0) {
      pprobit_dataset ds;
      ds.data = load_any(path, lo);
      rebuild(ds, lo.add_intercept != 0, lo.scale_features != 0);
      c->result = pprobit::build_coreset(ds.x, c->options);
    } else {
      pprobit::FileSourceOptions fo;
      fo.format = lo.format == PPROBIT_FORMAT_LIBSVM ? pprobit::FileFormat::Libsvm : pprobit::FileFormat::Csv;
      fo.csv.has_header = lo.has_header != 0;
      fo.csv.label_column = lo.label_column;
      fo.libsvm_dim = lo.libsvm_dim;
      fo.add_intercept = lo.add_intercept != 0;
      fo.scale_features = lo.scale_features != 0;
      pprobit::FileRowSource src(path, fo);
      c->result = pprobit::build_coreset(src, c->options);
    }
    *out = c.release();
  });
}

void pprobit_coreset_free(pprobit_coreset* c) { delete c; }

size_t pprobit_coreset_size(const pprobit_coreset* c) { return c ? c->result.coreset.size() : 0; }

size_t pprobit_coreset_cols(const pprobit_coreset* c) {
  return c ? static_cast<size_t>(c->result.coreset.rows.cols()) : 0;
}

double pprobit_coreset_total_score(const pprobit_coreset* c) {
  return c ? c->result.coreset.total_score : std::numeric_limits<double>::quiet_NaN();
}

const char* pprobit_coreset_tag(const pprobit_coreset* c) {
  return c ? c->result.coreset.method_tag.c_str() : "";
}

pprobit_status pprobit_coreset_rows(const pprobit_coreset* c, double* out, size_t len) {
  return guarded([&] {
    require(c != nullptr && out != nullptr, "null argument");
    const auto& m = c->result.coreset.rows;
    require_len(len, static_cast<std::size_t>(m.size()));
    std::copy(m.data(), m.data() + m.size(), out);
  });
}

pprobit_status pprobit_coreset_weights(const pprobit_coreset* c, double* out, size_t len) {
  return guarded([&] {
    require(c != nullptr && out != nullptr, "null argument");
    const auto& w = c->result.coreset.weights;
    require_len(len, static_cast<std::size_t>(w.size()));
    std::copy(w.data(), w.data() + w.size(), out);
  });
}

pprobit_status pprobit_coreset_indices(const pprobit_coreset* c, size_t* out, size_t len) {
  return guarded([&] {
    require(c != nullptr && out != nullptr, "null argument");
    const auto& idx = c->result.coreset.source_indices;
    require_len(len, idx.size());
    std::copy(idx.begin(), idx.end(), out);
  });
}

pprobit_status pprobit_coreset_stats(const pprobit_coreset* c, pprobit_stream_stats* out) {
  return guarded([&] {
    require(c != nullptr && out != nullptr, "null argument");
    const auto& s = c->result.stats;
    out->passes = s.passes;
    out->rows = s.rows;
    out->sketch_rows = s.sketch_rows;
    out->state_bytes = s.state_bytes;
    out->budget_bytes = s.budget_bytes;
    out->t_sketch_ms = s.t_sketch_ms;
    out->t_sample_ms = s.t_sample_ms;
    out->k_clamped = s.k_clamped ? 1 : 0;
  });
}

pprobit_status pprobit_coreset_write(const pprobit_coreset* c, const char* csv_path, const char* json_path) {
  return guarded([&] {
    require(c != nullptr && csv_path != nullptr, "coreset or path is null");
    pprobit::write_coreset(c->result, c->options, csv_path, json_path ? json_path : "");
  });
}

pprobit_status pprobit_coreset_fit(const pprobit_coreset* c, const pprobit_fit_options* options,
                                   double* beta_out, size_t beta_len, pprobit_fit_summary* summary) {
  return guarded([&] {
    require(c != nullptr, "coreset is null");
    const pprobit::FitResult f = pprobit::fit(c->result.coreset.rows, c->result.coreset.weights,
                                              pprobit::Shape(c->options.p), solver_config(options));
    copy_beta(f.beta, beta_out, beta_len);
    fill_summary(f, summary);
  });
}

void pprobit_experiment_options_init(pprobit_experiment_options* o) {
  if (o == nullptr) return;
  std::memset(o, 0, sizeof(*o));
  o->dataset_name = "data";
  o->trials = 21;
  o->seed = 1;
}

pprobit_status pprobit_experiment_run(const pprobit_dataset* ds, const pprobit_experiment_options* options,
                                      const char* records_path, const char* summary_path,
                                      char** summary_json) {
  return guarded([&] {
    require(ds != nullptr && options != nullptr, "dataset or options are null");
    pprobit::ExperimentConfig cfg;
    if (options->dataset_name) cfg.dataset = options->dataset_name;
    if (options->p_values) cfg.p_values.assign(options->p_values, options->p_values + options->num_p);
    if (options->methods) {
      cfg.methods.clear();
      for (std::size_t i = 0; i < options->num_methods; ++i) cfg.methods.push_back(to_method(options->methods[i]));
    }
    if (options->k_grid) cfg.k_grid.assign(options->k_grid, options->k_grid + options->num_k);
    cfg.trials = options->trials;
    cfg.seed = options->seed;
    cfg.rounding = options->rounding != 0;
    cfg.threads = options->threads;
    const pprobit::ExperimentResult r = pprobit::run_experiment(ds->x, cfg);

    if (records_path != nullptr) {
      std::string text;
      for (const auto& rec : r.records) text += pprobit::record_to_json(rec, options->omit_timings == 0) + "\n";
      std::FILE* f = std::fopen(records_path, "wb");
      if (f == nullptr) pprobit::fail(pprobit::ErrorCode::Io, std::string("cannot write '") + records_path + "'");
      const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
      if (std::fclose(f) != 0 || !ok)
        pprobit::fail(pprobit::ErrorCode::Io, std::string("write failed for '") + records_path + "'");
    }
    if (summary_path != nullptr) pprobit::write_summary_csv(r.summary, summary_path);
    if (summary_json != nullptr) {
      nlohmann::ordered_json j;
      j["dataset"] = cfg.dataset;
      j["records"] = r.records.size();
      auto& fits = j["full_fits"] = nlohmann::ordered_json::array();
      for (const auto& f : r.full_fits)
        fits.push_back({{"p", f.p},
                        {"objective", f.objective},
                        {"iterations", f.iterations},
                        {"converged", f.converged},
                        {"t_solve_ms", f.t_solve_ms},
                        {"diagnostic", f.diagnostic}});
      auto& rows = j["summary"] = nlohmann::ordered_json::array();
      for (const auto& s : r.summary)
        rows.push_back({{"p", s.p},
                        {"method", s.method},
                        {"k", s.k},
                        {"trials", s.trials},
                        {"median_ratio", s.median},
                        {"q1", s.q1},
                        {"q3", s.q3},
                        {"niqr", s.niqr},
                        {"median_t_reduce_ms", s.median_t_reduce_ms},
                        {"median_t_solve_ms", s.median_t_solve_ms}});
      const std::string text = j.dump(2);
      char* buf = static_cast<char*>(std::malloc(text.size() + 1));
      if (buf == nullptr) throw std::bad_alloc();
      std::memcpy(buf, text.c_str(), text.size() + 1);
      *summary_json = buf;
    }
  });
}

void pprobit_string_free(char* s) { std::free(s); }

}  // extern "C"
