#include "geoalign/geoalign.h"

#include <cmath>
#include <limits>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "alignment.hpp"
#include "clustering.hpp"
#include "datagen.hpp"
#include "errors.hpp"
#include "pipeline.hpp"
#include "point_set.hpp"
#include "point_set_io.hpp"
#include "rigid_transform.hpp"
#include "rng.hpp"
#include "transport.hpp"

using geoalign::Error;
using geoalign::ErrorKind;

struct ga_point_set {
  geoalign::WeightedPointSet p;
};
struct ga_transform {
  geoalign::RigidTransform t;
};
struct ga_flow {
  geoalign::FlowPlan f;
};
struct ga_report {
  geoalign::PipelineReport r;
};

namespace {

constexpr const char* kVersion = "0.1.0";

thread_local std::string t_last_error;

ga_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument:
      return GA_ERROR_INVALID_ARGUMENT;
    case ErrorKind::dimension_mismatch:
      return GA_ERROR_DIMENSION_MISMATCH;
    case ErrorKind::parse:
      return GA_ERROR_PARSE;
    case ErrorKind::infeasible:
      return GA_ERROR_INFEASIBLE;
    case ErrorKind::numeric:
      return GA_ERROR_NUMERIC;
    case ErrorKind::io:
      return GA_ERROR_IO;
  }
  return GA_ERROR_INTERNAL;
}

// Runs a body, translating exceptions into status codes + the thread-local
// message. Successful calls clear the message.
template <typename F>
ga_status guarded(F&& body) {
  try {
    body();
    t_last_error.clear();
    return GA_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    t_last_error = "out of memory";
    return GA_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return GA_ERROR_INTERNAL;
  }
}

void require(const void* ptr, const char* what) {
  if (ptr == nullptr)
    geoalign::fail(ErrorKind::invalid_argument,
                   std::string(what) + " must not be null");
}

}  // namespace

extern "C" {

const char* ga_version(void) { return kVersion; }

const char* ga_last_error(void) { return t_last_error.c_str(); }

/* ---- Point sets ------------------------------------------------------- */

ga_status ga_point_set_create(int64_t n, int64_t d, const double* coords,
                              const double* weights, ga_point_set** out) {
  return guarded([&] {
    require(coords, "coords");
    require(weights, "weights");
    require(out, "out");
    if (n < 1 || d < 1)
      geoalign::fail(ErrorKind::invalid_argument, "n and d must be positive");
    std::vector<double> c(coords, coords + n * d);
    std::vector<double> w(weights, weights + n);
    *out = new ga_point_set{
        geoalign::WeightedPointSet(n, d, std::move(c), std::move(w))};
  });
}

ga_status ga_point_set_load(const char* path, ga_point_set** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ga_point_set{geoalign::load_point_set(path)};
  });
}

ga_status ga_point_set_save(const ga_point_set* p, const char* path) {
  return guarded([&] {
    require(p, "point set");
    require(path, "path");
    geoalign::save_point_set(p->p, path);
  });
}

int64_t ga_point_set_size(const ga_point_set* p) {
  return p == nullptr ? 0 : p->p.size();
}

int64_t ga_point_set_dim(const ga_point_set* p) {
  return p == nullptr ? 0 : p->p.dim();
}

const double* ga_point_set_coords(const ga_point_set* p) {
  return p == nullptr ? nullptr : p->p.coords().data();
}

const double* ga_point_set_weights(const ga_point_set* p) {
  return p == nullptr ? nullptr : p->p.weights().data();
}

double ga_point_set_total_weight(const ga_point_set* p) {
  return p == nullptr ? 0.0 : p->p.total_weight();
}

double ga_point_set_diameter(const ga_point_set* p) {
  return p == nullptr ? 0.0 : geoalign::diameter(p->p);
}

void ga_point_set_free(ga_point_set* p) { delete p; }

/* ---- Instance generation ---------------------------------------------- */

void ga_manifold_spec_default(ga_manifold_spec* spec) {
  if (spec == nullptr) return;
  const geoalign::ManifoldSpec defaults;
  spec->latent_dim = defaults.latent_dim;
  spec->ambient_dim = defaults.ambient_dim;
  spec->degree = defaults.degree;
  spec->n1 = defaults.n1;
  spec->n2 = defaults.n2;
  spec->weight_low = defaults.weight_low;
  spec->weight_high = defaults.weight_high;
  spec->seed = defaults.seed;
}

ga_status ga_generate_manifold_pair(const ga_manifold_spec* spec,
                                    ga_point_set** out_a,
                                    ga_point_set** out_b) {
  return guarded([&] {
    require(spec, "spec");
    require(out_a, "out_a");
    require(out_b, "out_b");
    geoalign::ManifoldSpec s;
    s.latent_dim = spec->latent_dim;
    s.ambient_dim = spec->ambient_dim;
    s.degree = spec->degree;
    s.n1 = spec->n1;
    s.n2 = spec->n2;
    s.weight_low = spec->weight_low;
    s.weight_high = spec->weight_high;
    s.seed = spec->seed;
    auto pair = geoalign::random_manifold_instance(s);
    *out_a = new ga_point_set{std::move(pair.first)};
    *out_b = new ga_point_set{std::move(pair.second)};
  });
}

ga_status ga_generate_hypercube(int64_t rho, int64_t d, int64_t n,
                                uint64_t seed, ga_point_set** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ga_point_set{geoalign::hypercube_instance(rho, d, n, seed)};
  });
}

ga_status ga_add_noise(const ga_point_set* p, double eta, uint64_t seed,
                       ga_point_set** out) {
  return guarded([&] {
    require(p, "point set");
    require(out, "out");
    *out = new ga_point_set{geoalign::add_gaussian_noise(p->p, eta, seed)};
  });
}

uint64_t ga_derive_seed(uint64_t seed, uint64_t tag) {
  return seed == 0 ? 0 : geoalign::SplitMix64::mix(seed + tag);
}

/* ---- Rigid transforms ------------------------------------------------- */

ga_status ga_transform_create(int64_t d, const double* rotation,
                              const double* translation, ga_transform** out) {
  return guarded([&] {
    require(rotation, "rotation");
    require(translation, "translation");
    require(out, "out");
    if (d < 1)
      geoalign::fail(ErrorKind::invalid_argument, "d must be positive");
    std::vector<double> r(rotation, rotation + d * d);
    std::vector<double> v(translation, translation + d);
    *out = new ga_transform{
        geoalign::RigidTransform(d, std::move(r), std::move(v))};
  });
}

ga_status ga_transform_identity(int64_t d, ga_transform** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ga_transform{geoalign::RigidTransform::identity(d)};
  });
}

int64_t ga_transform_dim(const ga_transform* t) {
  return t == nullptr ? 0 : t->t.dim();
}

const double* ga_transform_rotation(const ga_transform* t) {
  return t == nullptr ? nullptr : t->t.rotation().data();
}

const double* ga_transform_translation(const ga_transform* t) {
  return t == nullptr ? nullptr : t->t.translation().data();
}

int ga_transform_is_proper(const ga_transform* t) {
  return (t != nullptr && t->t.is_proper()) ? 1 : 0;
}

ga_status ga_transform_then(const ga_transform* first,
                            const ga_transform* second, ga_transform** out) {
  return guarded([&] {
    require(first, "first");
    require(second, "second");
    require(out, "out");
    *out = new ga_transform{first->t.then(second->t)};
  });
}

ga_status ga_transform_inverse(const ga_transform* t, ga_transform** out) {
  return guarded([&] {
    require(t, "transform");
    require(out, "out");
    *out = new ga_transform{t->t.inverse()};
  });
}

ga_status ga_transform_apply(const ga_transform* t, const ga_point_set* p,
                             ga_point_set** out) {
  return guarded([&] {
    require(t, "transform");
    require(p, "point set");
    require(out, "out");
    *out = new ga_point_set{geoalign::apply_transform(t->t, p->p)};
  });
}

void ga_transform_free(ga_transform* t) { delete t; }

/* ---- Transport -------------------------------------------------------- */

ga_status ga_solve_emd(const ga_point_set* a, const ga_point_set* b,
                       ga_flow** out_flow, double* out_value) {
  return guarded([&] {
    require(a, "first point set");
    require(b, "second point set");
    geoalign::EmdSolution sol = geoalign::solve_emd(a->p, b->p);
    if (out_value != nullptr) *out_value = sol.value;
    if (out_flow != nullptr) *out_flow = new ga_flow{std::move(sol.plan)};
  });
}

int64_t ga_flow_entry_count(const ga_flow* f) {
  return f == nullptr ? 0 : static_cast<int64_t>(f->f.entries().size());
}

ga_status ga_flow_entry(const ga_flow* f, int64_t index, int64_t* out_i,
                        int64_t* out_j, double* out_flow) {
  return guarded([&] {
    require(f, "flow");
    if (index < 0 || index >= static_cast<int64_t>(f->f.entries().size()))
      geoalign::fail(ErrorKind::invalid_argument, "flow entry index out of range");
    const geoalign::FlowEntry& e =
        f->f.entries()[static_cast<std::size_t>(index)];
    if (out_i != nullptr) *out_i = e.i;
    if (out_j != nullptr) *out_j = e.j;
    if (out_flow != nullptr) *out_flow = e.flow;
  });
}

int64_t ga_flow_source_count(const ga_flow* f) {
  return f == nullptr ? 0 : f->f.n1();
}

int64_t ga_flow_sink_count(const ga_flow* f) {
  return f == nullptr ? 0 : f->f.n2();
}

double ga_flow_total(const ga_flow* f) {
  return f == nullptr ? 0.0 : f->f.total_flow();
}

ga_status ga_flow_cost(const ga_flow* f, const ga_point_set* a,
                       const ga_point_set* b, double* out_value) {
  return guarded([&] {
    require(f, "flow");
    require(a, "first point set");
    require(b, "second point set");
    require(out_value, "out_value");
    *out_value = geoalign::emd_cost(f->f, a->p, b->p);
  });
}

ga_status ga_flow_save(const ga_flow* f, const char* path) {
  return guarded([&] {
    require(f, "flow");
    require(path, "path");
    geoalign::save_flow(f->f, path);
  });
}

void ga_flow_free(ga_flow* f) { delete f; }

/* ---- Compression ------------------------------------------------------ */

ga_status ga_compress(const ga_point_set* p, int64_t k, uint64_t seed,
                      ga_point_set** out, double* out_radius) {
  return guarded([&] {
    require(p, "point set");
    require(out, "out");
    geoalign::Clustering info;
    *out = new ga_point_set{geoalign::compress(p->p, k, seed, &info)};
    if (out_radius != nullptr) *out_radius = info.radius;
  });
}

ga_status ga_k_from_epsilon(double epsilon, double rho, int64_t* out_k) {
  return guarded([&] {
    require(out_k, "out_k");
    *out_k = geoalign::k_from_epsilon(epsilon, rho);
  });
}

/* ---- Alignment pipeline ----------------------------------------------- */

void ga_align_params_default(ga_align_params* params) {
  if (params == nullptr) return;
  const geoalign::AlignConfig defaults;
  params->k = 0;
  params->epsilon = 0.0;
  params->rho = 0.0;
  params->seed = 0;
  params->tolerance = defaults.tolerance;
  params->max_iterations = defaults.max_iterations;
  params->init = GA_INIT_CENTROID;
  params->proper_rotations_only = 0;
}

ga_status ga_align(const ga_point_set* a, const ga_point_set* b,
                   const ga_align_params* params, ga_report** out) {
  return guarded([&] {
    require(a, "first point set");
    require(b, "second point set");
    require(params, "params");
    require(out, "out");
    geoalign::PipelineOptions options;
    options.k = params->k;
    options.epsilon = params->epsilon;
    options.rho = params->rho;
    options.seed = params->seed;
    options.align.tolerance = params->tolerance;
    options.align.max_iterations = params->max_iterations;
    options.align.init = params->init == GA_INIT_IDENTITY
                             ? geoalign::AlignConfig::Init::identity
                             : geoalign::AlignConfig::Init::centroid;
    options.align.proper_rotations_only = params->proper_rotations_only != 0;
    *out = new ga_report{geoalign::align_compressed(a->p, b->p, options)};
  });
}

double ga_report_value(const ga_report* r, ga_report_field field) {
  if (r == nullptr) return std::numeric_limits<double>::quiet_NaN();
  const geoalign::PipelineReport& rep = r->r;
  switch (field) {
    case GA_REPORT_K_A:
      return static_cast<double>(rep.k_a);
    case GA_REPORT_K_B:
      return static_cast<double>(rep.k_b);
    case GA_REPORT_RADIUS_A:
      return rep.radius_a;
    case GA_REPORT_RADIUS_B:
      return rep.radius_b;
    case GA_REPORT_DIAMETER_A:
      return rep.diameter_a;
    case GA_REPORT_DIAMETER_B:
      return rep.diameter_b;
    case GA_REPORT_EPS_EFF:
      return rep.eps_eff;
    case GA_REPORT_EMD_FULL:
      return rep.emd_full;
    case GA_REPORT_EMD_COMPRESSED:
      return rep.emd_compressed;
    case GA_REPORT_ITERATIONS:
      return static_cast<double>(rep.iterations);
    case GA_REPORT_CONVERGED:
      return rep.converged ? 1.0 : 0.0;
    case GA_REPORT_INEQ6_LHS:
      return rep.certificates.ineq6_lhs;
    case GA_REPORT_INEQ6_RHS:
      return rep.certificates.ineq6_rhs;
    case GA_REPORT_INEQ7_LHS:
      return rep.certificates.ineq7_lhs;
    case GA_REPORT_INEQ7_RHS:
      return rep.certificates.ineq7_rhs;
    case GA_REPORT_TIME_COMPRESS_MS:
      return rep.time_compress_ms;
    case GA_REPORT_TIME_ALIGN_MS:
      return rep.time_align_ms;
    case GA_REPORT_TIME_FINAL_EMD_MS:
      return rep.time_final_emd_ms;
    case GA_REPORT_TIME_TOTAL_MS:
      return rep.time_total_ms;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

int64_t ga_report_trace_length(const ga_report* r) {
  return r == nullptr ? 0 : static_cast<int64_t>(r->r.objective_trace.size());
}

const double* ga_report_trace(const ga_report* r) {
  return r == nullptr ? nullptr : r->r.objective_trace.data();
}

ga_status ga_report_transform(const ga_report* r, ga_transform** out) {
  return guarded([&] {
    require(r, "report");
    require(out, "out");
    *out = new ga_transform{r->r.transform};
  });
}

ga_status ga_report_flow(const ga_report* r, ga_flow** out) {
  return guarded([&] {
    require(r, "report");
    require(out, "out");
    *out = new ga_flow{r->r.flow};
  });
}

void ga_report_free(ga_report* r) { delete r; }

} /* extern "C" */
