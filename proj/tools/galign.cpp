// galign: command-line front end for the geoalign library.
//
// Subcommands: gen, noise, emd, align, sweep, noise-sweep.
// Exit codes: 0 ok, 1 filesystem failure, 2 usage/parse error,
// 3 infeasible or inconsistent input, 4 numerical failure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "geoalign/geoalign.h"

using nlohmann::ordered_json;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitNumeric = 4;

struct ExitError {
  int code;
  std::string message;
};

int exit_code_of(ga_status s) {
  switch (s) {
    case GA_OK:
      return 0;
    case GA_ERROR_PARSE:
      return kExitUsage;
    case GA_ERROR_IO:
      return kExitIo;
    case GA_ERROR_INVALID_ARGUMENT:
    case GA_ERROR_DIMENSION_MISMATCH:
    case GA_ERROR_INFEASIBLE:
      return kExitInput;
    case GA_ERROR_NUMERIC:
    case GA_ERROR_INTERNAL:
      return kExitNumeric;
  }
  return kExitNumeric;
}

void check(ga_status s) {
  if (s != GA_OK) throw ExitError{exit_code_of(s), ga_last_error()};
}

struct PointSetFree {
  void operator()(ga_point_set* p) const { ga_point_set_free(p); }
};
struct FlowFree {
  void operator()(ga_flow* f) const { ga_flow_free(f); }
};
struct ReportFree {
  void operator()(ga_report* r) const { ga_report_free(r); }
};
using PointSet = std::unique_ptr<ga_point_set, PointSetFree>;
using Flow = std::unique_ptr<ga_flow, FlowFree>;
using Report = std::unique_ptr<ga_report, ReportFree>;

PointSet load_set(const std::string& path) {
  ga_point_set* raw = nullptr;
  check(ga_point_set_load(path.c_str(), &raw));
  return PointSet(raw);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw ExitError{kExitIo, "cannot open '" + out_path + "' for writing"};
  f << content;
  if (!f) throw ExitError{kExitIo, "failed writing '" + out_path + "'"};
}

// Requested center count in gamma mode: ceil(gamma * n) with a hair of slack
// so that exact integer products do not round up a unit.
std::int64_t k_from_gamma(double gamma, std::int64_t n) {
  const double raw = gamma * static_cast<double>(n);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(raw - 1e-9)));
}

// Alignment knobs shared by align, sweep and noise-sweep.
struct AlignFlags {
  double tol = 1e-3;
  std::int64_t max_iters = 100;
  ga_init_mode init = GA_INIT_CENTROID;
  bool proper = false;
};

void add_align_flags(CLI::App* cmd, AlignFlags& f) {
  cmd->add_option("--tol", f.tol,
                  "Stop when the objective improves by less than this")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  static const std::map<std::string, ga_init_mode> init_map{
      {"identity", GA_INIT_IDENTITY}, {"centroid", GA_INIT_CENTROID}};
  cmd->add_option("--init", f.init, "Initial transform: identity or centroid")
      ->transform(CLI::CheckedTransformer(init_map, CLI::ignore_case))
      ->default_str("centroid");
  cmd->add_flag("--proper-rotations", f.proper,
                "Restrict to proper rotations (det +1)");
}

std::string align_flag_string(const AlignFlags& f, std::uint64_t seed) {
  std::string s = "--tol " + fmt(f.tol) +
                  " --max-iters " + std::to_string(f.max_iters) +
                  " --seed " + std::to_string(seed) + " --init " +
                  (f.init == GA_INIT_IDENTITY ? "identity" : "centroid");
  if (f.proper) s += " --proper-rotations";
  return s;
}

ga_align_params make_params(std::int64_t k, std::uint64_t seed,
                            const AlignFlags& f) {
  ga_align_params params;
  ga_align_params_default(&params);
  params.k = k;
  params.seed = seed;
  params.tolerance = f.tol;
  params.max_iterations = f.max_iters;
  params.init = f.init;
  params.proper_rotations_only = f.proper ? 1 : 0;
  return params;
}

// One pipeline run reduced to the numbers the sweeps tabulate.
struct RunResult {
  ga_status status = GA_OK;
  std::string error;
  double emd_full = 0.0;
  double time_total = 0.0;
  double time_compress = 0.0;
  double time_align = 0.0;
  double time_final = 0.0;
  double iterations = 0.0;
};

RunResult run_alignment(const ga_point_set* a, const ga_point_set* b,
                        std::int64_t k, std::uint64_t seed,
                        const AlignFlags& flags) {
  RunResult r;
  ga_align_params params = make_params(k, seed, flags);
  ga_report* raw = nullptr;
  r.status = ga_align(a, b, &params, &raw);
  if (r.status != GA_OK) {
    r.error = ga_last_error();
    return r;
  }
  Report rep(raw);
  r.emd_full = ga_report_value(raw, GA_REPORT_EMD_FULL);
  r.time_total = ga_report_value(raw, GA_REPORT_TIME_TOTAL_MS);
  r.time_compress = ga_report_value(raw, GA_REPORT_TIME_COMPRESS_MS);
  r.time_align = ga_report_value(raw, GA_REPORT_TIME_ALIGN_MS);
  r.time_final = ga_report_value(raw, GA_REPORT_TIME_FINAL_EMD_MS);
  r.iterations = ga_report_value(raw, GA_REPORT_ITERATIONS);
  return r;
}

// Runs body(0..count-1) on up to `jobs` worker threads; bodies must not
// throw (they record failures in their own slots).
template <typename Fn>
void run_cells(std::size_t count, int jobs, Fn&& body) {
  if (count == 0) return;
  const int workers =
      std::max(1, std::min(jobs, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count;
           i = next.fetch_add(1))
        body(i);
    });
  for (auto& t : pool) t.join();
}

void throw_first_failure(const std::vector<RunResult>& results) {
  for (const auto& r : results)
    if (r.status != GA_OK) throw ExitError{exit_code_of(r.status), r.error};
}

/* ---- gen -------------------------------------------------------------- */

struct GenManifoldArgs {
  std::string out_a, out_b;
  ga_manifold_spec spec;
};

void run_gen_manifold(const GenManifoldArgs& args) {
  ga_point_set *raw_a = nullptr, *raw_b = nullptr;
  check(ga_generate_manifold_pair(&args.spec, &raw_a, &raw_b));
  PointSet a(raw_a), b(raw_b);
  check(ga_point_set_save(a.get(), args.out_a.c_str()));
  check(ga_point_set_save(b.get(), args.out_b.c_str()));
}

struct GenHypercubeArgs {
  std::string out;
  std::int64_t rho = 4;
  std::int64_t d = 100;
  std::int64_t n = 1000;
  std::uint64_t seed = 0;
};

void run_gen_hypercube(const GenHypercubeArgs& args) {
  ga_point_set* raw = nullptr;
  check(ga_generate_hypercube(args.rho, args.d, args.n, args.seed, &raw));
  PointSet p(raw);
  check(ga_point_set_save(p.get(), args.out.c_str()));
}

/* ---- noise ------------------------------------------------------------ */

struct NoiseArgs {
  std::string input, output;
  double eta = 0.0;
  std::uint64_t seed = 0;
};

void run_noise(const NoiseArgs& args) {
  PointSet p = load_set(args.input);
  ga_point_set* raw = nullptr;
  check(ga_add_noise(p.get(), args.eta, args.seed, &raw));
  PointSet noised(raw);
  check(ga_point_set_save(noised.get(), args.output.c_str()));
}

/* ---- emd -------------------------------------------------------------- */

struct EmdArgs {
  std::string file_a, file_b, out;
};

void run_emd(const EmdArgs& args) {
  PointSet a = load_set(args.file_a);
  PointSet b = load_set(args.file_b);
  double value = 0.0;
  ga_flow* raw_flow = nullptr;
  check(ga_solve_emd(a.get(), b.get(),
                     args.out.empty() ? nullptr : &raw_flow, &value));
  Flow flow(raw_flow);
  if (!args.out.empty()) check(ga_flow_save(flow.get(), args.out.c_str()));
  std::cout << fmt(value) << '\n';
}

/* ---- align ------------------------------------------------------------ */

struct AlignArgs {
  std::string file_a, file_b, out;
  double gamma = 1.0;
  bool gamma_given = false;
  double epsilon = 0.0;
  double rho = 0.0;
  bool epsilon_given = false;
  std::int64_t k = 0;
  bool k_given = false;
  std::uint64_t seed = 0;
  AlignFlags flags;
};

void run_align(const AlignArgs& args) {
  PointSet a = load_set(args.file_a);
  PointSet b = load_set(args.file_b);
  const std::int64_t n1 = ga_point_set_size(a.get());
  const std::int64_t n2 = ga_point_set_size(b.get());
  const std::int64_t max_n = std::max(n1, n2);

  std::int64_t k = 0;
  std::string mode_flags;
  if (args.k_given) {
    k = args.k;
    mode_flags = "--k " + std::to_string(args.k);
  } else if (args.epsilon_given) {
    if (!(args.epsilon > 0.0 && args.epsilon < 1.0))
      throw ExitError{kExitUsage, "--epsilon must lie in (0, 1)"};
    if (!(args.rho > 0.0))
      throw ExitError{kExitUsage, "--rho must be positive"};
    check(ga_k_from_epsilon(args.epsilon, args.rho, &k));
    mode_flags = "--epsilon " + fmt(args.epsilon) + " --rho " + fmt(args.rho);
  } else {
    if (!(args.gamma > 0.0 && args.gamma <= 1.0))
      throw ExitError{kExitUsage, "--gamma must lie in (0, 1]"};
    k = k_from_gamma(args.gamma, max_n);
    mode_flags = "--gamma " + fmt(args.gamma);
  }

  ga_align_params params = make_params(k, args.seed, args.flags);
  ga_report* raw = nullptr;
  check(ga_align(a.get(), b.get(), &params, &raw));
  Report rep(raw);

  ordered_json report;
  {
    ordered_json versions;
    versions["library"] = ga_version();
    versions["cli"] = ga_version();
    ordered_json metadata;
    metadata["versions"] = versions;
    metadata["seed"] = args.seed;
    metadata["flags"] =
        mode_flags + " " + align_flag_string(args.flags, args.seed);
    report["metadata"] = metadata;
  }
  {
    ordered_json inputs;
    inputs["n1"] = n1;
    inputs["n2"] = n2;
    inputs["d"] = ga_point_set_dim(a.get());
    inputs["W_A"] = ga_point_set_total_weight(a.get());
    inputs["W_B"] = ga_point_set_total_weight(b.get());
    inputs["diameters"] =
        ordered_json::array({ga_report_value(raw, GA_REPORT_DIAMETER_A),
                             ga_report_value(raw, GA_REPORT_DIAMETER_B)});
    report["inputs"] = inputs;
  }
  {
    ordered_json compression;
    compression["k"] = k;
    compression["radii"] =
        ordered_json::array({ga_report_value(raw, GA_REPORT_RADIUS_A),
                             ga_report_value(raw, GA_REPORT_RADIUS_B)});
    compression["eps_eff"] = ga_report_value(raw, GA_REPORT_EPS_EFF);
    report["compression"] = compression;
  }
  {
    ordered_json alignment;
    alignment["iterations"] =
        static_cast<std::int64_t>(ga_report_value(raw, GA_REPORT_ITERATIONS));
    alignment["converged"] = ga_report_value(raw, GA_REPORT_CONVERGED) != 0.0;
    const double* trace = ga_report_trace(raw);
    const std::int64_t len = ga_report_trace_length(raw);
    alignment["objective_trace"] =
        ordered_json(std::vector<double>(trace, trace + len));
    report["alignment"] = alignment;
  }
  {
    ordered_json certificates;
    certificates["ineq6_lhs"] = ga_report_value(raw, GA_REPORT_INEQ6_LHS);
    certificates["ineq6_rhs"] = ga_report_value(raw, GA_REPORT_INEQ6_RHS);
    certificates["ineq7_lhs"] = ga_report_value(raw, GA_REPORT_INEQ7_LHS);
    certificates["ineq7_rhs"] = ga_report_value(raw, GA_REPORT_INEQ7_RHS);
    ordered_json results;
    results["emd_full"] = ga_report_value(raw, GA_REPORT_EMD_FULL);
    results["emd_compressed"] =
        ga_report_value(raw, GA_REPORT_EMD_COMPRESSED);
    results["certificates"] = certificates;
    report["results"] = results;
  }
  {
    ordered_json timings;
    timings["compress_ms"] = ga_report_value(raw, GA_REPORT_TIME_COMPRESS_MS);
    timings["align_ms"] = ga_report_value(raw, GA_REPORT_TIME_ALIGN_MS);
    timings["final_emd_ms"] =
        ga_report_value(raw, GA_REPORT_TIME_FINAL_EMD_MS);
    timings["total_ms"] = ga_report_value(raw, GA_REPORT_TIME_TOTAL_MS);
    report["timings"] = timings;
  }
  write_text(args.out, report.dump(2) + "\n");
}

/* ---- sweep ------------------------------------------------------------ */

struct SweepArgs {
  std::string file_a, file_b, out;
  std::vector<double> gammas{1.0 / 50, 1.0 / 40, 1.0 / 30,
                             1.0 / 20, 1.0 / 10, 1.0};
  std::int64_t trials = 3;
  std::uint64_t seed = 0;
  int jobs = 1;
  AlignFlags flags;
};

void run_sweep(const SweepArgs& args_in) {
  SweepArgs args = args_in;
  std::sort(args.gammas.begin(), args.gammas.end());
  for (double g : args.gammas)
    if (!(g > 0.0 && g <= 1.0))
      throw ExitError{kExitUsage, "--gamma values must lie in (0, 1]"};

  PointSet a = load_set(args.file_a);
  PointSet b = load_set(args.file_b);
  const std::int64_t max_n =
      std::max(ga_point_set_size(a.get()), ga_point_set_size(b.get()));

  const std::size_t levels = args.gammas.size();
  const std::size_t trials = static_cast<std::size_t>(args.trials);
  std::vector<RunResult> results(levels * trials);
  run_cells(results.size(), args.jobs, [&](std::size_t cell) {
    const std::size_t level = cell / trials;
    const std::size_t trial = cell % trials;
    const std::int64_t k = k_from_gamma(args.gammas[level], max_n);
    results[cell] = run_alignment(a.get(), b.get(), k,
                                  args.seed + trial, args.flags);
  });
  throw_first_failure(results);

  std::string csv =
      "gamma,trial,k,emd,time_total_ms,time_compress_ms,time_align_ms,"
      "time_final_emd_ms,iterations\n";
  for (std::size_t level = 0; level < levels; ++level) {
    const double gamma = args.gammas[level];
    const std::int64_t k = k_from_gamma(gamma, max_n);
    RunResult mean;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const RunResult& r = results[level * trials + trial];
      csv += fmt(gamma) + "," + std::to_string(trial) + "," +
             std::to_string(k) + "," + fmt(r.emd_full) + "," +
             fmt(r.time_total) + "," + fmt(r.time_compress) + "," +
             fmt(r.time_align) + "," + fmt(r.time_final) + "," +
             fmt(r.iterations) + "\n";
      mean.emd_full += r.emd_full;
      mean.time_total += r.time_total;
      mean.time_compress += r.time_compress;
      mean.time_align += r.time_align;
      mean.time_final += r.time_final;
      mean.iterations += r.iterations;
    }
    const double inv = 1.0 / static_cast<double>(trials);
    csv += fmt(gamma) + ",mean," + std::to_string(k) + "," +
           fmt(mean.emd_full * inv) + "," + fmt(mean.time_total * inv) + "," +
           fmt(mean.time_compress * inv) + "," + fmt(mean.time_align * inv) +
           "," + fmt(mean.time_final * inv) + "," +
           fmt(mean.iterations * inv) + "\n";
  }
  write_text(args.out, csv);
}

/* ---- noise-sweep ------------------------------------------------------ */

struct NoiseSweepArgs {
  std::string file_a, file_b, out;
  std::vector<double> etas{0.005, 0.01, 0.015, 0.02, 0.025};
  double gamma = 0.1;
  std::int64_t trials = 3;
  std::uint64_t seed = 0;
  int jobs = 1;
  AlignFlags flags;
};

void run_noise_sweep(const NoiseSweepArgs& args_in) {
  NoiseSweepArgs args = args_in;
  std::sort(args.etas.begin(), args.etas.end());
  for (double eta : args.etas)
    if (!(eta >= 0.0))
      throw ExitError{kExitUsage, "--eta values must be nonnegative"};
  if (!(args.gamma > 0.0 && args.gamma <= 1.0))
    throw ExitError{kExitUsage, "--gamma must lie in (0, 1]"};

  PointSet a = load_set(args.file_a);
  PointSet b = load_set(args.file_b);
  const std::int64_t max_n =
      std::max(ga_point_set_size(a.get()), ga_point_set_size(b.get()));
  const std::int64_t k_compressed = k_from_gamma(args.gamma, max_n);
  const std::int64_t k_baseline = max_n;

  // One cell per (eta, trial); each runs the compressed and the baseline
  // alignment on the same corrupted instance.
  struct Cell {
    RunResult compressed;
    RunResult baseline;
  };
  const std::size_t levels = args.etas.size();
  const std::size_t trials = static_cast<std::size_t>(args.trials);
  std::vector<Cell> cells(levels * trials);
  run_cells(cells.size(), args.jobs, [&](std::size_t cell) {
    const std::size_t level = cell / trials;
    const std::size_t trial = cell % trials;
    const double eta = args.etas[level];
    const std::uint64_t trial_seed = args.seed + trial;
    Cell& out = cells[cell];

    ga_point_set* raw = nullptr;
    ga_status s = ga_add_noise(a.get(), eta,
                               ga_derive_seed(trial_seed + 1, 101), &raw);
    if (s != GA_OK) {
      out.compressed.status = s;
      out.compressed.error = ga_last_error();
      return;
    }
    PointSet noised_a(raw);
    raw = nullptr;
    s = ga_add_noise(b.get(), eta, ga_derive_seed(trial_seed + 1, 102), &raw);
    if (s != GA_OK) {
      out.compressed.status = s;
      out.compressed.error = ga_last_error();
      return;
    }
    PointSet noised_b(raw);

    out.compressed = run_alignment(noised_a.get(), noised_b.get(),
                                   k_compressed, trial_seed, args.flags);
    if (out.compressed.status != GA_OK) return;
    out.baseline = run_alignment(noised_a.get(), noised_b.get(), k_baseline,
                                 trial_seed, args.flags);
  });
  for (const auto& cell : cells) {
    if (cell.compressed.status != GA_OK)
      throw ExitError{exit_code_of(cell.compressed.status),
                      cell.compressed.error};
    if (cell.baseline.status != GA_OK)
      throw ExitError{exit_code_of(cell.baseline.status), cell.baseline.error};
  }

  std::string csv = "eta,emd_compressed,emd_baseline,ratio\n";
  for (std::size_t level = 0; level < levels; ++level) {
    double sum_compressed = 0.0, sum_baseline = 0.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      sum_compressed += cells[level * trials + trial].compressed.emd_full;
      sum_baseline += cells[level * trials + trial].baseline.emd_full;
    }
    const double inv = 1.0 / static_cast<double>(trials);
    const double mean_compressed = sum_compressed * inv;
    const double mean_baseline = sum_baseline * inv;
    csv += fmt(args.etas[level]) + "," + fmt(mean_compressed) + "," +
           fmt(mean_baseline) + "," + fmt(mean_compressed / mean_baseline) +
           "\n";
  }
  write_text(args.out, csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted point-set alignment with farthest-point compression"};
  app.require_subcommand(1);

  GenManifoldArgs gen_manifold;
  ga_manifold_spec_default(&gen_manifold.spec);
  GenHypercubeArgs gen_hypercube;
  NoiseArgs noise;
  EmdArgs emd;
  AlignArgs align;
  SweepArgs sweep;
  NoiseSweepArgs noise_sweep;

  auto* gen = app.add_subcommand("gen", "Generate synthetic instances");
  gen->require_subcommand(1);
  {
    auto* cmd = gen->add_subcommand(
        "manifold", "Sample two random low-dimensional polynomial surfaces");
    cmd->add_option("out_a", gen_manifold.out_a, "Output file for the first set")
        ->required();
    cmd->add_option("out_b", gen_manifold.out_b,
                    "Output file for the second set")
        ->required();
    cmd->add_option("--latent-dim", gen_manifold.spec.latent_dim,
                    "Intrinsic dimension of the surfaces")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--d", gen_manifold.spec.ambient_dim,
                    "Ambient dimension")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--degree", gen_manifold.spec.degree,
                    "Max total degree of the polynomial maps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--n1", gen_manifold.spec.n1, "Size of the first set")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--n2", gen_manifold.spec.n2, "Size of the second set")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--weight-low", gen_manifold.spec.weight_low,
                    "Weights are uniform in (weight-low, weight-high]")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--weight-high", gen_manifold.spec.weight_high,
                    "Upper end of the weight range")
        ->capture_default_str();
    cmd->add_option("--seed", gen_manifold.spec.seed, "Random seed")
        ->capture_default_str();
    cmd->callback([&] { run_gen_manifold(gen_manifold); });
  }
  {
    auto* cmd = gen->add_subcommand(
        "hypercube",
        "Sample a randomly rotated low-dimensional unit cube");
    cmd->add_option("out", gen_hypercube.out, "Output file")->required();
    cmd->add_option("--rho", gen_hypercube.rho, "Intrinsic dimension")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--d", gen_hypercube.d, "Ambient dimension")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--n", gen_hypercube.n, "Number of samples")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", gen_hypercube.seed, "Random seed")
        ->capture_default_str();
    cmd->callback([&] { run_gen_hypercube(gen_hypercube); });
  }
  {
    auto* cmd = app.add_subcommand(
        "noise", "Add Gaussian noise scaled by the set diameter");
    cmd->add_option("input", noise.input, "Input point-set file")->required();
    cmd->add_option("output", noise.output, "Output point-set file")
        ->required();
    cmd->add_option("--eta", noise.eta,
                    "Noise standard deviation as a fraction of the diameter")
        ->required()
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", noise.seed, "Random seed")
        ->capture_default_str();
    cmd->callback([&] { run_noise(noise); });
  }
  {
    auto* cmd = app.add_subcommand(
        "emd", "Exact transport distance between two point sets");
    cmd->add_option("file_a", emd.file_a, "First point-set file")->required();
    cmd->add_option("file_b", emd.file_b, "Second point-set file")->required();
    cmd->add_option("--out", emd.out, "Write the optimal flow to this file");
    cmd->callback([&] { run_emd(emd); });
  }
  {
    auto* cmd = app.add_subcommand(
        "align", "Align two point sets and write a JSON report");
    cmd->add_option("file_a", align.file_a, "First point-set file")
        ->required();
    cmd->add_option("file_b", align.file_b, "Second point-set file")
        ->required();
    auto* gamma_opt =
        cmd->add_option("--gamma", align.gamma,
                        "Compress to ceil(gamma * max(n1, n2)) centers")
            ->capture_default_str();
    auto* eps_opt = cmd->add_option(
        "--epsilon", align.epsilon,
        "Target radius as a fraction of the diameter (needs --rho)");
    auto* rho_opt = cmd->add_option(
        "--rho", align.rho, "Doubling-dimension estimate for --epsilon");
    auto* k_opt =
        cmd->add_option("--k", align.k, "Compress to exactly k centers")
            ->check(CLI::PositiveNumber);
    gamma_opt->excludes(eps_opt)->excludes(k_opt)->excludes(rho_opt);
    eps_opt->excludes(k_opt)->needs(rho_opt);
    rho_opt->needs(eps_opt);
    k_opt->excludes(rho_opt);
    cmd->add_option("--seed", align.seed, "Random seed for the compressions")
        ->capture_default_str();
    add_align_flags(cmd, align.flags);
    cmd->add_option("--out", align.out,
                    "Report file (stdout when omitted)");
    cmd->callback([&] {
      align.gamma_given = gamma_opt->count() > 0;
      align.epsilon_given = eps_opt->count() > 0;
      align.k_given = k_opt->count() > 0;
      run_align(align);
    });
  }
  {
    auto* cmd = app.add_subcommand(
        "sweep", "Tabulate objective and timings over compression levels");
    cmd->add_option("file_a", sweep.file_a, "First point-set file")
        ->required();
    cmd->add_option("file_b", sweep.file_b, "Second point-set file")
        ->required();
    cmd->add_option("--gamma", sweep.gammas,
                    "Compression levels in (0, 1]; 1 is the baseline");
    cmd->add_option("--trials", sweep.trials,
                    "Runs per level (seeds base-seed + 0, 1, ...)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", sweep.seed, "Base random seed")
        ->capture_default_str();
    cmd->add_option("--jobs", sweep.jobs, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_align_flags(cmd, sweep.flags);
    cmd->add_option("--out", sweep.out, "CSV file (stdout when omitted)");
    cmd->callback([&] { run_sweep(sweep); });
  }
  {
    auto* cmd = app.add_subcommand(
        "noise-sweep",
        "Compare compressed vs baseline objective under growing noise");
    cmd->add_option("file_a", noise_sweep.file_a, "First point-set file")
        ->required();
    cmd->add_option("file_b", noise_sweep.file_b, "Second point-set file")
        ->required();
    cmd->add_option("--eta", noise_sweep.etas,
                    "Noise levels as fractions of the diameter");
    cmd->add_option("--gamma", noise_sweep.gamma,
                    "Compression level for the compressed runs")
        ->capture_default_str();
    cmd->add_option("--trials", noise_sweep.trials, "Runs per noise level")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", noise_sweep.seed, "Base random seed")
        ->capture_default_str();
    cmd->add_option("--jobs", noise_sweep.jobs, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_align_flags(cmd, noise_sweep.flags);
    cmd->add_option("--out", noise_sweep.out,
                    "CSV file (stdout when omitted)");
    cmd->callback([&] { run_noise_sweep(noise_sweep); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  } catch (const ExitError& e) {
    std::cerr << "galign: " << e.message << '\n';
    return e.code;
  }
  return 0;
}
