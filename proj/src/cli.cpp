#include "rpca/cli.hpp"

#include "rpca/baselines.hpp"
#include "rpca/bench.hpp"
#include "rpca/errors.hpp"
#include "rpca/io.hpp"
#include "rpca/pb_solver.hpp"
#include "rpca/synthgen.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace rpca::cli {

namespace {

// Argument problems detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_real(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw UsageError("malformed " + what + " '" + s + "'");
  }
  return v;
}

// "a:b:step" (inclusive) or a single value.
std::vector<double> parse_grid(const std::string& s, const std::string& what) {
  std::vector<std::string> parts;
  for (std::size_t p = 0;;) {
    const std::size_t c = s.find(':', p);
    parts.push_back(s.substr(p, c == std::string::npos ? std::string::npos : c - p));
    if (c == std::string::npos) break;
    p = c + 1;
  }
  if (parts.size() == 1) return {parse_real(parts[0], what)};
  if (parts.size() != 3) throw UsageError(what + " must be a:b:step, got '" + s + "'");
  const double a = parse_real(parts[0], what), b = parse_real(parts[1], what),
               step = parse_real(parts[2], what);
  if (!(step > 0.0) || b < a) throw UsageError(what + " needs step > 0 and b >= a");
  std::vector<double> g;
  for (long k = 0;; ++k) {
    const double v = std::round((a + k * step) * 1e12) / 1e12;
    if (v > b + 1e-9 * step) break;
    g.push_back(v);
    if (g.size() > 100000) throw UsageError(what + " has too many points");
  }
  return g;
}

std::vector<Method> parse_methods(const std::string& s) {
  std::vector<Method> out;
  for (std::size_t p = 0;;) {
    const std::size_t c = s.find(',', p);
    const std::string tok = s.substr(p, c == std::string::npos ? std::string::npos : c - p);
    try {
      out.push_back(parse_method(tok));
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    if (c == std::string::npos) break;
    p = c + 1;
  }
  return out;
}

int default_jobs() {
  if (const char* env = std::getenv("RPCA_JOBS")) {
    int v = 0;
    const std::string s(env);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec == std::errc() && r.ptr == s.data() + s.size() && v >= 1) return v;
  }
  return 1;
}

// ------------------------------------------------------------------- gen

struct GenArgs {
  std::string type = "a";
  long long n = 100, m = 100, rank = 5;
  double rho = 0.1;
  std::optional<double> mag_lo, mag_hi;
  std::uint64_t seed = 0;
  std::string prefix;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  SyntheticSpec spec;
  try {
    spec.kind = parse_data_kind(a.type);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  spec.n = a.n;
  spec.m = a.m;
  spec.rank = spec.kind == DataKind::Hard ? 1 : a.rank;
  spec.rho = a.rho;
  std::tie(spec.outlier_lo, spec.outlier_hi) = default_outlier_range(spec.kind);
  if (a.mag_lo) spec.outlier_lo = *a.mag_lo;
  if (a.mag_hi) spec.outlier_hi = *a.mag_hi;
  spec.seed = a.seed;
  try {
    spec.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const SyntheticInstance inst = generate(spec);
  const std::string meta = "type=" + std::string(to_string(spec.kind)) +
                           " n=" + std::to_string(spec.n) + " m=" + std::to_string(spec.m) +
                           " rank=" + std::to_string(spec.rank) + " rho=" + format_real(spec.rho) +
                           " mag=[" + format_real(spec.outlier_lo) + "," +
                           format_real(spec.outlier_hi) + "] seed=" + std::to_string(spec.seed);
  write_matrix(a.prefix + ".y", inst.y, meta);
  write_matrix(a.prefix + ".z", inst.z_gt, meta);
  write_matrix(a.prefix + ".e", inst.e_gt, meta);
  write_support(a.prefix + ".omega", inst.support);
  out << "wrote " << a.prefix << ".{y,z,e,omega} " << meta << "\n";
  return kOk;
}

// ----------------------------------------------------------------- solve

struct SolveArgs {
  std::string method;
  std::string in, out_z, out_e, omega;
  std::optional<double> lambda, tol;
  std::optional<int> max_iters;
  std::string gamma_variant = "esq";
  bool strict = false;
};

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  Method method;
  GammaUpdate variant;
  try {
    method = parse_method(a.method);
    variant = parse_gamma_update(a.gamma_variant);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (method == Method::Mc && a.omega.empty()) throw UsageError("--method mc requires --omega");
  if (a.lambda && !(*a.lambda > 0.0)) throw UsageError("--lambda must be positive");
  if (a.tol && !(*a.tol > 0.0)) throw UsageError("--tol must be positive");
  if (a.max_iters && *a.max_iters < 1) throw UsageError("--max-iters must be >= 1");

  const Matrix y = read_matrix(a.in);
  std::optional<SupportMask> omega;
  if (!a.omega.empty()) omega = read_support(a.omega, y.rows(), y.cols());

  Matrix z, e;
  int iters = 0;
  bool converged = false;
  std::string extra;
  try {
    switch (method) {
      case Method::Pb:
      case Method::PbNoSym: {
        SolverConfig cfg;
        cfg.symmetric = method == Method::Pb;
        cfg.gamma_update = variant;
        if (a.lambda) cfg.lambda = *a.lambda;
        if (a.tol) cfg.outer_tol = *a.tol;
        if (a.max_iters) cfg.max_outer_iters = *a.max_iters;
        Decomposition d = solve(y, cfg);
        z = std::move(d.z);
        e = std::move(d.e);
        iters = d.outer_iters;
        converged = d.converged;
        extra = " admm_iters=" + std::to_string(d.admm_iters);
        break;
      }
      case Method::Pcp: {
        PcpResult r = pcp_alm(y, a.lambda.value_or(0.0), a.tol.value_or(1e-7),
                              a.max_iters.value_or(1000));
        z = std::move(r.z);
        e = std::move(r.e);
        iters = r.iterations;
        converged = r.converged;
        break;
      }
      case Method::Mc: {
        McResult r = mc_alm(y, *omega, a.tol.value_or(1e-7), a.max_iters.value_or(2000));
        z = std::move(r.z);
        e = y - z;
        iters = r.iterations;
        converged = r.converged;
        extra = " max_violation=" + format_real(r.max_violation);
        break;
      }
      case Method::PbTrace: {
        TraceVariantResult r = trace_variant_solve(y, a.lambda.value_or(0.1), a.tol.value_or(1e-14),
                                                   a.max_iters.value_or(20000));
        z = r.state.z_c + r.state.z_r;
        e = std::move(r.state.e);
        iters = r.iterations;
        converged = r.converged;
        extra = " objective=" + format_real(r.objective);
        break;
      }
    }
  } catch (const IoError&) {
    throw;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kNumerical;
  }
  write_matrix(a.out_z, z, "method=" + a.method);
  if (!a.out_e.empty()) write_matrix(a.out_e, e, "method=" + a.method);
  out << "method=" << a.method << " iters=" << iters
      << " converged=" << (converged ? "true" : "false") << extra << "\n";
  return a.strict && !converged ? kNotConverged : kOk;
}

// ----------------------------------------------------------------- bench

struct BenchArgs {
  std::string grid_rho;
  std::string grid_rank;
  long long n = 100, m = 100;
  int trials = 10;
  std::string methods = "pb,pcp";
  std::string data = "a";
  std::uint64_t seed = 0;
  std::string out;
  std::string grid_out;
  std::optional<int> jobs;
  double threshold = 1e-3;
  double lambda = 1e-6;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  SweepSpec spec;
  spec.n = a.n;
  spec.m = a.m;
  spec.rho_grid = a.grid_rho.empty() ? default_rho_grid() : parse_grid(a.grid_rho, "--grid-rho");
  spec.rank_ratio_grid =
      a.grid_rank.empty() ? default_rank_ratio_grid() : parse_grid(a.grid_rank, "--grid-rank");
  spec.trials_per_cell = a.trials;
  spec.methods = parse_methods(a.methods);
  try {
    spec.data_kind = parse_data_kind(a.data);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  spec.base_seed = a.seed;
  spec.success_threshold = a.threshold;
  spec.pb.lambda = a.lambda;
  const int jobs = a.jobs.value_or(default_jobs());
  if (jobs < 1) throw UsageError("--jobs must be >= 1");
  try {
    spec.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const SweepResult res = run_sweep(spec, jobs);
  write_results_csv(res.rows, a.out);
  if (!a.grid_out.empty()) {
    std::string grids;
    for (const auto& [method, rates] : res.success_rate) {
      grids += "# method=" + method + "\n" + render_success_grid(spec, rates) + "\n\n";
    }
    write_file_atomic(a.grid_out, grids);
  }
  out << "cells=" << spec.rho_grid.size() * spec.rank_ratio_grid.size()
      << " trials=" << spec.trials_per_cell << " rows=" << res.rows.size() << " out=" << a.out
      << "\n";
  return kOk;
}

// --------------------------------------------------------------- compare

int cmd_compare(const std::string& pa, const std::string& pb, std::ostream& out) {
  const Matrix a = read_matrix(pa);
  const Matrix b = read_matrix(pb);
  double v = 0.0;
  try {
    v = nrmse(b, a);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  out << "nrmse=" << format_real(v) << "\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust PCA laboratory: pseudo-Bayesian RPCA and convex baselines"};
  app.require_subcommand(1);

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "generate a synthetic instance");
  gen->add_option("--type", ga.type, "a | b | hard")->default_val("a");
  gen->add_option("--n", ga.n, "rows")->default_val(100);
  gen->add_option("--m", ga.m, "columns")->default_val(100);
  gen->add_option("--rank", ga.rank, "rank of Z (ignored for hard)")->default_val(5);
  gen->add_option("--rho", ga.rho, "outlier probability")->default_val(0.1);
  gen->add_option("--mag-lo", ga.mag_lo, "outlier lower bound");
  gen->add_option("--mag-hi", ga.mag_hi, "outlier upper bound");
  gen->add_option("--seed", ga.seed, "64-bit seed")->default_val(0);
  gen->add_option("--out-prefix", ga.prefix, "output prefix")->required();

  SolveArgs sa;
  auto* sol = app.add_subcommand("solve", "decompose Y = Z + E");
  sol->add_option("--method", sa.method, "pb | pb-nosym | pb-trace | pcp | mc")->required();
  sol->add_option("--in", sa.in, "observation matrix file")->required();
  sol->add_option("--out-z", sa.out_z, "low-rank output")->required();
  sol->add_option("--out-e", sa.out_e, "sparse output");
  sol->add_option("--omega", sa.omega, "support file (mc)");
  sol->add_option("--lambda", sa.lambda, "noise variance / regularization weight");
  sol->add_option("--tol", sa.tol, "stopping tolerance");
  sol->add_option("--max-iters", sa.max_iters, "iteration cap");
  sol->add_option("--gamma-variant", sa.gamma_variant, "paper | esq | esq-half")->default_val("esq");
  sol->add_flag("--strict", sa.strict, "exit 4 when the solver did not converge");

  BenchArgs ba;
  auto* ben = app.add_subcommand("bench", "phase-transition sweep");
  ben->add_option("--grid-rho", ba.grid_rho, "a:b:step (default 0.05:0.5:0.05)");
  ben->add_option("--grid-rank", ba.grid_rank, "a:b:step (default 0.025, then 0.05:0.5:0.05)");
  ben->add_option("--n", ba.n)->default_val(100);
  ben->add_option("--m", ba.m)->default_val(100);
  ben->add_option("--trials", ba.trials)->default_val(10);
  ben->add_option("--methods", ba.methods, "comma list of pb,pb-nosym,pcp,mc,pb-trace")
      ->default_val(ba.methods);
  ben->add_option("--data", ba.data, "a | b | hard")->default_val("a");
  ben->add_option("--seed", ba.seed)->default_val(0);
  ben->add_option("--out", ba.out, "results CSV")->required();
  ben->add_option("--grid-out", ba.grid_out, "tab-separated success grids");
  ben->add_option("--jobs", ba.jobs, "worker threads (default $RPCA_JOBS or 1)");
  ben->add_option("--threshold", ba.threshold, "NRMSE success threshold")->default_val(1e-3);
  ben->add_option("--lambda", ba.lambda, "PB noise variance")->default_val(1e-6);

  std::string ca, cb;
  auto* cmp = app.add_subcommand("compare", "print NRMSE of --b against reference --a");
  cmp->add_option("--a", ca, "reference matrix")->required();
  cmp->add_option("--b", cb, "estimate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*gen) return cmd_gen(ga, out);
    if (*sol) return cmd_solve(sa, out, err);
    if (*ben) return cmd_bench(ba, out);
    if (*cmp) return cmd_compare(ca, cb, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace rpca::cli
