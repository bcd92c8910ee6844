#pragma once

// Recovery metrics and the phase-transition sweep.
//
// A sweep visits every (rho, rank_ratio) cell and trial. Cell ids are
// rho_index * rank_ratio_grid.size() + rank_index; the instance seed is
// derive_seed(base_seed, cell_id, trial) and rank = max(1,
// round(rank_ratio * min(n, m))). Every method of a trial sees the same Y.

#include "rpca/pb_solver.hpp"
#include "rpca/synthgen.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rpca {

enum class Method { Pb, PbNoSym, Pcp, Mc, PbTrace };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);  // pb, pb-nosym, pcp, mc, pb-trace

// ||z_hat - z_gt||_F / ||z_gt||_F. Throws DomainError for zero z_gt.
double nrmse(const Matrix& z_hat, const Matrix& z_gt);

struct SupportScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Detected set {|e_hat| > threshold} against the nonzero set of e_gt. An
// empty detected set has precision 1, an empty true set recall 1.
SupportScore support_f1(const Matrix& e_hat, const Matrix& e_gt, double threshold);

struct SweepSpec {
  Eigen::Index n = 100;
  Eigen::Index m = 100;
  std::vector<double> rho_grid;
  std::vector<double> rank_ratio_grid;
  int trials_per_cell = 10;
  std::vector<Method> methods{Method::Pb, Method::Pcp};
  DataKind data_kind = DataKind::TypeA;
  std::uint64_t base_seed = 0;
  double success_threshold = 1e-3;

  SolverConfig pb;             // used by pb and pb-nosym (symmetric is overridden)
  double trace_lambda = 1e-3;  // pb-trace regularization

  void validate() const;
};

// Default axes: rho 0.05..0.50 step 0.05; rank ratio 0.025, 0.05..0.50 step 0.05.
std::vector<double> default_rho_grid();
std::vector<double> default_rank_ratio_grid();

struct CellResult {
  std::string method;
  double rho = 0.0;
  double rank_ratio = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double nrmse = 0.0;
  bool success = false;
  int outer_iters = 0;
  double seconds = 0.0;
};

Eigen::Index rank_for_ratio(double rank_ratio, Eigen::Index n, Eigen::Index m);
std::uint64_t cell_id(const SweepSpec& spec, std::size_t rho_index, std::size_t rank_index);
SyntheticInstance cell_instance(const SweepSpec& spec, std::size_t rho_index,
                                std::size_t rank_index, int trial);

// One trial of one cell, every configured method. Solver failures become
// nrmse = +inf, success = false.
std::vector<CellResult> run_cell(const SweepSpec& spec, std::size_t rho_index,
                                 std::size_t rank_index, int trial);

struct SweepResult {
  std::vector<CellResult> rows;  // sorted by (method, rho, rank_ratio, trial)
  // method -> success rate, rows follow rho_grid, columns rank_ratio_grid
  std::map<std::string, Matrix> success_rate;
};

// Sorts rows and recomputes success rates against the spec's grids.
SweepResult aggregate(const SweepSpec& spec, std::vector<CellResult> rows);

// Runs every cell and trial on a pool of `jobs` worker threads. Inside a
// worker the OpenMP kernels run single-threaded when jobs > 1.
SweepResult run_sweep(const SweepSpec& spec, int jobs);

inline constexpr std::string_view kResultsHeader =
    "method,rho,rank_ratio,trial,seed,nrmse,success,outer_iters,seconds";

std::string render_results_csv(const std::vector<CellResult>& rows);
std::vector<CellResult> parse_results_csv(std::string_view text,
                                          const std::string& origin = "<string>");
void write_results_csv(const std::vector<CellResult>& rows, const std::string& path);
std::vector<CellResult> read_results_csv(const std::string& path);

// Tab-separated success grid for one method: a '#' header naming the
// rank-ratio columns, then one line per rho with the rho value first.
std::string render_success_grid(const SweepSpec& spec, const Matrix& rates);

}  // namespace rpca
