#include "rpca/bench.hpp"

#include "rpca/baselines.hpp"
#include "rpca/errors.hpp"
#include "rpca/io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rpca {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Pb:
      return "pb";
    case Method::PbNoSym:
      return "pb-nosym";
    case Method::Pcp:
      return "pcp";
    case Method::Mc:
      return "mc";
    case Method::PbTrace:
      return "pb-trace";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  for (Method m : {Method::Pb, Method::PbNoSym, Method::Pcp, Method::Mc, Method::PbTrace}) {
    if (s == to_string(m)) return m;
  }
  throw DomainError("unknown method '" + std::string(s) + "'");
}

double nrmse(const Matrix& z_hat, const Matrix& z_gt) {
  require_same_shape(z_hat, z_gt, "nrmse");
  const double base = z_gt.norm();
  if (!(base > 0.0)) throw DomainError("nrmse reference is zero");
  return (z_hat - z_gt).norm() / base;
}

SupportScore support_f1(const Matrix& e_hat, const Matrix& e_gt, double threshold) {
  require_same_shape(e_hat, e_gt, "support_f1");
  if (!(threshold > 0.0)) throw DomainError("support_f1 threshold must be positive");
  long long tp = 0, detected = 0, truth = 0;
  for (Eigen::Index k = 0; k < e_hat.size(); ++k) {
    const bool d = std::abs(e_hat.data()[k]) > threshold;
    const bool t = e_gt.data()[k] != 0.0;
    detected += d;
    truth += t;
    tp += d && t;
  }
  SupportScore s;
  s.precision = detected ? static_cast<double>(tp) / detected : 1.0;
  s.recall = truth ? static_cast<double>(tp) / truth : 1.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                      : 0.0;
  return s;
}

void SweepSpec::validate() const {
  if (n < 1 || m < 1) throw DomainError("sweep n and m must be positive");
  if (rho_grid.empty() || rank_ratio_grid.empty()) throw DomainError("sweep grids are empty");
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] > 0.0 && rho_grid[i] < 1.0)) throw DomainError("rho outside (0, 1)");
    if (i && !(rho_grid[i] > rho_grid[i - 1])) throw DomainError("rho grid not ascending");
  }
  for (std::size_t i = 0; i < rank_ratio_grid.size(); ++i) {
    const double r = rank_ratio_grid[i];
    if (!(r > 0.0 && r <= 1.0)) throw DomainError("rank ratio outside (0, 1]");
    if (i && !(r > rank_ratio_grid[i - 1])) throw DomainError("rank ratio grid not ascending");
  }
  if (trials_per_cell < 1) throw DomainError("trials_per_cell must be >= 1");
  if (methods.empty()) throw DomainError("no methods selected");
  if (!(success_threshold > 0.0)) throw DomainError("success_threshold must be positive");
  pb.validate();
}

std::vector<double> default_rho_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 10; ++k) g.push_back(k / 20.0);
  return g;
}

std::vector<double> default_rank_ratio_grid() {
  std::vector<double> g{0.025};
  for (int k = 1; k <= 10; ++k) g.push_back(k / 20.0);
  return g;
}

Eigen::Index rank_for_ratio(double rank_ratio, Eigen::Index n, Eigen::Index m) {
  const auto r = static_cast<Eigen::Index>(std::llround(rank_ratio * static_cast<double>(std::min(n, m))));
  return std::clamp<Eigen::Index>(r, 1, std::min(n, m));
}

std::uint64_t cell_id(const SweepSpec& spec, std::size_t rho_index, std::size_t rank_index) {
  return static_cast<std::uint64_t>(rho_index * spec.rank_ratio_grid.size() + rank_index);
}

SyntheticInstance cell_instance(const SweepSpec& spec, std::size_t rho_index,
                                std::size_t rank_index, int trial) {
  SyntheticSpec s;
  s.kind = spec.data_kind;
  s.n = spec.n;
  s.m = spec.m;
  s.rank = rank_for_ratio(spec.rank_ratio_grid.at(rank_index), spec.n, spec.m);
  s.rho = spec.rho_grid.at(rho_index);
  std::tie(s.outlier_lo, s.outlier_hi) = default_outlier_range(spec.data_kind);
  s.seed = derive_seed(spec.base_seed, cell_id(spec, rho_index, rank_index),
                       static_cast<std::uint64_t>(trial));
  return generate(s);
}

namespace {

std::uint64_t checksum(const Matrix& y) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  const auto* p = reinterpret_cast<const unsigned char*>(y.data());
  for (std::size_t i = 0; i < sizeof(double) * static_cast<std::size_t>(y.size()); ++i) {
    h = (h ^ p[i]) * 0x100000001B3ULL;
  }
  return h;
}

struct Outcome {
  Matrix z;
  int iters = 0;
};

Outcome run_method(Method method, const SweepSpec& spec, const SyntheticInstance& inst) {
  switch (method) {
    case Method::Pb:
    case Method::PbNoSym: {
      SolverConfig cfg = spec.pb;
      cfg.symmetric = method == Method::Pb;
      Decomposition d = solve(inst.y, cfg);
      return {std::move(d.z), d.outer_iters};
    }
    case Method::Pcp: {
      PcpResult r = pcp_alm(inst.y);
      return {std::move(r.z), r.iterations};
    }
    case Method::Mc: {
      McResult r = mc_alm(inst.y, inst.support);
      return {std::move(r.z), r.iterations};
    }
    case Method::PbTrace: {
      TraceVariantResult r = trace_variant_solve(inst.y, spec.trace_lambda);
      return {r.state.z_c + r.state.z_r, r.iterations};
    }
  }
  throw DomainError("unknown method");
}

}  // namespace

std::vector<CellResult> run_cell(const SweepSpec& spec, std::size_t rho_index,
                                 std::size_t rank_index, int trial) {
  const SyntheticInstance inst = cell_instance(spec, rho_index, rank_index, trial);
  const std::uint64_t sum = checksum(inst.y);
  std::vector<CellResult> out;
  for (Method method : spec.methods) {
    CellResult r;
    r.method = std::string(to_string(method));
    r.rho = spec.rho_grid[rho_index];
    r.rank_ratio = spec.rank_ratio_grid[rank_index];
    r.trial = trial;
    r.seed = inst.spec.seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Outcome o = run_method(method, spec, inst);
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      r.nrmse = nrmse(o.z, inst.z_gt);
      r.outer_iters = o.iters;
    } catch (const Error&) {
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      r.nrmse = std::numeric_limits<double>::infinity();
    }
    if (std::isnan(r.nrmse)) r.nrmse = std::numeric_limits<double>::infinity();
    r.success = r.nrmse < spec.success_threshold;
    if (checksum(inst.y) != sum) throw std::logic_error("observation modified by a solver");
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

bool row_less(const CellResult& a, const CellResult& b) {
  return std::tie(a.method, a.rho, a.rank_ratio, a.trial) <
         std::tie(b.method, b.rho, b.rank_ratio, b.trial);
}

std::ptrdiff_t grid_index(const std::vector<double>& grid, double v) {
  const auto it = std::find(grid.begin(), grid.end(), v);
  return it == grid.end() ? -1 : it - grid.begin();
}

}  // namespace

SweepResult aggregate(const SweepSpec& spec, std::vector<CellResult> rows) {
  std::sort(rows.begin(), rows.end(), row_less);
  SweepResult res;
  std::map<std::string, Matrix> counts;
  const auto nr = static_cast<Eigen::Index>(spec.rho_grid.size());
  const auto nk = static_cast<Eigen::Index>(spec.rank_ratio_grid.size());
  for (const CellResult& r : rows) {
    const auto i = grid_index(spec.rho_grid, r.rho);
    const auto j = grid_index(spec.rank_ratio_grid, r.rank_ratio);
    if (i < 0 || j < 0) continue;
    auto [it, fresh] = res.success_rate.try_emplace(r.method, Matrix::Zero(nr, nk));
    auto [ct, fresh2] = counts.try_emplace(r.method, Matrix::Zero(nr, nk));
    it->second(i, j) += r.success ? 1.0 : 0.0;
    ct->second(i, j) += 1.0;
  }
  for (auto& [method, rate] : res.success_rate) {
    const Matrix& c = counts[method];
    for (Eigen::Index k = 0; k < rate.size(); ++k) {
      rate.data()[k] = c.data()[k] > 0.0 ? rate.data()[k] / c.data()[k] : 0.0;
    }
  }
  res.rows = std::move(rows);
  return res;
}

SweepResult run_sweep(const SweepSpec& spec, int jobs) {
  spec.validate();
  if (jobs < 1) throw DomainError("jobs must be >= 1");

  struct Item {
    std::size_t rho, rank;
    int trial;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < spec.rho_grid.size(); ++i) {
    for (std::size_t j = 0; j < spec.rank_ratio_grid.size(); ++j) {
      for (int t = 0; t < spec.trials_per_cell; ++t) items.push_back({i, j, t});
    }
  }
  std::vector<std::vector<CellResult>> slots(items.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  const auto worker = [&] {
#ifdef _OPENMP
    if (jobs > 1) omp_set_num_threads(1);
#endif
    for (std::size_t k; (k = next.fetch_add(1)) < items.size();) {
      try {
        slots[k] = run_cell(spec, items[k].rho, items[k].rank, items[k].trial);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int nthreads = static_cast<int>(std::min<std::size_t>(jobs, std::max<std::size_t>(items.size(), 1)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<CellResult> rows;
  for (auto& s : slots) {
    for (auto& r : s) rows.push_back(std::move(r));
  }
  return aggregate(spec, std::move(rows));
}

// ---------------------------------------------------------------------- CSV

std::string render_results_csv(const std::vector<CellResult>& rows) {
  std::vector<CellResult> sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(), row_less);
  std::string out(kResultsHeader);
  out += '\n';
  for (const CellResult& r : sorted) {
    out += r.method;
    out += ',' + format_real(r.rho);
    out += ',' + format_real(r.rank_ratio);
    out += ',' + std::to_string(r.trial);
    out += ',' + std::to_string(r.seed);
    out += ',' + format_real(r.nrmse);
    out += r.success ? ",1" : ",0";
    out += ',' + std::to_string(r.outer_iters);
    out += ',' + format_real(r.seconds);
    out += '\n';
  }
  return out;
}

namespace {

template <typename T>
T parse_field(std::string_view f, const std::string& origin, std::size_t line) {
  T v{};
  const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
  if (r.ec != std::errc() || r.ptr != f.data() + f.size()) {
    if constexpr (std::is_floating_point_v<T>) {
      if (f == "inf") return std::numeric_limits<T>::infinity();
    }
    throw IoError("bad field '" + std::string(f) + "' on line " + std::to_string(line), origin);
  }
  return v;
}

}  // namespace

std::vector<CellResult> parse_results_csv(std::string_view text, const std::string& origin) {
  std::vector<CellResult> rows;
  std::size_t pos = 0, line = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view l = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line;
    if (header) {
      if (l != kResultsHeader) throw IoError("unexpected CSV header", origin);
      header = false;
      continue;
    }
    if (l.empty()) continue;
    std::vector<std::string_view> f;
    for (std::size_t s = 0;;) {
      const std::size_t c = l.find(',', s);
      f.push_back(l.substr(s, c == std::string_view::npos ? std::string_view::npos : c - s));
      if (c == std::string_view::npos) break;
      s = c + 1;
    }
    if (f.size() != 9) throw IoError("expected 9 fields on line " + std::to_string(line), origin);
    CellResult r;
    r.method = std::string(f[0]);
    r.rho = parse_field<double>(f[1], origin, line);
    r.rank_ratio = parse_field<double>(f[2], origin, line);
    r.trial = parse_field<int>(f[3], origin, line);
    r.seed = parse_field<std::uint64_t>(f[4], origin, line);
    r.nrmse = parse_field<double>(f[5], origin, line);
    r.success = parse_field<int>(f[6], origin, line) != 0;
    r.outer_iters = parse_field<int>(f[7], origin, line);
    r.seconds = parse_field<double>(f[8], origin, line);
    rows.push_back(std::move(r));
  }
  if (header) throw IoError("missing CSV header", origin);
  return rows;
}

void write_results_csv(const std::vector<CellResult>& rows, const std::string& path) {
  write_file_atomic(path, render_results_csv(rows));
}

std::vector<CellResult> read_results_csv(const std::string& path) {
  return parse_results_csv(read_file(path), path);
}

std::string render_success_grid(const SweepSpec& spec, const Matrix& rates) {
  std::string out = "# rho\\rank_ratio";
  for (double r : spec.rank_ratio_grid) out += '\t' + format_real(r);
  out += '\n';
  for (Eigen::Index i = 0; i < rates.rows(); ++i) {
    out += format_real(spec.rho_grid[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < rates.cols(); ++j) out += '\t' + format_real(rates(i, j));
    out += '\n';
  }
  return out;
}

}  // namespace rpca
