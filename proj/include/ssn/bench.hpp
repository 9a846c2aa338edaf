#pragma once

// Benchmark experiments on generated QP instances, solved with the
// known-solution stopping rule ||u - x_k|| < TolX (1 + ||u||).
//
// CSV columns: experiment,n,beta,tolx,index,status,iterations,error,runtime_s
// Per-run rows carry one solve each. Aggregate rows reuse the columns: the
// experiment name gets a suffix, `iterations` holds the statistic, `status`
// holds "solved=k/m" and `index` the number of runs aggregated.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ssn/gen.hpp"

namespace ssn::bench {

inline constexpr std::array<const char*, 9> kCsvColumns = {
    "experiment", "n",          "beta",  "tolx",     "index",
    "status",     "iterations", "error", "runtime_s"};

using CsvRow = std::array<std::string, 9>;

/// Locale-independent shortest round-trip text for a double.
std::string format_double(double v);

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);

struct BenchRecord {
  std::string experiment;
  Index n = 0;
  double beta = 0.0;
  double tolx = 0.0;
  std::size_t index = 0;
  SolveStatus status = SolveStatus::kMaxIterations;
  int iterations = 0;
  double error = 0.0;      // ||u - x_last|| / (1 + ||u||)
  double runtime_s = 0.0;  // median over repeats

  CsvRow row() const;
};

struct TimedSolve {
  SolveReport<double> report;
  double error = 0.0;
  double runtime_s = 0.0;
};

/// qp_newton_solve with the known-solution rule; runtime is the median of
/// `repeats` serial runs on a monotonic clock.
TimedSolve solve_known(const GeneratedInstance& inst, const VectorXd& x0,
                       double tolx, int max_iter, int repeats);

// --- iteration counts versus dimension and accuracy ---

struct DimConfig {
  std::vector<Index> sizes = {50, 100, 200};
  std::size_t count = 100;
  std::vector<double> tolx = {1e-6, 1e-8, 1e-10};
  std::uint64_t seed = 1;
  int max_iter = 100;
  int repeats = 10;
};

struct DimSummary {
  Index n = 0;
  double tolx = 0.0;
  std::size_t count = 0;
  std::size_t solved = 0;
  long total_iterations = 0;
  double total_runtime_s = 0.0;
  std::size_t record_begin = 0;  // records[record_begin, record_end)
  std::size_t record_end = 0;

  double mean_iterations() const {
    return count ? static_cast<double>(total_iterations) / count : 0.0;
  }
};

struct DimResult {
  std::vector<BenchRecord> records;
  std::vector<DimSummary> summaries;
  std::vector<CsvRow> rows() const;
};

DimResult run_bench_dim(const DimConfig& cfg);

// --- sensitivity to the starting point ---

struct StartsConfig {
  Index n = 100;
  std::size_t problems = 100;
  std::size_t starts = 100;
  std::vector<double> tolx = {1e-6, 1e-8, 1e-10};
  std::uint64_t seed = 2;
  int max_iter = 100;
  int repeats = 1;
};

struct StartsProblemStat {
  std::size_t index = 0;
  double tolx = 0.0;
  double beta = 0.0;
  std::size_t runs = 0;
  std::size_t solved = 0;
  double mean = 0.0;  // iterations over the starts
  double std = 0.0;   // sample standard deviation (n - 1)
  std::size_t record_begin = 0;
  std::size_t record_end = 0;
};

struct StartsSummary {
  double tolx = 0.0;
  std::size_t runs = 0;
  std::size_t solved = 0;
  double mean_of_means = 0.0;
  double mean_of_stds = 0.0;
  bool all_converged() const { return solved == runs; }
};

struct StartsResult {
  Index n = 0;
  std::vector<BenchRecord> records;
  std::vector<StartsProblemStat> problem_stats;
  std::vector<StartsSummary> summaries;
  std::vector<CsvRow> rows() const;
};

/// Start j of problem i is drawn from its own stream, independent of TolX.
StartsResult run_bench_starts(const StartsConfig& cfg);

// --- behaviour outside the contraction regime ---

struct BetaRange {
  double low = 0.5;
  double high = 1e3;
};

struct BetaConfig {
  Index n = 100;
  std::vector<BetaRange> ranges = {{0.5, 1e3}, {1e3, 1e4}, {1e4, 1e5},
                                   {1e5, 1e6}, {1e6, 1e7}, {1e7, 1e8}};
  std::size_t count = 100;
  std::vector<double> tolx = {1e-6, 1e-8, 1e-10};
  std::uint64_t seed = 3;
  int max_iter = 100;
  int repeats = 1;
};

struct BetaSummary {
  BetaRange range;
  double tolx = 0.0;
  std::size_t count = 0;
  std::size_t solved = 0;
  std::optional<double> mean_iterations;  // over solved instances; empty if none
  std::size_t record_begin = 0;
  std::size_t record_end = 0;

  double solved_fraction() const {
    return count ? static_cast<double>(solved) / count : 0.0;
  }
};

struct BetaResult {
  Index n = 0;
  std::vector<BenchRecord> records;
  std::vector<BetaSummary> summaries;
  std::vector<CsvRow> rows() const;
};

BetaResult run_bench_beta(const BetaConfig& cfg);

}  // namespace ssn::bench
