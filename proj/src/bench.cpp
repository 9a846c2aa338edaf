#include "ssn/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <system_error>

namespace ssn::bench {

namespace {

constexpr std::uint64_t kStartStream = 0x5354415254ULL;  // "START"

std::string solved_text(std::size_t solved, std::size_t total) {
  return "solved=" + std::to_string(solved) + "/" + std::to_string(total);
}

std::string range_text(const BetaRange& r) {
  return format_double(r.low) + ":" + format_double(r.high);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void validate_common(const std::vector<double>& tolx, int max_iter, int repeats) {
  for (double t : tolx) {
    if (!(t > 0)) throw DomainError("bench: every TolX must be > 0");
  }
  if (max_iter < 1) throw DomainError("bench: max_iter must be >= 1");
  if (repeats < 1) throw DomainError("bench: repeats must be >= 1");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    out << (i ? "," : "") << kCsvColumns[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << row[i];
    }
    out << '\n';
  }
}

CsvRow BenchRecord::row() const {
  return {experiment,
          std::to_string(n),
          format_double(beta),
          format_double(tolx),
          std::to_string(index),
          std::string(to_string(status)),
          std::to_string(iterations),
          format_double(error),
          format_double(runtime_s)};
}

TimedSolve solve_known(const GeneratedInstance& inst, const VectorXd& x0,
                       double tolx, int max_iter, int repeats) {
  SolverOptions<double> opts;
  opts.max_iter = max_iter;
  opts.stop = KnownSolutionStop<double>{inst.u, tolx};

  TimedSolve out;
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(repeats));
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport<double> rep = qp_newton_solve(inst.q, x0, opts);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
    if (r == 0) out.report = std::move(rep);
  }
  out.runtime_s = median(std::move(times));
  out.error = (inst.u - out.report.last_iterate).norm() / (1.0 + inst.u.norm());
  return out;
}

// --- dim ---

DimResult run_bench_dim(const DimConfig& cfg) {
  validate_common(cfg.tolx, cfg.max_iter, cfg.repeats);
  DimResult result;
  for (const Index n : cfg.sizes) {
    GeneratorConfig gen;
    gen.n = n;
    gen.beta_low = 0.0;
    gen.beta_high = 0.5;
    gen.seed = substream_seed(cfg.seed, static_cast<std::uint64_t>(n));
    const auto batch = make_batch(gen, cfg.count);
    for (const double tolx : cfg.tolx) {
      DimSummary s;
      s.n = n;
      s.tolx = tolx;
      s.count = batch.size();
      s.record_begin = result.records.size();
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& inst = batch[i];
        const TimedSolve t =
            solve_known(inst, inst.x0, tolx, cfg.max_iter, cfg.repeats);
        result.records.push_back({"dim", n, inst.beta, tolx, i, t.report.status,
                                  t.report.iterations, t.error, t.runtime_s});
        s.solved += converged(t.report.status) ? 1 : 0;
        s.total_iterations += t.report.iterations;
        s.total_runtime_s += t.runtime_s;
      }
      s.record_end = result.records.size();
      result.summaries.push_back(s);
    }
  }
  return result;
}

std::vector<CsvRow> DimResult::rows() const {
  std::vector<CsvRow> out;
  for (const auto& s : summaries) {
    if (s.count == 0) continue;
    for (std::size_t i = s.record_begin; i < s.record_end; ++i) {
      out.push_back(records[i].row());
    }
    out.push_back({"dim.total", std::to_string(s.n), "", format_double(s.tolx),
                   std::to_string(s.count), solved_text(s.solved, s.count),
                   std::to_string(s.total_iterations), "",
                   format_double(s.total_runtime_s)});
  }
  return out;
}

// --- starts ---

StartsResult run_bench_starts(const StartsConfig& cfg) {
  validate_common(cfg.tolx, cfg.max_iter, cfg.repeats);
  StartsResult result;
  result.n = cfg.n;
  GeneratorConfig gen;
  gen.n = cfg.n;
  gen.beta_low = 0.0;
  gen.beta_high = 0.5;
  gen.seed = cfg.seed;
  const auto batch = make_batch(gen, cfg.problems);

  std::vector<std::vector<VectorXd>> starts(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::uint64_t base = substream_seed(cfg.seed ^ kStartStream, i);
    for (std::size_t j = 0; j < cfg.starts; ++j) {
      Rng rng(substream_seed(base, j));
      starts[i].push_back(random_vector(cfg.n, gen.value_bound, rng));
    }
  }

  for (const double tolx : cfg.tolx) {
    StartsSummary summary;
    summary.tolx = tolx;
    double sum_means = 0.0;
    double sum_stds = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      StartsProblemStat stat;
      stat.index = i;
      stat.tolx = tolx;
      stat.beta = batch[i].beta;
      stat.record_begin = result.records.size();
      std::vector<double> iters;
      for (const auto& x0 : starts[i]) {
        const TimedSolve t =
            solve_known(batch[i], x0, tolx, cfg.max_iter, cfg.repeats);
        result.records.push_back({"starts", cfg.n, batch[i].beta, tolx, i,
                                  t.report.status, t.report.iterations, t.error,
                                  t.runtime_s});
        iters.push_back(t.report.iterations);
        stat.solved += converged(t.report.status) ? 1 : 0;
      }
      stat.record_end = result.records.size();
      stat.runs = iters.size();
      if (!iters.empty()) {
        stat.mean = std::accumulate(iters.begin(), iters.end(), 0.0) / iters.size();
      }
      if (iters.size() > 1) {
        double ss = 0.0;
        for (double k : iters) ss += (k - stat.mean) * (k - stat.mean);
        stat.std = std::sqrt(ss / (iters.size() - 1));
      }
      summary.runs += stat.runs;
      summary.solved += stat.solved;
      sum_means += stat.mean;
      sum_stds += stat.std;
      result.problem_stats.push_back(stat);
    }
    if (!batch.empty()) {
      summary.mean_of_means = sum_means / batch.size();
      summary.mean_of_stds = sum_stds / batch.size();
    }
    result.summaries.push_back(summary);
  }
  return result;
}

std::vector<CsvRow> StartsResult::rows() const {
  std::vector<CsvRow> out;
  const std::string n_text = std::to_string(n);
  for (const auto& s : summaries) {
    if (s.runs == 0) continue;
    const std::string tol = format_double(s.tolx);
    for (const auto& p : problem_stats) {
      if (p.tolx != s.tolx) continue;
      for (std::size_t i = p.record_begin; i < p.record_end; ++i) {
        out.push_back(records[i].row());
      }
      const std::string beta = format_double(p.beta);
      out.push_back({"starts.problem_mean", n_text, beta, tol,
                     std::to_string(p.runs), solved_text(p.solved, p.runs),
                     format_double(p.mean), "", ""});
      out.push_back({"starts.problem_std", n_text, beta, tol,
                     std::to_string(p.runs), solved_text(p.solved, p.runs),
                     format_double(p.std), "", ""});
    }
    out.push_back({"starts.mean_of_means", n_text, "", tol, std::to_string(s.runs),
                   solved_text(s.solved, s.runs), format_double(s.mean_of_means),
                   "", ""});
    out.push_back({"starts.mean_of_stds", n_text, "", tol, std::to_string(s.runs),
                   solved_text(s.solved, s.runs), format_double(s.mean_of_stds),
                   "", ""});
  }
  return out;
}

// --- beta ---

BetaResult run_bench_beta(const BetaConfig& cfg) {
  validate_common(cfg.tolx, cfg.max_iter, cfg.repeats);
  BetaResult result;
  result.n = cfg.n;
  for (std::size_t r = 0; r < cfg.ranges.size(); ++r) {
    const BetaRange range = cfg.ranges[r];
    GeneratorConfig gen;
    gen.n = cfg.n;
    gen.beta_low = range.low;
    gen.beta_high = range.high;
    gen.seed = substream_seed(cfg.seed, r);
    const auto batch = make_batch(gen, cfg.count);
    for (const double tolx : cfg.tolx) {
      BetaSummary s;
      s.range = range;
      s.tolx = tolx;
      s.count = batch.size();
      s.record_begin = result.records.size();
      long iter_sum = 0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& inst = batch[i];
        const TimedSolve t =
            solve_known(inst, inst.x0, tolx, cfg.max_iter, cfg.repeats);
        result.records.push_back({"beta", cfg.n, inst.beta, tolx, i,
                                  t.report.status, t.report.iterations, t.error,
                                  t.runtime_s});
        if (converged(t.report.status)) {
          ++s.solved;
          iter_sum += t.report.iterations;
        }
      }
      s.record_end = result.records.size();
      if (s.solved > 0) {
        s.mean_iterations = static_cast<double>(iter_sum) / s.solved;
      }
      result.summaries.push_back(s);
    }
  }
  return result;
}

std::vector<CsvRow> BetaResult::rows() const {
  std::vector<CsvRow> out;
  for (const auto& s : summaries) {
    if (s.count == 0) continue;
    for (std::size_t i = s.record_begin; i < s.record_end; ++i) {
      out.push_back(records[i].row());
    }
    const std::string n_text = std::to_string(n);
    out.push_back({"beta.summary", n_text, range_text(s.range),
                   format_double(s.tolx), std::to_string(s.count),
                   solved_text(s.solved, s.count),
                   s.mean_iterations ? format_double(*s.mean_iterations) : "-",
                   "", ""});
  }
  return out;
}

}  // namespace ssn::bench
