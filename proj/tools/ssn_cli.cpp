// Command-line front end: solve and project single instances from JSON files,
// generate instances, and run the three benchmark experiments to CSV.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssn/bench.hpp"
#include "ssn/gen.hpp"
#include "ssn/io.hpp"
#include "ssn/qp.hpp"

namespace {

using ssn::Index;
using ssn::SolveStatus;
using ssn::VectorXd;
using ssn::bench::format_double;

constexpr int kExitMalformed = 1;

int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged:
    case SolveStatus::kConvergedExact: return 0;
    case SolveStatus::kCycled: return 2;
    case SolveStatus::kMaxIterations: return 3;
    case SolveStatus::kSingularJacobian: return 4;
  }
  return kExitMalformed;
}

std::string vec_text(const VectorXd& v) {
  std::string s = "[";
  for (Index i = 0; i < v.size(); ++i) {
    s += (i ? ", " : "") + format_double(v(i));
  }
  return s + "]";
}

struct SolveFlags {
  std::string file;
  std::string formulation = "auto";
  std::string x0 = "zero";
  std::uint64_t seed = 0;
  double tol_f = 1e-10;
  std::string solution_file;
  std::vector<double> tolx;
  int max_iter = 100;
  bool trace = false;
  std::string report_file;
};

VectorXd start_vector(const std::string& spec, Index n, std::uint64_t seed) {
  if (spec == "zero") return VectorXd::Zero(n);
  if (spec == "random") {
    ssn::Rng rng(seed);
    return ssn::random_vector(n, 1.0, rng);
  }
  VectorXd x0 = ssn::io::load_vector(spec);
  if (x0.size() != n) {
    throw ssn::io::ParseError("x0", "has " + std::to_string(x0.size()) +
                                        " entries, problem has " +
                                        std::to_string(n));
  }
  return x0;
}

ssn::SolverOptions<double> solver_options(const SolveFlags& f, Index n) {
  ssn::SolverOptions<double> opts;
  opts.max_iter = f.max_iter;
  // Iterates are always kept so cycle points can be printed; --trace only
  // controls whether they are dumped.
  opts.record_iterates = true;
  if (!f.solution_file.empty()) {
    VectorXd u = ssn::io::load_vector(f.solution_file);
    if (u.size() != n) {
      throw ssn::io::ParseError("solution", "length does not match the problem");
    }
    opts.stop = ssn::KnownSolutionStop<double>{
        std::move(u), f.tolx.empty() ? 1e-6 : f.tolx.front()};
  } else {
    opts.stop = ssn::ResidualStop<double>{f.tol_f};
  }
  return opts;
}

void print_report(const ssn::SolveReport<double>& r) {
  std::cout << "status: " << ssn::to_string(r.status) << '\n';
  std::cout << "iterations: " << r.iterations << '\n';
  std::cout << "residual_inf: " << format_double(r.final_residual_norm) << '\n';
  std::cout << "stop_measure: " << format_double(r.stop_measure) << '\n';
  if (r.cycle) {
    std::cout << "cycle: start=" << r.cycle->start
              << " period=" << r.cycle->period << '\n';
    if (r.iterate_trace) {
      for (int k = 0; k < r.cycle->period; ++k) {
        std::cout << "cycle_point: "
                  << vec_text((*r.iterate_trace)[r.cycle->start + k]) << '\n';
      }
    }
  }
  std::cout << "x: " << vec_text(r.last_iterate) << '\n';
}

void emit_report_json(const SolveFlags& f, ssn::io::Json j) {
  if (!f.trace) j.erase("iterate_trace");
  if (!f.report_file.empty()) {
    std::ofstream out(f.report_file);
    if (!out) throw std::runtime_error("cannot write " + f.report_file);
    out << j.dump(2) << '\n';
  } else if (f.trace) {
    std::cout << j.dump() << '\n';
  }
}

int run_solve(const SolveFlags& f) {
  const ssn::io::Problem problem = ssn::io::load_problem(f.file);
  if (std::holds_alternative<ssn::ConeInstance<double>>(problem)) {
    throw ssn::io::ParseError("kind", "cone files are handled by 'project'");
  }
  const bool file_is_qp = std::holds_alternative<ssn::QpProblem<double>>(problem);
  std::string form = f.formulation;
  if (form == "auto") form = file_is_qp ? "qp" : "pwls";
  if (form == "qp" && !file_is_qp) {
    throw ssn::io::ParseError("formulation", "qp requires a qp problem file");
  }

  ssn::SolveReport<double> rep;
  ssn::io::Json extra;
  if (form == "qp") {
    const auto& q = std::get<ssn::QpProblem<double>>(problem);
    const Index n = q.size();
    auto opts = solver_options(f, n);
    const VectorXd x0 = start_vector(f.x0, n, f.seed);
    const double dist = ssn::spectral_norm(
        q.Q - ssn::MatrixXd::Identity(n, n));
    std::cout << "formulation: qp\n";
    std::cout << "norm_Q_minus_I: " << format_double(dist) << '\n';
    std::cout << "rate_condition: " << (dist < 0.5 ? "holds" : "fails") << '\n';
    rep = ssn::qp_newton_solve(q, x0, opts);
    print_report(rep);
    const VectorXd xq = ssn::recover_qp_solution(rep.last_iterate);
    const auto kkt = ssn::kkt_residual(q, xq);
    std::cout << "qp_solution: " << vec_text(xq) << '\n';
    std::cout << "qp_objective: " << format_double(ssn::qp_objective(q, xq)) << '\n';
    std::cout << "kkt: primal=" << format_double(kkt.primal_violation)
              << " dual=" << format_double(kkt.dual_violation)
              << " complementarity=" << format_double(kkt.complementarity) << '\n';
    extra["qp_solution"] = ssn::io::vector_to_json(xq);
    extra["norm_Q_minus_I"] = dist;
  } else {
    const ssn::PwlsProblem<double> p =
        file_is_qp ? ssn::qp_to_pwls(std::get<ssn::QpProblem<double>>(problem))
                   : std::get<ssn::PwlsProblem<double>>(problem);
    const Index n = p.size();
    auto opts = solver_options(f, n);
    const VectorXd x0 = start_vector(f.x0, n, f.seed);
    const auto cond = ssn::check_conditions(p);
    std::cout << "formulation: pwls\n";
    std::cout << "inv_norm: " << format_double(cond.inv_norm) << '\n';
    std::cout << "existence_condition: " << (cond.existence_ok ? "holds" : "fails")
              << '\n';
    std::cout << "rate_condition: " << (cond.rate_ok ? "holds" : "fails") << '\n';
    if (cond.predicted_rate) {
      std::cout << "predicted_rate: " << format_double(*cond.predicted_rate) << '\n';
    }
    rep = ssn::newton_solve(p, x0, opts);
    print_report(rep);
    extra["inv_norm"] = cond.inv_norm;
  }

  ssn::io::Json j = ssn::io::report_to_json(rep);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  emit_report_json(f, std::move(j));
  return exit_code(rep.status);
}

int run_project(const SolveFlags& f) {
  const ssn::io::Problem problem = ssn::io::load_problem(f.file);
  const auto* ci = std::get_if<ssn::ConeInstance<double>>(&problem);
  if (!ci) throw ssn::io::ParseError("kind", "project expects a cone file");
  const Index n = ci->size();
  auto opts = solver_options(f, n);
  const VectorXd x0 = start_vector(f.x0, n, f.seed);
  const auto proj = ssn::cone_projection(*ci, opts, std::optional<VectorXd>(x0));
  print_report(proj.report);
  std::cout << "v: " << vec_text(proj.v) << '\n';
  std::cout << "projection: " << vec_text(proj.projection) << '\n';
  std::cout << "kkt: primal=" << format_double(proj.kkt.primal_violation)
            << " dual=" << format_double(proj.kkt.dual_violation)
            << " complementarity=" << format_double(proj.kkt.complementarity)
            << '\n';
  ssn::io::Json j = ssn::io::report_to_json(proj.report);
  j["v"] = ssn::io::vector_to_json(proj.v);
  j["projection"] = ssn::io::vector_to_json(proj.projection);
  j["kkt"] = ssn::io::Json{{"primal", proj.kkt.primal_violation},
                           {"dual", proj.kkt.dual_violation},
                           {"complementarity", proj.kkt.complementarity}};
  emit_report_json(f, std::move(j));
  return exit_code(proj.report.status);
}

void write_rows(const std::string& path,
                const std::vector<ssn::bench::CsvRow>& rows) {
  if (path.empty() || path == "-") {
    ssn::bench::write_csv(std::cout, rows);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  ssn::bench::write_csv(out, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-smooth Newton solver for x+ + Tx = b and nonnegative QPs"};
  app.require_subcommand(1);

  SolveFlags solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a pwls or qp problem file");
  solve_cmd->add_option("file", solve.file, "Problem JSON file")->required();
  solve_cmd->add_option("--formulation", solve.formulation, "auto, pwls or qp")
      ->check(CLI::IsMember({"auto", "pwls", "qp"}));
  solve_cmd->add_option("--x0", solve.x0, "zero, random, or a JSON array file");
  solve_cmd->add_option("--seed", solve.seed, "Seed for --x0 random");
  solve_cmd->add_option("--tol-f", solve.tol_f, "Residual tolerance");
  solve_cmd->add_option("--solution", solve.solution_file,
                        "Known solution (JSON array); switches to TolX stopping");
  solve_cmd->add_option("--tolx", solve.tolx, "TolX for --solution");
  solve_cmd->add_option("--max-iter", solve.max_iter, "Iteration cap")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_flag("--trace", solve.trace, "Dump iterates as JSON");
  solve_cmd->add_option("--report", solve.report_file, "Write JSON report here");

  SolveFlags project;
  auto* project_cmd = app.add_subcommand("project", "Project z onto the cone A R^n_+");
  project_cmd->add_option("file", project.file, "Cone JSON file")->required();
  project_cmd->add_option("--x0", project.x0, "zero, random, or a JSON array file");
  project_cmd->add_option("--seed", project.seed, "Seed for --x0 random");
  project_cmd->add_option("--tol-f", project.tol_f, "Residual tolerance");
  project_cmd->add_option("--max-iter", project.max_iter, "Iteration cap")
      ->check(CLI::PositiveNumber);
  project_cmd->add_flag("--trace", project.trace, "Dump iterates as JSON");
  project_cmd->add_option("--report", project.report_file, "Write JSON report here");

  ssn::GeneratorConfig gen_cfg;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("generate", "Write a random QP instance as JSON");
  gen_cmd->add_option("--n", gen_cfg.n, "Dimension")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--beta-low", gen_cfg.beta_low, "Lower end of beta range");
  gen_cmd->add_option("--beta-high", gen_cfg.beta_high, "Upper end of beta range");
  gen_cmd->add_option("--seed", gen_cfg.seed, "Seed");
  gen_cmd->add_option("--out", gen_out, "Output file (default stdout)");

  ssn::bench::DimConfig dim;
  std::string dim_out;
  auto* dim_cmd = app.add_subcommand("bench-dim", "Iterations versus dimension");
  dim_cmd->add_option("--n", dim.sizes, "Dimensions (repeatable)");
  dim_cmd->add_option("--count", dim.count, "Instances per dimension");
  dim_cmd->add_option("--tolx", dim.tolx, "TolX values (repeatable)");
  dim_cmd->add_option("--seed", dim.seed, "Seed");
  dim_cmd->add_option("--max-iter", dim.max_iter, "Iteration cap");
  dim_cmd->add_option("--repeats", dim.repeats, "Timing repeats per solve");
  dim_cmd->add_option("--out", dim_out, "CSV output (default stdout)");

  ssn::bench::StartsConfig starts;
  std::string starts_out;
  auto* starts_cmd =
      app.add_subcommand("bench-starts", "Iterations versus starting point");
  starts_cmd->add_option("--n", starts.n, "Dimension");
  starts_cmd->add_option("--count", starts.problems, "Number of problems");
  starts_cmd->add_option("--starts", starts.starts, "Starting points per problem");
  starts_cmd->add_option("--tolx", starts.tolx, "TolX values (repeatable)");
  starts_cmd->add_option("--seed", starts.seed, "Seed");
  starts_cmd->add_option("--max-iter", starts.max_iter, "Iteration cap");
  starts_cmd->add_option("--repeats", starts.repeats, "Timing repeats per solve");
  starts_cmd->add_option("--out", starts_out, "CSV output (default stdout)");

  ssn::bench::BetaConfig beta;
  std::vector<double> beta_low;
  std::vector<double> beta_high;
  std::string beta_out;
  auto* beta_cmd =
      app.add_subcommand("bench-beta", "Solved counts outside ||Q - I|| < 1/2");
  beta_cmd->add_option("--n", beta.n, "Dimension");
  beta_cmd->add_option("--count", beta.count, "Instances per beta range");
  beta_cmd->add_option("--beta-low", beta_low, "Range lower ends (repeatable)");
  beta_cmd->add_option("--beta-high", beta_high, "Range upper ends (repeatable)");
  beta_cmd->add_option("--tolx", beta.tolx, "TolX values (repeatable)");
  beta_cmd->add_option("--seed", beta.seed, "Seed");
  beta_cmd->add_option("--max-iter", beta.max_iter, "Iteration cap");
  beta_cmd->add_option("--repeats", beta.repeats, "Timing repeats per solve");
  beta_cmd->add_option("--out", beta_out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitMalformed;
  }

  try {
    if (*solve_cmd) return run_solve(solve);
    if (*project_cmd) return run_project(project);
    if (*gen_cmd) {
      ssn::Rng rng(ssn::substream_seed(gen_cfg.seed, 0));
      const auto inst = ssn::make_instance(gen_cfg, rng);
      const std::string text = ssn::io::to_json(inst).dump() + "\n";
      if (gen_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream(gen_out) << text;
      }
      return 0;
    }
    if (*dim_cmd) {
      const auto result = ssn::bench::run_bench_dim(dim);
      write_rows(dim_out, result.rows());
      for (const auto& s : result.summaries) {
        std::cerr << "n=" << s.n << " tolx=" << format_double(s.tolx)
                  << " solved=" << s.solved << "/" << s.count
                  << " total_iterations=" << s.total_iterations
                  << " total_time_s=" << format_double(s.total_runtime_s) << '\n';
      }
      return 0;
    }
    if (*starts_cmd) {
      const auto result = ssn::bench::run_bench_starts(starts);
      write_rows(starts_out, result.rows());
      for (const auto& s : result.summaries) {
        std::cerr << "tolx=" << format_double(s.tolx)
                  << " mean_of_stds=" << format_double(s.mean_of_stds)
                  << " mean_of_means=" << format_double(s.mean_of_means)
                  << (s.all_converged() ? " all converged" : " NOT all converged")
                  << '\n';
      }
      return 0;
    }
    if (*beta_cmd) {
      if (beta_low.size() != beta_high.size()) {
        throw ssn::io::ParseError("--beta-low/--beta-high",
                                  "must be given the same number of times");
      }
      if (!beta_low.empty()) {
        beta.ranges.clear();
        for (std::size_t i = 0; i < beta_low.size(); ++i) {
          beta.ranges.push_back({beta_low[i], beta_high[i]});
        }
      }
      const auto result = ssn::bench::run_bench_beta(beta);
      write_rows(beta_out, result.rows());
      for (const auto& s : result.summaries) {
        std::cerr << "beta=[" << format_double(s.range.low) << ","
                  << format_double(s.range.high) << ") tolx="
                  << format_double(s.tolx) << " solved=" << s.solved << "/"
                  << s.count << " mean_iterations="
                  << (s.mean_iterations ? format_double(*s.mean_iterations) : "-")
                  << '\n';
      }
      return 0;
    }
  } catch (const ssn::io::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMalformed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMalformed;
  }
  return kExitMalformed;
}
