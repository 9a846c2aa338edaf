#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "ssn/pwls.hpp"
#include "support.hpp"

using namespace ssn;
using ssn::testing::inf_norm;
using ssn::testing::uniform;
using ssn::testing::uniform_int;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

PwlsProblem<double> cycle_problem() {
  MatrixXd t(2, 2);
  t << -2, 3, -1, 1;
  return {t, vec({-5, -3})};
}

PwlsProblem<double> nonunique_problem() {
  return {vec({-1, 1}).asDiagonal().toDenseMatrix(), vec({0, 2})};
}

PwlsProblem<double> diagonal_problem() {
  return {MatrixXd(3.0 * MatrixXd::Identity(2, 2)), vec({4, -3})};
}

bool contains_pattern(const std::vector<SignPattern>& v, const std::string& bits) {
  for (const auto& s : v) {
    if (s.str() == bits) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("positive_part") {
  auto p = positive_part(vec({2, 0, -5}));
  CHECK(p.plus == vec({2, 0, 0}));
  CHECK(p.minus == vec({0, 0, 5}));
  p = positive_part(vec({0, 0}));
  CHECK(p.plus == vec({0, 0}));
  CHECK(p.minus == vec({0, 0}));
  p = positive_part(vec({-3, 3}));
  CHECK(p.plus == vec({0, 3}));
  CHECK(p.minus == vec({3, 0}));
}

TEST_CASE("positive_part decomposes x orthogonally") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const VectorXd x = random_vector(uniform_int(rng, 1, 12), 5.0, rng);
    const auto p = positive_part(x);
    CHECK(p.plus - p.minus == x);
    CHECK(p.plus.dot(p.minus) == 0.0);
    CHECK(p.plus.minCoeff() >= 0.0);
    CHECK(p.minus.minCoeff() >= 0.0);
  }
}

TEST_CASE("sign_pattern uses sgn(0) = 0") {
  CHECK(sign_pattern(vec({2, 0, -5})).str() == "100");
  CHECK(sign_pattern(vec({4, 1})).str() == "11");
  CHECK(sign_pattern(vec({-1, -2})).str() == "00");
  CHECK(SignPattern::from_mask(0b101, 3).str() == "101");
  CHECK(SignPattern::from_mask(0b101, 3).count() == 2);
  CHECK(SignPatternHash{}(sign_pattern(vec({1, -1}))) ==
        SignPatternHash{}(SignPattern::from_mask(1, 2)));
}

TEST_CASE("residual examples") {
  CHECK(residual(cycle_problem(), vec({2, -1})) == vec({0, 0}));
  CHECK(residual(nonunique_problem(), vec({1, 1})) == vec({0, 0}));
  const auto p = cycle_problem();
  CHECK(residual(p, vec({0, 0})) == -p.b);
  CHECK_THROWS_AS(residual(p, vec({1, 2, 3})), DimensionError);
}

TEST_CASE("newton_step examples") {
  const auto p = cycle_problem();
  const VectorXd a = newton_step(p, vec({4, 1}));
  CHECK(inf_norm(a - vec({-1, -2})) <= 1e-14);
  const VectorXd b = newton_step(p, vec({-1, -2}));
  CHECK(inf_norm(b - vec({4, 1})) <= 1e-14);
  const VectorXd c = newton_step(diagonal_problem(), vec({1, -1}));
  CHECK(inf_norm(c - vec({1, -1})) <= 1e-15);
  CHECK_THROWS_AS(newton_step(nonunique_problem(), vec({1, 1})), SingularMatrixError);
}

TEST_CASE("newton_solve enters the 2-cycle from [1, 1]") {
  SolverOptions<double> opts;
  opts.record_iterates = true;
  const auto rep = newton_solve(cycle_problem(), vec({1, 1}), opts);
  REQUIRE(rep.status == SolveStatus::kCycled);
  REQUIRE(rep.cycle);
  CHECK(rep.cycle->period == 2);
  CHECK_FALSE(rep.solution);
  CHECK(rep.pattern_trace.size() == static_cast<std::size_t>(rep.iterations) + 1);
  const auto& trace = *rep.iterate_trace;
  std::vector<VectorXd> points;
  for (int k = rep.cycle->start; k < rep.cycle->start + rep.cycle->period; ++k) {
    points.push_back(trace[static_cast<std::size_t>(k)]);
  }
  const auto near = [](const VectorXd& x, const VectorXd& y) {
    return inf_norm(x - y) <= 1e-14;
  };
  CHECK(((near(points[0], vec({4, 1})) && near(points[1], vec({-1, -2}))) ||
         (near(points[0], vec({-1, -2})) && near(points[1], vec({4, 1})))));
}

TEST_CASE("newton_solve from [-3, 3] reaches the unique zero") {
  // The literature example quotes this start for the cycle; with sgn(0) = 0
  // the iteration lands on [1,-1] and then on the solution.
  SolverOptions<double> opts;
  opts.record_iterates = true;
  const auto rep = newton_solve(cycle_problem(), vec({-3, 3}), opts);
  CHECK(converged(rep.status));
  CHECK(inf_norm((*rep.iterate_trace)[1] - vec({1, -1})) <= 1e-14);
  CHECK(inf_norm(rep.last_iterate - vec({2, -1})) <= 1e-14);
}

TEST_CASE("newton_solve on the diagonal problem") {
  const auto rep = newton_solve(diagonal_problem(), vec({9, 9}));
  CHECK(rep.status == SolveStatus::kConvergedExact);
  REQUIRE(rep.solution);
  CHECK(inf_norm(*rep.solution - vec({1, -1})) <= 1e-15);
  CHECK(rep.iterations <= 3);
}

TEST_CASE("newton_solve returns immediately when x0 already solves") {
  const auto rep = newton_solve(diagonal_problem(), vec({1, -1}));
  CHECK(rep.status == SolveStatus::kConverged);
  CHECK(rep.iterations == 0);
  CHECK(rep.pattern_trace.size() == 1);
}

TEST_CASE("newton_solve reports a singular Newton matrix as a status") {
  const auto rep = newton_solve(nonunique_problem(), vec({5, 5}));
  CHECK(rep.status == SolveStatus::kSingularJacobian);
  CHECK_FALSE(rep.solution);
}

TEST_CASE("newton_solve honours max_iter and validates options") {
  SolverOptions<double> opts;
  opts.max_iter = 1;
  const auto rep = newton_solve(cycle_problem(), vec({1, 1}), opts);
  CHECK(rep.status == SolveStatus::kMaxIterations);
  CHECK(rep.iterations == 1);
  opts.max_iter = 0;
  CHECK_THROWS_AS(newton_solve(cycle_problem(), vec({1, 1}), opts), DomainError);
  CHECK_THROWS_AS(newton_solve(cycle_problem(), vec({1, 1, 1})), DimensionError);
}

TEST_CASE("known-solution stopping uses a strict inequality") {
  const auto p = diagonal_problem();
  SolverOptions<double> opts;
  opts.stop = KnownSolutionStop<double>{vec({1, -1}), 1e-6};
  const auto rep = newton_solve(p, vec({9, 9}), opts);
  CHECK(converged(rep.status));
  CHECK(rep.stop_measure < 1e-6 * (1 + std::sqrt(2.0)));
}

TEST_CASE("newton_solve matches the enumerator on random contractive problems") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd t = ssn::testing::random_T_with_inv_norm(6, uniform(rng, 0.05, 0.49), rng);
    const auto planted = ssn::testing::planted_pwls(t, rng);
    const auto rep = newton_solve(planted.problem, random_vector(6, 10.0, rng));
    REQUIRE(converged(rep.status));
    const auto e = enumerate_solutions(planted.problem);
    REQUIRE(e.solutions.size() == 1);
    CHECK(inf_norm(*rep.solution - e.solutions[0]) <= 1e-8);
  }
}

TEST_CASE("fixed_point_solve") {
  const auto rep = fixed_point_solve(diagonal_problem(), vec({0, 0}));
  CHECK(rep.status == SolveStatus::kConverged);
  CHECK(inf_norm(*rep.solution - vec({1, -1})) <= 1e-12);
  CHECK_THROWS_AS(fixed_point_solve(cycle_problem(), vec({0, 0})), HypothesisError);
  CHECK_THROWS_AS(fixed_point_solve(nonunique_problem(), vec({0, 0})), HypothesisError);
}

TEST_CASE("enumerate_solutions examples") {
  const auto e1 = enumerate_solutions(nonunique_problem());
  REQUIRE(e1.solutions.size() == 1);
  CHECK(e1.solutions[0] == vec({0, 1}));
  CHECK(e1.singular_patterns.size() == 2);
  CHECK(contains_pattern(e1.singular_patterns, "11"));
  CHECK(contains_pattern(e1.singular_patterns, "10"));

  const auto e2 = enumerate_solutions(cycle_problem());
  REQUIRE(e2.solutions.size() == 1);
  CHECK(inf_norm(e2.solutions[0] - vec({2, -1})) <= 1e-14);
  CHECK(e2.singular_patterns.empty());

  const auto e3 = enumerate_solutions(diagonal_problem());
  REQUIRE(e3.solutions.size() == 1);
  CHECK(inf_norm(e3.solutions[0] - vec({1, -1})) <= 1e-15);

  PwlsProblem<double> big{MatrixXd::Identity(21, 21), VectorXd::Zero(21)};
  CHECK_THROWS_AS(enumerate_solutions(big), SizeGuardError);
}

TEST_CASE("check_conditions examples") {
  const auto a = check_conditions(PwlsProblem<double>{
      MatrixXd(3.0 * MatrixXd::Identity(2, 2)), VectorXd::Zero(2)});
  CHECK(a.inv_norm == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(a.existence_ok);
  CHECK(a.rate_ok);
  REQUIRE(a.predicted_rate);
  CHECK(*a.predicted_rate == doctest::Approx(0.5).epsilon(1e-10));

  const auto b = check_conditions(cycle_problem());
  CHECK(b.inv_norm == doctest::Approx(3.8644).epsilon(1e-4));
  CHECK_FALSE(b.existence_ok);
  CHECK_FALSE(b.rate_ok);
  CHECK_FALSE(b.predicted_rate);

  const auto c = check_conditions(nonunique_problem());
  CHECK(c.inv_norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(c.existence_ok);

  const auto d = check_conditions(PwlsProblem<double>{MatrixXd::Zero(2, 2), VectorXd::Zero(2)});
  CHECK(std::isinf(d.inv_norm));
  CHECK_FALSE(d.existence_ok);
  CHECK_FALSE(d.rate_ok);
}

TEST_CASE("condition flags are consistent") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd t = ssn::testing::random_T_with_inv_norm(4, uniform(rng, 0.01, 2.0), rng);
    const auto r = check_conditions(PwlsProblem<double>{t, VectorXd::Zero(4)});
    if (r.rate_ok) CHECK(r.existence_ok);
    if (r.predicted_rate) CHECK((*r.predicted_rate < 1.0) == r.rate_ok);
  }
}

TEST_CASE("definite_sign_rows examples") {
  MatrixXd m1(3, 3), m2(3, 3), m3(3, 3);
  m1 << -2, -3, -1, 1, 1, 2, 5, 2, 1;
  m2 << 2, 3, 1, 1, 1, 2, 5, 2, 1;
  m3 << -2, -3, -1, -1, -1, -2, -5, -2, -1;
  CHECK(definite_sign_rows(m1).has_definite_sign_rows);
  CHECK(definite_sign_rows(m2).has_definite_sign_rows);
  CHECK(definite_sign_rows(m3).has_definite_sign_rows);
  CHECK(definite_sign_rows(m1).minus_rows == std::vector<Index>{0});

  MatrixXd mixed(2, 2);
  mixed << 1, -1, 0, 1;
  CHECK_FALSE(definite_sign_rows(mixed).has_definite_sign_rows);

  const auto d = definite_sign_rows(vec({-2, 5}).asDiagonal().toDenseMatrix());
  CHECK(d.has_definite_sign_rows);
  CHECK(d.minus_rows == std::vector<Index>{0});
  CHECK(d.plus_rows == std::vector<Index>{1});

  MatrixXd tiny(1, 2);
  tiny << 1.0, -1e-16;  // below the zero threshold
  CHECK(definite_sign_rows(tiny).has_definite_sign_rows);
}

TEST_CASE("check_finite_termination_hypothesis examples") {
  CHECK(check_finite_termination_hypothesis(PwlsProblem<double>{
      MatrixXd(3.0 * MatrixXd::Identity(2, 2)), VectorXd::Zero(2)}));
  CHECK_FALSE(check_finite_termination_hypothesis(cycle_problem()));
  CHECK_FALSE(check_finite_termination_hypothesis(nonunique_problem()));
  CHECK(check_finite_termination_hypothesis(cycle_problem(), {}));
}

// ---------------------------------------------------------------------------
// Properties

TEST_CASE("generalized Jacobian error bound for the positive part") {
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = uniform_int(rng, 1, 10);
    VectorXd x = random_vector(n, 3.0, rng);
    VectorXd y = random_vector(n, 3.0, rng);
    // exercise the kink at zero
    for (Index i = 0; i < n; ++i) {
      if (uniform(rng, 0, 1) < 0.15) x(i) = 0.0;
      if (uniform(rng, 0, 1) < 0.15) y(i) = 0.0;
    }
    VectorXd s(n);
    const auto pat = sign_pattern(x);
    for (Index i = 0; i < n; ++i) s(i) = pat[i] ? 1.0 : 0.0;
    const VectorXd lhs = y.cwiseMax(0.0) - x.cwiseMax(0.0) - s.asDiagonal() * (y - x);
    CHECK(lhs.norm() <= (y - x).norm());
  }
}

TEST_CASE("every Newton step solves its linear system") {
  Rng rng(202);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = uniform_int(rng, 1, 12);
    const MatrixXd t = ssn::testing::random_conditioned(n, 100.0, rng) * 3.0;
    const PwlsProblem<double> p{t, random_vector(n, 10.0, rng)};
    const VectorXd x = random_vector(n, 10.0, rng);
    const MatrixXd m = newton_matrix(p, sign_pattern(x));
    if (lu_factor(m).singular()) continue;
    const VectorXd next = newton_step(p, x);
    CHECK(inf_norm(m * next - p.b) <= 1e-10 * (1 + inf_norm(p.b)));
  }
}

TEST_CASE("a repeated consecutive pattern certifies a solution") {
  Rng rng(303);
  int hits = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = uniform_int(rng, 1, 8);
    const MatrixXd t = ssn::testing::random_conditioned(n, 10.0, rng) * uniform(rng, 0.5, 4.0);
    const PwlsProblem<double> p{t, random_vector(n, 10.0, rng)};
    SolverOptions<double> opts;
    opts.record_iterates = true;
    opts.stop = ResidualStop<double>{1e-300};  // only exact pattern repeats stop
    const auto rep = newton_solve(p, random_vector(n, 10.0, rng), opts);
    const auto& pt = rep.pattern_trace;
    for (std::size_t k = 1; k < pt.size(); ++k) {
      if (pt[k] == pt[k - 1]) {
        ++hits;
        CHECK(inf_norm(residual(p, (*rep.iterate_trace)[k])) <= 1e-9 * (1 + inf_norm(p.b)));
      }
    }
  }
  CHECK(hits > 50);
}

TEST_CASE("Q-linear convergence at the predicted rate") {
  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = uniform_int(rng, 1, 30);
    const double lambda = uniform(rng, 0.01, 0.49);
    const MatrixXd t = ssn::testing::random_T_with_inv_norm(n, lambda, rng);
    const auto planted = ssn::testing::planted_pwls(t, rng);
    SolverOptions<double> opts;
    opts.record_iterates = true;
    const auto rep = newton_solve(planted.problem, random_vector(n, 10.0, rng), opts);
    REQUIRE(converged(rep.status));
    const double bound = lambda / (1 - lambda) + 1e-8;
    const auto& tr = *rep.iterate_trace;
    for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
      const double ek = (planted.solution - tr[k]).norm();
      if (ek <= 1e-8) break;
      CHECK((planted.solution - tr[k + 1]).norm() / ek <= bound);
    }
  }
}

TEST_CASE("Newton, fixed point and enumeration agree") {
  Rng rng(505);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = uniform_int(rng, 1, 8);
    const MatrixXd t = ssn::testing::random_T_with_inv_norm(n, uniform(rng, 0.05, 0.4), rng);
    const auto planted = ssn::testing::planted_pwls(t, rng);
    const VectorXd x0 = random_vector(n, 10.0, rng);
    const auto a = newton_solve(planted.problem, x0);
    const auto b = fixed_point_solve(planted.problem, x0);
    const auto c = enumerate_solutions(planted.problem);
    REQUIRE(converged(a.status));
    REQUIRE(converged(b.status));
    REQUIRE(c.solutions.size() == 1);
    CHECK(inf_norm(*a.solution - c.solutions[0]) <= 1e-8);
    CHECK(inf_norm(*b.solution - c.solutions[0]) <= 1e-8);
  }
}

TEST_CASE("monotone trajectories when inverses have rows of definite sign") {
  Rng rng(606);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = uniform_int(rng, 2, 8);
    // T = cI - N with N >= 0 and c above its spectral radius: every
    // diag(s) + T is a nonsingular M-matrix.
    MatrixXd nn = random_matrix(n, n, 1.0, rng).cwiseAbs();
    const double rho = Eigen::EigenSolver<MatrixXd>(nn).eigenvalues().cwiseAbs().maxCoeff();
    const MatrixXd t = (rho * uniform(rng, 1.05, 2.0)) * MatrixXd::Identity(n, n) - nn;
    const auto planted = ssn::testing::planted_pwls(t, rng);
    const auto& p = planted.problem;
    REQUIRE(check_finite_termination_hypothesis(p));

    SolverOptions<double> opts;
    opts.record_iterates = true;
    const auto rep = newton_solve(p, random_vector(n, 10.0, rng), opts);
    REQUIRE(converged(rep.status));
    CHECK(rep.iterations <= (1 << n) + 1);
    const auto& tr = *rep.iterate_trace;
    const double slack = 1e-9 * (1 + inf_norm(planted.solution));
    for (std::size_t k = 1; k + 1 < tr.size(); ++k) {
      const MatrixXd inv = newton_matrix(p, sign_pattern(tr[k])).inverse();
      const auto cls = definite_sign_rows(inv);
      for (Index i : cls.plus_rows) CHECK(tr[k + 1](i) <= tr[k](i) + slack);
      for (Index i : cls.minus_rows) CHECK(tr[k + 1](i) >= tr[k](i) - slack);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("a detected cycle replays with its period") {
  Rng rng(707);
  int cycles = 0;
  for (int trial = 0; trial < 3000 && cycles < 40; ++trial) {
    const Index n = uniform_int(rng, 2, 4);
    const PwlsProblem<double> p{random_matrix(n, n, 3.0, rng), random_vector(n, 5.0, rng)};
    SolverOptions<double> opts;
    opts.record_iterates = true;
    const auto rep = newton_solve(p, random_vector(n, 5.0, rng), opts);
    if (rep.status != SolveStatus::kCycled) continue;
    ++cycles;
    REQUIRE(rep.cycle);
    CHECK(rep.cycle->period >= 2);
    const VectorXd first = (*rep.iterate_trace)[static_cast<std::size_t>(rep.cycle->start)];
    VectorXd x = first;
    for (int k = 0; k < rep.cycle->period; ++k) {
      x = newton_step(p, x);
      if (k + 1 < rep.cycle->period) CHECK_FALSE(sign_pattern(x) == sign_pattern(first));
    }
    CHECK(inf_norm(x - first) <= 1e-9 * (1 + inf_norm(first)));
  }
  CHECK(cycles > 0);
}
