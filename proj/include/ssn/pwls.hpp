#pragma once

// Semi-smooth Newton machinery for the piecewise linear system
//
//     x+ + T x = b,   x+ = max(x, 0) componentwise.
//
// The Newton map depends on x only through its sign pattern sgn(x+), so the
// iteration is a walk on {0,1}^n: a consecutive repeat means the last iterate
// solves the system exactly, a non-consecutive repeat means a cycle.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "ssn/linalg.hpp"

namespace ssn {

template <typename Scalar>
struct PwlsProblem {
  Matrix<Scalar> T;
  Vector<Scalar> b;

  Index size() const { return b.size(); }

  void validate() const {
    detail::require_square(T, "PwlsProblem");
    if (T.rows() != b.size()) {
      throw DimensionError("PwlsProblem: T is " + std::to_string(T.rows()) +
                           "x" + std::to_string(T.cols()) + " but b has " +
                           std::to_string(b.size()) + " entries");
    }
    detail::require_finite(T, "PwlsProblem.T");
    detail::require_finite(b, "PwlsProblem.b");
  }
};

/// sgn(x+): bit i is set iff x_i > 0 (sgn(0) = 0).
class SignPattern {
 public:
  SignPattern() = default;
  explicit SignPattern(std::vector<bool> bits) : bits_(std::move(bits)) {}

  /// Pattern whose bits are the binary digits of mask (bit i = (mask >> i) & 1).
  static SignPattern from_mask(std::uint64_t mask, Index n) {
    std::vector<bool> bits(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) bits[i] = ((mask >> i) & 1u) != 0;
    return SignPattern(std::move(bits));
  }

  Index size() const { return static_cast<Index>(bits_.size()); }
  bool operator[](Index i) const { return bits_[static_cast<std::size_t>(i)]; }
  const std::vector<bool>& bits() const { return bits_; }

  Index count() const {
    Index c = 0;
    for (bool bit : bits_) c += bit ? 1 : 0;
    return c;
  }

  std::string str() const {
    std::string s;
    s.reserve(bits_.size());
    for (bool bit : bits_) s.push_back(bit ? '1' : '0');
    return s;
  }

  friend bool operator==(const SignPattern&, const SignPattern&) = default;

 private:
  std::vector<bool> bits_;
};

struct SignPatternHash {
  std::size_t operator()(const SignPattern& p) const {
    return std::hash<std::vector<bool>>{}(p.bits());
  }
};

template <typename Derived>
SignPattern sign_pattern(const Eigen::MatrixBase<Derived>& x) {
  std::vector<bool> bits(static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i) bits[i] = x(i) > 0;
  return SignPattern(std::move(bits));
}

template <typename Scalar>
struct PositiveParts {
  Vector<Scalar> plus;
  Vector<Scalar> minus;
};

/// x = plus - minus with <plus, minus> = 0.
template <typename Derived>
PositiveParts<typename Derived::Scalar> positive_part(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return {x.cwiseMax(Scalar(0)), (-x).cwiseMax(Scalar(0))};
}

template <typename Scalar>
Vector<Scalar> residual(const PwlsProblem<Scalar>& p, const Vector<Scalar>& x) {
  if (x.size() != p.size() || p.T.cols() != x.size()) {
    throw DimensionError("residual: x has " + std::to_string(x.size()) +
                         " entries, problem has " + std::to_string(p.size()));
  }
  return x.cwiseMax(Scalar(0)) + p.T * x - p.b;
}

/// diag(s) + T.
template <typename Scalar>
Matrix<Scalar> newton_matrix(const PwlsProblem<Scalar>& p, const SignPattern& s) {
  Matrix<Scalar> m = p.T;
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i]) m(i, i) += Scalar(1);
  }
  return m;
}

/// Solves [diag(sgn(x+)) + T] x_next = b. Throws SingularMatrixError.
template <typename Scalar>
Vector<Scalar> newton_step(const PwlsProblem<Scalar>& p, const Vector<Scalar>& x) {
  if (x.size() != p.size()) {
    throw DimensionError("newton_step: x has " + std::to_string(x.size()) +
                         " entries, problem has " + std::to_string(p.size()));
  }
  const auto lu = lu_factor(newton_matrix(p, sign_pattern(x)));
  if (lu.singular()) {
    throw SingularMatrixError("newton_step: singular Newton matrix for pattern " +
                              sign_pattern(x).str());
  }
  return lu.solve(p.b);
}

enum class SolveStatus {
  kConverged,
  kConvergedExact,
  kCycled,
  kMaxIterations,
  kSingularJacobian,
};

constexpr std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "Converged";
    case SolveStatus::kConvergedExact: return "ConvergedExact";
    case SolveStatus::kCycled: return "Cycled";
    case SolveStatus::kMaxIterations: return "MaxIterations";
    case SolveStatus::kSingularJacobian: return "SingularJacobian";
  }
  return "Unknown";
}

constexpr bool converged(SolveStatus s) {
  return s == SolveStatus::kConverged || s == SolveStatus::kConvergedExact;
}

/// Stop when ||F(x)||_inf <= tol_f (1 + ||b||_inf).
template <typename Scalar>
struct ResidualStop {
  Scalar tol_f = Scalar(1e-10);
};

/// Stop when ||u - x|| < tol_x (1 + ||u||) for a known solution u.
template <typename Scalar>
struct KnownSolutionStop {
  Vector<Scalar> u;
  Scalar tol_x = Scalar(1e-6);
};

template <typename Scalar>
using StopRule = std::variant<ResidualStop<Scalar>, KnownSolutionStop<Scalar>>;

template <typename Scalar>
struct SolverOptions {
  int max_iter = 100;
  StopRule<Scalar> stop = ResidualStop<Scalar>{};
  bool record_iterates = false;
  // Used only by fixed_point_solve: ||x_{k+1} - x_k||_inf <= step_tol (1 + ||x_{k+1}||_inf).
  Scalar step_tol = Scalar(1e-12);
};

struct CycleInfo {
  int start = 0;   // index of the first iterate on the cycle
  int period = 0;  // >= 2
};

template <typename Scalar>
struct SolveReport {
  SolveStatus status = SolveStatus::kMaxIterations;
  std::optional<Vector<Scalar>> solution;
  int iterations = 0;
  // ||F(x_last)||_inf for the formulation that was solved.
  Scalar final_residual_norm = std::numeric_limits<Scalar>::quiet_NaN();
  // The quantity the active stopping rule compares against its tolerance.
  Scalar stop_measure = std::numeric_limits<Scalar>::quiet_NaN();
  Vector<Scalar> last_iterate;
  std::optional<std::vector<Vector<Scalar>>> iterate_trace;
  std::vector<SignPattern> pattern_trace;
  std::optional<CycleInfo> cycle;
};

namespace detail {

template <typename Scalar>
struct StopTest {
  const StopRule<Scalar>& rule;
  Scalar rhs_scale;  // 1 + ||rhs||_inf for residual mode

  // Returns (measure, satisfied).
  std::pair<Scalar, bool> operator()(const Vector<Scalar>& x,
                                     const Vector<Scalar>& f) const {
    if (const auto* r = std::get_if<ResidualStop<Scalar>>(&rule)) {
      const Scalar m = f.template lpNorm<Eigen::Infinity>() / rhs_scale;
      return {m, m <= r->tol_f};
    }
    const auto& k = std::get<KnownSolutionStop<Scalar>>(rule);
    const Scalar m = (k.u - x).norm() / (Scalar(1) + k.u.norm());
    return {m, m < k.tol_x};
  }
};

template <typename Scalar>
void validate_options(const SolverOptions<Scalar>& opts, Index n) {
  if (opts.max_iter < 1) throw DomainError("solver: max_iter must be >= 1");
  if (const auto* k = std::get_if<KnownSolutionStop<Scalar>>(&opts.stop)) {
    if (k->u.size() != n) {
      throw DimensionError("solver: known solution has wrong length");
    }
    if (!(k->tol_x > 0)) throw DomainError("solver: tol_x must be > 0");
  } else if (!(std::get<ResidualStop<Scalar>>(opts.stop).tol_f > 0)) {
    throw DomainError("solver: tol_f must be > 0");
  }
}

// Shared driver for every Newton iteration whose next iterate is a function
// of the current sign pattern. `step` returns nullopt on a singular system;
// `residual_of` evaluates the formulation's F.
template <typename Scalar, typename Step, typename ResidualFn>
SolveReport<Scalar> run_pattern_newton(const Vector<Scalar>& x0, Step&& step,
                                       ResidualFn&& residual_of,
                                       Scalar rhs_inf_norm,
                                       const SolverOptions<Scalar>& opts) {
  validate_options(opts, x0.size());
  const StopTest<Scalar> test{opts.stop, Scalar(1) + rhs_inf_norm};

  SolveReport<Scalar> rep;
  if (opts.record_iterates) rep.iterate_trace.emplace();
  std::unordered_map<SignPattern, int, SignPatternHash> first_seen;

  Vector<Scalar> x = x0;
  auto record = [&](const Vector<Scalar>& xi) {
    rep.pattern_trace.push_back(sign_pattern(xi));
    if (rep.iterate_trace) rep.iterate_trace->push_back(xi);
  };
  auto finish = [&](SolveStatus status, const Vector<Scalar>& f, Scalar m) {
    rep.status = status;
    rep.final_residual_norm = f.template lpNorm<Eigen::Infinity>();
    rep.stop_measure = m;
    rep.last_iterate = x;
    if (converged(status)) rep.solution = x;
    return rep;
  };

  record(x);
  first_seen.emplace(rep.pattern_trace.back(), 0);
  {
    const Vector<Scalar> f = residual_of(x);
    const auto [m, ok] = test(x, f);
    if (ok) return finish(SolveStatus::kConverged, f, m);
  }

  for (int k = 1; k <= opts.max_iter; ++k) {
    std::optional<Vector<Scalar>> next = step(rep.pattern_trace.back());
    if (!next) {
      const Vector<Scalar> f = residual_of(x);
      return finish(SolveStatus::kSingularJacobian, f, test(x, f).first);
    }
    x = std::move(*next);
    rep.iterations = k;
    record(x);

    const SignPattern& pattern = rep.pattern_trace.back();
    const bool repeated = pattern == rep.pattern_trace[k - 1];
    const Vector<Scalar> f = residual_of(x);
    const auto [m, ok] = test(x, f);
    if (ok) {
      return finish(repeated ? SolveStatus::kConvergedExact
                             : SolveStatus::kConverged,
                    f, m);
    }
    if (!repeated) {
      const auto [it, inserted] = first_seen.emplace(pattern, k);
      if (!inserted) {
        rep.cycle = CycleInfo{it->second + 1, k - it->second};
        return finish(SolveStatus::kCycled, f, m);
      }
    }
    // A consecutive repeat that misses the tolerance is a rounding-limited
    // fixed point; iterating further reproduces it until max_iter.
    if (k == opts.max_iter) return finish(SolveStatus::kMaxIterations, f, m);
  }
  return rep;  // unreachable: the loop returns at k == max_iter
}

}  // namespace detail

/// Iterates [P(x_k) + T] x_{k+1} = b from x0.
template <typename Scalar>
SolveReport<Scalar> newton_solve(const PwlsProblem<Scalar>& p,
                                 const Vector<Scalar>& x0,
                                 const SolverOptions<Scalar>& opts = {}) {
  p.validate();
  if (x0.size() != p.size()) {
    throw DimensionError("newton_solve: x0 has wrong length");
  }
  auto step = [&p](const SignPattern& s) -> std::optional<Vector<Scalar>> {
    const auto lu = lu_factor(newton_matrix(p, s));
    if (lu.singular()) return std::nullopt;
    return lu.solve(p.b);
  };
  auto f = [&p](const Vector<Scalar>& x) { return residual(p, x); };
  return detail::run_pattern_newton<Scalar>(
      x0, step, f, p.b.template lpNorm<Eigen::Infinity>(), opts);
}

template <typename Scalar>
struct ConditionReport {
  Scalar inv_norm = std::numeric_limits<Scalar>::infinity();
  bool existence_ok = false;  // ||T^-1|| < 1: unique solution
  bool rate_ok = false;       // ||T^-1|| < 1/2: Q-linear convergence
  Scalar contraction_modulus = std::numeric_limits<Scalar>::infinity();
  std::optional<Scalar> predicted_rate;  // ||T^-1|| / (1 - ||T^-1||)
};

/// Strict inequalities on ||T^-1|| are only asserted when they hold by more
/// than this margin, the accuracy of the power iteration behind the norm.
inline constexpr double kConditionMargin = 1e-9;

template <typename Scalar>
ConditionReport<Scalar> check_conditions(const PwlsProblem<Scalar>& p) {
  p.validate();
  ConditionReport<Scalar> r;
  const auto lu = lu_factor(p.T);
  if (lu.singular()) return r;
  r.inv_norm = inv_spectral_norm(lu);
  r.contraction_modulus = r.inv_norm;
  r.existence_ok = r.inv_norm < Scalar(1) - Scalar(kConditionMargin);
  r.rate_ok = r.inv_norm < Scalar(0.5) - Scalar(kConditionMargin);
  if (r.existence_ok) r.predicted_rate = r.inv_norm / (Scalar(1) - r.inv_norm);
  return r;
}

/// Contraction x <- T^-1 (b - x+). Requires ||T^-1|| < 1.
template <typename Scalar>
SolveReport<Scalar> fixed_point_solve(const PwlsProblem<Scalar>& p,
                                      const Vector<Scalar>& x0,
                                      const SolverOptions<Scalar>& opts = {}) {
  p.validate();
  if (x0.size() != p.size()) {
    throw DimensionError("fixed_point_solve: x0 has wrong length");
  }
  if (opts.max_iter < 1) throw DomainError("solver: max_iter must be >= 1");
  const auto lu = lu_factor(p.T);
  if (lu.singular()) {
    throw HypothesisError("fixed_point_solve: T is singular");
  }
  const Scalar inv_norm = inv_spectral_norm(lu);
  if (!(inv_norm < Scalar(1) - Scalar(kConditionMargin))) {
    throw HypothesisError("fixed_point_solve: ||T^-1|| = " +
                          std::to_string(inv_norm) + " is not < 1");
  }

  SolveReport<Scalar> rep;
  if (opts.record_iterates) rep.iterate_trace.emplace();
  Vector<Scalar> x = x0;
  rep.pattern_trace.push_back(sign_pattern(x));
  if (rep.iterate_trace) rep.iterate_trace->push_back(x);
  rep.status = SolveStatus::kMaxIterations;
  for (int k = 1; k <= opts.max_iter; ++k) {
    Vector<Scalar> next = lu.solve(p.b - x.cwiseMax(Scalar(0)));
    const Scalar step = (next - x).template lpNorm<Eigen::Infinity>() /
                        (Scalar(1) + next.template lpNorm<Eigen::Infinity>());
    x = std::move(next);
    rep.iterations = k;
    rep.pattern_trace.push_back(sign_pattern(x));
    if (rep.iterate_trace) rep.iterate_trace->push_back(x);
    rep.stop_measure = step;
    if (step <= opts.step_tol) {
      rep.status = SolveStatus::kConverged;
      rep.solution = x;
      break;
    }
  }
  rep.last_iterate = x;
  rep.final_residual_norm =
      residual(p, x).template lpNorm<Eigen::Infinity>();
  return rep;
}

template <typename Scalar>
struct Enumeration {
  std::vector<Vector<Scalar>> solutions;
  std::vector<SignPattern> singular_patterns;
};

inline constexpr Index kMaxEnumerationSize = 20;

/// Visits all 2^n sign patterns and keeps every pattern-consistent solution.
template <typename Scalar>
Enumeration<Scalar> enumerate_solutions(const PwlsProblem<Scalar>& p) {
  p.validate();
  const Index n = p.size();
  if (n > kMaxEnumerationSize) {
    throw SizeGuardError("enumerate_solutions: n = " + std::to_string(n) +
                         " exceeds " + std::to_string(kMaxEnumerationSize));
  }
  Enumeration<Scalar> out;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    SignPattern s = SignPattern::from_mask(mask, n);
    const auto lu = lu_factor(newton_matrix(p, s));
    if (lu.singular()) {
      out.singular_patterns.push_back(std::move(s));
      continue;
    }
    Vector<Scalar> x = lu.solve(p.b);
    bool consistent = true;
    for (Index i = 0; i < n && consistent; ++i) {
      consistent = s[i] ? x(i) > 0 : x(i) <= 0;
    }
    if (consistent) out.solutions.push_back(std::move(x));
  }
  return out;
}

struct DefiniteSignClassification {
  bool has_definite_sign_rows = false;
  std::vector<Index> plus_rows;   // rows >= 0 (all-zero rows land here)
  std::vector<Index> minus_rows;  // rows <= 0
};

template <typename Derived>
DefiniteSignClassification definite_sign_rows(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(m, "definite_sign_rows");
  DefiniteSignClassification c;
  c.has_definite_sign_rows = true;
  if (m.size() == 0) return c;
  const Scalar zero = Scalar(1e-14) * m.cwiseAbs().maxCoeff();
  for (Index i = 0; i < m.rows(); ++i) {
    const bool pos = (m.row(i).array() > zero).any();
    const bool neg = (m.row(i).array() < -zero).any();
    if (pos && neg) {
      c.has_definite_sign_rows = false;
    } else if (neg) {
      c.minus_rows.push_back(i);
    } else {
      c.plus_rows.push_back(i);
    }
  }
  return c;
}

/// True iff every [diag(s) + T] is invertible with definite-sign rows in its
/// inverse, over the supplied patterns.
template <typename Scalar>
bool check_finite_termination_hypothesis(const PwlsProblem<Scalar>& p,
                                         const std::vector<SignPattern>& patterns) {
  p.validate();
  const Index n = p.size();
  for (const auto& s : patterns) {
    if (s.size() != n) throw DimensionError("pattern length mismatch");
    const auto lu = lu_factor(newton_matrix(p, s));
    if (lu.singular()) return false;
    Matrix<Scalar> inv(n, n);
    for (Index j = 0; j < n; ++j) {
      inv.col(j) = lu.solve(Vector<Scalar>::Unit(n, j));
    }
    if (!definite_sign_rows(inv).has_definite_sign_rows) return false;
  }
  return true;
}

/// Exhaustive form over all 2^n patterns.
template <typename Scalar>
bool check_finite_termination_hypothesis(const PwlsProblem<Scalar>& p) {
  p.validate();
  const Index n = p.size();
  if (n > kMaxEnumerationSize) {
    throw SizeGuardError("check_finite_termination_hypothesis: n = " +
                         std::to_string(n) + " exceeds " +
                         std::to_string(kMaxEnumerationSize));
  }
  std::vector<SignPattern> all;
  all.reserve(std::size_t{1} << n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    all.push_back(SignPattern::from_mask(mask, n));
  }
  return check_finite_termination_hypothesis(p, all);
}

}  // namespace ssn
