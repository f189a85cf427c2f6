#pragma once

#include <cstddef>
#include <vector>

namespace motstab {

/// Dense standard-form linear program: minimize c.x subject to A x = b, x >= 0.
/// A is row-major with `rows` rows and `cols` columns.
struct LinearProgram {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> A;
  std::vector<double> b;
  std::vector<double> c;

  LinearProgram(std::size_t m, std::size_t n) : rows(m), cols(n), A(m * n, 0.0), b(m, 0.0), c(n, 0.0) {}
  double& a(std::size_t i, std::size_t j) { return A[i * cols + j]; }
  double a(std::size_t i, std::size_t j) const { return A[i * cols + j]; }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  /// Sum of artificial variables left after phase one (0 when feasible).
  double infeasibility = 0.0;
  std::size_t iterations = 0;
};

struct SimplexOptions {
  /// Phase-one residual above which the problem is declared infeasible,
  /// relative to 1 + |b|_1.
  double feasibility_tol = 1e-9;
  /// Consecutive degenerate pivots before switching from Dantzig to Bland.
  std::size_t degenerate_streak = 50;
  std::size_t max_iterations = 200000;
};

/// Two-phase tableau simplex. Pricing is Dantzig's rule with lowest-index ties,
/// falling back to Bland's rule after a run of degenerate pivots; ratio-test
/// ties also go to the lowest basic index. Redundant equality rows are dropped
/// after phase one. The final basic solution is re-solved from the original data by a
/// pivoted QR factorization of the basis matrix so that equality residuals are at round-off level.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts = {});

}  // namespace motstab
