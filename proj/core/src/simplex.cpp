#include "motstab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "motstab/errors.hpp"

namespace motstab {
namespace {

constexpr double kPivotTol = 1e-11;

class Tableau {
 public:
  Tableau(const LinearProgram& lp)
      : m_(lp.rows), n_(lp.cols), width_(lp.cols + lp.rows + 1),
        t_((lp.rows + 1) * width_, 0.0), basis_(lp.rows), sign_(lp.rows, 1.0) {
    for (std::size_t i = 0; i < m_; ++i) {
      sign_[i] = lp.b[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign_[i] * lp.a(i, j);
      at(i, n_ + i) = 1.0;
      rhs(i) = sign_[i] * lp.b[i];
      basis_[i] = n_ + i;
    }
  }

  double& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * width_ + j]; }
  double& rhs(std::size_t i) { return t_[i * width_ + width_ - 1]; }
  double rhs(std::size_t i) const { return t_[i * width_ + width_ - 1]; }
  double& cost(std::size_t j) { return t_[m_ * width_ + j]; }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }
  double sign(std::size_t i) const { return sign_[i]; }

  // Reduced costs for cost vector c over the current basis.
  void price(const std::vector<double>& c) {
    for (std::size_t j = 0; j < width_; ++j) cost(j) = j < c.size() ? c[j] : 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = basis_[i] < c.size() ? c[basis_[i]] : 0.0;
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) cost(j) -= cb * at(i, j);
    }
  }

  void pivot(std::size_t r, std::size_t s) {
    const double p = at(r, s);
    double* row = &t_[r * width_];
    for (std::size_t j = 0; j < width_; ++j) row[j] /= p;
    row[s] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* other = &t_[i * width_];
      const double f = other[s];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) other[j] -= f * row[j];
      other[s] = 0.0;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (rhs(i) < 0.0 && rhs(i) > -1e-13) rhs(i) = 0.0;
    }
    basis_[r] = s;
  }

  enum class Outcome { kOptimal, kUnbounded, kLimit };

  // Runs simplex iterations; columns >= allowed are never entered.
  Outcome run(std::size_t allowed, double dtol, const SimplexOptions& opts, std::size_t& iters) {
    std::size_t streak = 0;
    while (true) {
      if (iters >= opts.max_iterations) return Outcome::kLimit;
      const bool bland = streak >= opts.degenerate_streak;
      std::size_t s = allowed;
      double best = -dtol;
      for (std::size_t j = 0; j < allowed; ++j) {
        const double d = cost(j);
        if (d < best) {
          s = j;
          if (bland) break;
          best = d;
        }
      }
      if (s == allowed) return Outcome::kOptimal;

      std::size_t r = m_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, s);
        if (a <= kPivotTol) continue;
        const double q = rhs(i) / a;
        if (r == m_) {
          ratio = q;
          r = i;
          continue;
        }
        const double slack = 1e-12 * (1.0 + std::abs(ratio));
        if (q < ratio - slack || (q <= ratio + slack && basis_[i] < basis_[r])) {
          ratio = std::min(q, ratio);
          r = i;
        }
      }
      if (r == m_) return Outcome::kUnbounded;
      streak = ratio <= 1e-14 ? streak + 1 : 0;
      pivot(r, s);
      ++iters;
    }
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
  std::vector<double> sign_;
};

double residual_norm(const LinearProgram& lp, const std::vector<double>& x,
                     const std::vector<bool>& keep) {
  double worst = 0.0;
  for (std::size_t i = 0; i < lp.rows; ++i) {
    if (!keep[i]) continue;
    double s = -lp.b[i];
    for (std::size_t j = 0; j < lp.cols; ++j) s += lp.a(i, j) * x[j];
    worst = std::max(worst, std::abs(s));
  }
  for (double v : x) worst = std::max(worst, -v);
  return worst;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
  if (lp.A.size() != lp.rows * lp.cols || lp.b.size() != lp.rows || lp.c.size() != lp.cols) {
    throw DomainError("solve_lp: inconsistent dimensions");
  }
  LpSolution sol;
  sol.x.assign(lp.cols, 0.0);
  if (lp.rows == 0) {
    sol.status = LpStatus::kOptimal;
    return sol;
  }

  Tableau tab(lp);
  const std::size_t m = lp.rows;
  const std::size_t n = lp.cols;

  // Phase one: minimize the sum of artificials.
  std::vector<double> phase1(n + m, 0.0);
  std::fill(phase1.begin() + static_cast<std::ptrdiff_t>(n), phase1.end(), 1.0);
  tab.price(phase1);
  double bnorm = 0.0;
  for (double v : lp.b) bnorm += std::abs(v);
  auto outcome = tab.run(n, 1e-11, opts, sol.iterations);
  if (outcome == Tableau::Outcome::kLimit) {
    sol.status = LpStatus::kIterationLimit;
    return sol;
  }
  double infeas = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis()[i] >= n) infeas += tab.rhs(i);
  }
  sol.infeasibility = infeas;
  if (infeas > opts.feasibility_tol * (1.0 + bnorm)) {
    sol.status = LpStatus::kInfeasible;
    return sol;
  }

  // Drive remaining artificials out; rows where that fails are redundant.
  std::vector<bool> keep(m, true);
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis()[i] < n) continue;
    std::size_t best = n;
    double mag = 1e-9;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(tab.at(i, j)) > mag) {
        mag = std::abs(tab.at(i, j));
        best = j;
      }
    }
    if (best < n) {
      tab.pivot(i, best);
    } else {
      keep[i] = false;
    }
  }

  // Phase two.
  tab.price(lp.c);
  double cmax = 0.0;
  for (double v : lp.c) cmax = std::max(cmax, std::abs(v));
  outcome = tab.run(n, 1e-11 * (1.0 + cmax), opts, sol.iterations);
  if (outcome == Tableau::Outcome::kUnbounded) {
    sol.status = LpStatus::kUnbounded;
    return sol;
  }
  if (outcome == Tableau::Outcome::kLimit) {
    sol.status = LpStatus::kIterationLimit;
    return sol;
  }

  std::vector<double> x(n, 0.0);
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < m; ++i) {
    if (!keep[i] || tab.basis()[i] >= n) continue;
    x[tab.basis()[i]] = std::max(0.0, tab.rhs(i));
    rows.push_back(i);
    cols.push_back(tab.basis()[i]);
  }

  // Re-solve the basis system from the original data.
  std::vector<double> polished = x;
  {
    const auto k = static_cast<Eigen::Index>(rows.size());
    std::vector<std::size_t> all_rows;
    for (std::size_t i = 0; i < m; ++i) {
      if (keep[i]) all_rows.push_back(i);
    }
    const auto mr = static_cast<Eigen::Index>(all_rows.size());
    Eigen::MatrixXd B(mr, k);
    Eigen::VectorXd rhs(mr);
    for (Eigen::Index r = 0; r < mr; ++r) {
      rhs(r) = lp.b[all_rows[static_cast<std::size_t>(r)]];
      for (Eigen::Index c = 0; c < k; ++c) {
        B(r, c) = lp.a(all_rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
      }
    }
    const Eigen::VectorXd xb = B.colPivHouseholderQr().solve(rhs);
    for (Eigen::Index c = 0; c < k; ++c) {
      polished[cols[static_cast<std::size_t>(c)]] = std::max(0.0, xb(c));
    }
  }
  sol.x = residual_norm(lp, polished, keep) <= residual_norm(lp, x, keep) ? polished : x;
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.c[j] * sol.x[j];
  sol.status = LpStatus::kOptimal;
  return sol;
}

}  // namespace motstab
