#include "motstab/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "motstab/errors.hpp"
#include "motstab/simplex.hpp"

namespace motstab {
namespace {

// Row weights and positions of `got` must match `want` atom by atom.
void require_same_measure(const DiscreteMeasure& got, const DiscreteMeasure& want, const char* op) {
  const double tol = mass_tolerance(std::max(got.total_mass(), want.total_mass()));
  if (got.size() != want.size()) {
    throw DomainError(std::string(op) + ": marginal has " + std::to_string(got.size()) +
                      " atoms, expected " + std::to_string(want.size()));
  }
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].position != want[i].position || std::abs(got[i].weight - want[i].weight) > tol) {
      throw DomainError(std::string(op) + ": marginal mismatch at x = " +
                        std::to_string(want[i].position));
    }
  }
}

}  // namespace

double default_martingale_tol(const Coupling& p) {
  return 1e-8 * (1.0 + std::max(support_radius(first_marginal(p)), support_radius(second_marginal(p))));
}

MartingaleDiagnostics martingale_diagnostics(const Coupling& p, double tol) {
  MartingaleDiagnostics d;
  double weighted = 0.0;
  for (const auto& row : p.rows()) {
    const double defect = std::abs(barycenter(row.kernel) - row.x);
    d.max_defect = std::max(d.max_defect, defect);
    weighted += row.weight * defect;
  }
  if (p.total_mass() > 0.0) d.mean_defect = weighted / p.total_mass();
  d.is_martingale = d.max_defect <= tol;
  return d;
}

Coupling min_cost_martingale(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_convex_order(mu, nu, default_order_tol(mu, nu));
  if (mu.empty()) return {};
  if (mu == nu) return identity_coupling(mu);

  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  LinearProgram lp(2 * m + n, m * n);
  const double ratio = mu.total_mass() / nu.total_mass();
  for (std::size_t i = 0; i < m; ++i) {
    const double x = mu[i].position;
    const double conditioning = 1.0 / (1.0 + std::abs(x));
    lp.b[i] = mu[i].weight;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = i * n + j;
      const double y = nu[j].position;
      lp.a(i, k) = 1.0;
      lp.a(m + j, k) = 1.0;
      lp.a(m + n + i, k) = (y - x) * conditioning;
      lp.c[k] = std::abs(x - y);
    }
  }
  for (std::size_t j = 0; j < n; ++j) lp.b[m + j] = nu[j].weight * ratio;

  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible) {
    const OrderGap gap = max_order_gap(mu, nu);
    throw ConvexOrderViolation("no martingale coupling exists (phase-one residual " +
                                   std::to_string(sol.infeasibility) + ")",
                               gap.witness, gap.excess);
  }
  if (sol.status != LpStatus::kOptimal) {
    throw InternalError("min_cost_martingale: LP solver failed");
  }

  std::vector<Coupling::Row> rows;
  rows.reserve(m);
  const double drop = 1e-15 * mu.total_mass();
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<Atom> kernel;
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double g = sol.x[i * n + j];
      if (g > drop) {
        kernel.push_back({nu[j].position, g});
        row_sum += g;
      }
    }
    for (Atom& a : kernel) a.weight /= row_sum;
    rows.push_back({mu[i].position, mu[i].weight, DiscreteMeasure(std::move(kernel))});
  }
  return Coupling(std::move(rows));
}

Coupling strassen_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return min_cost_martingale(mu, nu);
}

double transport_cost(const Coupling& p) {
  double cost = 0.0;
  for (const auto& row : p.rows()) {
    for (const Atom& a : row.kernel.atoms()) cost += row.weight * a.weight * std::abs(a.position - row.x);
  }
  return cost;
}

Coupling compose(const Coupling& p, const Coupling& m) {
  require_same_measure(first_marginal(m), second_marginal(p), "compose");
  const auto mrows = m.rows();
  std::vector<Coupling::Row> rows;
  rows.reserve(p.size());
  for (const auto& row : p.rows()) {
    std::vector<Atom> atoms;
    for (const Atom& z : row.kernel.atoms()) {
      const auto it = std::lower_bound(mrows.begin(), mrows.end(), z.position,
                                       [](const Coupling::Row& r, double v) { return r.x < v; });
      for (const Atom& y : it->kernel.atoms()) atoms.push_back({y.position, z.weight * y.weight});
    }
    rows.push_back({row.x, row.weight, DiscreteMeasure(std::move(atoms))});
  }
  return Coupling(std::move(rows));
}

CouplingDecomposition decompose_coupling(const Coupling& p, const IrreducibleDecomposition& d) {
  CouplingDecomposition out;
  std::vector<bool> used(p.size(), false);
  for (const auto& c : d.components) {
    const Interval span = Interval::open(c.l, c.r);
    std::vector<Coupling::Row> rows;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (span.contains(p[i].x)) {
        rows.push_back(p[i]);
        used[i] = true;
      }
    }
    Coupling part(std::move(rows));
    require_same_measure(first_marginal(part), c.mu, "decompose_coupling");
    out.parts.push_back(std::move(part));
  }
  std::vector<Coupling::Row> rest;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!used[i]) rest.push_back(p[i]);
  }
  out.identity_part = Coupling(std::move(rest));
  require_same_measure(first_marginal(out.identity_part), d.eta, "decompose_coupling");
  return out;
}

SlicedCoupling slice_pair_by_quantiles(const Coupling& p_k,
                                       const std::vector<std::pair<double, double>>& boundaries) {
  std::vector<std::pair<double, double>> sorted = boundaries;
  std::sort(sorted.begin(), sorted.end());
  const double total = p_k.total_mass();
  const double end_tol = 1e-12 * (1.0 + total);
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const auto [lo, hi] = sorted[k];
    if (!(lo >= 0.0) || !(hi > lo) || hi > total + end_tol) {
      throw DomainError("slice_pair_by_quantiles: bad boundary (" + std::to_string(lo) + ", " +
                        std::to_string(hi) + ")");
    }
    if (k > 0 && lo < sorted[k - 1].second) {
      throw DomainError("slice_pair_by_quantiles: overlapping boundaries");
    }
  }

  std::vector<std::vector<Coupling::Row>> slice_rows(sorted.size());
  std::vector<Coupling::Row> rest;
  double s = 0.0;
  for (const auto& row : p_k.rows()) {
    const double t = s + row.weight;
    double taken = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      const double lo = sorted[k].first;
      // A slice reaching the end of the mass axis absorbs round-off in t.
      const double hi = sorted[k].second >= total - end_tol ? t : sorted[k].second;
      if (lo <= s && hi >= t) {
        slice_rows[k].push_back(row);
        taken = row.weight;
        break;
      }
      const double ov = std::min(t, hi) - std::max(s, lo);
      if (ov > 0.0) {
        slice_rows[k].push_back({row.x, ov, row.kernel});
        taken += ov;
      }
    }
    const double left = row.weight - taken;
    if (left > 1e-15 * (1.0 + row.weight)) rest.push_back({row.x, left, row.kernel});
    s = t;
  }

  SlicedCoupling out;
  for (auto& rows : slice_rows) {
    Coupling c(std::move(rows));
    out.slices.push_back({first_marginal(c), second_marginal(c), c});
  }
  Coupling r(std::move(rest));
  out.remainder = {first_marginal(r), second_marginal(r), r};
  return out;
}

}  // namespace motstab
