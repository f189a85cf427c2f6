#include "motstab/copula.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "motstab/errors.hpp"

namespace motstab {
namespace {

void require_probability(double mass, const char* what) {
  if (std::abs(mass - 1.0) > mass_tolerance(1.0)) {
    throw DomainError(std::string(what) + " must have total mass 1, got " + std::to_string(mass));
  }
}

std::vector<double> cumulative(const DiscreteMeasure& m) {
  std::vector<double> c;
  c.reserve(m.size() + 1);
  c.push_back(0.0);
  for (const Atom& a : m.atoms()) c.push_back(c.back() + a.weight);
  return c;
}

// Both partitions start at exactly 0 but their totals may differ by round-off;
// stretching the shorter one to the longer end keeps every bit of mass.
void align_ends(std::vector<double>& a, std::vector<double>& b) {
  const double end = std::max(a.back(), b.back());
  a.back() = end;
  b.back() = end;
}

}  // namespace

CopulaKernelTable copula_of(const Coupling& p) {
  require_probability(p.total_mass(), "copula_of: coupling");
  const DiscreteMeasure nu = second_marginal(p);
  const std::vector<double> fn = cumulative(nu);
  const auto nu_atoms = nu.atoms();

  CopulaKernelTable table;
  table.u_breaks.reserve(p.size() + 1);
  table.u_breaks.push_back(0.0);
  for (const auto& row : p.rows()) {
    table.u_breaks.push_back(table.u_breaks.back() + row.weight);
    std::vector<UniformBlock> blocks;
    blocks.reserve(row.kernel.size());
    for (const Atom& a : row.kernel.atoms()) {
      const auto it = std::lower_bound(nu_atoms.begin(), nu_atoms.end(), a.position,
                                       [](const Atom& x, double y) { return x.position < y; });
      const auto k = static_cast<std::size_t>(it - nu_atoms.begin());
      blocks.push_back({fn[k], fn[k + 1], a.weight});
    }
    table.kernels.push_back(std::move(blocks));
  }
  return table;
}

Coupling approx_coupling(const Coupling& p, const DiscreteMeasure& mu_k, const DiscreteMeasure& nu_k) {
  require_probability(mu_k.total_mass(), "approx_coupling: mu_k");
  require_probability(nu_k.total_mass(), "approx_coupling: nu_k");
  CopulaKernelTable table = copula_of(p);
  std::vector<double> fk = cumulative(mu_k);
  std::vector<double> gk = cumulative(nu_k);
  align_ends(fk, table.u_breaks);
  double v_end = 0.0;
  for (const auto& blocks : table.kernels) {
    for (const UniformBlock& blk : blocks) v_end = std::max(v_end, blk.hi);
  }
  gk.back() = std::max(gk.back(), v_end);
  for (auto& blocks : table.kernels) {
    for (UniformBlock& blk : blocks) {
      if (blk.hi == v_end) blk.hi = gk.back();
    }
  }
  const std::size_t n_table = table.kernels.size();
  const auto& u = table.u_breaks;

  std::vector<Coupling::Row> rows;
  rows.reserve(mu_k.size());
  std::size_t first = 0;  // first table interval that can still overlap
  for (std::size_t i = 0; i < mu_k.size(); ++i) {
    const double s = fk[i];
    const double t = fk[i + 1];
    const double width = t - s;
    std::vector<double> weights(nu_k.size(), 0.0);
    while (first < n_table && u[first + 1] <= s) ++first;
    for (std::size_t l = first; l < n_table; ++l) {
      if (u[l] >= t) break;
      const double overlap = std::min(t, u[l + 1]) - std::max(s, u[l]);
      if (!(overlap > 0.0)) continue;
      const double share = overlap / width;
      for (const UniformBlock& blk : table.kernels[l]) {
        const double mass = blk.mass * share;
        const double len = blk.hi - blk.lo;
        auto j = static_cast<std::size_t>(
            std::upper_bound(gk.begin() + 1, gk.end() - 1, blk.lo) - (gk.begin() + 1));
        for (; j < nu_k.size(); ++j) {
          if (gk[j] >= blk.hi) break;
          const double ov = std::min(blk.hi, gk[j + 1]) - std::max(blk.lo, gk[j]);
          if (ov > 0.0) weights[j] += mass * (ov / len);
        }
      }
    }
    std::vector<Atom> kernel;
    double total = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
      if (weights[j] > 0.0) {
        kernel.push_back({nu_k[j].position, weights[j]});
        total += weights[j];
      }
    }
    if (std::abs(total - 1.0) > mass_tolerance(1.0)) {
      throw InternalError("approx_coupling: kernel mass " + std::to_string(total));
    }
    rows.push_back({mu_k[i].position, mu_k[i].weight, DiscreteMeasure(std::move(kernel))});
  }
  return Coupling(std::move(rows));
}

EstimateCheck check_estimate(const Coupling& p, const Coupling& p_k, double r) {
  const double aw = aw_distance(p, p_k, r).distance;
  const double lhs = std::pow(aw, r);
  const double wm = w_1d(first_marginal(p), first_marginal(p_k), r);
  const double wn = w_1d(second_marginal(p), second_marginal(p_k), r);
  const double rhs = std::pow(wm, r) + std::pow(wn, r);
  return {lhs, rhs, lhs <= rhs + 1e-9};
}

bool jumps_nested(const DiscreteMeasure& mu, const DiscreteMeasure& mu_k) {
  const std::vector<double> f = cumulative(mu);
  const std::vector<double> fk = cumulative(mu_k);
  const double tol = 1e-12;
  std::size_t l = 0;
  for (std::size_t i = 0; i + 1 < fk.size(); ++i) {
    while (l + 2 < f.size() && f[l + 1] <= fk[i] + tol) ++l;
    if (fk[i + 1] > f[l + 1] + tol) return false;
  }
  return true;
}

}  // namespace motstab
