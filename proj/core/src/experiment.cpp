#include "motstab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <random>

#include "motstab/errors.hpp"
#include "motstab/pipeline.hpp"

namespace motstab {
namespace {

// 53 random bits mapped to [0, 1); identical on every platform, unlike the
// standard distributions.
double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

DiscreteMeasure spread(const DiscreteMeasure& m, double h, std::mt19937_64& gen) {
  std::vector<Atom> atoms;
  atoms.reserve(2 * m.size());
  for (const Atom& a : m.atoms()) {
    const double left = 0.25 + 0.5 * unit(gen);
    atoms.push_back({a.position - h, a.weight * left});
    atoms.push_back({a.position + h, a.weight * (1.0 - left)});
  }
  return DiscreteMeasure(std::move(atoms));
}

}  // namespace

DiscreteMeasure quantile_coarsen(const DiscreteMeasure& m, int n) {
  if (n <= 0) throw DomainError("quantile_coarsen: n must be positive");
  if (m.empty()) return m;
  const double total = m.total_mass();
  const double block = total / n;
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(n));
  std::size_t i = 0;
  double used = 0.0;  // mass of atom i already assigned to earlier blocks
  for (int k = 0; k < n; ++k) {
    double need = block;
    double first = 0.0;
    while (need > 0.0 && i < m.size()) {
      const double take = std::min(need, m[i].weight - used);
      first += take * m[i].position;
      need -= take;
      used += take;
      if (used >= m[i].weight) {
        ++i;
        used = 0.0;
      }
    }
    const double got = block - need;
    if (got > 0.0) atoms.push_back({first / got, got});
  }
  return DiscreteMeasure(std::move(atoms));
}

std::pair<DiscreteMeasure, DiscreteMeasure> perturb_pair(const Coupling& p, const LevelSpec& spec,
                                                         std::uint64_t seed, std::size_t level) {
  const DiscreteMeasure mu = first_marginal(p);
  const DiscreteMeasure nu = second_marginal(p);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(level)};
  std::mt19937_64 gen(seq);
  if (spec.kind == "none") return {mu, nu};
  if (spec.kind == "quantile_coarsen") {
    return repair_convex_order(quantile_coarsen(mu, spec.n), quantile_coarsen(nu, spec.n));
  }
  if (spec.kind == "spread") {
    if (!(spec.delta >= 0.0)) throw DomainError("spread level needs delta >= 0");
    const double h = spec.delta * (nu.max_position() - nu.min_position());
    DiscreteMeasure mt = spread(mu, h, gen);
    DiscreteMeasure nt = spread(nu, h, gen);
    return repair_convex_order(mt, nt);
  }
  if (spec.kind == "contract") {
    const double m = barycenter(nu);
    const double spread_nu = moment(nu, 1.0, m) / nu.total_mass();
    const double t = spread_nu > 0.0 ? spec.delta * (nu.max_position() - nu.min_position()) / spread_nu : 0.0;
    if (!(spec.delta >= 0.0 && t <= 1.0)) throw DomainError("contract level needs 0 <= delta with error below E|Y - m|");
    const auto shrink = [m, t](double x) { return m + (1.0 - t) * (x - m); };
    return repair_convex_order(pushforward(mu, shrink), pushforward(nu, shrink));
  }
  throw DomainError("unknown level kind '" + spec.kind + "'");
}

std::vector<ExperimentRow> convergence_experiment(const Coupling& p, const std::vector<LevelSpec>& levels,
                                                  double eps, std::uint64_t seed) {
  std::vector<ExperimentRow> table;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    ExperimentRow row;
    row.level = k;
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto [mu_k, nu_k] = perturb_pair(p, levels[k], seed, k);
      const auto [out, report] = approximate(p, mu_k, nu_k, eps);
      row.w1_mu = report.w1_mu;
      row.w1_nu = report.w1_nu;
      row.aw1 = report.final_aw1;
      row.fallbacks = report.fallbacks;
      row.ok = true;
    } catch (const PipelineFailure& f) {
      row.fallbacks = f.report().fallbacks;
      row.error = f.what();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace motstab
