#include "motstab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "motstab/copula.hpp"
#include "motstab/martingale.hpp"
#include "motstab/potential.hpp"

namespace motstab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double first_moment(const DiscreteMeasure& m) {
  double s = 0.0;
  for (const Atom& a : m.atoms()) s += a.weight * a.position;
  return s;
}

double scale_of(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return 1.0 + std::max(support_radius(a), support_radius(b));
}

// One irreducible component, all inputs normalized to probability measures.
std::pair<Coupling, ComponentReport> approximate_component(
    const Coupling& pi, double l, double r, const DiscreteMeasure& mu_k, const DiscreteMeasure& nu_k,
    double eps, const std::optional<PipelineParams>& given) {
  ComponentReport rep;
  rep.l = l;
  rep.r = r;
  rep.params = given ? *given : choose_params(pi, l, r, eps);
  const PipelineParams& prm = rep.params;

  // Step 1.
  const Coupling p_Ra = step1_compact_scale(pi, prm.R, prm.alpha);
  rep.aw1_step1 = aw_distance(p_Ra, pi, 1.0).distance;

  // Step 2.
  const DiscreteMeasure target = build_target_second_marginal(nu_k, mu_k, second_marginal(p_Ra));
  Coupling partial;
  try {
    RepairResult repaired = step2_approx_and_repair(p_Ra, mu_k, target, prm);
    partial = std::move(repaired.coupling);
    rep.repair_mass = repaired.repair_mass;
    rep.repair_bound = repaired.repair_bound;
  } catch (const SideMassMissing&) {
    // No side mass to repair with at this resolution: complete from scratch.
    rep.side_mass_missing = true;
    ++rep.fallbacks;
  }

  // Step 3 with the keep-fraction fallback.
  double keep = partial.empty() ? 0.0 : 1.0 - 2.0 * eps;
  Coupling p_bar;
  while (true) {
    try {
      p_bar = step3_complement(mu_k, nu_k, target, partial, keep, eps, &rep.tau);
      break;
    } catch (const DomainError&) {
      ++rep.fallbacks;
      // keep = 0 is the last resort: mu_k is below the blended target by construction.
      if (keep == 0.0) {
        PipelineReport failed;
        failed.eps = eps;
        failed.components.push_back(rep);
        failed.fallbacks = rep.fallbacks;
        throw PipelineFailure("residual pair never became convex-ordered", failed);
      }
      keep = keep < 1e-3 ? 0.0 : 0.5 * keep;
    }
  }
  rep.keep_fraction = keep;

  // Step 4.
  Coupling out = step4_finalize(p_bar, nu_k, &rep.step4_cost);
  return {std::move(out), rep};
}

}  // namespace

PipelineParams choose_params(const Coupling& p, double l, double r, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw DomainError("eps must lie in (0, 1/2)");
  const DiscreteMeasure mu = first_marginal(p);
  const DiscreteMeasure nu = second_marginal(p);
  PipelineParams prm;
  prm.eps = eps;
  prm.auto_select = true;

  // Smallest quantile interval leaving at most eps/2 of mass on either side.
  const double a = quantile(mu, 0.5 * eps);
  const double b = quantile(mu, mu.total_mass() * (1.0 - 0.5 * eps));
  prm.K = Interval::closed(a, b);
  const double at = std::max(0.5 * (l + a), a - 1.0);
  const double bt = std::min(b + 1.0, 0.5 * (b + r));

  // With R covering the support of nu, compactification is the identity, so
  // the kernel-change integral vanishes and the side masses of nu survive.
  prm.R = std::max({std::abs(a), std::abs(b), support_radius(nu)});
  const double R = prm.R;
  const double kernel_change = 0.0;

  const double lower1 = (2.0 * R - a - at) / (2.0 * R - 2.0 * at);
  const double lower2 = (b + bt + 2.0 * R) / (2.0 * bt + 2.0 * R);
  const double moments = moment(mu, 1.0, 0.0) + moment(nu, 1.0, 0.0);
  const double lower3 = 1.0 - (eps - kernel_change) / (1.0 + moments);
  prm.alpha = std::clamp(std::max({lower1, lower2, lower3}), std::numeric_limits<double>::min(), 1.0);

  prm.K_tilde = Interval::open(0.25 * (3.0 * a + at), 0.25 * (3.0 * b + bt));
  prm.L_minus = Interval::open(-kInf, 0.5 * (a + at));
  prm.L_plus = Interval::open(0.5 * (b + bt), kInf);
  prm.e = std::min(0.25 * (a - at), 0.25 * (bt - b));
  return prm;
}

Coupling step1_compact_scale(const Coupling& p, double R, double alpha) {
  if (!(R > 0.0)) throw DomainError("step1: R must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("step1: alpha must lie in (0, 1]");
  std::vector<Coupling::Row> rows;
  rows.reserve(p.size());
  for (const auto& row : p.rows()) {
    DiscreteMeasure k = compactify(row.kernel, R);
    if (alpha != 1.0) {
      const double x = row.x;
      k = pushforward(k, [=](double y) { return alpha * (y - x) + x; });
    }
    rows.push_back({row.x, row.weight, std::move(k)});
  }
  return Coupling(std::move(rows));
}

DiscreteMeasure build_target_second_marginal(const DiscreteMeasure& nu_k, const DiscreteMeasure& mu_k,
                                             const DiscreteMeasure& nu_R_alpha) {
  require_convex_order(mu_k, nu_k, default_order_tol(mu_k, nu_k));
  const DiscreteMeasure shifted = translate(nu_R_alpha, barycenter(mu_k) - barycenter(nu_R_alpha));
  return inf_c(nu_k, sup_c(mu_k, shifted));
}

RepairResult step2_approx_and_repair(const Coupling& p_Ra, const DiscreteMeasure& mu_k,
                                     const DiscreteMeasure& target_nu, const PipelineParams& params) {
  const Coupling approx = approx_coupling(p_Ra, mu_k, target_nu);
  const DiscreteMeasure side_minus = restrict(target_nu, params.L_minus);
  const DiscreteMeasure side_plus = restrict(target_nu, params.L_plus);
  const double mass_minus = side_minus.total_mass();
  const double mass_plus = side_plus.total_mass();

  RepairResult out;
  double defect_sum = 0.0;
  std::vector<Coupling::Row> rows;
  for (const auto& row : approx.rows()) {
    if (!params.K_tilde.contains(row.x)) continue;
    const double x = row.x;
    const double bary = barycenter(row.kernel);
    const double defect = bary - x;
    defect_sum += row.weight * std::abs(defect);
    if (std::abs(defect) <= 1e-15 * (1.0 + std::abs(x))) {
      rows.push_back(row);
      continue;
    }
    // Mix in side mass on the far side of x so the barycentre lands on x.
    const bool pull_left = defect > 0.0;
    const DiscreteMeasure& side = pull_left ? side_minus : side_plus;
    const double side_mass = pull_left ? mass_minus : mass_plus;
    if (!(side_mass > 0.0)) {
      throw SideMassMissing(pull_left ? "no target mass in L_minus" : "no target mass in L_plus");
    }
    const double lever = pull_left ? x * side_mass - first_moment(side) : first_moment(side) - x * side_mass;
    const double c = std::abs(defect) / lever;
    const double d = 1.0 + c * side_mass;
    DiscreteMeasure kernel = mul(add(row.kernel, mul(side, c)), 1.0 / d);
    out.repair_mass += row.weight * c / d;
    rows.push_back({x, row.weight, std::move(kernel)});
  }
  const double side_min = std::min(mass_minus, mass_plus);
  out.repair_bound = side_min > 0.0 && params.e > 0.0 ? defect_sum / (params.e * side_min) : kInf;
  out.coupling = Coupling(std::move(rows));
  return out;
}

Coupling step3_complement(const DiscreteMeasure& mu_k, const DiscreteMeasure& nu_k,
                          const DiscreteMeasure& target_nu, const Coupling& partial,
                          double keep_fraction, double eps, double* tau) {
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0)) {
    throw DomainError("step3: keep_fraction must lie in [0, 1]");
  }
  const DiscreteMeasure blended = add(mul(nu_k, eps), mul(target_nu, 1.0 - eps));
  const Coupling kept = keep_fraction > 0.0 ? scale(partial, keep_fraction) : Coupling{};
  const double tol = 1e-13 * (1.0 + mu_k.total_mass());
  const DiscreteMeasure res_mu = subtract(mu_k, first_marginal(kept), tol);
  const DiscreteMeasure res_nu = subtract(blended, second_marginal(kept), tol);
  if (tau != nullptr) {
    double margin = kInf;
    if (!res_mu.empty() && !res_nu.empty()) {
      const PotentialFunction um = potential_of(res_mu);
      const PotentialFunction un = potential_of(res_nu);
      for (const Atom& a : res_mu.atoms()) margin = std::min(margin, un(a.position) - um(a.position));
    }
    *tau = std::isfinite(margin) ? margin : 0.0;
  }
  const Coupling eta = strassen_coupling(res_mu, res_nu);
  return add(eta, kept);
}

Coupling step4_finalize(const Coupling& p_bar, const DiscreteMeasure& nu_k, double* cost) {
  const Coupling m = min_cost_martingale(second_marginal(p_bar), nu_k);
  if (cost != nullptr) *cost = transport_cost(m);
  return compose(p_bar, m);
}

std::pair<DiscreteMeasure, DiscreteMeasure> repair_convex_order(const DiscreteMeasure& mu_tilde,
                                                                const DiscreteMeasure& nu_tilde) {
  const DiscreteMeasure shifted = translate(nu_tilde, barycenter(mu_tilde) - barycenter(nu_tilde));
  return {mu_tilde, sup_c(mu_tilde, shifted)};
}

std::pair<Coupling, PipelineReport> approximate(const Coupling& p, const DiscreteMeasure& mu_k,
                                                const DiscreteMeasure& nu_k, double eps,
                                                const std::optional<PipelineParams>& params) {
  if (!(eps > 0.0 && eps < 0.5)) throw DomainError("approximate: eps must lie in (0, 1/2)");
  const DiscreteMeasure mu = first_marginal(p);
  const DiscreteMeasure nu = second_marginal(p);
  const double size = scale_of(mu, nu);
  if (!martingale_diagnostics(p, 1e-8 * size).is_martingale) {
    throw DomainError("approximate: input coupling is not a martingale coupling");
  }
  require_convex_order(mu_k, nu_k, default_order_tol(mu_k, nu_k));

  PipelineReport report;
  report.eps = eps;
  const IrreducibleDecomposition dec = irreducible_components(mu, nu);
  const CouplingDecomposition parts = decompose_coupling(p, dec);

  // Quantile slices of a martingale coupling of the new pair, one per component.
  const Coupling base = min_cost_martingale(mu_k, nu_k);
  std::vector<std::pair<double, double>> bounds;
  for (const auto& c : dec.components) bounds.emplace_back(cdf(mu, c.l), cdf_left(mu, c.r));
  const SlicedCoupling sliced = slice_pair_by_quantiles(base, bounds);

  Coupling out;
  for (std::size_t n = 0; n < dec.components.size(); ++n) {
    const auto& comp = dec.components[n];
    const double mass = comp.mu.total_mass();
    // slice_pair_by_quantiles sorts by lower bound, which is also component order.
    const QuantileSlice& slice = sliced.slices[n];
    auto [piece, crep] = approximate_component(scale(parts.parts[n], 1.0 / mass), comp.l, comp.r,
                                               normalized(slice.mu), normalized(slice.nu), eps, params);
    crep.mass = mass;
    report.fallbacks += crep.fallbacks;
    report.components.push_back(crep);
    out = add(out, scale(piece, slice.mu.total_mass()));
  }
  if (!sliced.remainder.coupling.empty()) {
    out = add(out, min_cost_martingale(sliced.remainder.mu, sliced.remainder.nu));
  }

  report.w1_mu = w_1d(mu, mu_k, 1.0);
  report.w1_nu = w_1d(nu, nu_k, 1.0);
  report.final_aw1 = aw_distance(out, p, 1.0).distance;
  report.max_defect = martingale_diagnostics(out, 0.0).max_defect;
  if (report.max_defect > 1e-8 * scale_of(mu_k, nu_k)) {
    throw InternalError("approximate: output is not a martingale coupling");
  }
  return {std::move(out), std::move(report)};
}

}  // namespace motstab
