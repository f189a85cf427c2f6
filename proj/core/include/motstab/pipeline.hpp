#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "motstab/errors.hpp"
#include "motstab/measure.hpp"
#include "motstab/transport.hpp"

namespace motstab {

/// Parameters of the approximation of one irreducible component.
struct PipelineParams {
  double eps = 0.05;
  double R = 0.0;
  double alpha = 1.0;
  Interval K;        // [a, b], mu(K^c) < eps
  Interval K_tilde;  // rows kept by the restriction step
  Interval L_minus;  // side mass used to pull barycentres left
  Interval L_plus;   // and right
  double e = 0.0;    // gap between K_tilde and L_minus / L_plus
  bool auto_select = true;
};

struct ComponentReport {
  double l = 0.0;
  double r = 0.0;
  double mass = 0.0;
  PipelineParams params;
  double aw1_step1 = 0.0;     // AW_1 between the compacted-scaled coupling and pi
  double repair_mass = 0.0;   // integral of (c_- + c_+) / d
  double repair_bound = 0.0;  // (1 / (e * min side mass)) * total defect
  double tau = 0.0;           // smallest potential margin of the residual pair
  double keep_fraction = 0.0;
  std::size_t fallbacks = 0;
  bool side_mass_missing = false;
  double step4_cost = 0.0;    // transport cost of the final martingale M^k
};

struct PipelineReport {
  double eps = 0.0;
  std::vector<ComponentReport> components;
  double w1_mu = 0.0;
  double w1_nu = 0.0;
  double final_aw1 = 0.0;
  double max_defect = 0.0;
  std::size_t fallbacks = 0;
};

/// No side mass of the target in L_minus (or L_plus) although some row needs it.
class SideMassMissing : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The keep-fraction fallback ran out before the residual pair became ordered.
class PipelineFailure : public std::runtime_error {
 public:
  PipelineFailure(const std::string& what, PipelineReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const PipelineReport& report() const noexcept { return report_; }

 private:
  PipelineReport report_;
};

/// Parameter rule for an irreducible probability pair on (l, r).
PipelineParams choose_params(const Coupling& p, double l, double r, double eps);

/// Kernels compactified to [-R, R], then dilated about their row by alpha.
Coupling step1_compact_scale(const Coupling& p, double R, double alpha);

/// nu_k ∧_c (mu_k ∨_c T(nu_R_alpha)), T translating to the mean of mu_k.
DiscreteMeasure build_target_second_marginal(const DiscreteMeasure& nu_k, const DiscreteMeasure& mu_k,
                                             const DiscreteMeasure& nu_R_alpha);

struct RepairResult {
  Coupling coupling;  // sub-probability martingale coupling
  double repair_mass = 0.0;
  double repair_bound = 0.0;
};

/// Copula approximation against (mu_k, target_nu), restriction to rows in
/// K_tilde, then per-row barycentre repair with target mass from L_minus or
/// L_plus. Throws SideMassMissing when a needed side is empty.
RepairResult step2_approx_and_repair(const Coupling& p_Ra, const DiscreteMeasure& mu_k,
                                     const DiscreteMeasure& target_nu, const PipelineParams& params);

/// Completes keep_fraction * partial to a martingale coupling between mu_k and
/// eps nu_k + (1 - eps) target_nu with a Strassen coupling of the residual pair.
/// Throws ConvexOrderViolation (or DomainError for a negative residual) when
/// the residual pair is not ordered.
Coupling step3_complement(const DiscreteMeasure& mu_k, const DiscreteMeasure& nu_k,
                          const DiscreteMeasure& target_nu, const Coupling& partial,
                          double keep_fraction, double eps, double* tau = nullptr);

/// compose(p_bar, min_cost_martingale(second_marginal(p_bar), nu_k)).
Coupling step4_finalize(const Coupling& p_bar, const DiscreteMeasure& nu_k, double* cost = nullptr);

/// Martingale coupling of (mu_k, nu_k) close to the martingale coupling p in AW_1.
/// `params` applies to every component when given (auto_select = false).
std::pair<Coupling, PipelineReport> approximate(const Coupling& p, const DiscreteMeasure& mu_k,
                                                const DiscreteMeasure& nu_k, double eps,
                                                const std::optional<PipelineParams>& params = {});

/// (mu, T(nu) ∨_c mu) with T translating nu to the mean of mu.
std::pair<DiscreteMeasure, DiscreteMeasure> repair_convex_order(const DiscreteMeasure& mu_tilde,
                                                                const DiscreteMeasure& nu_tilde);

}  // namespace motstab
