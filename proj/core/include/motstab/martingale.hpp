#pragma once

#include <utility>
#include <vector>

#include "motstab/measure.hpp"
#include "motstab/potential.hpp"
#include "motstab/transport.hpp"

namespace motstab {

struct MartingaleDiagnostics {
  double max_defect = 0.0;   // max_i |bary(K_i) - x_i|
  double mean_defect = 0.0;  // weighted average of the same
  bool is_martingale = true;
};

MartingaleDiagnostics martingale_diagnostics(const Coupling& p, double tol);
/// 1e-8 (1 + largest |x| or |y| in p).
double default_martingale_tol(const Coupling& p);

/// Martingale coupling of (mu, nu) minimizing sum gamma_ij |x_i - y_j|.
/// Throws ConvexOrderViolation (with the worst knot as witness) when mu is
/// not below nu in convex order.
Coupling min_cost_martingale(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Some martingale coupling of (mu, nu); the cost-minimal one, so the result
/// is deterministic.
Coupling strassen_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// sum_i w_i sum_y K_i(y) |x_i - y|.
double transport_cost(const Coupling& p);

/// Chains kernels: out_x = sum_z p_x({z}) m_z. Requires the second marginal
/// of p to match the first marginal of m.
Coupling compose(const Coupling& p, const Coupling& m);

struct CouplingDecomposition {
  std::vector<Coupling> parts;  // one per irreducible component
  Coupling identity_part;       // rows sitting on the contact set
};

CouplingDecomposition decompose_coupling(const Coupling& p, const IrreducibleDecomposition& d);

struct QuantileSlice {
  DiscreteMeasure mu;
  DiscreteMeasure nu;
  Coupling coupling;
};

struct SlicedCoupling {
  std::vector<QuantileSlice> slices;
  QuantileSlice remainder;
};

/// Cuts the rows of p_k along the first-marginal mass axis: slice n keeps the
/// part of p_k sitting over (u_lo, u_hi] of F_{mu_k}, splitting straddling atoms
/// proportionally.
SlicedCoupling slice_pair_by_quantiles(const Coupling& p_k,
                                       const std::vector<std::pair<double, double>>& boundaries);

}  // namespace motstab
