#pragma once

#include <vector>

#include "motstab/measure.hpp"
#include "motstab/transport.hpp"

namespace motstab {

/// Uniform mass on the half-open v-interval (lo, hi].
struct UniformBlock {
  double lo;
  double hi;
  double mass;
};

/// Copula of a probability coupling, stored by its kernels u -> C_u.
///
/// C_u is constant on each jump (u_lo, u_hi] of F_mu. For a row with kernel K,
/// C_u is the image of K x Lebesgue under (y, w) -> F_nu(y-) + w nu({y}), which
/// puts a uniform block of mass K({y}) on (F_nu(y-), F_nu(y)] for each atom y.
struct CopulaKernelTable {
  std::vector<double> u_breaks;                  // 0 = u_0 < u_1 < ... < u_n = 1
  std::vector<std::vector<UniformBlock>> kernels;  // one block list per interval
};

CopulaKernelTable copula_of(const Coupling& p);

/// Coupling of (mu_k, nu_k) obtained by averaging C over each CDF jump of mu_k
/// and pushing the result through the quantile function of nu_k. Every step is
/// exact interval arithmetic on the block representation.
Coupling approx_coupling(const Coupling& p, const DiscreteMeasure& mu_k, const DiscreteMeasure& nu_k);

struct EstimateCheck {
  double lhs;
  double rhs;
  bool holds;
};

/// AW_r^r(p, p_k) against W_r^r(mu, mu_k) + W_r^r(nu, nu_k).
EstimateCheck check_estimate(const Coupling& p, const Coupling& p_k, double r);

/// True when every CDF jump interval of mu_k lies inside one jump interval of mu.
bool jumps_nested(const DiscreteMeasure& mu, const DiscreteMeasure& mu_k);

}  // namespace motstab
