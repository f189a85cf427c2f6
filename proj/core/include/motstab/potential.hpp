#pragma once

#include <cstddef>
#include <vector>

#include "motstab/measure.hpp"

namespace motstab {

/// u(y) = sum_i w_i |y - x_i| for a discrete measure, stored exactly.
///
/// The function is piecewise linear with kinks at `knots`. Besides the value at
/// each knot we keep the slope jump there, so converting back to a measure
/// (weight = jump / 2) is exact. Left of the first knot the slope is -mass and
/// right of the last one it is +mass; the asymptotes meet at (mean, 0).
class PotentialFunction {
 public:
  struct Knot {
    double y;
    double value;
    double jump;  // right slope minus left slope, > 0
  };

  PotentialFunction() = default;

  /// Validates convexity (positive jumps) and that jumps add up to 2 * mass.
  /// Throws ValidationError otherwise.
  PotentialFunction(std::vector<Knot> knots, double mass, double mean);

  std::span<const Knot> knots() const noexcept { return knots_; }
  double mass() const noexcept { return mass_; }
  double mean() const noexcept { return mean_; }

  /// Evaluates u at any real y.
  double operator()(double y) const;

  /// Slope on the open segment right of knot k (k = -1 for the left ray).
  double slope_after(std::ptrdiff_t k) const;

 private:
  std::vector<Knot> knots_;
  std::vector<double> slopes_;  // slopes_[k + 1] = slope right of knot k
  double mass_ = 0.0;
  double mean_ = 0.0;
};

PotentialFunction potential_of(const DiscreteMeasure& m);
DiscreteMeasure measure_of(const PotentialFunction& u);

/// Scale-aware default tolerance for convex_order_leq.
double default_order_tol(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Largest value of u_mu - u_nu over the knots of both potentials, and where.
struct OrderGap {
  double witness = 0.0;
  double excess = 0.0;
};
OrderGap max_order_gap(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// mu <=_c nu up to tol: masses and first moments agree, u_mu <= u_nu + tol on
/// every knot of either potential.
bool convex_order_leq(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double tol);
bool convex_order_leq(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Throws ConvexOrderViolation with the worst knot unless mu <=_c nu.
void require_convex_order(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double tol);

/// Measure whose potential is max(u_mu, u_nu).
DiscreteMeasure sup_c(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
/// Measure whose potential is the lower convex envelope of min(u_mu, u_nu).
DiscreteMeasure inf_c(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// p ∧_c eta^R where eta^R is the two-point law on {-R, R} with the mean of p.
/// Returns the Dirac at the mean when R < |mean|.
DiscreteMeasure compactify(const DiscreteMeasure& p, double R);

struct IrreducibleComponent {
  double l;
  double r;
  DiscreteMeasure mu;
  DiscreteMeasure nu;
};

struct IrreducibleDecomposition {
  std::vector<IrreducibleComponent> components;
  DiscreteMeasure eta;
};

/// Splits a pair in convex order along the open intervals where u_mu < u_nu.
IrreducibleDecomposition irreducible_components(const DiscreteMeasure& mu,
                                                const DiscreteMeasure& nu);

}  // namespace motstab
