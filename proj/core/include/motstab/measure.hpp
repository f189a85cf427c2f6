#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace motstab {

struct Atom {
  double position = 0.0;
  double weight = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite positive measure on the real line with finitely many atoms.
///
/// Atoms are kept sorted by strictly increasing position. Atoms sharing an
/// identical position (exact binary comparison) are merged at construction and
/// zero weights are dropped, so two measures compare equal iff their atom lists
/// are bitwise identical. The empty measure is the zero measure.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  /// Throws DomainError on a negative or non-finite weight or a non-finite
  /// position.
  explicit DiscreteMeasure(std::vector<Atom> atoms);

  static DiscreteMeasure dirac(double position, double weight = 1.0);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }

  /// Sum of weights, accumulated left to right.
  double total_mass() const noexcept { return total_mass_; }

  double min_position() const;
  double max_position() const;

  friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    return a.atoms_ == b.atoms_;
  }

 private:
  std::vector<Atom> atoms_;
  double total_mass_ = 0.0;
};

/// Left-continuous generalized inverse of the CDF as a step function on the
/// un-normalized mass axis (0, total_mass].
struct QuantilePartition {
  struct Step {
    double u;      // right end of the step (cumulative mass)
    double value;  // quantile value on (previous u, u]
    double mass;   // width of the step, stored so reconstruction is exact
  };
  std::vector<Step> steps;
};

QuantilePartition quantile_partition(const DiscreteMeasure& m);

/// Pushes Lebesgue measure on (0, M] through the step function.
DiscreteMeasure measure_from_quantiles(const QuantilePartition& q);

/// m((-inf, x]).
double cdf(const DiscreteMeasure& m, double x);
/// m((-inf, x)).
double cdf_left(const DiscreteMeasure& m, double x);

/// inf{x : cdf(m, x) >= u} for u in (0, total_mass]; DomainError otherwise.
double quantile(const DiscreteMeasure& m, double u);

double barycenter(const DiscreteMeasure& m);

/// Sum of w_i |x_i - x0|^r; requires r >= 1.
double moment(const DiscreteMeasure& m, double r, double x0 = 0.0);

/// Largest r-th moment about x0 carried by a sub-measure of m with mass at
/// most eps: the integral of the quantile function of the image of m under
/// x -> |x - x0|^r over the top eps of its mass.
double i_epsilon(const DiscreteMeasure& m, double eps, double r, double x0 = 0.0);

/// Image of m under y -> alpha (y - m1) + m1 with m1 the barycenter.
DiscreteMeasure scale_about_barycenter(const DiscreteMeasure& m, double alpha);

/// Real interval with independently open or closed ends; infinite ends allowed.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = true;
  bool hi_closed = true;

  static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
  static Interval open(double lo, double hi) { return {lo, hi, false, false}; }
  static Interval whole() { return {}; }

  bool contains(double x) const noexcept {
    const bool left = lo_closed ? x >= lo : x > lo;
    const bool right = hi_closed ? x <= hi : x < hi;
    return left && right;
  }
};

DiscreteMeasure add(const DiscreteMeasure& a, const DiscreteMeasure& b);
/// Multiplies every weight by c >= 0.
DiscreteMeasure mul(const DiscreteMeasure& m, double c);
DiscreteMeasure restrict(const DiscreteMeasure& m, const Interval& where);
DiscreteMeasure translate(const DiscreteMeasure& m, double c);

/// Atomwise a - b. Differences in [-tol, tol] are dropped; anything below -tol
/// throws DomainError, as does an atom of b that is absent from a and heavier
/// than tol.
DiscreteMeasure subtract(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol);

/// Image of m under f (atoms landing on the same position are merged).
DiscreteMeasure pushforward(const DiscreteMeasure& m, const std::function<double(double)>& f);

/// m scaled to unit mass; DomainError on the zero measure.
DiscreteMeasure normalized(const DiscreteMeasure& m);

/// Drops atoms lighter than threshold.
DiscreteMeasure prune(const DiscreteMeasure& m, double threshold);

/// Tolerance used for every equal-mass precondition.
inline double mass_tolerance(double mass) { return 1e-9 * (1.0 + mass); }

/// max |x_i| over the atoms (0 for the zero measure).
double support_radius(const DiscreteMeasure& m);

}  // namespace motstab
