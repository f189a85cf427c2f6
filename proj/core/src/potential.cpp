#include "motstab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "motstab/errors.hpp"

namespace motstab {
namespace {

struct Point {
  double y;
  double f;
};

double first_moment(const DiscreteMeasure& m) {
  double s = 0.0;
  for (const Atom& a : m.atoms()) s += a.weight * a.position;
  return s;
}

// Zero measure maps to the zero function instead of throwing.
PotentialFunction potential_or_zero(const DiscreteMeasure& m) {
  return m.empty() ? PotentialFunction{} : potential_of(m);
}

std::vector<double> merged_positions(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::vector<double> g;
  g.reserve(a.size() + b.size());
  for (const Atom& x : a.atoms()) g.push_back(x.position);
  for (const Atom& x : b.atoms()) g.push_back(x.position);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

double strict_tol(double mass, double scale) { return 1e-12 * (1.0 + mass * scale); }

void require_same_mass_and_mean(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const char* op) {
  const double tol = mass_tolerance(std::max(mu.total_mass(), nu.total_mass()));
  const double scale = 1.0 + std::max(support_radius(mu), support_radius(nu));
  if (std::abs(mu.total_mass() - nu.total_mass()) > tol) {
    throw DomainError(std::string(op) + ": masses differ");
  }
  if (std::abs(first_moment(mu) - first_moment(nu)) > tol * scale) {
    throw DomainError(std::string(op) + ": barycenters differ");
  }
}

// Measure whose potential is the lower convex envelope of the given samples,
// continued by rays of slope -mass and +mass.
DiscreteMeasure measure_from_hull(const std::vector<Point>& pts, double mass) {
  std::vector<Point> hull;
  hull.reserve(pts.size());
  for (const Point& p : pts) {
    while (hull.size() >= 2) {
      const Point& o = hull[hull.size() - 2];
      const Point& a = hull.back();
      const double cross = (a.y - o.y) * (p.f - o.f) - (a.f - o.f) * (p.y - o.y);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(p);
  }
  const double jump_tol = 1e-12 * (1.0 + mass);
  std::vector<Atom> atoms;
  atoms.reserve(hull.size());
  double left = -mass;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const double right = i + 1 < hull.size()
                             ? (hull[i + 1].f - hull[i].f) / (hull[i + 1].y - hull[i].y)
                             : mass;
    const double jump = right - left;
    if (jump > jump_tol) atoms.push_back({hull[i].y, 0.5 * jump});
    left = right;
  }
  return DiscreteMeasure(std::move(atoms));
}

enum class Pick { kMax, kMin };

DiscreteMeasure lattice_op(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Pick pick,
                           const char* name) {
  require_same_mass_and_mean(mu, nu, name);
  if (mu == nu || mu.empty()) return mu;

  const PotentialFunction um = potential_of(mu);
  const PotentialFunction un = potential_of(nu);
  const std::vector<double> grid = merged_positions(mu, nu);
  const double tol =
      strict_tol(mu.total_mass(), std::max(support_radius(mu), support_radius(nu)));

  std::vector<double> a(grid.size());
  std::vector<double> b(grid.size());
  bool mu_below = true;
  bool nu_below = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    a[i] = um(grid[i]);
    b[i] = un(grid[i]);
    mu_below = mu_below && a[i] <= b[i] + tol;
    nu_below = nu_below && b[i] <= a[i] + tol;
  }
  // Ordered inputs: return the appropriate argument untouched.
  if (mu_below) return pick == Pick::kMax ? nu : mu;
  if (nu_below) return pick == Pick::kMax ? mu : nu;

  std::vector<Point> pts;
  pts.reserve(2 * grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    pts.push_back({grid[i], pick == Pick::kMax ? std::max(a[i], b[i]) : std::min(a[i], b[i])});
    if (i + 1 == grid.size()) break;
    const double d0 = a[i] - b[i];
    const double d1 = a[i + 1] - b[i + 1];
    if ((d0 > 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 > 0.0)) {
      const double t = d0 / (d0 - d1);
      if (t > 1e-12 && t < 1.0 - 1e-12) {
        pts.push_back({grid[i] + t * (grid[i + 1] - grid[i]), a[i] + t * (a[i + 1] - a[i])});
      }
    }
  }
  return measure_from_hull(pts, mu.total_mass());
}

}  // namespace

PotentialFunction::PotentialFunction(std::vector<Knot> knots, double mass, double mean)
    : knots_(std::move(knots)), mass_(mass), mean_(mean) {
  if (!(mass_ >= 0.0)) throw ValidationError("potential: negative mass");
  double sum = 0.0;
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    if (!(knots_[k].jump > 0.0)) {
      throw ValidationError("potential: slope must increase at knot " + std::to_string(k));
    }
    if (k > 0 && !(knots_[k].y > knots_[k - 1].y)) {
      throw ValidationError("potential: knots must be strictly increasing");
    }
    sum += knots_[k].jump;
  }
  if (std::abs(sum - 2.0 * mass_) > mass_tolerance(mass_)) {
    throw ValidationError("potential: slope jumps do not add up to twice the mass");
  }
  slopes_.resize(knots_.size() + 1);
  slopes_[0] = -mass_;
  for (std::size_t k = 0; k < knots_.size(); ++k) slopes_[k + 1] = slopes_[k] + knots_[k].jump;
}

double PotentialFunction::operator()(double y) const {
  if (knots_.empty()) return 0.0;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), y,
                             [](double v, const Knot& k) { return v < k.y; });
  if (it == knots_.begin()) return knots_.front().value - mass_ * (y - knots_.front().y);
  const auto k = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return knots_[k].value + slopes_[k + 1] * (y - knots_[k].y);
}

double PotentialFunction::slope_after(std::ptrdiff_t k) const {
  return slopes_.at(static_cast<std::size_t>(k + 1));
}

PotentialFunction potential_of(const DiscreteMeasure& m) {
  if (m.empty()) throw DomainError("potential of the zero measure");
  const auto atoms = m.atoms();
  const double x0 = atoms.front().position;
  double value = 0.0;
  for (const Atom& a : atoms) value += a.weight * (a.position - x0);

  std::vector<PotentialFunction::Knot> knots;
  knots.reserve(atoms.size());
  double below = 0.0;  // mass at or left of the current knot
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (k > 0) {
      const double slope = 2.0 * below - m.total_mass();
      value += slope * (atoms[k].position - atoms[k - 1].position);
    }
    knots.push_back({atoms[k].position, value, 2.0 * atoms[k].weight});
    below += atoms[k].weight;
  }
  return PotentialFunction(std::move(knots), m.total_mass(), barycenter(m));
}

DiscreteMeasure measure_of(const PotentialFunction& u) {
  std::vector<Atom> atoms;
  atoms.reserve(u.knots().size());
  for (const auto& k : u.knots()) atoms.push_back({k.y, 0.5 * k.jump});
  return DiscreteMeasure(std::move(atoms));
}

double default_order_tol(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return 1e-9 * (1.0 + moment(mu, 1.0, 0.0) + moment(nu, 1.0, 0.0));
}

OrderGap max_order_gap(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const PotentialFunction um = potential_or_zero(mu);
  const PotentialFunction un = potential_or_zero(nu);
  OrderGap gap{0.0, -std::numeric_limits<double>::infinity()};
  for (double y : merged_positions(mu, nu)) {
    const double d = um(y) - un(y);
    if (d > gap.excess) gap = {y, d};
  }
  if (!std::isfinite(gap.excess)) gap.excess = 0.0;
  return gap;
}

bool convex_order_leq(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double tol) {
  if (std::abs(mu.total_mass() - nu.total_mass()) > tol) return false;
  if (std::abs(first_moment(mu) - first_moment(nu)) > tol) return false;
  return max_order_gap(mu, nu).excess <= tol;
}

bool convex_order_leq(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return convex_order_leq(mu, nu, default_order_tol(mu, nu));
}

void require_convex_order(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double tol) {
  const double dm = mu.total_mass() - nu.total_mass();
  if (std::abs(dm) > tol) {
    throw ConvexOrderViolation("convex order: masses differ by " + std::to_string(dm),
                               std::numeric_limits<double>::quiet_NaN(), dm);
  }
  const double d1 = first_moment(mu) - first_moment(nu);
  if (std::abs(d1) > tol) {
    throw ConvexOrderViolation("convex order: means differ by " + std::to_string(d1),
                               std::numeric_limits<double>::quiet_NaN(), d1);
  }
  const OrderGap gap = max_order_gap(mu, nu);
  if (gap.excess > tol) {
    throw ConvexOrderViolation("convex order fails at y = " + std::to_string(gap.witness) +
                                   " (u_mu - u_nu = " + std::to_string(gap.excess) + ")",
                               gap.witness, gap.excess);
  }
}

DiscreteMeasure sup_c(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return lattice_op(mu, nu, Pick::kMax, "sup_c");
}

DiscreteMeasure inf_c(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return lattice_op(mu, nu, Pick::kMin, "inf_c");
}

DiscreteMeasure compactify(const DiscreteMeasure& p, double R) {
  if (!(R >= 0.0)) throw DomainError("compactify: R must be >= 0");
  if (p.empty()) return p;
  const double mass = p.total_mass();
  const double m1 = barycenter(p);
  if (R <= std::abs(m1)) return DiscreteMeasure::dirac(m1, mass);
  if (p.min_position() >= -R && p.max_position() <= R) return p;
  const DiscreteMeasure eta({{-R, mass * (R - m1) / (2.0 * R)}, {R, mass * (R + m1) / (2.0 * R)}});
  return inf_c(p, eta);
}

IrreducibleDecomposition irreducible_components(const DiscreteMeasure& mu,
                                                const DiscreteMeasure& nu) {
  require_convex_order(mu, nu, default_order_tol(mu, nu));
  IrreducibleDecomposition out;
  if (mu.empty()) return out;

  const double scale = std::max(support_radius(mu), support_radius(nu));
  const double tol = strict_tol(mu.total_mass(), scale);
  const PotentialFunction um = potential_of(mu);
  const PotentialFunction un = potential_of(nu);
  const std::vector<double> grid = merged_positions(mu, nu);

  // A nonnegative piecewise-linear gap that vanishes at a grid point vanishes
  // on the adjacent segments unless the neighbouring knot is positive, so the
  // components are exactly the runs of positive grid values.
  std::vector<bool> positive(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) positive[i] = un(grid[i]) - um(grid[i]) > tol;

  std::vector<Interval> spans;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!positive[i]) continue;
    std::size_t j = i;
    while (j + 1 < grid.size() && positive[j + 1]) ++j;
    if (i == 0 || j + 1 == grid.size()) {
      throw InternalError("irreducible_components: potential gap positive at the hull boundary");
    }
    spans.push_back(Interval::open(grid[i - 1], grid[j + 1]));
    i = j;
  }

  std::vector<Atom> eta_atoms;
  for (const Atom& a : mu.atoms()) {
    const bool inside = std::any_of(spans.begin(), spans.end(),
                                    [&](const Interval& s) { return s.contains(a.position); });
    if (!inside) eta_atoms.push_back(a);
  }
  out.eta = DiscreteMeasure(std::move(eta_atoms));

  for (const Interval& s : spans) {
    IrreducibleComponent c{s.lo, s.hi, restrict(mu, s), {}};
    const DiscreteMeasure inner = restrict(nu, s);
    const double dm = c.mu.total_mass() - inner.total_mass();
    const double ds = first_moment(c.mu) - first_moment(inner);
    // Boundary masses at l and r matching the component's mass and mean.
    double at_r = (ds - s.lo * dm) / (s.hi - s.lo);
    double at_l = dm - at_r;
    const double clamp = mass_tolerance(mu.total_mass()) * (1.0 + scale);
    if (at_l < -clamp || at_r < -clamp) {
      throw InternalError("irreducible_components: negative boundary allocation");
    }
    at_l = std::max(at_l, 0.0);
    at_r = std::max(at_r, 0.0);
    c.nu = add(inner, DiscreteMeasure({{s.lo, at_l}, {s.hi, at_r}}));
    out.components.push_back(std::move(c));
  }

  // Everything of nu must be accounted for.
  DiscreteMeasure rebuilt = out.eta;
  for (const auto& c : out.components) rebuilt = add(rebuilt, c.nu);
  const double check = 1e-9 * (1.0 + nu.total_mass()) * (1.0 + scale);
  const std::vector<double> all = merged_positions(rebuilt, nu);
  for (double y : all) {
    const double diff = cdf(rebuilt, y) - cdf_left(rebuilt, y) - (cdf(nu, y) - cdf_left(nu, y));
    if (std::abs(diff) > check) {
      throw InternalError("irreducible_components: nu mass mismatch at y = " + std::to_string(y));
    }
  }
  return out;
}

}  // namespace motstab
