#include "motstab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "motstab/errors.hpp"

namespace motstab {

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) {
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.position)) {
      throw DomainError("atom position must be finite");
    }
    if (!std::isfinite(a.weight) || a.weight < 0.0) {
      throw DomainError("atom weight must be finite and nonnegative, got " +
                        std::to_string(a.weight));
    }
  }
  std::erase_if(atoms, [](const Atom& a) { return a.weight == 0.0; });
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.position < b.position; });
  atoms_.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (!atoms_.empty() && atoms_.back().position == a.position) {
      atoms_.back().weight += a.weight;
    } else {
      atoms_.push_back(a);
    }
  }
  for (const Atom& a : atoms_) total_mass_ += a.weight;
}

DiscreteMeasure DiscreteMeasure::dirac(double position, double weight) {
  return DiscreteMeasure({{position, weight}});
}

double DiscreteMeasure::min_position() const {
  if (atoms_.empty()) throw DomainError("zero measure has no support");
  return atoms_.front().position;
}

double DiscreteMeasure::max_position() const {
  if (atoms_.empty()) throw DomainError("zero measure has no support");
  return atoms_.back().position;
}

QuantilePartition quantile_partition(const DiscreteMeasure& m) {
  QuantilePartition q;
  q.steps.reserve(m.size());
  double cum = 0.0;
  for (const Atom& a : m.atoms()) {
    cum += a.weight;
    q.steps.push_back({cum, a.position, a.weight});
  }
  return q;
}

DiscreteMeasure measure_from_quantiles(const QuantilePartition& q) {
  std::vector<Atom> atoms;
  atoms.reserve(q.steps.size());
  for (const auto& s : q.steps) atoms.push_back({s.value, s.mass});
  return DiscreteMeasure(std::move(atoms));
}

double cdf(const DiscreteMeasure& m, double x) {
  double sum = 0.0;
  for (const Atom& a : m.atoms()) {
    if (a.position > x) break;
    sum += a.weight;
  }
  return sum;
}

double cdf_left(const DiscreteMeasure& m, double x) {
  double sum = 0.0;
  for (const Atom& a : m.atoms()) {
    if (a.position >= x) break;
    sum += a.weight;
  }
  return sum;
}

double quantile(const DiscreteMeasure& m, double u) {
  if (!(u > 0.0) || u > m.total_mass()) {
    throw DomainError("quantile level " + std::to_string(u) + " outside (0, " +
                      std::to_string(m.total_mass()) + "]");
  }
  double cum = 0.0;
  for (const Atom& a : m.atoms()) {
    cum += a.weight;
    if (cum >= u) return a.position;
  }
  return m.atoms().back().position;
}

double barycenter(const DiscreteMeasure& m) {
  if (m.empty()) throw DomainError("barycenter of the zero measure");
  double first = 0.0;
  for (const Atom& a : m.atoms()) first += a.weight * a.position;
  return first / m.total_mass();
}

double moment(const DiscreteMeasure& m, double r, double x0) {
  if (!(r >= 1.0)) throw DomainError("moment order must be >= 1");
  double sum = 0.0;
  for (const Atom& a : m.atoms()) {
    const double d = std::abs(a.position - x0);
    sum += a.weight * (r == 1.0 ? d : std::pow(d, r));
  }
  return sum;
}

double i_epsilon(const DiscreteMeasure& m, double eps, double r, double x0) {
  if (!(eps >= 0.0)) throw DomainError("i_epsilon: eps must be >= 0");
  if (!(r >= 1.0)) throw DomainError("i_epsilon: r must be >= 1");
  if (eps >= m.total_mass()) return moment(m, r, x0);
  // Image under |x - x0|^r, then integrate its quantile function over the top
  // eps of the mass, i.e. greedily take the farthest atoms.
  const DiscreteMeasure image =
      pushforward(m, [&](double x) {
        const double d = std::abs(x - x0);
        return r == 1.0 ? d : std::pow(d, r);
      });
  double remaining = eps;
  double sum = 0.0;
  const auto atoms = image.atoms();
  for (auto it = atoms.rbegin(); it != atoms.rend() && remaining > 0.0; ++it) {
    const double take = std::min(remaining, it->weight);
    sum += take * it->position;
    remaining -= take;
  }
  return sum;
}

DiscreteMeasure scale_about_barycenter(const DiscreteMeasure& m, double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("scale factor must be >= 0");
  if (m.empty()) throw DomainError("scaling the zero measure");
  if (alpha == 1.0) return m;
  const double m1 = barycenter(m);
  return pushforward(m, [&](double y) { return alpha * (y - m1) + m1; });
}

DiscreteMeasure add(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::vector<Atom> atoms(a.atoms().begin(), a.atoms().end());
  atoms.insert(atoms.end(), b.atoms().begin(), b.atoms().end());
  return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure mul(const DiscreteMeasure& m, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("measure scalar must be >= 0");
  std::vector<Atom> atoms;
  atoms.reserve(m.size());
  for (const Atom& a : m.atoms()) atoms.push_back({a.position, a.weight * c});
  return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure restrict(const DiscreteMeasure& m, const Interval& where) {
  std::vector<Atom> atoms;
  for (const Atom& a : m.atoms()) {
    if (where.contains(a.position)) atoms.push_back(a);
  }
  return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure translate(const DiscreteMeasure& m, double c) {
  if (c == 0.0) return m;
  return pushforward(m, [c](double x) { return x + c; });
}

DiscreteMeasure subtract(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol) {
  std::vector<Atom> out;
  out.reserve(a.size());
  std::size_t j = 0;
  const auto bs = b.atoms();
  for (const Atom& x : a.atoms()) {
    while (j < bs.size() && bs[j].position < x.position) {
      if (bs[j].weight > tol) {
        throw DomainError("subtract: atom at " + std::to_string(bs[j].position) +
                          " missing from minuend");
      }
      ++j;
    }
    double w = x.weight;
    if (j < bs.size() && bs[j].position == x.position) {
      w -= bs[j].weight;
      ++j;
    }
    if (w < -tol) {
      throw DomainError("subtract: negative mass " + std::to_string(w) + " at " +
                        std::to_string(x.position));
    }
    if (w > tol) out.push_back({x.position, w});
  }
  for (; j < bs.size(); ++j) {
    if (bs[j].weight > tol) {
      throw DomainError("subtract: atom at " + std::to_string(bs[j].position) +
                        " missing from minuend");
    }
  }
  return DiscreteMeasure(std::move(out));
}

DiscreteMeasure pushforward(const DiscreteMeasure& m, const std::function<double(double)>& f) {
  std::vector<Atom> atoms;
  atoms.reserve(m.size());
  for (const Atom& a : m.atoms()) atoms.push_back({f(a.position), a.weight});
  return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure normalized(const DiscreteMeasure& m) {
  if (m.empty()) throw DomainError("cannot normalize the zero measure");
  if (m.total_mass() == 1.0) return m;
  std::vector<Atom> atoms;
  atoms.reserve(m.size());
  for (const Atom& a : m.atoms()) atoms.push_back({a.position, a.weight / m.total_mass()});
  return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure prune(const DiscreteMeasure& m, double threshold) {
  std::vector<Atom> atoms;
  atoms.reserve(m.size());
  for (const Atom& a : m.atoms()) {
    if (a.weight > threshold) atoms.push_back(a);
  }
  return DiscreteMeasure(std::move(atoms));
}

double support_radius(const DiscreteMeasure& m) {
  double r = 0.0;
  for (const Atom& a : m.atoms()) r = std::max(r, std::abs(a.position));
  return r;
}

}  // namespace motstab
