#include "motstab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <thread>

#include "motstab/errors.hpp"
#include "motstab/simplex.hpp"

namespace motstab {
namespace {

double powr(double d, double r) { return r == 1.0 ? d : (r == 2.0 ? d * d : std::pow(d, r)); }

void require_equal_mass(double a, double b, const char* op) {
  if (std::abs(a - b) > mass_tolerance(std::max(a, b))) {
    throw DomainError(std::string(op) + ": total masses differ (" + std::to_string(a) + " vs " +
                      std::to_string(b) + ")");
  }
}

DiscreteMeasure mix(const std::vector<std::pair<double, const DiscreteMeasure*>>& parts) {
  double total = 0.0;
  for (const auto& [w, k] : parts) total += w;
  std::vector<Atom> atoms;
  for (const auto& [w, k] : parts) {
    for (const Atom& a : k->atoms()) atoms.push_back({a.position, a.weight * (w / total)});
  }
  return DiscreteMeasure(std::move(atoms));
}

}  // namespace

Coupling::Coupling(std::vector<Row> rows) {
  for (const Row& r : rows) {
    if (!std::isfinite(r.x)) throw DomainError("coupling row position must be finite");
    if (!(r.weight > 0.0) || !std::isfinite(r.weight)) {
      throw DomainError("coupling row at x = " + std::to_string(r.x) +
                        " has non-positive weight " + std::to_string(r.weight));
    }
    if (std::abs(r.kernel.total_mass() - 1.0) > mass_tolerance(1.0)) {
      throw DomainError("coupling row at x = " + std::to_string(r.x) +
                        " has kernel mass " + std::to_string(r.kernel.total_mass()));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.x < b.x; });
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i + 1;
    while (j < rows.size() && rows[j].x == rows[i].x) ++j;
    if (j == i + 1) {
      rows_.push_back(std::move(rows[i]));
    } else {
      std::vector<std::pair<double, const DiscreteMeasure*>> parts;
      double w = 0.0;
      for (std::size_t k = i; k < j; ++k) {
        parts.emplace_back(rows[k].weight, &rows[k].kernel);
        w += rows[k].weight;
      }
      rows_.push_back({rows[i].x, w, mix(parts)});
    }
    i = j;
  }
  for (const Row& r : rows_) total_mass_ += r.weight;
}

bool operator==(const Coupling& a, const Coupling& b) {
  if (a.rows_.size() != b.rows_.size()) return false;
  for (std::size_t i = 0; i < a.rows_.size(); ++i) {
    const auto& p = a.rows_[i];
    const auto& q = b.rows_[i];
    if (p.x != q.x || p.weight != q.weight || !(p.kernel == q.kernel)) return false;
  }
  return true;
}

std::vector<JointAtom> joint_measure(const Coupling& p) {
  std::vector<JointAtom> out;
  for (const auto& row : p.rows()) {
    for (const Atom& a : row.kernel.atoms()) out.push_back({row.x, a.position, row.weight * a.weight});
  }
  return out;
}

Coupling from_joint(const std::vector<JointAtom>& atoms) {
  std::vector<JointAtom> sorted = atoms;
  for (const auto& t : sorted) {
    if (!(t.mass > 0.0)) {
      throw DomainError("joint atom (" + std::to_string(t.x) + ", " + std::to_string(t.y) +
                        ") has non-positive mass");
    }
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const JointAtom& a, const JointAtom& b) { return a.x < b.x; });
  std::vector<Coupling::Row> rows;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    double w = 0.0;
    while (j < sorted.size() && sorted[j].x == sorted[i].x) w += sorted[j++].mass;
    std::vector<Atom> kernel;
    for (std::size_t k = i; k < j; ++k) kernel.push_back({sorted[k].y, sorted[k].mass / w});
    rows.push_back({sorted[i].x, w, DiscreteMeasure(std::move(kernel))});
    i = j;
  }
  return Coupling(std::move(rows));
}

DiscreteMeasure first_marginal(const Coupling& p) {
  std::vector<Atom> atoms;
  atoms.reserve(p.size());
  for (const auto& row : p.rows()) atoms.push_back({row.x, row.weight});
  return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure second_marginal(const Coupling& p) {
  std::vector<Atom> atoms;
  for (const auto& row : p.rows()) {
    for (const Atom& a : row.kernel.atoms()) atoms.push_back({a.position, row.weight * a.weight});
  }
  return DiscreteMeasure(std::move(atoms));
}

Coupling scale(const Coupling& p, double c) {
  if (!(c >= 0.0)) throw DomainError("coupling scalar must be >= 0");
  if (c == 0.0) return {};
  std::vector<Coupling::Row> rows(p.rows().begin(), p.rows().end());
  for (auto& r : rows) r.weight *= c;
  return Coupling(std::move(rows));
}

Coupling add(const Coupling& p, const Coupling& q) {
  std::vector<Coupling::Row> rows(p.rows().begin(), p.rows().end());
  rows.insert(rows.end(), q.rows().begin(), q.rows().end());
  return Coupling(std::move(rows));
}

Coupling identity_coupling(const DiscreteMeasure& m) {
  std::vector<Coupling::Row> rows;
  rows.reserve(m.size());
  for (const Atom& a : m.atoms()) rows.push_back({a.position, a.weight, DiscreteMeasure::dirac(a.position)});
  return Coupling(std::move(rows));
}

Coupling product_coupling(const DiscreteMeasure& m, const DiscreteMeasure& kernel) {
  std::vector<Coupling::Row> rows;
  rows.reserve(m.size());
  for (const Atom& a : m.atoms()) rows.push_back({a.position, a.weight, kernel});
  return Coupling(std::move(rows));
}

double w_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r) {
  if (!(r >= 1.0)) throw DomainError("w_1d: order must be >= 1");
  require_equal_mass(mu.total_mass(), nu.total_mass(), "w_1d");
  if (mu.empty() || nu.empty()) return 0.0;
  const auto a = mu.atoms();
  const auto b = nu.atoms();
  const double end = std::min(mu.total_mass(), nu.total_mass());
  std::size_t i = 0;
  std::size_t j = 0;
  double ca = a[0].weight;
  double cb = b[0].weight;
  double u = 0.0;
  double sum = 0.0;
  while (u < end) {
    const double next = std::min({ca, cb, end});
    sum += (next - u) * powr(std::abs(a[i].position - b[j].position), r);
    u = next;
    if (ca <= u && i + 1 < a.size()) ca += a[++i].weight;
    if (cb <= u && j + 1 < b.size()) cb += b[++j].weight;
    if (ca <= u && cb <= u) break;
  }
  return r == 1.0 ? sum : std::pow(sum, 1.0 / r);
}

CostTable power_cost(const DiscreteMeasure& a, const DiscreteMeasure& b, double r) {
  CostTable c(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) c(i, j) = powr(std::abs(a[i].position - b[j].position), r);
  }
  return c;
}

namespace {

// Transportation simplex on an m x n problem; basis kept as a spanning tree
// of the bipartite row/column graph.
class TransportSimplex {
 public:
  TransportSimplex(const CostTable& c, std::vector<double> supply, std::vector<double> demand)
      : c_(c), m_(supply.size()), n_(demand.size()), flow_(m_ * n_, 0.0), basic_(m_ * n_, false) {
    // North-west corner start gives exactly m + n - 1 basic cells.
    std::size_t i = 0;
    std::size_t j = 0;
    while (true) {
      const double f = std::min(supply[i], demand[j]);
      flow_[i * n_ + j] = std::max(f, 0.0);
      basic_[i * n_ + j] = true;
      cells_.push_back(i * n_ + j);
      supply[i] -= f;
      demand[j] -= f;
      if (i + 1 == m_ && j + 1 == n_) break;
      if (j + 1 == n_ || (i + 1 < m_ && supply[i] <= demand[j])) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void solve() {
    double cmax = 0.0;
    for (double v : c_.data) cmax = std::max(cmax, std::abs(v));
    const double tol = 1e-12 * (1.0 + cmax);
    std::vector<double> u(m_);
    std::vector<double> v(n_);
    std::size_t streak = 0;
    const std::size_t limit = 50 * (m_ + n_) * (m_ + n_) + 1000;
    for (std::size_t iter = 0; iter < limit; ++iter) {
      potentials(u, v);
      const bool bland = streak >= 50;
      std::size_t enter = m_ * n_;
      double best = -tol;
      for (std::size_t k = 0; k < m_ * n_ && !(bland && enter < m_ * n_); ++k) {
        if (basic_[k]) continue;
        const double d = c_.data[k] - u[k / n_] - v[k % n_];
        if (d < best) {
          best = d;
          enter = k;
        }
      }
      if (enter == m_ * n_) return;
      const std::vector<std::size_t> cycle = find_cycle(enter);
      // cycle[0] = entering cell (+), then alternating -, +, ...
      double theta = std::numeric_limits<double>::infinity();
      std::size_t leave = m_ * n_;
      for (std::size_t k = 1; k < cycle.size(); k += 2) {
        const double f = flow_[cycle[k]];
        if (f < theta || (f == theta && cycle[k] < leave)) {
          theta = f;
          leave = cycle[k];
        }
      }
      streak = theta <= 0.0 ? streak + 1 : 0;
      for (std::size_t k = 0; k < cycle.size(); ++k) {
        flow_[cycle[k]] += (k % 2 == 0) ? theta : -theta;
      }
      flow_[leave] = 0.0;
      basic_[leave] = false;
      basic_[enter] = true;
      std::replace(cells_.begin(), cells_.end(), leave, enter);
    }
    throw InternalError("ot_exact: iteration limit reached");
  }

  double flow(std::size_t i, std::size_t j) const { return flow_[i * n_ + j]; }

 private:
  // Solves u_i + v_j = c_ij over the basis tree, rooted at u_0 = 0.
  void potentials(std::vector<double>& u, std::vector<double>& v) const {
    std::vector<std::vector<std::size_t>> by_row(m_);
    std::vector<std::vector<std::size_t>> by_col(n_);
    for (std::size_t k : cells_) {
      by_row[k / n_].push_back(k);
      by_col[k % n_].push_back(k);
    }
    std::vector<bool> seen_r(m_, false);
    std::vector<bool> seen_c(n_, false);
    std::deque<std::size_t> queue;  // node ids: rows 0..m-1, columns m..m+n-1
    u[0] = 0.0;
    seen_r[0] = true;
    queue.push_back(0);
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      if (node < m_) {
        for (std::size_t k : by_row[node]) {
          const std::size_t j = k % n_;
          if (seen_c[j]) continue;
          v[j] = c_.data[k] - u[node];
          seen_c[j] = true;
          queue.push_back(m_ + j);
        }
      } else {
        const std::size_t j = node - m_;
        for (std::size_t k : by_col[j]) {
          const std::size_t i = k / n_;
          if (seen_r[i]) continue;
          u[i] = c_.data[k] - v[j];
          seen_r[i] = true;
          queue.push_back(i);
        }
      }
    }
  }

  // Unique cycle formed by adding `enter` to the basis tree.
  std::vector<std::size_t> find_cycle(std::size_t enter) const {
    const std::size_t nodes = m_ + n_;
    std::vector<std::vector<std::size_t>> adj(nodes);
    for (std::size_t k : cells_) {
      adj[k / n_].push_back(k);
      adj[m_ + k % n_].push_back(k);
    }
    // Path in the tree from column node of `enter` to its row node.
    const std::size_t start = m_ + enter % n_;
    const std::size_t goal = enter / n_;
    std::vector<std::size_t> via(nodes, m_ * n_);
    std::vector<bool> seen(nodes, false);
    std::deque<std::size_t> queue{start};
    seen[start] = true;
    while (!queue.empty() && !seen[goal]) {
      const std::size_t node = queue.front();
      queue.pop_front();
      for (std::size_t k : adj[node]) {
        const std::size_t other = node < m_ ? m_ + k % n_ : k / n_;
        if (seen[other]) continue;
        seen[other] = true;
        via[other] = k;
        queue.push_back(other);
      }
    }
    if (!seen[goal]) throw InternalError("ot_exact: basis is not a spanning tree");
    std::vector<std::size_t> path;
    for (std::size_t node = goal; node != start;) {
      const std::size_t k = via[node];
      path.push_back(k);
      node = node < m_ ? m_ + k % n_ : k / n_;
    }
    // Entering cell, then the path from its row back to its column.
    std::vector<std::size_t> cycle{enter};
    cycle.insert(cycle.end(), path.begin(), path.end());
    return cycle;
  }

  const CostTable& c_;
  std::size_t m_;
  std::size_t n_;
  std::vector<double> flow_;
  std::vector<bool> basic_;
  std::vector<std::size_t> cells_;
};

TransportPlan empty_plan(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  TransportPlan plan;
  plan.source = a;
  plan.target = b;
  return plan;
}

void check_problem(const CostTable& cost, const DiscreteMeasure& a, const DiscreteMeasure& b,
                   const char* op) {
  require_equal_mass(a.total_mass(), b.total_mass(), op);
  if (cost.rows != a.size() || cost.cols != b.size()) {
    throw DomainError(std::string(op) + ": cost table dimensions do not match the marginals");
  }
  for (double v : cost.data) {
    if (!std::isfinite(v)) throw DomainError(std::string(op) + ": cost must be finite");
  }
}

}  // namespace

TransportPlan ot_exact(const CostTable& cost, const DiscreteMeasure& a, const DiscreteMeasure& b) {
  check_problem(cost, a, b, "ot_exact");
  TransportPlan plan = empty_plan(a, b);
  if (a.empty() || b.empty()) return plan;

  std::vector<double> supply;
  std::vector<double> demand;
  for (const Atom& x : a.atoms()) supply.push_back(x.weight);
  // Absorb the admissible mass mismatch into the target side.
  const double ratio = a.total_mass() / b.total_mass();
  for (const Atom& y : b.atoms()) demand.push_back(y.weight * ratio);

  TransportSimplex solver(cost, supply, demand);
  solver.solve();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double f = solver.flow(i, j);
      if (f > 0.0) {
        plan.entries.push_back({i, j, f});
        plan.objective += f * cost(i, j);
      }
    }
  }
  return plan;
}

TransportPlan ot_lp(const CostTable& cost, const DiscreteMeasure& a, const DiscreteMeasure& b) {
  check_problem(cost, a, b, "ot_lp");
  TransportPlan plan = empty_plan(a, b);
  if (a.empty() || b.empty()) return plan;
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  LinearProgram lp(m + n, m * n);
  const double ratio = a.total_mass() / b.total_mass();
  for (std::size_t i = 0; i < m; ++i) {
    lp.b[i] = a[i].weight;
    for (std::size_t j = 0; j < n; ++j) {
      lp.a(i, i * n + j) = 1.0;
      lp.a(m + j, i * n + j) = 1.0;
      lp.c[i * n + j] = cost(i, j);
    }
  }
  for (std::size_t j = 0; j < n; ++j) lp.b[m + j] = b[j].weight * ratio;
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) throw InternalError("ot_lp: solver did not reach optimality");
  for (std::size_t k = 0; k < m * n; ++k) {
    if (sol.x[k] > 0.0) {
      plan.entries.push_back({k / n, k % n, sol.x[k]});
      plan.objective += sol.x[k] * cost.data[k];
    }
  }
  return plan;
}

AwResult aw_distance(const Coupling& p, const Coupling& q, double r, unsigned threads) {
  if (!(r >= 1.0)) throw DomainError("aw_distance: order must be >= 1");
  require_equal_mass(p.total_mass(), q.total_mass(), "aw_distance");
  AwResult out;
  const std::size_t m = p.size();
  const std::size_t n = q.size();
  out.inner_costs = CostTable(m, n);

  auto fill_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double w = w_1d(p[i].kernel, q[j].kernel, r);
        out.inner_costs(i, j) = powr(std::abs(p[i].x - q[j].x), r) + powr(w, r);
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, m));
  if (workers == 1) {
    fill_rows(0, m);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (m + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(m, begin + chunk);
      if (begin < end) pool.emplace_back(fill_rows, begin, end);
    }
  }

  out.outer_plan = ot_exact(out.inner_costs, first_marginal(p), first_marginal(q));
  out.distance = std::pow(std::max(0.0, out.outer_plan.objective), 1.0 / r);
  return out;
}

double aw_oracle_j_embedding(const Coupling& p, const Coupling& q, double r) {
  if (!(r >= 1.0)) throw DomainError("aw_oracle_j_embedding: order must be >= 1");
  require_equal_mass(p.total_mass(), q.total_mass(), "aw_oracle_j_embedding");
  // Each row is the point (x, kernel) of R x P(R); the metric to the power r
  // is |x - x'|^r + W_r^r(kernel, kernel'), the latter solved as a full LP.
  CostTable metric(p.size(), q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      const auto& k1 = p[i].kernel;
      const auto& k2 = q[j].kernel;
      const double inner = ot_lp(power_cost(k1, k2, r), k1, k2).objective;
      metric(i, j) = std::pow(std::abs(p[i].x - q[j].x), r) + inner;
    }
  }
  const double total = ot_lp(metric, first_marginal(p), first_marginal(q)).objective;
  return std::pow(std::max(0.0, total), 1.0 / r);
}

double w_joint(const Coupling& p, const Coupling& q, double r) {
  require_equal_mass(p.total_mass(), q.total_mass(), "w_joint");
  const auto jp = joint_measure(p);
  const auto jq = joint_measure(q);
  // Index the joint atoms as pseudo-positions 0..n-1 so the plan solver can be reused.
  std::vector<Atom> a;
  std::vector<Atom> b;
  for (std::size_t i = 0; i < jp.size(); ++i) a.push_back({static_cast<double>(i), jp[i].mass});
  for (std::size_t j = 0; j < jq.size(); ++j) b.push_back({static_cast<double>(j), jq[j].mass});
  CostTable c(jp.size(), jq.size());
  for (std::size_t i = 0; i < jp.size(); ++i) {
    for (std::size_t j = 0; j < jq.size(); ++j) {
      c(i, j) = powr(std::abs(jp[i].x - jq[j].x), r) + powr(std::abs(jp[i].y - jq[j].y), r);
    }
  }
  const TransportPlan plan = ot_exact(c, DiscreteMeasure(std::move(a)), DiscreteMeasure(std::move(b)));
  return std::pow(std::max(0.0, plan.objective), 1.0 / r);
}

}  // namespace motstab
