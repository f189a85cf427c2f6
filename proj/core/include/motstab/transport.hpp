#pragma once

#include <cstddef>
#include <vector>

#include "motstab/measure.hpp"

namespace motstab {

/// Discrete coupling stored by disintegration: pi(dx, dy) = sum_i w_i delta_{x_i}(dx) K_i(dy).
class Coupling {
 public:
  struct Row {
    double x;
    double weight;
    DiscreteMeasure kernel;  // probability measure
  };

  Coupling() = default;

  /// Sorts rows by x and mixes the kernels of rows sharing an x in proportion
  /// to their weights. Throws DomainError on a non-positive weight or a kernel
  /// whose mass is not 1.
  explicit Coupling(std::vector<Row> rows);

  std::span<const Row> rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const Row& operator[](std::size_t i) const { return rows_[i]; }
  double total_mass() const noexcept { return total_mass_; }

  friend bool operator==(const Coupling& a, const Coupling& b);

 private:
  std::vector<Row> rows_;
  double total_mass_ = 0.0;
};

struct JointAtom {
  double x;
  double y;
  double mass;
};

std::vector<JointAtom> joint_measure(const Coupling& p);
Coupling from_joint(const std::vector<JointAtom>& atoms);
DiscreteMeasure first_marginal(const Coupling& p);
DiscreteMeasure second_marginal(const Coupling& p);

/// Multiplies every row weight by c > 0 (c = 0 gives the empty coupling).
Coupling scale(const Coupling& p, double c);
/// Union of rows; rows at the same x are mixed.
Coupling add(const Coupling& p, const Coupling& q);
/// (id, id)_* m.
Coupling identity_coupling(const DiscreteMeasure& m);
/// m x kernel for a single kernel shared by every row.
Coupling product_coupling(const DiscreteMeasure& m, const DiscreteMeasure& kernel);

/// Dense source-by-target cost matrix.
struct CostTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  CostTable() = default;
  CostTable(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct TransportPlan {
  struct Entry {
    std::size_t i;
    std::size_t j;
    double mass;
  };
  DiscreteMeasure source;
  DiscreteMeasure target;
  std::vector<Entry> entries;
  double objective = 0.0;
};

/// W_r between equal-mass measures by the quantile formula, exact over the
/// merged quantile partition.
double w_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double r);

/// Exact optimal plan of the transportation problem (transportation simplex,
/// north-west corner start, Dantzig pricing with a Bland fallback).
TransportPlan ot_exact(const CostTable& cost, const DiscreteMeasure& a, const DiscreteMeasure& b);

/// Same problem through the generic dense LP solver; used as an independent
/// cross-check.
TransportPlan ot_lp(const CostTable& cost, const DiscreteMeasure& a, const DiscreteMeasure& b);

/// |x_i - y_j|^r between atoms.
CostTable power_cost(const DiscreteMeasure& a, const DiscreteMeasure& b, double r);

struct AwResult {
  double distance = 0.0;
  TransportPlan outer_plan;
  CostTable inner_costs;  // |x - x'|^r + W_r^r(kernel, kernel')
};

/// Nested (adapted) Wasserstein distance of order r. The inner table may be
/// filled by up to `threads` workers; every cell is computed independently,
/// so the result does not depend on the schedule.
AwResult aw_distance(const Coupling& p, const Coupling& q, double r, unsigned threads = 1);

/// AW_r computed as a plain W_r between the rows seen as points (x, kernel)
/// of the product space, with inner and outer problems both solved by the
/// generic LP.
double aw_oracle_j_embedding(const Coupling& p, const Coupling& q, double r);

/// W_r between the joint measures of p and q for cost |x-x'|^r + |y-y'|^r.
double w_joint(const Coupling& p, const Coupling& q, double r);

}  // namespace motstab
