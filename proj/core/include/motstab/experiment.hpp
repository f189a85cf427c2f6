#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "motstab/measure.hpp"
#include "motstab/transport.hpp"

namespace motstab {

/// One perturbation level of the convergence experiment.
///
///   "none"             the original marginals
///   "quantile_coarsen" n equal-mass blocks of the quantile function, each
///                      replaced by its mean (a convex-order contraction)
///   "spread"           every atom x split into x - h and x + h with a random
///                      split of its weight, h = delta * diameter of supp(nu);
///                      moves each marginal by exactly h in W_1 when the split
///                      atoms do not cross their neighbours
///   "contract"         both marginals pulled toward their common mean by the
///                      factor 1 - t, t chosen so W_1(nu, nu^k) = delta * diameter
///                      of supp(nu); keeps every CDF jump and the convex order
struct LevelSpec {
  std::string kind = "none";
  int n = 0;
  double delta = 0.0;
};

struct ExperimentRow {
  std::size_t level = 0;
  double w1_mu = 0.0;
  double w1_nu = 0.0;
  double aw1 = 0.0;
  std::size_t fallbacks = 0;
  double ms = 0.0;
  bool ok = false;
  std::string error;
};

/// Block means of the quantile function over n equal-mass blocks.
DiscreteMeasure quantile_coarsen(const DiscreteMeasure& m, int n);

/// Perturbed, convex-order-repaired marginals for one level. Randomness comes
/// from a generator seeded by (seed, level) only.
std::pair<DiscreteMeasure, DiscreteMeasure> perturb_pair(const Coupling& p, const LevelSpec& spec,
                                                         std::uint64_t seed, std::size_t level);

/// Runs approximate() once per level. Failures are recorded in the row.
std::vector<ExperimentRow> convergence_experiment(const Coupling& p, const std::vector<LevelSpec>& levels,
                                                  double eps, std::uint64_t seed);

}  // namespace motstab
