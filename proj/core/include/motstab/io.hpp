#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "motstab/errors.hpp"
#include "motstab/experiment.hpp"
#include "motstab/measure.hpp"
#include "motstab/pipeline.hpp"
#include "motstab/potential.hpp"
#include "motstab/transport.hpp"

namespace motstab {

/// Malformed input; the message carries the source name and line number.
class ParseError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);
/// Fixed 9 decimals, for human-readable tables.
std::string format_fixed(double v);

// Measure CSV: header `position,weight`. JSON: {"atoms":[[x,w],...]}.
DiscreteMeasure read_measure_csv(std::istream& in, const std::string& source = "<input>");
void write_measure_csv(std::ostream& out, const DiscreteMeasure& m);
DiscreteMeasure read_measure_json(std::istream& in, const std::string& source = "<input>");
void write_measure_json(std::ostream& out, const DiscreteMeasure& m);

// Coupling CSV: header `x,y,mass` (one joint atom per line).
// JSON: {"rows":[{"x":..,"w":..,"kernel":[[y,w],...]}]}.
Coupling read_coupling_csv(std::istream& in, const std::string& source = "<input>");
void write_coupling_csv(std::ostream& out, const Coupling& p);
Coupling read_coupling_json(std::istream& in, const std::string& source = "<input>");
void write_coupling_json(std::ostream& out, const Coupling& p);

/// Chooses JSON for a `.json` extension and CSV otherwise.
DiscreteMeasure load_measure(const std::string& path);
Coupling load_coupling(const std::string& path);

/// {"components":[{"l":..,"r":..,"mu":[...],"nu":[...]}],"eta":[...]}
std::string decomposition_json(const IrreducibleDecomposition& d);
std::string report_json(const PipelineReport& r);
std::string plan_json(const TransportPlan& plan);
void write_plan_csv(std::ostream& out, const TransportPlan& plan);

/// Experiment config: {"coupling":"path","levels":[{"kind":..,"n":..,"delta":..}],"eps":..,"seed":..}.
struct ExperimentConfig {
  std::string coupling_path;
  std::vector<LevelSpec> levels;
  double eps = 0.05;
  std::uint64_t seed = 1;
};
ExperimentConfig read_experiment_config(std::istream& in, const std::string& source = "<input>");

/// CSV `level,w1_mu,w1_nu,aw1,fallbacks,ms`; failed levels print `nan` values.
void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);

}  // namespace motstab
