#include "motstab_cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "motstab/errors.hpp"
#include "motstab/experiment.hpp"
#include "motstab/io.hpp"
#include "motstab/martingale.hpp"
#include "motstab/pipeline.hpp"
#include "motstab/potential.hpp"
#include "motstab/transport.hpp"

namespace motstab::cli {
namespace {

struct RunConfig {
  std::vector<std::string> inputs;
  double order = 1.0;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> eps;
  std::string output;
  std::string report;
  std::string format;  // empty: pick from the output extension
  std::string kind = "auto";
  bool no_timing = false;
};

unsigned thread_count(const RunConfig& cfg) {
  if (cfg.threads) return *cfg.threads;
  if (const char* env = std::getenv("MOT_STABILITY_THREADS")) {
    try {
      const unsigned long n = std::stoul(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    throw DomainError(std::string("MOT_STABILITY_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

bool wants_json(const RunConfig& cfg) {
  if (!cfg.format.empty()) return cfg.format == "json";
  return std::filesystem::path(cfg.output).extension() == ".json";
}

void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DomainError(path + ": cannot open for writing");
  write(file);
}

void emit_coupling(const RunConfig& cfg, std::ostream& out, const Coupling& p) {
  emit(cfg.output, out, [&](std::ostream& o) {
    if (wants_json(cfg)) {
      write_coupling_json(o, p);
    } else {
      write_coupling_csv(o, p);
    }
  });
}

// A coupling file has an `x,y,mass` header or a "rows" key; anything else is
// read as a measure.
bool looks_like_coupling(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto start = text.find_first_not_of(" \t\r\n");
  if (start == std::string::npos) return false;
  if (text[start] == '{') return text.find("\"rows\"") != std::string::npos;
  return text.compare(start, 2, "x,") == 0;
}

void describe_measure(std::ostream& out, const std::string& name, const DiscreteMeasure& m) {
  out << name << ": measure\n";
  out << "  atoms: " << m.size() << '\n';
  out << "  total_mass: " << format_fixed(m.total_mass()) << '\n';
  if (!m.empty()) {
    out << "  barycenter: " << format_fixed(barycenter(m)) << '\n';
    out << "  support: [" << format_fixed(m.min_position()) << ", " << format_fixed(m.max_position()) << "]\n";
  }
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.inputs.size() == 1) {
    const std::string& path = cfg.inputs[0];
    const bool coupling = cfg.kind == "coupling" || (cfg.kind == "auto" && looks_like_coupling(path));
    if (!coupling) {
      describe_measure(out, path, load_measure(path));
      return kOk;
    }
    const Coupling p = load_coupling(path);
    const double tol = cfg.tol.value_or(default_martingale_tol(p));
    const MartingaleDiagnostics d = martingale_diagnostics(p, tol);
    out << path << ": coupling\n";
    out << "  rows: " << p.size() << '\n';
    out << "  joint_atoms: " << joint_measure(p).size() << '\n';
    out << "  total_mass: " << format_fixed(p.total_mass()) << '\n';
    out << "  second_marginal_atoms: " << second_marginal(p).size() << '\n';
    out << "  max_defect: " << format_double(d.max_defect) << '\n';
    out << "  mean_defect: " << format_double(d.mean_defect) << '\n';
    out << "  martingale: " << (d.is_martingale ? "yes" : "no") << " (tol " << format_double(tol) << ")\n";
    return kOk;
  }
  const DiscreteMeasure mu = load_measure(cfg.inputs[0]);
  const DiscreteMeasure nu = load_measure(cfg.inputs[1]);
  describe_measure(out, cfg.inputs[0], mu);
  describe_measure(out, cfg.inputs[1], nu);
  const double tol = cfg.tol.value_or(default_order_tol(mu, nu));
  const OrderGap gap = max_order_gap(mu, nu);
  out << "convex_order: " << (convex_order_leq(mu, nu, tol) ? "yes" : "no") << " (tol " << format_double(tol)
      << ")\n";
  out << "max_potential_gap: " << format_double(gap.excess) << " at " << format_double(gap.witness) << '\n';
  return kOk;
}

int cmd_aw_dist(const RunConfig& cfg, std::ostream& out) {
  const Coupling p = load_coupling(cfg.inputs[0]);
  const Coupling q = load_coupling(cfg.inputs[1]);
  const AwResult res = aw_distance(p, q, cfg.order, thread_count(cfg));
  out << format_fixed(res.distance) << '\n';
  if (!cfg.output.empty()) {
    emit(cfg.output, out, [&](std::ostream& o) {
      if (wants_json(cfg)) {
        o << plan_json(res.outer_plan) << '\n';
      } else {
        write_plan_csv(o, res.outer_plan);
      }
    });
  }
  return kOk;
}

int cmd_strassen(const RunConfig& cfg, std::ostream& out) {
  emit_coupling(cfg, out, strassen_coupling(load_measure(cfg.inputs[0]), load_measure(cfg.inputs[1])));
  return kOk;
}

int cmd_decompose(const RunConfig& cfg, std::ostream& out) {
  const DiscreteMeasure mu = load_measure(cfg.inputs[0]);
  const DiscreteMeasure nu = load_measure(cfg.inputs[1]);
  require_convex_order(mu, nu, cfg.tol.value_or(default_order_tol(mu, nu)));
  const std::string json = decomposition_json(irreducible_components(mu, nu));
  emit(cfg.output, out, [&](std::ostream& o) { o << json << '\n'; });
  return kOk;
}

int cmd_approx(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Coupling p = load_coupling(cfg.inputs[0]);
  const DiscreteMeasure mu_k = load_measure(cfg.inputs[1]);
  const DiscreteMeasure nu_k = load_measure(cfg.inputs[2]);
  const auto [coupling, report] = approximate(p, mu_k, nu_k, cfg.eps.value_or(0.05));
  emit_coupling(cfg, out, coupling);
  const std::string json = report_json(report);
  emit(cfg.report, err, [&](std::ostream& o) { o << json << '\n'; });
  return kOk;
}

int cmd_converge(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::filesystem::path config_path(cfg.inputs[0]);
  std::ifstream in(config_path);
  if (!in) throw ParseError(config_path.string() + ": cannot open file");
  const ExperimentConfig ex = read_experiment_config(in, config_path.string());
  std::filesystem::path coupling_path(ex.coupling_path);
  if (coupling_path.is_relative()) coupling_path = config_path.parent_path() / coupling_path;

  const Coupling p = load_coupling(coupling_path.string());
  std::vector<ExperimentRow> rows =
      convergence_experiment(p, ex.levels, cfg.eps.value_or(ex.eps), cfg.seed.value_or(ex.seed));
  bool failed = false;
  for (ExperimentRow& row : rows) {
    if (cfg.no_timing) row.ms = 0.0;
    if (!row.ok) {
      failed = true;
      err << "level " << row.level << " failed: " << row.error << '\n';
    }
  }
  emit(cfg.output, out, [&](std::ostream& o) { write_experiment_csv(o, rows); });
  return failed ? kPipeline : kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Martingale coupling stability toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--tol", cfg.tol, "Tolerance for order and martingale checks");
    sub->add_option("--output", cfg.output, "Output file (stdout when omitted)");
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", cfg.threads, "Worker threads (falls back to MOT_STABILITY_THREADS)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "Experiment seed");
    sub->add_option("--order", cfg.order, "Order r of the distances")->check(CLI::Range(1.0, 1e6));
  };

  auto* validate = app.add_subcommand("validate", "Check a measure, a coupling, or the convex order of two measures");
  validate->add_option("inputs", cfg.inputs, "One measure/coupling file, or two measure files")
      ->required()
      ->expected(1, 2)
      ->check(CLI::ExistingFile);
  validate->add_option("--kind", cfg.kind, "How to read a single input")
      ->check(CLI::IsMember({"auto", "measure", "coupling"}));
  common(validate);

  auto* aw = app.add_subcommand("aw-dist", "Adapted Wasserstein distance between two couplings");
  aw->add_option("couplings", cfg.inputs, "Two coupling files")->required()->expected(2)->check(CLI::ExistingFile);
  common(aw);

  auto* strassen = app.add_subcommand("strassen", "Martingale coupling of two measures in convex order");
  strassen->add_option("measures", cfg.inputs, "mu and nu")->required()->expected(2)->check(CLI::ExistingFile);
  common(strassen);

  auto* decompose = app.add_subcommand("decompose", "Irreducible decomposition of a pair in convex order");
  decompose->add_option("measures", cfg.inputs, "mu and nu")->required()->expected(2)->check(CLI::ExistingFile);
  common(decompose);

  auto* approx = app.add_subcommand("approx", "Approximate a martingale coupling on new marginals");
  approx->add_option("inputs", cfg.inputs, "coupling, mu_k and nu_k")
      ->required()
      ->expected(3)
      ->check(CLI::ExistingFile);
  approx->add_option("--eps", cfg.eps, "Tail mass parameter")->check(CLI::Range(1e-6, 0.5));
  approx->add_option("--report", cfg.report, "Report JSON file (stderr when omitted)");
  common(approx);

  auto* converge = app.add_subcommand("converge", "Run a convergence experiment from a JSON config");
  converge->add_option("config", cfg.inputs, "Experiment config")->required()->expected(1)->check(
      CLI::ExistingFile);
  converge->add_option("--eps", cfg.eps, "Override the config eps")->check(CLI::Range(1e-6, 0.5));
  converge->add_flag("--no-timing", cfg.no_timing, "Write 0 in the ms column");
  common(converge);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kDomain;
  }

  try {
    if (*validate) return cmd_validate(cfg, out);
    if (*aw) return cmd_aw_dist(cfg, out);
    if (*strassen) return cmd_strassen(cfg, out);
    if (*decompose) return cmd_decompose(cfg, out);
    if (*approx) return cmd_approx(cfg, out, err);
    if (*converge) return cmd_converge(cfg, out, err);
  } catch (const PipelineFailure& e) {
    err << "pipeline failure: " << e.what() << '\n' << report_json(e.report()) << '\n';
    return kPipeline;
  } catch (const ConvexOrderViolation& e) {
    err << "error: " << e.what() << " (witness " << format_double(e.witness()) << ", excess "
        << format_double(e.excess()) << ")\n";
    return kDomain;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace motstab::cli
