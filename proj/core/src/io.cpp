#include "motstab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace motstab {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& field, const std::string& source, std::size_t line,
                    const char* name) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || field.empty()) {
    fail(source, line, std::string("cannot parse ") + name + " '" + field + "'");
  }
  if (!std::isfinite(v)) fail(source, line, std::string(name) + " must be finite");
  return v;
}

// Reads a CSV with the given header; calls row(fields, line) for each data line.
template <typename F>
void read_csv(std::istream& in, const std::string& source, const std::vector<std::string>& header, F row) {
  std::string line;
  std::size_t lineno = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    auto fields = split(t);
    if (!seen_header) {
      if (fields != header) {
        std::string want;
        for (std::size_t i = 0; i < header.size(); ++i) want += (i ? "," : "") + header[i];
        fail(source, lineno, "expected header '" + want + "'");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      fail(source, lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    }
    row(fields, lineno);
  }
  if (!seen_header) fail(source, lineno, "missing header");
}

json parse_json(std::istream& in, const std::string& source) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

double json_number(const json& v, const std::string& source, const std::string& where) {
  if (!v.is_number()) throw ParseError(source + ": " + where + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(source + ": " + where + " must be finite");
  return d;
}

// Numbers are emitted as raw shortest round-trip tokens.
std::string atoms_json(const DiscreteMeasure& m) {
  std::string s = "[";
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) s += ",";
    s += "[" + format_double(m[i].position) + "," + format_double(m[i].weight) + "]";
  }
  return s + "]";
}

DiscreteMeasure atoms_from_json(const json& arr, const std::string& source, const std::string& where) {
  if (!arr.is_array()) throw ParseError(source + ": " + where + " must be an array");
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& a = arr[i];
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!a.is_array() || a.size() != 2) throw ParseError(source + ": " + at + " must be [x, w]");
    const double x = json_number(a[0], source, at);
    const double w = json_number(a[1], source, at);
    if (!(w > 0.0)) throw ParseError(source + ": " + at + " weight must be positive");
    atoms.push_back({x, w});
  }
  return DiscreteMeasure(std::move(atoms));
}

std::string ends_with_json(const std::string& path) {
  return path.size() >= 5 && path.substr(path.size() - 5) == ".json" ? "json" : "csv";
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return in;
}

std::string interval_json(const Interval& i) {
  auto end = [](double v) { return std::isfinite(v) ? format_double(v) : std::string("null"); };
  return "[" + end(i.lo) + "," + end(i.hi) + "]";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

DiscreteMeasure read_measure_csv(std::istream& in, const std::string& source) {
  std::vector<Atom> atoms;
  read_csv(in, source, {"position", "weight"}, [&](const std::vector<std::string>& f, std::size_t line) {
    const double x = parse_number(f[0], source, line, "position");
    const double w = parse_number(f[1], source, line, "weight");
    if (!(w > 0.0)) fail(source, line, "weight must be positive, got " + f[1]);
    atoms.push_back({x, w});
  });
  return DiscreteMeasure(std::move(atoms));
}

void write_measure_csv(std::ostream& out, const DiscreteMeasure& m) {
  out << "position,weight\n";
  for (const Atom& a : m.atoms()) out << format_double(a.position) << ',' << format_double(a.weight) << '\n';
}

DiscreteMeasure read_measure_json(std::istream& in, const std::string& source) {
  const json j = parse_json(in, source);
  if (!j.is_object() || !j.contains("atoms")) throw ParseError(source + ": expected {\"atoms\": [...]}");
  return atoms_from_json(j["atoms"], source, "atoms");
}

void write_measure_json(std::ostream& out, const DiscreteMeasure& m) {
  out << "{\"atoms\":" << atoms_json(m) << "}\n";
}

Coupling read_coupling_csv(std::istream& in, const std::string& source) {
  std::vector<JointAtom> atoms;
  read_csv(in, source, {"x", "y", "mass"}, [&](const std::vector<std::string>& f, std::size_t line) {
    const double x = parse_number(f[0], source, line, "x");
    const double y = parse_number(f[1], source, line, "y");
    const double m = parse_number(f[2], source, line, "mass");
    if (!(m > 0.0)) {
      fail(source, line, "row (x=" + f[0] + ", y=" + f[1] + ") has non-positive mass " + f[2]);
    }
    atoms.push_back({x, y, m});
  });
  return from_joint(atoms);
}

void write_coupling_csv(std::ostream& out, const Coupling& p) {
  out << "x,y,mass\n";
  for (const JointAtom& a : joint_measure(p)) {
    out << format_double(a.x) << ',' << format_double(a.y) << ',' << format_double(a.mass) << '\n';
  }
}

Coupling read_coupling_json(std::istream& in, const std::string& source) {
  const json j = parse_json(in, source);
  if (!j.is_object() || !j.contains("rows") || !j["rows"].is_array()) {
    throw ParseError(source + ": expected {\"rows\": [...]}");
  }
  std::vector<Coupling::Row> rows;
  for (std::size_t i = 0; i < j["rows"].size(); ++i) {
    const json& r = j["rows"][i];
    const std::string at = "rows[" + std::to_string(i) + "]";
    if (!r.is_object() || !r.contains("x") || !r.contains("w") || !r.contains("kernel")) {
      throw ParseError(source + ": " + at + " needs x, w and kernel");
    }
    const double w = json_number(r["w"], source, at + ".w");
    if (!(w > 0.0)) throw ParseError(source + ": " + at + " has non-positive weight");
    rows.push_back({json_number(r["x"], source, at + ".x"), w,
                    atoms_from_json(r["kernel"], source, at + ".kernel")});
  }
  return Coupling(std::move(rows));
}

void write_coupling_json(std::ostream& out, const Coupling& p) {
  out << "{\"rows\":[";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out << ",";
    out << "{\"x\":" << format_double(p[i].x) << ",\"w\":" << format_double(p[i].weight)
        << ",\"kernel\":" << atoms_json(p[i].kernel) << "}";
  }
  out << "]}\n";
}

DiscreteMeasure load_measure(const std::string& path) {
  std::ifstream in = open_input(path);
  return ends_with_json(path) == "json" ? read_measure_json(in, path) : read_measure_csv(in, path);
}

Coupling load_coupling(const std::string& path) {
  std::ifstream in = open_input(path);
  return ends_with_json(path) == "json" ? read_coupling_json(in, path) : read_coupling_csv(in, path);
}

std::string decomposition_json(const IrreducibleDecomposition& d) {
  std::string s = "{\"components\":[";
  for (std::size_t i = 0; i < d.components.size(); ++i) {
    const auto& c = d.components[i];
    if (i) s += ",";
    s += "{\"l\":" + format_double(c.l) + ",\"r\":" + format_double(c.r) + ",\"mu\":" + atoms_json(c.mu) +
         ",\"nu\":" + atoms_json(c.nu) + "}";
  }
  return s + "],\"eta\":" + atoms_json(d.eta) + "}";
}

std::string report_json(const PipelineReport& r) {
  std::string s = "{\"eps\":" + format_double(r.eps) + ",\"w1_mu\":" + format_double(r.w1_mu) +
                  ",\"w1_nu\":" + format_double(r.w1_nu) + ",\"final_aw1\":" + format_double(r.final_aw1) +
                  ",\"max_defect\":" + format_double(r.max_defect) +
                  ",\"fallbacks\":" + std::to_string(r.fallbacks) + ",\"components\":[";
  for (std::size_t i = 0; i < r.components.size(); ++i) {
    const auto& c = r.components[i];
    const auto& p = c.params;
    if (i) s += ",";
    s += "{\"l\":" + format_double(c.l) + ",\"r\":" + format_double(c.r) +
         ",\"mass\":" + format_double(c.mass) + ",\"R\":" + format_double(p.R) +
         ",\"alpha\":" + format_double(p.alpha) + ",\"K\":" + interval_json(p.K) +
         ",\"K_tilde\":" + interval_json(p.K_tilde) + ",\"L_minus\":" + interval_json(p.L_minus) +
         ",\"L_plus\":" + interval_json(p.L_plus) + ",\"e\":" + format_double(p.e) +
         ",\"aw1_step1\":" + format_double(c.aw1_step1) + ",\"repair_mass\":" + format_double(c.repair_mass) +
         ",\"repair_bound\":" + (std::isfinite(c.repair_bound) ? format_double(c.repair_bound) : "null") +
         ",\"tau\":" + format_double(c.tau) + ",\"keep_fraction\":" + format_double(c.keep_fraction) +
         ",\"step4_cost\":" + format_double(c.step4_cost) +
         ",\"side_mass_missing\":" + (c.side_mass_missing ? "true" : "false") +
         ",\"fallbacks\":" + std::to_string(c.fallbacks) + "}";
  }
  return s + "]}";
}

std::string plan_json(const TransportPlan& plan) {
  std::string s = "{\"objective\":" + format_double(plan.objective) + ",\"source\":" + atoms_json(plan.source) +
                  ",\"target\":" + atoms_json(plan.target) + ",\"entries\":[";
  for (std::size_t k = 0; k < plan.entries.size(); ++k) {
    const auto& e = plan.entries[k];
    if (k) s += ",";
    s += "[" + std::to_string(e.i) + "," + std::to_string(e.j) + "," + format_double(e.mass) + "]";
  }
  return s + "]}";
}

void write_plan_csv(std::ostream& out, const TransportPlan& plan) {
  out << "x,x_prime,mass\n";
  for (const auto& e : plan.entries) {
    out << format_double(plan.source[e.i].position) << ',' << format_double(plan.target[e.j].position) << ','
        << format_double(e.mass) << '\n';
  }
}

ExperimentConfig read_experiment_config(std::istream& in, const std::string& source) {
  const json j = parse_json(in, source);
  ExperimentConfig cfg;
  if (!j.is_object() || !j.contains("coupling") || !j["coupling"].is_string()) {
    throw ParseError(source + ": config needs a \"coupling\" path");
  }
  cfg.coupling_path = j["coupling"].get<std::string>();
  if (j.contains("eps")) cfg.eps = json_number(j["eps"], source, "eps");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ParseError(source + ": seed must be a nonnegative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (!j.contains("levels") || !j["levels"].is_array()) throw ParseError(source + ": config needs \"levels\"");
  for (std::size_t i = 0; i < j["levels"].size(); ++i) {
    const json& l = j["levels"][i];
    const std::string at = "levels[" + std::to_string(i) + "]";
    if (!l.is_object() || !l.contains("kind") || !l["kind"].is_string()) {
      throw ParseError(source + ": " + at + " needs a kind");
    }
    LevelSpec spec;
    spec.kind = l["kind"].get<std::string>();
    if (l.contains("n")) spec.n = static_cast<int>(json_number(l["n"], source, at + ".n"));
    if (l.contains("delta")) spec.delta = json_number(l["delta"], source, at + ".delta");
    cfg.levels.push_back(spec);
  }
  return cfg;
}

void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  out << "level,w1_mu,w1_nu,aw1,fallbacks,ms\n";
  for (const auto& r : rows) {
    const auto num = [&](double v) { return r.ok ? format_fixed(v) : std::string("nan"); };
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.3f", r.ms);
    out << r.level << ',' << num(r.w1_mu) << ',' << num(r.w1_nu) << ',' << num(r.aw1) << ',' << r.fallbacks
        << ',' << ms << '\n';
  }
}

}  // namespace motstab
