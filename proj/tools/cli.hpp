#ifndef TRANSVERSE_TOOLS_CLI_HPP
#define TRANSVERSE_TOOLS_CLI_HPP

// Command-line front end. `run` takes the argument vector and two streams so
// the tests can drive it in-process.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "table_io.hpp"
#include "transverse/transverse.hpp"

namespace transverse::cli {

using json = nlohmann::json;

enum ExitCode : int { kOk = 0, kVerdictFailure = 1, kUsage = 2, kNumerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string model;
  std::vector<std::string> params;
  double rtol = 0.0;  // 0: use the command's default
  double atol = 0.0;
  double epsilon = 0.0;
  double cap = 1e8;
  double tol = 0.0;
  double qstar = std::numeric_limits<double>::quiet_NaN();
  std::string grid;
  std::string s_grid;
  std::string loop = "bar0";
  std::string out;
  std::string format = "csv";
  std::string config;
  std::string sweep_param;
  std::string sweep_grid;
  std::string task = "transversality";
  int jobs = 0;
};

// ------------------------------------------------------------- parsing

inline std::vector<double> parse_grid(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) throw UsageError("grid must be a:b:n, got '" + spec + "'");
  double a, b, nd;
  try {
    a = parse_double(parts[0]);
    b = parse_double(parts[1]);
    nd = parse_double(parts[2]);
  } catch (const std::exception&) {
    throw UsageError("grid must be a:b:n, got '" + spec + "'");
  }
  if (!(nd >= 1.0) || nd != std::floor(nd)) throw UsageError("grid point count must be a positive integer");
  const auto n = static_cast<std::size_t>(nd);
  if (n > 1 && !(b > a)) throw UsageError("grid must be increasing (a < b)");
  if (n == 1) return {a};
  return linspace(a, b, n);
}

inline BuiltinParams parse_params(const std::vector<std::string>& kv) {
  BuiltinParams p;
  for (const auto& item : kv) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("parameter must be key=value, got '" + item + "'");
    std::vector<double> vals;
    for (const auto& v : split(item.substr(eq + 1), ',')) {
      try {
        vals.push_back(parse_double(v));
      } catch (const std::exception&) {
        throw UsageError("bad number in parameter '" + item + "'");
      }
    }
    if (vals.empty()) throw UsageError("parameter '" + item + "' has no value");
    p[item.substr(0, eq)] = vals;
  }
  return p;
}

/// Section/key names accepted in the configuration file, mapped to flags.
inline std::string config_key_to_flag(const std::string& section, const std::string& key) {
  static const std::map<std::string, std::string> aliases{
      {"model.name", "model"}, {"model.params", "params"}, {"model.loop", "loop"},
      {"grid.q", "grid"},      {"grid.s", "s-grid"},       {"output.path", "out"},
      {"sweep.param", "sweep-param"}, {"sweep.grid", "sweep-grid"}, {"sweep.task", "task"},
  };
  if (auto it = aliases.find(section + "." + key); it != aliases.end()) return it->second;
  std::string k = key;
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

/// Applies key=value entries from an INI-style file to options that were
/// not given on the command line.
inline void apply_config_file(CLI::App& app, const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(std::string("cannot read config: ") + e.what());
  }
  auto apply = [&app](const std::string& section, const std::string& key, const std::string& value) {
    const std::string flag = config_key_to_flag(section, key);
    CLI::Option* opt = nullptr;
    try {
      opt = app.get_option("--" + flag);
    } catch (const CLI::OptionNotFound&) {
      throw UsageError("unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
    }
    if (opt->count() > 0) return;  // command line wins
    std::istringstream is(value);
    std::string word;
    while (is >> word) opt->add_result(word);
    opt->run_callback();
  };
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      apply("", name, node.get_value<std::string>());
    } else {
      for (const auto& [key, leaf] : node) apply(name, key, leaf.get_value<std::string>());
    }
  }
}

// ------------------------------------------------------------- output

struct Output {
  std::ostream& out;
  std::ostream& err;
  std::string path;

  void emit(const std::string& text) const {
    if (path.empty()) {
      out << text;
      return;
    }
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open output file '" + path + "'");
    f << text;
  }
};

inline std::string render(const Table& t) {
  std::ostringstream os;
  write_table(os, t);
  return os.str();
}

inline json table_to_json(const Table& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json o;
    for (std::size_t i = 0; i < r.size(); ++i) o[t.columns[i]] = r[i];
    rows.push_back(o);
  }
  return rows;
}

inline RiccatiOptions solver_options(const RunConfig& c, RiccatiOptions base = {}) {
  if (c.rtol > 0) base.rtol = c.rtol;
  if (c.atol > 0) base.atol = c.atol;
  base.epsilon = c.epsilon;
  base.cap = c.cap;
  return base;
}

inline TransversalityOptions transversality_options(const RunConfig& c) {
  TransversalityOptions o;
  o.solver = solver_options(c, o.solver);
  o.tol = c.tol;
  return o;
}

inline BuiltinSystem build_system(const RunConfig& c) {
  if (c.model.empty()) throw UsageError("--model is required");
  return builtin_model(c.model, parse_params(c.params));
}

/// The loop selected by --loop for models with more than one.
inline const HamiltonianModel& selected_model(const BuiltinSystem& sys, const RunConfig& c) {
  if (c.loop == "hat1") {
    if (!sys.side_loop) throw UsageError("--loop hat1 is only available for pendula_weak");
    return *sys.side_loop;
  }
  if (c.loop != "bar0") throw UsageError("--loop must be bar0 or hat1");
  return sys.model;
}

inline json report_json(const TransversalityReport& r) {
  return json{{"verdict", verdict_name(r.verdict)},
              {"gap", r.gap},
              {"tol", r.tol},
              {"tol_tangent", r.tol_tangent},
              {"Tu", r.Tu},
              {"Ts_hat", r.Ts_hat},
              {"q1_star", r.q1_star},
              {"route", r.route},
              {"diagnostics", {{"rtol_used", r.rtol_used}, {"steps", r.steps}}}};
}

inline TransversalityReport transversality_for(const BuiltinSystem& sys, const RunConfig& c) {
  const TransversalityOptions o = transversality_options(c);
  const HamiltonianModel& m = selected_model(sys, c);
  if (sys.transition && sys.stable_model && c.loop == "bar0") {
    const double q = std::isnan(c.qstar) ? sys.q1_star : c.qstar;
    return jet_route_transversality(m, *sys.stable_model, *sys.transition, q, o);
  }
  if (!std::isnan(c.qstar) && c.qstar != kPi) {
    throw UsageError("torus models compare slopes at q1* = pi; --qstar cannot move it");
  }
  return torus_transversality(m, o);
}

// ------------------------------------------------------------- commands

inline int cmd_validate(const RunConfig& c, const Output& o) {
  if (c.model.empty()) throw UsageError("--model is required");
  const BuiltinParams params = parse_params(c.params);
  HamiltonianModel m;
  std::optional<PerturbationModel> pert;
  if (c.model == "pendula_identical") {
    // Build without the admissibility check so that it shows up as a report entry.
    m = make_pendula_identical_unchecked(detail::coupling_from_params(params));
  } else {
    BuiltinSystem sys = builtin_model(c.model, params);
    m = selected_model(sys, c);
    pert = sys.perturbation;
  }
  ValidationReport rep = validate_hypotheses(m);
  if (rep.all_passed()) {
    CheckEntry e("loop restriction residual");
    try {
      const LoopProfile prof = loop_profile(m);
      e.worst = prof.max_restriction_residual;
      e.where = prof.worst_residual_at;
      e.passed = prof.max_restriction_residual < 1e-8;
    } catch (const HypothesisError& ex) {
      e.passed = false;
      e.detail = ex.what();
    }
    rep.entries.push_back(e);
    CheckEntry g("generating matrix identity");
    const Linearization lin = linearize(m);
    g.worst = generating_identity_residual(lin);
    g.passed = g.worst < 1e-10;
    rep.entries.push_back(g);
  }
  if (pert && c.loop == "bar0") {
    for (auto& e : validate_perturbation(*pert).entries) rep.entries.push_back(e);
  }

  json checks = json::array();
  for (const auto& e : rep.entries) {
    checks.push_back({{"name", e.name}, {"passed", e.passed}, {"worst", e.worst}, {"where", e.where},
                      {"detail", e.detail}});
  }
  const bool ok = rep.all_passed();
  json doc{{"model", c.model}, {"passed", ok}, {"checks", checks}};
  o.emit(doc.dump(2) + "\n");
  for (const auto& e : rep.entries) {
    if (e.passed) continue;
    const std::string tag = e.name.rfind("H1", 0) == 0 ? "H1 failed" : e.name + " failed";
    o.err << tag << ": " << e.detail << " (worst " << e.worst << " at q1=" << e.where << ")\n";
  }
  return ok ? kOk : kVerdictFailure;
}

inline int cmd_riccati(const RunConfig& c, const Output& o) {
  const BuiltinSystem sys = build_system(c);
  const HamiltonianModel& m = selected_model(sys, c);
  const double qs = std::isnan(c.qstar) ? sys.q1_star : c.qstar;
  const std::vector<double> grid = c.grid.empty() ? linspace(0.0, qs, 101) : parse_grid(c.grid);
  RiccatiOptions so = solver_options(c);
  so.stop_at_blowup = true;
  const LoopProfile prof = loop_profile(m);

  std::optional<RiccatiSolution> pos, neg;
  if (grid.back() > 0) pos = solve_riccati(m, prof, grid.back(), so);
  if (grid.front() < 0) neg = solve_riccati(m, prof, grid.front(), so);
  const RiccatiSolution& any = pos ? *pos : *neg;

  Table t;
  t.columns = {"q1", "Tu"};
  bool blowup = false;
  double blowup_at = std::numeric_limits<double>::quiet_NaN();
  for (const auto* s : {&pos, &neg}) {
    if (*s && (*s)->diagnostics.blowup) {
      blowup = true;
      blowup_at = (*s)->diagnostics.blowup_at;
    }
  }
  for (double q : grid) {
    const RiccatiSolution* s = q >= 0 ? (pos ? &*pos : nullptr) : (neg ? &*neg : nullptr);
    if (s == nullptr) s = &any;
    if (!s->covers(q)) continue;  // past a blow-up
    t.rows.push_back({q, s->at(q)});
  }
  t.meta = {{"model", c.model},
            {"T0", format_double(any.T0)},
            {"Delta", format_double(any.Delta)},
            {"blowup", blowup ? "1" : "0"},
            {"blowup_at", format_double(blowup_at)},
            {"steps", std::to_string(any.diagnostics.steps)}};
  if (c.format == "json") {
    json doc{{"model", c.model}, {"T0", any.T0},      {"Delta", any.Delta}, {"blowup", blowup},
             {"steps", any.diagnostics.steps}, {"rows", table_to_json(t)}};
    if (blowup) doc["blowup_at"] = blowup_at;
    o.emit(doc.dump(2) + "\n");
  } else {
    o.emit(render(t));
  }
  if (blowup) {
    o.err << "graph form lost / blow-up at q1=" << blowup_at << "\n";
    return kNumerical;
  }
  return kOk;
}

inline int cmd_transversality(const RunConfig& c, const Output& o) {
  const BuiltinSystem sys = build_system(c);
  const TransversalityReport r = transversality_for(sys, c);
  json doc = report_json(r);
  doc["model"] = c.model;
  o.emit(doc.dump(2) + "\n");
  return r.verdict == Verdict::inconclusive ? kVerdictFailure : kOk;
}

inline std::string near_threshold_note(double lambda) {
  const double l0 = lambda0_threshold();
  if (std::abs(lambda - l0) > 1e-2) return "";
  std::ostringstream os;
  os.precision(8);
  os << "lambda=" << lambda << " is near the threshold lambda0=" << l0
     << "; the sign argument for the nondegeneracy of L~''(0) loses its margin here";
  return os.str();
}

inline int cmd_melnikov(const RunConfig& c, const Output& o) {
  const BuiltinSystem sys = build_system(c);
  if (!sys.perturbation) throw UsageError("model '" + c.model + "' has no perturbation; use pendula_weak");
  const double lambda = sys.perturbation ? parse_params(c.params).at("lambda").front() : 0.0;

  MelnikovResult r;
  std::optional<TransversalityReport> unperturbed;
  if (c.loop == "hat1") {
    unperturbed = torus_transversality(*sys.side_loop, transversality_options(c));
    r = perturbed_loop_verdict(*unperturbed);
  } else if (c.loop == "bar0") {
    const std::vector<double> sg = c.s_grid.empty() ? linspace(-4.0, 4.0, 33) : parse_grid(c.s_grid);
    r = perturbed_loop_verdict(*sys.perturbation, sg);
  } else {
    throw UsageError("--loop must be bar0 or hat1");
  }
  const std::string near = near_threshold_note(lambda);
  if (!near.empty()) {
    r.note += r.note.empty() ? near : "; " + near;
    o.err << "note: " << near << "\n";
  }
  if (r.quadrature_diag.tail_warning) {
    o.err << "warning: quadrature tail bound " << r.quadrature_diag.tail_bound << " above target\n";
  }

  const char* case_name = r.case_label == LoopCase::A ? "A" : "B";
  Table t;
  t.columns = {"s", "L"};
  for (std::size_t i = 0; i < r.s.size(); ++i) t.rows.push_back({r.s[i], r.L[i]});
  std::string crit;
  for (double s : r.critical_s) crit += (crit.empty() ? "" : " ") + format_double(s);
  t.meta = {{"model", c.model},
            {"case", case_name},
            {"verdict", perturbed_verdict_name(r.verdict)},
            {"dL0", format_double(r.dL0)},
            {"ddL0", format_double(r.ddL0)},
            {"T_cut", format_double(r.quadrature_diag.T_cut)},
            {"tail_bound", format_double(r.quadrature_diag.tail_bound)},
            {"critical_s", crit},
            {"note", r.note}};
  if (c.format == "json") {
    json doc{{"model", c.model},
             {"case", case_name},
             {"verdict", perturbed_verdict_name(r.verdict)},
             {"dL0", r.dL0},
             {"ddL0", r.ddL0},
             {"critical_s", r.critical_s},
             {"note", r.note},
             {"quadrature", {{"T_cut", r.quadrature_diag.T_cut}, {"tail_bound", r.quadrature_diag.tail_bound}}},
             {"L_samples", table_to_json(t)}};
    if (unperturbed) doc["unperturbed"] = report_json(*unperturbed);
    o.emit(doc.dump(2) + "\n");
  } else {
    o.emit(render(t));
  }
  return r.verdict == PerturbedVerdict::degenerate ? kVerdictFailure : kOk;
}

/// One sweep row: parameter value, task-specific columns, per-row status code.
inline std::vector<double> sweep_row(RunConfig c, double value) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::string prefix = c.sweep_param + "=";
  c.params.erase(std::remove_if(c.params.begin(), c.params.end(),
                                [&](const std::string& s) { return s.rfind(prefix, 0) == 0; }),
                 c.params.end());
  c.params.push_back(prefix + format_double(value));
  try {
    const BuiltinSystem sys = build_system(c);
    if (c.task == "transversality") {
      const TransversalityReport r = transversality_for(sys, c);
      const double code = r.verdict == Verdict::transversal ? 1 : r.verdict == Verdict::tangent ? 0 : -1;
      return {value, r.Tu, r.Ts_hat, r.gap, code, r.verdict == Verdict::inconclusive ? 1.0 : 0.0};
    }
    if (c.task == "melnikov") {
      if (!sys.perturbation) throw UsageError("sweep task melnikov needs pendula_weak");
      const MelnikovDerivatives d = melnikov_derivatives(*sys.perturbation);
      const MelnikovResult r = perturbed_loop_verdict(d.dL, d.ddL);
      const double code = r.verdict == PerturbedVerdict::perturbed_loop_transversal ? 1
                          : r.verdict == PerturbedVerdict::degenerate              ? 0
                                                                                   : -1;
      return {value, d.dL, d.ddL, code, r.verdict == PerturbedVerdict::degenerate ? 1.0 : 0.0};
    }
    throw UsageError("sweep task must be transversality or melnikov");
  } catch (const UsageError&) {
    throw;
  } catch (const ConstructionError&) {
    const std::size_t width = c.task == "melnikov" ? 5 : 6;
    std::vector<double> row(width, nan);
    row[0] = value;
    row.back() = kUsage;
    return row;
  } catch (const HypothesisError&) {
    const std::size_t width = c.task == "melnikov" ? 5 : 6;
    std::vector<double> row(width, nan);
    row[0] = value;
    row.back() = kVerdictFailure;
    return row;
  } catch (const Error&) {
    const std::size_t width = c.task == "melnikov" ? 5 : 6;
    std::vector<double> row(width, nan);
    row[0] = value;
    row.back() = kNumerical;
    return row;
  }
}

inline int cmd_sweep(const RunConfig& c, const Output& o) {
  if (c.sweep_param.empty() || c.sweep_grid.empty()) throw UsageError("sweep needs --sweep-param and --sweep-grid");
  if (c.task != "transversality" && c.task != "melnikov") {
    throw UsageError("sweep task must be transversality or melnikov");
  }
  const std::vector<double> values = parse_grid(c.sweep_grid);
  const unsigned jobs = c.jobs > 0 ? static_cast<unsigned>(c.jobs) : std::max(1u, std::thread::hardware_concurrency());

  // Fan out in batches of `jobs`; results are stored by index so the merged
  // table is ordered by parameter regardless of completion order.
  std::vector<std::vector<double>> rows(values.size());
  for (std::size_t start = 0; start < values.size(); start += jobs) {
    std::vector<std::future<std::vector<double>>> batch;
    const std::size_t end = std::min(values.size(), start + jobs);
    for (std::size_t i = start; i < end; ++i) batch.push_back(std::async(std::launch::async, sweep_row, c, values[i]));
    for (std::size_t i = start; i < end; ++i) rows[i] = batch[i - start].get();
  }

  Table t;
  if (c.task == "transversality") {
    t.columns = {c.sweep_param, "Tu", "Ts_hat", "gap", "verdict", "status"};
    t.meta = {{"verdict codes", "1 transversal, 0 tangent, -1 inconclusive"}};
  } else {
    t.columns = {c.sweep_param, "dL0", "ddL0", "verdict", "status"};
    t.meta = {{"verdict codes", "1 perturbed_loop_transversal, 0 degenerate, -1 inapplicable"}};
  }
  t.meta.insert(t.meta.begin(), {"model", c.model});
  t.rows = std::move(rows);
  if (c.format == "json") {
    o.emit(json{{"model", c.model}, {"task", c.task}, {"rows", table_to_json(t)}}.dump(2) + "\n");
  } else {
    o.emit(render(t));
  }
  int worst = kOk;
  for (const auto& r : t.rows) worst = std::max(worst, static_cast<int>(r.back()));
  return worst;
}

// ------------------------------------------------------------- entry

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transversality of invariant manifolds along loops of 2-d.o.f. Hamiltonians", "transverse"};
  app.require_subcommand(1);
  RunConfig c;

  app.add_option("--model", c.model, "built-in model: neumann | pendula_identical | pendula_weak");
  app.add_option("--params", c.params, "model parameters as key=value (lists as key=v1,v2,...)");
  app.add_option("--rtol", c.rtol, "ODE relative tolerance");
  app.add_option("--atol", c.atol, "ODE absolute tolerance");
  app.add_option("--epsilon", c.epsilon, "start offset from the equilibrium (0: automatic)");
  app.add_option("--cap", c.cap, "|T| above this is reported as loss of graph form");
  app.add_option("--tol", c.tol, "verdict tolerance on the slope gap (0: automatic)");
  app.add_option("--qstar", c.qstar, "comparison point q1* (heteroclinic models)");
  app.add_option("--grid", c.grid, "q1 grid a:b:n");
  app.add_option("--s-grid", c.s_grid, "section grid a:b:n for the reduced potential");
  app.add_option("--loop", c.loop, "pendula_weak loop: bar0 (separatrix family) | hat1 (side loop)");
  app.add_option("--out", c.out, "write the result here instead of stdout");
  app.add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--sweep-param", c.sweep_param, "parameter swept by the sweep command");
  app.add_option("--sweep-grid", c.sweep_grid, "sweep values a:b:n");
  app.add_option("--task", c.task, "sweep task: transversality | melnikov");
  app.add_option("--jobs", c.jobs, "concurrent solves in a sweep (0: hardware threads)");
  app.add_option("--config", c.config, "INI file with default values; flags override it");

  const std::vector<std::pair<const char*, const char*>> subs{
      {"validate", "check the standing hypotheses for a model"},
      {"riccati", "tabulate the unstable slope T^u(q1)"},
      {"transversality", "compare unstable and stable slopes at q1*"},
      {"melnikov", "reduced Mel'nikov potential and the perturbed-loop verdict"},
      {"sweep", "run transversality or melnikov over a parameter grid"}};
  for (const auto& [name, help] : subs) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  }
  c.command = app.get_subcommands().front()->get_name();

  try {
    if (!c.config.empty()) apply_config_file(app, c.config);
    if (c.rtol < 0 || c.atol < 0 || c.epsilon < 0 || !(c.cap > 0) || c.tol < 0) {
      throw UsageError("tolerances must be positive");
    }
    const Output o{out, err, c.out};
    if (c.command == "validate") return cmd_validate(c, o);
    if (c.command == "riccati") return cmd_riccati(c, o);
    if (c.command == "transversality") return cmd_transversality(c, o);
    if (c.command == "melnikov") return cmd_melnikov(c, o);
    return cmd_sweep(c, o);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConstructionError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const HypothesisError& e) {
    err << "hypothesis failure: " << e.what() << "\n";
    return kVerdictFailure;
  } catch (const UnsupportedOperation& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "usage error: missing parameter (" << e.what() << ")\n";
    return kUsage;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace transverse::cli

#endif  // TRANSVERSE_TOOLS_CLI_HPP
