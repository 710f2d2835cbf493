#include "bolza/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bolza/json_io.hpp"
#include "bolza/measure_ode.hpp"
#include "bolza/optimality.hpp"
#include "bolza/solver.hpp"

namespace bolza {
namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no literal for infinities, so nonfinite values serialize as
// strings.
json num_json(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? json("inf") : json("-inf");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

void emit_json(const json& j, const std::string& path) { write_text(path, j.dump(2) + "\n"); }

std::string bv_arc_csv(const BVArc& x) {
  const Grid& g = x.diff.base.grid;
  std::size_t d = x.d();
  std::ostringstream out;
  out << "t";
  for (std::size_t k = 0; k < d; ++k) out << ",x" << k;
  for (std::size_t k = 0; k < d; ++k) out << ",xplus" << k;
  out << "\n";
  for (std::size_t j = 0; j < g.nodes.size(); ++j) {
    double t = g.nodes[j];
    Vec left = x.eval(t);
    Vec right = (j + 1 == g.nodes.size()) ? x.eval_T_plus() : x.eval_right(t);
    out << fmt(t);
    for (double v : left) out << "," << fmt(v);
    for (double v : right) out << "," << fmt(v);
    out << "\n";
  }
  return out.str();
}

std::string continuous_arc_csv(const ContinuousArc& y) {
  std::ostringstream out;
  out << "t";
  for (std::size_t k = 0; k < y.grid.d; ++k) out << ",y" << k;
  out << "\n";
  for (std::size_t j = 0; j < y.grid.nodes.size(); ++j) {
    out << fmt(y.grid.nodes[j]);
    for (double v : y.nodes[j]) out << "," << fmt(v);
    out << "\n";
  }
  return out.str();
}

json violation_json(const InfeasibilityCertificate& c) {
  return json{{"what", c.what},
              {"index", c.index},
              {"coord", c.coord},
              {"box", json::array({num_json(c.box.lo), num_json(c.box.hi)})},
              {"point", c.point}};
}

json solve_result_json(const SolveResult& r, bool primal, unsigned seed) {
  json j{{"value", num_json(r.value)},
         {"iterations", r.iterations},
         {"converged", r.converged},
         {"infeasible", r.infeasible},
         {"seed", seed}};
  if (primal)
    j["x"] = bv_arc_to_json(r.x);
  else
    j["y"] = continuous_arc_to_json(r.y);
  if (r.violation) j["violation"] = violation_json(*r.violation);
  return j;
}

// Union of the grid with a uniform partition into n cells. Original nodes are
// kept bitwise so atoms sitting on them stay on nodes; uniform nodes closer
// than 1e-12 * (1 + T) to an existing one are dropped.
Grid union_grid(const Grid& g, std::size_t n) {
  const double T = g.T();
  const double tol = 1e-12 * (1.0 + T);
  Vec nodes = g.nodes;
  for (std::size_t i = 1; i < n; ++i) {
    double t = T * double(i) / double(n);
    auto it = std::lower_bound(nodes.begin(), nodes.end(), t);
    bool close = (it != nodes.end() && *it - t <= tol) ||
                 (it != nodes.begin() && t - *(it - 1) <= tol);
    if (!close) nodes.insert(it, t);
  }
  Grid out{std::move(nodes), g.d};
  out.validate();
  return out;
}

// Same instance on the refined grid: every new cell inherits the cost pair of
// the original cell containing it, and the base mass splits in proportion to
// Lebesgue length.
BolzaProblem regrid_problem(const BolzaProblem& P, const Grid& fine) {
  const Grid& g = P.grid();
  std::vector<std::pair<ConvexFn, ConvexFn>> parts;
  Vec mass(fine.cells());
  for (std::size_t j = 0; j < fine.cells(); ++j) {
    std::size_t i = g.cell_right_open(fine.midpoint(j));
    parts.emplace_back(P.K.cells[i].phi, P.K.cells[i].psi);
    mass[j] = P.mu.cell_mass[i] * fine.cell_length(j) / g.cell_length(i);
  }
  BolzaProblem out{BaseMeasure{fine, std::move(mass)},
                   TimeIntegrand::from_parts(fine, std::move(parts)), P.k};
  out.validate();
  return out;
}

// Measure on the refined grid with the same Lebesgue density per covered
// cell and unchanged atoms. Exact when `fine` refines the measure's grid.
DiscreteRadonMeasure regrid_measure(const DiscreteRadonMeasure& u, const Grid& fine) {
  const Grid& g = u.base.grid;
  DiscreteRadonMeasure out = DiscreteRadonMeasure::zeros(BaseMeasure::lebesgue(fine));
  for (std::size_t j = 0; j < fine.cells(); ++j) {
    std::size_t i = g.cell_right_open(fine.midpoint(j));
    double per_leb = u.base.cell_mass[i] / g.cell_length(i);
    for (std::size_t k = 0; k < u.d(); ++k) out.density[j][k] = u.density[i][k] * per_leb;
  }
  out.atoms = u.atoms;
  out.validate();
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": not a number: \"" + s + "\"");
  }
  if (pos != s.size()) throw std::invalid_argument(what + ": not a number: \"" + s + "\"");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream in(s);
  while (std::getline(in, tok, sep)) out.push_back(tok);
  return out;
}

Vec parse_comma_list(const std::string& spec, const std::string& what) {
  Vec out;
  for (const std::string& tok : split(spec, ',')) out.push_back(parse_double(tok, what));
  if (out.empty()) throw std::invalid_argument(what + ": empty list");
  return out;
}

// "a:b:step" (end inclusive within half a step) or a comma-separated list.
Vec parse_eps(const std::string& spec) {
  if (spec.find(':') == std::string::npos) return parse_comma_list(spec, "--eps");
  std::vector<std::string> parts = split(spec, ':');
  if (parts.size() != 3) throw std::invalid_argument("--eps: expected a:b:step");
  double a = parse_double(parts[0], "--eps");
  double b = parse_double(parts[1], "--eps");
  double step = parse_double(parts[2], "--eps");
  if (!(step > 0)) throw std::invalid_argument("--eps: step must be positive");
  Vec out;
  for (long k = 0;; ++k) {
    double v = a + double(k) * step;
    if (v > b + 0.5 * step) break;
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("--eps: empty range");
  return out;
}

struct SolveOpts {
  std::string problem, u, out, csv;
  std::size_t grid = 0;
  double tol = 1e-9;
  std::size_t max_iters = 30000;
  unsigned seed = 0;
};

void add_solve_opts(CLI::App* cmd, SolveOpts& o) {
  cmd->add_option("--problem", o.problem, "problem JSON file")->required();
  cmd->add_option("--u", o.u, "forcing measure JSON file (zero when absent)");
  cmd->add_option("--grid", o.grid,
                  "refine onto the union with a uniform grid of this many cells");
  cmd->add_option("--tol", o.tol, "solver tolerance");
  cmd->add_option("--max-iters", o.max_iters, "iteration cap");
  cmd->add_option("--seed", o.seed, "seed recorded in the output");
  cmd->add_option("--out", o.out, "output JSON file (stdout when absent)");
  cmd->add_option("--csv", o.csv, "also write the decision as CSV");
}

struct Loaded {
  BolzaProblem P;
  DiscreteRadonMeasure u;  // empty means zero
};

Loaded load_instance(const SolveOpts& o) {
  Loaded L;
  L.P = problem_from_json(load_json_file(o.problem));
  if (!o.u.empty()) {
    L.u = measure_from_json(load_json_file(o.u), o.u);
    if (!L.u.base.grid.matches(L.P.grid()))
      throw std::invalid_argument("u is not on the problem grid");
  }
  if (o.grid > 0) {
    Grid fine = union_grid(L.P.grid(), o.grid);
    L.P = regrid_problem(L.P, fine);
    if (!o.u.empty()) L.u = regrid_measure(L.u, fine);
  }
  return L;
}

SolveConfig make_config(const SolveOpts& o) {
  SolveConfig cfg;
  cfg.max_iters = o.max_iters;
  cfg.tol = o.tol;
  cfg.seed = o.seed;
  return cfg;
}

int do_solve(const SolveOpts& o, bool primal) {
  Loaded L = load_instance(o);
  SolveResult r =
      primal ? solve_primal(L.P, L.u, make_config(o)) : solve_dual(L.P, L.u, make_config(o));
  emit_json(solve_result_json(r, primal, o.seed), o.out);
  if (!o.csv.empty()) write_text(o.csv, primal ? bv_arc_csv(r.x) : continuous_arc_csv(r.y));
  if (r.infeasible) return 3;
  if (!r.converged) return 5;
  return 0;
}

int do_gap(const SolveOpts& o) {
  Loaded L = load_instance(o);
  GapResult g = duality_gap(L.P, L.u, make_config(o));
  json j{{"primal", solve_result_json(g.primal, true, o.seed)},
         {"dual", solve_result_json(g.dual, false, o.seed)},
         {"gap", num_json(g.gap)}};
  emit_json(j, o.out);
  if (!o.csv.empty()) write_text(o.csv, bv_arc_csv(g.primal.x));
  if (g.primal.infeasible || g.dual.infeasible) return 3;
  if (!g.primal.converged || !g.dual.converged) return 5;
  return 0;
}

struct CertifyOpts {
  std::string problem, x, y, out;
  double tol = 1e-6;
};

int do_certify(const CertifyOpts& o) {
  BolzaProblem P = problem_from_json(load_json_file(o.problem));
  BVArc x = bv_arc_from_json(load_json_file(o.x), o.x);
  ContinuousArc y = continuous_arc_from_json(load_json_file(o.y), o.y);
  x.diff = rebase_measure(x.diff, P.mu);
  CertificateReport rep = certify(P, x, y, o.tol);
  json j{{"hamiltonian_residual_l1", num_json(rep.hamiltonian_residual_L1)},
         {"singular_residual", num_json(rep.singular_residual)},
         {"transversality_residual", num_json(rep.transversality_residual)},
         {"fenchel_gap", num_json(rep.fenchel_gap)},
         {"tol", rep.tol},
         {"verdict", rep.verdict},
         {"hypotheses_verified", rep.hypotheses_verified}};
  emit_json(j, o.out);
  return rep.verdict ? 0 : 4;
}

struct SweepOpts {
  std::string family, eps, out, csv;
  std::size_t grid = 0;
  double tol = 1e-9;
  std::size_t max_iters = 30000;
  unsigned seed = 0;
};

int do_sweep(const SweepOpts& o) {
  json fam = load_json_file(o.family);
  if (!fam.is_object() || !fam.contains("problem") || !fam.contains("u1"))
    throw SchemaError("/", "family file needs \"problem\" and \"u1\"");
  BolzaProblem P = problem_from_json(fam["problem"]);
  DiscreteRadonMeasure u1 = measure_from_json(fam["u1"], "/u1");
  if (!u1.base.grid.matches(P.grid()))
    throw std::invalid_argument("u1 is not on the problem grid");
  if (o.grid > 0) {
    Grid fine = union_grid(P.grid(), o.grid);
    P = regrid_problem(P, fine);
    u1 = regrid_measure(u1, fine);
  }
  SolveConfig cfg;
  cfg.max_iters = o.max_iters;
  cfg.tol = o.tol;
  cfg.seed = o.seed;
  SweepResult res = value_sweep(P, u1, parse_eps(o.eps), cfg);

  json pts = json::array();
  std::string csv = "eps,value,dual_value\n";
  bool any_infeasible = false, any_nonconverged = false;
  for (const SweepPoint& p : res.points) {
    pts.push_back(json{{"eps", p.eps},
                       {"value", num_json(p.value)},
                       {"dual_value", num_json(p.dual_value)},
                       {"converged", p.converged}});
    csv += fmt(p.eps) + "," + fmt(p.value) + "," + fmt(p.dual_value) + "\n";
    if (!std::isfinite(p.value) || !std::isfinite(p.dual_value)) any_infeasible = true;
    if (!p.converged) any_nonconverged = true;
  }
  json j{{"points", pts},
         {"convexity_violation", num_json(res.convexity_violation)},
         {"subgradient_violation", num_json(res.subgradient_violation)},
         {"seed", o.seed}};
  emit_json(j, o.out);
  if (!o.csv.empty()) write_text(o.csv, csv);
  if (any_infeasible) return 3;
  if (any_nonconverged) return 5;
  return 0;
}

struct LinealityOpts {
  std::string problem, directions, out;
  std::size_t grid = 0;
};

int do_lineality(const LinealityOpts& o) {
  BolzaProblem P = problem_from_json(load_json_file(o.problem));
  Grid original = P.grid();
  Grid fine = original;
  if (o.grid > 0) {
    fine = union_grid(original, o.grid);
    P = regrid_problem(P, fine);
  }
  json dj = load_json_file(o.directions);
  const json* arr = nullptr;
  if (dj.is_array())
    arr = &dj;
  else if (dj.is_object() && dj.contains("directions") && dj["directions"].is_array())
    arr = &dj["directions"];
  else
    throw SchemaError("/", "directions must be an array of arcs or {\"directions\": [...]}");

  std::vector<BVArc> dirs;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    BVArc x = bv_arc_from_json((*arr)[i], "/directions/" + std::to_string(i));
    if (!x.diff.base.grid.matches(original))
      throw std::invalid_argument("direction " + std::to_string(i) +
                                  " is not on the problem grid");
    if (o.grid > 0) x.diff = regrid_measure(x.diff, fine);
    x.diff = rebase_measure(x.diff, P.mu);
    dirs.push_back(std::move(x));
  }
  LinealityResult res = check_lineality(P, dirs);
  json checks = json::array();
  for (const LinealityCheck& c : res.checks)
    checks.push_back(json{{"value", num_json(c.value)},
                          {"value_neg", num_json(c.value_neg)},
                          {"in_cone", c.in_cone},
                          {"neg_in_cone", c.neg_in_cone},
                          {"ok", c.ok}});
  emit_json(json{{"checks", checks}, {"verdict", res.verdict}}, o.out);
  return res.verdict ? 0 : 4;
}

struct OdeOpts {
  std::string field, driver, v, a, out, csv;
  double tol = 1e-9;
};

int do_ode(const OdeOpts& o) {
  LipschitzField F = field_from_json(load_json_file(o.field));
  DriverMeasure driver = driver_from_json(load_json_file(o.driver));
  Vec a = parse_comma_list(o.a, "--a");
  ContinuousArc v;
  if (o.v.empty()) {
    Grid vg = driver.base.grid;
    vg.d = F.d();
    v = ContinuousArc::constant(vg, Vec(F.d(), 0.0));
  } else {
    v = continuous_arc_from_json(load_json_file(o.v), o.v);
  }
  BVArc y = picard_solve(F, driver, v, a, o.tol);
  json j{{"arc", bv_arc_to_json(y)},
         {"gamma", gamma_total(F, driver)},
         {"gronwall_bound", num_json(gronwall_bound(F, driver, v.sup_norm(), a))}};
  emit_json(j, o.out);
  if (!o.csv.empty()) write_text(o.csv, bv_arc_csv(y));
  return 0;
}

struct ConjugateOpts {
  std::string f, out;
};

int do_conjugate(const ConjugateOpts& o) {
  Plq f = plq_from_json(load_json_file(o.f), "/");
  emit_json(plq_to_json(f.conjugate()), o.out);
  return 0;
}

struct RegularityOpts {
  std::string map, side = "two_sided", out;
};

int do_check_regularity(const RegularityOpts& o) {
  PiecewiseBoxMap S = box_map_from_json(load_json_file(o.map));
  RegularitySide side;
  if (o.side == "two_sided")
    side = RegularitySide::two_sided;
  else if (o.side == "left")
    side = RegularitySide::left;
  else
    throw std::invalid_argument("--side must be two_sided or left");
  std::vector<RegularityNode> nodes = check_regularity(S, side);
  json arr = json::array();
  bool all_outer = true, all_isc = true;
  for (const RegularityNode& n : nodes) {
    arr.push_back(json{{"node", n.node},
                       {"t", n.t},
                       {"outer_regular", n.outer_regular},
                       {"outer_witness_coord", n.outer_witness_coord},
                       {"outer_witness_point", num_json(n.outer_witness_point)},
                       {"inner_semicontinuous", n.inner_semicontinuous},
                       {"isc_witness_coord", n.isc_witness_coord},
                       {"isc_witness_point", num_json(n.isc_witness_point)}});
    all_outer = all_outer && n.outer_regular;
    all_isc = all_isc && n.inner_semicontinuous;
  }
  emit_json(json{{"nodes", arr},
                 {"all_outer_regular", all_outer},
                 {"all_inner_semicontinuous", all_isc}},
            o.out);
  return 0;
}

// The implementation is sequential; the variable is accepted as a cap so
// wrappers that set it keep working, but it must at least parse.
void check_threads_env() {
  const char* env = std::getenv("BOLZA_THREADS");
  if (!env) return;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v <= 0)
    throw std::invalid_argument("BOLZA_THREADS must be a positive integer");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"convex problems of Bolza over bounded-variation arcs"};
  app.require_subcommand(1);

  SolveOpts solve_o, dual_o, gap_o;
  add_solve_opts(app.add_subcommand("solve", "minimize the primal functional"), solve_o);
  add_solve_opts(app.add_subcommand("dual", "maximize the dual functional"), dual_o);
  add_solve_opts(app.add_subcommand("gap", "solve both sides and report the duality gap"),
                 gap_o);

  CertifyOpts cert_o;
  CLI::App* c_cert = app.add_subcommand("certify", "check a candidate pair for optimality");
  c_cert->add_option("--problem", cert_o.problem, "problem JSON file")->required();
  c_cert->add_option("--x", cert_o.x, "primal arc JSON file")->required();
  c_cert->add_option("--y", cert_o.y, "dual arc JSON file")->required();
  c_cert->add_option("--tol", cert_o.tol, "certification tolerance");
  c_cert->add_option("--out", cert_o.out, "output JSON file (stdout when absent)");

  SweepOpts sweep_o;
  CLI::App* c_sweep = app.add_subcommand("sweep", "value function along a forcing ray");
  c_sweep->add_option("--family", sweep_o.family,
                      "JSON file with \"problem\" and \"u1\"")->required();
  c_sweep->add_option("--eps", sweep_o.eps, "a:b:step or comma-separated list")->required();
  c_sweep->add_option("--grid", sweep_o.grid,
                      "refine onto the union with a uniform grid of this many cells");
  c_sweep->add_option("--tol", sweep_o.tol, "solver tolerance");
  c_sweep->add_option("--max-iters", sweep_o.max_iters, "iteration cap");
  c_sweep->add_option("--seed", sweep_o.seed, "seed recorded in the output");
  c_sweep->add_option("--out", sweep_o.out, "output JSON file (stdout when absent)");
  c_sweep->add_option("--csv", sweep_o.csv, "also write eps,value,dual_value rows");

  LinealityOpts lin_o;
  CLI::App* c_lin = app.add_subcommand("lineality", "check horizon directions for lineality");
  c_lin->add_option("--problem", lin_o.problem, "problem JSON file")->required();
  c_lin->add_option("--directions", lin_o.directions, "JSON file of direction arcs")
      ->required();
  c_lin->add_option("--grid", lin_o.grid,
                    "refine onto the union with a uniform grid of this many cells");
  c_lin->add_option("--out", lin_o.out, "output JSON file (stdout when absent)");

  OdeOpts ode_o;
  CLI::App* c_ode = app.add_subcommand("ode", "integrate a measure-driven equation");
  c_ode->add_option("--field", ode_o.field, "field JSON file")->required();
  c_ode->add_option("--driver", ode_o.driver, "driving measure JSON file")->required();
  c_ode->add_option("--v", ode_o.v, "input arc JSON file (zero when absent)");
  c_ode->add_option("--a", ode_o.a, "initial value, comma-separated")->required();
  c_ode->add_option("--tol", ode_o.tol, "fixed-point tolerance");
  c_ode->add_option("--out", ode_o.out, "output JSON file (stdout when absent)");
  c_ode->add_option("--csv", ode_o.csv, "also write the solution as CSV");

  ConjugateOpts conj_o;
  CLI::App* c_conj = app.add_subcommand("conjugate", "convex conjugate of a scalar function");
  c_conj->add_option("--f", conj_o.f, "function JSON file")->required();
  c_conj->add_option("--out", conj_o.out, "output JSON file (stdout when absent)");

  RegularityOpts reg_o;
  CLI::App* c_reg = app.add_subcommand("check-regularity", "regularity of a box map in time");
  c_reg->add_option("--map", reg_o.map, "box map JSON file")->required();
  c_reg->add_option("--side", reg_o.side, "two_sided or left");
  c_reg->add_option("--out", reg_o.out, "output JSON file (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    check_threads_env();
    if (app.got_subcommand("solve")) return do_solve(solve_o, true);
    if (app.got_subcommand("dual")) return do_solve(dual_o, false);
    if (app.got_subcommand("gap")) return do_gap(gap_o);
    if (app.got_subcommand("certify")) return do_certify(cert_o);
    if (app.got_subcommand("sweep")) return do_sweep(sweep_o);
    if (app.got_subcommand("lineality")) return do_lineality(lin_o);
    if (app.got_subcommand("ode")) return do_ode(ode_o);
    if (app.got_subcommand("conjugate")) return do_conjugate(conj_o);
    if (app.got_subcommand("check-regularity")) return do_check_regularity(reg_o);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const FieldBoundViolation& e) {
    std::cerr << "field bound violated: " << e.what() << "\n";
    return 2;
  } catch (const ContractionFailure& e) {
    std::cerr << "no contraction: " << e.what() << "\n";
    return 5;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bolza
