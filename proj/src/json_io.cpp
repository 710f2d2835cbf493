#include "bolza/json_io.hpp"

#include <fstream>
#include <limits>
#include <utility>

namespace bolza {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "/" + key, "missing required field");
  return *it;
}

const json* optional_field(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

double as_bound(const json& j, const std::string& path, double when_null) {
  return j.is_null() ? when_null : as_number(j, path);
}

std::size_t as_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() <= 0)
    throw SchemaError(path, "expected a positive integer");
  return static_cast<std::size_t>(j.get<long long>());
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

Vec as_vec(const json& j, const std::string& path,
           std::size_t want = std::numeric_limits<std::size_t>::max()) {
  as_array(j, path);
  if (want != std::numeric_limits<std::size_t>::max() && j.size() != want)
    throw SchemaError(path, "expected " + std::to_string(want) + " entries");
  Vec out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_number(j[i], path + "/" + std::to_string(i)));
  return out;
}

// A point of R^d: a bare number when d = 1, else an array of d numbers.
Vec as_point(const json& j, std::size_t d, const std::string& path) {
  if (j.is_number() && d == 1) return Vec{j.get<double>()};
  return as_vec(j, path, d);
}

json point_to_json(const Vec& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

// Grid from either an explicit node array or a cell count (uniform over
// [0, T], requiring T).
Grid parse_grid(const json& spec, const json* T, std::size_t d, const std::string& path,
                const std::string& t_path) {
  if (spec.is_number_integer()) {
    if (!T) throw SchemaError(t_path, "required when \"grid\" is a cell count");
    return Grid::uniform(as_number(*T, t_path), as_count(spec, path), d);
  }
  Grid g;
  g.nodes = as_vec(spec, path);
  g.d = d;
  try {
    g.validate();
  } catch (const std::exception& e) {
    throw SchemaError(path, e.what());
  }
  return g;
}

std::size_t parse_dim(const json& j, const std::string& path) {
  const json* d = optional_field(j, "d");
  return d ? as_count(*d, path + "/d") : 1;
}

Interval parse_interval(const json& j, const std::string& path) {
  as_array(j, path);
  if (j.size() != 2) throw SchemaError(path, "expected [lo, hi]");
  return Interval{as_bound(j[0], path + "/0", -kInf), as_bound(j[1], path + "/1", kInf)};
}

Box parse_box(const json& j, std::size_t d, const std::string& path) {
  as_array(j, path);
  Box b;
  if (d == 1 && j.size() == 2 && (j[0].is_number() || j[0].is_null())) {
    b.coords.push_back(parse_interval(j, path));
    return b;
  }
  if (j.size() != d) throw SchemaError(path, "expected " + std::to_string(d) + " intervals");
  for (std::size_t i = 0; i < d; ++i)
    b.coords.push_back(parse_interval(j[i], path + "/" + std::to_string(i)));
  return b;
}

std::vector<Vec> parse_matrix(const json& j, std::size_t d, const std::string& path) {
  if (j.is_number() && d == 1) return {Vec{j.get<double>()}};
  as_array(j, path);
  if (j.size() != d) throw SchemaError(path, "expected " + std::to_string(d) + " rows");
  std::vector<Vec> rows;
  for (std::size_t r = 0; r < d; ++r)
    rows.push_back(as_point(j[r], d, path + "/" + std::to_string(r)));
  return rows;
}

std::vector<Atom> parse_atoms(const json* atoms, std::size_t d, const std::string& path) {
  std::vector<Atom> out;
  if (!atoms) return out;
  as_array(*atoms, path);
  for (std::size_t i = 0; i < atoms->size(); ++i) {
    std::string p = path + "/" + std::to_string(i);
    const json& a = (*atoms)[i];
    Atom atom;
    atom.t = as_number(require(a, "t", p), p + "/t");
    atom.mass = as_point(require(a, "mass", p), d, p + "/mass");
    out.push_back(std::move(atom));
  }
  return out;
}

}  // namespace

nlohmann::json load_json_file(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw SchemaError(filename, "cannot open file");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw SchemaError(filename, "malformed JSON");
  return j;
}

Plq plq_from_json(const nlohmann::json& j, const std::string& path) {
  const json& dom = require(j, "dom", path);
  as_array(dom, path + "/dom");
  if (dom.size() != 2) throw SchemaError(path + "/dom", "expected [lo, hi]");
  double lo = as_bound(dom[0], path + "/dom/0", -kInf);
  double hi = as_bound(dom[1], path + "/dom/1", kInf);
  Vec breaks;
  if (const json* b = optional_field(j, "breaks")) breaks = as_vec(*b, path + "/breaks");
  const json& pieces = as_array(require(j, "pieces", path), path + "/pieces");
  std::vector<Plq::Piece> ps;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    Vec coeffs = as_vec(pieces[i], path + "/pieces/" + std::to_string(i), 3);
    ps.push_back({coeffs[0], coeffs[1], coeffs[2]});
  }
  try {
    return Plq::from_parts(lo, hi, std::move(breaks), std::move(ps));
  } catch (const std::exception& e) {
    throw SchemaError(path, e.what());
  }
}

nlohmann::json plq_to_json(const Plq& f) {
  json out;
  out["dom"] = json::array();
  out["dom"].push_back(f.lo() == -kInf ? json() : json(f.lo()));
  out["dom"].push_back(f.hi() == kInf ? json() : json(f.hi()));
  out["breaks"] = point_to_json(f.breaks());
  out["pieces"] = json::array();
  for (const Plq::Piece& p : f.pieces()) out["pieces"].push_back({p.a, p.p, p.q});
  return out;
}

ConvexFn convex_fn_from_json(const nlohmann::json& j, std::size_t d, const std::string& path) {
  std::vector<Plq> coords;
  if (j.is_object()) {
    if (d != 1) throw SchemaError(path, "expected an array of " + std::to_string(d) + " parts");
    coords.push_back(plq_from_json(j, path));
  } else {
    as_array(j, path);
    if (j.size() != d) throw SchemaError(path, "expected " + std::to_string(d) + " parts");
    for (std::size_t i = 0; i < d; ++i)
      coords.push_back(plq_from_json(j[i], path + "/" + std::to_string(i)));
  }
  return ConvexFn(std::move(coords));
}

nlohmann::json convex_fn_to_json(const ConvexFn& f) {
  json out = json::array();
  for (const Plq& p : f.coords) out.push_back(plq_to_json(p));
  return out;
}

DiscreteRadonMeasure measure_from_json(const nlohmann::json& j, const std::string& path) {
  std::size_t d = parse_dim(j, path);
  Grid g = parse_grid(require(j, "grid", path), optional_field(j, "T"), d, path + "/grid",
                      path + "/T");
  DiscreteRadonMeasure m;
  m.base = BaseMeasure::lebesgue(g);
  const json& dens = as_array(require(j, "density", path), path + "/density");
  if (dens.size() != g.cells())
    throw SchemaError(path + "/density", "expected one row per cell");
  for (std::size_t i = 0; i < dens.size(); ++i)
    m.density.push_back(as_point(dens[i], d, path + "/density/" + std::to_string(i)));
  m.atoms = parse_atoms(optional_field(j, "atoms"), d, path + "/atoms");
  try {
    m.canonicalize();
    m.validate();
  } catch (const std::exception& e) {
    throw SchemaError(path, e.what());
  }
  return m;
}

nlohmann::json measure_to_json(const DiscreteRadonMeasure& m) {
  json out;
  out["grid"] = point_to_json(m.base.grid.nodes);
  out["d"] = m.base.grid.d;
  out["density"] = json::array();
  // schema densities are per Lebesgue time
  for (std::size_t i = 0; i < m.density.size(); ++i) {
    double factor = m.base.cell_mass[i] / m.base.grid.cell_length(i);
    Vec row = m.density[i];
    for (double& v : row) v *= factor;
    out["density"].push_back(point_to_json(row));
  }
  out["atoms"] = json::array();
  for (const Atom& a : m.atoms)
    out["atoms"].push_back({{"t", a.t}, {"mass", point_to_json(a.mass)}});
  return out;
}

BVArc bv_arc_from_json(const nlohmann::json& j, const std::string& path) {
  BVArc x;
  x.diff = measure_from_json(j, path);
  x.x0 = as_point(require(j, "x0", path), x.diff.d(), path + "/x0");
  return x;
}

nlohmann::json bv_arc_to_json(const BVArc& x) {
  json out = measure_to_json(x.diff);
  out["x0"] = point_to_json(x.x0);
  return out;
}

ContinuousArc continuous_arc_from_json(const nlohmann::json& j, const std::string& path) {
  std::size_t d = parse_dim(j, path);
  ContinuousArc y;
  y.grid = parse_grid(require(j, "grid", path), optional_field(j, "T"), d, path + "/grid",
                      path + "/T");
  const json& nodes = as_array(require(j, "nodes", path), path + "/nodes");
  if (nodes.size() != y.grid.nodes.size())
    throw SchemaError(path + "/nodes", "expected one value per grid node");
  for (std::size_t i = 0; i < nodes.size(); ++i)
    y.nodes.push_back(as_point(nodes[i], d, path + "/nodes/" + std::to_string(i)));
  return y;
}

nlohmann::json continuous_arc_to_json(const ContinuousArc& y) {
  json out;
  out["grid"] = point_to_json(y.grid.nodes);
  out["d"] = y.grid.d;
  out["nodes"] = json::array();
  for (const Vec& v : y.nodes) out["nodes"].push_back(point_to_json(v));
  return out;
}

BolzaProblem problem_from_json(const nlohmann::json& j) {
  const std::string path = "/";
  std::size_t d = parse_dim(j, "");
  Grid g = parse_grid(require(j, "grid", ""), optional_field(j, "T"), d, "/grid", "/T");

  BolzaProblem P;
  if (const json* mu = optional_field(j, "mu_cells")) {
    P.mu.grid = g;
    P.mu.cell_mass = as_vec(*mu, "/mu_cells", g.cells());
    try {
      P.mu.validate();
    } catch (const std::exception& e) {
      throw SchemaError("/mu_cells", e.what());
    }
  } else {
    P.mu = BaseMeasure::lebesgue(g);
  }

  const json& K = as_array(require(j, "K", ""), "/K");
  if (K.size() != 1 && K.size() != g.cells())
    throw SchemaError("/K", "expected 1 (broadcast) or one entry per cell");
  std::vector<std::pair<ConvexFn, ConvexFn>> parts;
  parts.reserve(g.cells());
  for (std::size_t i = 0; i < g.cells(); ++i) {
    std::size_t src = K.size() == 1 ? 0 : i;
    std::string p = "/K/" + std::to_string(src);
    if (i == 0 || K.size() > 1) {
      ConvexFn phi = convex_fn_from_json(require(K[src], "phi", p), d, p + "/phi");
      ConvexFn psi = convex_fn_from_json(require(K[src], "psi", p), d, p + "/psi");
      parts.emplace_back(std::move(phi), std::move(psi));
    } else {
      parts.push_back(parts.front());
    }
  }
  try {
    P.K = TimeIntegrand::from_parts(g, std::move(parts));
  } catch (const std::exception& e) {
    throw SchemaError("/K", e.what());
  }

  const json* fixed = optional_field(j, "fixed_endpoints");
  const json* k0 = optional_field(j, "k0");
  const json* kT = optional_field(j, "kT");
  try {
    if (fixed) {
      if (k0 || kT)
        throw SchemaError("/fixed_endpoints", "specify either fixed_endpoints or k0/kT");
      Vec a = as_point(require(*fixed, "a", "/fixed_endpoints"), d, "/fixed_endpoints/a");
      Vec b = as_point(require(*fixed, "b", "/fixed_endpoints"), d, "/fixed_endpoints/b");
      P.k = EndpointFn::fixed(a, b);
    } else {
      if (!k0) throw SchemaError("/k0", "missing required field");
      if (!kT) throw SchemaError("/kT", "missing required field");
      P.k = EndpointFn::separable(convex_fn_from_json(*k0, d, "/k0"),
                                  convex_fn_from_json(*kT, d, "/kT"));
    }
    P.validate();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError("/", e.what());
  }
  return P;
}

LipschitzField field_from_json(const nlohmann::json& j) {
  std::size_t d = parse_dim(j, "");
  Grid g = parse_grid(require(j, "grid", ""), optional_field(j, "T"), d, "/grid", "/T");
  const json& A = as_array(require(j, "A", ""), "/A");
  const json& b = as_array(require(j, "b", ""), "/b");
  if (A.size() != g.cells() && A.size() != 1)
    throw SchemaError("/A", "expected 1 (broadcast) or one matrix per cell");
  if (b.size() != A.size()) throw SchemaError("/b", "expected as many entries as A");
  std::vector<std::vector<Vec>> mats;
  std::vector<Vec> offs;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    std::size_t src = A.size() == 1 ? 0 : i;
    mats.push_back(parse_matrix(A[src], d, "/A/" + std::to_string(src)));
    offs.push_back(as_point(b[src], d, "/b/" + std::to_string(src)));
  }
  try {
    LipschitzField F = LipschitzField::affine(g, std::move(mats), std::move(offs));
    if (const json* c = optional_field(j, "c")) {
      F.c = as_vec(*c, "/c", g.cells());
      F.validate();
    }
    return F;
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError("/", e.what());
  }
}

DriverMeasure driver_from_json(const nlohmann::json& j) {
  std::size_t d = parse_dim(j, "");
  Grid g = parse_grid(require(j, "grid", ""), optional_field(j, "T"), d, "/grid", "/T");
  DriverMeasure m;
  if (const json* cm = optional_field(j, "cell_mass")) {
    m.base.grid = g;
    m.base.cell_mass = as_vec(*cm, "/cell_mass", g.cells());
  } else {
    m.base = BaseMeasure::lebesgue(g);
  }
  if (const json* atoms = optional_field(j, "atoms")) {
    as_array(*atoms, "/atoms");
    for (std::size_t i = 0; i < atoms->size(); ++i) {
      std::string p = "/atoms/" + std::to_string(i);
      const json& a = (*atoms)[i];
      m.atoms.push_back({as_number(require(a, "t", p), p + "/t"),
                         as_number(require(a, "mass", p), p + "/mass")});
    }
  }
  try {
    m.validate();
  } catch (const std::exception& e) {
    throw SchemaError("/", e.what());
  }
  return m;
}

PiecewiseBoxMap box_map_from_json(const nlohmann::json& j) {
  std::size_t d = parse_dim(j, "");
  Grid g = parse_grid(require(j, "grid", ""), optional_field(j, "T"), d, "/grid", "/T");
  const json& cells = as_array(require(j, "cells", ""), "/cells");
  if (cells.size() != g.cells()) throw SchemaError("/cells", "expected one box per cell");
  std::vector<Box> cell_values;
  for (std::size_t i = 0; i < cells.size(); ++i)
    cell_values.push_back(parse_box(cells[i], d, "/cells/" + std::to_string(i)));
  PiecewiseBoxMap S;
  if (const json* nodes = optional_field(j, "nodes")) {
    as_array(*nodes, "/nodes");
    if (nodes->size() != g.nodes.size())
      throw SchemaError("/nodes", "expected one box per grid node");
    S.grid = g;
    S.cell_values = std::move(cell_values);
    for (std::size_t i = 0; i < nodes->size(); ++i)
      S.node_values.push_back(parse_box((*nodes)[i], d, "/nodes/" + std::to_string(i)));
  } else {
    S = PiecewiseBoxMap::from_cells(g, std::move(cell_values),
                                    PiecewiseBoxMap::NodeRule::left);
  }
  try {
    S.validate();
  } catch (const std::exception& e) {
    throw SchemaError("/", e.what());
  }
  return S;
}

}  // namespace bolza
