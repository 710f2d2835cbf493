#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"

#include "bolza/integrand.hpp"
#include "bolza/measure.hpp"
#include "bolza/measure_ode.hpp"

namespace bolza {

// Validation failure with the JSON-pointer-style path of the offending field.
struct SchemaError : std::runtime_error {
  std::string path;
  SchemaError(std::string where, const std::string& message)
      : std::runtime_error(where + ": " + message), path(std::move(where)) {}
};

// Parses a file; parse errors and missing files surface as SchemaError.
nlohmann::json load_json_file(const std::string& filename);

// One-variable piecewise linear-quadratic function:
//   {"dom": [lo, hi], "breaks": [...], "pieces": [[a, p, q], ...]}
// with null domain ends meaning unbounded. A separable function of d
// variables is an array of d of these; where d = 1 a bare object is accepted.
Plq plq_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json plq_to_json(const Plq& f);
ConvexFn convex_fn_from_json(const nlohmann::json& j, std::size_t d, const std::string& path);
nlohmann::json convex_fn_to_json(const ConvexFn& f);

// Measure: {"grid": [nodes...], "d": n, "density": [[...], ...],
//           "atoms": [{"t": ..., "mass": [...]}, ...]}.
// Densities are with respect to Lebesgue time. A BV arc adds "x0"; a
// continuous arc is {"grid", "d", "nodes": [[...], ...]}.
DiscreteRadonMeasure measure_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json measure_to_json(const DiscreteRadonMeasure& m);
BVArc bv_arc_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json bv_arc_to_json(const BVArc& x);
ContinuousArc continuous_arc_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json continuous_arc_to_json(const ContinuousArc& y);

// Problem: {"T": ..., "d": ..., "grid": N or [nodes...],
//           "mu_cells": [...] (optional, Lebesgue when absent),
//           "K": [{"phi": ..., "psi": ...}, ...] (one entry broadcasts),
//           "k0": ..., "kT": ...,
//           "fixed_endpoints": {"a": [...], "b": [...]} (optional, replaces
//           k0/kT by point indicators)}.
BolzaProblem problem_from_json(const nlohmann::json& j);

// ODE field (affine per cell): {"grid": N or [nodes...], "T": (with N),
//   "d": ..., "A": [[[...]]], "b": [[...]], "c": [...] (optional)}.
LipschitzField field_from_json(const nlohmann::json& j);
// ODE driver: {"grid": N or [nodes...], "T": (with N), "cell_mass": [...]
//   (optional, Lebesgue), "atoms": [{"t": ..., "mass": ...}, ...]}.
DriverMeasure driver_from_json(const nlohmann::json& j);

// Box map: {"grid": [nodes...], "d": ...,
//   "cells": [[[lo, hi], ...], ...], "nodes": [[[lo, hi], ...], ...]}
// with null meaning unbounded; "nodes" optional (defaults to the cell value
// arriving from the left).
PiecewiseBoxMap box_map_from_json(const nlohmann::json& j);

}  // namespace bolza
