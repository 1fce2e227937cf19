#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gapfield/analysis.hpp"
#include "gapfield/fields.hpp"
#include "gapfield/geometry.hpp"
#include "gapfield/solver.hpp"

namespace gapfield {

// One JSON document drives every subcommand. Schema (unknown keys rejected):
//
//   {
//     "problem": "two_disks" | "dirichlet" | "neumann",
//     "geometry": {"r1":1.0, "r2":1.0, "eps":1e-2,
//                  "centers": {"c1":[x,y], "c2":[x,y]}}        (two_disks)
//                {"rho":2.0, "r":1.0, "eps":1e-2}              (bounded)
//     "conductivity": {"k1": 10.0, "k2": "inf"}                (two_disks)
//                     {"k": 0}                                 (bounded)
//     "driver": {"affine":[ax,ay], "constant":c,
//                "poly":[{"center":[x,y],"n":2,"coef":[re,im]}, ...]}
//                                                              (two_disks)
//     "data":   {"a0":0.0, "cos":[...], "sin":[...]}           (bounded)
//     "numerics": {"nodes":0, "tol":1e-10, "eps_floor":1e-8},
//     "sweep": {"eps":[...], "k":[[k1,k2],...] or [k,...]},
//     "output": {"csv":path, "json":path, "svg":path}
//   }
//
// Conductivity literals: a positive number, the string "inf" (perfectly
// conducting limit), or 0 (insulating limit). With "centers" the affine and
// polynomial driver pieces are read in the user frame and converted; bounded
// geometries are canonical only, with the boundary data parametrized by the
// angle measured from the axis through the inclusion center.
struct RunConfig {
  ProblemKind problem = ProblemKind::TwoDisks;

  double r1 = 1.0, r2 = 1.0;     // two disks
  Conductivity k1, k2;
  bool has_centers = false;
  Vec2 c1{0.0, 0.0}, c2{0.0, 0.0};

  double rho = 2.0, r = 1.0;     // bounded domain
  Conductivity k;

  double eps = 1e-2;

  HarmonicField driver;          // canonical frame
  FourierCoeffs data;

  SolveOptions opts;             // opts.nodes <= 0 selects per-gap resolution
  double eps_floor = 1e-8;       // solves and sweeps refuse smaller gaps

  bool has_sweep = false;
  std::vector<double> sweep_eps;
  std::vector<std::pair<Conductivity, Conductivity>> sweep_ks;  // two disks
  std::vector<Conductivity> sweep_k;                            // bounded

  std::string out_csv, out_json, out_svg;

  std::string source;  // compact re-serialization of the accepted document
};

// Both throw ConfigError with a schema diagnostic on any malformed input.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

TwoDiskGeometry two_disk_geometry(const RunConfig& c);
DiskInDiskGeometry disk_in_disk_geometry(const RunConfig& c);

// Sweep specs require the config's sweep block.
TwoDiskSweepSpec two_disk_sweep_spec(const RunConfig& c);
DiskInDiskSweepSpec disk_in_disk_sweep_spec(const RunConfig& c);

}  // namespace gapfield
