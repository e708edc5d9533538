#pragma once

#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsdr/multipatch.hpp"
#include "tsdr/solvers.hpp"
#include "tsdr/tmesh.hpp"

namespace tsdr {

// Invalid input file or option.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometrySpec {
  std::string type = "box";  // "box" | "spline"
  std::vector<double> lo, hi;
  std::vector<std::string> knots;  // KnotVector text form per direction
  std::vector<std::vector<double>> controlPoints;
  std::vector<double> weights;
};

struct MeshSpec {
  std::string type = "uniform";  // "uniform" | "cells" | "corner"
  std::array<int, 2> n{1, 1};    // uniform
  std::vector<Cell> cells;       // cells
  int cornerN = 0;               // corner: start size, refined block sizes, extension bays
  std::vector<int> blocks;
  int bays = 0;
};

struct ZSpec {
  double z0 = 0.0;
  double z1 = 1.0;
  int elements = 1;
};

// T-mesh file: either index lines (repeated for multiplicity) plus index
// rectangles, or geometric cells with boundary repetition from the degrees.
struct TMeshSpec {
  std::vector<Rational> xs, ys;
  std::vector<std::array<int, 4>> faces;
  std::vector<Cell> cells;
  bool indexForm() const { return cells.empty(); }
};

TMeshSpec parseTMeshSpec(const nlohmann::json& j);
nlohmann::json serializeTMeshSpec(const TMeshSpec& t);
TMeshSpec loadTMeshSpec(const std::string& path);
TMesh2D buildTMesh(const TMeshSpec& t, int p1, int p2);
// Index-form description of a mesh (lines and positive-area faces as knot boxes).
nlohmann::json describeTMesh(const TMesh2D& m);

struct PatchSpec {
  GeometrySpec geometry;  // planar map for dim 3 (extruded along z)
  std::optional<MeshSpec> mesh;  // falls back to the problem-level mesh
  std::optional<ZSpec> z;
};

struct ProblemSpec {
  // check-complex | tmesh-check | solve-eig | solve-source | solve-waveguide | convergence
  std::string kind;
  std::string name;
  int dim = 2;
  int degree = 3;
  std::string family = "tspline";  // "tspline" | "bspline" (tensor closure of the mesh)
  int form = 1;                    // solve-eig: 0 (Laplacian) or 1 (Maxwell)
  std::optional<MeshSpec> mesh;  // default mesh of every patch
  std::optional<ZSpec> z;        // default z extent of every patch (dim 3)
  std::vector<PatchSpec> patches;
  std::vector<PatchInterface> interfaces;
  std::string dirichlet = "all";  // "all" | "none" | "list"
  std::vector<std::array<int, 2>> dirichletFaces;
  int eigencount = 10;
  double zeroTolerance = 1e-8;
  std::optional<double> shift;
  std::string exact;  // solve-source: named exact field
  double k = 0.0;     // solve-waveguide
  std::vector<std::array<int, 2>> ports;
  // convergence
  std::string metric;  // "eigenvalue-error" | "hcurl-error"
  double exactValue = 0.0;
  std::vector<ProblemSpec> levels;
  // check-complex / tmesh-check
  std::vector<int> degrees;
  std::vector<int> n;
  bool boundary = false;
  std::optional<TMeshSpec> tmesh;
};

ProblemSpec parseProblem(const nlohmann::json& j);
nlohmann::json serializeProblem(const ProblemSpec& p);
ProblemSpec loadProblem(const std::string& path);

GeometryMap buildGeometry(const GeometrySpec& g);
CellMesh buildCellMesh(const MeshSpec& m, int degree);
PatchSet buildPatchSet(const ProblemSpec& p);
std::vector<std::array<int, 2>> dirichletFacesOf(const ProblemSpec& p, const PatchSet& ps);

struct EigRun {
  EigenResult eig;
  int dofs = 0;
  std::vector<int> patchDims;
};
EigRun runEig(const ProblemSpec& p);

struct SourceRun {
  int dofs = 0;
  double error = 0.0;         // ||u - u_h||_{H(curl)}
  double relativeError = 0.0;
  double l2Error = 0.0;
  double curlError = 0.0;
};
SourceRun runSource(const ProblemSpec& p);

struct WaveguideRun {
  int dofs = 0;
  double k10sq = 0.0;
  double nextCutoffSq = 0.0;
  double beta = 0.0;
  double z1 = 0.0, z2 = 0.0;
  std::complex<double> R, T;
};
WaveguideRun runWaveguide(const ProblemSpec& p);

struct ConvergenceRow {
  int dofs = 0;
  double value = 0.0;
};
std::vector<ConvergenceRow> runConvergence(const ProblemSpec& p);

// Named exact fields for source problems: value and curl (physical).
FieldFn exactField(const std::string& name, int dim);
FieldFn exactCurl(const std::string& name, int dim);

}  // namespace tsdr
