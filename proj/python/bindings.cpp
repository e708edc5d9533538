#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tsdr/problem.hpp"
#include "tsdr/tspline_complex.hpp"

namespace py = pybind11;
using namespace tsdr;

namespace {

py::dict reportDict(const ExactnessReport& r) {
  py::dict d;
  d["dims"] = r.dims;
  d["ranks"] = r.ranks;
  py::dict checks;
  for (const auto& [name, ok] : r.checks) checks[py::str(name)] = ok;
  d["checks"] = checks;
  d["skipped"] = r.skipped;
  d["exact"] = r.pass();
  return d;
}

RealMatrix toReal(const IntMatrix& a) { return a.cast<double>(); }

py::dict asDict(const TMesh2D& m, int p1, int p2) {
  const Census c = m.census();
  py::dict d;
  d["F0"] = c.F0;
  d["E0"] = c.E0;
  d["V0"] = c.V0;
  d["VH"] = c.VH;
  d["VV"] = c.VV;
  d["euler"] = c.euler();
  const ASVerdict as = isAnalysisSuitable(m, p1, p2);
  d["analysis_suitable"] = as.ok;
  d["reason"] = as.reason;
  d["strongly_analysis_suitable"] = checkStrongAS(m, p1, p2).ok;
  d["tjunctions"] = static_cast<int>(m.tjunctions().size());
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Spline de Rham complexes on tensor and T-meshes";

  py::register_exception<ValidationError>(mod, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(mod, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<TMeshError>(mod, "TMeshError", PyExc_ValueError);

  mod.def(
      "check_complex",
      [](const std::vector<int>& degrees, const std::vector<int>& n, bool boundary) {
        DiscreteComplex cx = buildUniformComplex(degrees, n);
        if (boundary) cx = restrictBoundary(cx, allFaces(static_cast<int>(degrees.size())));
        return reportDict(verifyExactness(cx));
      },
      py::arg("degrees"), py::arg("n"), py::arg("boundary") = false);

  mod.def(
      "operators",
      [](const std::vector<int>& degrees, const std::vector<int>& n) {
        const DiscreteComplex cx = buildUniformComplex(degrees, n);
        std::vector<RealMatrix> out;
        for (const auto& op : cx.ops) out.push_back(tsdr::toReal(op));
        return out;
      },
      py::arg("degrees"), py::arg("n"), "Exterior derivative matrices of a uniform tensor complex.");

  mod.def(
      "tmesh_check",
      [](const std::string& path, int p1, int p2) { return asDict(buildTMesh(loadTMeshSpec(path), p1, p2), p1, p2); },
      py::arg("path"), py::arg("p1"), py::arg("p2"));

  mod.def(
      "tspline_complex",
      [](const std::string& path, int p, bool rotated) {
        const TsplineComplex cx = buildTsplineComplex(buildTMesh(loadTMeshSpec(path), p, p), p, p, rotated);
        py::dict d = reportDict(verifyTExactness(cx));
        d["lookup"] = cx.lookup;
        std::vector<RealMatrix> ops;
        for (const auto& op : cx.exactOps) ops.push_back(op.toReal());
        d["operators"] = ops;
        return d;
      },
      py::arg("path"), py::arg("p"), py::arg("rotated") = false);

  mod.def("solve_eig", [](const std::string& path) {
    const EigRun r = runEig(loadProblem(path));
    py::dict d;
    d["eigenvalues"] = r.eig.eigenvalues;
    d["zero_count"] = r.eig.zeroCount;
    d["dofs"] = r.dofs;
    d["max_residual"] = r.eig.maxResidual;
    return d;
  });

  mod.def("solve_source", [](const std::string& path) {
    const SourceRun r = runSource(loadProblem(path));
    py::dict d;
    d["dofs"] = r.dofs;
    d["error"] = r.error;
    d["relative_error"] = r.relativeError;
    d["l2_error"] = r.l2Error;
    d["curl_error"] = r.curlError;
    return d;
  });

  mod.def("solve_waveguide", [](const std::string& path) {
    const WaveguideRun r = runWaveguide(loadProblem(path));
    py::dict d;
    d["dofs"] = r.dofs;
    d["k10sq"] = r.k10sq;
    d["beta"] = r.beta;
    d["R"] = r.R;
    d["T"] = r.T;
    return d;
  });

  mod.def("convergence", [](const std::string& path) {
    std::vector<std::pair<int, double>> rows;
    for (const auto& r : runConvergence(loadProblem(path))) rows.emplace_back(r.dofs, r.value);
    return rows;
  });
}
