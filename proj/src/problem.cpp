#include "tsdr/problem.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "tsdr/assembly.hpp"

namespace tsdr {

using nlohmann::json;

namespace {

void allowOnly(const json& j, const std::set<std::string>& keys, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) throw ValidationError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(where + ": bad value for '" + key + "'");
  }
}

template <class T>
T getOr(const json& j, const std::string& key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

Rational rationalOf(const json& v, const std::string& where) {
  try {
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    if (v.is_string()) return Rational::parse(v.get<std::string>());
  } catch (const std::exception&) {
  }
  throw ValidationError(where + ": expected an integer or a rational string");
}

std::array<int, 2> faceRef(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
    throw ValidationError(where + ": expected [patch, face]");
  return {v[0].get<int>(), v[1].get<int>()};
}

GeometrySpec parseGeometry(const json& j, const std::string& where) {
  allowOnly(j, {"type", "lo", "hi", "knots", "controlPoints", "weights"}, where);
  GeometrySpec g;
  g.type = get<std::string>(j, "type", where);
  if (g.type == "box") {
    g.lo = get<std::vector<double>>(j, "lo", where);
    g.hi = get<std::vector<double>>(j, "hi", where);
    if (g.lo.size() != g.hi.size() || g.lo.empty()) throw ValidationError(where + ": lo/hi size mismatch");
  } else if (g.type == "spline") {
    g.knots = get<std::vector<std::string>>(j, "knots", where);
    g.controlPoints = get<std::vector<std::vector<double>>>(j, "controlPoints", where);
    g.weights = getOr<std::vector<double>>(j, "weights", {}, where);
  } else {
    throw ValidationError(where + ": unknown geometry type '" + g.type + "'");
  }
  return g;
}

json serializeGeometry(const GeometrySpec& g) {
  json j;
  j["type"] = g.type;
  if (g.type == "box") {
    j["lo"] = g.lo;
    j["hi"] = g.hi;
  } else {
    j["knots"] = g.knots;
    j["controlPoints"] = g.controlPoints;
    if (!g.weights.empty()) j["weights"] = g.weights;
  }
  return j;
}

MeshSpec parseMesh(const json& j, const std::string& where) {
  allowOnly(j, {"type", "n", "cells", "blocks", "bays"}, where);
  MeshSpec m;
  m.type = get<std::string>(j, "type", where);
  if (m.type == "uniform") {
    auto n = get<std::vector<int>>(j, "n", where);
    if (n.size() != 2 || n[0] < 1 || n[1] < 1) throw ValidationError(where + ": n must be two positive integers");
    m.n = {n[0], n[1]};
  } else if (m.type == "cells") {
    if (!j.contains("cells") || !j["cells"].is_array()) throw ValidationError(where + ": missing cells");
    for (const auto& c : j["cells"]) {
      if (!c.is_array() || c.size() != 4) throw ValidationError(where + ": a cell is [x0, x1, y0, y1]");
      m.cells.push_back({rationalOf(c[0], where), rationalOf(c[1], where), rationalOf(c[2], where),
                         rationalOf(c[3], where)});
    }
  } else if (m.type == "corner") {
    m.cornerN = get<int>(j, "n", where);
    m.blocks = getOr<std::vector<int>>(j, "blocks", {}, where);
    m.bays = getOr<int>(j, "bays", 0, where);
    if (m.cornerN < 1) throw ValidationError(where + ": n must be positive");
  } else {
    throw ValidationError(where + ": unknown mesh type '" + m.type + "'");
  }
  return m;
}

json serializeMesh(const MeshSpec& m) {
  json j;
  j["type"] = m.type;
  if (m.type == "uniform") {
    j["n"] = {m.n[0], m.n[1]};
  } else if (m.type == "cells") {
    j["cells"] = json::array();
    for (const auto& c : m.cells) j["cells"].push_back({c.x0.str(), c.x1.str(), c.y0.str(), c.y1.str()});
  } else {
    j["n"] = m.cornerN;
    j["blocks"] = m.blocks;
    j["bays"] = m.bays;
  }
  return j;
}

ZSpec parseZ(const json& j, const std::string& where) {
  allowOnly(j, {"z0", "z1", "elements"}, where);
  ZSpec z;
  z.z0 = getOr<double>(j, "z0", 0.0, where);
  z.z1 = getOr<double>(j, "z1", 1.0, where);
  z.elements = getOr<int>(j, "elements", 1, where);
  if (!(z.z1 > z.z0) || z.elements < 1) throw ValidationError(where + ": invalid z extent");
  return z;
}

json serializeZ(const ZSpec& z) { return {{"z0", z.z0}, {"z1", z.z1}, {"elements", z.elements}}; }

const std::set<std::string> kProblemKeys = {
    "kind", "name", "dim", "degree", "family", "form", "mesh", "z", "patches", "interfaces", "dirichlet",
    "eigencount", "zeroTolerance", "shift", "exact", "k", "ports", "metric", "exactValue", "base", "levels",
    "degrees", "n", "boundary", "tmesh"};

json rationalArray(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& r : v) a.push_back(r.str());
  return a;
}

// Cells must not overlap; together with the area check this makes a tiling.
void checkNoOverlap(const std::vector<Cell>& cells) {
  for (std::size_t a = 0; a < cells.size(); ++a)
    for (std::size_t b = a + 1; b < cells.size(); ++b) {
      const Cell& c = cells[a];
      const Cell& d = cells[b];
      if (c.x0 < d.x1 && d.x0 < c.x1 && c.y0 < d.y1 && d.y0 < c.y1)
        throw ValidationError("tmesh: cells " + std::to_string(a) + " and " + std::to_string(b) + " overlap");
    }
}

RealMatrix restrictTo(const RealMatrix& A, const std::vector<int>& idx) {
  std::vector<int> pos(A.rows(), -1);
  for (std::size_t i = 0; i < idx.size(); ++i) pos[idx[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> t;
  for (int c = 0; c < A.outerSize(); ++c)
    for (RealMatrix::InnerIterator it(A, c); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0) t.emplace_back(pos[it.row()], pos[it.col()], it.value());
  RealMatrix out(static_cast<int>(idx.size()), static_cast<int>(idx.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

KnotVector knotsFromBreaks(int p, const std::vector<Rational>& breaks) {
  std::vector<int> m(breaks.size(), 1);
  m.front() = m.back() = p + 1;
  return KnotVector(p, breaks, m);
}

Discretization buildDiscretization(const ProblemSpec& p, const PatchSpec& ps) {
  const MeshSpec* ms = ps.mesh ? &*ps.mesh : (p.mesh ? &*p.mesh : nullptr);
  if (!ms) throw ValidationError("patch without mesh and no problem-level mesh");
  const CellMesh cm = buildCellMesh(*ms, p.degree);
  const int deg = p.degree;
  std::optional<ZSpec> z = ps.z ? ps.z : p.z;
  if (p.dim == 3 && !z) throw ValidationError("dim 3 requires a z extent");
  if (p.family == "bspline") {
    const CellMesh cl = cm.tensorClosure();
    std::vector<KnotVector> kvs = {knotsFromBreaks(deg, cl.breakpointsX()), knotsFromBreaks(deg, cl.breakpointsY())};
    if (p.dim == 3) kvs.push_back(KnotVector::uniform(deg, z->elements));
    return tensorDiscretization(kvs);
  }
  if (p.family != "tspline") throw ValidationError("family must be 'tspline' or 'bspline'");
  const TMesh2D m = TMesh2D::fromCells(cm, deg, deg);
  const ASVerdict as = checkStrongAS(m, deg, deg);
  if (!as.ok) throw ValidationError("T-mesh is not analysis-suitable: " + as.reason);
  if (p.dim == 2) return tsplineDiscretization2D(m, deg);
  return tsplineDiscretization3D(m, deg, KnotVector::uniform(deg, z->elements));
}

double faceCoordinate(const Patch& patch, int face, int coord) {
  Eigen::VectorXd zeta = Eigen::VectorXd::Constant(patch.disc.dim, 0.5);
  zeta[face / 2] = face % 2;
  return patch.geometry.eval(zeta)[coord];
}

}  // namespace

TMeshSpec parseTMeshSpec(const json& j) {
  allowOnly(j, {"xs", "ys", "faces", "cells"}, "tmesh");
  TMeshSpec t;
  if (j.contains("cells")) {
    if (j.contains("xs") || j.contains("ys") || j.contains("faces"))
      throw ValidationError("tmesh: give either cells or xs/ys/faces");
    if (!j["cells"].is_array() || j["cells"].empty()) throw ValidationError("tmesh: cells must be a non-empty array");
    for (const auto& c : j["cells"]) {
      if (!c.is_array() || c.size() != 4) throw ValidationError("tmesh: a cell is [x0, x1, y0, y1]");
      t.cells.push_back({rationalOf(c[0], "tmesh"), rationalOf(c[1], "tmesh"), rationalOf(c[2], "tmesh"),
                         rationalOf(c[3], "tmesh")});
    }
    return t;
  }
  for (const char* key : {"xs", "ys", "faces"})
    if (!j.contains(key) || !j[key].is_array()) throw ValidationError(std::string("tmesh: missing ") + key);
  for (const auto& v : j["xs"]) t.xs.push_back(rationalOf(v, "tmesh.xs"));
  for (const auto& v : j["ys"]) t.ys.push_back(rationalOf(v, "tmesh.ys"));
  for (const auto& f : j["faces"]) {
    if (!f.is_array() || f.size() != 4) throw ValidationError("tmesh: a face is [i0, i1, j0, j1]");
    std::array<int, 4> r{};
    for (int q = 0; q < 4; ++q) {
      if (!f[q].is_number_integer()) throw ValidationError("tmesh: face indices must be integers");
      r[q] = f[q].get<int>();
    }
    t.faces.push_back(r);
  }
  return t;
}

json serializeTMeshSpec(const TMeshSpec& t) {
  json j;
  if (!t.indexForm()) {
    j["cells"] = json::array();
    for (const auto& c : t.cells) j["cells"].push_back({c.x0.str(), c.x1.str(), c.y0.str(), c.y1.str()});
    return j;
  }
  j["xs"] = rationalArray(t.xs);
  j["ys"] = rationalArray(t.ys);
  j["faces"] = t.faces;
  return j;
}

TMeshSpec loadTMeshSpec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return parseTMeshSpec(j);
}

TMesh2D buildTMesh(const TMeshSpec& t, int p1, int p2) {
  try {
    if (!t.indexForm()) {
      checkNoOverlap(t.cells);
      CellMesh cm;
      cm.cells = t.cells;
      return TMesh2D::fromCells(cm, p1, p2);
    }
    TMesh2D m = validateTMesh(t.xs, t.ys, t.faces);
    const int b1 = p1 / 2 + 1, b2 = p2 / 2 + 1;
    if (m.boundaryLinesX() != b1 || m.boundaryLinesY() != b2)
      throw ValidationError("tmesh: boundary lines must be repeated floor(p/2)+1 times (" + std::to_string(b1) + ", " +
                            std::to_string(b2) + ")");
    return m;
  } catch (const TMeshError& e) {
    throw ValidationError(std::string("tmesh: ") + e.what());
  }
}

json describeTMesh(const TMesh2D& m) {
  json j;
  j["xs"] = rationalArray(m.xs());
  j["ys"] = rationalArray(m.ys());
  j["faces"] = m.faces();
  return j;
}

ProblemSpec parseProblem(const json& jin) {
  json j = jin;
  if (j.contains("base")) {
    json merged = j["base"];
    if (!merged.is_object()) throw ValidationError("problem: base must be an object");
    json rest = j;
    rest.erase("base");
    merged.merge_patch(rest);
    j = merged;
  }
  allowOnly(j, kProblemKeys, "problem");
  ProblemSpec p;
  p.kind = get<std::string>(j, "kind", "problem");
  static const std::set<std::string> kinds = {"check-complex", "tmesh-check",    "solve-eig",
                                              "solve-source",  "solve-waveguide", "convergence"};
  if (!kinds.count(p.kind)) throw ValidationError("problem: unknown kind '" + p.kind + "'");
  p.name = getOr<std::string>(j, "name", "", "problem");
  if (p.kind == "check-complex" || p.kind == "tmesh-check") {
    p.degrees = get<std::vector<int>>(j, "degrees", "problem");
    for (int d : p.degrees)
      if (d < 1 || d > 8) throw ValidationError("problem: degree out of range");
    p.boundary = getOr<bool>(j, "boundary", false, "problem");
    if (p.kind == "check-complex") {
      p.n = get<std::vector<int>>(j, "n", "problem");
      if (p.degrees.empty() || p.degrees.size() > 3 || p.n.size() != p.degrees.size())
        throw ValidationError("problem: degrees and n need 1 to 3 matching entries");
      for (std::size_t l = 0; l < p.n.size(); ++l)
        if (p.n[l] <= p.degrees[l]) throw ValidationError("problem: n must exceed the degree");
    } else {
      if (p.degrees.size() != 2) throw ValidationError("problem: tmesh-check needs two degrees");
      if (!j.contains("tmesh")) throw ValidationError("problem: tmesh-check needs a tmesh");
      p.tmesh = parseTMeshSpec(j["tmesh"]);
    }
    return p;
  }
  if (p.kind == "convergence") {
    p.metric = get<std::string>(j, "metric", "problem");
    if (p.metric != "eigenvalue-error" && p.metric != "hcurl-error" && p.metric != "eigenvalue")
      throw ValidationError("problem: unknown metric '" + p.metric + "'");
    p.exactValue = getOr<double>(j, "exactValue", 0.0, "problem");
    if (!j.contains("levels") || !j["levels"].is_array())
      throw ValidationError("problem: convergence needs a levels array");
    for (const auto& lv : j["levels"]) {
      if (!jin.contains("base")) {
        p.levels.push_back(parseProblem(lv));
        continue;
      }
      json merged = jin["base"];
      merged.merge_patch(lv);
      p.levels.push_back(parseProblem(merged));
    }
    for (const auto& lv : p.levels)
      if (lv.kind == "convergence") throw ValidationError("problem: nested convergence");
    return p;
  }
  p.dim = get<int>(j, "dim", "problem");
  if (p.dim != 2 && p.dim != 3) throw ValidationError("problem: dim must be 2 or 3");
  p.degree = get<int>(j, "degree", "problem");
  if (p.degree < 1 || p.degree > 8) throw ValidationError("problem: degree out of range");
  p.family = getOr<std::string>(j, "family", "tspline", "problem");
  if (p.family != "tspline" && p.family != "bspline") throw ValidationError("problem: unknown family");
  p.form = getOr<int>(j, "form", 1, "problem");
  if (p.form != 0 && p.form != 1) throw ValidationError("problem: form must be 0 or 1");
  if (j.contains("mesh")) p.mesh = parseMesh(j["mesh"], "mesh");
  if (j.contains("z")) p.z = parseZ(j["z"], "z");
  if (!j.contains("patches") || !j["patches"].is_array() || j["patches"].empty())
    throw ValidationError("problem: needs a non-empty patches array");
  for (std::size_t i = 0; i < j["patches"].size(); ++i) {
    const auto& pj = j["patches"][i];
    const std::string where = "patches[" + std::to_string(i) + "]";
    allowOnly(pj, {"geometry", "mesh", "z"}, where);
    PatchSpec ps;
    if (!pj.contains("geometry")) throw ValidationError(where + ": missing geometry");
    ps.geometry = parseGeometry(pj["geometry"], where + ".geometry");
    if (pj.contains("mesh")) ps.mesh = parseMesh(pj["mesh"], where + ".mesh");
    if (pj.contains("z")) ps.z = parseZ(pj["z"], where + ".z");
    p.patches.push_back(ps);
  }
  if (j.contains("interfaces")) {
    for (std::size_t i = 0; i < j["interfaces"].size(); ++i) {
      const auto& ij = j["interfaces"][i];
      const std::string where = "interfaces[" + std::to_string(i) + "]";
      allowOnly(ij, {"a", "b", "perm", "flip"}, where);
      PatchInterface itf;
      itf.a = faceRef(get<json>(ij, "a", where), where);
      itf.b = faceRef(get<json>(ij, "b", where), where);
      itf.perm = getOr<std::vector<int>>(ij, "perm", {}, where);
      itf.flip = getOr<std::vector<int>>(ij, "flip", {}, where);
      p.interfaces.push_back(itf);
    }
  }
  if (j.contains("dirichlet")) {
    const auto& d = j["dirichlet"];
    if (d.is_string()) {
      p.dirichlet = d.get<std::string>();
      if (p.dirichlet != "all" && p.dirichlet != "none") throw ValidationError("problem: dirichlet must be all, none or a list");
    } else if (d.is_array()) {
      p.dirichlet = "list";
      for (const auto& f : d) p.dirichletFaces.push_back(faceRef(f, "dirichlet"));
    } else {
      throw ValidationError("problem: bad dirichlet");
    }
  }
  p.eigencount = getOr<int>(j, "eigencount", 10, "problem");
  p.zeroTolerance = getOr<double>(j, "zeroTolerance", 1e-8, "problem");
  if (j.contains("shift") && !j["shift"].is_null()) p.shift = get<double>(j, "shift", "problem");
  p.exact = getOr<std::string>(j, "exact", "", "problem");
  p.k = getOr<double>(j, "k", 0.0, "problem");
  if (j.contains("ports"))
    for (const auto& f : j["ports"]) p.ports.push_back(faceRef(f, "ports"));
  if (p.kind == "solve-source" && p.exact.empty()) throw ValidationError("problem: solve-source needs an exact field");
  if (p.kind == "solve-waveguide") {
    if (p.dim != 3 || p.ports.size() != 2) throw ValidationError("problem: solve-waveguide needs dim 3 and two ports");
    if (!(p.k > 0)) throw ValidationError("problem: solve-waveguide needs k > 0");
  }
  return p;
}

json serializeProblem(const ProblemSpec& p) {
  json j;
  j["kind"] = p.kind;
  if (!p.name.empty()) j["name"] = p.name;
  if (p.kind == "check-complex" || p.kind == "tmesh-check") {
    j["degrees"] = p.degrees;
    if (p.kind == "check-complex") j["n"] = p.n;
    if (p.tmesh) j["tmesh"] = serializeTMeshSpec(*p.tmesh);
    j["boundary"] = p.boundary;
    return j;
  }
  if (p.kind == "convergence") {
    j["metric"] = p.metric;
    j["exactValue"] = p.exactValue;
    j["levels"] = json::array();
    for (const auto& lv : p.levels) j["levels"].push_back(serializeProblem(lv));
    return j;
  }
  j["dim"] = p.dim;
  j["degree"] = p.degree;
  j["family"] = p.family;
  j["form"] = p.form;
  if (p.mesh) j["mesh"] = serializeMesh(*p.mesh);
  if (p.z) j["z"] = serializeZ(*p.z);
  j["patches"] = json::array();
  for (const auto& ps : p.patches) {
    json pj;
    pj["geometry"] = serializeGeometry(ps.geometry);
    if (ps.mesh) pj["mesh"] = serializeMesh(*ps.mesh);
    if (ps.z) pj["z"] = serializeZ(*ps.z);
    j["patches"].push_back(pj);
  }
  j["interfaces"] = json::array();
  for (const auto& itf : p.interfaces) {
    json ij = {{"a", itf.a}, {"b", itf.b}};
    if (!itf.perm.empty()) ij["perm"] = itf.perm;
    if (!itf.flip.empty()) ij["flip"] = itf.flip;
    j["interfaces"].push_back(ij);
  }
  if (p.dirichlet == "list")
    j["dirichlet"] = p.dirichletFaces;
  else
    j["dirichlet"] = p.dirichlet;
  j["eigencount"] = p.eigencount;
  j["zeroTolerance"] = p.zeroTolerance;
  if (p.shift) j["shift"] = *p.shift;
  if (!p.exact.empty()) j["exact"] = p.exact;
  if (p.k != 0.0) j["k"] = p.k;
  if (!p.ports.empty()) j["ports"] = p.ports;
  return j;
}

ProblemSpec loadProblem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return parseProblem(j);
}

GeometryMap buildGeometry(const GeometrySpec& g) {
  try {
    if (g.type == "box") return GeometryMap::box(g.lo, g.hi);
    std::vector<KnotVector> kvs;
    for (const auto& t : g.knots) kvs.push_back(KnotVector::parse(t));
    int n = 1;
    for (const auto& kv : kvs) n *= kv.dim();
    if (static_cast<int>(g.controlPoints.size()) != n) throw ValidationError("geometry: control point count mismatch");
    const int m = static_cast<int>(g.controlPoints.front().size());
    Eigen::MatrixXd cp(n, m);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(g.controlPoints[i].size()) != m) throw ValidationError("geometry: ragged control points");
      for (int c = 0; c < m; ++c) cp(i, c) = g.controlPoints[i][c];
    }
    return GeometryMap(kvs, cp, g.weights);
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("geometry: ") + e.what());
  }
}

CellMesh buildCellMesh(const MeshSpec& m, int degree) {
  if (m.type == "uniform") {
    std::vector<Rational> bx, by;
    for (int i = 0; i <= m.n[0]; ++i) bx.emplace_back(i, m.n[0]);
    for (int i = 0; i <= m.n[1]; ++i) by.emplace_back(i, m.n[1]);
    return CellMesh::tensor(bx, by);
  }
  if (m.type == "cells") {
    CellMesh cm;
    cm.cells = m.cells;
    return cm;
  }
  return cornerRefinedMesh(m.cornerN, m.blocks, degree, m.bays);
}

PatchSet buildPatchSet(const ProblemSpec& p) {
  PatchSet ps;
  ps.dim = p.dim;
  for (const auto& spec : p.patches) {
    Patch patch;
    GeometryMap g = buildGeometry(spec.geometry);
    if (p.dim == 3) {
      const ZSpec z = spec.z ? *spec.z : *p.z;
      if (g.paramDim() != 2) throw ValidationError("dim 3 patches take a planar geometry");
      g = GeometryMap::extrude(g, z.z0, z.z1);
    }
    if (g.paramDim() != p.dim || g.spaceDim() != p.dim) throw ValidationError("geometry dimension mismatch");
    patch.geometry = g;
    patch.disc = buildDiscretization(p, spec);
    ps.patches.push_back(std::move(patch));
  }
  ps.interfaces = p.interfaces;
  return ps;
}

std::vector<std::array<int, 2>> dirichletFacesOf(const ProblemSpec& p, const PatchSet& ps) {
  if (p.dirichlet == "none") return {};
  if (p.dirichlet == "list") return p.dirichletFaces;
  std::vector<std::array<int, 2>> out;
  for (const auto& f : ps.boundaryFaces())
    if (std::find(p.ports.begin(), p.ports.end(), f) == p.ports.end()) out.push_back(f);
  return out;
}

EigRun runEig(const ProblemSpec& p) {
  const PatchSet ps = buildPatchSet(p);
  const InterfaceGlue glue = buildGlue(ps);
  const int k = p.form;
  auto K = globalMatrix(ps, glue, k, [&](int q) {
    return assembleMatrix(ps.patches[q].disc, k, ps.patches[q].geometry, Operator::Stiffness);
  });
  auto M = globalMatrix(ps, glue, k, [&](int q) {
    return assembleMatrix(ps.patches[q].disc, k, ps.patches[q].geometry, Operator::Mass);
  });
  const auto free = globalFreeIndices(ps, glue, k, dirichletFacesOf(p, ps));
  EigenOptions opt;
  opt.count = p.eigencount;
  opt.zeroTolerance = p.zeroTolerance;
  opt.shift = p.shift;
  opt.vectors = true;
  EigRun run;
  run.eig = solveGeneralizedEig(restrictTo(K, free), restrictTo(M, free), opt);
  run.dofs = static_cast<int>(free.size());
  for (const auto& patch : ps.patches) run.patchDims.push_back(patch.disc.X[k].size());
  return run;
}

FieldFn exactField(const std::string& name, int dim) {
  if (name == "zero") return [dim](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::VectorXd::Zero(dim)); };
  if (name == "gradient-polynomial") {
    // grad of x^2 y + y z^2 + x z (dim 3), x^2 y + x (dim 2)
    if (dim == 3)
      return [](const Eigen::VectorXd& x) {
        Eigen::VectorXd u(3);
        u << 2 * x[0] * x[1] + x[2], x[0] * x[0] + x[2] * x[2], 2 * x[1] * x[2] + x[0];
        return u;
      };
    return [](const Eigen::VectorXd& x) {
      Eigen::VectorXd u(2);
      u << 2 * x[0] * x[1] + 1, x[0] * x[0];
      return u;
    };
  }
  if (name == "cylinder-singular") {
    if (dim != 3) throw ValidationError("cylinder-singular is a 3D field");
    // grad of r^(2/3) sin(2 theta / 3) sin(pi z), theta in [0, 2 pi)
    return [](const Eigen::VectorXd& x) {
      const double r = std::hypot(x[0], x[1]);
      double th = std::atan2(x[1], x[0]);
      if (th < 0) th += 2 * M_PI;
      const double sz = std::sin(M_PI * x[2]), cz = std::cos(M_PI * x[2]);
      const double ar = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0) * std::sin(2 * th / 3) * sz;
      const double at = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0) * std::cos(2 * th / 3) * sz;
      Eigen::VectorXd u(3);
      u << ar * std::cos(th) - at * std::sin(th), ar * std::sin(th) + at * std::cos(th),
          M_PI * std::pow(r, 2.0 / 3.0) * std::sin(2 * th / 3) * cz;
      return u;
    };
  }
  throw ValidationError("unknown exact field '" + name + "'");
}

FieldFn exactCurl(const std::string& name, int dim) {
  exactField(name, dim);  // validates the name
  // every named field is a gradient
  const int n = dim == 3 ? 3 : 1;
  return [n](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::VectorXd::Zero(n)); };
}

SourceRun runSource(const ProblemSpec& p) {
  const PatchSet ps = buildPatchSet(p);
  const InterfaceGlue glue = buildGlue(ps);
  const FieldFn u = exactField(p.exact, p.dim);
  const FieldFn cu = exactCurl(p.exact, p.dim);
  // curl curl u + u = f with curl u = 0
  auto A = globalMatrix(ps, glue, 1, [&](int q) {
    const auto& P = ps.patches[q];
    RealMatrix a = assembleMatrix(P.disc, 1, P.geometry, Operator::Stiffness);
    a += assembleMatrix(P.disc, 1, P.geometry, Operator::Mass);
    return a;
  });
  Eigen::VectorXd b =
      globalVector(ps, glue, 1, [&](int q) { return assembleLoad(ps.patches[q].disc, 1, ps.patches[q].geometry, u); });
  const auto free = globalFreeIndices(ps, glue, 1, dirichletFacesOf(p, ps));
  Eigen::VectorXd bf(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) bf[i] = b[free[i]];
  const Eigen::VectorXd xf = solveLinear(restrictTo(A, free), bf);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(glue.spaces[1].globalSize);
  for (std::size_t i = 0; i < free.size(); ++i) x[free[i]] = xf[i];
  ErrorParts total;
  for (int q = 0; q < static_cast<int>(ps.patches.size()); ++q) {
    const auto& P = ps.patches[q];
    const ErrorParts e = errorIntegrals(P.disc, 1, P.geometry, patchCoefficients(glue, 1, q, x), u, cu);
    total.value2 += e.value2;
    total.deriv2 += e.deriv2;
    total.exactValue2 += e.exactValue2;
    total.exactDeriv2 += e.exactDeriv2;
  }
  SourceRun run;
  run.dofs = static_cast<int>(free.size());
  run.l2Error = std::sqrt(total.value2);
  run.curlError = std::sqrt(total.deriv2);
  run.error = std::sqrt(total.value2 + total.deriv2);
  const double norm = std::sqrt(total.exactValue2 + total.exactDeriv2);
  run.relativeError = norm > 0 ? run.error / norm : run.error;
  return run;
}

WaveguideRun runWaveguide(const ProblemSpec& p) {
  const PatchSet ps = buildPatchSet(p);
  const InterfaceGlue glue = buildGlue(ps);
  const auto& g1 = glue.spaces[1];
  const int N = g1.globalSize;
  for (const auto& port : p.ports) {
    bool boundary = false;
    for (const auto& f : ps.boundaryFaces()) boundary = boundary || f == port;
    if (!boundary) throw ValidationError("port face is not a boundary face");
    if (port[1] / 2 != 2) throw ValidationError("ports must be z-faces of their patch");
  }
  auto K = globalMatrix(ps, glue, 1, [&](int q) {
    return assembleMatrix(ps.patches[q].disc, 1, ps.patches[q].geometry, Operator::Stiffness);
  });
  auto M = globalMatrix(ps, glue, 1, [&](int q) {
    return assembleMatrix(ps.patches[q].disc, 1, ps.patches[q].geometry, Operator::Mass);
  });
  auto faceMatrix = [&](const std::array<int, 2>& port, FaceOperator op) {
    return globalMatrix(ps, glue, 1, [&](int q) {
      const auto& P = ps.patches[q];
      if (q != port[0]) return RealMatrix(P.disc.X[1].size(), P.disc.X[1].size());
      return assembleFace(P.disc, 1, P.geometry, port[1], op);
    });
  };
  const RealMatrix B1 = faceMatrix(p.ports[0], FaceOperator::TangentialMass);
  const RealMatrix B2 = faceMatrix(p.ports[1], FaceOperator::TangentialMass);
  const RealMatrix C1 = faceMatrix(p.ports[0], FaceOperator::NormalCurl);
  const auto free = globalFreeIndices(ps, glue, 1, dirichletFacesOf(p, ps));
  std::vector<char> isFree(N, 0);
  for (int g : free) isFree[g] = 1;

  // Trace functions on each port: (global, sign, key)
  struct PortFn {
    int global;
    int sign;
    int direction;
    std::array<LocalKnotVector, 2> kv;
  };
  auto portFunctions = [&](const std::array<int, 2>& port) {
    std::vector<PortFn> out;
    const FormSpace& V = ps.patches[port[0]].disc.X[1];
    int l = 0;
    for (int c = 0; c < static_cast<int>(V.components.size()); ++c)
      for (int i = 0; i < V.components[c].size(); ++i, ++l)
        if (hasTrace(V, c, i, 2, port[1] % 2)) {
          const auto [g, s] = g1.local[port[0]][l];
          if (!isFree[g]) continue;
          out.push_back({g, s, V.components[c].direction, {V.components[c].functions[i][0], V.components[c].functions[i][1]}});
        }
    return out;
  };
  const auto pf1 = portFunctions(p.ports[0]);
  const auto pf2 = portFunctions(p.ports[1]);
  std::vector<int> P1;
  for (const auto& f : pf1) P1.push_back(f.global);
  const PortMode mode = solvePortMode(restrictTo(C1, P1), restrictTo(B1, P1), p.zeroTolerance);
  WaveguideRun run;
  run.k10sq = mode.k10sq;
  run.nextCutoffSq = mode.nextEigenvalue;
  if (!(p.k * p.k > mode.k10sq && p.k * p.k < mode.nextEigenvalue))
    throw ValidationError("k is not between the first two cutoff wavenumbers");
  run.beta = std::sqrt(p.k * p.k - mode.k10sq);
  run.z1 = faceCoordinate(ps.patches[p.ports[0][0]], p.ports[0][1], 2);
  run.z2 = faceCoordinate(ps.patches[p.ports[1][0]], p.ports[1][1], 2);

  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(N), e2 = Eigen::VectorXd::Zero(N);
  for (std::size_t i = 0; i < pf1.size(); ++i) e1[pf1[i].global] = mode.e[static_cast<int>(i)];
  // same mode on the second port: match trace functions by carried direction and knots
  for (const auto& f : pf1) {
    bool found = false;
    for (const auto& h : pf2)
      if (h.direction == f.direction && h.kv == f.kv) {
        e2[h.global] = h.sign * f.sign * e1[f.global];
        found = true;
        break;
      }
    if (!found) throw ValidationError("ports do not carry the same trace space");
  }

  using C = std::complex<double>;
  const C I(0.0, 1.0);
  const double k2 = p.k * p.k;
  ComplexMatrix A = K.cast<C>() - C(k2) * M.cast<C>() + (I * run.beta) * (B1 + B2).cast<C>();
  const Eigen::VectorXd B1e = B1 * e1;
  const Eigen::VectorXcd load = (2.0 * I * run.beta * std::exp(-I * run.beta * run.z1)) * B1e.cast<C>();
  std::vector<int> pos(N, -1);
  for (std::size_t i = 0; i < free.size(); ++i) pos[free[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<C>> t;
  for (int c = 0; c < A.outerSize(); ++c)
    for (ComplexMatrix::InnerIterator it(A, c); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0) t.emplace_back(pos[it.row()], pos[it.col()], it.value());
  ComplexMatrix Af(free.size(), free.size());
  Af.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXcd bf(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) bf[i] = load[free[i]];
  const Eigen::VectorXcd xf = solveLinear(Af, bf);
  Eigen::VectorXcd E = Eigen::VectorXcd::Zero(N);
  for (std::size_t i = 0; i < free.size(); ++i) E[free[i]] = xf[i];
  const C gamma1 = B1e.cast<C>().dot(E);
  const C gamma2 = (B2 * e2).cast<C>().dot(E);
  const double norm = e1.dot(B1e);
  const Scattering s = scatteringCoefficients(gamma1, gamma2, norm, run.beta, run.z1, run.z2);
  run.R = s.R;
  run.T = s.T;
  run.dofs = static_cast<int>(free.size());
  return run;
}

std::vector<ConvergenceRow> runConvergence(const ProblemSpec& p) {
  std::vector<ConvergenceRow> rows;
  for (const auto& lv : p.levels) {
    ConvergenceRow row;
    if (lv.kind == "solve-eig") {
      const EigRun r = runEig(lv);
      if (r.eig.eigenvalues.empty()) throw NumericalError("convergence: no non-null eigenvalue");
      row.dofs = r.dofs;
      const double lam = r.eig.eigenvalues.front();
      row.value = p.metric == "eigenvalue" ? lam : std::abs(lam - p.exactValue) / std::abs(p.exactValue);
    } else if (lv.kind == "solve-source") {
      const SourceRun r = runSource(lv);
      row.dofs = r.dofs;
      row.value = r.relativeError;
    } else {
      throw ValidationError("convergence: levels must be solve-eig or solve-source problems");
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tsdr
