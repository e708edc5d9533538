#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "tsdr/problem.hpp"
#include "tsdr/tspline_complex.hpp"

using nlohmann::json;
using namespace tsdr;

namespace {

struct Common {
  std::string out = ".";
  int threads = 1;
  std::optional<double> tol;
  std::string problem;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void writeFile(const Common& c, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(c.out);
  const auto path = std::filesystem::path(c.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << text;
}

void writeJson(const Common& c, const std::string& name, const json& j) { writeFile(c, name, j.dump(2) + "\n"); }

std::vector<int> parseList(const std::string& s, const std::string& what) {
  std::vector<int> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw ValidationError(what + ": expected comma-separated integers, got '" + s + "'");
    }
  }
  return v;
}

ProblemSpec loadFor(const Common& c, const std::string& kind) {
  if (c.problem.empty()) throw ValidationError(kind + ": --problem is required");
  ProblemSpec p = loadProblem(c.problem);
  if (p.kind != kind) throw ValidationError(c.problem + ": kind is '" + p.kind + "', expected '" + kind + "'");
  if (c.tol) {
    p.zeroTolerance = *c.tol;
    for (auto& lv : p.levels) lv.zeroTolerance = *c.tol;
  }
  return p;
}

json reportJson(const ExactnessReport& r) {
  json j;
  j["dims"] = r.dims;
  j["ranks"] = r.ranks;
  j["skipped"] = r.skipped;
  j["checks"] = json::array();
  for (const auto& [name, ok] : r.checks) j["checks"].push_back({{"name", name}, {"ok", ok}});
  j["pass"] = r.pass();
  return j;
}

int checkComplex(const Common& c, std::string degrees, std::string n, bool boundary) {
  std::vector<int> p, sizes;
  if (!c.problem.empty()) {
    const ProblemSpec spec = loadFor(c, "check-complex");
    p = spec.degrees;
    sizes = spec.n;
    boundary = boundary || spec.boundary;
  } else {
    p = parseList(degrees, "--degrees");
    sizes = parseList(n, "--n");
  }
  if (p.empty() || p.size() > 3 || p.size() != sizes.size())
    throw ValidationError("check-complex: --degrees and --n need 1 to 3 matching entries");
  for (std::size_t l = 0; l < p.size(); ++l)
    if (p[l] < 1 || sizes[l] <= p[l]) throw ValidationError("check-complex: need degree >= 1 and n > degree");
  DiscreteComplex cx = buildUniformComplex(p, sizes);
  if (boundary) cx = restrictBoundary(cx, allFaces(static_cast<int>(p.size())));
  const ExactnessReport rep = verifyExactness(cx);
  json j = reportJson(rep);
  j["degrees"] = p;
  j["n"] = sizes;
  j["boundary"] = boundary;
  if (!boundary) {
    const IncidenceReport inc = entityCorrespondence(cx);
    j["incidence"] = {{"applicable", inc.applicable}, {"cochain", inc.cochain},   {"unitEntries", inc.unitEntries},
                      {"bijections", inc.bijections}, {"gradMatchesIncidence", inc.gradMatchesIncidence},
                      {"note", inc.note},             {"pass", inc.pass()}};
  }
  writeJson(c, "check_complex.json", j);
  std::cout << rep.str();
  if (!rep.pass()) {
    std::cerr << "check-complex: exactness check failed\n";
    return 3;
  }
  return 0;
}

std::pair<TMesh2D, std::array<int, 2>> meshArgs(const Common& c, const std::string& meshFile,
                                                const std::string& degrees) {
  TMeshSpec spec;
  std::vector<int> p;
  if (!c.problem.empty()) {
    const ProblemSpec ps = loadFor(c, "tmesh-check");
    spec = *ps.tmesh;
    p = ps.degrees;
  } else {
    if (meshFile.empty()) throw ValidationError("tmesh: --mesh or --problem is required");
    spec = loadTMeshSpec(meshFile);
    p = parseList(degrees, "--degrees");
  }
  if (p.size() != 2 || p[0] < 1 || p[1] < 1) throw ValidationError("tmesh: --degrees takes two positive degrees");
  return {buildTMesh(spec, p[0], p[1]), {p[0], p[1]}};
}

json segmentJson(const TMesh2D& m, const Segment& s) {
  const auto& along = s.horizontal ? m.xs() : m.ys();
  const auto& across = s.horizontal ? m.ys() : m.xs();
  return {{"horizontal", s.horizontal},
          {"index", {s.fixed, s.from, s.to}},
          {"at", across[s.fixed].str()},
          {"from", along[s.from].str()},
          {"to", along[s.to].str()}};
}

json extensionJson(const TMesh2D& m, const Extension& e) {
  return {{"junction",
           {{"i", e.junction.i},
            {"j", e.junction.j},
            {"x", m.xs()[e.junction.i].str()},
            {"y", m.ys()[e.junction.j].str()},
            {"horizontal", e.junction.horizontal},
            {"direction", e.junction.direction}}},
          {"face", segmentJson(m, e.face)},
          {"edge", segmentJson(m, e.edge)},
          {"faceBays", e.faceBays},
          {"edgeBays", e.edgeBays}};
}

json verdictJson(const TMesh2D& m, const ASVerdict& v) {
  json j = {{"ok", v.ok}, {"reason", v.reason}};
  if (v.offending) j["offending"] = {extensionJson(m, v.offending->first), extensionJson(m, v.offending->second)};
  return j;
}

int tmeshCheck(const Common& c, const std::string& meshFile, const std::string& degrees, bool anchors) {
  const auto [m, p] = meshArgs(c, meshFile, degrees);
  const Census cs = m.census();
  json j;
  j["degrees"] = p;
  j["census"] = {{"F0", cs.F0}, {"E0", cs.E0}, {"EH", cs.EH}, {"EV", cs.EV}, {"V0", cs.V0}, {"VH", cs.VH},
                 {"VV", cs.VV}, {"EB", cs.EB}, {"VB", cs.VB}, {"euler", cs.euler()}};
  j["tjunctions"] = json::array();
  for (const auto& t : m.tjunctions())
    j["tjunctions"].push_back({{"i", t.i},
                               {"j", t.j},
                               {"x", m.xs()[t.i].str()},
                               {"y", m.ys()[t.j].str()},
                               {"horizontal", t.horizontal},
                               {"direction", t.direction}});
  j["extensions"] = json::array();
  for (const auto& e : computeExtensions(m, p[0], p[1])) j["extensions"].push_back(extensionJson(m, e));
  const ASVerdict as = isAnalysisSuitable(m, p[0], p[1]);
  j["analysisSuitable"] = verdictJson(m, as);
  j["stronglyAnalysisSuitable"] = verdictJson(m, checkStrongAS(m, p[0], p[1]));
  if (as.ok) {
    j["extendedMesh"] = describeTMesh(extendedMesh(m, p[0], p[1]));
    if (anchors) {
      j["anchors"] = json::array();
      for (const auto& a : anchorsAndLocalKV(m, p[0], p[1]))
        j["anchors"].push_back({{"position", a.position}, {"kv1", a.kv1.str()}, {"kv2", a.kv2.str()}});
    }
  }
  writeJson(c, "tmesh_check.json", j);
  std::cout << "T-junctions: " << j["tjunctions"].size() << " (horizontal " << cs.VH << ", vertical " << cs.VV
            << ")\nEuler: " << (cs.euler() ? "ok" : "violated") << "\nanalysis-suitable: " << (as.ok ? "yes" : "no")
            << "\nstrongly analysis-suitable: " << (j["stronglyAnalysisSuitable"]["ok"].get<bool>() ? "yes" : "no")
            << "\n";
  if (!as.ok) std::cout << as.reason << "\n";
  return 0;
}

int tmeshComplex(const Common& c, const std::string& meshFile, const std::string& degrees, bool boundary,
                 bool rotated) {
  const auto [m, p] = meshArgs(c, meshFile, degrees);
  const ASVerdict as = isAnalysisSuitable(m, p[0], p[1]);
  if (!as.ok) throw ValidationError("tmesh complex: mesh is not analysis-suitable: " + as.reason);
  TsplineComplex cx = buildTsplineComplex(m, p[0], p[1], rotated);
  if (boundary) cx = restrictTBoundary(cx, allFaces(2));
  const ExactnessReport rep = verifyTExactness(cx);
  json j = reportJson(rep);
  j["degrees"] = p;
  j["rotated"] = rotated;
  j["boundary"] = boundary;
  j["lookup"] = cx.lookup;
  j["stronglyAnalysisSuitable"] = checkStrongAS(m, p[0], p[1]).ok;
  writeJson(c, "tmesh_complex.json", j);
  std::cout << rep.str();
  if (!rep.pass()) {
    std::cerr << "tmesh complex: exactness check failed\n";
    return 3;
  }
  return 0;
}

int solveEig(const Common& c) {
  const ProblemSpec p = loadFor(c, "solve-eig");
  const EigRun r = runEig(p);
  json j;
  j["name"] = p.name;
  j["dofs"] = r.dofs;
  j["patchDims"] = r.patchDims;
  if (r.eig.zeroCount >= 0) j["zeroCount"] = r.eig.zeroCount;
  j["eigenvalues"] = r.eig.eigenvalues;
  j["maxResidual"] = r.eig.maxResidual;
  writeJson(c, "results.json", j);
  std::string csv = "index,value\n";
  for (std::size_t i = 0; i < r.eig.eigenvalues.size(); ++i)
    csv += std::to_string(i + 1) + "," + num(r.eig.eigenvalues[i]) + "\n";
  writeFile(c, "eigenvalues.csv", csv);
  std::cout << "dofs " << r.dofs;
  if (r.eig.zeroCount >= 0) std::cout << ", zero eigenvalues " << r.eig.zeroCount;
  std::cout << "\n";
  for (double v : r.eig.eigenvalues) std::cout << num(v) << "\n";
  return 0;
}

int solveSource(const Common& c) {
  const ProblemSpec p = loadFor(c, "solve-source");
  const SourceRun r = runSource(p);
  json j = {{"name", p.name},       {"dofs", r.dofs},           {"error", r.error},
            {"l2Error", r.l2Error}, {"curlError", r.curlError}, {"relativeError", r.relativeError}};
  writeJson(c, "results.json", j);
  std::cout << "dofs " << r.dofs << "\nrelative H(curl) error " << num(r.relativeError) << "\n";
  return 0;
}

int solveWaveguide(const Common& c) {
  const ProblemSpec p = loadFor(c, "solve-waveguide");
  const WaveguideRun r = runWaveguide(p);
  json j = {{"name", p.name},
            {"dofs", r.dofs},
            {"k10sq", r.k10sq},
            {"nextCutoffSq", r.nextCutoffSq},
            {"beta", r.beta},
            {"z1", r.z1},
            {"z2", r.z2},
            {"R", {r.R.real(), r.R.imag()}},
            {"T", {r.T.real(), r.T.imag()}},
            {"absR", std::abs(r.R)},
            {"absT", std::abs(r.T)}};
  writeJson(c, "results.json", j);
  std::cout << "dofs " << r.dofs << "\nk10^2 " << num(r.k10sq) << "\n|R| " << num(std::abs(r.R)) << "\n|T| "
            << num(std::abs(r.T)) << "\n";
  return 0;
}

int convergence(const Common& c) {
  const ProblemSpec p = loadFor(c, "convergence");
  const auto rows = runConvergence(p);
  json j;
  j["name"] = p.name;
  j["metric"] = p.metric;
  j["rows"] = json::array();
  std::string csv = "dofs,value\n";
  for (const auto& r : rows) {
    j["rows"].push_back({{"dofs", r.dofs}, {"value", r.value}});
    csv += std::to_string(r.dofs) + "," + num(r.value) + "\n";
  }
  writeJson(c, "results.json", j);
  writeFile(c, "convergence.csv", csv);
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"T-spline de Rham complexes and Maxwell solvers"};
  app.require_subcommand(1);
  Common c;
  auto common = [&](CLI::App* s) {
    s->add_option("--out", c.out, "output directory");
    s->add_option("--threads", c.threads, "assembly threads")->check(CLI::PositiveNumber);
    s->add_option("--tol", c.tol, "zero-eigenvalue tolerance (relative)")->check(CLI::PositiveNumber);
  };

  std::string degrees, n, meshFile;
  bool boundary = false, rotated = false, anchors = false;
  std::function<int()> action;

  auto* cc = app.add_subcommand("check-complex", "exactness of a uniform tensor-product complex");
  common(cc);
  cc->add_option("--degrees", degrees, "e.g. 3,3,3");
  cc->add_option("--n", n, "basis functions per direction, e.g. 4,4,4");
  cc->add_option("--problem", c.problem);
  cc->add_flag("--boundary", boundary, "homogeneous boundary conditions on every face");
  cc->callback([&] { action = [&] { return checkComplex(c, degrees, n, boundary); }; });

  auto* tm = app.add_subcommand("tmesh", "T-mesh tools");
  tm->require_subcommand(1);
  auto* tc = tm->add_subcommand("check", "census, T-junctions, extensions, analysis-suitability");
  common(tc);
  tc->add_option("--mesh", meshFile);
  tc->add_option("--degrees", degrees, "p1,p2");
  tc->add_option("--problem", c.problem);
  tc->add_flag("--anchors", anchors, "list anchors with local knot vectors");
  tc->callback([&] { action = [&] { return tmeshCheck(c, meshFile, degrees, anchors); }; });
  auto* tx = tm->add_subcommand("complex", "T-spline complex dimensions and exactness");
  common(tx);
  tx->add_option("--mesh", meshFile);
  tx->add_option("--degrees", degrees, "p1,p2");
  tx->add_option("--problem", c.problem);
  tx->add_flag("--boundary", boundary);
  tx->add_flag("--rotated", rotated, "grad-rot variant: H1 -> H(div) -> L2");
  tx->callback([&] { action = [&] { return tmeshComplex(c, meshFile, degrees, boundary, rotated); }; });

  auto solver = [&](const char* name, const char* help, int (*fn)(const Common&)) {
    auto* s = app.add_subcommand(name, help);
    common(s);
    s->add_option("--problem", c.problem)->required();
    s->callback([&, fn] { action = [&, fn] { return fn(c); }; });
  };
  solver("solve-eig", "Maxwell / Laplace eigenproblem", solveEig);
  solver("solve-source", "Maxwell source problem with a known solution", solveSource);
  solver("solve-waveguide", "waveguide with two ports: R and T", solveWaveguide);
  solver("convergence", "run the levels of a convergence study", convergence);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return action();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TMeshError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
