#include <doctest.h>

#include <random>

#include "tsdr/problem.hpp"
#include "tsdr/tspline_complex.hpp"

using namespace tsdr;

namespace {

TMesh2D fixtureMesh(const std::string& name, int p) {
  return buildTMesh(loadTMeshSpec(std::string(TSDR_FIXTURES) + "/tmesh/" + name + ".json"), p, p);
}

TMesh2D squareMesh() {
  const ProblemSpec ps = loadProblem(std::string(TSDR_FIXTURES) + "/square_p3.json");
  return TMesh2D::fromCells(buildCellMesh(*ps.mesh, 3), 3, 3);
}

// Strongly AS meshes from random corner refinements.
std::vector<CellMesh> generatedMeshes(int p, int count) {
  std::mt19937 rng(100 + p);
  std::vector<CellMesh> out;
  std::vector<Rational> b;
  for (int i = 0; i <= 4; ++i) b.push_back(Rational(i, 4));
  while (static_cast<int>(out.size()) < count) {
    CellMesh cm = CellMesh::tensor(b, b);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int s = 0; s < 2; ++s) {
      const Rational h(1, 4 << s);
      const int i = pick(rng), j = pick(rng);
      cm = cm.refineBox(h * i, h * (i + 2), h * j, h * (j + 2));
    }
    out.push_back(restoreAnalysisSuitability(cm, p));
  }
  return out;
}

RealMatrix realOp(const TsplineComplex& cx, int k) { return cx.exactOps[k].toReal(); }

void checkExact(const TsplineComplex& cx) {
  const ExactnessReport rep = verifyTExactness(cx);
  REQUIRE_FALSE(rep.skipped);
  for (const auto& [name, ok] : rep.checks) {
    INFO(name);
    CHECK(ok);
  }
}

}  // namespace

TEST_CASE("tensor meshes reduce to the parametric complex") {
  for (int p : {2, 3, 4}) {
    const KnotVector kx = KnotVector::uniform(p, 3), ky = KnotVector::uniform(p, 4);
    const TsplineComplex t = buildTsplineComplex(TMesh2D::tensor(kx, ky), p, p);
    const DiscreteComplex b = buildComplex({kx, ky});
    REQUIRE(t.lookup);
    for (int k = 0; k < 3; ++k) CHECK(t.spaces[k].size() == b.spaces[k].size());
    for (int k = 0; k < 2; ++k) CHECK(sameEntries(t.ops[k], b.ops[k]));
    checkExact(t);
  }
}

TEST_CASE("derived meshes of tensor meshes") {
  const KnotVector k3 = KnotVector::uniform(3, 4);
  const TMesh2D m3 = TMesh2D::tensor(k3, k3);
  const TComplexMeshes d3 = deriveComplexMeshes(m3, 3, 3);
  for (const TMesh2D* x : {&d3.M11, &d3.M12, &d3.M2}) {
    CHECK(x->xs() == m3.xs());
    CHECK(x->ys() == m3.ys());
    CHECK(x->geometricLines() == m3.geometricLines());
  }
  const KnotVector k2 = KnotVector::uniform(2, 4);
  const TMesh2D m2 = TMesh2D::tensor(k2, k2);
  const TComplexMeshes d2 = deriveComplexMeshes(m2, 2, 2);
  for (const TMesh2D* x : {&d2.M11, &d2.M12, &d2.M2}) {
    CHECK(x->geometricLines() == m2.geometricLines());
    CHECK(x->elements().size() == m2.elements().size());
  }
  CHECK(d2.M2.nx() < m2.nx());
  CHECK(d2.M2.ny() < m2.ny());
  CHECK(d2.M11.ny() == m2.ny());
}

TEST_CASE("mixed degrees are rejected") {
  const TMesh2D m = fixtureMesh("one_t", 3);
  CHECK_THROWS_AS(buildTsplineComplex(m, 2, 3), std::invalid_argument);
}

TEST_CASE("square benchmark mesh complex") {
  const TMesh2D m = squareMesh();
  const TsplineComplex cx = buildTsplineComplex(m, 3, 3);
  const Census c = m.census();
  const int d0 = cx.spaces[0].size(), d1 = cx.spaces[1].size(), d2 = cx.spaces[2].size();
  CHECK(d0 + d2 == d1 + 1);
  CHECK(d0 == c.V0);
  CHECK(d1 == c.E0 + c.VH + c.VV);
  CHECK(d2 == c.F0 + c.VH + c.VV);
  CHECK(c.VH + c.VV > 0);
  checkExact(cx);
  checkExact(buildTsplineComplex(m, 3, 3, true));
}

TEST_CASE("single T-junction: gradient column") {
  const TMesh2D m = fixtureMesh("one_t", 3);
  const TsplineComplex cx = buildTsplineComplex(m, 3, 3);
  const auto tj = m.tjunctions();
  REQUIRE(tj.size() == 1);
  const Component& c0 = cx.spaces[0].components[0];
  int col = -1;
  for (int i = 0; i < c0.size(); ++i)
    if (c0.anchors[i][0] == 2 * tj[0].i && c0.anchors[i][1] == 2 * tj[0].j) col = i;
  REQUIRE(col >= 0);
  RatMatrix G = cx.exactOps[0];
  G.compress();
  const int split = cx.spaces[1].offset(1);
  int xs = 0, ys = 0;
  for (const auto& [r, c, v] : G.entries) {
    if (c != col || v.isZero()) continue;
    CHECK((v == Rational(1) || v == Rational(-1)));
    (r < split ? xs : ys)++;
  }
  CHECK(xs == 2);
  CHECK(ys == 2);
  // the neighbour right of the junction needs a refined target
  CHECK_FALSE(cx.lookup);
  CHECK_THROWS_AS(tDiffMatrix(cx, 0), std::runtime_error);
  checkExact(cx);
}

TEST_CASE("exact operators compose to zero") {
  for (bool rotated : {false, true}) {
    const TsplineComplex cx = buildTsplineComplex(squareMesh(), 3, 3, rotated);
    REQUIRE(cx.exactOps.size() == 2);
    CHECK((cx.exactOps[1] * cx.exactOps[0]).isZero());
    CHECK(cx.exactOps[0].rows == cx.spaces[1].size());
    CHECK(cx.exactOps[0].cols == cx.spaces[0].size());
    if (cx.lookup)
      CHECK(sameEntries(tDiffMatrix(cx, 0), cx.ops[0]));
    else
      CHECK_THROWS(tDiffMatrix(cx, 0));
  }
}

TEST_CASE("operator matrices act as derivatives") {
  struct Case {
    TMesh2D m;
    int p;
  };
  std::vector<Case> cases{{squareMesh(), 3}, {fixtureMesh("one_t", 3), 3}};
  for (int p : {2, 4}) cases.push_back({TMesh2D::fromCells(generatedMeshes(p, 1)[0], p, p), p});
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> U(0.02, 0.98), C(-1.0, 1.0);
  for (const auto& cs : cases) {
    for (bool rotated : {false, true}) {
      const TsplineComplex cx = buildTsplineComplex(cs.m, cs.p, cs.p, rotated);
      const RealMatrix D0 = realOp(cx, 0), D1 = realOp(cx, 1);
      Eigen::VectorXd c(cx.spaces[0].size()), v(cx.spaces[1].size());
      for (auto& x : c) x = C(rng);
      for (auto& x : v) x = C(rng);
      const Eigen::VectorXd gc = D0 * c, dv = D1 * v;
      for (int s = 0; s < 30; ++s) {
        const double x = U(rng), y = U(rng), h = 1e-6;
        auto f0 = [&](double a, double b) { return evalField(cx.spaces[0], c, {a, b})[0]; };
        const double fx = (f0(x + h, y) - f0(x - h, y)) / (2 * h), fy = (f0(x, y + h) - f0(x, y - h)) / (2 * h);
        Eigen::Vector2d g = rotated ? Eigen::Vector2d(fy, -fx) : Eigen::Vector2d(fx, fy);
        const Eigen::VectorXd got = evalField(cx.spaces[1], gc, {x, y});
        CHECK((got - g).norm() <= 1e-6 * std::max(1.0, g.norm()));
        auto f1 = [&](double a, double b) { return evalField(cx.spaces[1], v, {a, b}); };
        const Eigen::VectorXd dx = (f1(x + h, y) - f1(x - h, y)) / (2 * h), dy = (f1(x, y + h) - f1(x, y - h)) / (2 * h);
        const double want = rotated ? dx[0] + dy[1] : dx[1] - dy[0];
        const double d = evalField(cx.spaces[2], dv, {x, y})[0];
        CHECK(std::abs(d - want) <= 1e-6 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST_CASE("generated AS meshes: dimensions and exactness") {
  for (int p : {2, 3, 4}) {
    int n = 0;
    for (const CellMesh& cm : generatedMeshes(p, p == 3 ? 10 : 3)) {
      const TMesh2D m = TMesh2D::fromCells(cm, p, p);
      REQUIRE(checkStrongAS(m, p, p).ok);
      const TsplineComplex cx = buildTsplineComplex(m, p, p);
      const int d0 = cx.spaces[0].size(), d1 = cx.spaces[1].size(), d2 = cx.spaces[2].size();
      CHECK(d0 + d2 == d1 + 1);
      if (p % 2 == 1) {
        const Census c = m.census();
        CHECK(d0 == c.V0);
        CHECK(d1 == c.E0 + c.VH + c.VV);
        CHECK(d2 == c.F0 + c.VH + c.VV);
      }
      checkExact(cx);
      // the four derived meshes share their extended mesh
      const auto& dm = cx.meshes;
      const auto lines = extendedMesh(dm.M0, p, p).geometricLines();
      CHECK(extendedMesh(dm.M11, p - 1, p).geometricLines() == lines);
      CHECK(extendedMesh(dm.M12, p, p - 1).geometricLines() == lines);
      CHECK(extendedMesh(dm.M2, p - 1, p - 1).geometricLines() == lines);
      n += !m.tjunctions().empty();
    }
    CHECK(n > 0);
  }
}
