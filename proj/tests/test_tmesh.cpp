#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "tsdr/problem.hpp"
#include "tsdr/tmesh.hpp"

using namespace tsdr;

namespace {

TMesh2D fixtureMesh(const std::string& name, int p1, int p2) {
  return buildTMesh(loadTMeshSpec(std::string(TSDR_FIXTURES) + "/tmesh/" + name + ".json"), p1, p2);
}

// Segment in knot values: {fixed, from, to}.
std::array<Rational, 3> values(const TMesh2D& m, const Segment& s) {
  const auto& along = s.horizontal ? m.xs() : m.ys();
  const auto& across = s.horizontal ? m.ys() : m.xs();
  return {across[s.fixed], along[s.from], along[s.to]};
}

CellMesh transposed(const CellMesh& cm) {
  CellMesh t;
  for (const Cell& c : cm.cells) t.cells.push_back({c.y0, c.y1, c.x0, c.x1});
  return t;
}

CellMesh randomRefinement(std::mt19937& rng, int steps) {
  std::vector<Rational> b;
  for (int i = 0; i <= 4; ++i) b.push_back(Rational(i, 4));
  CellMesh cm = CellMesh::tensor(b, b);
  std::uniform_int_distribution<int> pick(0, 7);
  for (int s = 0; s < steps; ++s) {
    const int i = pick(rng) % 4, j = pick(rng) % 4, w = 1 + pick(rng) % 2;
    cm = cm.refineBox(Rational(i, 8 << s), Rational(i + w, 8 << s) + Rational(1, 4), Rational(j, 8 << s),
                      Rational(j + w, 8 << s) + Rational(1, 4));
  }
  return cm;
}

}  // namespace

TEST_CASE("local knot vectors of a mixed-degree T-mesh") {
  const TMesh2D m = fixtureMesh("fig_local_kv", 2, 3);
  const auto anchors = anchorsAndLocalKV(m, 2, 3);
  auto find = [&](int a, int b) -> const Anchor2D* {
    for (const auto& x : anchors)
      if (x.position[0] == a && x.position[1] == b) return &x;
    return nullptr;
  };
  const Anchor2D* a = find(3, 2);
  REQUIRE(a != nullptr);
  CHECK(a->kv1.knots == std::vector<Rational>{0, 0, Rational(1, 6), Rational(1, 3)});
  CHECK(a->kv2.knots == std::vector<Rational>{0, 0, 0, Rational(1, 6), Rational(1, 3)});
  const Anchor2D* b = find(11, 8);
  REQUIRE(b != nullptr);
  CHECK(b->kv1.knots == std::vector<Rational>{Rational(1, 2), Rational(2, 3), Rational(5, 6), 1});
  CHECK(b->kv2.knots == std::vector<Rational>{0, Rational(1, 3), Rational(1, 2), Rational(2, 3), Rational(5, 6)});
  CHECK(m.census().euler());
}

TEST_CASE("extensions of the two-junction mesh") {
  const TMesh2D m = fixtureMesh("fig_extensions", 2, 3);
  const auto ext = computeExtensions(m, 2, 3);
  REQUIRE(ext.size() == 2);
  int seen = 0;
  for (const auto& e : ext) {
    const auto f = values(m, e.face), g = values(m, e.edge);
    if (!e.face.horizontal) {
      // vertical T-junction at (5/6, 1/3)
      CHECK(f == std::array<Rational, 3>{Rational(5, 6), 0, Rational(1, 3)});
      CHECK(g == std::array<Rational, 3>{Rational(5, 6), Rational(1, 3), Rational(1, 2)});
      seen |= 1;
    } else {
      // horizontal T-junction at (1/2, 2/3)
      CHECK(f == std::array<Rational, 3>{Rational(2, 3), Rational(1, 2), Rational(2, 3)});
      CHECK(g == std::array<Rational, 3>{Rational(2, 3), Rational(1, 3), Rational(1, 2)});
      seen |= 2;
    }
  }
  CHECK(seen == 3);
  CHECK(isAnalysisSuitable(m, 2, 3).ok);
  CHECK(checkStrongAS(m, 2, 3).ok);
  CHECK(m.census().euler());
}

TEST_CASE("intersecting extensions are reported") {
  const TMesh2D m = fixtureMesh("crossing", 3, 3);
  const ASVerdict v = isAnalysisSuitable(m, 3, 3);
  CHECK_FALSE(v.ok);
  REQUIRE(v.offending.has_value());
  CHECK(v.reason.find("intersect") != std::string::npos);
  CHECK_FALSE(checkStrongAS(m, 3, 3).ok);
}

TEST_CASE("single T-junction") {
  const TMesh2D m = fixtureMesh("one_t", 3, 3);
  const auto tj = m.tjunctions();
  REQUIRE(tj.size() == 1);
  CHECK(tj[0].horizontal);
  const auto ext = computeExtensions(m, 3, 3);
  REQUIRE(ext.size() == 1);
  CHECK(values(m, ext[0].face) == std::array<Rational, 3>{Rational(1, 2), Rational(1, 2), 1});
  const Census c = m.census();
  CHECK(c.VH + c.VV == 1);
  CHECK(c.euler());
}

TEST_CASE("tensor meshes") {
  const KnotVector kx = KnotVector::uniform(3, 4), ky = KnotVector::uniform(2, 3);
  const TMesh2D m = TMesh2D::tensor(kx, ky);
  CHECK(m.tjunctions().empty());
  CHECK(m.census().euler());
  CHECK(isAnalysisSuitable(m, 3, 2).ok);
  const auto anchors = anchorsAndLocalKV(m, 3, 2);
  CHECK(static_cast<int>(anchors.size()) == kx.dim() * ky.dim());
  for (const auto& a : anchors) {
    bool found = false;
    for (int i = 0; i < kx.dim() && !found; ++i)
      for (int j = 0; j < ky.dim() && !found; ++j)
        found = kx.local(i).knots == a.kv1.knots && ky.local(j).knots == a.kv2.knots;
    CHECK(found);
  }
}

TEST_CASE("Euler relation and AS symmetry on random refinements") {
  std::mt19937 rng(11);
  int junctions = 0, notAS = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const CellMesh cm = randomRefinement(rng, 1 + trial % 3);
    for (int p : {2, 3, 4}) {
      const TMesh2D m = TMesh2D::fromCells(cm, p, p);
      CHECK(m.census().euler());
      junctions += static_cast<int>(m.tjunctions().size());
      notAS += !isAnalysisSuitable(m, p, p).ok;
      const TMesh2D t = TMesh2D::fromCells(transposed(cm), p, p);
      CHECK(t.census().euler());
      CHECK(isAnalysisSuitable(m, p, p).ok == isAnalysisSuitable(t, p, p).ok);
      CHECK(checkStrongAS(m, p, p).ok == checkStrongAS(t, p, p).ok);
    }
    const TMesh2D mm = TMesh2D::fromCells(cm, 2, 3), tt = TMesh2D::fromCells(transposed(cm), 3, 2);
    CHECK(isAnalysisSuitable(mm, 2, 3).ok == isAnalysisSuitable(tt, 3, 2).ok);
  }
  CHECK(junctions > 0);
  CHECK(notAS > 0);
  // restored meshes: AS for their degree, verdicts for other degrees still symmetric
  int as = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const CellMesh cm = restoreAnalysisSuitability(randomRefinement(rng, 2), 2 + trial % 2);
    for (int p : {2, 3, 4}) {
      const bool ok = isAnalysisSuitable(TMesh2D::fromCells(cm, p, p), p, p).ok;
      as += ok;
      CHECK(ok == isAnalysisSuitable(TMesh2D::fromCells(transposed(cm), p, p), p, p).ok);
    }
  }
  CHECK(as >= 6);
}

TEST_CASE("restored meshes: non-negativity and linear independence") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    const int p = 2 + trial % 2;
    const CellMesh cm = restoreAnalysisSuitability(randomRefinement(rng, 2), p);
    const TMesh2D m = TMesh2D::fromCells(cm, p, p);
    REQUIRE(checkStrongAS(m, p, p).ok);
    CHECK(isAnalysisSuitable(m, p, p).ok);
    const auto anchors = anchorsAndLocalKV(m, p, p);
    const int n = static_cast<int>(anchors.size());
    // collocation on a fine grid, columns scaled to unit norm
    const int g = 40;
    Eigen::MatrixXd A(g * g, n);
    for (int a = 0; a < g; ++a)
      for (int b = 0; b < g; ++b)
        for (int k = 0; k < n; ++k)
          A(a * g + b, k) = evalTspline(anchors[k], (a + 0.5) / g, (b + 0.5) / g);
    CHECK(A.minCoeff() >= 0.0);
    for (int k = 0; k < n; ++k) A.col(k).normalize();
    const auto s = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues();
    CHECK(s[n - 1] > 1e-10);
  }
}

TEST_CASE("T-splines are polynomials on the extended mesh elements") {
  struct Case {
    std::string fixture;
    int p1, p2;
  };
  for (const Case& c : {Case{"fig_extensions", 2, 3}, Case{"one_t", 3, 3}, Case{"fig_local_kv", 2, 3}}) {
    const TMesh2D m = fixtureMesh(c.fixture, c.p1, c.p2);
    const auto anchors = anchorsAndLocalKV(m, c.p1, c.p2);
    const int n1 = c.p1 + 1, n2 = c.p2 + 1;
    for (const Cell& e : extendedMesh(m, c.p1, c.p2).elements()) {
      const double x0 = e.x0.toDouble(), hx = e.x1.toDouble() - x0;
      const double y0 = e.y0.toDouble(), hy = e.y1.toDouble() - y0;
      // tensor Lagrange interpolation on (p1+1) x (p2+1) interior points, local coordinates
      auto node = [](int i, int n) { return (i + 0.5) / n; };
      Eigen::MatrixXd V(n1 * n2, n1 * n2);
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
          for (int a = 0; a < n1; ++a)
            for (int b = 0; b < n2; ++b)
              V(i * n2 + j, a * n2 + b) = std::pow(node(i, n1), a) * std::pow(node(j, n2), b);
      const auto lu = V.fullPivLu();
      for (const auto& an : anchors) {
        Eigen::VectorXd f(n1 * n2);
        for (int i = 0; i < n1; ++i)
          for (int j = 0; j < n2; ++j)
            f[i * n2 + j] = evalTspline(an, x0 + hx * node(i, n1), y0 + hy * node(j, n2));
        const Eigen::VectorXd coef = lu.solve(f);
        for (double u : {0.13, 0.71, 0.97})
          for (double v : {0.05, 0.42, 0.88}) {
            double q = 0;
            for (int a = 0; a < n1; ++a)
              for (int b = 0; b < n2; ++b) q += coef[a * n2 + b] * std::pow(u, a) * std::pow(v, b);
            CHECK(std::abs(q - evalTspline(an, x0 + hx * u, y0 + hy * v)) < 1e-12);
          }
      }
    }
  }
}

TEST_CASE("Gram matrix of the square benchmark mesh is nonsingular") {
  const ProblemSpec ps = loadProblem(std::string(TSDR_FIXTURES) + "/square_p3.json");
  const TMesh2D m = TMesh2D::fromCells(buildCellMesh(*ps.mesh, 3), 3, 3);
  CHECK(isAnalysisSuitable(m, 3, 3).ok);
  CHECK(checkStrongAS(m, 3, 3).ok);
  const auto anchors = anchorsAndLocalKV(m, 3, 3);
  CHECK(static_cast<int>(anchors.size()) == m.census().V0);
  const int n = static_cast<int>(anchors.size());
  const auto q = gaussLegendre(8);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  for (const Cell& e : extendedMesh(m, 3, 3).elements()) {
    const double hx = (e.x1 - e.x0).toDouble(), hy = (e.y1 - e.y0).toDouble();
    for (std::size_t a = 0; a < q.nodes.size(); ++a)
      for (std::size_t b = 0; b < q.nodes.size(); ++b) {
        Eigen::VectorXd v(n);
        for (int k = 0; k < n; ++k)
          v[k] = evalTspline(anchors[k], e.x0.toDouble() + hx * q.nodes[a], e.y0.toDouble() + hy * q.nodes[b]);
        G += q.weights[a] * q.weights[b] * hx * hy * v * v.transpose();
      }
  }
  const Eigen::VectorXd d = G.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd S = d.asDiagonal() * G * d.asDiagonal();
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S).eigenvalues()[0] > 1e-10);
}

TEST_CASE("extended mesh contains the mesh and is a valid T-mesh") {
  const TMesh2D m = fixtureMesh("fig_extensions", 2, 3);
  const TMesh2D e = extendedMesh(m, 2, 3);
  CHECK(e.nx() == m.nx());
  for (int i = 0; i + 1 < m.nx(); ++i)
    for (int j = 0; j < m.ny(); ++j)
      if (m.h(i, j)) CHECK(e.h(i, j));
  CHECK(e.census().euler());
}

TEST_CASE("invalid T-meshes") {
  const std::vector<Rational> xs{0, 0, 0, Rational(1, 2), 1, 1, 1}, ys = xs;
  // overlapping faces
  CHECK_THROWS_AS(validateTMesh(xs, ys, {{0, 6, 0, 6}, {2, 4, 2, 4}}), TMeshError);
  // gap
  CHECK_THROWS_AS(validateTMesh(xs, ys, {{0, 3, 0, 6}}), TMeshError);
  CHECK_NOTHROW(validateTMesh(xs, ys, {{0, 3, 0, 6}, {3, 6, 0, 6}}));
}
