#include <doctest.h>

#include <Eigen/Dense>

#include "tsdr/assembly.hpp"
#include "tsdr/problem.hpp"

using namespace tsdr;

namespace {

GeometryMap warped2D() {
  const KnotVector k = KnotVector::uniform(2, 2);
  const int n = k.dim();
  const auto g = grevilleSites(k);
  Eigen::MatrixXd cp(n * n, 2);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) {
      const double x = g[a].toDouble(), y = g[b].toDouble();
      cp.row(a + n * b) << 2 * x + 0.3 * y * y, y + 0.2 * x * y;
    }
  return GeometryMap({k, k}, cp);
}

Eigen::MatrixXd dense(const RealMatrix& A) { return Eigen::MatrixXd(A); }

bool symmetric(const RealMatrix& A) {
  const Eigen::MatrixXd D = dense(A);
  return (D - D.transpose()).norm() <= 1e-12 * std::max(1.0, D.norm());
}

TMesh2D squareMesh() {
  const ProblemSpec ps = loadProblem(std::string(TSDR_FIXTURES) + "/square_p3.json");
  return TMesh2D::fromCells(buildCellMesh(*ps.mesh, 3), 3, 3);
}

}  // namespace

TEST_CASE("1D quadratic stiffness and mass by hand") {
  const Discretization D = tensorDiscretization({KnotVector::fromKnots(2, {0, 0, 0, Rational(1, 2), 1, 1, 1})});
  const GeometryMap F = GeometryMap::box({0}, {1});
  const Eigen::MatrixXd K = dense(assembleMatrix(D, 0, F, Operator::Stiffness));
  Eigen::MatrixXd want(4, 4);
  want << 8, -6, -2, 0, -6, 8, 0, -2, -2, 0, 8, -6, 0, -2, -6, 8;
  want /= 3.0;
  CHECK((K - want).norm() < 1e-13);
  const Eigen::MatrixXd M = dense(assembleMatrix(D, 0, F, Operator::Mass));
  const Eigen::Vector4d rows(1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6);
  CHECK((M.rowwise().sum() - rows).norm() < 1e-14);
  // the same on [0, 2]: stiffness halves, mass doubles
  const GeometryMap F2 = GeometryMap::box({0}, {2});
  CHECK((dense(assembleMatrix(D, 0, F2, Operator::Stiffness)) - want / 2).norm() < 1e-13);
  CHECK((dense(assembleMatrix(D, 0, F2, Operator::Mass)) - 2 * M).norm() < 1e-13);
  CHECK(freeIndices(D, 0, {0, 1}).size() == 2);
}

TEST_CASE("mass matrices on a curved patch") {
  const GeometryMap F = warped2D();
  const Discretization D = tensorDiscretization({KnotVector::uniform(3, 3), KnotVector::uniform(3, 4)});
  // area from the Jacobian determinant
  const auto q = gaussLegendre(10);
  double area = 0;
  for (std::size_t a = 0; a < q.nodes.size(); ++a)
    for (std::size_t b = 0; b < q.nodes.size(); ++b) {
      Eigen::VectorXd z(2);
      z << q.nodes[a], q.nodes[b];
      area += q.weights[a] * q.weights[b] * std::abs(F.jacobian(z).determinant());
    }
  for (int k = 0; k < 3; ++k) {
    const RealMatrix M = assembleMatrix(D, k, F, Operator::Mass);
    CHECK(M.rows() == D.X[k].size());
    CHECK(symmetric(M));
    Eigen::LLT<Eigen::MatrixXd> llt(dense(M));
    CHECK(llt.info() == Eigen::Success);
  }
  CHECK(dense(assembleMatrix(D, 0, F, Operator::Mass)).sum() == doctest::Approx(area).epsilon(1e-12));
  // load of the constant one equals the mass row sums
  FieldFn one = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Ones(1); };
  const Eigen::VectorXd b = assembleLoad(D, 0, F, one);
  CHECK((b - dense(assembleMatrix(D, 0, F, Operator::Mass)).rowwise().sum()).norm() < 1e-13);
}

TEST_CASE("stiffness kernels contain the image of the previous operator") {
  const GeometryMap F = warped2D();
  std::vector<Discretization> Ds{tensorDiscretization({KnotVector::uniform(2, 4), KnotVector::uniform(2, 3)}),
                                 tsplineDiscretization2D(squareMesh(), 3)};
  for (const Discretization& D : Ds) {
    for (int k = 0; k < 2; ++k) {
      const RealMatrix K = assembleMatrix(D, k, F, Operator::Stiffness);
      CHECK(symmetric(K));
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(K));
      CHECK(es.eigenvalues()[0] > -1e-10 * es.eigenvalues().maxCoeff());
      if (k == 1) {
        const RealMatrix G = D.ops[0].toReal();
        CHECK(Eigen::MatrixXd(K * G).norm() < 1e-10 * dense(K).norm());
      }
    }
    // grad-grad kernel is the constants
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(D.X[0].size());
    CHECK((assembleMatrix(D, 0, F, Operator::Stiffness) * ones).norm() < 1e-10);
  }
}

TEST_CASE("3D tensor-product T-spline spaces") {
  const TMesh2D m = squareMesh();
  const KnotVector kz = KnotVector::uniform(3, 2);
  const Discretization D2 = tsplineDiscretization2D(m, 3);
  const Discretization D3 = tsplineDiscretization3D(m, 3, kz);
  const int n = kz.dim();
  const int y0 = D2.X[0].size(), y1 = D2.X[1].size(), y2 = D2.X[2].size();
  CHECK(D3.X[0].size() == y0 * n);
  CHECK(D3.X[1].size() == y1 * n + y0 * (n - 1));
  CHECK(D3.X[2].size() == y2 * n + y1 * (n - 1));
  CHECK(D3.X[3].size() == y2 * (n - 1));
  CHECK((D3.ops[1] * D3.ops[0]).isZero());
  CHECK((D3.ops[2] * D3.ops[1]).isZero());
  const GeometryMap F = GeometryMap::extrude(warped2D(), 0.0, 0.5);
  const RealMatrix K = assembleMatrix(D3, 1, F, Operator::Stiffness);
  CHECK(symmetric(K));
  CHECK(Eigen::MatrixXd(K * D3.ops[0].toReal()).norm() < 1e-10 * dense(K).norm());
  const RealMatrix Kd = assembleMatrix(D3, 2, F, Operator::Stiffness);
  CHECK(Eigen::MatrixXd(Kd * D3.ops[1].toReal()).norm() < 1e-10 * dense(Kd).norm());
}

TEST_CASE("L2 projection reproduces the spline space") {
  const GeometryMap F = GeometryMap::box({0, 0}, {1, 2});
  const Discretization D = tensorDiscretization({KnotVector::uniform(3, 3), KnotVector::uniform(3, 3)});
  // x^2 y is in X0; (y, x^2) is in X1 on the affine map
  FieldFn f0 = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x[0] * x[0] * x[1]); };
  FieldFn g0 = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(2);
    g << 2 * x[0] * x[1], x[0] * x[0];
    return g;
  };
  FieldFn f1 = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd v(2);
    v << x[1], x[0] * x[0];
    return v;
  };
  FieldFn r1 = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, 2 * x[0] - 1.0); };
  struct Case {
    int k;
    FieldFn f, d;
  };
  for (const Case& c : {Case{0, f0, g0}, Case{1, f1, r1}}) {
    const RealMatrix M = assembleMatrix(D, c.k, F, Operator::Mass);
    const Eigen::VectorXd u = Eigen::LLT<Eigen::MatrixXd>(dense(M)).solve(assembleLoad(D, c.k, F, c.f));
    const ErrorParts e = errorIntegrals(D, c.k, F, u, c.f, c.d);
    CHECK(e.value2 < 1e-24 * e.exactValue2);
    CHECK(e.deriv2 < 1e-20 * e.exactDeriv2);
    const std::array<double, 3> z{0.3, 0.7, 0.0};
    CHECK((evalPhysicalField(D, c.k, F, u, z) - c.f(F.eval(Eigen::Vector2d(0.3, 0.7)))).norm() < 1e-11);
  }
}

TEST_CASE("free indices under boundary conditions") {
  const Discretization D = tensorDiscretization({KnotVector::uniform(2, 3), KnotVector::uniform(2, 4)});
  const int all[] = {0, 1, 2, 3};
  const std::vector<int> faces(all, all + 4);
  // 5 x 6 functions, interior 3 x 4
  CHECK(freeIndices(D, 0, faces).size() == 12u);
  // tangential traces: x-directed (4 x 6) lose the y ends, y-directed (5 x 5) the x ends
  CHECK(freeIndices(D, 1, faces).size() == 4u * 4 + 3u * 5);
  CHECK(freeIndices(D, 2, faces).size() == static_cast<std::size_t>(D.X[2].size()));
  CHECK(freeIndices(D, 0, {}).size() == static_cast<std::size_t>(D.X[0].size()));
}
