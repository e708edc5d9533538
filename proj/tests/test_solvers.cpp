#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "tsdr/assembly.hpp"
#include "tsdr/problem.hpp"
#include "tsdr/solvers.hpp"
#include "tsdr/tspline_complex.hpp"

using namespace tsdr;

namespace {

RealMatrix sparse(const Eigen::MatrixXd& A) { return A.sparseView(); }

RealMatrix restrict(const RealMatrix& A, const std::vector<int>& idx) {
  const Eigen::MatrixXd D(A);
  Eigen::MatrixXd R(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) R(i, j) = D(idx[i], idx[j]);
  return sparse(R);
}

// Rot-rot and mass on (0,a) x (0,b) with tangential Dirichlet conditions.
std::pair<RealMatrix, RealMatrix> rectangleMaxwell(double a, double b, int p, int n) {
  const Discretization D = tensorDiscretization({KnotVector::uniform(p, n), KnotVector::uniform(p, n)});
  const GeometryMap F = GeometryMap::box({0, 0}, {a, b});
  const auto idx = freeIndices(D, 1, {0, 1, 2, 3});
  return {restrict(assembleMatrix(D, 1, F, Operator::Stiffness), idx),
          restrict(assembleMatrix(D, 1, F, Operator::Mass), idx)};
}

}  // namespace

TEST_CASE("dense eigensolver: zero count and ordering") {
  Eigen::VectorXd k(5);
  k << 0, 5, 0, 2, 3;
  EigenOptions opt;
  opt.count = 10;
  const EigenResult r = solveDenseEig(Eigen::MatrixXd(k.asDiagonal()), Eigen::MatrixXd::Identity(5, 5), opt);
  CHECK(r.zeroCount == 2);
  CHECK(r.eigenvalues == std::vector<double>{2, 3, 5});
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(5, 5);
  M(2, 2) = -1;
  CHECK_THROWS_AS(solveDenseEig(Eigen::MatrixXd(k.asDiagonal()), M, opt), NumericalError);
  CHECK_THROWS_AS(solveGeneralizedEig(RealMatrix(3, 3), RealMatrix(2, 2), opt), std::invalid_argument);
}

TEST_CASE("Maxwell eigenvalues on the square: spectrum, residuals, permutations") {
  const auto [K, M] = rectangleMaxwell(M_PI, M_PI, 2, 8);
  EigenOptions opt;
  opt.count = 8;
  opt.vectors = true;
  const EigenResult r = solveGeneralizedEig(K, M, opt);
  const double exact[] = {1, 1, 2, 4, 4, 5, 5, 8};
  for (int i = 0; i < 8; ++i) CHECK(r.eigenvalues[i] == doctest::Approx(exact[i]).epsilon(1e-3));
  CHECK(r.maxResidual <= 1e-8);
  // null space: gradients of the (10 - 2)^2 interior X0 functions
  CHECK(r.zeroCount == 64);
  // random symmetric permutation
  std::vector<int> perm(K.rows());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
  Eigen::PermutationMatrix<Eigen::Dynamic> P(Eigen::Map<Eigen::VectorXi>(perm.data(), perm.size()));
  const Eigen::MatrixXd Kp = P * Eigen::MatrixXd(K) * P.transpose(), Mp = P * Eigen::MatrixXd(M) * P.transpose();
  const EigenResult rp = solveGeneralizedEig(sparse(Kp), sparse(Mp), opt);
  CHECK(rp.zeroCount == r.zeroCount);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(rp.eigenvalues[i] - r.eigenvalues[i]) <= 1e-10 * r.eigenvalues[i]);
  // shift-invert agrees with the dense path
  EigenOptions si = opt;
  si.shift = 0.5;
  si.count = 4;
  const EigenResult rs = solveGeneralizedEig(K, M, si);
  REQUIRE(rs.eigenvalues.size() == 4u);
  for (int i = 0; i < 4; ++i) CHECK(rs.eigenvalues[i] == doctest::Approx(r.eigenvalues[i]).epsilon(1e-9));
}

TEST_CASE("square benchmark: zero count is the gradient image") {
  const ProblemSpec ps = loadProblem(std::string(TSDR_FIXTURES) + "/square_p3.json");
  const EigRun run = runEig(ps);
  CHECK(run.dofs == 52);
  CHECK(run.eig.zeroCount == 21);
  const double table[] = {1.00001, 1.00005, 2.00016, 4.00396, 4.03882};
  for (int i = 0; i < 5; ++i) CHECK(run.eig.eigenvalues[i] == doctest::Approx(table[i]).epsilon(1e-5));
  const TMesh2D m = TMesh2D::fromCells(buildCellMesh(*ps.mesh, 3), 3, 3);
  const TsplineComplex cx = restrictTBoundary(buildTsplineComplex(m, 3, 3), allFaces(2));
  CHECK(cx.spaces[1].size() == run.dofs);
  CHECK(exactRank(cx.exactOps[0]) == run.eig.zeroCount);
}

TEST_CASE("linear solves") {
  const auto [K, M] = rectangleMaxwell(1.0, 1.0, 2, 3);
  const RealMatrix A = K + M;
  CHECK(solveLinear(A, Eigen::VectorXd::Zero(A.rows())).norm() == 0.0);
  Eigen::VectorXd x(A.rows());
  for (int i = 0; i < x.size(); ++i) x[i] = std::sin(i + 1.0);
  const Eigen::VectorXd b = A * x;
  CHECK((solveLinear(A, b) - x).norm() < 1e-10 * x.norm());
  RealMatrix S(2, 2);
  S.insert(0, 0) = 1.0;
  CHECK_THROWS_AS(solveLinear(S, Eigen::Vector2d(1, 1)), NumericalError);
  ComplexMatrix C = A.cast<std::complex<double>>();
  const Eigen::VectorXcd bc = C * x.cast<std::complex<double>>();
  CHECK((solveLinear(C, bc) - x.cast<std::complex<double>>()).norm() < 1e-10 * x.norm());
}

TEST_CASE("gradient source is recovered exactly") {
  const Discretization D = tensorDiscretization({KnotVector::uniform(3, 3), KnotVector::uniform(3, 2)});
  const GeometryMap F = GeometryMap::box({0, 0}, {1, 1});
  FieldFn f = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(2);
    g << 2 * x[0] * x[1], x[0] * x[0] + 3 * x[1] * x[1];
    return g;
  };
  FieldFn zero = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); };
  const RealMatrix A = assembleMatrix(D, 1, F, Operator::Stiffness) + assembleMatrix(D, 1, F, Operator::Mass);
  const Eigen::VectorXd u = solveLinear(A, assembleLoad(D, 1, F, f));
  const ErrorParts e = errorIntegrals(D, 1, F, u, f, zero);
  CHECK(std::sqrt(e.value2 + e.deriv2) < 1e-11 * std::sqrt(e.exactValue2));
}

TEST_CASE("port modes") {
  {
    const auto [K, M] = rectangleMaxwell(M_PI, M_PI, 3, 8);
    const PortMode pm = solvePortMode(K, M);
    CHECK(std::abs(pm.k10sq - 1.0) < 1e-6);
    CHECK(pm.nextEigenvalue == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(pm.e.dot(M * pm.e) == doctest::Approx(1.0).epsilon(1e-12));
    const PortMode again = solvePortMode(K, M);
    CHECK((again.e - pm.e).norm() == 0.0);
  }
  {
    const double a = 2.0, b = 1.0;
    const auto [K, M] = rectangleMaxwell(a, b, 3, 8);
    const PortMode pm = solvePortMode(K, M);
    CHECK(pm.k10sq == doctest::Approx(std::pow(M_PI / a, 2)).epsilon(1e-6));
    CHECK(pm.nextEigenvalue == doctest::Approx(std::pow(2 * M_PI / a, 2)).epsilon(1e-5));
    int first = 0;
    while (std::abs(pm.e[first]) <= 1e-8 * pm.e.cwiseAbs().maxCoeff()) ++first;
    CHECK(pm.e[first] > 0);
  }
  CHECK_THROWS_AS(solvePortMode(RealMatrix(sparse(Eigen::MatrixXd::Zero(3, 3))), sparse(Eigen::MatrixXd::Identity(3, 3))),
                  NumericalError);
}

TEST_CASE("scattering coefficients") {
  const std::complex<double> I(0, 1);
  const double beta = 1.3, z1 = 0.2, z2 = 2.5;
  const Scattering zero = scatteringCoefficients(0.0, 0.0, 2.0, beta, z1, z2);
  CHECK(std::abs(zero.R + std::exp(-2.0 * I * beta * z1)) < 1e-15);
  CHECK(std::abs(zero.T) == 0.0);
  // pure incident wave e^{-i beta z} e10: no reflection, unit transmission
  const double nrm = 0.7;
  const Scattering pass = scatteringCoefficients(std::exp(-I * beta * z1) * nrm, std::exp(-I * beta * z2) * nrm, nrm,
                                                 beta, z1, z2);
  CHECK(std::abs(pass.R) < 1e-15);
  CHECK(std::abs(pass.T - 1.0) < 1e-15);
  CHECK_THROWS_AS(scatteringCoefficients(1.0, 1.0, 0.0, beta, z1, z2), NumericalError);
}
