#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tsdr/parametric_complex.hpp"

using namespace tsdr;

TEST_CASE("tensor mesh census") {
  TensorMesh m1 = buildTensorMesh({KnotVector::parse("2; 0:3 1/2:1 1:3")});
  CHECK(m1.entities[1].size() == 4u);
  int zero = 0;
  for (const auto& e : m1.entities[1]) zero += e.zeroMeasure;
  CHECK(zero == 2);
  TensorMesh m2 = buildTensorMesh({KnotVector::uniform(1, 2), KnotVector::uniform(1, 2)});
  CHECK(m2.entities[0].size() == 9u);
  CHECK(m2.entities[1].size() == 12u);
  CHECK(m2.entities[2].size() == 4u);
  std::mt19937 rng(5);
  for (int t = 0; t < 10; ++t) {
    const int p1 = 1 + t % 4, p2 = 1 + (t + 1) % 4;
    TensorMesh m = buildTensorMesh({oracle::randomKnotVector(rng, p1, p1), oracle::randomKnotVector(rng, p2, p2)});
    CHECK(m.entities[2].size() + m.entities[0].size() == m.entities[1].size() + 1);
  }
}

TEST_CASE("complex dimensions") {
  DiscreteComplex cx = buildUniformComplex({3, 3, 3}, {4, 4, 4});
  CHECK(cx.spaces[0].size() == 64);
  CHECK(cx.spaces[1].size() == 144);
  CHECK(cx.spaces[2].size() == 108);
  CHECK(cx.spaces[3].size() == 27);
  // lowest order: Nedelec counts on an n^3 grid
  for (int n : {1, 2, 3}) {
    DiscreteComplex c1 = buildUniformComplex({1, 1, 1}, {n + 1, n + 1, n + 1});
    CHECK(c1.spaces[1].size() == 3 * n * (n + 1) * (n + 1));
    CHECK(c1.spaces[2].size() == 3 * n * n * (n + 1));
  }
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> P(1, 4), N(0, 4);
  for (int t = 0; t < 20; ++t) {
    std::vector<int> p{P(rng), P(rng), P(rng)}, n;
    for (int d : p) n.push_back(d + 1 + N(rng));
    DiscreteComplex c = buildUniformComplex(p, n);
    CHECK(c.spaces[0].size() - c.spaces[1].size() + c.spaces[2].size() - c.spaces[3].size() == 1);
  }
  CHECK_THROWS_AS(buildComplex({KnotVector::uniform(0, 3)}), std::invalid_argument);
}

TEST_CASE("operators: d o d = 0, unit entries, structure") {
  DiscreteComplex cx = buildUniformComplex({3, 2, 4}, {5, 4, 6});
  CHECK(isZero(IntMatrix(cx.ops[1] * cx.ops[0])));
  CHECK(isZero(IntMatrix(cx.ops[2] * cx.ops[1])));
  for (const auto& op : cx.ops) CHECK(entriesAreUnit(op));
  const IntMatrix& G = cx.ops[0];
  CHECK(G.rows() == cx.spaces[1].size());
  CHECK(G.cols() == cx.spaces[0].size());
  for (int c = 0; c < G.outerSize(); ++c) CHECK(G.col(c).nonZeros() <= 6);
  // gradient of a constant
  Eigen::VectorXd one = Eigen::VectorXd::Ones(cx.spaces[0].size());
  CHECK((toReal(G) * one).norm() == 0.0);
}

TEST_CASE("exactness ranks") {
  DiscreteComplex cx = buildUniformComplex({3, 3, 3}, {4, 4, 4});
  ExactnessReport r = verifyExactness(cx);
  CHECK(r.pass());
  CHECK(r.ranks[0] == 63);
  CHECK(r.ranks[2] == 27);
  CHECK(cx.spaces[2].size() - r.ranks[2] == 2 * 64 - 3 * 16 + 1);
}

TEST_CASE("boundary restriction") {
  DiscreteComplex c1 = buildUniformComplex({2}, {5});
  CHECK(restrictBoundary(c1, allFaces(1)).spaces[0].size() == 3);
  DiscreteComplex c3 = buildUniformComplex({2, 3, 2}, {4, 5, 4});
  DiscreteComplex r = restrictBoundary(c3, allFaces(3));
  ExactnessReport rep = verifyExactness(r);
  CHECK(rep.pass());
  CHECK(rep.ranks[2] == r.spaces[3].size() - 1);
  DiscreteComplex same = restrictBoundary(c3, {});
  for (int k = 0; k < 4; ++k) CHECK(same.spaces[k].size() == c3.spaces[k].size());
  for (int k = 0; k < 3; ++k) CHECK(sameEntries(same.ops[k], c3.ops[k]));
}

TEST_CASE("evalField: partition of unity and the two gradient paths") {
  DiscreteComplex cx = buildUniformComplex({3, 2}, {6, 5});
  const FormSpace& X0 = cx.spaces[0];
  Eigen::VectorXd one = Eigen::VectorXd::Ones(X0.size());
  CHECK(evalField(X0, one, {0.3, 0.7})[0] == doctest::Approx(1.0));
  Eigen::VectorXd e = Eigen::VectorXd::Zero(X0.size());
  e[7] = 1.0;
  const double z[2] = {0.41, 0.52};
  CHECK(evalField(X0, e, {z[0], z[1]})[0] == doctest::Approx(X0.components[0].eval(7, z)));

  std::mt19937 rng(23);
  std::uniform_real_distribution<double> U(0.02, 0.98), C(-1, 1);
  Eigen::VectorXd c(X0.size());
  for (int i = 0; i < c.size(); ++i) c[i] = C(rng);
  const Eigen::VectorXd g = toReal(cx.ops[0]) * c;
  for (int s = 0; s < 20; ++s) {
    const double x = U(rng), y = U(rng), h = 1e-6;
    const Eigen::VectorXd direct = evalField(cx.spaces[1], g, {x, y});
    const double gx = (evalField(X0, c, {x + h, y})[0] - evalField(X0, c, {x - h, y})[0]) / (2 * h);
    const double gy = (evalField(X0, c, {x, y + h})[0] - evalField(X0, c, {x, y - h})[0]) / (2 * h);
    CHECK(std::abs(direct[0] - gx) <= 1e-7 * std::max(1.0, std::abs(gx)));
    CHECK(std::abs(direct[1] - gy) <= 1e-7 * std::max(1.0, std::abs(gy)));
  }
  // exact derivative against the analytic B-spline derivative instead of FD
  const FormSpace& X1 = cx.spaces[1];
  for (int s = 0; s < 20; ++s) {
    const double zz[2] = {U(rng), U(rng)};
    double grad[2] = {0, 0}, val[2] = {0, 0};
    for (int i = 0; i < X0.size(); ++i) {
      double gi[2];
      X0.components[0].eval(i, zz, gi);
      grad[0] += c[i] * gi[0];
      grad[1] += c[i] * gi[1];
    }
    const Eigen::VectorXd v = evalField(X1, g, {zz[0], zz[1]});
    val[0] = v[0];
    val[1] = v[1];
    CHECK(oracle::relErr(val[0], grad[0]) < 1e-10);
    CHECK(oracle::relErr(val[1], grad[1]) < 1e-10);
  }
}

TEST_CASE("entity correspondence") {
  DiscreteComplex c3 = buildUniformComplex({3, 3, 3}, {5, 5, 5});
  IncidenceReport r3 = entityCorrespondence(c3);
  CHECK(r3.applicable);
  CHECK(r3.cochain);
  CHECK(r3.pass());
  TensorMesh m = buildTensorMesh(c3.kvs);
  CHECK(static_cast<int>(m.entities[1].size()) == c3.spaces[1].size());
  CHECK(sameEntries(c3.ops[0], meshIncidenceForGrad(c3, m)));

  DiscreteComplex c2 = buildUniformComplex({2, 2, 2}, {5, 5, 5});
  IncidenceReport r2 = entityCorrespondence(c2);
  CHECK(r2.applicable);
  CHECK_FALSE(r2.cochain);
  CHECK(r2.pass());
  TensorMesh m2 = buildTensorMesh(c2.kvs);
  int interiorVertices = 0;
  for (const auto& v : m2.entities[0]) {
    bool interior = true;
    // interior: not on the outermost index lines (zero-measure ones count)
    for (int l = 0; l < 3; ++l) interior = interior && v.index[l] > 0 && v.index[l] < m2.lineCount(l) - 1;
    interiorVertices += interior;
  }
  CHECK(interiorVertices == c2.spaces[3].size());

  DiscreteComplex c1 = buildUniformComplex({1, 1}, {4, 3});
  CHECK(entityCorrespondence(c1).pass());
  CHECK_FALSE(entityCorrespondence(buildUniformComplex({2, 3}, {4, 5})).applicable);
}
