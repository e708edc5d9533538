#include <doctest.h>

#include <algorithm>
#include <random>

#include <Eigen/Dense>

#include "tsdr/multipatch.hpp"

using namespace tsdr;

namespace {

Patch boxPatch(const std::vector<double>& lo, const std::vector<double>& hi, int p, const std::vector<int>& n) {
  std::vector<KnotVector> kvs;
  for (int e : n) kvs.push_back(KnotVector::uniform(p, e));
  return {GeometryMap::box(lo, hi), tensorDiscretization(kvs)};
}

PatchSet twoCubes(int ny1) {
  PatchSet ps;
  ps.dim = 3;
  ps.patches.push_back(boxPatch({0, 0, 0}, {1, 1, 1}, 2, {2, 2, 2}));
  ps.patches.push_back(boxPatch({1, 0, 0}, {2, 1, 1}, 2, {2, ny1, 2}));
  ps.interfaces.push_back({{0, faceIndex(0, 1)}, {1, faceIndex(0, 0)}, {}, {}});
  return ps;
}

// L-shape of three unit squares; order selects the patch numbering.
PatchSet threePatchL(bool swapped) {
  PatchSet ps;
  ps.dim = 2;
  const Patch c = boxPatch({0, 0}, {1, 1}, 3, {2, 3});
  const Patch r = boxPatch({1, 0}, {2, 1}, 3, {2, 3});
  const Patch u = boxPatch({0, 1}, {1, 2}, 3, {2, 2});
  ps.patches = swapped ? std::vector<Patch>{u, r, c} : std::vector<Patch>{c, r, u};
  const int ic = swapped ? 2 : 0, iu = swapped ? 0 : 2;
  ps.interfaces.push_back({{ic, faceIndex(0, 1)}, {1, faceIndex(0, 0)}, {}, {}});
  ps.interfaces.push_back({{ic, faceIndex(1, 1)}, {iu, faceIndex(1, 0)}, {}, {}});
  return ps;
}

// Square [1,2]x[0,1] parametrized with y reversed.
Patch flippedSquare(int p, int n) {
  Eigen::MatrixXd cp(4, 2);
  cp << 1, 1, 2, 1, 1, 0, 2, 0;
  const KnotVector k1 = KnotVector::uniform(1, 1);
  return {GeometryMap({k1, k1}, cp), tensorDiscretization({KnotVector::uniform(p, n), KnotVector::uniform(p, n)})};
}

int rankOf(const RatMatrix& A) { return exactRank(A, 100000); }

std::vector<double> laplaceSpectrum(const PatchSet& ps) {
  const InterfaceGlue g = buildGlue(ps);
  auto mat = [&](Operator op) {
    return Eigen::MatrixXd(globalMatrix(ps, g, 0, [&](int k) {
      return assembleMatrix(ps.patches[k].disc, 0, ps.patches[k].geometry, op);
    }));
  };
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(mat(Operator::Stiffness), mat(Operator::Mass));
  const Eigen::VectorXd ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace

TEST_CASE("two conforming cubes") {
  const PatchSet ps = twoCubes(2);
  const auto v = checkConformity(ps);
  REQUIRE(v.size() == 1);
  CHECK(v[0].ok);
  CHECK(v[0].fullMatching);
  CHECK(v[0].geometryGap < 1e-14);
  const InterfaceGlue g = buildGlue(ps);
  // 4^3 functions per patch, trace spaces on x = const: 4x4 scalar, 3x4 + 4x3 tangential, 3x3 normal
  CHECK(g.spaces[0].globalSize == 2 * 64 - 16);
  CHECK(g.spaces[1].globalSize == 2 * 3 * 48 - 24);
  CHECK(g.spaces[2].globalSize == 2 * 3 * 36 - 9);
  CHECK(g.spaces[3].globalSize == 2 * 27);
  for (int k = 0; k < 2; ++k) CHECK((globalOperator(ps, g, k + 1) * globalOperator(ps, g, k)).isZero());
  CHECK(ps.boundaryFaces().size() == 10u);
}

TEST_CASE("h-refined neighbour is non-conforming") {
  const auto v = checkConformity(twoCubes(3));
  REQUIRE(v.size() == 1);
  CHECK_FALSE(v[0].ok);
  CHECK_FALSE(v[0].fullMatching);
  CHECK_FALSE(v[0].message.empty());
}

TEST_CASE("three-patch L: global complex") {
  const PatchSet ps = threePatchL(false);
  for (const auto& v : checkConformity(ps)) CHECK(v.ok);
  const InterfaceGlue g = buildGlue(ps);
  const RatMatrix D0 = globalOperator(ps, g, 0), D1 = globalOperator(ps, g, 1);
  CHECK((D1 * D0).isZero());
  const int n0 = g.spaces[0].globalSize, n2 = g.spaces[2].globalSize;
  const int r0 = rankOf(D0), r1 = rankOf(D1);
  CHECK(r0 == n0 - 1);
  CHECK(g.spaces[1].globalSize - r1 == r0);
  CHECK(r1 == n2);
  // 30 + 30 + 25 functions, 6 shared on x = 1 and 5 on y = 1
  CHECK(n0 == 74);
}

TEST_CASE("traces agree across interfaces") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> U(0.0, 1.0), C(-1.0, 1.0);
  std::vector<PatchSet> sets{threePatchL(false)};
  PatchSet flipped;
  flipped.dim = 2;
  flipped.patches.push_back(boxPatch({0, 0}, {1, 1}, 2, {3, 3}));
  flipped.patches.push_back(flippedSquare(2, 3));
  flipped.interfaces.push_back({{0, faceIndex(0, 1)}, {1, faceIndex(0, 0)}, {}, {1}});
  sets.push_back(flipped);
  for (const PatchSet& ps : sets) {
    for (const auto& v : checkConformity(ps)) CHECK(v.ok);
    const InterfaceGlue g = buildGlue(ps);
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd u(g.spaces[k].globalSize);
      for (auto& x : u) x = C(rng);
      for (const auto& itf : ps.interfaces) {
        const Patch& A = ps.patches[itf.a[0]];
        const Patch& B = ps.patches[itf.b[0]];
        const Eigen::VectorXd ua = patchCoefficients(g, k, itf.a[0], u), ub = patchCoefficients(g, k, itf.b[0], u);
        for (int s = 0; s < 20; ++s) {
          const std::vector<double> t{U(rng)};
          const Eigen::VectorXd za = interfacePoint(itf, 2, t, false), zb = interfacePoint(itf, 2, t, true);
          CHECK((A.geometry.eval(za) - B.geometry.eval(zb)).norm() < 1e-14);
          const Eigen::VectorXd fa = evalPhysicalField(A.disc, k, A.geometry, ua, {za[0], za[1], 0.0});
          const Eigen::VectorXd fb = evalPhysicalField(B.disc, k, B.geometry, ub, {zb[0], zb[1], 0.0});
          if (k == 0) {
            CHECK(std::abs(fa[0] - fb[0]) < 1e-12);
          } else {
            // tangential component along the interface line
            const int d = itf.a[1] / 2;
            Eigen::MatrixXd J = A.geometry.jacobian(za);
            const Eigen::VectorXd tan = J.col(1 - d).normalized();
            CHECK(std::abs(tan.dot(fa) - tan.dot(fb)) < 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("patch numbering does not change the global problem") {
  const PatchSet a = threePatchL(false), b = threePatchL(true);
  const InterfaceGlue ga = buildGlue(a), gb = buildGlue(b);
  for (int k = 0; k < 3; ++k) CHECK(ga.spaces[k].globalSize == gb.spaces[k].globalSize);
  const auto sa = laplaceSpectrum(a), sb = laplaceSpectrum(b);
  REQUIRE(sa.size() == sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i] == doctest::Approx(sb[i]).epsilon(1e-9).scale(1.0));
  CHECK(std::abs(sa[0]) < 1e-10);
  CHECK(sa[1] > 1e-3);
}
