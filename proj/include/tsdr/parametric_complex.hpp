#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "tsdr/forms.hpp"
#include "tsdr/linalg.hpp"
#include "tsdr/univariate.hpp"

namespace tsdr {

// Entity of the tensor mesh M: per direction either a line index (direction
// not spanned) or a span index (direction spanned).
struct MeshEntity {
  std::array<int, 3> index{};
  unsigned spans = 0;  // bit l set: the entity extends along direction l
  bool zeroMeasure = false;
};

struct TensorMesh {
  int dim = 0;
  std::vector<KnotVector> kvs;
  std::array<std::vector<Rational>, 3> lines;  // index lines per direction
  // entities[k]: all k-dimensional entities (vertices, edges, faces, cells),
  // ordered by spanned-direction mask then lexicographically (direction 0 fastest).
  std::array<std::vector<MeshEntity>, 4> entities;

  int lineCount(int l) const { return static_cast<int>(lines[l].size()); }
  int spanCount(int l) const { return lineCount(l) - 1; }
  // Position of an entity in entities[k], -1 if absent.
  int find(unsigned spans, const std::array<int, 3>& index) const;
};

TensorMesh buildTensorMesh(const std::vector<KnotVector>& kvs);

// Tensor-product spline space with per-direction scaling.
struct SplineSpace {
  int dim = 0;
  std::array<KnotVector, 3> kv;
  std::array<Scaling, 3> scaling{Scaling::B, Scaling::B, Scaling::B};
  int direction = -1;

  int size() const;
  std::array<int, 3> sizes() const;
  Component toComponent() const;
};

struct DiscreteComplex : Complex {
  std::vector<KnotVector> kvs;                    // degree-p knot vectors per direction
  std::vector<std::vector<SplineSpace>> blocks;   // blocks[k][c]
  std::vector<std::vector<int>> retained;         // retained[k]: indices into the full space
  std::vector<std::pair<int, int>> bcFaces;       // (direction, side) with boundary conditions
};

DiscreteComplex buildComplex(const std::vector<KnotVector>& kvs);
// Uniform knot vectors with n basis functions per direction.
DiscreteComplex buildUniformComplex(const std::vector<int>& degrees, const std::vector<int>& n);
// Operator matrix of the full (unrestricted) complex by Kronecker products of
// the univariate derivative matrices.
IntMatrix diffMatrix(const DiscreteComplex& cx, int k);
// Univariate derivative matrix S_p(Ξ) -> S_{p-1}(Ξ'), from derivativeDecomposition.
IntMatrix univariateDerivative(const KnotVector& kv);

struct ExactnessReport {
  std::vector<int> dims;
  std::vector<int> ranks;  // -1 when skipped
  std::vector<std::pair<std::string, bool>> checks;
  bool skipped = false;
  bool pass() const;
  std::string str() const;
};

// Rank identities of an exact sequence; kernelOfFirst is dim ker(D0) expected
// (1 without boundary conditions), cokernelOfLast is dim coker(D_last).
ExactnessReport verifyExactnessOps(const std::vector<int>& dims, const std::vector<RatMatrix>& ops,
                                   int kernelOfFirst, int cokernelOfLast, bool requireUnit, int rankLimit = 5000);
ExactnessReport verifyExactnessOf(const Complex& cx, int kernelOfFirst, int cokernelOfLast, int rankLimit = 5000);
ExactnessReport verifyExactness(const DiscreteComplex& cx, int rankLimit = 5000);

DiscreteComplex restrictBoundary(const DiscreteComplex& cx, const std::vector<std::pair<int, int>>& faces);
std::vector<std::pair<int, int>> allFaces(int dim);

struct IncidenceReport {
  bool applicable = false;
  bool cochain = false;  // odd degree: cochain complex of M; even: chain complex of interior entities
  bool unitEntries = false;
  std::vector<bool> bijections;  // per space
  bool gradMatchesIncidence = false;
  std::string note;
  bool pass() const;
};

IncidenceReport entityCorrespondence(const DiscreteComplex& cx);
// Independently computed incidence used by entityCorrespondence: edge-vertex
// (odd) or transposed cell-face boundary restricted to interior faces (even),
// expressed in the anchor numbering of X0/X1.
IntMatrix meshIncidenceForGrad(const DiscreteComplex& cx, const TensorMesh& mesh);

}  // namespace tsdr
