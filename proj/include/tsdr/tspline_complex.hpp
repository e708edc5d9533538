#pragma once

#include <utility>
#include <vector>

#include "tsdr/forms.hpp"
#include "tsdr/parametric_complex.hpp"
#include "tsdr/tmesh.hpp"

namespace tsdr {

// Meshes carrying the lower-degree spaces: M11 for degree (p1-1, p2),
// M12 for (p1, p2-1), M2 for (p1-1, p2-1).
struct TComplexMeshes {
  TMesh2D M0, M11, M12, M2;
};

// Mesh for the degree lowered in x (dx) and/or y (dy).
TMesh2D derivedMesh(const TMesh2D& m, int p1, int p2, bool dx, bool dy);
TComplexMeshes deriveComplexMeshes(const TMesh2D& m, int p1, int p2);

struct TsplineComplex : Complex {
  TMesh2D mesh;
  int p1 = 0, p2 = 0;
  bool rotated = false;  // H1 -> H(div) -> L2 via rotVec/div
  TComplexMeshes meshes;
  std::vector<std::vector<int>> retained;
  std::vector<std::pair<int, int>> bcFaces;
  // Exact operators; equal to `ops` when every derivative is a single
  // target function (lookup), otherwise obtained by refinement and `ops`
  // is left empty.
  std::vector<RatMatrix> exactOps;
  bool lookup = true;
};

// Y0 (B,B) on M0, Y1 blocks (D,B) on M11 and (B,D) on M12, Y2 (D,D) on M2.
TsplineComplex buildTsplineComplex(const TMesh2D& m, int p1, int p2, bool rotated = false);
TsplineComplex restrictTBoundary(const TsplineComplex& cx, const std::vector<std::pair<int, int>>& faces);
// Operator by local-knot-vector lookup on the unrestricted spaces; throws
// naming the anchor when a derivative is not a single target function.
IntMatrix tDiffMatrix(const TsplineComplex& cx, int k);
ExactnessReport verifyTExactness(const TsplineComplex& cx, int rankLimit = 5000);

// Whether every anchor of every space has a positive-length local knot
// vector in each direction (the construction throws otherwise).
bool tsplineSpacesWellDefined(const TMesh2D& m, int p1, int p2, std::string* why = nullptr);

}  // namespace tsdr
