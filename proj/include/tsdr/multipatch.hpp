#pragma once

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tsdr/assembly.hpp"
#include "tsdr/geometry.hpp"
#include "tsdr/linalg.hpp"

namespace tsdr {

struct Patch {
  GeometryMap geometry;
  Discretization disc;
};

// Face `a` of one patch glued to face `b` of another. Tangential direction t
// of face a (other directions in increasing order) maps to tangential slot
// perm[t] of face b, reversed when flip[t].
struct PatchInterface {
  std::array<int, 2> a{};  // {patch, face}
  std::array<int, 2> b{};
  std::vector<int> perm;   // empty: identity
  std::vector<int> flip;   // empty: no flips
};

struct PatchSet {
  int dim = 0;
  std::vector<Patch> patches;
  std::vector<PatchInterface> interfaces;

  // (patch, face) pairs not covered by an interface.
  std::vector<std::array<int, 2>> boundaryFaces() const;
};

struct ConformityVerdict {
  int interface = 0;
  bool ok = true;
  bool fullMatching = true;   // trace bases match one-to-one in every glued space
  double geometryGap = 0.0;   // max sampled distance of the two images
  std::string message;
};

std::vector<ConformityVerdict> checkConformity(const PatchSet& ps);

// Local-to-global map of one space: for every patch and local index the
// global index and sign.
struct SpaceGlue {
  int globalSize = 0;
  std::vector<std::vector<std::pair<int, int>>> local;  // [patch][local] -> (global, sign)
};

// Spaces 0..dim-1 glued through traces, the last space concatenated.
struct InterfaceGlue {
  std::vector<SpaceGlue> spaces;
};

InterfaceGlue buildGlue(const PatchSet& ps);

// Sum over patches of P_k^T A_k P_k.
RealMatrix globalMatrix(const PatchSet& ps, const InterfaceGlue& glue, int k,
                        const std::function<RealMatrix(int patch)>& patchMatrix);
Eigen::VectorXd globalVector(const PatchSet& ps, const InterfaceGlue& glue, int k,
                             const std::function<Eigen::VectorXd(int patch)>& patchVector);
// Patch coefficients of a global vector.
Eigen::VectorXd patchCoefficients(const InterfaceGlue& glue, int k, int patch, const Eigen::VectorXd& global);
// Global operator X^k -> X^{k+1} from the patch operators.
RatMatrix globalOperator(const PatchSet& ps, const InterfaceGlue& glue, int k);

// Global indices without a constrained trace on the listed (patch, face) pairs.
std::vector<int> globalFreeIndices(const PatchSet& ps, const InterfaceGlue& glue, int k,
                                   const std::vector<std::array<int, 2>>& dirichlet);

// Parametric point of face b matching a point of face a (face coordinates s).
Eigen::VectorXd interfacePoint(const PatchInterface& itf, int dim, const std::vector<double>& s, bool onB);

}  // namespace tsdr
