#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsdr/linalg.hpp"
#include "tsdr/univariate.hpp"

namespace tsdr {

// Function space kind, fixing the push-forward and the trace that is glued.
enum class FormKind { H1, Hcurl, Hdiv, L2 };

std::string toString(FormKind k);

using LocalKVTuple = std::array<LocalKnotVector, 3>;

// One scalar block of a form space: every basis function is a product of
// univariate functions given by local knot vectors and scalings.
struct Component {
  int dim = 0;
  int direction = -1;  // Cartesian unit vector carried by the block, -1 for scalars
  std::array<int, 3> degree{};
  std::array<Scaling, 3> scaling{Scaling::B, Scaling::B, Scaling::B};
  std::vector<LocalKVTuple> functions;
  // Anchor position in doubled index coordinates of the owning mesh (optional).
  std::vector<std::array<int, 3>> anchors;

  int size() const { return static_cast<int>(functions.size()); }
  // Support box of function i in parametric coordinates.
  std::array<std::pair<Rational, Rational>, 3> support(int i) const;
  // Value and partial derivatives (grad[0..dim-1]).
  double eval(int i, const double* zeta, double* grad = nullptr) const;
};

struct FormSpace {
  int dim = 0;
  FormKind kind = FormKind::H1;
  std::vector<Component> components;

  int size() const;
  int offset(int c) const;
  int valueSize() const { return (kind == FormKind::Hcurl || kind == FormKind::Hdiv) ? dim : 1; }
  // (component, local index) of a global index.
  std::pair<int, int> locate(int global) const;
};

// Whether basis function i of component c has a nonzero trace of the kind
// glued/constrained for this space on face (dir, side).
bool hasTrace(const FormSpace& V, int c, int i, int dir, int side);
// Whether the univariate factor is nonzero at 0 (side 0) or 1 (side 1).
bool touchesBoundary(const LocalKnotVector& kv, int side);

// Basis functions kept after removing those with a nonzero trace on the faces
// (dir, side) listed; returns the retained global indices in order.
std::vector<int> interiorIndices(const FormSpace& V, const std::vector<std::pair<int, int>>& faces);
FormSpace subspace(const FormSpace& V, const std::vector<int>& keep);

// Parametric field value: scalar (size 1) or vector (size dim).
Eigen::VectorXd evalField(const FormSpace& V, const Eigen::VectorXd& coeffs, const std::vector<double>& zeta);

// Which partial derivative maps which source block to which target block.
struct DiffRule {
  int src = 0;
  int tgt = 0;
  int dir = 0;
  int sign = 1;
};
// k-th exterior derivative in dimension d (vector proxies: grad, curl/rot, div).
// `starred` selects the 2D rotated sequence rotVec/div.
std::vector<DiffRule> diffRules(int dim, int k, bool starred = false);

// Exact derivative matrix by local-knot-vector matching: every produced
// (Ξ⁻ or Ξ⁺) tuple must be a basis function of the target block.
IntMatrix derivativeByLookup(const FormSpace& src, const FormSpace& tgt, const std::vector<DiffRule>& rules);

// Same operator for spaces where a derivative is a combination of several
// target functions: the produced tuples are refined by knot insertion until
// they match target functions. Exact rational coefficients.
RatMatrix derivativeByRefinement(const FormSpace& src, const FormSpace& tgt, const std::vector<DiffRule>& rules);

// A sequence of spaces linked by operator matrices.
struct Complex {
  int dim = 0;
  std::vector<FormSpace> spaces;
  std::vector<IntMatrix> ops;
};

}  // namespace tsdr
