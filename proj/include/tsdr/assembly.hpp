#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tsdr/forms.hpp"
#include "tsdr/geometry.hpp"
#include "tsdr/tmesh.hpp"
#include "tsdr/tspline_complex.hpp"

namespace tsdr {

// Parametric box on which every basis function is a polynomial.
struct Box {
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
};

// Discrete spaces X0..Xd of one patch on (0,1)^d with their element mesh.
struct Discretization {
  int dim = 0;
  int degree = 0;
  std::string family;  // "bspline" or "tspline"
  std::vector<FormSpace> X;
  std::vector<Box> elements;
  int quadPoints = 0;  // Gauss points per direction
  std::vector<RatMatrix> ops;  // exact X^k -> X^{k+1} operators
};

Discretization tensorDiscretization(const std::vector<KnotVector>& kvs);
// 2D T-spline spaces Y0, Y1, Y2 on the extended mesh.
Discretization tsplineDiscretization2D(const TMesh2D& m, int p);
// 3D spaces by tensor product of the 2D T-spline complex with S_p(kz), S_{p-1}(kz').
Discretization tsplineDiscretization3D(const TMesh2D& m, int p, const KnotVector& kz);
// Product of a 2D block with the univariate space (B-scaled) or its derived space (D-scaled).
Component productComponent(const Component& c2, const KnotVector& kz, bool derived, int direction);

// Physical value and derivative (grad, curl/rot, div) of basis functions at a point.
struct PushedBasis {
  std::vector<int> index;    // global indices in the space
  Eigen::MatrixXd value;     // valueSize x n (physical)
  Eigen::MatrixXd deriv;     // derivSize x n: grad (H1), curl (3D Hcurl), rot (2D Hcurl), div (Hdiv)
};

enum class Operator { Mass, Stiffness };
enum class FaceOperator { TangentialMass, NormalCurl };

// Face index 2*dir + side (side 0: ζ_dir = 0).
inline int faceIndex(int dir, int side) { return 2 * dir + side; }

RealMatrix assembleMatrix(const Discretization& D, int k, const GeometryMap& F, Operator op);
Eigen::VectorXd assembleLoad(const Discretization& D, int k, const GeometryMap& F, const FieldFn& f);
RealMatrix assembleFace(const Discretization& D, int k, const GeometryMap& F, int face, FaceOperator op);

// Squared L2 norms of (u - u_h) and of (Du - Du_h); Du is the derivative of
// the space (grad / curl / div). Pass an empty exactDeriv to skip it.
struct ErrorParts {
  double value2 = 0.0;
  double deriv2 = 0.0;
  double exactValue2 = 0.0;
  double exactDeriv2 = 0.0;
};
ErrorParts errorIntegrals(const Discretization& D, int k, const GeometryMap& F, const Eigen::VectorXd& coeffs,
                          const FieldFn& exactValue, const FieldFn& exactDeriv);

// Functions with no constrained trace on the listed faces (face indices).
std::vector<int> freeIndices(const Discretization& D, int k, const std::vector<int>& faces);

// Evaluates pushed-forward basis functions active at a parametric point.
PushedBasis pushBasisAt(const Discretization& D, int k, const GeometryMap& F, const std::array<double, 3>& zeta);
Eigen::VectorXd evalPhysicalField(const Discretization& D, int k, const GeometryMap& F, const Eigen::VectorXd& coeffs,
                                  const std::array<double, 3>& zeta, bool derivative = false);

}  // namespace tsdr
