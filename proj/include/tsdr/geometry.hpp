#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsdr/parametric_complex.hpp"
#include "tsdr/univariate.hpp"

namespace tsdr {

enum class GeometryKind { Spline, NURBS };

// Tensor-product spline or NURBS map from [0,1]^d to R^m (m >= d).
class GeometryMap {
 public:
  GeometryMap() = default;
  // controlPoints: one row per basis function, lexicographic with direction 0 fastest.
  GeometryMap(std::vector<KnotVector> kvs, Eigen::MatrixXd controlPoints, std::vector<double> weights = {});

  // Multilinear map of the box [lo, hi] (identity-like when lo = 0, hi = 1).
  static GeometryMap box(const std::vector<double>& lo, const std::vector<double>& hi);
  // Degree-one extrusion of a planar map along z over [z0, z1].
  static GeometryMap extrude(const GeometryMap& planar, double z0, double z1);

  GeometryKind kind() const { return weights_.empty() ? GeometryKind::Spline : GeometryKind::NURBS; }
  int paramDim() const { return static_cast<int>(kvs_.size()); }
  int spaceDim() const { return static_cast<int>(cp_.cols()); }
  const std::vector<KnotVector>& knotVectors() const { return kvs_; }
  const Eigen::MatrixXd& controlPoints() const { return cp_; }
  const std::vector<double>& weights() const { return weights_; }

  Eigen::VectorXd eval(const Eigen::VectorXd& zeta) const;
  // spaceDim x paramDim.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& zeta) const;
  void evalWithJacobian(const Eigen::VectorXd& zeta, Eigen::VectorXd* x, Eigen::MatrixXd* J) const;

  // Knot insertion in one direction, geometry unchanged.
  GeometryMap insertKnot(int direction, const Rational& xi) const;
  // Splits every non-empty span in every direction.
  GeometryMap dyadicRefinement() const;

 private:
  std::vector<KnotVector> kvs_;
  Eigen::MatrixXd cp_;
  std::vector<double> weights_;
};

Eigen::VectorXd evalGeometry(const GeometryMap& F, const Eigen::VectorXd& zeta);
Eigen::MatrixXd evalJacobian(const GeometryMap& F, const Eigen::VectorXd& zeta);

// Square Jacobian helpers; throw std::runtime_error when |det| < 1e-12.
double jacobianDeterminant(const Eigen::MatrixXd& J);
Eigen::MatrixXd jacobianInverse(const Eigen::MatrixXd& J);

// Pullback ι^j of a physical value to the parametric value at a point with
// Jacobian J, and its inverse. Scalars are passed as size-1 vectors.
//   j=0: φ∘F       j=1: Jᵀ u       j=2: det J · J⁻¹ v       j=3: det J · φ
Eigen::VectorXd pullbackValue(int j, const Eigen::MatrixXd& J, const Eigen::VectorXd& physical);
Eigen::VectorXd pushforwardValue(int j, const Eigen::MatrixXd& J, const Eigen::VectorXd& parametric);

using FieldFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
// Parametric field ζ -> ι^j(f)(ζ).
FieldFn pullback(const GeometryMap& F, int j, FieldFn physicalField);
// Push-forward of a parametric value at ζ.
Eigen::VectorXd pushforwardBasis(const GeometryMap& F, int j, const Eigen::VectorXd& zeta,
                                 const Eigen::VectorXd& parametricValue);

struct ControlComplex {
  std::vector<std::vector<Rational>> greville;  // per direction
  DiscreteComplex Z;                            // degree-one complex on the Greville mesh
  Eigen::MatrixXd controlPoints;                // shared with F
  // Piecewise multilinear control map F_C.
  Eigen::VectorXd evalControlMap(const Eigen::VectorXd& zeta) const;
};

ControlComplex buildControlComplex(const GeometryMap& F);
// max ‖F(ζ) - F_C(ζ)‖ over a uniform grid of sampleCount points per direction.
double controlDistance(const GeometryMap& F, int sampleCount);

}  // namespace tsdr
