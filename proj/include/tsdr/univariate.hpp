#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tsdr/rational.hpp"

namespace tsdr {

// B: plain B-spline N[Ξ]. D: Curry-Schoenberg scaled (p+1)/|Ξ| N[Ξ], where p
// is the degree of the scaled function.
enum class Scaling { B, D };

// Knots of a single basis function, p+2 entries for degree p.
struct LocalKnotVector {
  std::vector<Rational> knots;

  LocalKnotVector() = default;
  explicit LocalKnotVector(std::vector<Rational> k) : knots(std::move(k)) {}
  int degree() const { return static_cast<int>(knots.size()) - 2; }
  Rational length() const { return knots.back() - knots.front(); }
  Rational front() const { return knots.front(); }
  Rational back() const { return knots.back(); }
  // First p+1 knots (Ξ⁻) and last p+1 knots (Ξ⁺).
  LocalKnotVector minus() const;
  LocalKnotVector plus() const;
  LocalKnotVector reversed() const;  // ξ -> 1 - ξ
  std::string str() const;
  friend bool operator==(const LocalKnotVector& a, const LocalKnotVector& b) {
    return a.knots == b.knots;
  }
  friend bool operator!=(const LocalKnotVector& a, const LocalKnotVector& b) { return !(a == b); }
};

struct LocalKnotVectorHash {
  std::size_t operator()(const LocalKnotVector& kv) const noexcept;
};

// p-open knot vector stored as breakpoints and multiplicities.
class KnotVector {
 public:
  KnotVector() = default;
  KnotVector(int degree, std::vector<Rational> breakpoints, std::vector<int> multiplicities);
  static KnotVector fromKnots(int degree, const std::vector<Rational>& knots);
  // `elements` equal spans, each interior breakpoint with the given multiplicity.
  static KnotVector uniform(int degree, int elements, int interiorMultiplicity = 1);
  // Text form "p; b1/q1:m1 b2/q2:m2 ...".
  static KnotVector parse(const std::string& text);
  std::string str() const;

  int degree() const { return p_; }
  int dim() const { return static_cast<int>(knots_.size()) - p_ - 1; }
  const std::vector<Rational>& knots() const { return knots_; }
  const std::vector<Rational>& breakpoints() const { return breaks_; }
  const std::vector<int>& multiplicities() const { return mults_; }
  int maxInteriorMultiplicity() const;
  // Local knot vector of basis function i (0-based).
  LocalKnotVector local(int i) const;
  // Index lines of the mesh M: boundary values repeated floor(p/2)+1 times,
  // interior breakpoints with their multiplicity.
  std::vector<Rational> meshLines() const;
  // Same knots with the interior breakpoints refined: every span split in two.
  KnotVector dyadicRefinement() const;

  friend bool operator==(const KnotVector& a, const KnotVector& b) {
    return a.p_ == b.p_ && a.knots_ == b.knots_;
  }

 private:
  void rebuild();
  int p_ = 0;
  std::vector<Rational> breaks_;
  std::vector<int> mults_;
  std::vector<Rational> knots_;
};

struct Anchor1D {
  int index = 0;
  Rational position;
  LocalKnotVector localKV;
};

// Values N_{i,p}(ζ), i = 0..n-1. Throws std::domain_error outside [0,1].
std::vector<double> evalBasis(const KnotVector& kv, double zeta);
// Values and first derivatives.
std::pair<std::vector<double>, std::vector<double>> evalBasisDerivs(const KnotVector& kv, double zeta);

// Single basis function from its local knots, with the left-limit convention at ζ = 1.
double evalLocal(const LocalKnotVector& kv, double zeta);
// Value and derivative of N[Ξ] at ζ.
std::pair<double, double> evalLocalDeriv(const LocalKnotVector& kv, double zeta);
// Value and derivative with scaling applied.
std::pair<double, double> evalScaled(const LocalKnotVector& kv, Scaling s, double zeta);
// Curry-Schoenberg value (p/|Ξ|) N[Ξ](ζ); p = knots.size() - 1.
double curryScaled(const LocalKnotVector& kv, int p, double zeta);

KnotVector derivedKnotVector(const KnotVector& kv);
std::vector<Anchor1D> anchors(const KnotVector& kv);
std::vector<Rational> grevilleSites(const KnotVector& kv);

// α coefficients of the refinement relation for inserting ξ̄ (n+1 entries).
std::vector<Rational> insertionAlphas(const KnotVector& kv, const Rational& xi);
// Rows of `coeffs` are coefficients (one row per basis function).
std::pair<KnotVector, Eigen::MatrixXd> insertKnot(const KnotVector& kv, const Eigen::MatrixXd& coeffs,
                                                   const Rational& xi);

struct DerivativeTerm {
  LocalKnotVector target;   // degree p-1 local knot vector
  Rational coefficient;     // p/|target| for the plain basis, or 0 if |target| = 0
  int sign = 0;             // +1 for Ξ⁻, -1 for Ξ⁺; 0 when the term vanishes
};
// d/dζ N[Ξᴬ] = (p/|Ξᴬ⁻|) N[Ξᴬ⁻] - (p/|Ξᴬ⁺|) N[Ξᴬ⁺].
std::array<DerivativeTerm, 2> derivativeDecomposition(const LocalKnotVector& kv);
inline std::array<DerivativeTerm, 2> derivativeDecomposition(const Anchor1D& a, const KnotVector&) {
  return derivativeDecomposition(a.localKV);
}

// Interpolation of point data at the Greville sites; rows are control points.
Eigen::MatrixXd interpolateAtGreville(const KnotVector& kv, const Eigen::MatrixXd& values);

// Gauss-Legendre rule on [a, b].
struct Quadrature1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature1D gaussLegendre(int n, double a = 0.0, double b = 1.0);

}  // namespace tsdr
