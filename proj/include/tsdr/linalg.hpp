#pragma once

#include <tuple>
#include <vector>

#include <Eigen/Sparse>

#include "tsdr/rational.hpp"

namespace tsdr {

// Operator matrices of the complexes: exact small integers.
using IntMatrix = Eigen::SparseMatrix<int, Eigen::ColMajor>;
using RealMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

IntMatrix identityInt(int n);
IntMatrix kron(const IntMatrix& a, const IntMatrix& b);
bool isZero(const IntMatrix& a);
bool entriesAreUnit(const IntMatrix& a);  // every stored entry in {-1, 0, +1}
bool sameEntries(const IntMatrix& a, const IntMatrix& b);
// Rows/columns kept in the given order.
IntMatrix selectRowsCols(const IntMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols);
RealMatrix toReal(const IntMatrix& a);

// Exact rank over the rationals by sparse Gaussian elimination. Returns -1
// when max(rows, cols) exceeds `limit` (reported as skipped by callers).
int exactRank(const IntMatrix& a, int limit = 5000);

// Sparse matrix with exact rational entries (general T-spline operators).
struct RatMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::tuple<int, int, Rational>> entries;  // duplicates summed by compress()

  RatMatrix() = default;
  RatMatrix(int r, int c) : rows(r), cols(c) {}
  static RatMatrix fromInt(const IntMatrix& a);
  void compress();
  bool isZero() const;
  bool isIntegral() const;
  bool entriesAreUnit() const;
  IntMatrix toInt() const;  // throws if not integral
  RealMatrix toReal() const;
  RatMatrix selectRowsCols(const std::vector<int>& rows, const std::vector<int>& cols) const;
  // Adds s * m with its top-left corner at (r0, c0).
  void addBlock(int r0, int c0, const RatMatrix& m, const Rational& s = Rational(1));
  static RatMatrix identity(int n);
  friend RatMatrix operator*(const RatMatrix& a, const RatMatrix& b);
};

int exactRank(const RatMatrix& a, int limit = 5000);
// Kronecker product, a is the slow index.
RatMatrix kron(const RatMatrix& a, const RatMatrix& b);

}  // namespace tsdr
