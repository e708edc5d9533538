#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tsdr/linalg.hpp"

namespace tsdr {

using ComplexMatrix = Eigen::SparseMatrix<std::complex<double>, Eigen::ColMajor>;

// Failure of a numerical method (singular system, no convergence).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EigenResult {
  std::vector<double> eigenvalues;  // ascending, non-null only
  int zeroCount = -1;               // -1 when not computed (shift-invert path)
  int dofs = 0;
  double maxResidual = 0.0;         // max ||Kv - lambda Mv|| / ||Kv||
  Eigen::MatrixXd vectors;          // columns matching eigenvalues, when requested
};

struct EigenOptions {
  int count = 10;
  double zeroTolerance = 1e-8;  // relative to the largest eigenvalue
  int denseLimit = 3000;
  std::optional<double> shift;  // forces shift-invert Lanczos around the shift
  bool vectors = false;
};

// Smallest non-null eigenpairs of K v = lambda M v (K sym. psd, M SPD).
EigenResult solveGeneralizedEig(const RealMatrix& K, const RealMatrix& M, const EigenOptions& opt);
EigenResult solveDenseEig(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M, const EigenOptions& opt);
// Eigenvalues closest to the shift by Lanczos on (K - shift M)^{-1} M.
EigenResult solveShiftInvertEig(const RealMatrix& K, const RealMatrix& M, double shift, const EigenOptions& opt);

// Direct solves; throw NumericalError on failure or relative residual > 1e-10.
Eigen::VectorXd solveLinear(const RealMatrix& A, const Eigen::VectorXd& b);
Eigen::VectorXcd solveLinear(const ComplexMatrix& A, const Eigen::VectorXcd& b);

struct PortMode {
  double k10sq = 0.0;
  double nextEigenvalue = 0.0;  // second non-null eigenvalue (next cutoff squared)
  Eigen::VectorXd e;            // M-normalized, first nonzero entry positive
};
PortMode solvePortMode(const RealMatrix& K, const RealMatrix& M, double zeroTolerance = 1e-8);

struct Scattering {
  std::complex<double> R, T;
};
// gamma1 = int_{Gamma1} E . e10, gamma2 = int_{Gamma2} E . e10, norm = int e10 . e10.
Scattering scatteringCoefficients(std::complex<double> gamma1, std::complex<double> gamma2, double norm, double beta,
                                  double z1, double z2);

}  // namespace tsdr
