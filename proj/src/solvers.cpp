#include "tsdr/solvers.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace tsdr {

namespace {

double residualOf(const RealMatrix& K, const RealMatrix& M, double lambda, const Eigen::VectorXd& v) {
  const Eigen::VectorXd kv = K * v;
  const double nk = kv.norm();
  const double r = (kv - lambda * (M * v)).norm();
  return nk > 0 ? r / nk : r;
}

}  // namespace

EigenResult solveDenseEig(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M, const EigenOptions& opt) {
  const int n = static_cast<int>(K.rows());
  EigenResult res;
  res.dofs = n;
  if (n == 0) {
    res.zeroCount = 0;
    return res;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw NumericalError("eigensolver: mass matrix is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      K, M, opt.vectors ? Eigen::ComputeEigenvectors | Eigen::Ax_lBx : Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver: no convergence");
  const Eigen::VectorXd ev = es.eigenvalues();
  const double tol = opt.zeroTolerance * std::max(std::abs(ev[n - 1]), 1e-300);
  int zeros = 0;
  while (zeros < n && ev[zeros] < tol) ++zeros;
  res.zeroCount = zeros;
  const int m = std::min(opt.count, n - zeros);
  for (int i = 0; i < m; ++i) res.eigenvalues.push_back(ev[zeros + i]);
  if (opt.vectors) {
    res.vectors = es.eigenvectors().middleCols(zeros, m);
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd v = res.vectors.col(i);
      const Eigen::VectorXd kv = K * v;
      const double r = (kv - ev[zeros + i] * (M * v)).norm() / std::max(kv.norm(), 1e-300);
      res.maxResidual = std::max(res.maxResidual, r);
    }
  }
  return res;
}

EigenResult solveShiftInvertEig(const RealMatrix& K, const RealMatrix& M, double shift, const EigenOptions& opt) {
  const int n = static_cast<int>(K.rows());
  EigenResult res;
  res.dofs = n;
  RealMatrix A = K - shift * M;
  A.makeCompressed();
  // LDLT without pivoting is fine away from eigenvalues; LU as fallback.
  Eigen::SimplicialLDLT<RealMatrix> ldlt(A);
  std::optional<Eigen::SparseLU<RealMatrix, Eigen::COLAMDOrdering<int>>> lu;
  if (ldlt.info() != Eigen::Success) {
    lu.emplace(A);
    if (lu->info() != Eigen::Success) throw NumericalError("shift-invert: factorization failed (shift is an eigenvalue?)");
  }
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd mx = M * x;
    return lu ? Eigen::VectorXd(lu->solve(mx)) : Eigen::VectorXd(ldlt.solve(mx));
  };

  int steps = std::min(n, std::max(4 * opt.count + 20, 60));
  for (;;) {
    // Lanczos in the M inner product with full reorthogonalization.
    Eigen::MatrixXd Q(n, steps + 1), MQ(n, steps + 1);
    std::vector<double> alpha, beta;
    Eigen::VectorXd q = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n; ++i) q[i] += 0.5 * std::sin(1.0 + i);  // deterministic start
    Eigen::VectorXd mq = M * q;
    double nrm = std::sqrt(q.dot(mq));
    Q.col(0) = q / nrm;
    MQ.col(0) = mq / nrm;
    int m = 0;
    for (; m < steps; ++m) {
      Eigen::VectorXd w = apply(Q.col(m));
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd h = MQ.leftCols(m + 1).transpose() * w;
        w -= Q.leftCols(m + 1) * h;
        if (pass == 0) alpha.push_back(h[m]);
        else alpha.back() += h[m];
      }
      const Eigen::VectorXd mw = M * w;
      const double b = std::sqrt(std::max(w.dot(mw), 0.0));
      if (m + 1 == steps || b < 1e-14 * std::abs(alpha.back())) {
        ++m;
        break;
      }
      beta.push_back(b);
      Q.col(m + 1) = w / b;
      MQ.col(m + 1) = mw / b;
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) T(i, i) = alpha[i];
    for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    // largest |theta| first
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]); });
    // null (gradient) modes are skipped
    double top = 0.0;
    for (int i = 0; i < m; ++i) top = std::max(top, std::abs(shift + 1.0 / es.eigenvalues()[i]));
    std::vector<std::pair<double, Eigen::VectorXd>> pairs;
    double worst = 0.0;
    for (int i = 0; i < m && static_cast<int>(pairs.size()) < opt.count; ++i) {
      const double theta = es.eigenvalues()[order[i]];
      const double lambda = shift + 1.0 / theta;
      if (std::abs(lambda) < opt.zeroTolerance * top) continue;
      const Eigen::VectorXd v = Q.leftCols(m) * es.eigenvectors().col(order[i]);
      worst = std::max(worst, residualOf(K, M, lambda, v));
      pairs.emplace_back(lambda, v);
    }
    if (worst <= 1e-8 || steps >= n) {
      std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      res.maxResidual = worst;
      if (opt.vectors) res.vectors.resize(n, static_cast<int>(pairs.size()));
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        res.eigenvalues.push_back(pairs[i].first);
        if (opt.vectors) res.vectors.col(static_cast<int>(i)) = pairs[i].second;
      }
      return res;
    }
    steps = std::min(n, 2 * steps);
  }
}

EigenResult solveGeneralizedEig(const RealMatrix& K, const RealMatrix& M, const EigenOptions& opt) {
  if (K.rows() != K.cols() || M.rows() != K.rows() || M.cols() != K.cols())
    throw std::invalid_argument("eigensolver: matrix size mismatch");
  if (opt.shift || K.rows() > opt.denseLimit) {
    if (!opt.shift) throw std::invalid_argument("eigensolver: system too large for the dense path; give a shift");
    return solveShiftInvertEig(K, M, *opt.shift, opt);
  }
  return solveDenseEig(Eigen::MatrixXd(K), Eigen::MatrixXd(M), opt);
}

Eigen::VectorXd solveLinear(const RealMatrix& A, const Eigen::VectorXd& b) {
  if (A.rows() != b.size()) throw std::invalid_argument("solveLinear: size mismatch");
  if (b.size() == 0) return b;
  Eigen::VectorXd x;
  Eigen::SimplicialLDLT<RealMatrix> ldlt(A);
  if (ldlt.info() == Eigen::Success) x = ldlt.solve(b);
  const double nb = std::max(b.norm(), 1e-300);
  if (x.size() == 0 || !x.allFinite() || (A * x - b).norm() > 1e-10 * nb) {
    RealMatrix Ac = A;
    Ac.makeCompressed();
    Eigen::SparseLU<RealMatrix, Eigen::COLAMDOrdering<int>> lu(Ac);
    if (lu.info() != Eigen::Success) throw NumericalError("solveLinear: singular system");
    x = lu.solve(b);
  }
  if (b.norm() == 0.0) return Eigen::VectorXd::Zero(b.size());
  const double r = (A * x - b).norm() / nb;
  if (!x.allFinite() || r > 1e-10) throw NumericalError("solveLinear: residual " + std::to_string(r));
  return x;
}

Eigen::VectorXcd solveLinear(const ComplexMatrix& A, const Eigen::VectorXcd& b) {
  if (A.rows() != b.size()) throw std::invalid_argument("solveLinear: size mismatch");
  if (b.size() == 0) return b;
  ComplexMatrix Ac = A;
  Ac.makeCompressed();
  Eigen::SparseLU<ComplexMatrix, Eigen::COLAMDOrdering<int>> lu(Ac);
  if (lu.info() != Eigen::Success) throw NumericalError("solveLinear: singular complex system");
  Eigen::VectorXcd x = lu.solve(b);
  const double nb = b.norm();
  if (nb == 0.0) return Eigen::VectorXcd::Zero(b.size());
  const double r = (A * x - b).norm() / nb;
  if (!x.allFinite() || r > 1e-10) throw NumericalError("solveLinear: residual " + std::to_string(r));
  return x;
}

PortMode solvePortMode(const RealMatrix& K, const RealMatrix& M, double zeroTolerance) {
  EigenOptions opt;
  opt.count = 2;
  opt.zeroTolerance = zeroTolerance;
  opt.vectors = true;
  opt.denseLimit = 1 << 30;
  EigenResult r = solveDenseEig(Eigen::MatrixXd(K), Eigen::MatrixXd(M), opt);
  if (r.eigenvalues.empty()) throw NumericalError("port mode: all eigenvalues below the zero tolerance");
  PortMode pm;
  pm.k10sq = r.eigenvalues[0];
  pm.nextEigenvalue = r.eigenvalues.size() > 1 ? r.eigenvalues[1] : INFINITY;
  pm.e = r.vectors.col(0);
  pm.e /= std::sqrt(pm.e.dot(M * pm.e));
  const double big = pm.e.cwiseAbs().maxCoeff();
  for (int i = 0; i < pm.e.size(); ++i)
    if (std::abs(pm.e[i]) > 1e-8 * big) {
      if (pm.e[i] < 0) pm.e = -pm.e;
      break;
    }
  return pm;
}

Scattering scatteringCoefficients(std::complex<double> gamma1, std::complex<double> gamma2, double norm, double beta,
                                  double z1, double z2) {
  if (norm == 0.0) throw NumericalError("scattering: zero mode normalization");
  const std::complex<double> I(0.0, 1.0);
  Scattering s;
  s.R = std::exp(-I * beta * z1) * gamma1 / norm - std::exp(-2.0 * I * beta * z1);
  s.T = std::exp(I * beta * z2) * gamma2 / norm;
  return s;
}

}  // namespace tsdr
