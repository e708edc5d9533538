#include "tsdr/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace tsdr {

namespace {

struct Factor {
  int index;
  double val;
  double der;
};

std::vector<Factor> nonzeroFactors(const KnotVector& kv, double z) {
  auto [v, d] = evalBasisDerivs(kv, z);
  std::vector<Factor> out;
  for (int i = 0; i < static_cast<int>(v.size()); ++i)
    if (v[i] != 0.0 || d[i] != 0.0) out.push_back({i, v[i], d[i]});
  return out;
}

}  // namespace

GeometryMap::GeometryMap(std::vector<KnotVector> kvs, Eigen::MatrixXd controlPoints, std::vector<double> weights)
    : kvs_(std::move(kvs)), cp_(std::move(controlPoints)), weights_(std::move(weights)) {
  if (kvs_.empty() || kvs_.size() > 3) throw std::invalid_argument("geometry: parametric dimension must be 1..3");
  int n = 1;
  for (const auto& kv : kvs_) n *= kv.dim();
  if (cp_.rows() != n) throw std::invalid_argument("geometry: control point count does not match the spline space");
  if (cp_.cols() < static_cast<int>(kvs_.size())) throw std::invalid_argument("geometry: space dimension too small");
  if (!weights_.empty()) {
    if (static_cast<int>(weights_.size()) != n) throw std::invalid_argument("geometry: weight count mismatch");
    for (double w : weights_)
      if (!(w > 0.0)) throw std::invalid_argument("geometry: non-positive NURBS weight");
  }
}

GeometryMap GeometryMap::box(const std::vector<double>& lo, const std::vector<double>& hi) {
  const int d = static_cast<int>(lo.size());
  std::vector<KnotVector> kvs(d, KnotVector::uniform(1, 1));
  Eigen::MatrixXd cp(1 << d, d);
  for (int i = 0; i < (1 << d); ++i)
    for (int l = 0; l < d; ++l) cp(i, l) = (i >> l & 1) ? hi[l] : lo[l];
  return GeometryMap(kvs, cp);
}

GeometryMap GeometryMap::extrude(const GeometryMap& planar, double z0, double z1) {
  if (planar.paramDim() != 2 || planar.spaceDim() != 2) throw std::invalid_argument("extrude: need a planar 2D map");
  std::vector<KnotVector> kvs = planar.kvs_;
  kvs.push_back(KnotVector::uniform(1, 1));
  const int n = static_cast<int>(planar.cp_.rows());
  Eigen::MatrixXd cp(2 * n, 3);
  std::vector<double> w;
  for (int layer = 0; layer < 2; ++layer)
    for (int i = 0; i < n; ++i) {
      cp(layer * n + i, 0) = planar.cp_(i, 0);
      cp(layer * n + i, 1) = planar.cp_(i, 1);
      cp(layer * n + i, 2) = layer == 0 ? z0 : z1;
      if (!planar.weights_.empty()) w.push_back(planar.weights_[i]);
    }
  return GeometryMap(kvs, cp, w);
}

void GeometryMap::evalWithJacobian(const Eigen::VectorXd& zeta, Eigen::VectorXd* x, Eigen::MatrixXd* J) const {
  const int d = paramDim();
  const int m = spaceDim();
  if (zeta.size() != d) throw std::invalid_argument("geometry: point dimension mismatch");
  std::vector<std::vector<Factor>> f(3);
  std::array<int, 3> n{1, 1, 1};
  for (int l = 0; l < d; ++l) {
    f[l] = nonzeroFactors(kvs_[l], zeta[l]);
    n[l] = kvs_[l].dim();
  }
  for (int l = d; l < 3; ++l) f[l] = {Factor{0, 1.0, 0.0}};
  const bool rational = !weights_.empty();
  Eigen::VectorXd S = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd dS = Eigen::MatrixXd::Zero(m, d);
  double W = 0.0;
  Eigen::VectorXd dW = Eigen::VectorXd::Zero(d);
  for (const auto& c : f[2])
    for (const auto& b : f[1])
      for (const auto& a : f[0]) {
        const int idx = a.index + n[0] * (b.index + n[1] * c.index);
        const double w = rational ? weights_[idx] : 1.0;
        const double v = a.val * b.val * c.val * w;
        double g[3] = {a.der * b.val * c.val * w, a.val * b.der * c.val * w, a.val * b.val * c.der * w};
        S += v * cp_.row(idx).transpose();
        W += v;
        for (int l = 0; l < d; ++l) {
          dS.col(l) += g[l] * cp_.row(idx).transpose();
          dW[l] += g[l];
        }
      }
  if (rational) {
    Eigen::VectorXd X = S / W;
    if (x) *x = X;
    if (J) {
      J->resize(m, d);
      for (int l = 0; l < d; ++l) J->col(l) = (dS.col(l) - X * dW[l]) / W;
    }
  } else {
    if (x) *x = S;
    if (J) *J = dS;
  }
}

Eigen::VectorXd GeometryMap::eval(const Eigen::VectorXd& zeta) const {
  Eigen::VectorXd x;
  evalWithJacobian(zeta, &x, nullptr);
  return x;
}

Eigen::MatrixXd GeometryMap::jacobian(const Eigen::VectorXd& zeta) const {
  Eigen::MatrixXd J;
  evalWithJacobian(zeta, nullptr, &J);
  return J;
}

GeometryMap GeometryMap::insertKnot(int direction, const Rational& xi) const {
  const int d = paramDim();
  std::array<int, 3> n{1, 1, 1};
  for (int l = 0; l < d; ++l) n[l] = kvs_[l].dim();
  const bool rational = !weights_.empty();
  const int m = spaceDim();
  // Homogeneous coordinates (w C, w).
  Eigen::MatrixXd H(cp_.rows(), m + 1);
  for (int i = 0; i < cp_.rows(); ++i) {
    const double w = rational ? weights_[i] : 1.0;
    H.row(i).head(m) = w * cp_.row(i);
    H(i, m) = w;
  }
  std::array<int, 3> nn = n;
  nn[direction] += 1;
  Eigen::MatrixXd Hn(nn[0] * nn[1] * nn[2], m + 1);
  KnotVector newKv;
  std::array<int, 3> stride{1, n[0], n[0] * n[1]};
  std::array<int, 3> nstride{1, nn[0], nn[0] * nn[1]};
  // Iterate over fibers along `direction`.
  std::array<int, 3> lim = n;
  lim[direction] = 1;
  for (int c = 0; c < lim[2]; ++c)
    for (int b = 0; b < lim[1]; ++b)
      for (int a = 0; a < lim[0]; ++a) {
        Eigen::MatrixXd fiber(n[direction], m + 1);
        std::array<int, 3> base{a, b, c};
        for (int i = 0; i < n[direction]; ++i) {
          std::array<int, 3> id = base;
          id[direction] = i;
          fiber.row(i) = H.row(id[0] * stride[0] + id[1] * stride[1] + id[2] * stride[2]);
        }
        auto [kv2, fib2] = tsdr::insertKnot(kvs_[direction], fiber, xi);
        newKv = kv2;
        for (int i = 0; i < nn[direction]; ++i) {
          std::array<int, 3> id = base;
          id[direction] = i;
          Hn.row(id[0] * nstride[0] + id[1] * nstride[1] + id[2] * nstride[2]) = fib2.row(i);
        }
      }
  std::vector<KnotVector> kvs = kvs_;
  kvs[direction] = newKv;
  Eigen::MatrixXd cp(Hn.rows(), m);
  std::vector<double> w;
  for (int i = 0; i < Hn.rows(); ++i) {
    cp.row(i) = Hn.row(i).head(m) / Hn(i, m);
    if (rational) w.push_back(Hn(i, m));
  }
  return GeometryMap(kvs, cp, w);
}

GeometryMap GeometryMap::dyadicRefinement() const {
  GeometryMap g = *this;
  for (int l = 0; l < paramDim(); ++l) {
    const auto br = kvs_[l].breakpoints();
    for (std::size_t i = 0; i + 1 < br.size(); ++i) g = g.insertKnot(l, (br[i] + br[i + 1]) / Rational(2));
  }
  return g;
}

Eigen::VectorXd evalGeometry(const GeometryMap& F, const Eigen::VectorXd& zeta) { return F.eval(zeta); }
Eigen::MatrixXd evalJacobian(const GeometryMap& F, const Eigen::VectorXd& zeta) { return F.jacobian(zeta); }

double jacobianDeterminant(const Eigen::MatrixXd& J) {
  if (J.rows() != J.cols()) throw std::invalid_argument("Jacobian is not square");
  double det;
  if (J.rows() == 1)
    det = J(0, 0);
  else if (J.rows() == 2)
    det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
  else if (J.rows() == 3)
    det = J(0, 0) * (J(1, 1) * J(2, 2) - J(1, 2) * J(2, 1)) - J(0, 1) * (J(1, 0) * J(2, 2) - J(1, 2) * J(2, 0)) +
          J(0, 2) * (J(1, 0) * J(2, 1) - J(1, 1) * J(2, 0));
  else
    throw std::invalid_argument("Jacobian dimension must be 1..3");
  return det;
}

Eigen::MatrixXd jacobianInverse(const Eigen::MatrixXd& J) {
  const double det = jacobianDeterminant(J);
  if (std::abs(det) < 1e-12) throw std::runtime_error("singular Jacobian (|det| < 1e-12)");
  const int d = static_cast<int>(J.rows());
  Eigen::MatrixXd adj(d, d);
  if (d == 1) {
    adj(0, 0) = 1.0;
  } else if (d == 2) {
    adj << J(1, 1), -J(0, 1), -J(1, 0), J(0, 0);
  } else {
    adj(0, 0) = J(1, 1) * J(2, 2) - J(1, 2) * J(2, 1);
    adj(0, 1) = J(0, 2) * J(2, 1) - J(0, 1) * J(2, 2);
    adj(0, 2) = J(0, 1) * J(1, 2) - J(0, 2) * J(1, 1);
    adj(1, 0) = J(1, 2) * J(2, 0) - J(1, 0) * J(2, 2);
    adj(1, 1) = J(0, 0) * J(2, 2) - J(0, 2) * J(2, 0);
    adj(1, 2) = J(0, 2) * J(1, 0) - J(0, 0) * J(1, 2);
    adj(2, 0) = J(1, 0) * J(2, 1) - J(1, 1) * J(2, 0);
    adj(2, 1) = J(0, 1) * J(2, 0) - J(0, 0) * J(2, 1);
    adj(2, 2) = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
  }
  return adj / det;
}

Eigen::VectorXd pullbackValue(int j, const Eigen::MatrixXd& J, const Eigen::VectorXd& v) {
  const int d = static_cast<int>(J.rows());
  switch (j) {
    case 0: return v;
    case 1: return J.transpose() * v;
    case 2:
      if (v.size() == d) return jacobianDeterminant(J) * (jacobianInverse(J) * v);
      return jacobianDeterminant(J) * v;
    case 3: return jacobianDeterminant(J) * v;
    default: throw std::invalid_argument("pullback: j must be 0..3");
  }
}

Eigen::VectorXd pushforwardValue(int j, const Eigen::MatrixXd& J, const Eigen::VectorXd& v) {
  const int d = static_cast<int>(J.rows());
  switch (j) {
    case 0: return v;
    case 1: return jacobianInverse(J).transpose() * v;
    case 2:
      if (v.size() == d) {
        const double det = jacobianDeterminant(J);
        if (std::abs(det) < 1e-12) throw std::runtime_error("singular Jacobian (|det| < 1e-12)");
        return J * v / det;
      }
      [[fallthrough]];
    case 3: {
      const double det = jacobianDeterminant(J);
      if (std::abs(det) < 1e-12) throw std::runtime_error("singular Jacobian (|det| < 1e-12)");
      return v / det;
    }
    default: throw std::invalid_argument("push-forward: j must be 0..3");
  }
}

FieldFn pullback(const GeometryMap& F, int j, FieldFn f) {
  return [F, j, f](const Eigen::VectorXd& zeta) {
    Eigen::VectorXd x;
    Eigen::MatrixXd J;
    F.evalWithJacobian(zeta, &x, &J);
    try {
      return pullbackValue(j, J, f(x));
    } catch (const std::runtime_error& e) {
      std::string where;
      for (int i = 0; i < zeta.size(); ++i) where += (i ? "," : "") + std::to_string(zeta[i]);
      throw std::runtime_error(std::string(e.what()) + " at parametric point (" + where + ")");
    }
  };
}

Eigen::VectorXd pushforwardBasis(const GeometryMap& F, int j, const Eigen::VectorXd& zeta,
                                 const Eigen::VectorXd& parametricValue) {
  return pushforwardValue(j, F.jacobian(zeta), parametricValue);
}

Eigen::VectorXd ControlComplex::evalControlMap(const Eigen::VectorXd& zeta) const {
  const int d = static_cast<int>(greville.size());
  std::array<std::vector<double>, 3> b;
  std::array<int, 3> n{1, 1, 1};
  for (int l = 0; l < d; ++l) {
    b[l] = evalBasis(Z.kvs[l], zeta[l]);
    n[l] = Z.kvs[l].dim();
  }
  for (int l = d; l < 3; ++l) b[l] = {1.0};
  Eigen::VectorXd x = Eigen::VectorXd::Zero(controlPoints.cols());
  for (int c = 0; c < n[2]; ++c)
    for (int bb = 0; bb < n[1]; ++bb)
      for (int a = 0; a < n[0]; ++a) {
        const double w = b[0][a] * b[1][bb] * b[2][c];
        if (w != 0.0) x += w * controlPoints.row(a + n[0] * (bb + n[1] * c)).transpose();
      }
  return x;
}

ControlComplex buildControlComplex(const GeometryMap& F) {
  ControlComplex cc;
  std::vector<KnotVector> zkv;
  for (const auto& kv : F.knotVectors()) {
    auto g = grevilleSites(kv);
    for (std::size_t i = 1; i < g.size(); ++i)
      if (!(g[i - 1] < g[i])) throw std::invalid_argument("control complex: coincident Greville sites");
    std::vector<Rational> knots;
    knots.emplace_back(0);
    knots.insert(knots.end(), g.begin(), g.end());
    knots.emplace_back(1);
    zkv.push_back(KnotVector::fromKnots(1, knots));
    cc.greville.push_back(std::move(g));
  }
  cc.Z = buildComplex(zkv);
  cc.controlPoints = F.controlPoints();
  return cc;
}

double controlDistance(const GeometryMap& F, int sampleCount) {
  const ControlComplex cc = buildControlComplex(F);
  const int d = F.paramDim();
  std::array<int, 3> cnt{1, 1, 1};
  for (int l = 0; l < d; ++l) cnt[l] = sampleCount;
  double worst = 0.0;
  Eigen::VectorXd z(d);
  for (int c = 0; c < cnt[2]; ++c)
    for (int b = 0; b < cnt[1]; ++b)
      for (int a = 0; a < cnt[0]; ++a) {
        const int id[3] = {a, b, c};
        for (int l = 0; l < d; ++l) z[l] = sampleCount == 1 ? 0.5 : static_cast<double>(id[l]) / (sampleCount - 1);
        worst = std::max(worst, (F.eval(z) - cc.evalControlMap(z)).norm());
      }
  return worst;
}

}  // namespace tsdr
