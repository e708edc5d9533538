#include "tsdr/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace tsdr {

namespace {

std::vector<Box> tensorElements(const std::vector<std::vector<double>>& breaks) {
  std::vector<Box> out;
  const int d = static_cast<int>(breaks.size());
  std::array<int, 3> n{1, 1, 1};
  for (int l = 0; l < d; ++l) n[l] = static_cast<int>(breaks[l].size()) - 1;
  for (int c = 0; c < n[2]; ++c)
    for (int b = 0; b < n[1]; ++b)
      for (int a = 0; a < n[0]; ++a) {
        Box e;
        const std::array<int, 3> idx{a, b, c};
        for (int l = 0; l < d; ++l) {
          e.lo[l] = breaks[l][idx[l]];
          e.hi[l] = breaks[l][idx[l] + 1];
        }
        out.push_back(e);
      }
  return out;
}

std::vector<double> toDoubles(const std::vector<Rational>& v) {
  std::vector<double> out;
  for (const auto& r : v) out.push_back(r.toDouble());
  return out;
}

int maxDegree(const Discretization& D) {
  int p = 0;
  for (const auto& V : D.X)
    for (const auto& c : V.components)
      for (int l = 0; l < D.dim; ++l) p = std::max(p, c.degree[l]);
  return p;
}

struct SupportTable {
  std::vector<std::array<double, 6>> box;  // lo0, hi0, lo1, hi1, lo2, hi2 per global index
  std::vector<std::pair<int, int>> loc;    // (component, local index)
};

SupportTable supports(const FormSpace& V) {
  SupportTable t;
  for (int c = 0; c < static_cast<int>(V.components.size()); ++c) {
    const auto& comp = V.components[c];
    for (int i = 0; i < comp.size(); ++i) {
      std::array<double, 6> b{0, 1, 0, 1, 0, 1};
      for (int l = 0; l < V.dim; ++l) {
        b[2 * l] = comp.functions[i][l].front().toDouble();
        b[2 * l + 1] = comp.functions[i][l].back().toDouble();
      }
      t.box.push_back(b);
      t.loc.emplace_back(c, i);
    }
  }
  return t;
}

// Physical value/derivative sizes of a space.
int valueSizeOf(const FormSpace& V) { return V.valueSize(); }

int derivSizeOf(const FormSpace& V) {
  switch (V.kind) {
    case FormKind::H1: return V.dim;
    case FormKind::Hcurl: return V.dim == 3 ? 3 : 1;
    case FormKind::Hdiv: return 1;
    case FormKind::L2: return 0;
  }
  return 0;
}

// Pushes one parametric basis function (value phi, gradient g, carried
// direction c) forward with Jacobian J.
void pushForward(const FormSpace& V, int c, double phi, const double* g, const Eigen::MatrixXd& J,
                 const Eigen::MatrixXd& Jinv, double det, double* value, double* deriv) {
  const int d = V.dim;
  switch (V.kind) {
    case FormKind::H1: {
      value[0] = phi;
      for (int a = 0; a < d; ++a) {
        double s = 0.0;
        for (int b = 0; b < d; ++b) s += Jinv(b, a) * g[b];
        deriv[a] = s;
      }
      break;
    }
    case FormKind::Hcurl: {
      for (int a = 0; a < d; ++a) value[a] = phi * Jinv(c, a);
      if (d == 3) {
        // curl(phi e_c) = grad phi x e_c
        double ch[3] = {0, 0, 0};
        const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
        ch[c1] = g[c2];
        ch[c2] = -g[c1];
        for (int a = 0; a < 3; ++a) deriv[a] = (J(a, 0) * ch[0] + J(a, 1) * ch[1] + J(a, 2) * ch[2]) / det;
      } else {
        deriv[0] = (c == 0 ? -g[1] : g[0]) / det;
      }
      break;
    }
    case FormKind::Hdiv: {
      for (int a = 0; a < d; ++a) value[a] = phi * J(a, c) / det;
      deriv[0] = g[c] / det;
      break;
    }
    case FormKind::L2: value[0] = phi / det; break;
  }
}

// Element-level evaluator: active functions and their univariate factors at
// the quadrature nodes of one box.
struct ElementEvaluator {
  const Discretization& D;
  const FormSpace& V;
  const SupportTable& sup;
  int q;

  // For a face integral fixedDir >= 0 and the nodes in that direction are the single value fixedValue.
  void run(const Box& e, int fixedDir, double fixedValue, const GeometryMap& F,
           const std::function<void(const PushedBasis&, double, const Eigen::VectorXd&, const Eigen::MatrixXd&)>& fn)
      const {
    const int d = D.dim;
    std::array<Quadrature1D, 3> rule;
    for (int l = 0; l < d; ++l) {
      if (l == fixedDir)
        rule[l] = Quadrature1D{{fixedValue}, {1.0}};
      else
        rule[l] = gaussLegendre(q, e.lo[l], e.hi[l]);
    }
    std::vector<int> active;
    for (int g = 0; g < static_cast<int>(sup.box.size()); ++g) {
      const auto& b = sup.box[g];
      bool on = true;
      for (int l = 0; l < d && on; ++l) {
        if (l == fixedDir)
          on = b[2 * l] <= fixedValue && fixedValue <= b[2 * l + 1];
        else
          on = b[2 * l] < e.hi[l] && b[2 * l + 1] > e.lo[l];
      }
      if (on) active.push_back(g);
    }
    if (active.empty()) return;
    const int n = static_cast<int>(active.size());
    // val[l][f * nq + node], der[l][...]
    std::array<std::vector<double>, 3> val, der;
    for (int l = 0; l < d; ++l) {
      const int nq = static_cast<int>(rule[l].nodes.size());
      val[l].resize(static_cast<std::size_t>(n) * nq);
      der[l].resize(static_cast<std::size_t>(n) * nq);
      for (int f = 0; f < n; ++f) {
        auto [c, i] = sup.loc[active[f]];
        const auto& comp = V.components[c];
        for (int a = 0; a < nq; ++a) {
          auto vd = evalScaled(comp.functions[i][l], comp.scaling[l], rule[l].nodes[a]);
          val[l][static_cast<std::size_t>(f) * nq + a] = vd.first;
          der[l][static_cast<std::size_t>(f) * nq + a] = vd.second;
        }
      }
    }
    PushedBasis pb;
    pb.index = active;
    const int vs = valueSizeOf(V), ds = derivSizeOf(V);
    pb.value.resize(vs, n);
    pb.deriv.resize(std::max(ds, 1), n);
    std::array<int, 3> nq{1, 1, 1};
    for (int l = 0; l < d; ++l) nq[l] = static_cast<int>(rule[l].nodes.size());
    Eigen::VectorXd zeta(d), x;
    Eigen::MatrixXd J;
    for (int c2 = 0; c2 < nq[2]; ++c2)
      for (int c1 = 0; c1 < nq[1]; ++c1)
        for (int c0 = 0; c0 < nq[0]; ++c0) {
          const std::array<int, 3> node{c0, c1, c2};
          double w = 1.0;
          for (int l = 0; l < d; ++l) {
            zeta[l] = rule[l].nodes[node[l]];
            w *= rule[l].weights[node[l]];
          }
          F.evalWithJacobian(zeta, &x, &J);
          Eigen::MatrixXd Jsq = J.topRows(d);
          const double det = jacobianDeterminant(Jsq);
          const Eigen::MatrixXd Jinv = jacobianInverse(Jsq);
          for (int f = 0; f < n; ++f) {
            double v[3], g[3] = {0, 0, 0};
            for (int l = 0; l < d; ++l) {
              v[l] = val[l][static_cast<std::size_t>(f) * nq[l] + node[l]];
              g[l] = der[l][static_cast<std::size_t>(f) * nq[l] + node[l]];
            }
            double phi = 1.0;
            for (int l = 0; l < d; ++l) phi *= v[l];
            double grad[3];
            for (int l = 0; l < d; ++l) {
              double s = g[l];
              for (int m = 0; m < d; ++m)
                if (m != l) s *= v[m];
              grad[l] = s;
            }
            const int c = sup.loc[active[f]].first;
            double pv[3] = {0, 0, 0}, pd[3] = {0, 0, 0};
            pushForward(V, V.components[c].direction, phi, grad, Jsq, Jinv, det, pv, pd);
            for (int a = 0; a < vs; ++a) pb.value(a, f) = pv[a];
            for (int a = 0; a < ds; ++a) pb.deriv(a, f) = pd[a];
          }
          fn(pb, w, x, Jsq);
        }
  }
};

// Sums triplets in chunks to bound memory.
class Accumulator {
 public:
  Accumulator(int rows, int cols) : sum_(rows, cols) {}
  void add(const std::vector<int>& idx, const Eigen::MatrixXd& local) {
    const int n = static_cast<int>(idx.size());
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a)
        if (local(a, b) != 0.0) trip_.emplace_back(idx[a], idx[b], local(a, b));
    if (trip_.size() > 4000000) flush();
  }
  RealMatrix result() {
    flush();
    return sum_;
  }

 private:
  void flush() {
    if (trip_.empty()) return;
    RealMatrix m(sum_.rows(), sum_.cols());
    m.setFromTriplets(trip_.begin(), trip_.end());
    sum_ += m;
    trip_.clear();
  }
  RealMatrix sum_;
  std::vector<Eigen::Triplet<double>> trip_;
};

}  // namespace

Discretization tensorDiscretization(const std::vector<KnotVector>& kvs) {
  Discretization D;
  D.dim = static_cast<int>(kvs.size());
  D.family = "bspline";
  DiscreteComplex cx = buildComplex(kvs);
  D.X = cx.spaces;
  for (const auto& op : cx.ops) D.ops.push_back(RatMatrix::fromInt(op));
  std::vector<std::vector<double>> br;
  for (const auto& kv : kvs) {
    br.push_back(toDoubles(kv.breakpoints()));
    D.degree = std::max(D.degree, kv.degree());
  }
  D.elements = tensorElements(br);
  D.quadPoints = maxDegree(D) + 1;
  return D;
}

Discretization tsplineDiscretization2D(const TMesh2D& m, int p) {
  Discretization D;
  D.dim = 2;
  D.degree = p;
  D.family = "tspline";
  TsplineComplex cx = buildTsplineComplex(m, p, p);
  D.X = cx.spaces;
  D.ops = cx.exactOps;
  for (const auto& c : extendedMesh(m, p, p).elements()) {
    Box b;
    b.lo = {c.x0.toDouble(), c.y0.toDouble(), 0.0};
    b.hi = {c.x1.toDouble(), c.y1.toDouble(), 0.0};
    D.elements.push_back(b);
  }
  D.quadPoints = p + 1;
  return D;
}

Component productComponent(const Component& c2, const KnotVector& kz, bool derived, int direction) {
  Component c;
  c.dim = 3;
  c.direction = direction;
  const KnotVector z = derived ? derivedKnotVector(kz) : kz;
  c.degree = {c2.degree[0], c2.degree[1], z.degree()};
  c.scaling = {c2.scaling[0], c2.scaling[1], derived ? Scaling::D : Scaling::B};
  for (int k = 0; k < z.dim(); ++k)
    for (int i = 0; i < c2.size(); ++i) {
      c.functions.push_back({c2.functions[i][0], c2.functions[i][1], z.local(k)});
      std::array<int, 3> a{0, 0, k};
      if (!c2.anchors.empty()) a = {c2.anchors[i][0], c2.anchors[i][1], k};
      c.anchors.push_back(a);
    }
  return c;
}

Discretization tsplineDiscretization3D(const TMesh2D& m, int p, const KnotVector& kz) {
  if (kz.degree() != p) throw std::invalid_argument("tsplineDiscretization3D: z degree must equal p");
  Discretization D;
  D.dim = 3;
  D.degree = p;
  D.family = "tspline";
  TsplineComplex cx = buildTsplineComplex(m, p, p);
  TsplineComplex cs = buildTsplineComplex(m, p, p, true);
  const FormSpace& y0 = cx.spaces[0];
  const FormSpace& y1 = cx.spaces[1];
  const FormSpace& y1s = cs.spaces[1];
  const FormSpace& y2 = cx.spaces[2];
  FormSpace x0{3, FormKind::H1, {productComponent(y0.components[0], kz, false, -1)}};
  FormSpace x1{3,
               FormKind::Hcurl,
               {productComponent(y1.components[0], kz, false, 0), productComponent(y1.components[1], kz, false, 1),
                productComponent(y0.components[0], kz, true, 2)}};
  FormSpace x2{3,
               FormKind::Hdiv,
               {productComponent(y1s.components[0], kz, true, 0), productComponent(y1s.components[1], kz, true, 1),
                productComponent(y2.components[0], kz, false, 2)}};
  FormSpace x3{3, FormKind::L2, {productComponent(y2.components[0], kz, true, -1)}};
  D.X = {x0, x1, x2, x3};

  const int n0 = y0.size(), n11 = y1.components[0].size(), n12 = y1.components[1].size(), n2 = y2.size();
  const int nz = kz.dim(), nzp = nz - 1;
  auto rows = [](const RatMatrix& a, int r0, int n) {
    std::vector<int> r(n), c(a.cols);
    for (int i = 0; i < n; ++i) r[i] = r0 + i;
    for (int i = 0; i < a.cols; ++i) c[i] = i;
    return a.selectRowsCols(r, c);
  };
  auto cols = [](const RatMatrix& a, int c0, int n) {
    std::vector<int> r(a.rows), c(n);
    for (int i = 0; i < a.rows; ++i) r[i] = i;
    for (int i = 0; i < n; ++i) c[i] = c0 + i;
    return a.selectRowsCols(r, c);
  };
  const RatMatrix G = cx.exactOps[0], R = cx.exactOps[1], Dv = cs.exactOps[1];
  const RatMatrix Gx = rows(G, 0, n11), Gy = rows(G, n11, n12);
  const RatMatrix R1 = cols(R, 0, n11), R2 = cols(R, n11, n12);
  const RatMatrix Dv1 = cols(Dv, 0, n12), Dv2 = cols(Dv, n12, n11);
  const RatMatrix Iz = RatMatrix::identity(nz), Izp = RatMatrix::identity(nzp);
  const RatMatrix Dz = RatMatrix::fromInt(univariateDerivative(kz));
  const Rational minus(-1);
  // X1 = [U1 | U2 | U3], X2 = [V1 | V2 | V3]
  const int u1 = 0, u2 = n11 * nz, u3 = u2 + n12 * nz;
  const int v1 = 0, v2 = n12 * nzp, v3 = v2 + n11 * nzp;
  RatMatrix grad(x1.size(), x0.size());
  grad.addBlock(u1, 0, kron(Iz, Gx));
  grad.addBlock(u2, 0, kron(Iz, Gy));
  grad.addBlock(u3, 0, kron(Dz, RatMatrix::identity(n0)));
  RatMatrix curl(x2.size(), x1.size());
  curl.addBlock(v1, u3, kron(Izp, Gy));
  curl.addBlock(v1, u2, kron(Dz, RatMatrix::identity(n12)), minus);
  curl.addBlock(v2, u1, kron(Dz, RatMatrix::identity(n11)));
  curl.addBlock(v2, u3, kron(Izp, Gx), minus);
  curl.addBlock(v3, u1, kron(Iz, R1));
  curl.addBlock(v3, u2, kron(Iz, R2));
  RatMatrix div(x3.size(), x2.size());
  div.addBlock(0, v1, kron(Izp, Dv1));
  div.addBlock(0, v2, kron(Izp, Dv2));
  div.addBlock(0, v3, kron(Dz, RatMatrix::identity(n2)));
  for (auto* op : {&grad, &curl, &div}) op->compress();
  D.ops = {grad, curl, div};
  const auto zb = toDoubles(kz.breakpoints());
  for (const auto& c : extendedMesh(m, p, p).elements())
    for (std::size_t k = 0; k + 1 < zb.size(); ++k) {
      Box b;
      b.lo = {c.x0.toDouble(), c.y0.toDouble(), zb[k]};
      b.hi = {c.x1.toDouble(), c.y1.toDouble(), zb[k + 1]};
      D.elements.push_back(b);
    }
  D.quadPoints = p + 1;
  return D;
}

RealMatrix assembleMatrix(const Discretization& D, int k, const GeometryMap& F, Operator op) {
  const FormSpace& V = D.X.at(k);
  if (F.paramDim() != D.dim) throw std::invalid_argument("assembleMatrix: geometry dimension mismatch");
  if (op == Operator::Stiffness && derivSizeOf(V) == 0)
    throw std::invalid_argument("assembleMatrix: no derivative for this space");
  const SupportTable sup = supports(V);
  ElementEvaluator ev{D, V, sup, D.quadPoints};
  Accumulator acc(V.size(), V.size());
  for (const auto& e : D.elements) {
    Eigen::MatrixXd local;
    std::vector<int> idx;
    ev.run(e, -1, 0.0, F, [&](const PushedBasis& pb, double w, const Eigen::VectorXd&, const Eigen::MatrixXd& J) {
      const double det = std::abs(J.determinant());
      const Eigen::MatrixXd& B = op == Operator::Mass ? pb.value : pb.deriv;
      if (local.size() == 0) {
        local = Eigen::MatrixXd::Zero(B.cols(), B.cols());
        idx = pb.index;
      }
      local.noalias() += (w * det) * (B.transpose() * B);
    });
    if (!idx.empty()) acc.add(idx, local);
  }
  return acc.result();
}

Eigen::VectorXd assembleLoad(const Discretization& D, int k, const GeometryMap& F, const FieldFn& f) {
  const FormSpace& V = D.X.at(k);
  const SupportTable sup = supports(V);
  ElementEvaluator ev{D, V, sup, D.quadPoints};
  Eigen::VectorXd b = Eigen::VectorXd::Zero(V.size());
  for (const auto& e : D.elements) {
    ev.run(e, -1, 0.0, F, [&](const PushedBasis& pb, double w, const Eigen::VectorXd& x, const Eigen::MatrixXd& J) {
      const double det = std::abs(J.determinant());
      const Eigen::VectorXd fx = f(x);
      if (fx.size() != pb.value.rows()) throw std::invalid_argument("assembleLoad: field size mismatch");
      const Eigen::VectorXd contrib = pb.value.transpose() * fx;
      for (int a = 0; a < static_cast<int>(pb.index.size()); ++a) b[pb.index[a]] += w * det * contrib[a];
    });
  }
  return b;
}

RealMatrix assembleFace(const Discretization& D, int k, const GeometryMap& F, int face, FaceOperator op) {
  const FormSpace& V = D.X.at(k);
  if (D.dim != 3 || V.kind != FormKind::Hcurl) throw std::invalid_argument("assembleFace: 3D H(curl) space required");
  const int dir = face / 2, side = face % 2;
  const double at = side ? 1.0 : 0.0;
  const SupportTable sup = supports(V);
  ElementEvaluator ev{D, V, sup, D.quadPoints};
  Accumulator acc(V.size(), V.size());
  const int t0 = (dir + 1) % 3, t1 = (dir + 2) % 3;
  for (const auto& e : D.elements) {
    if ((side == 0 && e.lo[dir] != 0.0) || (side == 1 && e.hi[dir] != 1.0)) continue;
    Eigen::MatrixXd local;
    std::vector<int> idx;
    ev.run(e, dir, at, F, [&](const PushedBasis& pb, double w, const Eigen::VectorXd&, const Eigen::MatrixXd& J) {
      const Eigen::Vector3d a = J.col(t0), b = J.col(t1);
      Eigen::Vector3d nrm = a.cross(b);
      const double area = nrm.norm();
      nrm /= area;
      Eigen::MatrixXd B;
      if (op == FaceOperator::TangentialMass) {
        B.resize(3, pb.value.cols());
        for (int f = 0; f < pb.value.cols(); ++f) {
          Eigen::Vector3d u = pb.value.col(f);
          B.col(f) = nrm.cross(u);
        }
      } else {
        B = nrm.transpose() * pb.deriv;
      }
      if (local.size() == 0) {
        local = Eigen::MatrixXd::Zero(B.cols(), B.cols());
        idx = pb.index;
      }
      local.noalias() += (w * area) * (B.transpose() * B);
    });
    if (!idx.empty()) acc.add(idx, local);
  }
  return acc.result();
}

ErrorParts errorIntegrals(const Discretization& D, int k, const GeometryMap& F, const Eigen::VectorXd& coeffs,
                          const FieldFn& exactValue, const FieldFn& exactDeriv) {
  const FormSpace& V = D.X.at(k);
  if (coeffs.size() != V.size()) throw std::invalid_argument("errorIntegrals: coefficient count mismatch");
  const SupportTable sup = supports(V);
  ErrorParts out;
  Discretization Dq = D;
  Dq.quadPoints = D.quadPoints + 2;
  ElementEvaluator ev{Dq, V, sup, Dq.quadPoints};
  for (const auto& e : D.elements) {
    ev.run(e, -1, 0.0, F, [&](const PushedBasis& pb, double w, const Eigen::VectorXd& x, const Eigen::MatrixXd& J) {
      const double det = std::abs(J.determinant());
      Eigen::VectorXd c(pb.index.size());
      for (int a = 0; a < c.size(); ++a) c[a] = coeffs[pb.index[a]];
      const Eigen::VectorXd uh = pb.value * c;
      const Eigen::VectorXd u = exactValue(x);
      out.value2 += w * det * (u - uh).squaredNorm();
      out.exactValue2 += w * det * u.squaredNorm();
      if (exactDeriv) {
        const Eigen::VectorXd duh = pb.deriv * c;
        const Eigen::VectorXd du = exactDeriv(x);
        out.deriv2 += w * det * (du - duh).squaredNorm();
        out.exactDeriv2 += w * det * du.squaredNorm();
      }
    });
  }
  return out;
}

std::vector<int> freeIndices(const Discretization& D, int k, const std::vector<int>& faces) {
  std::vector<std::pair<int, int>> fs;
  for (int f : faces) {
    if (f < 0 || f >= 2 * D.dim) throw std::invalid_argument("freeIndices: invalid face");
    fs.emplace_back(f / 2, f % 2);
  }
  return interiorIndices(D.X.at(k), fs);
}

PushedBasis pushBasisAt(const Discretization& D, int k, const GeometryMap& F, const std::array<double, 3>& zeta) {
  const FormSpace& V = D.X.at(k);
  for (int l = 0; l < D.dim; ++l)
    if (!(zeta[l] >= 0.0 && zeta[l] <= 1.0)) throw std::domain_error("pushBasisAt: point outside the parametric domain");
  const SupportTable sup = supports(V);
  Discretization Dq = D;
  Dq.quadPoints = 1;
  // A degenerate box at the point: every direction fixed through a zero-width rule.
  PushedBasis out;
  Eigen::VectorXd z(D.dim);
  for (int l = 0; l < D.dim; ++l) z[l] = zeta[l];
  Eigen::VectorXd x;
  Eigen::MatrixXd J;
  F.evalWithJacobian(z, &x, &J);
  Eigen::MatrixXd Jsq = J.topRows(D.dim);
  const double det = jacobianDeterminant(Jsq);
  const Eigen::MatrixXd Jinv = jacobianInverse(Jsq);
  const int vs = valueSizeOf(V), ds = derivSizeOf(V);
  std::vector<std::array<double, 3>> vals, ders;
  for (int g = 0; g < static_cast<int>(sup.box.size()); ++g) {
    bool on = true;
    for (int l = 0; l < D.dim && on; ++l) on = sup.box[g][2 * l] <= zeta[l] && zeta[l] <= sup.box[g][2 * l + 1];
    if (on) out.index.push_back(g);
  }
  const int n = static_cast<int>(out.index.size());
  out.value.resize(vs, n);
  out.deriv.resize(std::max(ds, 1), n);
  for (int f = 0; f < n; ++f) {
    auto [c, i] = sup.loc[out.index[f]];
    const auto& comp = V.components[c];
    double grad[3];
    const double phi = comp.eval(i, zeta.data(), grad);
    double pv[3] = {0, 0, 0}, pd[3] = {0, 0, 0};
    pushForward(V, comp.direction, phi, grad, Jsq, Jinv, det, pv, pd);
    for (int a = 0; a < vs; ++a) out.value(a, f) = pv[a];
    for (int a = 0; a < ds; ++a) out.deriv(a, f) = pd[a];
  }
  return out;
}

Eigen::VectorXd evalPhysicalField(const Discretization& D, int k, const GeometryMap& F, const Eigen::VectorXd& coeffs,
                                  const std::array<double, 3>& zeta, bool derivative) {
  PushedBasis pb = pushBasisAt(D, k, F, zeta);
  Eigen::VectorXd c(pb.index.size());
  for (int a = 0; a < c.size(); ++a) c[a] = coeffs[pb.index[a]];
  return derivative ? Eigen::VectorXd(pb.deriv * c) : Eigen::VectorXd(pb.value * c);
}

}  // namespace tsdr
