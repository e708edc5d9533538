#include "tsdr/multipatch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tsdr {

namespace {

std::vector<int> tangentialDirs(int dim, int normal) {
  std::vector<int> t;
  for (int l = 0; l < dim; ++l)
    if (l != normal) t.push_back(l);
  return t;
}

struct Orientation {
  std::vector<int> perm;
  std::vector<int> flip;
};

Orientation orientationOf(const PatchInterface& itf, int dim) {
  Orientation o;
  o.perm = itf.perm;
  o.flip = itf.flip;
  if (o.perm.empty()) {
    o.perm.resize(dim - 1);
    std::iota(o.perm.begin(), o.perm.end(), 0);
  }
  if (o.flip.empty()) o.flip.assign(dim - 1, 0);
  if (static_cast<int>(o.perm.size()) != dim - 1 || static_cast<int>(o.flip.size()) != dim - 1)
    throw std::invalid_argument("interface: perm/flip size must be dim - 1");
  std::vector<int> sorted = o.perm;
  std::sort(sorted.begin(), sorted.end());
  for (int t = 0; t < dim - 1; ++t)
    if (sorted[t] != t) throw std::invalid_argument("interface: perm is not a permutation");
  return o;
}

void checkFace(const PatchSet& ps, const std::array<int, 2>& f) {
  if (f[0] < 0 || f[0] >= static_cast<int>(ps.patches.size())) throw std::invalid_argument("interface: bad patch index");
  if (f[1] < 0 || f[1] >= 2 * ps.dim) throw std::invalid_argument("interface: bad face index");
}

// Trace key: carried tangential slot (-1 for scalar/normal traces) and the
// tangential local knot vectors in face-b slot order.
using TraceKey = std::pair<int, std::vector<LocalKnotVector>>;

struct KeyLess {
  bool operator()(const TraceKey& a, const TraceKey& b) const {
    if (a.first != b.first) return a.first < b.first;
    for (std::size_t s = 0; s < a.second.size(); ++s) {
      const auto& x = a.second[s].knots;
      const auto& y = b.second[s].knots;
      if (x.size() != y.size()) return x.size() < y.size();
      for (std::size_t q = 0; q < x.size(); ++q)
        if (x[q] != y[q]) return x[q] < y[q];
    }
    return false;
  }
};

// Trace functions of space k on a face, keyed in the slot order of face b.
std::map<TraceKey, int, KeyLess> traceKeys(const FormSpace& V, int dim, int face, const Orientation* o) {
  const int dir = face / 2, side = face % 2;
  const auto tan = tangentialDirs(dim, dir);
  std::map<TraceKey, int, KeyLess> out;
  int g = 0;
  for (int c = 0; c < static_cast<int>(V.components.size()); ++c) {
    const auto& comp = V.components[c];
    for (int i = 0; i < comp.size(); ++i, ++g) {
      if (!hasTrace(V, c, i, dir, side)) continue;
      TraceKey key;
      key.first = -1;
      key.second.resize(tan.size());
      for (std::size_t t = 0; t < tan.size(); ++t) {
        LocalKnotVector kv = comp.functions[i][tan[t]];
        int slot = static_cast<int>(t);
        if (o) {
          slot = o->perm[t];
          if (o->flip[t]) kv = kv.reversed();
        }
        key.second[slot] = kv;
        if (V.kind == FormKind::Hcurl && comp.direction == tan[t]) key.first = slot;
      }
      if (!out.emplace(key, g).second) throw std::logic_error("traceKeys: duplicate trace function");
    }
  }
  return out;
}

// Sign relating the trace of a function carried by tangential direction
// slot (Hcurl) or the normal (Hdiv) on face a to its partner on face b.
int traceSign(const PatchSet& ps, const PatchInterface& itf, const Orientation& o, FormKind kind, int slotB) {
  if (kind == FormKind::H1) return 1;
  const int dim = ps.dim;
  const auto& Fa = ps.patches[itf.a[0]].geometry;
  const auto& Fb = ps.patches[itf.b[0]].geometry;
  const int da = itf.a[1] / 2, db = itf.b[1] / 2;
  std::vector<double> s(dim - 1, 0.5);
  const Eigen::VectorXd za = interfacePoint(itf, dim, s, false);
  const Eigen::VectorXd zb = interfacePoint(itf, dim, s, true);
  const Eigen::MatrixXd Ja = Fa.jacobian(za), Jb = Fb.jacobian(zb);
  double v = 0.0;
  if (kind == FormKind::Hcurl) {
    const auto ta = tangentialDirs(dim, da), tb = tangentialDirs(dim, db);
    int t = 0;
    while (o.perm[t] != slotB) ++t;
    v = Ja.col(ta[t]).dot(Jb.col(tb[slotB]));
  } else {
    const Eigen::MatrixXd Ia = jacobianInverse(Ja);
    const Eigen::VectorXd n = Ia.row(da).transpose();
    const double sa = Ja.col(da).dot(n) / jacobianDeterminant(Ja);
    const double sb = Jb.col(db).dot(n) / jacobianDeterminant(Jb);
    v = sa * sb;
  }
  if (std::abs(v) < 1e-12) throw std::runtime_error("interface: degenerate orientation");
  return v > 0 ? 1 : -1;
}

class ParityUnionFind {
 public:
  explicit ParityUnionFind(int n) : parent_(n), parity_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::pair<int, int> find(int x) {
    int s = 1;
    int r = x;
    while (parent_[r] != r) {
      s *= parity_[r];
      r = parent_[r];
    }
    // path compression with parity
    int y = x, sy = s;
    while (parent_[y] != y) {
      const int next = parent_[y], snext = sy * parity_[y];
      parent_[y] = r;
      parity_[y] = sy;
      y = next;
      sy = snext;
    }
    return {r, s};
  }
  // value(x) = sign * value(y)
  void unite(int x, int y, int sign) {
    auto [rx, sx] = find(x);
    auto [ry, sy] = find(y);
    if (rx == ry) {
      if (sx != sign * sy) throw std::runtime_error("glue: inconsistent interface orientation");
      return;
    }
    parent_[rx] = ry;
    parity_[rx] = sx * sign * sy;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> parity_;
};

}  // namespace

Eigen::VectorXd interfacePoint(const PatchInterface& itf, int dim, const std::vector<double>& s, bool onB) {
  const Orientation o = orientationOf(itf, dim);
  const int da = itf.a[1] / 2, db = itf.b[1] / 2;
  Eigen::VectorXd z(dim);
  if (!onB) {
    z[da] = itf.a[1] % 2;
    const auto ta = tangentialDirs(dim, da);
    for (int t = 0; t < dim - 1; ++t) z[ta[t]] = s[t];
  } else {
    z[db] = itf.b[1] % 2;
    const auto tb = tangentialDirs(dim, db);
    for (int t = 0; t < dim - 1; ++t) z[tb[o.perm[t]]] = o.flip[t] ? 1.0 - s[t] : s[t];
  }
  return z;
}

std::vector<std::array<int, 2>> PatchSet::boundaryFaces() const {
  std::set<std::array<int, 2>> glued;
  for (const auto& itf : interfaces) {
    glued.insert(itf.a);
    glued.insert(itf.b);
  }
  std::vector<std::array<int, 2>> out;
  for (int k = 0; k < static_cast<int>(patches.size()); ++k)
    for (int f = 0; f < 2 * dim; ++f)
      if (!glued.count({k, f})) out.push_back({k, f});
  return out;
}

std::vector<ConformityVerdict> checkConformity(const PatchSet& ps) {
  std::vector<ConformityVerdict> out;
  std::set<std::array<int, 2>> used;
  for (int n = 0; n < static_cast<int>(ps.interfaces.size()); ++n) {
    const auto& itf = ps.interfaces[n];
    checkFace(ps, itf.a);
    checkFace(ps, itf.b);
    if (itf.a == itf.b) throw std::invalid_argument("interface: face glued to itself is unsupported");
    if (!used.insert(itf.a).second || !used.insert(itf.b).second)
      throw std::invalid_argument("interface: face used by two interfaces");
    ConformityVerdict v;
    v.interface = n;
    const Orientation o = orientationOf(itf, ps.dim);
    const auto& Pa = ps.patches[itf.a[0]];
    const auto& Pb = ps.patches[itf.b[0]];
    std::ostringstream msg;
    for (int k = 0; k < ps.dim && v.fullMatching; ++k) {
      const auto ka = traceKeys(Pa.disc.X[k], ps.dim, itf.a[1], &o);
      const auto kb = traceKeys(Pb.disc.X[k], ps.dim, itf.b[1], nullptr);
      bool same = ka.size() == kb.size();
      for (auto it = ka.begin(); same && it != ka.end(); ++it) same = kb.count(it->first) > 0;
      if (same) continue;
      v.fullMatching = false;
      // first knot value present on one side only, per tangential slot
      for (int s = 0; s < ps.dim - 1; ++s) {
        std::set<Rational> A, B;
        for (const auto& [key, g] : ka)
          for (const auto& x : key.second[s].knots) A.insert(x);
        for (const auto& [key, g] : kb)
          for (const auto& x : key.second[s].knots) B.insert(x);
        std::vector<Rational> diff;
        std::set_symmetric_difference(A.begin(), A.end(), B.begin(), B.end(), std::back_inserter(diff));
        if (!diff.empty()) {
          msg << "space " << k << ": knot " << diff.front().str() << " on tangential direction " << s
              << " appears on one side only";
          break;
        }
      }
      if (msg.str().empty()) {
        for (const auto& [key, g] : ka)
          if (!kb.count(key)) {
            msg << "space " << k << ": no partner for trace function with knots";
            for (const auto& kv : key.second) msg << " " << kv.str();
            break;
          }
        if (msg.str().empty()) msg << "space " << k << ": trace bases differ in size";
      }
    }
    // sampled geometric agreement
    const int samples = 20;
    double gap = 0.0, scale = 1.0;
    for (int q = 0; q < samples; ++q) {
      std::vector<double> s(ps.dim - 1);
      s[0] = (q + 0.5) / samples;
      if (ps.dim == 3) s[1] = std::fmod(0.37 + 0.61803398875 * q, 1.0);
      const Eigen::VectorXd xa = Pa.geometry.eval(interfacePoint(itf, ps.dim, s, false));
      const Eigen::VectorXd xb = Pb.geometry.eval(interfacePoint(itf, ps.dim, s, true));
      gap = std::max(gap, (xa - xb).norm());
      scale = std::max(scale, xa.norm());
    }
    v.geometryGap = gap;
    if (gap > 1e-10 * scale) {
      if (!msg.str().empty()) msg << "; ";
      msg << "geometric images differ by " << gap;
    }
    v.ok = v.fullMatching && gap <= 1e-10 * scale;
    v.message = v.ok ? "conforming" : msg.str();
    out.push_back(v);
  }
  return out;
}

InterfaceGlue buildGlue(const PatchSet& ps) {
  for (const auto& v : checkConformity(ps))
    if (!v.ok) throw std::runtime_error("conformity violation on interface " + std::to_string(v.interface) + ": " + v.message);
  const int np = static_cast<int>(ps.patches.size());
  InterfaceGlue glue;
  for (int k = 0; k <= ps.dim; ++k) {
    std::vector<int> offset(np + 1, 0);
    for (int q = 0; q < np; ++q) offset[q + 1] = offset[q] + ps.patches[q].disc.X[k].size();
    ParityUnionFind uf(offset[np]);
    if (k < ps.dim) {
      for (const auto& itf : ps.interfaces) {
        const Orientation o = orientationOf(itf, ps.dim);
        const FormSpace& Va = ps.patches[itf.a[0]].disc.X[k];
        const auto ka = traceKeys(Va, ps.dim, itf.a[1], &o);
        const auto kb = traceKeys(ps.patches[itf.b[0]].disc.X[k], ps.dim, itf.b[1], nullptr);
        std::map<int, int> signs;
        for (const auto& [key, ga] : ka) {
          const int gb = kb.at(key);
          auto it = signs.find(key.first);
          if (it == signs.end()) it = signs.emplace(key.first, traceSign(ps, itf, o, Va.kind, key.first)).first;
          uf.unite(offset[itf.a[0]] + ga, offset[itf.b[0]] + gb, it->second);
        }
      }
    }
    SpaceGlue sg;
    sg.local.resize(np);
    std::map<int, std::pair<int, int>> rootInfo;  // root -> (global, sign of root w.r.t. global)
    for (int q = 0; q < np; ++q) {
      const int n = offset[q + 1] - offset[q];
      sg.local[q].resize(n);
      for (int i = 0; i < n; ++i) {
        auto [r, s] = uf.find(offset[q] + i);
        auto it = rootInfo.find(r);
        if (it == rootInfo.end()) it = rootInfo.emplace(r, std::make_pair(sg.globalSize++, s)).first;
        sg.local[q][i] = {it->second.first, s * it->second.second};
      }
    }
    glue.spaces.push_back(std::move(sg));
  }
  return glue;
}

RealMatrix globalMatrix(const PatchSet& ps, const InterfaceGlue& glue, int k,
                        const std::function<RealMatrix(int patch)>& patchMatrix) {
  const SpaceGlue& sg = glue.spaces.at(k);
  std::vector<Eigen::Triplet<double>> trip;
  for (int q = 0; q < static_cast<int>(ps.patches.size()); ++q) {
    const RealMatrix A = patchMatrix(q);
    const auto& map = sg.local[q];
    if (A.rows() != static_cast<int>(map.size()) || A.cols() != static_cast<int>(map.size()))
      throw std::invalid_argument("globalMatrix: patch matrix size mismatch");
    for (int c = 0; c < A.outerSize(); ++c)
      for (RealMatrix::InnerIterator it(A, c); it; ++it) {
        const auto [gr, sr] = map[it.row()];
        const auto [gc, sc] = map[it.col()];
        trip.emplace_back(gr, gc, sr * sc * it.value());
      }
  }
  RealMatrix G(sg.globalSize, sg.globalSize);
  G.setFromTriplets(trip.begin(), trip.end());
  return G;
}

Eigen::VectorXd globalVector(const PatchSet& ps, const InterfaceGlue& glue, int k,
                             const std::function<Eigen::VectorXd(int patch)>& patchVector) {
  const SpaceGlue& sg = glue.spaces.at(k);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(sg.globalSize);
  for (int q = 0; q < static_cast<int>(ps.patches.size()); ++q) {
    const Eigen::VectorXd b = patchVector(q);
    if (b.size() != static_cast<int>(sg.local[q].size())) throw std::invalid_argument("globalVector: size mismatch");
    for (int i = 0; i < b.size(); ++i) g[sg.local[q][i].first] += sg.local[q][i].second * b[i];
  }
  return g;
}

Eigen::VectorXd patchCoefficients(const InterfaceGlue& glue, int k, int patch, const Eigen::VectorXd& global) {
  const auto& map = glue.spaces.at(k).local.at(patch);
  Eigen::VectorXd c(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) c[i] = map[i].second * global[map[i].first];
  return c;
}

RatMatrix globalOperator(const PatchSet& ps, const InterfaceGlue& glue, int k) {
  const SpaceGlue& src = glue.spaces.at(k);
  const SpaceGlue& tgt = glue.spaces.at(k + 1);
  // One representative patch function per global source function.
  std::vector<std::pair<int, int>> rep(src.globalSize, {-1, -1});
  for (int q = 0; q < static_cast<int>(ps.patches.size()); ++q)
    for (int i = 0; i < static_cast<int>(src.local[q].size()); ++i)
      if (rep[src.local[q][i].first].first < 0) rep[src.local[q][i].first] = {q, i};
  std::vector<std::vector<std::vector<std::pair<int, Rational>>>> cols(ps.patches.size());
  for (int q = 0; q < static_cast<int>(ps.patches.size()); ++q) {
    const auto& ops = ps.patches[q].disc.ops;
    if (static_cast<int>(ops.size()) <= k) throw std::invalid_argument("globalOperator: patch operators missing");
    RatMatrix op = ops[k];
    op.compress();
    cols[q].resize(op.cols);
    for (const auto& [r, c, v] : op.entries) cols[q][c].emplace_back(r, v);
  }
  RatMatrix out(tgt.globalSize, src.globalSize);
  for (int g = 0; g < src.globalSize; ++g) {
    const auto [q, i] = rep[g];
    const int s = src.local[q][i].second;
    for (const auto& [r, v] : cols[q][i]) {
      const auto [gr, sr] = tgt.local[q][r];
      out.entries.emplace_back(gr, g, v * Rational(s * sr));
    }
  }
  out.compress();
  return out;
}

std::vector<int> globalFreeIndices(const PatchSet& ps, const InterfaceGlue& glue, int k,
                                   const std::vector<std::array<int, 2>>& dirichlet) {
  const SpaceGlue& sg = glue.spaces.at(k);
  std::vector<char> constrained(sg.globalSize, 0);
  for (const auto& [q, face] : dirichlet) {
    checkFace(ps, {q, face});
    const FormSpace& V = ps.patches[q].disc.X[k];
    int g = 0;
    for (int c = 0; c < static_cast<int>(V.components.size()); ++c)
      for (int i = 0; i < V.components[c].size(); ++i, ++g)
        if (hasTrace(V, c, i, face / 2, face % 2)) constrained[sg.local[q][g].first] = 1;
  }
  std::vector<int> free;
  for (int g = 0; g < sg.globalSize; ++g)
    if (!constrained[g]) free.push_back(g);
  return free;
}

}  // namespace tsdr
