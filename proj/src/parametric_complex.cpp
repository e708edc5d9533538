#include "tsdr/parametric_complex.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tsdr {

namespace {

std::vector<unsigned> masksOfDim(int d, int k) {
  std::vector<unsigned> m;
  for (unsigned mask = 0; mask < (1u << d); ++mask)
    if (std::popcount(mask) == k) m.push_back(mask);
  return m;
}

int countFor(const TensorMesh& M, unsigned mask, int l) {
  return (mask >> l & 1u) ? M.spanCount(l) : M.lineCount(l);
}

}  // namespace

int TensorMesh::find(unsigned spans, const std::array<int, 3>& index) const {
  const int k = std::popcount(spans);
  int base = 0;
  for (unsigned m : masksOfDim(dim, k)) {
    int total = 1;
    for (int l = 0; l < dim; ++l) total *= countFor(*this, m, l);
    if (m == spans) {
      int lin = 0, stride = 1;
      for (int l = 0; l < dim; ++l) {
        const int c = countFor(*this, m, l);
        if (index[l] < 0 || index[l] >= c) return -1;
        lin += index[l] * stride;
        stride *= c;
      }
      return base + lin;
    }
    base += total;
  }
  return -1;
}

TensorMesh buildTensorMesh(const std::vector<KnotVector>& kvs) {
  TensorMesh M;
  M.dim = static_cast<int>(kvs.size());
  if (M.dim < 1 || M.dim > 3) throw std::invalid_argument("tensor mesh: dimension must be 1, 2 or 3");
  M.kvs = kvs;
  for (int l = 0; l < M.dim; ++l) M.lines[l] = kvs[l].meshLines();
  for (int k = 0; k <= M.dim; ++k) {
    for (unsigned mask : masksOfDim(M.dim, k)) {
      std::array<int, 3> cnt{1, 1, 1};
      for (int l = 0; l < M.dim; ++l) cnt[l] = countFor(M, mask, l);
      for (int c = 0; c < cnt[2]; ++c)
        for (int b = 0; b < cnt[1]; ++b)
          for (int a = 0; a < cnt[0]; ++a) {
            MeshEntity e;
            e.index = {a, b, c};
            e.spans = mask;
            for (int l = 0; l < M.dim; ++l)
              if ((mask >> l & 1u) && M.lines[l][e.index[l]] == M.lines[l][e.index[l] + 1]) e.zeroMeasure = true;
            M.entities[k].push_back(e);
          }
    }
  }
  return M;
}

int SplineSpace::size() const {
  int s = 1;
  for (int l = 0; l < dim; ++l) s *= kv[l].dim();
  return s;
}

std::array<int, 3> SplineSpace::sizes() const {
  std::array<int, 3> s{1, 1, 1};
  for (int l = 0; l < dim; ++l) s[l] = kv[l].dim();
  return s;
}

Component SplineSpace::toComponent() const {
  Component c;
  c.dim = dim;
  c.direction = direction;
  std::array<std::vector<Anchor1D>, 3> an;
  for (int l = 0; l < dim; ++l) {
    c.degree[l] = kv[l].degree();
    c.scaling[l] = scaling[l];
    an[l] = anchors(kv[l]);
  }
  for (int l = dim; l < 3; ++l) an[l] = {Anchor1D{}};
  for (const auto& a2 : an[2])
    for (const auto& a1 : an[1])
      for (const auto& a0 : an[0]) c.functions.push_back({a0.localKV, a1.localKV, a2.localKV});
  return c;
}

IntMatrix univariateDerivative(const KnotVector& kv) {
  const KnotVector kd = derivedKnotVector(kv);
  std::map<std::vector<Rational>, int> target;
  const auto ta = anchors(kd);
  for (const auto& a : ta) target[a.localKV.knots] = a.index;
  std::vector<Eigen::Triplet<int>> t;
  for (const auto& a : anchors(kv)) {
    for (const auto& term : derivativeDecomposition(a.localKV)) {
      if (term.sign == 0) continue;
      auto it = target.find(term.target.knots);
      if (it == target.end()) throw std::logic_error("univariate derivative: target basis function not found");
      t.emplace_back(it->second, a.index, term.sign);
    }
  }
  IntMatrix D(kd.dim(), kv.dim());
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

namespace {

SplineSpace makeBlock(const std::vector<KnotVector>& kv, const std::vector<KnotVector>& kd, unsigned dmask,
                      int direction) {
  SplineSpace s;
  s.dim = static_cast<int>(kv.size());
  s.direction = direction;
  for (int l = 0; l < s.dim; ++l) {
    const bool D = dmask >> l & 1u;
    s.kv[l] = D ? kd[l] : kv[l];
    s.scaling[l] = D ? Scaling::D : Scaling::B;
  }
  return s;
}

FormKind kindOf(int d, int k) {
  if (k == 0) return FormKind::H1;
  if (k == d) return FormKind::L2;
  if (k == 1) return FormKind::Hcurl;
  return FormKind::Hdiv;
}

}  // namespace

DiscreteComplex buildComplex(const std::vector<KnotVector>& kvs) {
  const int d = static_cast<int>(kvs.size());
  if (d < 1 || d > 3) throw std::invalid_argument("complex: dimension must be 1, 2 or 3");
  std::vector<KnotVector> kd;
  for (const auto& kv : kvs) {
    if (kv.degree() < 1) throw std::invalid_argument("complex: degree must be >= 1 in every direction");
    kd.push_back(derivedKnotVector(kv));
  }
  DiscreteComplex cx;
  cx.dim = d;
  cx.kvs = kvs;
  const unsigned all = (1u << d) - 1;
  for (int k = 0; k <= d; ++k) {
    std::vector<SplineSpace> blocks;
    if (k == 0) {
      blocks.push_back(makeBlock(kvs, kd, 0u, -1));
    } else if (k == d) {
      blocks.push_back(makeBlock(kvs, kd, all, -1));
    } else if (k == 1) {
      for (int l = 0; l < d; ++l) blocks.push_back(makeBlock(kvs, kd, 1u << l, l));
    } else {
      for (int l = 0; l < d; ++l) blocks.push_back(makeBlock(kvs, kd, all & ~(1u << l), l));
    }
    FormSpace V;
    V.dim = d;
    V.kind = kindOf(d, k);
    for (const auto& b : blocks) V.components.push_back(b.toComponent());
    cx.blocks.push_back(blocks);
    cx.spaces.push_back(std::move(V));
    std::vector<int> all_idx(cx.spaces.back().size());
    for (int i = 0; i < static_cast<int>(all_idx.size()); ++i) all_idx[i] = i;
    cx.retained.push_back(std::move(all_idx));
  }
  for (int k = 0; k < d; ++k) cx.ops.push_back(diffMatrix(cx, k));
  return cx;
}

DiscreteComplex buildUniformComplex(const std::vector<int>& degrees, const std::vector<int>& n) {
  if (degrees.size() != n.size()) throw std::invalid_argument("complex: degrees and sizes differ in length");
  std::vector<KnotVector> kvs;
  for (std::size_t l = 0; l < degrees.size(); ++l) {
    const int elements = n[l] - degrees[l];
    if (elements < 1) throw std::invalid_argument("complex: n must exceed the degree");
    kvs.push_back(KnotVector::uniform(degrees[l], elements));
  }
  return buildComplex(kvs);
}

IntMatrix diffMatrix(const DiscreteComplex& cx, int k) {
  const int d = cx.dim;
  if (k < 0 || k >= d) throw std::invalid_argument("diffMatrix: k out of range");
  const auto& src = cx.blocks[k];
  const auto& tgt = cx.blocks[k + 1];
  std::vector<int> soff(src.size() + 1, 0), toff(tgt.size() + 1, 0);
  for (std::size_t c = 0; c < src.size(); ++c) soff[c + 1] = soff[c] + src[c].size();
  for (std::size_t c = 0; c < tgt.size(); ++c) toff[c + 1] = toff[c] + tgt[c].size();
  std::vector<Eigen::Triplet<int>> trip;
  for (const auto& r : diffRules(d, k)) {
    const SplineSpace& s = src[r.src];
    const SplineSpace& t = tgt[r.tgt];
    IntMatrix block;
    for (int l = d - 1; l >= 0; --l) {
      IntMatrix f;
      if (l == r.dir) {
        f = univariateDerivative(s.kv[l]);
        if (!(derivedKnotVector(s.kv[l]) == t.kv[l])) throw std::logic_error("diffMatrix: block mismatch");
      } else {
        if (!(s.kv[l] == t.kv[l])) throw std::logic_error("diffMatrix: transverse block mismatch");
        f = identityInt(s.kv[l].dim());
      }
      block = (l == d - 1) ? f : kron(block, f);
    }
    for (int c = 0; c < block.outerSize(); ++c)
      for (IntMatrix::InnerIterator it(block, c); it; ++it)
        trip.emplace_back(toff[r.tgt] + it.row(), soff[r.src] + c, r.sign * it.value());
  }
  IntMatrix m(toff.back(), soff.back());
  m.setFromTriplets(trip.begin(), trip.end());
  m.prune([](int, int, int v) { return v != 0; });
  return m;
}

bool ExactnessReport::pass() const {
  if (skipped) return false;
  for (const auto& c : checks)
    if (!c.second) return false;
  return true;
}

std::string ExactnessReport::str() const {
  std::ostringstream os;
  os << "dims:";
  for (int d : dims) os << " " << d;
  os << "\nranks:";
  for (int r : ranks) os << " " << r;
  os << "\n";
  for (const auto& c : checks) os << (c.second ? "ok   " : "FAIL ") << c.first << "\n";
  if (skipped) os << "rank computation skipped (size limit)\n";
  return os.str();
}

ExactnessReport verifyExactnessOps(const std::vector<int>& dims, const std::vector<RatMatrix>& ops,
                                   int kernelOfFirst, int cokernelOfLast, bool requireUnit, int rankLimit) {
  ExactnessReport rep;
  rep.dims = dims;
  const int nops = static_cast<int>(ops.size());
  for (int k = 0; k < nops; ++k) {
    const int r = exactRank(ops[k], rankLimit);
    if (r < 0) rep.skipped = true;
    rep.ranks.push_back(r);
  }
  for (int k = 0; k + 1 < nops; ++k)
    rep.checks.emplace_back("d" + std::to_string(k + 1) + "*d" + std::to_string(k) + " = 0", (ops[k + 1] * ops[k]).isZero());
  if (requireUnit)
    for (int k = 0; k < nops; ++k)
      rep.checks.emplace_back("entries of d" + std::to_string(k) + " in {-1,0,1}", ops[k].entriesAreUnit());
  if (rep.skipped) return rep;
  rep.checks.emplace_back("rank(d0) = dim V0 - " + std::to_string(kernelOfFirst),
                          rep.ranks[0] == rep.dims[0] - kernelOfFirst);
  for (int k = 1; k < nops; ++k)
    rep.checks.emplace_back("nullity(d" + std::to_string(k) + ") = rank(d" + std::to_string(k - 1) + ")",
                            rep.dims[k] - rep.ranks[k] == rep.ranks[k - 1]);
  rep.checks.emplace_back("rank(d" + std::to_string(nops - 1) + ") = dim V" + std::to_string(nops) + " - " +
                              std::to_string(cokernelOfLast),
                          rep.ranks[nops - 1] == rep.dims[nops] - cokernelOfLast);
  return rep;
}

ExactnessReport verifyExactnessOf(const Complex& cx, int kernelOfFirst, int cokernelOfLast, int rankLimit) {
  std::vector<int> dims;
  for (const auto& V : cx.spaces) dims.push_back(V.size());
  std::vector<RatMatrix> ops;
  for (const auto& d : cx.ops) ops.push_back(RatMatrix::fromInt(d));
  return verifyExactnessOps(dims, ops, kernelOfFirst, cokernelOfLast, true, rankLimit);
}

ExactnessReport verifyExactness(const DiscreteComplex& cx, int rankLimit) {
  const int kerFirst = cx.bcFaces.empty() ? 1 : 0;
  const int cokerLast = static_cast<int>(cx.bcFaces.size()) == 2 * cx.dim ? 1 : 0;
  return verifyExactnessOf(cx, kerFirst, cokerLast, rankLimit);
}

std::vector<std::pair<int, int>> allFaces(int dim) {
  std::vector<std::pair<int, int>> f;
  for (int l = 0; l < dim; ++l) {
    f.emplace_back(l, 0);
    f.emplace_back(l, 1);
  }
  return f;
}

DiscreteComplex restrictBoundary(const DiscreteComplex& cx, const std::vector<std::pair<int, int>>& faces) {
  std::vector<std::pair<int, int>> fs;
  for (auto f : faces) {
    if (f.first < 0 || f.first >= cx.dim || f.second < 0 || f.second > 1)
      throw std::invalid_argument("restrictBoundary: invalid face");
    if (std::find(fs.begin(), fs.end(), f) == fs.end()) fs.push_back(f);
  }
  for (auto f : cx.bcFaces)
    if (std::find(fs.begin(), fs.end(), f) == fs.end()) fs.push_back(f);
  std::sort(fs.begin(), fs.end());
  // Rebuild from the full complex so repeated restriction composes.
  DiscreteComplex full = buildComplex(cx.kvs);
  DiscreteComplex out = full;
  out.bcFaces = fs;
  for (int k = 0; k <= cx.dim; ++k) {
    out.retained[k] = interiorIndices(full.spaces[k], fs);
    out.spaces[k] = subspace(full.spaces[k], out.retained[k]);
  }
  for (int k = 0; k < cx.dim; ++k) out.ops[k] = selectRowsCols(full.ops[k], out.retained[k + 1], out.retained[k]);
  return out;
}

bool IncidenceReport::pass() const {
  if (!applicable) return false;
  for (bool b : bijections)
    if (!b) return false;
  return gradMatchesIncidence && unitEntries;
}

namespace {

// Entity (mask, index) attached to function `f` of block `b` under the
// correspondence for equal degree p; returns false when off the expected set.
bool entityOf(const TensorMesh& M, const SplineSpace& b, const std::array<int, 3>& idx, int p, unsigned* mask,
              std::array<int, 3>* eidx) {
  unsigned dm = 0;
  for (int l = 0; l < M.dim; ++l)
    if (b.scaling[l] == Scaling::D) dm |= 1u << l;
  const bool odd = p % 2 == 1;
  *mask = odd ? dm : ((1u << M.dim) - 1) & ~dm;
  *eidx = {0, 0, 0};
  const auto& an = idx;
  for (int l = 0; l < M.dim; ++l) {
    const bool D = dm >> l & 1u;
    const auto anc = anchors(b.kv[l])[an[l]];
    if (odd) {
      (*eidx)[l] = an[l];
      if (D) {
        if (an[l] + 1 >= M.lineCount(l)) return false;
        if (anc.position != (M.lines[l][an[l]] + M.lines[l][an[l] + 1]) / Rational(2)) return false;
      } else {
        if (an[l] >= M.lineCount(l) || anc.position != M.lines[l][an[l]]) return false;
      }
    } else {
      if (D) {
        (*eidx)[l] = an[l] + 1;  // M' drops the outermost line on each side
        if ((*eidx)[l] < 1 || (*eidx)[l] > M.lineCount(l) - 2) return false;
        if (anc.position != M.lines[l][(*eidx)[l]]) return false;
      } else {
        (*eidx)[l] = an[l];
        if (an[l] + 1 >= M.lineCount(l)) return false;
        if (anc.position != (M.lines[l][an[l]] + M.lines[l][an[l] + 1]) / Rational(2)) return false;
      }
    }
  }
  return true;
}

std::vector<int> correspondence(const DiscreteComplex& cx, const TensorMesh& M, int k, int p, bool* ok) {
  std::vector<int> map;
  *ok = true;
  for (const auto& b : cx.blocks[k]) {
    auto s = b.sizes();
    for (int c = 0; c < s[2]; ++c)
      for (int bb = 0; bb < s[1]; ++bb)
        for (int a = 0; a < s[0]; ++a) {
          unsigned mask;
          std::array<int, 3> e;
          if (!entityOf(M, b, {a, bb, c}, p, &mask, &e)) {
            *ok = false;
            map.push_back(-1);
            continue;
          }
          map.push_back(M.find(mask, e));
        }
  }
  return map;
}

}  // namespace

IntMatrix meshIncidenceForGrad(const DiscreteComplex& cx, const TensorMesh& M) {
  const int p = cx.kvs[0].degree();
  const bool odd = p % 2 == 1;
  bool ok0, ok1;
  const auto map0 = correspondence(cx, M, 0, p, &ok0);
  const auto map1 = correspondence(cx, M, 1, p, &ok1);
  if (!ok0 || !ok1) throw std::logic_error("incidence: anchor-entity correspondence failed");
  const int d = M.dim;
  // Entity ids of the two kinds involved, then the incidence in entity numbering.
  const int lowK = odd ? 0 : d;       // vertices / cells
  const int highK = odd ? 1 : d - 1;  // edges / faces
  std::map<int, int> col, row;  // entity id -> function index
  for (int i = 0; i < static_cast<int>(map0.size()); ++i) col[map0[i]] = i;
  for (int i = 0; i < static_cast<int>(map1.size()); ++i) row[map1[i]] = i;
  std::vector<Eigen::Triplet<int>> t;
  for (int eid = 0; eid < static_cast<int>(M.entities[highK].size()); ++eid) {
    const MeshEntity& e = M.entities[highK][eid];
    auto r = row.find(eid);
    if (r == row.end()) continue;  // boundary face in the even case
    if (odd) {
      // edge along l: -1 at the tail vertex, +1 at the head vertex
      int l = std::countr_zero(e.spans);
      std::array<int, 3> tail = e.index, head = e.index;
      head[l] += 1;
      t.emplace_back(r->second, col.at(M.find(0u, tail)), -1);
      t.emplace_back(r->second, col.at(M.find(0u, head)), +1);
    } else {
      // face normal to l at line L: the cell below has it on its + side (boundary
      // coefficient +1), the cell above on its - side (-1); grad is minus the transpose.
      const unsigned all = (1u << d) - 1;
      int l = std::countr_zero(all & ~e.spans);
      std::array<int, 3> below = e.index, above = e.index;
      below[l] -= 1;
      t.emplace_back(r->second, col.at(M.find(all, below)), -1);
      t.emplace_back(r->second, col.at(M.find(all, above)), +1);
    }
  }
  (void)lowK;
  IntMatrix A(static_cast<int>(map1.size()), static_cast<int>(map0.size()));
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

IncidenceReport entityCorrespondence(const DiscreteComplex& cx) {
  IncidenceReport rep;
  const int d = cx.dim;
  const int p = cx.kvs[0].degree();
  for (const auto& kv : cx.kvs)
    if (kv.degree() != p) {
      rep.note = "not applicable: mixed degrees";
      return rep;
    }
  rep.applicable = true;
  rep.cochain = p % 2 == 1;
  const DiscreteComplex full = buildComplex(cx.kvs);
  rep.unitEntries = true;
  for (const auto& op : full.ops) rep.unitEntries = rep.unitEntries && entriesAreUnit(op);
  const TensorMesh M = buildTensorMesh(cx.kvs);
  for (int k = 0; k <= d; ++k) {
    bool ok;
    auto map = correspondence(full, M, k, p, &ok);
    std::vector<int> sorted = map;
    std::sort(sorted.begin(), sorted.end());
    const bool injective = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
    // Expected target set size.
    std::size_t expected = 0;
    const int ek = rep.cochain ? k : d - k;
    for (const auto& e : M.entities[ek]) {
      bool interior = true;
      if (!rep.cochain)
        for (int l = 0; l < d; ++l)
          if (!(e.spans >> l & 1u) && (e.index[l] == 0 || e.index[l] == M.lineCount(l) - 1)) interior = false;
      if (interior) ++expected;
    }
    rep.bijections.push_back(ok && injective && sorted.front() >= 0 && map.size() == expected);
  }
  try {
    rep.gradMatchesIncidence = sameEntries(full.ops[0], meshIncidenceForGrad(full, M));
  } catch (const std::exception& e) {
    rep.gradMatchesIncidence = false;
    rep.note = e.what();
  }
  if (rep.note.empty())
    rep.note = rep.cochain ? "cochain complex of M (vertices, edges, faces, cells)"
                           : "chain complex on interior entities of M (cells, faces, edges, vertices)";
  return rep;
}

}  // namespace tsdr
