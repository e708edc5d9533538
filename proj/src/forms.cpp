#include "tsdr/forms.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <unordered_map>

namespace tsdr {

std::string toString(FormKind k) {
  switch (k) {
    case FormKind::H1: return "H1";
    case FormKind::Hcurl: return "Hcurl";
    case FormKind::Hdiv: return "Hdiv";
    case FormKind::L2: return "L2";
  }
  return "?";
}

std::array<std::pair<Rational, Rational>, 3> Component::support(int i) const {
  std::array<std::pair<Rational, Rational>, 3> box{};
  for (int l = 0; l < dim; ++l) box[l] = {functions[i][l].front(), functions[i][l].back()};
  return box;
}

double Component::eval(int i, const double* zeta, double* grad) const {
  double v[3], d[3];
  for (int l = 0; l < dim; ++l) {
    auto vd = evalScaled(functions[i][l], scaling[l], zeta[l]);
    v[l] = vd.first;
    d[l] = vd.second;
  }
  double val = 1.0;
  for (int l = 0; l < dim; ++l) val *= v[l];
  if (grad) {
    for (int l = 0; l < dim; ++l) {
      double g = d[l];
      for (int m = 0; m < dim; ++m)
        if (m != l) g *= v[m];
      grad[l] = g;
    }
  }
  return val;
}

int FormSpace::size() const {
  int s = 0;
  for (const auto& c : components) s += c.size();
  return s;
}

int FormSpace::offset(int c) const {
  int s = 0;
  for (int k = 0; k < c; ++k) s += components[k].size();
  return s;
}

std::pair<int, int> FormSpace::locate(int global) const {
  for (int c = 0; c < static_cast<int>(components.size()); ++c) {
    if (global < components[c].size()) return {c, global};
    global -= components[c].size();
  }
  throw std::out_of_range("form space: index out of range");
}

bool touchesBoundary(const LocalKnotVector& kv, int side) {
  const int p = kv.degree();
  if (side == 0) return kv.knots[p] == Rational(0);
  return kv.knots[1] == Rational(1);
}

bool hasTrace(const FormSpace& V, int c, int i, int dir, int side) {
  const Component& comp = V.components[c];
  switch (V.kind) {
    case FormKind::H1: break;
    case FormKind::Hcurl:
      if (comp.direction == dir) return false;
      break;
    case FormKind::Hdiv:
      if (comp.direction != dir) return false;
      break;
    case FormKind::L2: return false;
  }
  return touchesBoundary(comp.functions[i][dir], side);
}

std::vector<int> interiorIndices(const FormSpace& V, const std::vector<std::pair<int, int>>& faces) {
  std::vector<int> keep;
  int g = 0;
  for (int c = 0; c < static_cast<int>(V.components.size()); ++c) {
    for (int i = 0; i < V.components[c].size(); ++i, ++g) {
      bool constrained = false;
      for (auto [dir, side] : faces)
        if (hasTrace(V, c, i, dir, side)) constrained = true;
      if (!constrained) keep.push_back(g);
    }
  }
  return keep;
}

FormSpace subspace(const FormSpace& V, const std::vector<int>& keep) {
  FormSpace W = V;
  for (auto& c : W.components) {
    c.functions.clear();
    c.anchors.clear();
  }
  for (int g : keep) {
    auto [c, i] = V.locate(g);
    W.components[c].functions.push_back(V.components[c].functions[i]);
    if (!V.components[c].anchors.empty()) W.components[c].anchors.push_back(V.components[c].anchors[i]);
  }
  return W;
}

Eigen::VectorXd evalField(const FormSpace& V, const Eigen::VectorXd& coeffs, const std::vector<double>& zeta) {
  if (coeffs.size() != V.size()) throw std::invalid_argument("evalField: coefficient count mismatch");
  if (static_cast<int>(zeta.size()) != V.dim) throw std::invalid_argument("evalField: point dimension mismatch");
  for (double z : zeta)
    if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("evalField: point outside the parametric domain");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(V.valueSize());
  int g = 0;
  for (const auto& comp : V.components) {
    for (int i = 0; i < comp.size(); ++i, ++g) {
      if (coeffs[g] == 0.0) continue;
      const double v = comp.eval(i, zeta.data());
      const int slot = V.valueSize() == 1 ? 0 : comp.direction;
      out[slot] += coeffs[g] * v;
    }
  }
  return out;
}

std::vector<DiffRule> diffRules(int dim, int k, bool starred) {
  if (dim == 1 && k == 0) return {{0, 0, 0, 1}};
  if (dim == 2) {
    if (!starred) {
      if (k == 0) return {{0, 0, 0, 1}, {0, 1, 1, 1}};
      if (k == 1) return {{1, 0, 0, 1}, {0, 0, 1, -1}};
    } else {
      if (k == 0) return {{0, 0, 1, 1}, {0, 1, 0, -1}};
      if (k == 1) return {{0, 0, 0, 1}, {1, 0, 1, 1}};
    }
  }
  if (dim == 3) {
    if (k == 0) return {{0, 0, 0, 1}, {0, 1, 1, 1}, {0, 2, 2, 1}};
    if (k == 1)
      return {{2, 0, 1, 1}, {1, 0, 2, -1}, {0, 1, 2, 1}, {2, 1, 0, -1}, {1, 2, 0, 1}, {0, 2, 1, -1}};
    if (k == 2) return {{0, 0, 0, 1}, {1, 0, 1, 1}, {2, 0, 2, 1}};
  }
  throw std::invalid_argument("diffRules: unsupported (dimension, degree) pair");
}

namespace {

struct TupleHash {
  int dim;
  std::size_t operator()(const LocalKVTuple& t) const noexcept {
    LocalKnotVectorHash h;
    std::size_t s = 0;
    for (int l = 0; l < dim; ++l) s = s * 1000003u ^ h(t[l]);
    return s;
  }
};

struct TupleEq {
  int dim;
  bool operator()(const LocalKVTuple& a, const LocalKVTuple& b) const {
    for (int l = 0; l < dim; ++l)
      if (a[l] != b[l]) return false;
    return true;
  }
};

}  // namespace

IntMatrix derivativeByLookup(const FormSpace& src, const FormSpace& tgt, const std::vector<DiffRule>& rules) {
  const int d = src.dim;
  using Index = std::unordered_map<LocalKVTuple, int, TupleHash, TupleEq>;
  std::vector<Index> index;
  for (const auto& comp : tgt.components) {
    Index idx(comp.functions.size() * 2 + 1, TupleHash{d}, TupleEq{d});
    for (int i = 0; i < comp.size(); ++i) idx.emplace(comp.functions[i], i);
    index.push_back(std::move(idx));
  }
  std::vector<Eigen::Triplet<int>> trip;
  for (const auto& r : rules) {
    const Component& sc = src.components.at(r.src);
    const Component& tc = tgt.components.at(r.tgt);
    if (sc.scaling[r.dir] != Scaling::B)
      throw std::logic_error("derivativeByLookup: differentiated direction must be B-scaled");
    const int soff = src.offset(r.src), toff = tgt.offset(r.tgt);
    for (int i = 0; i < sc.size(); ++i) {
      const auto terms = derivativeDecomposition(sc.functions[i][r.dir]);
      for (const auto& term : terms) {
        if (term.sign == 0) continue;
        LocalKVTuple key = sc.functions[i];
        key[r.dir] = term.target;
        auto it = index[r.tgt].find(key);
        if (it == index[r.tgt].end()) {
          std::string msg = "derivative target missing for source block " + std::to_string(r.src) + " function " +
                            std::to_string(i) + " (local knot vectors";
          for (int l = 0; l < d; ++l) msg += " " + sc.functions[i][l].str();
          msg += "), expected " + term.target.str() + " in direction " + std::to_string(r.dir);
          if (!sc.anchors.empty())
            msg += " at anchor (" + std::to_string(sc.anchors[i][0]) + "," + std::to_string(sc.anchors[i][1]) + ")/2";
          throw std::runtime_error(msg);
        }
        (void)tc;
        trip.emplace_back(toff + it->second, soff + i, r.sign * term.sign);
      }
    }
  }
  IntMatrix m(tgt.size(), src.size());
  m.setFromTriplets(trip.begin(), trip.end());
  m.prune(0, 0);
  return m;
}

namespace {

// Splits N[t] at xi: N[t] = a N[left] + b N[right].
void splitAt(const LocalKnotVector& t, const Rational& xi, LocalKnotVector* left, LocalKnotVector* right, Rational* a,
             Rational* b) {
  const int p = t.degree();
  std::vector<Rational> k = t.knots;
  k.insert(std::upper_bound(k.begin(), k.end(), xi), xi);
  *left = LocalKnotVector(std::vector<Rational>(k.begin(), k.begin() + p + 2));
  *right = LocalKnotVector(std::vector<Rational>(k.begin() + 1, k.end()));
  auto clamp01 = [](const Rational& x) { return x < Rational(0) ? Rational(0) : (x > Rational(1) ? Rational(1) : x); };
  const Rational& t0 = t.knots[0];
  const Rational& t1 = t.knots[1];
  const Rational& tp = t.knots[p];
  const Rational& tq = t.knots[p + 1];
  *a = tp == t0 ? Rational(1) : clamp01((xi - t0) / (tp - t0));
  *b = tq == t1 ? Rational(1) : Rational(1) - clamp01((xi - t1) / (tq - t1));
}

int multiplicity(const LocalKnotVector& kv, const Rational& x) {
  return static_cast<int>(std::count(kv.knots.begin(), kv.knots.end(), x));
}

struct Refiner {
  int dim;
  const Component& tc;
  const std::unordered_map<LocalKVTuple, int, TupleHash, TupleEq>& index;

  bool inside(const LocalKVTuple& inner, const LocalKVTuple& outer) const {
    for (int l = 0; l < dim; ++l)
      if (inner[l].front() < outer[l].front() || inner[l].back() > outer[l].back()) return false;
    return true;
  }

  // Adds coef * S[key] expressed in the target basis; false if impossible.
  bool run(const LocalKVTuple& key, const Rational& coef, std::vector<std::pair<int, Rational>>& out,
           int depth = 0) const {
    if (coef.isZero()) return true;
    auto it = index.find(key);
    if (it != index.end()) {
      out.emplace_back(it->second, coef);
      return true;
    }
    if (depth > 64) return false;
    for (int l = 0; l < dim; ++l) {
      std::optional<Rational> best;
      for (const auto& f : tc.functions) {
        if (!inside(f, key)) continue;
        for (const auto& x : f[l].knots) {
          if (!(key[l].front() < x && x < key[l].back())) continue;
          if (multiplicity(f[l], x) <= multiplicity(key[l], x)) continue;
          if (!best || x < *best) best = x;
        }
      }
      if (!best) continue;
      LocalKnotVector left, right;
      Rational a, b;
      splitAt(key[l], *best, &left, &right, &a, &b);
      if (tc.scaling[l] == Scaling::D) {
        a = a * left.length() / key[l].length();
        b = b * right.length() / key[l].length();
      }
      LocalKVTuple kl = key, kr = key;
      kl[l] = left;
      kr[l] = right;
      if (!(left.length() > Rational(0))) a = Rational(0);
      if (!(right.length() > Rational(0))) b = Rational(0);
      return run(kl, coef * a, out, depth + 1) && run(kr, coef * b, out, depth + 1);
    }
    return false;
  }
};

}  // namespace

RatMatrix derivativeByRefinement(const FormSpace& src, const FormSpace& tgt, const std::vector<DiffRule>& rules) {
  const int d = src.dim;
  using Index = std::unordered_map<LocalKVTuple, int, TupleHash, TupleEq>;
  std::vector<Index> index;
  for (const auto& comp : tgt.components) {
    Index idx(comp.functions.size() * 2 + 1, TupleHash{d}, TupleEq{d});
    for (int i = 0; i < comp.size(); ++i) idx.emplace(comp.functions[i], i);
    index.push_back(std::move(idx));
  }
  RatMatrix m(tgt.size(), src.size());
  for (const auto& r : rules) {
    const Component& sc = src.components.at(r.src);
    const Component& tc = tgt.components.at(r.tgt);
    if (sc.scaling[r.dir] != Scaling::B)
      throw std::logic_error("derivativeByRefinement: differentiated direction must be B-scaled");
    Refiner ref{d, tc, index[r.tgt]};
    const int soff = src.offset(r.src), toff = tgt.offset(r.tgt);
    for (int i = 0; i < sc.size(); ++i) {
      for (const auto& term : derivativeDecomposition(sc.functions[i][r.dir])) {
        if (term.sign == 0) continue;
        LocalKVTuple key = sc.functions[i];
        key[r.dir] = term.target;
        std::vector<std::pair<int, Rational>> out;
        if (!ref.run(key, Rational(r.sign * term.sign), out)) {
          std::string msg = "derivative of source block " + std::to_string(r.src) + " function " + std::to_string(i) +
                            " is not in the target space (direction " + std::to_string(r.dir) + ")";
          throw std::runtime_error(msg);
        }
        for (const auto& [t, v] : out) m.entries.emplace_back(toff + t, soff + i, v);
      }
    }
  }
  m.compress();
  return m;
}

}  // namespace tsdr
