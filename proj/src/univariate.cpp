#include "tsdr/univariate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tsdr {

namespace {

constexpr int kMaxLocal = 24;

// Triangular Cox-de Boor table on a local knot sequence t[0..m-1]: on return
// row[j] holds N[t_j .. t_{j+d+1}](zeta) for the degree d reached.
void coxDeBoor(const double* t, int m, int degree, double zeta, double* row) {
  const int spans = m - 1;
  for (int j = 0; j < spans; ++j) {
    bool in = t[j] <= zeta && zeta < t[j + 1];
    if (!in && zeta == 1.0 && t[j + 1] == 1.0 && t[j] < 1.0) in = true;
    row[j] = in ? 1.0 : 0.0;
  }
  for (int d = 1; d <= degree; ++d) {
    for (int j = 0; j + d < spans; ++j) {
      double v = 0.0;
      double den1 = t[j + d] - t[j];
      if (den1 != 0.0) v += (zeta - t[j]) / den1 * row[j];
      double den2 = t[j + d + 1] - t[j + 1];
      if (den2 != 0.0) v += (t[j + d + 1] - zeta) / den2 * row[j + 1];
      row[j] = v;
    }
  }
}

int findSpan(const std::vector<Rational>& knots, int p, int n, double zeta) {
  // Returns k with knots[k] <= zeta < knots[k+1], p <= k <= n-1; zeta = 1 maps
  // to the last non-empty span.
  if (zeta >= 1.0) {
    int k = n - 1;
    while (k > p && knots[k] == knots[k + 1]) --k;
    return k;
  }
  int lo = p, hi = n;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (zeta < knots[mid].toDouble())
      hi = mid;
    else
      lo = mid;
  }
  return lo;
}

void checkDomain(double zeta) {
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw std::domain_error("parameter outside [0,1]");
}

}  // namespace

LocalKnotVector LocalKnotVector::minus() const {
  return LocalKnotVector(std::vector<Rational>(knots.begin(), knots.end() - 1));
}

LocalKnotVector LocalKnotVector::plus() const {
  return LocalKnotVector(std::vector<Rational>(knots.begin() + 1, knots.end()));
}

LocalKnotVector LocalKnotVector::reversed() const {
  std::vector<Rational> r(knots.rbegin(), knots.rend());
  for (auto& x : r) x = Rational(1) - x;
  return LocalKnotVector(std::move(r));
}

std::string LocalKnotVector::str() const {
  std::string s = "{";
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (i) s += ",";
    s += knots[i].str();
  }
  return s + "}";
}

std::size_t LocalKnotVectorHash::operator()(const LocalKnotVector& kv) const noexcept {
  std::size_t h = kv.knots.size();
  RationalHash rh;
  for (const auto& x : kv.knots) h ^= rh(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

KnotVector::KnotVector(int degree, std::vector<Rational> breakpoints, std::vector<int> multiplicities)
    : p_(degree), breaks_(std::move(breakpoints)), mults_(std::move(multiplicities)) {
  if (p_ < 0) throw std::invalid_argument("knot vector: negative degree");
  if (breaks_.size() < 2 || breaks_.size() != mults_.size())
    throw std::invalid_argument("knot vector: need at least two breakpoints with multiplicities");
  if (breaks_.front() != Rational(0) || breaks_.back() != Rational(1))
    throw std::invalid_argument("knot vector: breakpoints must start at 0 and end at 1");
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    if (!(breaks_[i - 1] < breaks_[i]))
      throw std::invalid_argument("knot vector: breakpoints not strictly increasing");
  if (mults_.front() != p_ + 1 || mults_.back() != p_ + 1)
    throw std::invalid_argument("knot vector: not p-open (boundary multiplicity must be p+1)");
  for (std::size_t i = 1; i + 1 < mults_.size(); ++i)
    if (mults_[i] < 1 || mults_[i] > p_ + 1)
      throw std::invalid_argument("knot vector: interior multiplicity must be in [1, p+1]");
  rebuild();
}

void KnotVector::rebuild() {
  knots_.clear();
  for (std::size_t i = 0; i < breaks_.size(); ++i)
    for (int m = 0; m < mults_[i]; ++m) knots_.push_back(breaks_[i]);
}

KnotVector KnotVector::fromKnots(int degree, const std::vector<Rational>& knots) {
  std::vector<Rational> b;
  std::vector<int> m;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (i > 0 && knots[i] < knots[i - 1]) throw std::invalid_argument("knot vector: knots decreasing");
    if (!b.empty() && b.back() == knots[i])
      ++m.back();
    else {
      b.push_back(knots[i]);
      m.push_back(1);
    }
  }
  return KnotVector(degree, b, m);
}

KnotVector KnotVector::uniform(int degree, int elements, int interiorMultiplicity) {
  if (elements < 1) throw std::invalid_argument("knot vector: need at least one element");
  std::vector<Rational> b;
  std::vector<int> m;
  for (int i = 0; i <= elements; ++i) {
    b.emplace_back(i, elements);
    m.push_back(i == 0 || i == elements ? degree + 1 : interiorMultiplicity);
  }
  return KnotVector(degree, b, m);
}

KnotVector KnotVector::parse(const std::string& text) {
  auto semi = text.find(';');
  if (semi == std::string::npos) throw std::invalid_argument("knot vector text: missing ';'");
  int p = 0;
  try {
    p = std::stoi(text.substr(0, semi));
  } catch (const std::logic_error&) {
    throw std::invalid_argument("knot vector text: bad degree");
  }
  std::istringstream in(text.substr(semi + 1));
  std::string tok;
  std::vector<Rational> b;
  std::vector<int> m;
  while (in >> tok) {
    auto colon = tok.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("knot vector text: token without ':' " + tok);
    b.push_back(Rational::parse(tok.substr(0, colon)));
    try {
      m.push_back(std::stoi(tok.substr(colon + 1)));
    } catch (const std::logic_error&) {
      throw std::invalid_argument("knot vector text: bad multiplicity " + tok);
    }
  }
  return KnotVector(p, b, m);
}

std::string KnotVector::str() const {
  std::string s = std::to_string(p_) + ";";
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    Rational r = breaks_[i];
    s += " " + std::to_string(r.num()) + "/" + std::to_string(r.den()) + ":" + std::to_string(mults_[i]);
  }
  return s;
}

int KnotVector::maxInteriorMultiplicity() const {
  int m = 0;
  for (std::size_t i = 1; i + 1 < mults_.size(); ++i) m = std::max(m, mults_[i]);
  return m;
}

LocalKnotVector KnotVector::local(int i) const {
  return LocalKnotVector(std::vector<Rational>(knots_.begin() + i, knots_.begin() + i + p_ + 2));
}

std::vector<Rational> KnotVector::meshLines() const {
  std::vector<Rational> lines;
  const int boundary = p_ / 2 + 1;
  for (int k = 0; k < boundary; ++k) lines.emplace_back(0);
  for (std::size_t i = 1; i + 1 < breaks_.size(); ++i)
    for (int k = 0; k < mults_[i]; ++k) lines.push_back(breaks_[i]);
  for (int k = 0; k < boundary; ++k) lines.emplace_back(1);
  return lines;
}

KnotVector KnotVector::dyadicRefinement() const {
  std::vector<Rational> b;
  std::vector<int> m;
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    if (i > 0) {
      b.push_back((breaks_[i - 1] + breaks_[i]) / Rational(2));
      m.push_back(1);
    }
    b.push_back(breaks_[i]);
    m.push_back(mults_[i]);
  }
  return KnotVector(p_, b, m);
}

std::vector<double> evalBasis(const KnotVector& kv, double zeta) {
  return evalBasisDerivs(kv, zeta).first;
}

std::pair<std::vector<double>, std::vector<double>> evalBasisDerivs(const KnotVector& kv, double zeta) {
  checkDomain(zeta);
  const int p = kv.degree();
  const int n = kv.dim();
  const auto& U = kv.knots();
  const int k = findSpan(U, p, n, zeta);
  // ndu as in the classical triangular algorithm.
  std::vector<double> left(p + 1), right(p + 1);
  std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1));
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = zeta - U[k + 1 - j].toDouble();
    right[j] = U[k + j].toDouble() - zeta;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      double temp = ndu[j][r] == 0.0 ? 0.0 : ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  std::vector<double> vals(n, 0.0), ders(n, 0.0);
  for (int r = 0; r <= p; ++r) vals[k - p + r] = ndu[r][p];
  if (p >= 1) {
    for (int r = 0; r <= p; ++r) {
      double d = 0.0;
      if (r >= 1 && ndu[p][r - 1] != 0.0) d += ndu[r - 1][p - 1] / ndu[p][r - 1];
      if (r <= p - 1 && ndu[p][r] != 0.0) d -= ndu[r][p - 1] / ndu[p][r];
      ders[k - p + r] = p * d;
    }
  }
  return {vals, ders};
}

double evalLocal(const LocalKnotVector& kv, double zeta) {
  checkDomain(zeta);
  const int m = static_cast<int>(kv.knots.size());
  if (m > kMaxLocal) throw std::invalid_argument("local knot vector too long");
  double t[kMaxLocal], row[kMaxLocal];
  for (int i = 0; i < m; ++i) t[i] = kv.knots[i].toDouble();
  if (zeta < t[0] || zeta > t[m - 1]) return 0.0;
  coxDeBoor(t, m, m - 2, zeta, row);
  return row[0];
}

std::pair<double, double> evalLocalDeriv(const LocalKnotVector& kv, double zeta) {
  checkDomain(zeta);
  const int m = static_cast<int>(kv.knots.size());
  const int p = m - 2;
  if (m > kMaxLocal) throw std::invalid_argument("local knot vector too long");
  double t[kMaxLocal], row[kMaxLocal];
  for (int i = 0; i < m; ++i) t[i] = kv.knots[i].toDouble();
  if (zeta < t[0] || zeta > t[m - 1]) return {0.0, 0.0};
  if (p == 0) {
    coxDeBoor(t, m, 0, zeta, row);
    return {row[0], 0.0};
  }
  coxDeBoor(t, m, p - 1, zeta, row);
  const double a = row[0], b = row[1];
  double val = 0.0, der = 0.0;
  const double d1 = t[p] - t[0], d2 = t[p + 1] - t[1];
  if (d1 != 0.0) {
    val += (zeta - t[0]) / d1 * a;
    der += p / d1 * a;
  }
  if (d2 != 0.0) {
    val += (t[p + 1] - zeta) / d2 * b;
    der -= p / d2 * b;
  }
  return {val, der};
}

std::pair<double, double> evalScaled(const LocalKnotVector& kv, Scaling s, double zeta) {
  auto vd = evalLocalDeriv(kv, zeta);
  if (s == Scaling::D) {
    const double f = static_cast<double>(kv.knots.size() - 1) / kv.length().toDouble();
    vd.first *= f;
    vd.second *= f;
  }
  return vd;
}

double curryScaled(const LocalKnotVector& kv, int p, double zeta) {
  Rational len = kv.length();
  if (len.isZero()) throw std::domain_error("Curry-Schoenberg scaling of a zero-length support");
  return p / len.toDouble() * evalLocal(kv, zeta);
}

KnotVector derivedKnotVector(const KnotVector& kv) {
  if (kv.degree() < 1) throw std::invalid_argument("derived knot vector: degree must be >= 1");
  if (kv.maxInteriorMultiplicity() > kv.degree())
    throw std::invalid_argument("derived knot vector: unsupported interior multiplicity p+1 (discontinuous splines)");
  const auto& k = kv.knots();
  return KnotVector::fromKnots(kv.degree() - 1, std::vector<Rational>(k.begin() + 1, k.end() - 1));
}

std::vector<Anchor1D> anchors(const KnotVector& kv) {
  const int p = kv.degree();
  std::vector<Anchor1D> out;
  for (int i = 0; i < kv.dim(); ++i) {
    Anchor1D a;
    a.index = i;
    a.localKV = kv.local(i);
    if (p % 2 == 1)
      a.position = a.localKV.knots[(p + 1) / 2];
    else
      a.position = (a.localKV.knots[p / 2] + a.localKV.knots[p / 2 + 1]) / Rational(2);
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Rational> grevilleSites(const KnotVector& kv) {
  const int p = kv.degree();
  if (p < 1) throw std::invalid_argument("Greville sites: degree must be >= 1");
  const auto& k = kv.knots();
  std::vector<Rational> g;
  for (int i = 0; i < kv.dim(); ++i) {
    Rational s(0);
    for (int j = 1; j <= p; ++j) s += k[i + j];
    g.push_back(s / Rational(p));
  }
  return g;
}

std::vector<Rational> insertionAlphas(const KnotVector& kv, const Rational& xi) {
  const int p = kv.degree();
  const int n = kv.dim();
  const auto& t = kv.knots();
  if (!(Rational(0) < xi && xi < Rational(1))) throw std::domain_error("knot insertion: value outside (0,1)");
  for (std::size_t i = 0; i < kv.breakpoints().size(); ++i)
    if (kv.breakpoints()[i] == xi && kv.multiplicities()[i] >= p + 1)
      throw std::invalid_argument("knot insertion: knot already has multiplicity p+1");
  int k = p;
  while (k + 1 < n + p + 1 && t[k + 1] <= xi) ++k;
  std::vector<Rational> alpha(n + 1);
  for (int j = 0; j <= n; ++j) {
    if (j <= k - p)
      alpha[j] = Rational(1);
    else if (j <= k)
      alpha[j] = (xi - t[j]) / (t[j + p] - t[j]);
    else
      alpha[j] = Rational(0);
  }
  return alpha;
}

std::pair<KnotVector, Eigen::MatrixXd> insertKnot(const KnotVector& kv, const Eigen::MatrixXd& coeffs,
                                                   const Rational& xi) {
  const int n = kv.dim();
  if (coeffs.rows() != n) throw std::invalid_argument("knot insertion: coefficient count mismatch");
  auto alpha = insertionAlphas(kv, xi);
  Eigen::MatrixXd out(n + 1, coeffs.cols());
  for (int j = 0; j <= n; ++j) {
    const double a = alpha[j].toDouble();
    Eigen::RowVectorXd cj = j < n ? Eigen::RowVectorXd(coeffs.row(j)) : Eigen::RowVectorXd::Zero(coeffs.cols());
    Eigen::RowVectorXd cm = j > 0 ? Eigen::RowVectorXd(coeffs.row(j - 1)) : Eigen::RowVectorXd::Zero(coeffs.cols());
    out.row(j) = a * cj + (1.0 - a) * cm;
  }
  std::vector<Rational> knots = kv.knots();
  knots.insert(std::upper_bound(knots.begin(), knots.end(), xi), xi);
  return {KnotVector::fromKnots(kv.degree(), knots), out};
}

std::array<DerivativeTerm, 2> derivativeDecomposition(const LocalKnotVector& kv) {
  const int p = kv.degree();
  std::array<DerivativeTerm, 2> out;
  if (p < 1) return out;
  LocalKnotVector parts[2] = {kv.minus(), kv.plus()};
  for (int s = 0; s < 2; ++s) {
    out[s].target = parts[s];
    Rational len = parts[s].length();
    if (len.isZero()) {
      out[s].coefficient = Rational(0);
      out[s].sign = 0;
    } else {
      out[s].coefficient = Rational(p) / len;
      out[s].sign = s == 0 ? 1 : -1;
    }
  }
  return out;
}

Eigen::MatrixXd interpolateAtGreville(const KnotVector& kv, const Eigen::MatrixXd& values) {
  auto g = grevilleSites(kv);
  const int n = kv.dim();
  if (values.rows() != n) throw std::invalid_argument("interpolation: one value row per Greville site required");
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    auto b = evalBasis(kv, g[i].toDouble());
    for (int j = 0; j < n; ++j) A(i, j) = b[j];
  }
  return A.partialPivLu().solve(values);
}

Quadrature1D gaussLegendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre: need at least one point");
  Quadrature1D q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // nodes ascending on [a,b]
    const int idx = n - 1 - i;
    q.nodes[idx] = 0.5 * (a + b) + 0.5 * (b - a) * x;
    q.weights[idx] = (b - a) / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

}  // namespace tsdr
