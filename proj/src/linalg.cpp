#include "tsdr/linalg.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "tsdr/rational.hpp"

namespace tsdr {

IntMatrix identityInt(int n) {
  IntMatrix I(n, n);
  I.setIdentity();
  return I;
}

IntMatrix kron(const IntMatrix& a, const IntMatrix& b) {
  std::vector<Eigen::Triplet<int>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros()) * b.nonZeros());
  for (int ca = 0; ca < a.outerSize(); ++ca)
    for (IntMatrix::InnerIterator ia(a, ca); ia; ++ia)
      for (int cb = 0; cb < b.outerSize(); ++cb)
        for (IntMatrix::InnerIterator ib(b, cb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ca * b.cols() + cb, ia.value() * ib.value());
  IntMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

bool isZero(const IntMatrix& a) {
  for (int c = 0; c < a.outerSize(); ++c)
    for (IntMatrix::InnerIterator it(a, c); it; ++it)
      if (it.value() != 0) return false;
  return true;
}

bool entriesAreUnit(const IntMatrix& a) {
  for (int c = 0; c < a.outerSize(); ++c)
    for (IntMatrix::InnerIterator it(a, c); it; ++it)
      if (it.value() < -1 || it.value() > 1) return false;
  return true;
}

bool sameEntries(const IntMatrix& a, const IntMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  IntMatrix d = a - b;
  return isZero(d);
}

IntMatrix selectRowsCols(const IntMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> rowMap(a.rows(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) rowMap[rows[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<int>> t;
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (IntMatrix::InnerIterator it(a, cols[j]); it; ++it)
      if (rowMap[it.row()] >= 0 && it.value() != 0) t.emplace_back(rowMap[it.row()], static_cast<int>(j), it.value());
  IntMatrix s(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

RealMatrix toReal(const IntMatrix& a) { return a.cast<double>(); }

namespace {

using Row = std::vector<std::pair<int, Rational>>;  // sorted by column

int eliminate(std::vector<Row>& rows, int ncols) {
  for (auto& r : rows) std::sort(r.begin(), r.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  // Buckets of row ids by leading column.
  std::vector<std::vector<int>> bucket(ncols);
  for (int i = 0; i < static_cast<int>(rows.size()); ++i)
    if (!rows[i].empty()) bucket[rows[i].front().first].push_back(i);

  int rank = 0;
  for (int c = 0; c < ncols; ++c) {
    auto& b = bucket[c];
    if (b.empty()) continue;
    // Shortest row as pivot limits fill-in.
    auto pit = std::min_element(b.begin(), b.end(), [&](int x, int y) { return rows[x].size() < rows[y].size(); });
    const int piv = *pit;
    ++rank;
    const Row& P = rows[piv];
    const Rational pv = P.front().second;
    for (int r : b) {
      if (r == piv) continue;
      Row& R = rows[r];
      const Rational f = R.front().second / pv;
      Row out;
      out.reserve(R.size() + P.size());
      std::size_t i = 0, j = 0;
      while (i < R.size() || j < P.size()) {
        if (j >= P.size() || (i < R.size() && R[i].first < P[j].first)) {
          out.push_back(R[i++]);
        } else if (i >= R.size() || P[j].first < R[i].first) {
          out.emplace_back(P[j].first, -(f * P[j].second));
          ++j;
        } else {
          Rational v = R[i].second - f * P[j].second;
          if (!v.isZero()) out.emplace_back(R[i].first, v);
          ++i;
          ++j;
        }
      }
      R.swap(out);
      if (!R.empty()) bucket[R.front().first].push_back(r);
    }
    b.clear();
  }
  return rank;
}

}  // namespace

int exactRank(const IntMatrix& a, int limit) {
  if (std::max(a.rows(), a.cols()) > limit) return -1;
  std::vector<Row> rows(a.rows());
  for (int c = 0; c < a.outerSize(); ++c)
    for (IntMatrix::InnerIterator it(a, c); it; ++it)
      if (it.value() != 0) rows[it.row()].emplace_back(c, Rational(it.value()));
  return eliminate(rows, static_cast<int>(a.cols()));
}

int exactRank(const RatMatrix& a, int limit) {
  if (std::max(a.rows, a.cols) > limit) return -1;
  RatMatrix b = a;
  b.compress();
  std::vector<Row> rows(b.rows);
  for (const auto& [r, c, v] : b.entries) rows[r].emplace_back(c, v);
  return eliminate(rows, b.cols);
}

RatMatrix RatMatrix::fromInt(const IntMatrix& a) {
  RatMatrix m(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
  for (int c = 0; c < a.outerSize(); ++c)
    for (IntMatrix::InnerIterator it(a, c); it; ++it)
      if (it.value() != 0) m.entries.emplace_back(static_cast<int>(it.row()), c, Rational(it.value()));
  return m;
}

void RatMatrix::compress() {
  std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
    return std::get<1>(x) != std::get<1>(y) ? std::get<1>(x) < std::get<1>(y) : std::get<0>(x) < std::get<0>(y);
  });
  std::vector<std::tuple<int, int, Rational>> out;
  for (const auto& e : entries) {
    if (!out.empty() && std::get<0>(out.back()) == std::get<0>(e) && std::get<1>(out.back()) == std::get<1>(e))
      std::get<2>(out.back()) += std::get<2>(e);
    else
      out.push_back(e);
  }
  entries.clear();
  for (auto& e : out)
    if (!std::get<2>(e).isZero()) entries.push_back(std::move(e));
}

bool RatMatrix::isZero() const {
  RatMatrix b = *this;
  b.compress();
  return b.entries.empty();
}

bool RatMatrix::isIntegral() const {
  for (const auto& e : entries)
    if (std::get<2>(e).den() != 1) return false;
  return true;
}

bool RatMatrix::entriesAreUnit() const {
  RatMatrix b = *this;
  b.compress();
  for (const auto& e : b.entries) {
    const Rational& v = std::get<2>(e);
    if (v != Rational(1) && v != Rational(-1)) return false;
  }
  return true;
}

IntMatrix RatMatrix::toInt() const {
  std::vector<Eigen::Triplet<int>> t;
  for (const auto& [r, c, v] : entries) {
    if (v.den() != 1) throw std::domain_error("RatMatrix::toInt: non-integral entry");
    t.emplace_back(r, c, static_cast<int>(v.num()));
  }
  IntMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.prune([](int, int, int v) { return v != 0; });
  return m;
}

RealMatrix RatMatrix::toReal() const {
  std::vector<Eigen::Triplet<double>> t;
  for (const auto& [r, c, v] : entries) t.emplace_back(r, c, v.toDouble());
  RealMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

RatMatrix RatMatrix::selectRowsCols(const std::vector<int>& rs, const std::vector<int>& cs) const {
  std::vector<int> rowMap(rows, -1), colMap(cols, -1);
  for (std::size_t i = 0; i < rs.size(); ++i) rowMap[rs[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < cs.size(); ++j) colMap[cs[j]] = static_cast<int>(j);
  RatMatrix out(static_cast<int>(rs.size()), static_cast<int>(cs.size()));
  for (const auto& [r, c, v] : entries)
    if (rowMap[r] >= 0 && colMap[c] >= 0) out.entries.emplace_back(rowMap[r], colMap[c], v);
  return out;
}

RatMatrix operator*(const RatMatrix& a, const RatMatrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("RatMatrix product: dimension mismatch");
  std::vector<std::vector<std::pair<int, Rational>>> brows(b.rows);
  for (const auto& [r, c, v] : b.entries) brows[r].emplace_back(c, v);
  RatMatrix out(a.rows, b.cols);
  for (const auto& [r, k, v] : a.entries)
    for (const auto& [c, w] : brows[k]) out.entries.emplace_back(r, c, v * w);
  out.compress();
  return out;
}

void RatMatrix::addBlock(int r0, int c0, const RatMatrix& m, const Rational& s) {
  if (r0 + m.rows > rows || c0 + m.cols > cols) throw std::invalid_argument("RatMatrix::addBlock: block out of range");
  for (const auto& [r, c, v] : m.entries) entries.emplace_back(r0 + r, c0 + c, v * s);
}

RatMatrix RatMatrix::identity(int n) {
  RatMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.entries.emplace_back(i, i, Rational(1));
  return m;
}

RatMatrix kron(const RatMatrix& a, const RatMatrix& b) {
  RatMatrix out(a.rows * b.rows, a.cols * b.cols);
  out.entries.reserve(a.entries.size() * b.entries.size());
  for (const auto& [ra, ca, va] : a.entries)
    for (const auto& [rb, cb, vb] : b.entries) out.entries.emplace_back(ra * b.rows + rb, ca * b.cols + cb, va * vb);
  return out;
}

}  // namespace tsdr
