#include "tsdr/tmesh.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

namespace tsdr {

namespace {

std::vector<Rational> sortedUnique(std::vector<Rational> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

int positionOf(const std::vector<Rational>& v, const Rational& x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) throw TMeshError("breakpoint " + x.str() + " not found");
  return static_cast<int>(it - v.begin());
}

void checkLines(const std::vector<Rational>& xs, const char* name) {
  if (xs.size() < 2) throw TMeshError(std::string(name) + ": at least two index lines required");
  if (xs.front() != Rational(0) || xs.back() != Rational(1))
    throw TMeshError(std::string(name) + ": index lines must start at 0 and end at 1");
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (xs[k] < xs[k - 1]) throw TMeshError(std::string(name) + ": index lines must be non-decreasing");
}

bool rangesOverlap(int a0, int a1, int b0, int b1) { return std::max(a0, b0) <= std::min(a1, b1); }

std::string describe(const Extension& e) {
  std::ostringstream os;
  os << (e.junction.horizontal ? "H" : "V") << "-junction (" << e.junction.i << "," << e.junction.j << ")";
  return os.str();
}

}  // namespace

Segment Extension::full() const {
  Segment s = face;
  s.from = std::min(face.from, edge.from);
  s.to = std::max(face.to, edge.to);
  return s;
}

// ---------------------------------------------------------------- CellMesh

CellMesh CellMesh::tensor(const std::vector<Rational>& bx, const std::vector<Rational>& by) {
  CellMesh cm;
  for (std::size_t j = 0; j + 1 < by.size(); ++j)
    for (std::size_t i = 0; i + 1 < bx.size(); ++i) cm.cells.push_back({bx[i], bx[i + 1], by[j], by[j + 1]});
  return cm;
}

std::vector<Rational> CellMesh::breakpointsX() const {
  std::vector<Rational> v;
  for (const auto& c : cells) {
    v.push_back(c.x0);
    v.push_back(c.x1);
  }
  return sortedUnique(v);
}

std::vector<Rational> CellMesh::breakpointsY() const {
  std::vector<Rational> v;
  for (const auto& c : cells) {
    v.push_back(c.y0);
    v.push_back(c.y1);
  }
  return sortedUnique(v);
}

static void splitFour(const Cell& c, std::vector<Cell>& out) {
  const Rational half(1, 2);
  Rational xm = (c.x0 + c.x1) * half, ym = (c.y0 + c.y1) * half;
  out.push_back({c.x0, xm, c.y0, ym});
  out.push_back({xm, c.x1, c.y0, ym});
  out.push_back({c.x0, xm, ym, c.y1});
  out.push_back({xm, c.x1, ym, c.y1});
}

CellMesh CellMesh::refineAll() const {
  CellMesh r;
  for (const auto& c : cells) splitFour(c, r.cells);
  return r;
}

CellMesh CellMesh::refineBox(const Rational& x0, const Rational& x1, const Rational& y0, const Rational& y1) const {
  CellMesh r;
  for (const auto& c : cells) {
    if (c.x0 >= x0 && c.x1 <= x1 && c.y0 >= y0 && c.y1 <= y1)
      splitFour(c, r.cells);
    else
      r.cells.push_back(c);
  }
  return r;
}

CellMesh CellMesh::splitAlong(bool horizontal, const Rational& at, const Rational& from, const Rational& to) const {
  CellMesh r;
  for (const auto& c : cells) {
    const Rational& lo = horizontal ? c.y0 : c.x0;
    const Rational& hi = horizontal ? c.y1 : c.x1;
    const Rational& a = horizontal ? c.x0 : c.y0;
    const Rational& b = horizontal ? c.x1 : c.y1;
    bool crosses = lo < at && at < hi && a < to && b > from;
    if (!crosses) {
      r.cells.push_back(c);
      continue;
    }
    if (a < from || b > to) throw TMeshError("splitAlong: segment ends inside a cell");
    if (horizontal) {
      r.cells.push_back({c.x0, c.x1, c.y0, at});
      r.cells.push_back({c.x0, c.x1, at, c.y1});
    } else {
      r.cells.push_back({c.x0, at, c.y0, c.y1});
      r.cells.push_back({at, c.x1, c.y0, c.y1});
    }
  }
  return r;
}

CellMesh CellMesh::tensorClosure() const { return tensor(breakpointsX(), breakpointsY()); }

// ---------------------------------------------------------------- TMesh2D

bool TMesh2D::h(int i, int j) const {
  if (i < 0 || i >= nx() - 1 || j < 0 || j >= ny()) return false;
  return h_[static_cast<std::size_t>(j) * (nx() - 1) + i] != 0;
}

bool TMesh2D::v(int i, int j) const {
  if (i < 0 || i >= nx() || j < 0 || j >= ny() - 1) return false;
  return v_[static_cast<std::size_t>(i) * (ny() - 1) + j] != 0;
}

bool TMesh2D::isVertex(int i, int j) const {
  return (h(i - 1, j) || h(i, j)) && (v(i, j - 1) || v(i, j));
}

void TMesh2D::buildFaces() {
  const int cx = nx() - 1, cy = ny() - 1;
  for (int i = 0; i < cx; ++i) {
    if (!h(i, 0) || !h(i, ny() - 1)) throw TMeshError("boundary edge missing on a horizontal outermost line");
  }
  for (int j = 0; j < cy; ++j) {
    if (!v(0, j) || !v(nx() - 1, j)) throw TMeshError("boundary edge missing on a vertical outermost line");
  }
  std::vector<int> comp(static_cast<std::size_t>(cx) * cy, -1);
  auto id = [&](int i, int j) -> int& { return comp[static_cast<std::size_t>(j) * cx + i]; };
  faces_.clear();
  for (int j0 = 0; j0 < cy; ++j0) {
    for (int i0 = 0; i0 < cx; ++i0) {
      if (id(i0, j0) >= 0) continue;
      const int f = static_cast<int>(faces_.size());
      std::array<int, 4> box{i0, i0 + 1, j0, j0 + 1};
      int count = 0;
      std::queue<std::pair<int, int>> q;
      q.push({i0, j0});
      id(i0, j0) = f;
      while (!q.empty()) {
        auto [i, j] = q.front();
        q.pop();
        ++count;
        box[0] = std::min(box[0], i);
        box[1] = std::max(box[1], i + 1);
        box[2] = std::min(box[2], j);
        box[3] = std::max(box[3], j + 1);
        auto visit = [&](int a, int b, bool open) {
          if (a < 0 || b < 0 || a >= cx || b >= cy || !open || id(a, b) >= 0) return;
          id(a, b) = f;
          q.push({a, b});
        };
        visit(i + 1, j, !v(i + 1, j));
        visit(i - 1, j, !v(i, j));
        visit(i, j + 1, !h(i, j + 1));
        visit(i, j - 1, !h(i, j));
      }
      if (count != (box[1] - box[0]) * (box[3] - box[2])) {
        std::ostringstream os;
        os << "face containing cell (" << i0 << "," << j0 << ") is not a rectangle";
        throw TMeshError(os.str());
      }
      faces_.push_back(box);
    }
  }
  for (int j = 1; j < cy; ++j)
    for (int i = 0; i < cx; ++i)
      if (h(i, j) && id(i, j - 1) == id(i, j)) {
        std::ostringstream os;
        os << "dangling horizontal edge at (" << i << "," << j << ")";
        throw TMeshError(os.str());
      }
  for (int i = 1; i < cx; ++i)
    for (int j = 0; j < cy; ++j)
      if (v(i, j) && id(i - 1, j) == id(i, j)) {
        std::ostringstream os;
        os << "dangling vertical edge at (" << i << "," << j << ")";
        throw TMeshError(os.str());
      }
}

TMesh2D TMesh2D::fromEdges(std::vector<Rational> xs, std::vector<Rational> ys, std::vector<char> hEdge,
                           std::vector<char> vEdge) {
  checkLines(xs, "x");
  checkLines(ys, "y");
  TMesh2D m;
  m.xs_ = std::move(xs);
  m.ys_ = std::move(ys);
  if (hEdge.size() != static_cast<std::size_t>(m.nx() - 1) * m.ny() ||
      vEdge.size() != static_cast<std::size_t>(m.nx()) * (m.ny() - 1))
    throw TMeshError("edge arrays have the wrong size");
  m.h_ = std::move(hEdge);
  m.v_ = std::move(vEdge);
  m.buildFaces();
  return m;
}

TMesh2D TMesh2D::fromFaces(std::vector<Rational> xs, std::vector<Rational> ys,
                           const std::vector<std::array<int, 4>>& faces) {
  checkLines(xs, "x");
  checkLines(ys, "y");
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
  const int cx = nx - 1, cy = ny - 1;
  std::vector<int> owner(static_cast<std::size_t>(cx) * cy, -1);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& b = faces[f];
    if (b[0] < 0 || b[1] > cx || b[2] < 0 || b[3] > cy || b[0] >= b[1] || b[2] >= b[3]) {
      std::ostringstream os;
      os << "face " << f << " is out of range or empty";
      throw TMeshError(os.str());
    }
    for (int j = b[2]; j < b[3]; ++j)
      for (int i = b[0]; i < b[1]; ++i) {
        int& o = owner[static_cast<std::size_t>(j) * cx + i];
        if (o >= 0) {
          std::ostringstream os;
          os << "faces " << o << " and " << f << " overlap";
          throw TMeshError(os.str());
        }
        o = static_cast<int>(f);
      }
  }
  for (int j = 0; j < cy; ++j)
    for (int i = 0; i < cx; ++i)
      if (owner[static_cast<std::size_t>(j) * cx + i] < 0) {
        std::ostringstream os;
        os << "index cell (" << i << "," << j << ") is not covered";
        throw TMeshError(os.str());
      }
  auto own = [&](int i, int j) { return owner[static_cast<std::size_t>(j) * cx + i]; };
  std::vector<char> hE(static_cast<std::size_t>(cx) * ny, 0), vE(static_cast<std::size_t>(nx) * cy, 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < cx; ++i)
      hE[static_cast<std::size_t>(j) * cx + i] = (j == 0 || j == ny - 1 || own(i, j - 1) != own(i, j)) ? 1 : 0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < cy; ++j)
      vE[static_cast<std::size_t>(i) * cy + j] = (i == 0 || i == nx - 1 || own(i - 1, j) != own(i, j)) ? 1 : 0;
  return fromEdges(std::move(xs), std::move(ys), std::move(hE), std::move(vE));
}

TMesh2D TMesh2D::fromCells(const CellMesh& cm, int p1, int p2) {
  if (p1 < 1 || p2 < 1) throw TMeshError("degrees must be at least one");
  if (cm.cells.empty()) throw TMeshError("empty cell mesh");
  Rational area(0);
  for (const auto& c : cm.cells) {
    if (!(c.x0 < c.x1) || !(c.y0 < c.y1)) throw TMeshError("cell with non-positive area");
    area = area + (c.x1 - c.x0) * (c.y1 - c.y0);
  }
  if (area != Rational(1)) throw TMeshError("cells do not tile the unit square");
  const auto bx = cm.breakpointsX(), by = cm.breakpointsY();
  if (bx.front() != Rational(0) || bx.back() != Rational(1) || by.front() != Rational(0) || by.back() != Rational(1))
    throw TMeshError("cells do not tile the unit square");
  const int m1 = p1 / 2 + 1, m2 = p2 / 2 + 1;
  std::vector<Rational> xs(m1 - 1, Rational(0)), ys(m2 - 1, Rational(0));
  xs.insert(xs.end(), bx.begin(), bx.end());
  ys.insert(ys.end(), by.begin(), by.end());
  xs.insert(xs.end(), m1 - 1, Rational(1));
  ys.insert(ys.end(), m2 - 1, Rational(1));
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
  const int cx = nx - 1, cy = ny - 1;
  std::vector<char> hE(static_cast<std::size_t>(cx) * ny, 0), vE(static_cast<std::size_t>(nx) * cy, 0);
  auto H = [&](int i, int j) -> char& { return hE[static_cast<std::size_t>(j) * cx + i]; };
  auto V = [&](int i, int j) -> char& { return vE[static_cast<std::size_t>(i) * cy + j]; };
  for (const auto& c : cm.cells) {
    int i0 = m1 - 1 + positionOf(bx, c.x0), i1 = m1 - 1 + positionOf(bx, c.x1);
    int j0 = m2 - 1 + positionOf(by, c.y0), j1 = m2 - 1 + positionOf(by, c.y1);
    for (int i = i0; i < i1; ++i) H(i, j0) = H(i, j1) = 1;
    for (int j = j0; j < j1; ++j) V(i0, j) = V(i1, j) = 1;
  }
  for (int i = 0; i < nx; ++i)
    if (i < m1 || i >= nx - m1)
      for (int j = 0; j < cy; ++j) V(i, j) = 1;
  for (int j = 0; j < ny; ++j)
    if (j < m2 || j >= ny - m2)
      for (int i = 0; i < cx; ++i) H(i, j) = 1;
  for (int j = 0; j < ny; ++j) {
    if (H(m1 - 1, j))
      for (int c = 0; c < m1 - 1; ++c) H(c, j) = 1;
    if (H(nx - m1 - 1, j))
      for (int c = nx - m1; c < cx; ++c) H(c, j) = 1;
  }
  for (int i = 0; i < nx; ++i) {
    if (V(i, m2 - 1))
      for (int r = 0; r < m2 - 1; ++r) V(i, r) = 1;
    if (V(i, ny - m2 - 1))
      for (int r = ny - m2; r < cy; ++r) V(i, r) = 1;
  }
  TMesh2D m = fromEdges(std::move(xs), std::move(ys), std::move(hE), std::move(vE));
  if (m.elements().size() != cm.cells.size()) throw TMeshError("cells overlap or leave gaps");
  return m;
}

TMesh2D TMesh2D::tensor(const KnotVector& kx, const KnotVector& ky) {
  auto xs = kx.meshLines(), ys = ky.meshLines();
  std::vector<char> hE((xs.size() - 1) * ys.size(), 1), vE(xs.size() * (ys.size() - 1), 1);
  return fromEdges(std::move(xs), std::move(ys), std::move(hE), std::move(vE));
}

std::vector<std::array<int, 2>> TMesh2D::vertices() const {
  std::vector<std::array<int, 2>> out;
  for (int j = 0; j < ny(); ++j)
    for (int i = 0; i < nx(); ++i)
      if (isVertex(i, j)) out.push_back({i, j});
  return out;
}

std::vector<Segment> TMesh2D::edges(bool horizontal) const {
  std::vector<Segment> out;
  if (horizontal) {
    for (int j = 0; j < ny(); ++j)
      for (int i = 0; i < nx() - 1; ++i) {
        if (!h(i, j) || !isVertex(i, j)) continue;
        int e = i + 1;
        while (!isVertex(e, j)) ++e;
        out.push_back({true, j, i, e});
      }
  } else {
    for (int j = 0; j < ny() - 1; ++j)
      for (int i = 0; i < nx(); ++i) {
        if (!v(i, j) || !isVertex(i, j)) continue;
        int e = j + 1;
        while (!isVertex(i, e)) ++e;
        out.push_back({false, i, j, e});
      }
  }
  return out;
}

Census TMesh2D::census() const {
  Census c;
  c.F0 = static_cast<int>(faces_.size());
  for (int j = 0; j < ny(); ++j)
    for (int i = 0; i < nx(); ++i) {
      if (!isVertex(i, j)) continue;
      ++c.V0;
      const bool bnd = i == 0 || j == 0 || i == nx() - 1 || j == ny() - 1;
      if (bnd) ++c.VB;
      if (h(i, j)) {
        ++c.EH;
        if (j == 0 || j == ny() - 1) ++c.EB;
      }
      if (v(i, j)) {
        ++c.EV;
        if (i == 0 || i == nx() - 1) ++c.EB;
      }
    }
  c.E0 = c.EH + c.EV;
  for (const auto& t : tjunctions()) (t.horizontal ? c.VH : c.VV)++;
  return c;
}

std::vector<TJunction> TMesh2D::tjunctions() const {
  std::vector<TJunction> out;
  for (int j = 1; j < ny() - 1; ++j)
    for (int i = 1; i < nx() - 1; ++i) {
      const bool L = h(i - 1, j), R = h(i, j), D = v(i, j - 1), U = v(i, j);
      if (L + R + D + U != 3) continue;
      TJunction t;
      t.i = i;
      t.j = j;
      t.horizontal = !L || !R;
      if (t.horizontal)
        t.direction = R ? -1 : 1;
      else
        t.direction = U ? -1 : 1;
      out.push_back(t);
    }
  return out;
}

std::vector<int> TMesh2D::trace(bool alongX, int pos2, int other2, int dir, int count) const {
  std::vector<int> out;
  if (count <= 0) return out;
  const int n = alongX ? nx() : ny();
  auto crosses = [&](int l) {
    if (other2 % 2 == 0) {
      const int o = other2 / 2;
      return alongX ? (v(l, o - 1) || v(l, o)) : (h(o - 1, l) || h(o, l));
    }
    const int o = (other2 - 1) / 2;
    return alongX ? v(l, o) : h(o, l);
  };
  int l = dir > 0 ? pos2 / 2 + 1 : (pos2 + 1) / 2 - 1;
  for (; l >= 0 && l < n && static_cast<int>(out.size()) < count; l += dir)
    if (crosses(l)) out.push_back(l);
  return out;
}

TMesh2D TMesh2D::withSegments(const std::vector<Segment>& segs) const {
  auto hE = h_, vE = v_;
  for (const auto& s : segs) {
    for (int k = s.from; k < s.to; ++k) {
      if (s.horizontal)
        hE[static_cast<std::size_t>(s.fixed) * (nx() - 1) + k] = 1;
      else
        vE[static_cast<std::size_t>(s.fixed) * (ny() - 1) + k] = 1;
    }
  }
  return fromEdges(xs_, ys_, std::move(hE), std::move(vE));
}

TMesh2D TMesh2D::cropped(int kx, int ky) const {
  const int nx2 = nx() - 2 * kx, ny2 = ny() - 2 * ky;
  if (nx2 < 2 || ny2 < 2) throw TMeshError("crop leaves no mesh");
  std::vector<Rational> xs(xs_.begin() + kx, xs_.begin() + kx + nx2), ys(ys_.begin() + ky, ys_.begin() + ky + ny2);
  std::vector<char> hE(static_cast<std::size_t>(nx2 - 1) * ny2), vE(static_cast<std::size_t>(nx2) * (ny2 - 1));
  for (int j = 0; j < ny2; ++j)
    for (int i = 0; i < nx2 - 1; ++i) hE[static_cast<std::size_t>(j) * (nx2 - 1) + i] = h(i + kx, j + ky);
  for (int i = 0; i < nx2; ++i)
    for (int j = 0; j < ny2 - 1; ++j) vE[static_cast<std::size_t>(i) * (ny2 - 1) + j] = v(i + kx, j + ky);
  return fromEdges(std::move(xs), std::move(ys), std::move(hE), std::move(vE));
}

int TMesh2D::boundaryLinesX() const {
  int k = 0;
  while (k < nx() && xs_[k] == Rational(0)) ++k;
  return k;
}

int TMesh2D::boundaryLinesY() const {
  int k = 0;
  while (k < ny() && ys_[k] == Rational(0)) ++k;
  return k;
}

std::vector<std::array<Rational, 4>> TMesh2D::geometricLines() const {
  std::vector<std::array<Rational, 4>> out;
  for (int j = 0; j < ny(); ++j)
    for (int i = 0; i < nx() - 1; ++i)
      if (h(i, j) && xs_[i] < xs_[i + 1]) out.push_back({xs_[i], xs_[i + 1], ys_[j], ys_[j]});
  for (int i = 0; i < nx(); ++i)
    for (int j = 0; j < ny() - 1; ++j)
      if (v(i, j) && ys_[j] < ys_[j + 1]) out.push_back({xs_[i], xs_[i], ys_[j], ys_[j + 1]});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Cell> TMesh2D::elements() const {
  std::vector<Cell> out;
  for (const auto& f : faces_) {
    Cell c{xs_[f[0]], xs_[f[1]], ys_[f[2]], ys_[f[3]]};
    if (c.x0 < c.x1 && c.y0 < c.y1) out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------- analysis

TMesh2D validateTMesh(const std::vector<Rational>& xs, const std::vector<Rational>& ys,
                      const std::vector<std::array<int, 4>>& faces) {
  TMesh2D m = TMesh2D::fromFaces(xs, ys, faces);
  if (!m.census().euler()) throw TMeshError("Euler identity F + V = E + 1 violated");
  return m;
}

std::vector<Extension> computeExtensions(const TMesh2D& m, int p1, int p2) {
  std::vector<Extension> out;
  for (const auto& t : m.tjunctions()) {
    const int p = t.horizontal ? p1 : p2;
    Extension e;
    e.junction = t;
    e.faceBays = p % 2 ? (p + 1) / 2 : p / 2;
    e.edgeBays = p % 2 ? (p - 1) / 2 : p / 2;
    const int pos = t.horizontal ? t.i : t.j;
    const int other = t.horizontal ? t.j : t.i;
    auto f = m.trace(t.horizontal, 2 * pos, 2 * other, t.direction, e.faceBays);
    auto g = m.trace(t.horizontal, 2 * pos, 2 * other, -t.direction, e.edgeBays);
    const int fe = f.empty() ? pos : f.back();
    const int ge = g.empty() ? pos : g.back();
    e.face = {t.horizontal, other, std::min(pos, fe), std::max(pos, fe)};
    e.edge = {t.horizontal, other, std::min(pos, ge), std::max(pos, ge)};
    out.push_back(e);
  }
  return out;
}

ASVerdict isAnalysisSuitable(const TMesh2D& m, int p1, int p2) {
  auto ext = computeExtensions(m, p1, p2);
  for (const auto& a : ext) {
    if (!a.junction.horizontal) continue;
    const Segment sa = a.full();
    for (const auto& b : ext) {
      if (b.junction.horizontal) continue;
      const Segment sb = b.full();
      if (sb.fixed >= sa.from && sb.fixed <= sa.to && sa.fixed >= sb.from && sa.fixed <= sb.to) {
        ASVerdict r;
        r.ok = false;
        r.offending = std::make_pair(a, b);
        r.reason = "extensions of " + describe(a) + " and " + describe(b) + " intersect";
        return r;
      }
    }
  }
  return {};
}

ASVerdict checkStrongAS(const TMesh2D& m, int p1, int p2) {
  auto ext = computeExtensions(m, p1, p2);
  auto interiorRepeated = [](const std::vector<Rational>& xs, int k) {
    if (xs[k] == Rational(0) || xs[k] == Rational(1)) return false;
    return (k > 0 && xs[k - 1] == xs[k]) || (k + 1 < static_cast<int>(xs.size()) && xs[k + 1] == xs[k]);
  };
  for (std::size_t a = 0; a < ext.size(); ++a) {
    const Segment sa = ext[a].full();
    const auto& along = sa.horizontal ? m.ys() : m.xs();
    const auto& across = sa.horizontal ? m.xs() : m.ys();
    if (interiorRepeated(along, sa.fixed)) {
      ASVerdict r;
      r.ok = false;
      r.offending = std::make_pair(ext[a], ext[a]);
      r.reason = "extension of " + describe(ext[a]) + " lies on a repeated line";
      return r;
    }
    for (int k = sa.from; k <= sa.to; ++k) {
      if (!interiorRepeated(across, k)) continue;
      const bool touches = sa.horizontal ? (m.v(k, sa.fixed - 1) || m.v(k, sa.fixed))
                                         : (m.h(sa.fixed - 1, k) || m.h(sa.fixed, k));
      if (touches) {
        ASVerdict r;
        r.ok = false;
        r.offending = std::make_pair(ext[a], ext[a]);
        r.reason = "extension of " + describe(ext[a]) + " crosses a repeated line";
        return r;
      }
    }
    for (std::size_t b = a + 1; b < ext.size(); ++b) {
      const Segment sb = ext[b].full();
      bool hit;
      if (sa.horizontal == sb.horizontal)
        hit = sa.fixed == sb.fixed && rangesOverlap(sa.from, sa.to, sb.from, sb.to);
      else
        hit = sb.fixed >= sa.from && sb.fixed <= sa.to && sa.fixed >= sb.from && sa.fixed <= sb.to;
      if (hit) {
        ASVerdict r;
        r.ok = false;
        r.offending = std::make_pair(ext[a], ext[b]);
        r.reason = "extensions of " + describe(ext[a]) + " and " + describe(ext[b]) + " intersect";
        return r;
      }
    }
  }
  return {};
}

static LocalKnotVector localKnots(const TMesh2D& m, bool alongX, int pos2, int other2, int p) {
  const auto& lines = alongX ? m.xs() : m.ys();
  const int k = p % 2 ? (p + 1) / 2 : (p + 2) / 2;
  auto left = m.trace(alongX, pos2, other2, -1, k);
  auto right = m.trace(alongX, pos2, other2, +1, k);
  std::vector<Rational> knots(k - left.size(), Rational(0));
  for (auto it = left.rbegin(); it != left.rend(); ++it) knots.push_back(lines[*it]);
  if (p % 2) {
    if (pos2 % 2) throw TMeshError("odd-degree anchor off an index line");
    knots.push_back(lines[pos2 / 2]);
  }
  for (int l : right) knots.push_back(lines[l]);
  knots.insert(knots.end(), k - right.size(), Rational(1));
  for (std::size_t a = 1; a < knots.size(); ++a)
    if (knots[a] < knots[a - 1]) throw TMeshError("local knot vector not sorted");
  LocalKnotVector kv(std::move(knots));
  if (!(kv.length() > Rational(0))) {
    std::ostringstream os;
    os << "anchor (" << (alongX ? pos2 : other2) << "," << (alongX ? other2 : pos2)
       << ") has an empty local knot vector";
    throw TMeshError(os.str());
  }
  return kv;
}

std::vector<Anchor2D> anchorsAndLocalKV(const TMesh2D& m, int p1, int p2) {
  std::vector<std::array<int, 2>> pos;
  const bool o1 = p1 % 2, o2 = p2 % 2;
  if (o1 && o2) {
    for (auto [i, j] : m.vertices()) pos.push_back({2 * i, 2 * j});
  } else if (!o1 && !o2) {
    for (const auto& f : m.faces()) pos.push_back({f[0] + f[1], f[2] + f[3]});
  } else if (!o1 && o2) {
    for (const auto& s : m.edges(true)) pos.push_back({s.from + s.to, 2 * s.fixed});
  } else {
    for (const auto& s : m.edges(false)) pos.push_back({2 * s.fixed, s.from + s.to});
  }
  std::sort(pos.begin(), pos.end(), [](const auto& a, const auto& b) {
    return a[1] != b[1] ? a[1] < b[1] : a[0] < b[0];
  });
  std::vector<Anchor2D> out;
  out.reserve(pos.size());
  for (const auto& q : pos) {
    Anchor2D a;
    a.position = q;
    a.kv1 = localKnots(m, true, q[0], q[1], p1);
    a.kv2 = localKnots(m, false, q[1], q[0], p2);
    out.push_back(std::move(a));
  }
  return out;
}

TMesh2D extendedMesh(const TMesh2D& m, int p1, int p2) {
  std::vector<Segment> segs;
  for (const auto& e : computeExtensions(m, p1, p2)) segs.push_back(e.full());
  return m.withSegments(segs);
}

Component tsplineComponent(const TMesh2D& m, int p1, int p2, Scaling s1, Scaling s2, int direction) {
  Component c;
  c.dim = 2;
  c.direction = direction;
  c.degree = {p1, p2, 0};
  c.scaling = {s1, s2, Scaling::B};
  for (const auto& a : anchorsAndLocalKV(m, p1, p2)) {
    c.functions.push_back({a.kv1, a.kv2, LocalKnotVector{}});
    c.anchors.push_back({a.position[0], a.position[1], 0});
  }
  return c;
}

double evalTspline(const Anchor2D& a, double z1, double z2) {
  if (!(z1 >= 0.0 && z1 <= 1.0 && z2 >= 0.0 && z2 <= 1.0))
    throw std::domain_error("evalTspline: point outside the parametric domain");
  return evalLocal(a.kv1, z1) * evalLocal(a.kv2, z2);
}

double evalTsplineSpace(const Component& c, const Eigen::VectorXd& coeffs, double z1, double z2) {
  if (coeffs.size() != c.size()) throw std::invalid_argument("evalTsplineSpace: coefficient count mismatch");
  const double z[2] = {z1, z2};
  double s = 0.0;
  for (int i = 0; i < c.size(); ++i)
    if (coeffs[i] != 0.0) s += coeffs[i] * c.eval(i, z);
  return s;
}

// ---------------------------------------------------------------- generators

static void prolongations(const TMesh2D& m, const TJunction& t, int bays,
                                          std::vector<std::tuple<bool, Rational, Rational, Rational>>& out) {
  const int pos = t.horizontal ? t.i : t.j;
  const int other = t.horizontal ? t.j : t.i;
  auto hit = m.trace(t.horizontal, 2 * pos, 2 * other, t.direction, bays);
  if (!hit.empty()) {
    const auto& lines = t.horizontal ? m.xs() : m.ys();
    const auto& across = t.horizontal ? m.ys() : m.xs();
    Rational a = lines[pos], b = lines[hit.back()];
    if (b < a) std::swap(a, b);
    out.emplace_back(t.horizontal, across[other], a, b);
  }
}

static CellMesh applySplits(CellMesh cm, const std::vector<std::tuple<bool, Rational, Rational, Rational>>& splits) {
  for (const auto& [hor, at, a, b] : splits) cm = cm.splitAlong(hor, at, a, b);
  return cm;
}

CellMesh restoreAnalysisSuitability(const CellMesh& cm, int p, int maxRounds) {
  CellMesh cur = cm;
  for (int round = 0; round < maxRounds; ++round) {
    TMesh2D m = TMesh2D::fromCells(cur, p, p);
    ASVerdict v = checkStrongAS(m, p, p);
    if (v.ok) return cur;
    std::vector<std::tuple<bool, Rational, Rational, Rational>> splits;
    prolongations(m, v.offending->first.junction, 1, splits);
    if (!(v.offending->second.junction.i == v.offending->first.junction.i &&
          v.offending->second.junction.j == v.offending->first.junction.j))
      prolongations(m, v.offending->second.junction, 1, splits);
    cur = applySplits(cur, splits);
  }
  throw TMeshError("could not restore analysis-suitability");
}

CellMesh cornerRefinedMesh(int n, const std::vector<int>& blocks, int p, int bays) {
  std::vector<Rational> b;
  for (int k = 0; k <= n; ++k) b.emplace_back(k, n);
  CellMesh cm = CellMesh::tensor(b, b);
  for (int blk : blocks) {
    Rational w(1), hgt(1);
    for (const auto& c : cm.cells)
      if (c.x0 == Rational(0) && c.y0 == Rational(0)) {
        w = c.x1;
        hgt = c.y1;
      }
    Rational bw = std::min(Rational(1), w * Rational(blk)), bh = std::min(Rational(1), hgt * Rational(blk));
    cm = cm.refineBox(Rational(0), bw, Rational(0), bh);
    TMesh2D m = TMesh2D::fromCells(cm, p, p);
    std::vector<std::tuple<bool, Rational, Rational, Rational>> splits;
    for (const auto& t : m.tjunctions()) {
      const Rational x = m.xs()[t.i], y = m.ys()[t.j];
      const bool onEdge = (t.horizontal && t.direction > 0 && x == bw && y < bh) ||
                          (!t.horizontal && t.direction > 0 && y == bh && x < bw);
      if (onEdge) prolongations(m, t, bays, splits);
    }
    cm = applySplits(cm, splits);
    cm = restoreAnalysisSuitability(cm, p);
  }
  return cm;
}

}  // namespace tsdr
