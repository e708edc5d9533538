#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsdr/forms.hpp"
#include "tsdr/rational.hpp"
#include "tsdr/univariate.hpp"

namespace tsdr {

// Axis-aligned rectangle [x0,x1] x [y0,y1] of positive area.
struct Cell {
  Rational x0, x1, y0, y1;
  friend bool operator==(const Cell& a, const Cell& b) {
    return a.x0 == b.x0 && a.x1 == b.x1 && a.y0 == b.y0 && a.y1 == b.y1;
  }
};

// Geometric T-mesh: a tiling of [0,1]^2 by cells, all interior lines of
// multiplicity one. Converted to an index-space TMesh2D once degrees are known.
struct CellMesh {
  std::vector<Cell> cells;

  static CellMesh tensor(const std::vector<Rational>& bx, const std::vector<Rational>& by);
  std::vector<Rational> breakpointsX() const;
  std::vector<Rational> breakpointsY() const;
  // Every cell split into four.
  CellMesh refineAll() const;
  // Cells contained in the box split into four.
  CellMesh refineBox(const Rational& x0, const Rational& x1, const Rational& y0, const Rational& y1) const;
  // Cells crossed by the segment split along it (horizontal: y fixed).
  CellMesh splitAlong(bool horizontal, const Rational& at, const Rational& from, const Rational& to) const;
  // Tensor-product closure: all breakpoints extended to full lines.
  CellMesh tensorClosure() const;
};

// Closed index-space segment along a horizontal (row `fixed`) or vertical line.
struct Segment {
  bool horizontal = true;
  int fixed = 0;
  int from = 0;
  int to = 0;
  friend bool operator==(const Segment& a, const Segment& b) {
    return a.horizontal == b.horizontal && a.fixed == b.fixed && a.from == b.from && a.to == b.to;
  }
};

struct TJunction {
  int i = 0;
  int j = 0;
  bool horizontal = true;  // the missing edge is horizontal
  int direction = 1;       // +1: missing edge towards increasing index
};

struct Extension {
  TJunction junction;
  Segment face;  // from the junction across the missing edge
  Segment edge;  // from the junction along the existing edge
  int faceBays = 0;
  int edgeBays = 0;
  Segment full() const;
};

struct Census {
  int F0 = 0, E0 = 0, EH = 0, EV = 0, V0 = 0;
  int VH = 0, VV = 0;  // horizontal / vertical T-junctions
  int EB = 0, VB = 0;  // edges / vertices on the outermost boundary lines
  bool euler() const { return F0 + V0 == E0 + 1; }
};

struct Anchor2D {
  std::array<int, 2> position{};  // doubled index coordinates
  LocalKnotVector kv1, kv2;
};

struct ASVerdict {
  bool ok = true;
  std::optional<std::pair<Extension, Extension>> offending;
  std::string reason;
};

// T-mesh in index space: xs/ys are the index lines (knot values, repeated for
// multiplicity); unit edges between consecutive index points are present or not.
class TMesh2D {
 public:
  TMesh2D() = default;
  // faces: index rectangles {i0, i1, j0, j1} tiling [0, nx-1] x [0, ny-1].
  static TMesh2D fromFaces(std::vector<Rational> xs, std::vector<Rational> ys,
                           const std::vector<std::array<int, 4>>& faces);
  // hEdge[(j * (nx-1)) + i], vEdge[(i * (ny-1)) + j].
  static TMesh2D fromEdges(std::vector<Rational> xs, std::vector<Rational> ys, std::vector<char> hEdge,
                           std::vector<char> vEdge);
  // Boundary lines repeated floor(p/2)+1 times.
  static TMesh2D fromCells(const CellMesh& cm, int p1, int p2);
  static TMesh2D tensor(const KnotVector& kx, const KnotVector& ky);

  int nx() const { return static_cast<int>(xs_.size()); }
  int ny() const { return static_cast<int>(ys_.size()); }
  const std::vector<Rational>& xs() const { return xs_; }
  const std::vector<Rational>& ys() const { return ys_; }
  bool h(int i, int j) const;  // unit edge (i,j)-(i+1,j)
  bool v(int i, int j) const;  // unit edge (i,j)-(i,j+1)
  bool isVertex(int i, int j) const;
  const std::vector<std::array<int, 4>>& faces() const { return faces_; }

  Census census() const;
  std::vector<TJunction> tjunctions() const;
  std::vector<std::array<int, 2>> vertices() const;
  // T-mesh edges as segments between consecutive vertices.
  std::vector<Segment> edges(bool horizontal) const;

  // Index of the count-th line crossed by a ray from (doubled) position along
  // an axis; the outermost line ends the ray. Returns the indices crossed.
  std::vector<int> trace(bool alongX, int pos2, int other2, int dir, int count) const;

  TMesh2D withSegments(const std::vector<Segment>& segs) const;
  // Drop `k` outermost index columns (x) / rows (y) on both sides.
  TMesh2D cropped(int kx, int ky) const;
  // Boundary repetition counts (number of leading index lines equal to 0).
  int boundaryLinesX() const;
  int boundaryLinesY() const;
  // Positive-length unit segments in knot-value space, duplicates merged.
  std::vector<std::array<Rational, 4>> geometricLines() const;
  // Positive-area faces as knot-value boxes {x0, x1, y0, y1}.
  std::vector<Cell> elements() const;

 private:
  void buildFaces();
  std::vector<Rational> xs_, ys_;
  std::vector<char> h_, v_;
  std::vector<std::array<int, 4>> faces_;
};

// Structured validation failure.
struct TMeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

TMesh2D validateTMesh(const std::vector<Rational>& xs, const std::vector<Rational>& ys,
                      const std::vector<std::array<int, 4>>& faces);
std::vector<Extension> computeExtensions(const TMesh2D& m, int p1, int p2);
ASVerdict isAnalysisSuitable(const TMesh2D& m, int p1, int p2);
ASVerdict checkStrongAS(const TMesh2D& m, int p1, int p2);
std::vector<Anchor2D> anchorsAndLocalKV(const TMesh2D& m, int p1, int p2);
TMesh2D extendedMesh(const TMesh2D& m, int p1, int p2);

// T-spline block with the given scalings; anchors kept in doubled index coordinates.
Component tsplineComponent(const TMesh2D& m, int p1, int p2, Scaling s1, Scaling s2, int direction);
double evalTspline(const Anchor2D& a, double z1, double z2);
double evalTsplineSpace(const Component& c, const Eigen::VectorXd& coeffs, double z1, double z2);

// Mesh generator: n x n cells refined `levels` times towards the corner (0,0);
// level l refines the blocks[l] x blocks[l] smallest corner cells, then every
// new line ending inside the domain is prolonged by `bays` bays and further
// bays are added until the mesh is strongly analysis-suitable for degree p.
CellMesh cornerRefinedMesh(int n, const std::vector<int>& blocks, int p, int bays);
// Prolongs T-junction lines of `cm` (degree p) by one bay until strongly AS.
CellMesh restoreAnalysisSuitability(const CellMesh& cm, int p, int maxRounds = 64);

}  // namespace tsdr
