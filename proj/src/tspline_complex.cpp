#include "tsdr/tspline_complex.hpp"

#include <algorithm>
#include <stdexcept>

namespace tsdr {

TMesh2D derivedMesh(const TMesh2D& m, int p1, int p2, bool dx, bool dy) {
  std::vector<Segment> segs;
  for (const auto& t : m.tjunctions()) {
    const bool lower = t.horizontal ? (dx && p1 % 2) : (dy && p2 % 2);
    if (!lower) continue;
    const int pos = t.horizontal ? t.i : t.j;
    const int other = t.horizontal ? t.j : t.i;
    auto hit = m.trace(t.horizontal, 2 * pos, 2 * other, t.direction, 1);
    if (hit.empty()) continue;
    segs.push_back({t.horizontal, other, std::min(pos, hit[0]), std::max(pos, hit[0])});
  }
  TMesh2D out = segs.empty() ? m : m.withSegments(segs);
  const int kx = dx && p1 % 2 == 0 ? 1 : 0;
  const int ky = dy && p2 % 2 == 0 ? 1 : 0;
  if (kx || ky) out = out.cropped(kx, ky);
  return out;
}

TComplexMeshes deriveComplexMeshes(const TMesh2D& m, int p1, int p2) {
  if (p1 < 1 || p2 < 1) throw std::invalid_argument("T-spline complex needs degrees >= 1");
  return {m, derivedMesh(m, p1, p2, true, false), derivedMesh(m, p1, p2, false, true),
          derivedMesh(m, p1, p2, true, true)};
}

TsplineComplex buildTsplineComplex(const TMesh2D& m, int p1, int p2, bool rotated) {
  if (p1 != p2) throw std::invalid_argument("T-spline complex: equal degrees required (got " + std::to_string(p1) + ", " + std::to_string(p2) + ")");
  TsplineComplex cx;
  cx.dim = 2;
  cx.mesh = m;
  cx.p1 = p1;
  cx.p2 = p2;
  cx.rotated = rotated;
  cx.meshes = deriveComplexMeshes(m, p1, p2);
  const auto B = Scaling::B, D = Scaling::D;

  FormSpace y0{2, FormKind::H1, {tsplineComponent(cx.meshes.M0, p1, p2, B, B, -1)}};
  Component c11 = tsplineComponent(cx.meshes.M11, p1 - 1, p2, D, B, 0);
  Component c12 = tsplineComponent(cx.meshes.M12, p1, p2 - 1, B, D, 1);
  FormSpace y1;
  y1.dim = 2;
  if (!rotated) {
    y1.kind = FormKind::Hcurl;
    y1.components = {c11, c12};
  } else {
    y1.kind = FormKind::Hdiv;
    c12.direction = 0;
    c11.direction = 1;
    y1.components = {c12, c11};
  }
  FormSpace y2{2, FormKind::L2, {tsplineComponent(cx.meshes.M2, p1 - 1, p2 - 1, D, D, -1)}};
  cx.spaces = {y0, y1, y2};
  try {
    cx.ops = {derivativeByLookup(y0, y1, diffRules(2, 0, rotated)),
              derivativeByLookup(y1, y2, diffRules(2, 1, rotated))};
    cx.exactOps = {RatMatrix::fromInt(cx.ops[0]), RatMatrix::fromInt(cx.ops[1])};
  } catch (const std::runtime_error&) {
    cx.lookup = false;
    cx.ops.clear();
    cx.exactOps = {derivativeByRefinement(y0, y1, diffRules(2, 0, rotated)),
                   derivativeByRefinement(y1, y2, diffRules(2, 1, rotated))};
  }
  cx.retained.resize(3);
  for (int k = 0; k < 3; ++k) {
    cx.retained[k].resize(cx.spaces[k].size());
    for (int i = 0; i < cx.spaces[k].size(); ++i) cx.retained[k][i] = i;
  }
  return cx;
}

TsplineComplex restrictTBoundary(const TsplineComplex& cx, const std::vector<std::pair<int, int>>& faces) {
  std::vector<std::pair<int, int>> fs = cx.bcFaces;
  for (auto f : faces) {
    if (f.first < 0 || f.first > 1 || f.second < 0 || f.second > 1)
      throw std::invalid_argument("restrictTBoundary: invalid face");
    if (std::find(fs.begin(), fs.end(), f) == fs.end()) fs.push_back(f);
  }
  std::sort(fs.begin(), fs.end());
  TsplineComplex full = buildTsplineComplex(cx.mesh, cx.p1, cx.p2, cx.rotated);
  TsplineComplex out = full;
  out.bcFaces = fs;
  for (int k = 0; k < 3; ++k) {
    out.retained[k] = interiorIndices(full.spaces[k], fs);
    out.spaces[k] = subspace(full.spaces[k], out.retained[k]);
  }
  for (int k = 0; k < 2; ++k) {
    if (full.lookup) out.ops[k] = selectRowsCols(full.ops[k], out.retained[k + 1], out.retained[k]);
    out.exactOps[k] = full.exactOps[k].selectRowsCols(out.retained[k + 1], out.retained[k]);
  }
  return out;
}

IntMatrix tDiffMatrix(const TsplineComplex& cx, int k) {
  if (k < 0 || k > 1) throw std::out_of_range("tDiffMatrix: k must be 0 or 1");
  TsplineComplex full = buildTsplineComplex(cx.mesh, cx.p1, cx.p2, cx.rotated);
  return derivativeByLookup(full.spaces[k], full.spaces[k + 1], diffRules(2, k, cx.rotated));
}

ExactnessReport verifyTExactness(const TsplineComplex& cx, int rankLimit) {
  const int kerFirst = cx.bcFaces.empty() ? 1 : 0;
  const int cokerLast = cx.bcFaces.size() == 4 ? 1 : 0;
  std::vector<int> dims;
  for (const auto& V : cx.spaces) dims.push_back(V.size());
  return verifyExactnessOps(dims, cx.exactOps, kerFirst, cokerLast, cx.lookup, rankLimit);
}

bool tsplineSpacesWellDefined(const TMesh2D& m, int p1, int p2, std::string* why) {
  try {
    buildTsplineComplex(m, p1, p2);
  } catch (const std::exception& e) {
    if (why) *why = e.what();
    return false;
  }
  return true;
}

}  // namespace tsdr
