#include "olod/mesh.hpp"

#include <algorithm>
#include <string>

namespace olod {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

MeshHierarchy build_hierarchy(int d, int nH, int nEps, int nh) {
  if (d != 1 && d != 2)
    throw BadDimension("spatial dimension must be 1 or 2, got " +
                       std::to_string(d));
  if (!power_of_two(nH) || !power_of_two(nEps) || !power_of_two(nh))
    throw NonNested("grid sizes must be powers of two (nH=" +
                    std::to_string(nH) + ", nEps=" + std::to_string(nEps) +
                    ", nh=" + std::to_string(nh) + ")");
  if (nH < 2 || nEps % nH != 0 || nh % nEps != 0)
    throw NonNested("grids must nest: nH | nEps | nh with nH >= 2 (nH=" +
                    std::to_string(nH) + ", nEps=" + std::to_string(nEps) +
                    ", nh=" + std::to_string(nh) + ")");

  MeshHierarchy m;
  m.d = d;
  m.nH = nH;
  m.nEps = nEps;
  m.nh = nh;
  m.H = 1.0 / nH;
  m.eps = 1.0 / nEps;
  m.h = 1.0 / nh;
  m.fpc = nh / nH;
  m.epc = nEps / nH;
  m.fpe = nh / nEps;
  m.numCoarseElements = d == 2 ? nH * nH : nH;
  m.numFineNodes = d == 2 ? nh * nh : nh;
  m.numEpsCells = d == 2 ? nEps * nEps : nEps;
  return m;
}

PatchRef patch(const MeshHierarchy& mesh, int element, int k) {
  if (k < 0) throw Error("patch layer count must be nonnegative");
  if (element < 0 || element >= mesh.numCoarseElements)
    throw Error("element index out of range");
  PatchRef p;
  p.centerElement = element;
  p.k = k;
  p.extent = std::min(2 * k + 1, mesh.nH);
  p.fullDomain = (p.extent == mesh.nH);
  auto c = mesh.coarseCoords(element);
  p.origin = {MeshHierarchy::wrap(c[0] - k, mesh.nH),
              mesh.d == 2 ? MeshHierarchy::wrap(c[1] - k, mesh.nH) : 0};
  return p;
}

PatchRef translate_patch(const MeshHierarchy& mesh, const PatchRef& p,
                         int element) {
  PatchRef q = patch(mesh, element, p.k);
  // Same k on the same mesh gives the same extent/fullDomain by
  // construction; the only thing that moves is the origin.
  return q;
}

PatchFineNodes fine_nodes_of(const MeshHierarchy& mesh, const PatchRef& p) {
  PatchFineNodes out;
  out.cellsPerAxis = p.extent * mesh.fpc;
  out.nodesPerAxis = p.fullDomain ? mesh.nh : out.cellsPerAxis + 1;
  const int nn = out.nodesPerAxis;
  const int nyn = mesh.d == 2 ? nn : 1;
  const int ox = p.origin[0] * mesh.fpc;
  const int oy = p.origin[1] * mesh.fpc;
  out.global.resize(static_cast<std::size_t>(nn) * nyn);
  out.boundary.assign(static_cast<std::size_t>(nn) * nyn, 0);
  std::size_t idx = 0;
  for (int j = 0; j < nyn; ++j) {
    for (int i = 0; i < nn; ++i, ++idx) {
      out.global[idx] = mesh.fineIndex({ox + i, oy + j});
      if (!p.fullDomain) {
        bool onBoundary = (i == 0 || i == nn - 1);
        if (mesh.d == 2) onBoundary = onBoundary || j == 0 || j == nn - 1;
        out.boundary[idx] = onBoundary ? 1 : 0;
      }
    }
  }
  return out;
}

PatchCoarseNodes coarse_nodes_of(const MeshHierarchy& mesh,
                                 const PatchRef& p) {
  PatchCoarseNodes out;
  out.nodesPerAxis = p.fullDomain ? mesh.nH : p.extent + 1;
  const int nn = out.nodesPerAxis;
  const int nyn = mesh.d == 2 ? nn : 1;
  out.global.resize(static_cast<std::size_t>(nn) * nyn);
  std::size_t idx = 0;
  for (int j = 0; j < nyn; ++j)
    for (int i = 0; i < nn; ++i, ++idx)
      out.global[idx] = mesh.coarseIndex({p.origin[0] + i, p.origin[1] + j});
  return out;
}

PatchEpsCells cells_eps_of(const MeshHierarchy& mesh, const PatchRef& p) {
  PatchEpsCells out;
  out.cellsPerAxis = p.extent * mesh.epc;
  const int nc = out.cellsPerAxis;
  const int nyc = mesh.d == 2 ? nc : 1;
  const int ox = p.origin[0] * mesh.epc;
  const int oy = p.origin[1] * mesh.epc;
  out.global.resize(static_cast<std::size_t>(nc) * nyc);
  std::size_t idx = 0;
  for (int j = 0; j < nyc; ++j)
    for (int i = 0; i < nc; ++i, ++idx)
      out.global[idx] = mesh.epsIndex({ox + i, oy + j});
  return out;
}

std::vector<int> fine_cells_of(const MeshHierarchy& mesh, const PatchRef& p) {
  const int nc = p.extent * mesh.fpc;
  const int nyc = mesh.d == 2 ? nc : 1;
  const int ox = p.origin[0] * mesh.fpc;
  const int oy = p.origin[1] * mesh.fpc;
  std::vector<int> out(static_cast<std::size_t>(nc) * nyc);
  std::size_t idx = 0;
  for (int j = 0; j < nyc; ++j)
    for (int i = 0; i < nc; ++i, ++idx)
      out[idx] = mesh.fineIndex({ox + i, oy + j});
  return out;
}

std::array<int, 2> patch_local_element(const MeshHierarchy& mesh,
                                       const PatchRef& p, int element) {
  auto c = mesh.coarseCoords(element);
  std::array<int, 2> local = {
      MeshHierarchy::wrap(c[0] - p.origin[0], mesh.nH),
      mesh.d == 2 ? MeshHierarchy::wrap(c[1] - p.origin[1], mesh.nH) : 0};
  if (local[0] >= p.extent || (mesh.d == 2 && local[1] >= p.extent))
    throw Error("element is not inside the patch");
  return local;
}

}  // namespace olod
