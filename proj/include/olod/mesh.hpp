#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "olod/errors.hpp"

namespace olod {

// ---------------------------------------------------------------------------
// Three nested uniform Cartesian grids on the periodic unit cube [0,1]^d,
// d in {1,2}:
//
//   coarse mesh   nH  elements per axis (the solver mesh, size H = 1/nH)
//   eps grid      nEps cells per axis   (one coefficient value per cell)
//   fine mesh     nh  elements per axis (resolves the coefficient, h = 1/nh)
//
// All three are powers of two and nest: nH | nEps | nh. Because the domain
// is periodic there is exactly one node per element per axis; nodes and
// cells share the same index space. Indices are lexicographic with x
// fastest: index = x + n*y.
// ---------------------------------------------------------------------------
struct MeshHierarchy {
  int d = 1;
  int nH = 0, nEps = 0, nh = 0;
  double H = 0, eps = 0, h = 0;
  int fpc = 0;  // fine cells per coarse element, per axis (nh / nH)
  int epc = 0;  // eps cells per coarse element, per axis (nEps / nH)
  int fpe = 0;  // fine cells per eps cell, per axis (nh / nEps)

  int numCoarseElements = 0;  // == number of coarse nodes
  int numFineNodes = 0;       // == number of fine cells
  int numEpsCells = 0;

  int ny(int n) const { return d == 2 ? n : 1; }

  std::array<int, 2> coords(int index, int n) const {
    return {index % n, d == 2 ? index / n : 0};
  }
  int index(std::array<int, 2> c, int n) const {
    return c[0] + (d == 2 ? n * c[1] : 0);
  }
  static int wrap(int i, int n) { return ((i % n) + n) % n; }

  std::array<int, 2> coarseCoords(int e) const { return coords(e, nH); }
  int coarseIndex(std::array<int, 2> c) const {
    return index({wrap(c[0], nH), wrap(c[1], nH)}, nH);
  }
  std::array<int, 2> fineCoords(int i) const { return coords(i, nh); }
  int fineIndex(std::array<int, 2> c) const {
    return index({wrap(c[0], nh), wrap(c[1], nh)}, nh);
  }
  int epsIndex(std::array<int, 2> c) const {
    return index({wrap(c[0], nEps), wrap(c[1], nEps)}, nEps);
  }
  std::array<int, 2> epsCoords(int i) const { return coords(i, nEps); }

  // eps cell containing a fine cell.
  int epsCellOfFineCell(int fineCell) const {
    auto c = fineCoords(fineCell);
    return epsIndex({c[0] / fpe, c[1] / fpe});
  }

  // Global fine-node index of corner `corner` (lexicographic, 2^d corners)
  // of the fine cell with coordinates `cell`.
  int fineCellNode(std::array<int, 2> cell, int corner) const {
    return fineIndex({cell[0] + (corner & 1), cell[1] + ((corner >> 1) & 1)});
  }
  int coarseCellNode(std::array<int, 2> cell, int corner) const {
    return coarseIndex(
        {cell[0] + (corner & 1), cell[1] + ((corner >> 1) & 1)});
  }
};

// Validates and fills in the derived quantities. Throws BadDimension for
// d outside {1,2} and NonNested when the grids are not nested powers of two.
MeshHierarchy build_hierarchy(int d, int nH, int nEps, int nh);

// ---------------------------------------------------------------------------
// k-layer periodic patch around a coarse element: the block of
// min(2k+1, nH)^d coarse elements centered (in the periodic sense) at the
// element. When 2k+1 >= nH the patch saturates to the whole domain and
// loses its artificial boundary.
// ---------------------------------------------------------------------------
struct PatchRef {
  int centerElement = 0;             // global coarse element index
  int k = 0;                         // number of layers
  std::array<int, 2> origin = {0, 0};  // coarse coords of the lowest corner
  int extent = 0;                    // coarse elements per axis
  bool fullDomain = false;           // extent == nH
};

PatchRef patch(const MeshHierarchy& mesh, int element, int k);

// Same patch shape relocated so that `element` becomes the center. Patch
// shapes are translation-invariant on a periodic uniform grid, so local
// numbering transfers verbatim.
PatchRef translate_patch(const MeshHierarchy& mesh, const PatchRef& p,
                         int element);

// Fine nodes covered by a patch, in local lexicographic order, with a flag
// per node marking the artificial patch boundary (all zero for a
// full-domain patch, which is periodic and has no boundary).
struct PatchFineNodes {
  std::vector<int> global;
  std::vector<std::uint8_t> boundary;
  int nodesPerAxis = 0;
  int cellsPerAxis = 0;
};
PatchFineNodes fine_nodes_of(const MeshHierarchy& mesh, const PatchRef& p);

// Coarse nodes covered by a patch, local lexicographic order.
struct PatchCoarseNodes {
  std::vector<int> global;
  int nodesPerAxis = 0;
};
PatchCoarseNodes coarse_nodes_of(const MeshHierarchy& mesh, const PatchRef& p);

// eps cells covered by a patch, local lexicographic order. This ordering is
// the contract for defect slot numbering in the offline database: slot i
// (i >= 1) is the i-th cell in this list, 1-based.
struct PatchEpsCells {
  std::vector<int> global;
  int cellsPerAxis = 0;
};
PatchEpsCells cells_eps_of(const MeshHierarchy& mesh, const PatchRef& p);

// Fine cells covered by a patch, local lexicographic order (extent*fpc per
// axis). Local fine cell (cx, cy) has its 2^d nodes at local node
// coordinates (cx + dx, cy + dy) on the patch node grid.
std::vector<int> fine_cells_of(const MeshHierarchy& mesh, const PatchRef& p);

// Local coordinates (in coarse elements, relative to the patch origin) of a
// global coarse element that lies inside the patch.
std::array<int, 2> patch_local_element(const MeshHierarchy& mesh,
                                       const PatchRef& p, int element);

}  // namespace olod
