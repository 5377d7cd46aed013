#include "olod/corrector.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include "olod/util.hpp"

namespace olod {

// ---------------------------------------------------------------------------
// Translation-invariant patch machinery.
// ---------------------------------------------------------------------------
struct CorrectorWorkspace::Impl {
  int d = 1, fpc = 1;
  int extent = 0;       // coarse elements per axis
  bool fullDomain = false;
  int ncell = 0;        // fine cells per axis
  int nn = 0;           // fine nodes per axis
  int mcn = 0;          // coarse nodes per axis
  int mf = 0, mc = 0, corners = 2;

  std::vector<int> interior;    // interior local fine nodes, ascending
  std::vector<int> toInterior;  // local fine node -> interior id, or -1
  Eigen::SparseMatrix<double, Eigen::RowMajor> Cloc;  // mc x mf
  SpMat Ploc;                                         // mf x mc
  std::vector<int> keptRows;    // constraint rows with support on interior
  Eigen::MatrixXd elemK;        // unit-coefficient fine element stiffness

  mutable Eigen::SparseLU<SpMat> lu;
  mutable bool analyzed = false;

  int fnode(int x, int y) const {
    if (fullDomain) {
      x = MeshHierarchy::wrap(x, nn);
      y = MeshHierarchy::wrap(y, nn);
    }
    return x + (d == 2 ? nn * y : 0);
  }
  int cnode(int x, int y) const {
    if (fullDomain) {
      x = MeshHierarchy::wrap(x, mcn);
      y = MeshHierarchy::wrap(y, mcn);
    }
    return x + (d == 2 ? mcn * y : 0);
  }
};

CorrectorWorkspace::~CorrectorWorkspace() = default;

CorrectorWorkspace::CorrectorWorkspace(const MeshHierarchy& mesh, int k,
                                       InterpVariant variant)
    : mesh_(mesh), k_(k), variant_(variant), impl_(new Impl) {
  if (variant == InterpVariant::Nodal1D && mesh.d != 1)
    throw DimensionError("nodal interpolation variant is 1-d only");
  Impl& im = *impl_;
  im.d = mesh.d;
  im.fpc = mesh.fpc;
  im.extent = std::min(2 * k + 1, mesh.nH);
  im.fullDomain = (im.extent == mesh.nH);
  im.ncell = im.extent * mesh.fpc;
  im.nn = im.fullDomain ? mesh.nh : im.ncell + 1;
  im.mcn = im.fullDomain ? mesh.nH : im.extent + 1;
  im.corners = 1 << mesh.d;
  const int nyn = mesh.d == 2 ? im.nn : 1;
  im.mf = im.nn * nyn;
  im.mc = im.mcn * (mesh.d == 2 ? im.mcn : 1);
  im.elemK = element_stiffness(mesh.d, mesh.h);

  // Interior fine nodes (a full-domain patch is periodic: all interior).
  im.toInterior.assign(static_cast<std::size_t>(im.mf), -1);
  for (int y = 0; y < nyn; ++y)
    for (int x = 0; x < im.nn; ++x) {
      bool onBoundary = false;
      if (!im.fullDomain) {
        onBoundary = (x == 0 || x == im.nn - 1);
        if (mesh.d == 2) onBoundary = onBoundary || y == 0 || y == im.nn - 1;
      }
      if (!onBoundary) {
        im.toInterior[static_cast<std::size_t>(im.fnode(x, y))] =
            static_cast<int>(im.interior.size());
        im.interior.push_back(im.fnode(x, y));
      }
    }

  // Local interpolation constraint: the rows of the global operator
  // restricted to patch fine nodes. Only elements inside the patch can
  // contribute (functions in W vanish on and outside the patch boundary);
  // the per-node averaging weight stays 1/2^d, the global adjacency count.
  std::vector<Eigen::Triplet<double>> ctrip;
  if (variant == InterpVariant::Nodal1D) {
    for (int z = 0; z < im.mcn; ++z)
      ctrip.emplace_back(im.cnode(z, 0), im.fnode(z * im.fpc, 0), 1.0);
  } else {
    const Eigen::MatrixXd G = quasi_interp_element_block(mesh);
    const double w = 1.0 / im.corners;
    const int nn1 = im.fpc + 1;
    const int nye = mesh.d == 2 ? im.extent : 1;
    const int nyn1 = mesh.d == 2 ? nn1 : 1;
    for (int ey = 0; ey < nye; ++ey)
      for (int ex = 0; ex < im.extent; ++ex)
        for (int c = 0; c < im.corners; ++c) {
          int row = im.cnode(ex + (c & 1), ey + ((c >> 1) & 1));
          for (int j = 0; j < nyn1; ++j)
            for (int i = 0; i < nn1; ++i) {
              double g = G(c, i + nn1 * j);
              if (g != 0.0)
                ctrip.emplace_back(
                    row, im.fnode(ex * im.fpc + i, ey * im.fpc + j), w * g);
            }
        }
  }
  im.Cloc.resize(im.mc, im.mf);
  im.Cloc.setFromTriplets(ctrip.begin(), ctrip.end());
  im.Cloc.makeCompressed();

  // Constraint rows with no support on interior nodes carry no information
  // once the boundary values are pinned to zero; keep the rest.
  for (int r = 0; r < im.mc; ++r) {
    bool keep = false;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
             im.Cloc, r);
         it; ++it)
      if (im.toInterior[static_cast<std::size_t>(it.col())] >= 0 &&
          it.value() != 0.0) {
        keep = true;
        break;
      }
    if (keep) im.keptRows.push_back(r);
  }

  // Local prolongation: hats of the patch coarse nodes at patch fine nodes.
  std::vector<Eigen::Triplet<double>> ptrip;
  for (int y = 0; y < nyn; ++y)
    for (int x = 0; x < im.nn; ++x) {
      int ex = x / im.fpc, rx = x % im.fpc;
      int ey = y / im.fpc, ry = y % im.fpc;
      // The last node of a non-saturated patch belongs to the last element.
      if (!im.fullDomain && ex == im.extent) { ex -= 1; rx = im.fpc; }
      if (!im.fullDomain && mesh.d == 2 && ey == im.extent) {
        ey -= 1; ry = im.fpc;
      }
      double wx[2] = {double(im.fpc - rx) / im.fpc, double(rx) / im.fpc};
      double wy[2] = {double(im.fpc - ry) / im.fpc, double(ry) / im.fpc};
      for (int dy = 0; dy < (mesh.d == 2 ? 2 : 1); ++dy) {
        double wyv = mesh.d == 2 ? wy[dy] : 1.0;
        if (wyv == 0.0) continue;
        for (int dx = 0; dx < 2; ++dx)
          if (wx[dx] != 0.0)
            ptrip.emplace_back(im.fnode(x, y), im.cnode(ex + dx, ey + dy),
                               wx[dx] * wyv);
      }
    }
  im.Ploc.resize(im.mf, im.mc);
  im.Ploc.setFromTriplets(ptrip.begin(), ptrip.end());
  im.Ploc.makeCompressed();
}

int CorrectorWorkspace::fineCount() const { return impl_->mf; }
int CorrectorWorkspace::coarseCount() const { return impl_->mc; }

CorrectorWorkspace::LocalResult CorrectorWorkspace::solve(
    const std::vector<double>& values, std::array<int, 2> localElement) const {
  const Impl& im = *impl_;
  const MeshHierarchy& mesh = mesh_;
  const int nyc = mesh.d == 2 ? im.ncell : 1;
  if (static_cast<int>(values.size()) != im.ncell * nyc)
    throw Error("patch coefficient vector has the wrong size");
  if (localElement[0] < 0 || localElement[0] >= im.extent ||
      (mesh.d == 2 && (localElement[1] < 0 || localElement[1] >= im.extent)))
    throw Error("corrector element is outside the patch");

  const int nI = static_cast<int>(im.interior.size());
  const int nC = static_cast<int>(im.keptRows.size());
  const int n = nI + nC;
  const int corners = im.corners;

  // Full patch stiffness (no boundary conditions; needed for the
  // Petrov-Galerkin pairing) and its interior restriction in one sweep.
  std::vector<Eigen::Triplet<double>> ktrip, strip;
  ktrip.reserve(static_cast<std::size_t>(im.ncell) * nyc * corners * corners);
  strip.reserve(ktrip.capacity());
  double diagScale = 0;
  for (int cy = 0; cy < nyc; ++cy)
    for (int cx = 0; cx < im.ncell; ++cx) {
      double v = values[static_cast<std::size_t>(cx) +
                        static_cast<std::size_t>(im.ncell) * cy];
      int node[4];
      for (int c = 0; c < corners; ++c)
        node[c] = im.fnode(cx + (c & 1), cy + ((c >> 1) & 1));
      for (int a = 0; a < corners; ++a) {
        diagScale += v * im.elemK(a, a);
        for (int b = 0; b < corners; ++b) {
          double kv = v * im.elemK(a, b);
          ktrip.emplace_back(node[a], node[b], kv);
          int ia = im.toInterior[static_cast<std::size_t>(node[a])];
          int ib = im.toInterior[static_cast<std::size_t>(node[b])];
          if (ia >= 0 && ib >= 0) strip.emplace_back(ia, ib, kv);
        }
      }
    }
  diagScale /= std::max(1, im.mf);

  SpMat Kfull(im.mf, im.mf);
  Kfull.setFromTriplets(ktrip.begin(), ktrip.end());

  for (int r = 0; r < nC; ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
             im.Cloc, im.keptRows[static_cast<std::size_t>(r)]);
         it; ++it) {
      int ic = im.toInterior[static_cast<std::size_t>(it.col())];
      if (ic < 0 || it.value() == 0.0) continue;
      strip.emplace_back(nI + r, ic, it.value());
      strip.emplace_back(ic, nI + r, it.value());
    }

  auto build = [&](double reg) {
    SpMat A(n, n);
    if (reg != 0.0) {
      auto trip = strip;
      for (int r = 0; r < nC; ++r) trip.emplace_back(nI + r, nI + r, -reg);
      A.setFromTriplets(trip.begin(), trip.end());
    } else {
      A.setFromTriplets(strip.begin(), strip.end());
    }
    A.makeCompressed();
    return A;
  };

  // Right-hand sides: the element-only stiffness action of each corner hat,
  // over all patch fine nodes (the unrestricted vector doubles as one term
  // of the Petrov-Galerkin pairing).
  Eigen::MatrixXd rfull = Eigen::MatrixXd::Zero(im.mf, corners);
  const int ex0 = localElement[0] * im.fpc;
  const int ey0 = mesh.d == 2 ? localElement[1] * im.fpc : 0;
  const int nyl = mesh.d == 2 ? im.fpc : 1;
  for (int ly = 0; ly < nyl; ++ly)
    for (int lx = 0; lx < im.fpc; ++lx) {
      int gx = ex0 + lx, gy = ey0 + ly;
      int cellIdx = im.fullDomain
                        ? MeshHierarchy::wrap(gx, im.ncell) +
                              (mesh.d == 2
                                   ? im.ncell * MeshHierarchy::wrap(gy, im.ncell)
                                   : 0)
                        : gx + (mesh.d == 2 ? im.ncell * gy : 0);
      double v = values[static_cast<std::size_t>(cellIdx)];
      int node[4];
      double hat[4][4];  // hat[j][b]: corner hat j at cell corner b
      for (int b = 0; b < corners; ++b) {
        node[b] = im.fnode(gx + (b & 1), gy + ((b >> 1) & 1));
        double tx = double(lx + (b & 1)) / im.fpc;
        double ty = double(ly + ((b >> 1) & 1)) / im.fpc;
        for (int j = 0; j < corners; ++j) {
          double w = (j & 1) ? tx : 1.0 - tx;
          if (mesh.d == 2) w *= ((j >> 1) & 1) ? ty : 1.0 - ty;
          hat[j][b] = w;
        }
      }
      for (int j = 0; j < corners; ++j)
        for (int a = 0; a < corners; ++a) {
          double s = 0;
          for (int b = 0; b < corners; ++b) s += im.elemK(a, b) * hat[j][b];
          rfull(node[a], j) += v * s;
        }
    }

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, corners);
  for (int i = 0; i < nI; ++i)
    rhs.row(i) = rfull.row(im.interior[static_cast<std::size_t>(i)]);

  auto attempt = [&](double reg, Eigen::MatrixXd& sol) {
    SpMat A = build(reg);
    if (!im.analyzed) {
      im.lu.analyzePattern(A);
      im.analyzed = true;
    }
    im.lu.factorize(A);
    if (im.lu.info() != Eigen::Success) return false;
    sol = im.lu.solve(rhs);
    if (im.lu.info() != Eigen::Success) return false;
    double resid = (A * sol - rhs).cwiseAbs().maxCoeff();
    double scale = std::max(rhs.cwiseAbs().maxCoeff(), diagScale);
    return resid <= 1e-7 * scale;
  };

  Eigen::MatrixXd sol;
  if (!attempt(0.0, sol)) {
    // Rank-deficient constraint block (e.g. degenerate variants): damp the
    // multipliers slightly and retry before giving up.
    im.analyzed = false;
    bool ok = attempt(1e-12 * diagScale, sol);
    im.analyzed = false;
    if (!ok) throw SingularSystem("corrector saddle-point solve failed");
  }

  LocalResult out;
  out.q = Eigen::MatrixXd::Zero(im.mf, corners);
  for (int i = 0; i < nI; ++i)
    out.q.row(im.interior[static_cast<std::size_t>(i)]) = sol.row(i);
  Eigen::MatrixXd Y = rfull - Kfull * out.q;
  out.block = im.Ploc.transpose() * Y;
  return out;
}

std::vector<double> restrict_field(const MeshHierarchy& mesh,
                                   const PatchRef& p,
                                   const CoefficientField& field) {
  std::vector<int> cells = fine_cells_of(mesh, p);
  std::vector<double> out(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    out[i] = field.value[static_cast<std::size_t>(cells[i])];
  return out;
}

ElementCorrectors solve_element_correctors(const MeshHierarchy& mesh,
                                           const CoefficientField& field,
                                           int element, int k,
                                           InterpVariant variant) {
  CorrectorWorkspace ws(mesh, k, variant);
  PatchRef pr = patch(mesh, element, k);
  auto res = ws.solve(restrict_field(mesh, pr, field),
                      patch_local_element(mesh, pr, element));
  return ElementCorrectors{pr, std::move(res.q), std::move(res.block)};
}

namespace {

// Memoizes corrector solves by patch coefficient data. Patches of a
// piecewise-periodic field mostly repeat, so this turns the per-element
// loop into a handful of genuine solves without changing any result.
class SolveCache {
 public:
  explicit SolveCache(const CorrectorWorkspace& ws) : ws_(ws) {}

  const CorrectorWorkspace::LocalResult& get(
      const std::vector<double>& values, std::array<int, 2> localElement) {
    std::uint64_t h =
        crc64(values.data(), values.size() * sizeof(double));
    h = hash_combine(h, static_cast<std::uint64_t>(localElement[0]));
    h = hash_combine(h, static_cast<std::uint64_t>(localElement[1]));
    auto& bucket = map_[h];
    for (auto& entry : bucket)
      if (entry.localElement == localElement && entry.values == values)
        return entry.result;
    bucket.push_back(
        Entry{values, localElement, ws_.solve(values, localElement)});
    return bucket.back().result;
  }

 private:
  struct Entry {
    std::vector<double> values;
    std::array<int, 2> localElement;
    CorrectorWorkspace::LocalResult result;
  };
  const CorrectorWorkspace& ws_;
  std::unordered_map<std::uint64_t, std::vector<Entry>> map_;
};

}  // namespace

struct MlodAssembler::Impl {
  MeshHierarchy mesh;
  CorrectorWorkspace ws;
  SolveCache cache;
  Impl(const MeshHierarchy& m, int k, InterpVariant variant)
      : mesh(m), ws(m, k, variant), cache(ws) {}
};

MlodAssembler::MlodAssembler(const MeshHierarchy& mesh, int k,
                             InterpVariant variant)
    : impl_(std::make_unique<Impl>(mesh, k, variant)) {}

MlodAssembler::~MlodAssembler() = default;

CoarseForm MlodAssembler::assemble(const CoefficientField& field) {
  const MeshHierarchy& mesh = impl_->mesh;
  const int k = impl_->ws.k();
  const int nc = mesh.numCoarseElements;
  const int corners = 1 << mesh.d;
  CoarseForm form;
  form.kind = "pg-mlod";
  form.K = Eigen::MatrixXd::Zero(nc, nc);
  for (int e = 0; e < nc; ++e) {
    PatchRef pr = patch(mesh, e, k);
    const auto& res = impl_->cache.get(restrict_field(mesh, pr, field),
                                       patch_local_element(mesh, pr, e));
    PatchCoarseNodes cn = coarse_nodes_of(mesh, pr);
    auto ec = mesh.coarseCoords(e);
    for (int j = 0; j < corners; ++j) {
      int col = mesh.coarseCellNode(ec, j);
      for (int r = 0; r < impl_->ws.coarseCount(); ++r)
        form.K(cn.global[static_cast<std::size_t>(r)], col) +=
            res.block(r, j);
    }
  }
  return form;
}

SpMat MlodAssembler::correctors(const CoefficientField& field) {
  const MeshHierarchy& mesh = impl_->mesh;
  const int k = impl_->ws.k();
  const int corners = 1 << mesh.d;
  std::vector<Eigen::Triplet<double>> trip;
  for (int e = 0; e < mesh.numCoarseElements; ++e) {
    PatchRef pr = patch(mesh, e, k);
    const auto& res = impl_->cache.get(restrict_field(mesh, pr, field),
                                       patch_local_element(mesh, pr, e));
    PatchFineNodes fn = fine_nodes_of(mesh, pr);
    auto ec = mesh.coarseCoords(e);
    for (int j = 0; j < corners; ++j) {
      int col = mesh.coarseCellNode(ec, j);
      for (int i = 0; i < impl_->ws.fineCount(); ++i) {
        double v = res.q(i, j);
        if (v != 0.0)
          trip.emplace_back(fn.global[static_cast<std::size_t>(i)], col, v);
      }
    }
  }
  SpMat Q(mesh.numFineNodes, mesh.numCoarseElements);
  Q.setFromTriplets(trip.begin(), trip.end());
  Q.makeCompressed();
  return Q;
}

CoarseForm assemble_pg_mlod(const MeshHierarchy& mesh,
                            const CoefficientField& field, int k,
                            InterpVariant variant) {
  return MlodAssembler(mesh, k, variant).assemble(field);
}

SpMat assemble_global_correctors(const MeshHierarchy& mesh,
                                 const CoefficientField& field, int k,
                                 InterpVariant variant) {
  return MlodAssembler(mesh, k, variant).correctors(field);
}

namespace {

CoarseForm corrected_form(const MeshHierarchy& mesh,
                          const CoefficientField& field, int k,
                          InterpVariant variant, bool mass) {
  SpMat Q = assemble_global_correctors(mesh, field, k, variant);
  SpMat B = prolongation(mesh) - Q;  // corrected basis, one column per node
  SpMat Af = mass ? assemble_mass(mesh, GridLevel::Fine)
                  : assemble_stiffness(mesh, GridLevel::Fine, field.value);
  CoarseForm form;
  form.kind = mass ? "lod-mass" : "galerkin-lod";
  form.K = Eigen::MatrixXd(SpMat(B.transpose() * (Af * B)));
  return form;
}

}  // namespace

CoarseForm assemble_galerkin_lod(const MeshHierarchy& mesh,
                                 const CoefficientField& field, int k,
                                 InterpVariant variant) {
  return corrected_form(mesh, field, k, variant, false);
}

CoarseForm lod_mass(const MeshHierarchy& mesh, const CoefficientField& field,
                    int k, InterpVariant variant) {
  return corrected_form(mesh, field, k, variant, true);
}

Eigen::VectorXd reconstruct(const MeshHierarchy& mesh, const SpMat& correctors,
                            const Eigen::VectorXd& coarse) {
  return prolongation(mesh) * coarse - correctors * coarse;
}

}  // namespace olod
