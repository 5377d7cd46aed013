#include "olod/coeff.hpp"

#include <algorithm>
#include <cmath>

#include "olod/util.hpp"

namespace olod {

std::string to_string(DefectModel m) {
  return m == DefectModel::Checkerboard ? "checkerboard" : "erasure";
}

namespace {

void check_bounds(double alpha, double beta) {
  if (!(alpha > 0) || !(beta > alpha))
    throw Error("coefficient bounds must satisfy 0 < alpha < beta");
}

}  // namespace

PeriodicPattern PeriodicPattern::checkerboard(double alpha, double beta) {
  check_bounds(alpha, beta);
  PeriodicPattern p;
  p.alpha = alpha;
  p.beta = beta;
  p.model = DefectModel::Checkerboard;
  p.periodCells = 1;
  p.background = {alpha};
  p.inclusion = {beta - alpha};
  return p;
}

PeriodicPattern PeriodicPattern::erasure(double alpha, double beta,
                                         int period) {
  check_bounds(alpha, beta);
  if (period < 2) throw Error("erasure pattern needs period >= 2");
  PeriodicPattern p;
  p.alpha = alpha;
  p.beta = beta;
  p.model = DefectModel::Erasure;
  p.periodCells = period;
  // Values are stored for a d=2 period block; the d=1 case reads the first
  // row, which is consistent because the inclusion sits at the low corner.
  p.background.assign(static_cast<std::size_t>(period) * period, alpha);
  p.inclusion.assign(static_cast<std::size_t>(period) * period, 0.0);
  p.background[0] = beta;
  p.inclusion[0] = alpha - beta;
  return p;
}

namespace {

std::size_t pattern_cell(const PeriodicPattern& pat, const MeshHierarchy& mesh,
                         int epsCell) {
  auto c = mesh.epsCoords(epsCell);
  int px = c[0] % pat.periodCells;
  int py = mesh.d == 2 ? c[1] % pat.periodCells : 0;
  return static_cast<std::size_t>(px) +
         static_cast<std::size_t>(pat.periodCells) * py;
}

}  // namespace

double PeriodicPattern::background_at(const MeshHierarchy& mesh,
                                      int epsCell) const {
  return background[pattern_cell(*this, mesh, epsCell)];
}

double PeriodicPattern::inclusion_at(const MeshHierarchy& mesh,
                                     int epsCell) const {
  return inclusion[pattern_cell(*this, mesh, epsCell)];
}

bool DefectRealization::has_defect(int epsCell) const {
  return std::binary_search(defects.begin(), defects.end(), epsCell);
}

std::vector<int> defects_in_patch(const MeshHierarchy& mesh,
                                  const PatchRef& patch,
                                  const DefectRealization& realization) {
  const int ece = patch.extent * mesh.epc;  // eps cells per patch axis
  const int ox = patch.origin[0] * mesh.epc;
  const int oy = patch.origin[1] * mesh.epc;
  std::vector<int> local;
  for (int cell : realization.defects) {
    auto c = mesh.epsCoords(cell);
    int dx = MeshHierarchy::wrap(c[0] - ox, mesh.nEps);
    if (dx >= ece) continue;
    int dy = 0;
    if (mesh.d == 2) {
      dy = MeshHierarchy::wrap(c[1] - oy, mesh.nEps);
      if (dy >= ece) continue;
    }
    local.push_back(dx + ece * dy);
  }
  std::sort(local.begin(), local.end());
  return local;
}

DefectRealization realize_defects(const MeshHierarchy& mesh,
                                  const PeriodicPattern& pattern, double p,
                                  std::uint64_t seed, std::uint64_t sample) {
  if (p < 0 || p > 1) throw Error("defect probability must be in [0,1]");
  DefectRealization r;
  r.seed = seed;
  r.sample = sample;
  r.p = p;
  for (int cell = 0; cell < mesh.numEpsCells; ++cell) {
    if (uniform01(seed, sample, static_cast<std::uint64_t>(cell)) < p &&
        pattern.inclusion_at(mesh, cell) != 0.0)
      r.defects.push_back(cell);
  }
  return r;
}

DefectRealization realize_defects_sparse(const MeshHierarchy& mesh,
                                         const PeriodicPattern& pattern,
                                         double p, std::uint64_t seed,
                                         std::uint64_t sample, int k,
                                         int maxPerPatch, int maxAttempts) {
  // Two defects share some k-layer patch exactly when their host coarse
  // elements are within 2k layers of each other (in the periodic Chebyshev
  // distance); with maxPerPatch == 1 we reject such pairs. For larger
  // budgets we count defects per patch directly.
  auto admissible = [&](const DefectRealization& r) {
    if (maxPerPatch == 1) {
      const int limit = std::min(2 * k, mesh.nH - 1);
      for (std::size_t a = 0; a < r.defects.size(); ++a) {
        auto ca = mesh.epsCoords(r.defects[a]);
        std::array<int, 2> ea = {ca[0] / mesh.epc, ca[1] / mesh.epc};
        for (std::size_t b = a + 1; b < r.defects.size(); ++b) {
          auto cb = mesh.epsCoords(r.defects[b]);
          std::array<int, 2> eb = {cb[0] / mesh.epc, cb[1] / mesh.epc};
          int dist = 0;
          for (int ax = 0; ax < mesh.d; ++ax) {
            int diff = std::abs(ea[ax] - eb[ax]);
            dist = std::max(dist, std::min(diff, mesh.nH - diff));
          }
          if (dist <= limit) return false;
        }
      }
      return true;
    }
    for (int e = 0; e < mesh.numCoarseElements; ++e) {
      auto cells = cells_eps_of(mesh, patch(mesh, e, k));
      int count = 0;
      for (int c : cells.global)
        if (std::binary_search(r.defects.begin(), r.defects.end(), c)) ++count;
      if (count > maxPerPatch) return false;
    }
    return true;
  };

  for (int attempt = 0; attempt < maxAttempts; ++attempt) {
    std::uint64_t s =
        attempt == 0 ? seed
                     : hash_combine(seed, static_cast<std::uint64_t>(attempt));
    DefectRealization r = realize_defects(mesh, pattern, p, s, sample);
    if (admissible(r)) {
      r.seed = seed;  // report the caller's seed, not the retry key
      return r;
    }
  }
  throw Error("could not sample a realization with at most " +
              std::to_string(maxPerPatch) + " defect(s) per patch");
}

CoefficientField realize_field(const MeshHierarchy& mesh,
                               const PeriodicPattern& pattern,
                               const DefectRealization& realization) {
  CoefficientField f;
  f.alpha = pattern.alpha;
  f.beta = pattern.beta;
  f.value.resize(static_cast<std::size_t>(mesh.numFineNodes));
  for (int cell = 0; cell < mesh.numFineNodes; ++cell) {
    int ec = mesh.epsCellOfFineCell(cell);
    double v = pattern.background_at(mesh, ec);
    if (realization.has_defect(ec)) v += pattern.inclusion_at(mesh, ec);
    f.value[static_cast<std::size_t>(cell)] = v;
  }
  return f;
}

CoefficientField defect_free_field(const MeshHierarchy& mesh,
                                   const PeriodicPattern& pattern) {
  return realize_field(mesh, pattern, DefectRealization{});
}

std::vector<double> harmonic_mean_field_1d(const MeshHierarchy& mesh,
                                           const CoefficientField& field) {
  if (mesh.d != 1)
    throw DimensionError("harmonic-mean upscaling is defined for d == 1");
  std::vector<double> out(static_cast<std::size_t>(mesh.nH));
  for (int e = 0; e < mesh.nH; ++e) {
    double inv = 0;
    for (int c = e * mesh.fpc; c < (e + 1) * mesh.fpc; ++c)
      inv += 1.0 / field.value[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(e)] = mesh.fpc / inv;
  }
  return out;
}

}  // namespace olod
