#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "olod/mesh.hpp"

namespace olod {

// How random defects perturb the periodic coefficient.
enum class DefectModel {
  Checkerboard,  // background alpha; a defective eps cell switches to beta
  Erasure,       // periodic beta-inclusions; a defect erases one to alpha
};

std::string to_string(DefectModel m);

// ---------------------------------------------------------------------------
// A scalar coefficient that is periodic with period `periodCells` eps cells
// per axis, plus an additive perturbation per cell that a defect switches
// on. Values stay within [alpha, beta] with alpha > 0, so the operator
// remains uniformly elliptic for every defect configuration.
// ---------------------------------------------------------------------------
struct PeriodicPattern {
  double alpha = 0, beta = 0;
  DefectModel model = DefectModel::Checkerboard;
  int periodCells = 1;             // pattern period, in eps cells per axis
  std::vector<double> background;  // periodCells^d values, defect-free layout
  std::vector<double> inclusion;   // additive value when the cell is defective

  // Background coefficient α everywhere; a defect switches an eps cell to β.
  static PeriodicPattern checkerboard(double alpha, double beta);

  // One β-inclusion cell per (period x period) block of eps cells (the
  // lowest-corner cell), α elsewhere; a defect erases an inclusion back
  // to α. Defects drawn on non-inclusion cells change nothing.
  static PeriodicPattern erasure(double alpha, double beta, int period = 2);

  // Pattern values for a global eps cell.
  double background_at(const MeshHierarchy& mesh, int epsCell) const;
  double inclusion_at(const MeshHierarchy& mesh, int epsCell) const;
};

// ---------------------------------------------------------------------------
// One random defect configuration: i.i.d. Bernoulli(p) bits over all eps
// cells, drawn from the counter-based hash of (seed, sample, cell), so any
// realization is reproducible in isolation. `defects` keeps only the cells
// where the bit actually changes the coefficient (for the erasure model,
// bits on non-inclusion cells are dropped; the resulting field and all
// recombination weights are unchanged by this).
// ---------------------------------------------------------------------------
struct DefectRealization {
  std::uint64_t seed = 0;
  std::uint64_t sample = 0;
  double p = 0;
  std::vector<int> defects;  // ascending global eps-cell indices
  bool has_defect(int epsCell) const;
};

DefectRealization realize_defects(const MeshHierarchy& mesh,
                                  const PeriodicPattern& pattern, double p,
                                  std::uint64_t seed, std::uint64_t sample);

// Defective eps cells of a realization that fall inside a patch, as
// patch-local lexicographic cell indices (ascending; the order the offline
// database enumerates its single-defect slots in).
std::vector<int> defects_in_patch(const MeshHierarchy& mesh,
                                  const PatchRef& patch,
                                  const DefectRealization& realization);

// Rejection-samples realizations until every k-layer patch contains at most
// `maxPerPatch` defects (equivalently: all defect pairs are more than 2k
// coarse layers apart when maxPerPatch == 1). Retries with a re-keyed seed;
// throws Error after maxAttempts rejections.
DefectRealization realize_defects_sparse(const MeshHierarchy& mesh,
                                         const PeriodicPattern& pattern,
                                         double p, std::uint64_t seed,
                                         std::uint64_t sample, int k,
                                         int maxPerPatch = 1,
                                         int maxAttempts = 1000);

// ---------------------------------------------------------------------------
// A coefficient sampled on the fine mesh: one value per fine cell.
// ---------------------------------------------------------------------------
struct CoefficientField {
  double alpha = 0, beta = 0;
  std::vector<double> value;  // per fine cell, lexicographic
};

CoefficientField realize_field(const MeshHierarchy& mesh,
                               const PeriodicPattern& pattern,
                               const DefectRealization& realization);

// The defect-free field of a pattern.
CoefficientField defect_free_field(const MeshHierarchy& mesh,
                                   const PeriodicPattern& pattern);

// Per-coarse-element harmonic mean of a 1-d field: the exact effective
// coefficient of a piecewise-constant 1-d problem on each element. Throws
// DimensionError when mesh.d != 1.
std::vector<double> harmonic_mean_field_1d(const MeshHierarchy& mesh,
                                           const CoefficientField& field);

}  // namespace olod
