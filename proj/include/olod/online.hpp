#pragma once

#include <limits>
#include <string>

#include "olod/offline.hpp"

namespace olod {

// How the single-defect slots are weighted to emulate a multi-defect
// coefficient.
enum class MuStrategy {
  SumOne,      // weights sum to 1: defect slots get 1, slot 0 absorbs the rest
  AlternateS,  // weights sum to s, tuned to the two-point value distribution;
               // defect-free slots get a nonzero weight (checkerboard only)
};

std::string to_string(MuStrategy s);

// ---------------------------------------------------------------------------
// The tuned weight sum s. For a two-point coefficient with values alpha and
// beta, matching the per-cell reconstruction identity against prescribed
// harmonic (L) and arithmetic (M) means of the value distribution gives
//
//   s = (beta*L - alpha*M) / (alpha*(beta - alpha)).
//
// For i.i.d. Bernoulli(p) cells, L and M have closed forms and s reduces to
//   s = 1 + p^2 (beta - alpha) / (beta + p*(alpha - beta)),
// with s(0) = 1 and s(1) = beta/alpha.
// ---------------------------------------------------------------------------
double harmonic_limit_bernoulli(double p, double alpha, double beta);
double arithmetic_limit_bernoulli(double p, double alpha, double beta);
double compute_s_general(double L, double M, double alpha, double beta);
double compute_s_bernoulli(double p, double alpha, double beta);

// Per-patch slot weights of a strategy for a patch with `numSlots - 1`
// defect slots of which `defectCount` carry a defect.
struct MuWeights {
  double s = 1;            // sum of all weights
  double mu0 = 1;          // slot 0
  double muNondefect = 0;  // every slot i >= 1 without a defect
  double muDefect = 1;     // every slot i >= 1 with a defect
};

MuWeights mu_weights(MuStrategy strategy, const OfflineDatabase& db,
                     int defectCount, double p,
                     double s = std::numeric_limits<double>::quiet_NaN());

// The sparse weight decomposition of one patch: slot 0, the occupied
// single-defect slots with their weight, and the implicit common weight of
// every unoccupied slot (zero for SumOne). weight_sum() restores
// mu0 + sum over all numSlots-1 single-defect slots, which equals 1 for
// SumOne and s for AlternateS.
struct MuDecomposition {
  MuStrategy strategy = MuStrategy::SumOne;
  double s = 1;
  double mu0 = 1;
  double muNondefect = 0;
  std::vector<int> defectSlots;   // ascending 1-based slot numbers
  std::vector<double> muValues;   // one weight per listed slot
  double weight_sum(int numSlots) const;
};

MuDecomposition decompose(const OfflineDatabase& db, const MeshHierarchy& mesh,
                          const DefectRealization& realization,
                          const PatchRef& patch, MuStrategy strategy,
                          double s = std::numeric_limits<double>::quiet_NaN());

// ---------------------------------------------------------------------------
// Online recombination: the Petrov-Galerkin stiffness of a defect
// realization assembled purely from translated database slots; the cost per
// element is O(1 + defects in its patch) block sums, independent of the
// fine mesh.
//
// Throws ManifestMeshMismatch when db and mesh disagree and
// StrategyModelMismatch for AlternateS on a non-checkerboard model. An s
// override (for AlternateS) replaces the Bernoulli default computed from
// realization.p.
// ---------------------------------------------------------------------------
CoarseForm assemble_olod(const OfflineDatabase& db, const MeshHierarchy& mesh,
                         const DefectRealization& realization,
                         MuStrategy strategy,
                         double s = std::numeric_limits<double>::quiet_NaN());

// The recombined correctors of one element (same weights as the stiffness
// recombination); patch refers to `element`.
ElementCorrectors recombine_element(
    const OfflineDatabase& db, const MeshHierarchy& mesh,
    const DefectRealization& realization, MuStrategy strategy, int element,
    double s = std::numeric_limits<double>::quiet_NaN());

// Global corrector matrix recombined from the stored slots (the offline
// counterpart of assemble_global_correctors).
SpMat assemble_olod_correctors(
    const OfflineDatabase& db, const MeshHierarchy& mesh,
    const DefectRealization& realization, MuStrategy strategy,
    double s = std::numeric_limits<double>::quiet_NaN());

// Fine-mesh representative of a coarse solution of the recombined problem:
// P v - Q̂ v with the recombined correctors Q̂.
Eigen::VectorXd reconstruct_olod(
    const OfflineDatabase& db, const MeshHierarchy& mesh,
    const DefectRealization& realization, MuStrategy strategy,
    const Eigen::VectorXd& coarse,
    double s = std::numeric_limits<double>::quiet_NaN());

// ---------------------------------------------------------------------------
// Diagnostics.
// ---------------------------------------------------------------------------

// Consistency error between two coarse forms in the energy norm induced by
// the Gram matrix `gram` (which must be SPD up to the single constant
// direction, else NotSPD): the largest singular value of the difference in
// the gram^{-1/2} scaling, constants excluded.
double consistency_eta(const Eigen::MatrixXd& reference,
                       const Eigen::MatrixXd& approx,
                       const Eigen::MatrixXd& gram);

// Coarse energy Gram matrix a(P., P.) of the coarse hat basis under a fine
// field (the norm used by consistency_eta).
Eigen::MatrixXd coarse_energy_gram(const MeshHierarchy& mesh,
                                   const CoefficientField& field);

// A-posteriori indicator E_T of one element: how well the weighted
// single-defect data reproduces the true coefficient on the patch of T,
// measured as the largest generalized eigenvalue of the mismatch form
// against the element energy on the non-constant coarse functions of T.
// Throws DegenerateElement when the element energy loses rank.
double error_indicator(const OfflineDatabase& db, const MeshHierarchy& mesh,
                       const DefectRealization& realization,
                       MuStrategy strategy, int element,
                       double s = std::numeric_limits<double>::quiet_NaN());

}  // namespace olod
