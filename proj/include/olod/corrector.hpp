#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "olod/fem.hpp"

namespace olod {

// A coarse bilinear form. Coarse spaces here are small (at most a few
// thousand nodes), and the Petrov-Galerkin form is treated by dense
// eigensolvers downstream, so dense storage is the simple choice.
struct CoarseForm {
  Eigen::MatrixXd K;
  std::string kind;
};

// The 2^d correctors of one element (columns follow the corner order of the
// element) together with the element's contribution to the Petrov-Galerkin
// stiffness: block(r, j) pairs corrector/trial corner j with the coarse hat
// of the r-th patch coarse node.
struct ElementCorrectors {
  PatchRef patch;
  Eigen::MatrixXd q;      // patch fine nodes x 2^d
  Eigen::MatrixXd block;  // patch coarse nodes x 2^d
};

// ---------------------------------------------------------------------------
// Shared machinery for the element corrector problems of one (mesh, k,
// variant) combination. Patch shape, local prolongation, the local
// interpolation constraint and the saddle-point sparsity pattern are
// translation invariant, so they are computed once and reused for every
// element and every coefficient configuration.
//
// The corrector problem for element T and corner hat phi_j is the
// constrained minimization
//
//   find q in W:  a(q, w) = a_T(phi_j, w)  for all w in W,
//   W = { w on the patch : w = 0 on the patch boundary, I_H w = 0 },
//
// solved as a KKT system with the interpolation rows as multipliers. A
// full-domain patch has no boundary; the constraint removes the constant
// kernel there.
// ---------------------------------------------------------------------------
class CorrectorWorkspace {
 public:
  CorrectorWorkspace(const MeshHierarchy& mesh, int k, InterpVariant variant);
  ~CorrectorWorkspace();
  CorrectorWorkspace(const CorrectorWorkspace&) = delete;
  CorrectorWorkspace& operator=(const CorrectorWorkspace&) = delete;

  const MeshHierarchy& mesh() const { return mesh_; }
  int k() const { return k_; }
  InterpVariant variant() const { return variant_; }
  int fineCount() const;    // patch fine nodes (m_f)
  int coarseCount() const;  // patch coarse nodes (m_c)

  struct LocalResult {
    Eigen::MatrixXd q;      // m_f x 2^d
    Eigen::MatrixXd block;  // m_c x 2^d
  };

  // values: coefficient per patch-local fine cell (lexicographic);
  // localElement: patch-local coordinates (in coarse elements) of the
  // element whose correctors are wanted.
  LocalResult solve(const std::vector<double>& values,
                    std::array<int, 2> localElement) const;

 private:
  struct Impl;
  MeshHierarchy mesh_;
  int k_;
  InterpVariant variant_;
  std::unique_ptr<Impl> impl_;
};

// Coefficient values on the fine cells of a patch, local lexicographic
// order (the input format of CorrectorWorkspace::solve).
std::vector<double> restrict_field(const MeshHierarchy& mesh,
                                   const PatchRef& p,
                                   const CoefficientField& field);

// Correctors of one element against a concrete field.
ElementCorrectors solve_element_correctors(const MeshHierarchy& mesh,
                                           const CoefficientField& field,
                                           int element, int k,
                                           InterpVariant variant);

// Direct Petrov-Galerkin multiscale stiffness: trial space spanned by the
// corrected basis (1 - C) of the coarse hats, test space the plain coarse
// hats. Patches with identical coefficient data share one corrector solve
// (a pure memoization; results are bitwise those of the naive loop).
CoarseForm assemble_pg_mlod(const MeshHierarchy& mesh,
                            const CoefficientField& field, int k,
                            InterpVariant variant);

// Reusable form of the direct assembly: keeps the corrector workspace and
// the memoization cache alive across calls, so assembling many defect
// realizations of one pattern pays for each distinct patch configuration
// only once. Results are bitwise identical to the one-shot functions.
class MlodAssembler {
 public:
  MlodAssembler(const MeshHierarchy& mesh, int k, InterpVariant variant);
  ~MlodAssembler();
  MlodAssembler(const MlodAssembler&) = delete;
  MlodAssembler& operator=(const MlodAssembler&) = delete;

  CoarseForm assemble(const CoefficientField& field);
  SpMat correctors(const CoefficientField& field);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Global corrector matrix Q (numFineNodes x numCoarseNodes): column z sums
// the correctors of hat z over the elements adjacent to z. The corrected
// basis is then P - Q; useful for Galerkin-flavored cross-checks and for
// reconstructing fine-scale representatives.
SpMat assemble_global_correctors(const MeshHierarchy& mesh,
                                 const CoefficientField& field, int k,
                                 InterpVariant variant);

// Fully corrected Galerkin forms (both slots of the corrected basis):
// stiffness a((1-C)u, (1-C)v) and mass m((1-C)u, (1-C)v). Reference
// implementations for comparison studies; the production path is the
// Petrov-Galerkin stiffness with the plain coarse mass.
CoarseForm assemble_galerkin_lod(const MeshHierarchy& mesh,
                                 const CoefficientField& field, int k,
                                 InterpVariant variant);
CoarseForm lod_mass(const MeshHierarchy& mesh, const CoefficientField& field,
                    int k, InterpVariant variant);

// Fine-mesh representative of a coarse vector in the corrected basis:
// P v - Q v with Q from assemble_global_correctors.
Eigen::VectorXd reconstruct(const MeshHierarchy& mesh, const SpMat& correctors,
                            const Eigen::VectorXd& coarse);

}  // namespace olod
