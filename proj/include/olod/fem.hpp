#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "olod/coeff.hpp"
#include "olod/mesh.hpp"

namespace olod {

using SpMat = Eigen::SparseMatrix<double>;

enum class GridLevel { Coarse, Fine };

// Variants of the fine-to-coarse interpolation operator that defines the
// corrector kernel space.
enum class InterpVariant {
  Quasi,    // elementwise L2 projection followed by nodal averaging
  Nodal1D,  // point evaluation at coarse nodes (d == 1 only)
};

std::string to_string(InterpVariant v);

// ---------------------------------------------------------------------------
// Exact Q1 element matrices on a cube of edge h (tensor products of the 1-d
// hat integrals; no quadrature error). Corners are ordered lexicographically
// with x fastest. The stiffness matrix is for unit coefficient; multiply by
// the cell value when assembling.
// ---------------------------------------------------------------------------
Eigen::MatrixXd element_stiffness(int d, double h);
Eigen::MatrixXd element_mass(int d, double h);

// Global periodic assembly. For the stiffness, `cellValue` holds one
// coefficient value per cell of the requested level (fine cells for
// GridLevel::Fine, coarse elements for GridLevel::Coarse).
SpMat assemble_stiffness(const MeshHierarchy& mesh, GridLevel level,
                         const std::vector<double>& cellValue);
SpMat assemble_mass(const MeshHierarchy& mesh, GridLevel level);

// Nodal prolongation P: fine-nodal values of the coarse Q1 basis,
// numFineNodes x numCoarseElements. Entries are exact dyadic rationals.
SpMat prolongation(const MeshHierarchy& mesh);

// Interpolation I_H: numCoarseElements x numFineNodes. The Quasi variant is
// a projection (I_H applied to a prolongated coarse function recovers it);
// Nodal1D throws DimensionError for d == 2.
SpMat interpolation(const MeshHierarchy& mesh, InterpVariant variant);

// The elementwise block G of the Quasi variant: maps the (fpc+1)^d fine
// nodal values on one coarse element to the 2^d coefficients of its L2
// projection onto Q1 of that element. Identical for every element of a
// uniform mesh. Fine nodes are in element-local lexicographic order.
Eigen::MatrixXd quasi_interp_element_block(const MeshHierarchy& mesh);

// sqrt(v' K v) and sqrt(v' M v) for a symmetric positive semidefinite form.
// Tiny negative round-off is clamped to zero.
double energy_norm(const SpMat& K, const Eigen::VectorXd& v);
double l2_norm(const SpMat& M, const Eigen::VectorXd& v);

}  // namespace olod
