#include "olod/fem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace olod {

std::string to_string(InterpVariant v) {
  return v == InterpVariant::Quasi ? "quasi" : "nodal1d";
}

namespace {

Eigen::Matrix2d stiffness_1d(double h) {
  Eigen::Matrix2d K;
  K << 1, -1, -1, 1;
  return K / h;
}

Eigen::Matrix2d mass_1d(double h) {
  Eigen::Matrix2d M;
  M << 2, 1, 1, 2;
  return M * (h / 6.0);
}

}  // namespace

Eigen::MatrixXd element_stiffness(int d, double h) {
  Eigen::Matrix2d K1 = stiffness_1d(h), M1 = mass_1d(h);
  if (d == 1) return K1;
  Eigen::MatrixXd K(4, 4);
  for (int a = 0; a < 4; ++a) {
    int xa = a & 1, ya = a >> 1;
    for (int b = 0; b < 4; ++b) {
      int xb = b & 1, yb = b >> 1;
      K(a, b) = K1(xa, xb) * M1(ya, yb) + M1(xa, xb) * K1(ya, yb);
    }
  }
  return K;
}

Eigen::MatrixXd element_mass(int d, double h) {
  Eigen::Matrix2d M1 = mass_1d(h);
  if (d == 1) return M1;
  Eigen::MatrixXd M(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      M(a, b) = M1(a & 1, b & 1) * M1(a >> 1, b >> 1);
  return M;
}

namespace {

SpMat assemble(const MeshHierarchy& mesh, GridLevel level,
               const Eigen::MatrixXd& elem,
               const std::vector<double>* cellValue) {
  const int n = level == GridLevel::Fine ? mesh.nh : mesh.nH;
  const int numCells = mesh.d == 2 ? n * n : n;
  const int numNodes = numCells;  // periodic
  const int corners = 1 << mesh.d;

  if (cellValue && static_cast<int>(cellValue->size()) != numCells)
    throw Error("cell value vector does not match the grid");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(numCells) * corners * corners);
  for (int cell = 0; cell < numCells; ++cell) {
    const double v = cellValue ? (*cellValue)[static_cast<std::size_t>(cell)]
                               : 1.0;
    std::array<int, 2> cc = {cell % n, mesh.d == 2 ? cell / n : 0};
    int node[4];
    for (int c = 0; c < corners; ++c) {
      int x = MeshHierarchy::wrap(cc[0] + (c & 1), n);
      int y = mesh.d == 2 ? MeshHierarchy::wrap(cc[1] + ((c >> 1) & 1), n) : 0;
      node[c] = x + (mesh.d == 2 ? n * y : 0);
    }
    for (int a = 0; a < corners; ++a)
      for (int b = 0; b < corners; ++b)
        trip.emplace_back(node[a], node[b], v * elem(a, b));
  }
  SpMat M(numNodes, numNodes);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

}  // namespace

SpMat assemble_stiffness(const MeshHierarchy& mesh, GridLevel level,
                         const std::vector<double>& cellValue) {
  const double h = level == GridLevel::Fine ? mesh.h : mesh.H;
  return assemble(mesh, level, element_stiffness(mesh.d, h), &cellValue);
}

SpMat assemble_mass(const MeshHierarchy& mesh, GridLevel level) {
  const double h = level == GridLevel::Fine ? mesh.h : mesh.H;
  return assemble(mesh, level, element_mass(mesh.d, h), nullptr);
}

SpMat prolongation(const MeshHierarchy& mesh) {
  const int fpc = mesh.fpc;
  std::vector<Eigen::Triplet<double>> trip;
  const int nyf = mesh.ny(mesh.nh);
  for (int fy = 0; fy < nyf; ++fy) {
    for (int fx = 0; fx < mesh.nh; ++fx) {
      // Per-axis hat weights; exact because fpc is a power of two.
      int ex = fx / fpc, rx = fx % fpc;
      int ey = fy / fpc, ry = fy % fpc;
      double wx[2] = {double(fpc - rx) / fpc, double(rx) / fpc};
      double wy[2] = {double(fpc - ry) / fpc, double(ry) / fpc};
      int fine = mesh.fineIndex({fx, fy});
      for (int dy = 0; dy < (mesh.d == 2 ? 2 : 1); ++dy) {
        double wyv = mesh.d == 2 ? wy[dy] : 1.0;
        if (wyv == 0.0) continue;
        for (int dx = 0; dx < 2; ++dx) {
          if (wx[dx] == 0.0) continue;
          int coarse = mesh.coarseIndex({ex + dx, ey + dy});
          trip.emplace_back(fine, coarse, wx[dx] * wyv);
        }
      }
    }
  }
  SpMat P(mesh.numFineNodes, mesh.numCoarseElements);
  P.setFromTriplets(trip.begin(), trip.end());
  P.makeCompressed();
  return P;
}

Eigen::MatrixXd quasi_interp_element_block(const MeshHierarchy& mesh) {
  const int fpc = mesh.fpc;
  const int nn1 = fpc + 1;
  const int nloc = mesh.d == 2 ? nn1 * nn1 : nn1;
  const int corners = 1 << mesh.d;

  // Local fine mass on one coarse element (no wrap inside an element).
  Eigen::MatrixXd Mh = Eigen::MatrixXd::Zero(nloc, nloc);
  Eigen::MatrixXd me = element_mass(mesh.d, mesh.h);
  const int nyc = mesh.d == 2 ? fpc : 1;
  for (int cy = 0; cy < nyc; ++cy) {
    for (int cx = 0; cx < fpc; ++cx) {
      int node[4];
      for (int c = 0; c < corners; ++c) {
        int nx = cx + (c & 1);
        int ny = mesh.d == 2 ? cy + ((c >> 1) & 1) : 0;
        node[c] = nx + nn1 * ny;
      }
      for (int a = 0; a < corners; ++a)
        for (int b = 0; b < corners; ++b)
          Mh(node[a], node[b]) += me(a, b);
    }
  }

  // Coarse hats evaluated at the local fine nodes.
  Eigen::MatrixXd Phi(nloc, corners);
  const int nyn = mesh.d == 2 ? nn1 : 1;
  for (int j = 0; j < nyn; ++j) {
    for (int i = 0; i < nn1; ++i) {
      double wx[2] = {double(fpc - i) / fpc, double(i) / fpc};
      double wy[2] = {double(fpc - j) / fpc, double(j) / fpc};
      int row = i + nn1 * j;
      for (int c = 0; c < corners; ++c)
        Phi(row, c) = wx[c & 1] * (mesh.d == 2 ? wy[(c >> 1) & 1] : 1.0);
    }
  }

  Eigen::MatrixXd MT = element_mass(mesh.d, mesh.H);
  return MT.llt().solve(Phi.transpose() * Mh);
}

SpMat interpolation(const MeshHierarchy& mesh, InterpVariant variant) {
  std::vector<Eigen::Triplet<double>> trip;
  if (variant == InterpVariant::Nodal1D) {
    if (mesh.d != 1)
      throw DimensionError("nodal interpolation variant is 1-d only");
    for (int z = 0; z < mesh.nH; ++z)
      trip.emplace_back(z, z * mesh.fpc, 1.0);
  } else {
    const Eigen::MatrixXd G = quasi_interp_element_block(mesh);
    const double w = 1.0 / (1 << mesh.d);  // every node touches 2^d elements
    const int nn1 = mesh.fpc + 1;
    const int corners = 1 << mesh.d;
    const int nye = mesh.ny(mesh.nH);
    for (int ey = 0; ey < nye; ++ey) {
      for (int ex = 0; ex < mesh.nH; ++ex) {
        // Global fine nodes of this element, local lexicographic order.
        const int nyn = mesh.d == 2 ? nn1 : 1;
        for (int c = 0; c < corners; ++c) {
          int row = mesh.coarseIndex({ex + (c & 1), ey + ((c >> 1) & 1)});
          for (int j = 0; j < nyn; ++j)
            for (int i = 0; i < nn1; ++i) {
              double g = G(c, i + nn1 * j);
              if (g != 0.0)
                trip.emplace_back(
                    row,
                    mesh.fineIndex({ex * mesh.fpc + i, ey * mesh.fpc + j}),
                    w * g);
            }
        }
      }
    }
  }
  SpMat I(mesh.numCoarseElements, mesh.numFineNodes);
  I.setFromTriplets(trip.begin(), trip.end());
  I.makeCompressed();
  return I;
}

double energy_norm(const SpMat& K, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(K * v)));
}

double l2_norm(const SpMat& M, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(M * v)));
}

}  // namespace olod
