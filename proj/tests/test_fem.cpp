#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "olod/fem.hpp"

using namespace olod;

namespace {

double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("fem") {

TEST_CASE("1d element matrices are the exact hat integrals") {
  const double h = 0.125;
  Eigen::MatrixXd K = element_stiffness(1, h);
  Eigen::MatrixXd M = element_mass(1, h);
  REQUIRE(K.rows() == 2);
  CHECK(K(0, 0) == doctest::Approx(1 / h).epsilon(1e-15));
  CHECK(K(0, 1) == doctest::Approx(-1 / h).epsilon(1e-15));
  CHECK(K(1, 0) == doctest::Approx(-1 / h).epsilon(1e-15));
  CHECK(K(1, 1) == doctest::Approx(1 / h).epsilon(1e-15));
  CHECK(M(0, 0) == doctest::Approx(h / 3).epsilon(1e-15));
  CHECK(M(0, 1) == doctest::Approx(h / 6).epsilon(1e-15));
  CHECK(M(1, 1) == doctest::Approx(h / 3).epsilon(1e-15));
}

TEST_CASE("2d element matrices are the tensor products") {
  const double h = 0.25;
  Eigen::MatrixXd K = element_stiffness(2, h);
  Eigen::MatrixXd M = element_mass(2, h);
  REQUIRE(K.rows() == 4);
  // Corners lexicographic: 0=(0,0), 1=(1,0), 2=(0,1), 3=(1,1).
  // Unit-coefficient stiffness on a square is h-independent:
  // diagonal 2/3, edge neighbors -1/6, diagonal neighbors -1/3.
  for (int i = 0; i < 4; ++i) CHECK(K(i, i) == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(K(0, 1) == doctest::Approx(-1.0 / 6).epsilon(1e-14));
  CHECK(K(0, 2) == doctest::Approx(-1.0 / 6).epsilon(1e-14));
  CHECK(K(0, 3) == doctest::Approx(-1.0 / 3).epsilon(1e-14));
  CHECK(K(1, 2) == doctest::Approx(-1.0 / 3).epsilon(1e-14));
  // Mass: h^2 * (1/9 diagonal, 1/18 edge, 1/36 diagonal corner).
  CHECK(M(0, 0) == doctest::Approx(h * h / 9).epsilon(1e-14));
  CHECK(M(0, 1) == doctest::Approx(h * h / 18).epsilon(1e-14));
  CHECK(M(0, 3) == doctest::Approx(h * h / 36).epsilon(1e-14));
  // Both are symmetric; stiffness rows sum to zero (constants in kernel).
  CHECK(max_abs(K - K.transpose()) == doctest::Approx(0.0));
  CHECK(max_abs(K.rowwise().sum()) < 1e-14);
}

TEST_CASE("assembled fine stiffness is the periodic circulant") {
  MeshHierarchy m = build_hierarchy(1, 2, 4, 4);
  std::vector<double> a = {1.0, 2.0, 3.0, 4.0};  // one value per fine cell
  Eigen::MatrixXd K = Eigen::MatrixXd(assemble_stiffness(m, GridLevel::Fine, a));
  const double inv = 4.0;  // 1/h
  // Node i joins cells i-1 and i.
  CHECK(K(0, 0) == doctest::Approx((4 + 1) * inv).epsilon(1e-14));
  CHECK(K(1, 1) == doctest::Approx((1 + 2) * inv).epsilon(1e-14));
  CHECK(K(0, 1) == doctest::Approx(-1 * inv).epsilon(1e-14));
  CHECK(K(1, 2) == doctest::Approx(-2 * inv).epsilon(1e-14));
  CHECK(K(3, 0) == doctest::Approx(-4 * inv).epsilon(1e-14));
  CHECK(K(0, 2) == doctest::Approx(0.0));
  CHECK(max_abs(K.rowwise().sum()) < 1e-12);
}

TEST_CASE("coarse-level assembly uses per-element values") {
  MeshHierarchy m = build_hierarchy(1, 4, 8, 16);
  std::vector<double> a = {2.0, 2.0, 2.0, 2.0};
  Eigen::MatrixXd K = Eigen::MatrixXd(assemble_stiffness(m, GridLevel::Coarse, a));
  REQUIRE(K.rows() == 4);
  CHECK(K(0, 0) == doctest::Approx(2 * (2 / m.H)).epsilon(1e-14));
  CHECK(K(0, 1) == doctest::Approx(-2 / m.H).epsilon(1e-14));
}

TEST_CASE("mass matrices integrate to the domain volume") {
  for (int d : {1, 2}) {
    MeshHierarchy m = build_hierarchy(d, 4, 8, 16);
    for (GridLevel level : {GridLevel::Coarse, GridLevel::Fine}) {
      SpMat M = assemble_mass(m, level);
      Eigen::VectorXd ones = Eigen::VectorXd::Ones(M.rows());
      CHECK(ones.dot(M * ones) == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("prolongation carries coarse hats to fine nodal values") {
  MeshHierarchy m = build_hierarchy(1, 2, 2, 4);
  Eigen::MatrixXd P = Eigen::MatrixXd(prolongation(m));
  REQUIRE(P.rows() == 4);
  REQUIRE(P.cols() == 2);
  Eigen::MatrixXd expect(4, 2);
  expect << 1.0, 0.0, 0.5, 0.5, 0.0, 1.0, 0.5, 0.5;
  CHECK(max_abs(P - expect) == doctest::Approx(0.0));
}

TEST_CASE("prolongation rows form a partition of unity") {
  for (int d : {1, 2}) {
    MeshHierarchy m = build_hierarchy(d, 4, 8, 16);
    Eigen::MatrixXd P = Eigen::MatrixXd(prolongation(m));
    Eigen::VectorXd rowSums = P.rowwise().sum();
    CHECK(max_abs(rowSums - Eigen::VectorXd::Ones(P.rows())) < 1e-14);
  }
}

TEST_CASE("quasi-interpolation element block, exact values") {
  // d=1, two fine cells per element: projection of the three fine nodal
  // values onto the element's two Q1 coefficients. Computed exactly from
  // M_c^{-1} B with rational entries.
  MeshHierarchy m = build_hierarchy(1, 2, 2, 4);
  Eigen::MatrixXd G = quasi_interp_element_block(m);
  REQUIRE(G.rows() == 2);
  REQUIRE(G.cols() == 3);
  Eigen::MatrixXd expect(2, 3);
  expect << 0.75, 0.5, -0.25, -0.25, 0.5, 0.75;
  CHECK(max_abs(G - expect) < 1e-14);
}

TEST_CASE("quasi-interpolation element block reproduces Q1 data") {
  for (int d : {1, 2}) {
    MeshHierarchy m = build_hierarchy(d, 4, 8, 16);
    Eigen::MatrixXd G = quasi_interp_element_block(m);
    // A constant-1 fine vector projects to all-ones coefficients.
    Eigen::VectorXd c = G * Eigen::VectorXd::Ones(G.cols());
    CHECK(max_abs(c - Eigen::VectorXd::Ones(c.size())) < 1e-13);
  }
}

TEST_CASE("quasi-interpolation matrix, exact values") {
  MeshHierarchy m = build_hierarchy(1, 2, 2, 4);
  Eigen::MatrixXd IH = Eigen::MatrixXd(interpolation(m, InterpVariant::Quasi));
  REQUIRE(IH.rows() == 2);
  REQUIRE(IH.cols() == 4);
  Eigen::MatrixXd expect(2, 4);
  expect << 0.75, 0.25, -0.25, 0.25, -0.25, 0.25, 0.75, 0.25;
  CHECK(max_abs(IH - expect) < 1e-14);
}

TEST_CASE("nodal interpolation samples coarse nodes") {
  MeshHierarchy m = build_hierarchy(1, 2, 2, 4);
  Eigen::MatrixXd IH = Eigen::MatrixXd(interpolation(m, InterpVariant::Nodal1D));
  Eigen::MatrixXd expect(2, 4);
  expect << 1, 0, 0, 0, 0, 0, 1, 0;
  CHECK(max_abs(IH - expect) == doctest::Approx(0.0));
  MeshHierarchy m2 = build_hierarchy(2, 2, 4, 8);
  CHECK_THROWS_AS(interpolation(m2, InterpVariant::Nodal1D), DimensionError);
}

TEST_CASE("interpolation is a left inverse of prolongation") {
  for (int d : {1, 2}) {
    MeshHierarchy m = build_hierarchy(d, 4, 8, 32);
    Eigen::MatrixXd I =
        Eigen::MatrixXd(interpolation(m, InterpVariant::Quasi) * prolongation(m));
    CHECK(max_abs(I - Eigen::MatrixXd::Identity(I.rows(), I.cols())) < 1e-13);
  }
  MeshHierarchy m1 = build_hierarchy(1, 8, 16, 64);
  Eigen::MatrixXd I =
      Eigen::MatrixXd(interpolation(m1, InterpVariant::Nodal1D) * prolongation(m1));
  CHECK(max_abs(I - Eigen::MatrixXd::Identity(8, 8)) < 1e-14);
}

TEST_CASE("energy and L2 norms of a sampled sine, closed form") {
  // For v_i = sin(2 pi i h) on the periodic grid the discrete sums collapse:
  //   v' K v = 2 sin^2(pi h) / h^2,   v' M v = 1/3 + cos(2 pi h)/6.
  MeshHierarchy m = build_hierarchy(1, 8, 16, 64);
  const double h = m.h;
  const int n = m.numFineNodes;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = std::sin(2 * std::numbers::pi * i * h);
  SpMat K = assemble_stiffness(m, GridLevel::Fine, std::vector<double>(n, 1.0));
  SpMat M = assemble_mass(m, GridLevel::Fine);
  const double s = std::sin(std::numbers::pi * h);
  CHECK(energy_norm(K, v) ==
        doctest::Approx(std::sqrt(2.0 * s * s / (h * h))).epsilon(1e-12));
  CHECK(l2_norm(M, v) ==
        doctest::Approx(std::sqrt(1.0 / 3 + std::cos(2 * std::numbers::pi * h) / 6))
            .epsilon(1e-12));
  // Norm of the zero vector, and clamping of round-off.
  CHECK(energy_norm(K, Eigen::VectorXd::Zero(n)) == 0.0);
  CHECK(energy_norm(K, Eigen::VectorXd::Ones(n)) < 1e-6);
}

TEST_CASE("variable-coefficient energies respect the spectral bounds") {
  MeshHierarchy m = build_hierarchy(1, 8, 16, 64);
  const int n = m.numFineNodes;
  std::vector<double> a(n);
  for (int i = 0; i < n; ++i) a[i] = 0.1 + 0.9 * ((i * 7) % 10) / 10.0;
  SpMat Ka = assemble_stiffness(m, GridLevel::Fine, a);
  SpMat K1 = assemble_stiffness(m, GridLevel::Fine, std::vector<double>(n, 1.0));
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = std::sin(2 * std::numbers::pi * i * m.h) + 0.3 * std::cos(6 * std::numbers::pi * i * m.h);
  const double ea = v.dot(Ka * v);
  const double e1 = v.dot(K1 * v);
  CHECK(ea >= 0.1 * e1 - 1e-12);
  CHECK(ea <= 1.0 * e1 + 1e-12);
}

}  // TEST_SUITE
