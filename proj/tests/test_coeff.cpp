#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "olod/coeff.hpp"

using namespace olod;

TEST_SUITE("coeff") {

TEST_CASE("checkerboard pattern: alpha background, beta defects") {
  MeshHierarchy m = build_hierarchy(1, 4, 8, 16);
  PeriodicPattern pat = PeriodicPattern::checkerboard(0.1, 1.0);
  CHECK(pat.alpha == 0.1);
  CHECK(pat.beta == 1.0);
  CHECK(pat.model == DefectModel::Checkerboard);
  for (int c = 0; c < m.numEpsCells; ++c) {
    CHECK(pat.background_at(m, c) == doctest::Approx(0.1));
    CHECK(pat.inclusion_at(m, c) == doctest::Approx(0.9));
  }
}

TEST_CASE("erasure pattern: inclusion on the low corner of each block") {
  PeriodicPattern pat = PeriodicPattern::erasure(0.1, 1.0, 2);
  CHECK(pat.model == DefectModel::Erasure);
  CHECK(pat.periodCells == 2);

  MeshHierarchy m1 = build_hierarchy(1, 4, 8, 16);
  for (int c = 0; c < 8; ++c) {
    const bool inclusion = (c % 2 == 0);
    CHECK(pat.background_at(m1, c) == doctest::Approx(inclusion ? 1.0 : 0.1));
    // A defect erases the inclusion back to alpha; elsewhere it is a no-op.
    CHECK(pat.inclusion_at(m1, c) == doctest::Approx(inclusion ? -0.9 : 0.0));
  }

  MeshHierarchy m2 = build_hierarchy(2, 2, 4, 8);
  for (int c = 0; c < m2.numEpsCells; ++c) {
    auto xy = m2.epsCoords(c);
    const bool inclusion = (xy[0] % 2 == 0) && (xy[1] % 2 == 0);
    CHECK(pat.background_at(m2, c) == doctest::Approx(inclusion ? 1.0 : 0.1));
  }
}

TEST_CASE("defect realizations are reproducible and respect p") {
  MeshHierarchy m = build_hierarchy(1, 8, 128, 256);
  PeriodicPattern pat = PeriodicPattern::checkerboard(0.1, 1.0);

  DefectRealization a = realize_defects(m, pat, 0.3, 11, 4);
  DefectRealization b = realize_defects(m, pat, 0.3, 11, 4);
  CHECK(a.defects == b.defects);
  CHECK(std::is_sorted(a.defects.begin(), a.defects.end()));

  DefectRealization c = realize_defects(m, pat, 0.3, 11, 5);
  CHECK(a.defects != c.defects);  // different sample, different draw

  CHECK(realize_defects(m, pat, 0.0, 11, 4).defects.empty());
  CHECK(realize_defects(m, pat, 1.0, 11, 4).defects.size() == 128);
}

TEST_CASE("defects at smaller p are a subset of the same sample at larger p") {
  // The Bernoulli draw shares one uniform per cell across p, so sweeps over
  // p reuse nested configurations.
  MeshHierarchy m = build_hierarchy(1, 8, 128, 256);
  PeriodicPattern pat = PeriodicPattern::checkerboard(0.1, 1.0);
  DefectRealization lo = realize_defects(m, pat, 0.05, 3, 7);
  DefectRealization hi = realize_defects(m, pat, 0.20, 3, 7);
  CHECK(std::includes(hi.defects.begin(), hi.defects.end(), lo.defects.begin(),
                      lo.defects.end()));
}

TEST_CASE("defect counts follow the law of large numbers") {
  MeshHierarchy m = build_hierarchy(1, 8, 128, 256);
  PeriodicPattern pat = PeriodicPattern::checkerboard(0.1, 1.0);
  double total = 0;
  const int n = 200;
  for (int s = 0; s < n; ++s)
    total += static_cast<double>(realize_defects(m, pat, 0.3, 1, s).defects.size());
  const double mean = total / n;
  // E = 128*0.3 = 38.4, sigma of the mean ~ 0.37; allow 4 sigma.
  CHECK(mean == doctest::Approx(38.4).epsilon(0.04));
}

TEST_CASE("erasure drops ineffective defect bits") {
  MeshHierarchy m = build_hierarchy(1, 8, 16, 32);
  PeriodicPattern pat = PeriodicPattern::erasure(0.1, 1.0, 2);
  DefectRealization all = realize_defects(m, pat, 1.0, 2, 0);
  // Only the 8 inclusion cells remain; bits on plain cells change nothing.
  CHECK(all.defects.size() == 8);
  for (int c : all.defects) CHECK(c % 2 == 0);
}

TEST_CASE("has_defect is a membership test") {
  DefectRealization r;
  r.defects = {1, 5, 9};
  CHECK(r.has_defect(1));
  CHECK(r.has_defect(5));
  CHECK(r.has_defect(9));
  CHECK_FALSE(r.has_defect(0));
  CHECK_FALSE(r.has_defect(4));
  CHECK_FALSE(r.has_defect(10));
}

TEST_CASE("defects_in_patch uses patch-local lexicographic indices") {
  MeshHierarchy m = build_hierarchy(1, 8, 16, 32);
  PatchRef p = patch(m, 0, 1);  // eps cells {14, 15, 0, 1, 2, 3}
  DefectRealization r;
  r.defects = {1, 8, 14};  // 8 lies outside the patch
  CHECK(defects_in_patch(m, p, r) == std::vector<int>{0, 3});

  DefectRealization none;
  CHECK(defects_in_patch(m, p, none).empty());
}

TEST_CASE("defects_in_patch in 2d wraps both axes") {
  MeshHierarchy m = build_hierarchy(2, 4, 8, 16);
  PatchRef p = patch(m, 0, 1);  // origin eps cell (6,6), 6x6 cells
  DefectRealization r;
  r.defects = {m.epsIndex({6, 6}), m.epsIndex({1, 7}), m.epsIndex({4, 4})};
  std::sort(r.defects.begin(), r.defects.end());
  // local (0,0) -> 0, local (3,1) -> 3 + 6*1 = 9; (4,4) is outside.
  CHECK(defects_in_patch(m, p, r) == std::vector<int>{0, 9});
}

TEST_CASE("sparse rejection sampling keeps patches single-defect") {
  MeshHierarchy m = build_hierarchy(1, 16, 64, 128);
  PeriodicPattern pat = PeriodicPattern::checkerboard(0.1, 1.0);
  const int k = 2;
  for (int s = 0; s < 20; ++s) {
    DefectRealization r = realize_defects_sparse(m, pat, 0.05, 1, s, k);
    for (int e = 0; e < m.numCoarseElements; ++e) {
      PatchRef p = patch(m, e, k);
      CHECK(defects_in_patch(m, p, r).size() <= 1);
    }
  }
  // Deterministic given the same key.
  DefectRealization r1 = realize_defects_sparse(m, pat, 0.05, 1, 3, k);
  DefectRealization r2 = realize_defects_sparse(m, pat, 0.05, 1, 3, k);
  CHECK(r1.defects == r2.defects);
}

TEST_CASE("field realization paints eps cells onto fine cells") {
  MeshHierarchy m = build_hierarchy(1, 4, 8, 16);  // fpe = 2
  PeriodicPattern pat = PeriodicPattern::checkerboard(0.25, 1.5);
  DefectRealization r;
  r.defects = {3};
  CoefficientField f = realize_field(m, pat, r);
  CHECK(f.alpha == 0.25);
  CHECK(f.beta == 1.5);
  REQUIRE(f.value.size() == 16);
  for (int cell = 0; cell < 16; ++cell) {
    const double expect = (cell == 6 || cell == 7) ? 1.5 : 0.25;
    CHECK(f.value[cell] == doctest::Approx(expect));
  }
}

TEST_CASE("defect-free field matches an empty realization") {
  MeshHierarchy m = build_hierarchy(2, 2, 4, 8);
  PeriodicPattern pat = PeriodicPattern::erasure(0.1, 1.0, 2);
  CoefficientField a = defect_free_field(m, pat);
  CoefficientField b = realize_field(m, pat, DefectRealization{});
  CHECK(a.value == b.value);
  // The 2x2-blocked layout: inclusion fine cells carry beta.
  for (int cell = 0; cell < static_cast<int>(a.value.size()); ++cell) {
    auto fc = m.fineCoords(cell);
    auto ec = std::array<int, 2>{fc[0] / m.fpe, fc[1] / m.fpe};
    const bool inclusion = (ec[0] % 2 == 0) && (ec[1] % 2 == 0);
    CHECK(a.value[cell] == doctest::Approx(inclusion ? 1.0 : 0.1));
  }
}

TEST_CASE("erasure defects on plain cells leave the field unchanged") {
  MeshHierarchy m = build_hierarchy(1, 4, 8, 16);
  PeriodicPattern pat = PeriodicPattern::erasure(0.1, 1.0, 2);
  DefectRealization r;
  r.defects = {1, 3};  // both non-inclusion cells
  CHECK(realize_field(m, pat, r).value == defect_free_field(m, pat).value);
}

TEST_CASE("harmonic mean upscaling in 1d") {
  MeshHierarchy m = build_hierarchy(1, 2, 4, 4);  // 2 fine cells per element
  CoefficientField f;
  f.alpha = 1.0;
  f.beta = 4.0;
  f.value = {1.0, 2.0, 4.0, 4.0};
  std::vector<double> hm = harmonic_mean_field_1d(m, f);
  REQUIRE(hm.size() == 2);
  CHECK(hm[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));  // 2/(1 + 1/2)
  CHECK(hm[1] == doctest::Approx(4.0).epsilon(1e-15));

  MeshHierarchy m2 = build_hierarchy(2, 2, 4, 8);
  CoefficientField g = defect_free_field(m2, PeriodicPattern::checkerboard(0.1, 1.0));
  CHECK_THROWS_AS(harmonic_mean_field_1d(m2, g), DimensionError);
}

TEST_CASE("harmonic mean of a constant field is that constant") {
  MeshHierarchy m = build_hierarchy(1, 8, 16, 64);
  CoefficientField f = defect_free_field(m, PeriodicPattern::checkerboard(0.7, 1.0));
  for (double v : harmonic_mean_field_1d(m, f)) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));
}

}  // TEST_SUITE
