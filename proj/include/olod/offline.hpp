#pragma once

#include <string>
#include <vector>

#include "olod/corrector.hpp"

namespace olod {

// ---------------------------------------------------------------------------
// Offline database for the recombination solver.
//
// All patches of a uniform periodic mesh are translates of the patch of a
// reference element, so it is enough to precompute, in patch-local
// numbering, the Petrov-Galerkin stiffness block and the correctors of
//
//   slot 0:      the defect-free coefficient,
//   slot i >= 1: the single-defect coefficient with the defect in the i-th
//                eps cell of the patch (1-based, patch-local lexicographic
//                order, the ordering of cells_eps_of).
//
// Online, the block of any element under any defect configuration is a
// weighted sum of translated slots.
//
// On disk a database is a directory with
//   manifest.json   parameters, slot counts, payload checksum
//   blocks.bin      little-endian binary64; all stiffness blocks, then all
//                   corrector blocks; each block column-by-column (per slot,
//                   per corner, the patch-node vector)
// ---------------------------------------------------------------------------
struct OfflineDatabase {
  static constexpr int kFormatVersion = 1;

  MeshHierarchy mesh;
  int k = 0;
  InterpVariant variant = InterpVariant::Quasi;
  PeriodicPattern pattern;

  int numSlots = 0;  // 1 + number of eps cells in the patch
  int mc = 0;        // rows of a stiffness block (patch coarse nodes)
  int mf = 0;        // rows of a corrector block (patch fine nodes)

  std::vector<Eigen::MatrixXd> stiffness;   // numSlots blocks, mc x 2^d
  std::vector<Eigen::MatrixXd> correctors;  // numSlots blocks, mf x 2^d

  // Patch-local coordinates of the corrector element inside its own patch
  // (the same for every element by translation invariance).
  std::array<int, 2> localElement = {0, 0};
};

// Number of payload bytes of a database with these parameters.
std::uint64_t database_payload_bytes(int d, int nH, int nEps, int nh, int k);

// Builds all slots. Patch configurations with identical coefficient data
// (e.g. erasure-model slots on cells without an inclusion) share one
// corrector solve.
OfflineDatabase build_offline_database(const MeshHierarchy& mesh,
                                       const PeriodicPattern& pattern, int k,
                                       InterpVariant variant);

// Writes manifest.json + blocks.bin into `dir` (created if absent).
void save_database(const OfflineDatabase& db, const std::string& dir);

// Reads a database back; throws VersionMismatch for a foreign format
// version and ChecksumMismatch when the payload does not match the
// manifest checksum.
OfflineDatabase load_database(const std::string& dir);

// Validates that a loaded database was built for this mesh/k/variant;
// throws ManifestMeshMismatch otherwise.
void require_compatible(const OfflineDatabase& db, const MeshHierarchy& mesh,
                        int k, InterpVariant variant);

}  // namespace olod
