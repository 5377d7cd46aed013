#include "olod/online.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace olod {

std::string to_string(MuStrategy s) {
  return s == MuStrategy::SumOne ? "sum-one" : "alternate-s";
}

namespace {

void check_two_point(double alpha, double beta) {
  if (!(alpha > 0) || !(beta > alpha))
    throw Error("two-point bounds must satisfy 0 < alpha < beta");
}

}  // namespace

double harmonic_limit_bernoulli(double p, double alpha, double beta) {
  check_two_point(alpha, beta);
  if (p < 0 || p > 1) throw Error("probability must be in [0,1]");
  return alpha * beta / (beta + p * (alpha - beta));
}

double arithmetic_limit_bernoulli(double p, double alpha, double beta) {
  check_two_point(alpha, beta);
  if (p < 0 || p > 1) throw Error("probability must be in [0,1]");
  return alpha * (1 - p) + beta * p;
}

double compute_s_general(double L, double M, double alpha, double beta) {
  check_two_point(alpha, beta);
  return (beta * L - alpha * M) / (alpha * (beta - alpha));
}

double compute_s_bernoulli(double p, double alpha, double beta) {
  check_two_point(alpha, beta);
  if (p < 0 || p > 1) throw Error("probability must be in [0,1]");
  return 1 + p * p * (beta - alpha) / (beta + p * (alpha - beta));
}

MuWeights mu_weights(MuStrategy strategy, const OfflineDatabase& db,
                     int defectCount, double p, double s) {
  const int N = db.numSlots - 1;
  MuWeights w;
  if (strategy == MuStrategy::SumOne) {
    w.s = 1;
    w.muNondefect = 0;
    w.muDefect = 1;
    w.mu0 = 1.0 - defectCount;
    return w;
  }
  if (db.pattern.model != DefectModel::Checkerboard)
    throw StrategyModelMismatch(
        "the alternate-s strategy assumes the checkerboard model");
  const double alpha = db.pattern.alpha, beta = db.pattern.beta;
  w.s = std::isnan(s) ? compute_s_bernoulli(p, alpha, beta) : s;
  w.muNondefect = alpha * (1 - w.s) / (beta - alpha);
  w.muDefect = w.muNondefect + 1;
  w.mu0 = w.s - N * w.muNondefect - defectCount;
  return w;
}

namespace {

// Patch-local defect slots (1-based) of an element's patch.
std::vector<int> defect_slots(const MeshHierarchy& mesh, const PatchRef& pr,
                              const DefectRealization& realization) {
  std::vector<int> slots = defects_in_patch(mesh, pr, realization);
  for (int& s : slots) ++s;  // slot 0 is the defect-free configuration
  return slots;
}

void check_db(const OfflineDatabase& db, const MeshHierarchy& mesh) {
  if (db.mesh.d != mesh.d || db.mesh.nH != mesh.nH ||
      db.mesh.nEps != mesh.nEps || db.mesh.nh != mesh.nh)
    throw ManifestMeshMismatch("database mesh differs from the given mesh");
}

// Weighted slot sum: mu0 * X[0] + muNondefect * sum_{i>=1} X[i]
//                    + (muDefect - muNondefect) * sum_{defect slots} X[i].
// The middle term uses a precomputed all-slot sum so the per-element cost
// stays O(1 + #defects).
Eigen::MatrixXd combine(const std::vector<Eigen::MatrixXd>& X,
                        const Eigen::MatrixXd* allSlotSum, const MuWeights& w,
                        const std::vector<int>& slots) {
  Eigen::MatrixXd out = w.mu0 * X[0];
  if (w.muNondefect != 0.0 && allSlotSum) out += w.muNondefect * *allSlotSum;
  for (int s : slots)
    out += (w.muDefect - w.muNondefect) * X[static_cast<std::size_t>(s)];
  return out;
}

Eigen::MatrixXd slot_sum(const std::vector<Eigen::MatrixXd>& X) {
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(X[0].rows(), X[0].cols());
  for (std::size_t i = 1; i < X.size(); ++i) sum += X[i];
  return sum;
}

}  // namespace

CoarseForm assemble_olod(const OfflineDatabase& db, const MeshHierarchy& mesh,
                         const DefectRealization& realization,
                         MuStrategy strategy, double s) {
  check_db(db, mesh);
  const int corners = 1 << mesh.d;
  CoarseForm form;
  form.kind = "olod-" + to_string(strategy);
  form.K = Eigen::MatrixXd::Zero(mesh.numCoarseElements,
                                 mesh.numCoarseElements);

  // The all-slot stiffness sum is realization independent; only needed when
  // defect-free slots carry weight.
  Eigen::MatrixXd allSum;
  bool needSum = false;
  {
    MuWeights probe = mu_weights(strategy, db, 0, realization.p, s);
    needSum = probe.muNondefect != 0.0;
    if (needSum) allSum = slot_sum(db.stiffness);
  }

  for (int e = 0; e < mesh.numCoarseElements; ++e) {
    PatchRef pr = patch(mesh, e, db.k);
    std::vector<int> slots = defect_slots(mesh, pr, realization);
    MuWeights w = mu_weights(strategy, db,
                             static_cast<int>(slots.size()),
                             realization.p, s);
    Eigen::MatrixXd block =
        combine(db.stiffness, needSum ? &allSum : nullptr, w, slots);
    PatchCoarseNodes cn = coarse_nodes_of(mesh, pr);
    auto ec = mesh.coarseCoords(e);
    for (int j = 0; j < corners; ++j) {
      int col = mesh.coarseCellNode(ec, j);
      for (int r = 0; r < db.mc; ++r)
        form.K(cn.global[static_cast<std::size_t>(r)], col) += block(r, j);
    }
  }
  return form;
}

double MuDecomposition::weight_sum(int numSlots) const {
  double sum = mu0 + muNondefect * (numSlots - 1);
  for (std::size_t i = 0; i < muValues.size(); ++i)
    sum += muValues[i] - muNondefect;
  return sum;
}

MuDecomposition decompose(const OfflineDatabase& db, const MeshHierarchy& mesh,
                          const DefectRealization& realization,
                          const PatchRef& patch, MuStrategy strategy,
                          double s) {
  check_db(db, mesh);
  MuDecomposition dec;
  dec.strategy = strategy;
  dec.defectSlots = defect_slots(mesh, patch, realization);
  MuWeights w = mu_weights(strategy, db,
                           static_cast<int>(dec.defectSlots.size()),
                           realization.p, s);
  dec.s = w.s;
  dec.mu0 = w.mu0;
  dec.muNondefect = w.muNondefect;
  dec.muValues.assign(dec.defectSlots.size(), w.muDefect);
  return dec;
}

ElementCorrectors recombine_element(const OfflineDatabase& db,
                                    const MeshHierarchy& mesh,
                                    const DefectRealization& realization,
                                    MuStrategy strategy, int element,
                                    double s) {
  check_db(db, mesh);
  PatchRef pr = patch(mesh, element, db.k);
  std::vector<int> slots = defect_slots(mesh, pr, realization);
  MuWeights w = mu_weights(strategy, db, static_cast<int>(slots.size()),
                           realization.p, s);
  const Eigen::MatrixXd *ksum = nullptr, *qsum = nullptr;
  Eigen::MatrixXd ksumStore, qsumStore;
  if (w.muNondefect != 0.0) {
    ksumStore = slot_sum(db.stiffness);
    qsumStore = slot_sum(db.correctors);
    ksum = &ksumStore;
    qsum = &qsumStore;
  }
  ElementCorrectors out;
  out.patch = pr;
  out.q = combine(db.correctors, qsum, w, slots);
  out.block = combine(db.stiffness, ksum, w, slots);
  return out;
}

SpMat assemble_olod_correctors(const OfflineDatabase& db,
                               const MeshHierarchy& mesh,
                               const DefectRealization& realization,
                               MuStrategy strategy, double s) {
  check_db(db, mesh);
  const int corners = 1 << mesh.d;
  Eigen::MatrixXd qsumStore;
  const Eigen::MatrixXd* qsum = nullptr;
  {
    MuWeights probe = mu_weights(strategy, db, 0, realization.p, s);
    if (probe.muNondefect != 0.0) {
      qsumStore = slot_sum(db.correctors);
      qsum = &qsumStore;
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int e = 0; e < mesh.numCoarseElements; ++e) {
    PatchRef pr = patch(mesh, e, db.k);
    std::vector<int> slots = defect_slots(mesh, pr, realization);
    MuWeights w = mu_weights(strategy, db, static_cast<int>(slots.size()),
                             realization.p, s);
    Eigen::MatrixXd q = combine(db.correctors, qsum, w, slots);
    PatchFineNodes fn = fine_nodes_of(mesh, pr);
    auto ec = mesh.coarseCoords(e);
    for (int j = 0; j < corners; ++j) {
      int col = mesh.coarseCellNode(ec, j);
      for (int i = 0; i < db.mf; ++i) {
        double v = q(i, j);
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

Eigen::VectorXd reconstruct_olod(const OfflineDatabase& db,
                                 const MeshHierarchy& mesh,
                                 const DefectRealization& realization,
                                 MuStrategy strategy,
                                 const Eigen::VectorXd& coarse, double s) {
  SpMat Q = assemble_olod_correctors(db, mesh, realization, strategy, s);
  return reconstruct(mesh, Q, coarse);
}

Eigen::MatrixXd coarse_energy_gram(const MeshHierarchy& mesh,
                                   const CoefficientField& field) {
  SpMat K = assemble_stiffness(mesh, GridLevel::Fine, field.value);
  SpMat P = prolongation(mesh);
  SpMat G = P.transpose() * (K * P).eval();
  return Eigen::MatrixXd(G);
}

double consistency_eta(const Eigen::MatrixXd& reference,
                       const Eigen::MatrixXd& approx,
                       const Eigen::MatrixXd& gram) {
  const Eigen::Index n = gram.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (gram + gram.transpose()));
  if (es.info() != Eigen::Success) throw NotSPD("Gram eigensolve failed");
  const Eigen::VectorXd& lam = es.eigenvalues();  // ascending
  const double scale = lam(n - 1);
  if (!(scale > 0)) throw NotSPD("Gram matrix is not positive");
  const double cut = 1e-10 * scale;
  // The energy Gram of a periodic operator annihilates exactly the
  // constants; more lost directions mean the norm is broken.
  Eigen::Index first = 0;
  while (first < n && lam(first) <= cut) ++first;
  if (first > 1) throw NotSPD("Gram matrix is rank deficient beyond constants");
  const Eigen::Index m = n - first;
  Eigen::MatrixXd W(n, m);
  for (Eigen::Index i = 0; i < m; ++i)
    W.col(i) = es.eigenvectors().col(first + i) / std::sqrt(lam(first + i));
  Eigen::MatrixXd D = W.transpose() * (reference - approx) * W;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(D);
  return svd.singularValues()(0);
}

double error_indicator(const OfflineDatabase& db, const MeshHierarchy& mesh,
                       const DefectRealization& realization,
                       MuStrategy strategy, int element, double s) {
  check_db(db, mesh);
  const int corners = 1 << mesh.d;
  PatchRef pr = patch(mesh, element, db.k);
  std::vector<int> slots = defect_slots(mesh, pr, realization);
  MuWeights w = mu_weights(strategy, db, static_cast<int>(slots.size()),
                           realization.p, s);
  std::vector<bool> isDefectSlot(static_cast<std::size_t>(db.numSlots), false);
  for (int sl : slots) isDefectSlot[static_cast<std::size_t>(sl)] = true;

  const Eigen::MatrixXd* qsum = nullptr;
  Eigen::MatrixXd qsumStore;
  if (w.muNondefect != 0.0) {
    qsumStore = slot_sum(db.correctors);
    qsum = &qsumStore;
  }
  Eigen::MatrixXd qbar = combine(db.correctors, qsum, w, slots);

  const std::vector<int> cells = fine_cells_of(mesh, pr);
  const Eigen::MatrixXd elemK = element_stiffness(mesh.d, mesh.h);
  const int fce = pr.extent * mesh.fpc;
  const int ece = pr.extent * mesh.epc;
  const int nn = pr.fullDomain ? mesh.nh : fce + 1;
  auto localNode = [&](int x, int y) {
    if (pr.fullDomain) {
      x = MeshHierarchy::wrap(x, nn);
      y = MeshHierarchy::wrap(y, nn);
    }
    return x + (mesh.d == 2 ? nn * y : 0);
  };
  auto local = patch_local_element(mesh, pr, element);

  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(corners, corners);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(corners, corners);
  const int nyc = mesh.d == 2 ? fce : 1;
  Eigen::MatrixXd g(corners, corners);  // column j: G_j at the cell corners
  for (int cy = 0; cy < nyc; ++cy) {
    for (int cx = 0; cx < fce; ++cx) {
      const std::size_t ci =
          static_cast<std::size_t>(cx) + static_cast<std::size_t>(fce) * cy;
      const int localEps =
          cx / mesh.fpe + (mesh.d == 2 ? ece * (cy / mesh.fpe) : 0);
      const int slot = 1 + localEps;
      const int globalEps = mesh.epsCellOfFineCell(cells[ci]);
      const double a0 = db.pattern.background_at(mesh, globalEps);
      const double B = db.pattern.inclusion_at(mesh, globalEps);
      const bool defect = isDefectSlot[static_cast<std::size_t>(slot)];
      const double a = a0 + (defect ? B : 0.0);
      const double muCell = defect ? w.muDefect : w.muNondefect;
      const double abar = w.s * a0 + B * muCell;
      const double sqa = std::sqrt(a);
      const bool inT = (cx / mesh.fpc == local[0]) &&
                       (mesh.d != 2 || cy / mesh.fpc == local[1]);

      int node[4];
      double hat[4][4];
      for (int b = 0; b < corners; ++b) {
        node[b] = localNode(cx + (b & 1), cy + ((b >> 1) & 1));
        if (inT) {
          double tx = double(cx - local[0] * mesh.fpc + (b & 1)) / mesh.fpc;
          double ty = mesh.d == 2 ? double(cy - local[1] * mesh.fpc +
                                           ((b >> 1) & 1)) /
                                        mesh.fpc
                                  : 0;
          for (int j = 0; j < corners; ++j) {
            double hv = (j & 1) ? tx : 1.0 - tx;
            if (mesh.d == 2) hv *= ((j >> 1) & 1) ? ty : 1.0 - ty;
            hat[j][b] = hv;
          }
        }
      }
      const Eigen::MatrixXd& qslot =
          db.correctors[static_cast<std::size_t>(slot)];
      for (int j = 0; j < corners; ++j)
        for (int b = 0; b < corners; ++b) {
          double v = inT ? (sqa - abar / sqa) * hat[j][b] : 0.0;
          v -= sqa * qbar(node[b], j);
          v += (a0 * qbar(node[b], j) + B * muCell * qslot(node[b], j)) / sqa;
          g(b, j) = v;
        }
      N += g.transpose() * elemK * g;
      if (inT) {
        Eigen::MatrixXd hatM(corners, corners);
        for (int j = 0; j < corners; ++j)
          for (int b = 0; b < corners; ++b) hatM(b, j) = hat[j][b];
        D += a * hatM.transpose() * elemK * hatM;
      }
    }
  }

  // Restrict to the complement of constants (gradients ignore them).
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(
      Eigen::MatrixXd::Ones(corners, 1));
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd Z = Q.rightCols(corners - 1);
  Eigen::MatrixXd Nz = Z.transpose() * N * Z;
  Eigen::MatrixXd Dz = Z.transpose() * D * Z;
  Eigen::LLT<Eigen::MatrixXd> llt(Dz);
  if (llt.info() != Eigen::Success)
    throw DegenerateElement("element energy matrix lost rank");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Nz, Dz);
  if (ges.info() != Eigen::Success)
    throw DegenerateElement("indicator eigenproblem failed");
  return std::sqrt(std::max(0.0, ges.eigenvalues().maxCoeff()));
}

}  // namespace olod
