#include "olod/offline.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "olod/util.hpp"

namespace olod {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t database_payload_bytes(int d, int nH, int nEps, int nh, int k) {
  auto powd = [&](std::uint64_t v) { return d == 2 ? v * v : v; };
  const int extent = std::min(2 * k + 1, nH);
  const std::uint64_t slots = powd(static_cast<std::uint64_t>(extent) *
                                   (nEps / nH)) +
                              1;
  const std::uint64_t mc = powd(std::min(2 * k + 2, nH));
  const std::uint64_t mf = powd(std::min(extent * (nh / nH) + 1, nh));
  return slots * (1ull << d) * (mc + mf) * sizeof(double);
}

OfflineDatabase build_offline_database(const MeshHierarchy& mesh,
                                       const PeriodicPattern& pattern, int k,
                                       InterpVariant variant) {
  // Slot translation assumes every patch sees the same background layout,
  // i.e. the pattern repeats across coarse elements.
  if (mesh.epc % pattern.periodCells != 0)
    throw NonNested(
        "pattern period must divide the eps cells per coarse element");

  OfflineDatabase db;
  db.mesh = mesh;
  db.k = k;
  db.variant = variant;
  db.pattern = pattern;

  CorrectorWorkspace ws(mesh, k, variant);
  const PatchRef pr = patch(mesh, 0, k);
  const PatchEpsCells eps = cells_eps_of(mesh, pr);
  const std::vector<int> cells = fine_cells_of(mesh, pr);
  db.localElement = patch_local_element(mesh, pr, 0);
  db.numSlots = static_cast<int>(eps.global.size()) + 1;
  db.mc = ws.coarseCount();
  db.mf = ws.fineCount();
  db.stiffness.resize(static_cast<std::size_t>(db.numSlots));
  db.correctors.resize(static_cast<std::size_t>(db.numSlots));

  // Patch-local eps cell of every patch-local fine cell.
  const int fce = pr.extent * mesh.fpc;  // fine cells per axis
  const int ece = eps.cellsPerAxis;
  std::vector<int> epsOfCell(cells.size());
  std::vector<double> base(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    int cx = static_cast<int>(i) % fce;
    int cy = mesh.d == 2 ? static_cast<int>(i) / fce : 0;
    epsOfCell[i] = cx / mesh.fpe + (mesh.d == 2 ? ece * (cy / mesh.fpe) : 0);
    base[i] = pattern.background_at(mesh, mesh.epsCellOfFineCell(cells[i]));
  }

  auto solve_slot = [&](int slot) {
    std::vector<double> values = base;
    if (slot >= 1) {
      double incl = pattern.inclusion_at(
          mesh, eps.global[static_cast<std::size_t>(slot - 1)]);
      if (incl == 0.0) return -1;  // defect changes nothing: same as slot 0
      for (std::size_t i = 0; i < values.size(); ++i)
        if (epsOfCell[i] == slot - 1) values[i] += incl;
    }
    auto res = ws.solve(values, db.localElement);
    db.stiffness[static_cast<std::size_t>(slot)] = std::move(res.block);
    db.correctors[static_cast<std::size_t>(slot)] = std::move(res.q);
    return slot;
  };

  solve_slot(0);
  for (int slot = 1; slot < db.numSlots; ++slot) {
    if (solve_slot(slot) < 0) {
      db.stiffness[static_cast<std::size_t>(slot)] = db.stiffness[0];
      db.correctors[static_cast<std::size_t>(slot)] = db.correctors[0];
    }
  }
  return db;
}

namespace {

std::string crc_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

void append_block(std::string& buf, const Eigen::MatrixXd& m) {
  // Column-major: per corner column, the patch-node vector.
  buf.append(reinterpret_cast<const char*>(m.data()),
             static_cast<std::size_t>(m.size()) * sizeof(double));
}

}  // namespace

void save_database(const OfflineDatabase& db, const std::string& dir) {
  fs::create_directories(dir);

  std::string payload;
  payload.reserve(database_payload_bytes(db.mesh.d, db.mesh.nH, db.mesh.nEps,
                                         db.mesh.nh, db.k));
  for (const auto& b : db.stiffness) append_block(payload, b);
  for (const auto& b : db.correctors) append_block(payload, b);
  const std::uint64_t crc = crc64(payload.data(), payload.size());

  json manifest = {
      {"version", OfflineDatabase::kFormatVersion},
      {"d", db.mesh.d},
      {"nH", db.mesh.nH},
      {"nEps", db.mesh.nEps},
      {"nh", db.mesh.nh},
      {"k", db.k},
      {"variant", to_string(db.variant)},
      {"model", to_string(db.pattern.model)},
      {"alpha", db.pattern.alpha},
      {"beta", db.pattern.beta},
      {"periodCells", db.pattern.periodCells},
      {"background", db.pattern.background},
      {"inclusion", db.pattern.inclusion},
      {"numSlots", db.numSlots},
      {"mc", db.mc},
      {"mf", db.mf},
      {"localElement", {db.localElement[0], db.localElement[1]}},
      {"payloadBytes", payload.size()},
      {"crc64", crc_hex(crc)},
  };

  std::ofstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw Error("cannot write manifest in " + dir);
  mf << manifest.dump(2) << "\n";
  mf.close();

  std::ofstream bf(fs::path(dir) / "blocks.bin", std::ios::binary);
  if (!bf) throw Error("cannot write blocks in " + dir);
  bf.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  bf.close();
  if (!bf) throw Error("short write of blocks in " + dir);
}

OfflineDatabase load_database(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw Error("cannot read manifest in " + dir);
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed manifest: ") + e.what());
  }

  const int version = manifest.at("version").get<int>();
  if (version != OfflineDatabase::kFormatVersion)
    throw VersionMismatch("database format version " +
                          std::to_string(version) + ", expected " +
                          std::to_string(OfflineDatabase::kFormatVersion));

  OfflineDatabase db;
  db.mesh = build_hierarchy(
      manifest.at("d").get<int>(), manifest.at("nH").get<int>(),
      manifest.at("nEps").get<int>(), manifest.at("nh").get<int>());
  db.k = manifest.at("k").get<int>();
  const std::string variant = manifest.at("variant").get<std::string>();
  db.variant =
      variant == "nodal1d" ? InterpVariant::Nodal1D : InterpVariant::Quasi;
  db.pattern.model = manifest.at("model").get<std::string>() == "erasure"
                         ? DefectModel::Erasure
                         : DefectModel::Checkerboard;
  db.pattern.alpha = manifest.at("alpha").get<double>();
  db.pattern.beta = manifest.at("beta").get<double>();
  db.pattern.periodCells = manifest.at("periodCells").get<int>();
  db.pattern.background =
      manifest.at("background").get<std::vector<double>>();
  db.pattern.inclusion = manifest.at("inclusion").get<std::vector<double>>();
  db.numSlots = manifest.at("numSlots").get<int>();
  db.mc = manifest.at("mc").get<int>();
  db.mf = manifest.at("mf").get<int>();
  db.localElement = {manifest.at("localElement")[0].get<int>(),
                     manifest.at("localElement")[1].get<int>()};

  std::ifstream bf(fs::path(dir) / "blocks.bin",
                   std::ios::binary | std::ios::ate);
  if (!bf) throw Error("cannot read blocks in " + dir);
  const std::streamsize size = bf.tellg();
  bf.seekg(0);
  std::string payload(static_cast<std::size_t>(size), '\0');
  bf.read(payload.data(), size);
  if (!bf) throw Error("short read of blocks in " + dir);

  if (payload.size() != manifest.at("payloadBytes").get<std::uint64_t>() ||
      crc_hex(crc64(payload.data(), payload.size())) !=
          manifest.at("crc64").get<std::string>())
    throw ChecksumMismatch("database payload does not match its checksum");

  const int corners = 1 << db.mesh.d;
  const std::uint64_t expect =
      static_cast<std::uint64_t>(db.numSlots) * corners *
      (static_cast<std::uint64_t>(db.mc) + db.mf) * sizeof(double);
  if (payload.size() != expect)
    throw ChecksumMismatch("database payload has unexpected size");

  const char* p = payload.data();
  auto read_block = [&](int rows) {
    Eigen::MatrixXd m(rows, corners);
    std::memcpy(m.data(), p,
                static_cast<std::size_t>(m.size()) * sizeof(double));
    p += static_cast<std::size_t>(m.size()) * sizeof(double);
    return m;
  };
  db.stiffness.resize(static_cast<std::size_t>(db.numSlots));
  db.correctors.resize(static_cast<std::size_t>(db.numSlots));
  for (auto& b : db.stiffness) b = read_block(db.mc);
  for (auto& b : db.correctors) b = read_block(db.mf);
  return db;
}

void require_compatible(const OfflineDatabase& db, const MeshHierarchy& mesh,
                        int k, InterpVariant variant) {
  if (db.mesh.d != mesh.d || db.mesh.nH != mesh.nH ||
      db.mesh.nEps != mesh.nEps || db.mesh.nh != mesh.nh || db.k != k ||
      db.variant != variant)
    throw ManifestMeshMismatch(
        "database was built for a different mesh hierarchy or k/variant");
}

}  // namespace olod
