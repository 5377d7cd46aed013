#include "doctest.h"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "olod/harness.hpp"

using namespace olod;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() /
             ("olod-harness-" + tag + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig tiny_sweep() {
  ExperimentConfig c;
  c.kind = ExperimentKind::SweepP;
  c.d = 1;
  c.nHs = {8};
  c.nEps = 16;
  c.nh = 32;
  c.k = 1;
  c.alpha = 0.1;
  c.beta = 1.0;
  c.ps = {0.0, 0.1};
  c.samples = 2;
  c.seed = 7;
  c.strategies = {MuStrategy::SumOne, MuStrategy::AlternateS};
  return c;
}

bool same_numbers(const ExperimentRecord& a, const ExperimentRecord& b) {
  auto eq = [](double x, double y) {
    return (std::isnan(x) && std::isnan(y)) || x == y;
  };
  return a.experiment == b.experiment && a.strategy == b.strategy &&
         a.model == b.model && a.d == b.d && eq(a.H, b.H) &&
         eq(a.eps, b.eps) && eq(a.h, b.h) && a.k == b.k && eq(a.p, b.p) &&
         a.sample == b.sample && eq(a.lambdaRef, b.lambdaRef) &&
         eq(a.lambdaMethod, b.lambdaMethod) && eq(a.relErr, b.relErr) &&
         eq(a.rmse, b.rmse) && eq(a.eoc, b.eoc);
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("csv column contract") {
  CHECK(csv_header() ==
        "experiment,strategy,model,d,H,eps,h,k,p,sample,"
        "lambda_ref,lambda_method,rel_err,rmse,eoc,wall_ms");
}

TEST_CASE("csv round-trip keeps values, blanks and aggregate rows") {
  ExperimentRecord row;
  row.experiment = "sweep-p";
  row.strategy = "sum-one";
  row.model = "checkerboard";
  row.d = 2;
  row.H = 0.0625;
  row.eps = 0.03125;
  row.h = 0.0078125;
  row.k = 3;
  row.p = 0.02;
  row.sample = 11;
  row.lambdaRef = 7.8227514364723467;
  row.lambdaMethod = 7.8301234567890123;
  row.relErr = 9.4236e-4;
  row.wallMs = 123.25;

  ExperimentRecord agg = row;
  agg.sample = -1;
  agg.lambdaRef = agg.lambdaMethod = agg.relErr = agg.wallMs =
      ExperimentRecord::nan();
  agg.rmse = 0.0123;
  agg.eoc = 1.9341;

  TempDir tmp("csv");
  const std::string path = (tmp.path / "rows.csv").string();
  write_csv({row, agg}, path);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == csv_header());

  auto back = read_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(same_numbers(back[0], row));
  CHECK(back[0].wallMs == row.wallMs);
  CHECK(same_numbers(back[1], agg));
  CHECK(std::isnan(back[1].lambdaRef));
  CHECK(back[1].sample == -1);
}

TEST_CASE("csv reader rejects foreign files") {
  TempDir tmp("csvbad");
  const std::string path = (tmp.path / "bad.csv").string();
  std::ofstream(path) << "a,b,c\n1,2,3\n";
  CHECK_THROWS_AS(read_csv(path), Error);
  CHECK_THROWS_AS(read_csv((tmp.path / "missing.csv").string()), Error);
}

TEST_CASE("rmse of relative errors") {
  CHECK(rmse_of({0.3, 0.4}) == doctest::Approx(0.35355339059327379).epsilon(1e-15));
  CHECK(rmse_of({0.5}) == 0.5);
  CHECK(rmse_of({0.0, 0.0}) == 0.0);
  CHECK(std::isnan(rmse_of({})));
}

TEST_CASE("presets are valid and carry their advertised shapes") {
  CHECK(preset_names() == std::vector<std::string>{"full-1d", "desk-1d",
                                                   "full-2d", "desk-2d",
                                                   "conv-1d", "conv-2d",
                                                   "compare-1d"});
  for (const std::string& name : preset_names())
    CHECK_NOTHROW(validate(preset_config(name)));

  ExperimentConfig full = preset_config("full-1d");
  CHECK(full.kind == ExperimentKind::SweepP);
  CHECK(full.d == 1);
  CHECK(full.nHs == std::vector<int>{64});
  CHECK(full.nEps == 128);
  CHECK(full.nh == 256);
  CHECK(full.k == 3);
  CHECK(full.alpha == 0.1);
  CHECK(full.beta == 1.0);
  REQUIRE(full.ps.size() == 10);
  CHECK(full.ps.front() == doctest::Approx(0.01));
  CHECK(full.ps.back() == doctest::Approx(0.10));
  CHECK(full.samples == 200);

  ExperimentConfig conv = preset_config("conv-1d");
  CHECK(conv.kind == ExperimentKind::ConvH);
  CHECK(conv.nHs == std::vector<int>{8, 16, 32, 64});
  CHECK(conv.ps == std::vector<double>{0.02});

  ExperimentConfig cmp = preset_config("compare-1d");
  CHECK(cmp.kind == ExperimentKind::CompareS);
  CHECK(cmp.strategies == std::vector<MuStrategy>{MuStrategy::SumOne,
                                                  MuStrategy::AlternateS});
  CHECK(cmp.nHs == std::vector<int>{32});

  ExperimentConfig desk2 = preset_config("desk-2d");
  CHECK(desk2.d == 2);
  CHECK(desk2.nEps == 32);
  CHECK(desk2.nh == 128);

  CHECK_THROWS_AS(preset_config("nope"), ConfigError);
}

TEST_CASE("json configs: parsing and rejection") {
  const std::string text = R"({
    "experiment": "conv-h",
    "d": 1,
    "nH": [8, 16],
    "nEps": 32,
    "nh": 64,
    "k": 2,
    "model": "checkerboard",
    "alpha": 0.1,
    "beta": 1.0,
    "p": 0.05,
    "samples": 3,
    "seed": 9,
    "strategies": ["sum-one", "alternate-s"],
    "variant": "quasi",
    "reference": "fine-fem"
  })";
  ExperimentConfig c = config_from_json(text);
  CHECK(c.kind == ExperimentKind::ConvH);
  CHECK(c.nHs == std::vector<int>{8, 16});
  CHECK(c.nEps == 32);
  CHECK(c.k == 2);
  CHECK(c.ps == std::vector<double>{0.05});
  CHECK(c.samples == 3);
  CHECK(c.seed == 9);
  CHECK(c.strategies.size() == 2);
  CHECK(c.reference == ReferenceMode::FineFEM);

  CHECK_THROWS_AS(config_from_json("[1,2]"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{ nope"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"frobnicate": 1})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"samples": "ten"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"samples": 2.5})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"model": "tartan"})"), ConfigError);
}

TEST_CASE("command-line overrides") {
  ExperimentConfig c = preset_config("desk-1d");
  apply_override(c, "samples=10");
  CHECK(c.samples == 10);
  apply_override(c, "p=0.01,0.05");
  CHECK(c.ps == std::vector<double>{0.01, 0.05});
  apply_override(c, "nH=8,16");
  CHECK(c.nHs == std::vector<int>{8, 16});
  apply_override(c, "strategies=alternate-s");
  CHECK(c.strategies == std::vector<MuStrategy>{MuStrategy::AlternateS});
  apply_override(c, "model=erasure");
  CHECK(c.model == DefectModel::Erasure);
  apply_override(c, "outDir=/tmp/some-dir");
  CHECK(c.outDir == "/tmp/some-dir");

  CHECK_THROWS_AS(apply_override(c, "samples"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "=5"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "frobnicate=1"), ConfigError);
}

TEST_CASE("config validation catches inconsistent setups") {
  auto broken = [](auto mutate) {
    ExperimentConfig c = tiny_sweep();
    mutate(c);
    return c;
  };
  CHECK_NOTHROW(validate(tiny_sweep()));
  CHECK_THROWS_AS(validate(broken([](auto& c) { c.d = 3; })), ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) { c.nHs = {}; })), ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) { c.nHs = {12}; })), ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) { c.alpha = 1.5; })), ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) { c.ps = {1.5}; })), ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) { c.ps = {}; })), ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) { c.samples = 0; })), ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) { c.k = 0; })), ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) { c.eigCount = 0; })), ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) { c.strategies = {}; })), ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) {
                    c.model = DefectModel::Erasure;
                    c.strategies = {MuStrategy::AlternateS};
                  })),
                  ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) {
                    c.d = 2;
                    c.variant = InterpVariant::Nodal1D;
                  })),
                  ConfigError);
  // Sweeps use one mesh; conv-h needs a strictly increasing list and one p.
  CHECK_THROWS_AS(validate(broken([](auto& c) { c.nHs = {8, 16}; })),
                  ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) {
                    c.kind = ExperimentKind::ConvH;
                    c.ps = {0.02};
                  })),
                  ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) {
                    c.kind = ExperimentKind::ConvH;
                    c.nHs = {16, 8};
                    c.ps = {0.02};
                  })),
                  ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) {
                    c.kind = ExperimentKind::ConvH;
                    c.nHs = {8, 16};
                  })),
                  ConfigError);
  CHECK_THROWS_AS(validate(broken([](auto& c) {
                    c.kind = ExperimentKind::CompareS;
                    c.strategies = {MuStrategy::SumOne};
                  })),
                  ConfigError);
}

TEST_CASE("sweep rows: pairing, aggregates and determinism") {
  ExperimentConfig c = tiny_sweep();
  auto rows = run_experiment(c);

  // 1 mesh x 2 p x 2 samples x 2 strategies per-sample rows, then
  // 1 mesh x 2 p x 2 strategies aggregates.
  REQUIRE(rows.size() == 8 + 4);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& r = rows[i];
    CHECK(r.sample >= 0);
    CHECK(r.experiment == "sweep-p");
    CHECK(r.H == 0.125);
    CHECK(r.relErr ==
          doctest::Approx(std::abs(r.lambdaMethod - r.lambdaRef) /
                          std::abs(r.lambdaRef))
              .epsilon(1e-15));
    CHECK(r.relErr < 0.2);  // coarse-vs-fine discretization scale
    CHECK(std::isnan(r.rmse));
  }

  // The reference eigenvalue is computed once per (p, sample) and shared
  // bitwise between the strategies.
  std::map<std::pair<double, int>, double> ref;
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& r = rows[i];
    auto key = std::make_pair(r.p, r.sample);
    if (ref.count(key))
      CHECK(ref[key] == r.lambdaRef);
    else
      ref[key] = r.lambdaRef;
  }

  // Aggregates reproduce the RMSE of their group.
  for (std::size_t i = 8; i < rows.size(); ++i) {
    const auto& a = rows[i];
    CHECK(a.sample == -1);
    CHECK(std::isnan(a.eoc));
    std::vector<double> errs;
    for (std::size_t j = 0; j < 8; ++j)
      if (rows[j].p == a.p && rows[j].strategy == a.strategy)
        errs.push_back(rows[j].relErr);
    REQUIRE(errs.size() == 2);
    CHECK(a.rmse == doctest::Approx(rmse_of(errs)).epsilon(1e-15));
  }

  // At p = 0 the tuned strategy collapses onto sum-one: identical rows.
  for (std::size_t i = 0; i < 8; ++i)
    if (rows[i].p == 0.0 && rows[i].strategy == "alternate-s") {
      for (std::size_t j = 0; j < 8; ++j)
        if (rows[j].p == 0.0 && rows[j].sample == rows[i].sample &&
            rows[j].strategy == "sum-one")
          CHECK(rows[i].lambdaMethod == rows[j].lambdaMethod);
    }

  // Re-running is reproducible in everything but the wall clock.
  auto again = run_experiment(c);
  REQUIRE(again.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    CHECK(same_numbers(rows[i], again[i]));
}

TEST_CASE("conv-h attaches observed orders to the finer aggregates") {
  ExperimentConfig c = tiny_sweep();
  c.kind = ExperimentKind::ConvH;
  c.nHs = {4, 8};
  c.ps = {0.05};
  c.strategies = {MuStrategy::SumOne};
  auto rows = run_experiment(c);
  REQUIRE(rows.size() == 4 + 2);

  const auto& coarse = rows[4];
  const auto& fine = rows[5];
  REQUIRE(coarse.H == 0.25);
  REQUIRE(fine.H == 0.125);
  CHECK(std::isnan(coarse.eoc));
  REQUIRE(coarse.rmse > 0);
  REQUIRE(fine.rmse > 0);
  CHECK(fine.eoc ==
        doctest::Approx(std::log(coarse.rmse / fine.rmse) / std::log(2.0))
            .epsilon(1e-12));
}

TEST_CASE("direct multiscale reference reproduces the recombined problem "
          "without defects") {
  ExperimentConfig c = tiny_sweep();
  c.reference = ReferenceMode::MLOD;
  c.ps = {0.0};
  c.samples = 1;
  c.strategies = {MuStrategy::SumOne};
  auto rows = run_experiment(c);
  REQUIRE(rows.size() == 1 + 1);
  CHECK(rows[0].relErr < 1e-9);
}

TEST_CASE("charts are emitted next to the data") {
  TempDir tmp("charts");
  ExperimentConfig c = tiny_sweep();
  c.ps = {0.05, 0.1};
  c.samples = 1;
  c.strategies = {MuStrategy::SumOne};
  c.outDir = tmp.path.string();
  auto rows = run_experiment(c);
  write_charts(c, rows);
  const fs::path svg = tmp.path / "rmse_vs_p.svg";
  REQUIRE(fs::exists(svg));
  std::ifstream in(svg);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("<svg") != std::string::npos);
}

TEST_CASE("diagnose summarizes one realization") {
  ExperimentConfig c = tiny_sweep();
  c.k = 2;
  c.strategies = {MuStrategy::SumOne};
  DiagnoseReport rep = diagnose(c, 0.3, 0, MuStrategy::SumOne);

  MeshHierarchy m = build_hierarchy(1, 8, 16, 32);
  auto r = realize_defects(m, pattern_of(c), 0.3, c.seed, 0);
  CHECK(rep.defectCount == static_cast<int>(r.defects.size()));

  // Tail energies for k = 1 .. kFull-1, relative to the saturated corrector.
  REQUIRE(rep.correctorDecay.size() == 3);
  CHECK(rep.correctorDecay.front().first == 1);
  for (const auto& [k, tail] : rep.correctorDecay) CHECK(tail >= 0);
  CHECK(rep.correctorDecay.back().second <=
        rep.correctorDecay.front().second + 1e-12);
  CHECK(rep.eta >= 0);
  CHECK(rep.maxIndicator >= 0);
}

}  // TEST_SUITE
