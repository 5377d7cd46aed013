// Command-line front end: offline database construction, single solves,
// and the experiment drivers (p sweeps, H convergence, strategy
// comparison, diagnostics).
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "olod/corrector.hpp"
#include "olod/eig.hpp"
#include "olod/harness.hpp"
#include "olod/offline.hpp"
#include "olod/online.hpp"
#include "olod/util.hpp"

namespace {

struct CommonOpts {
  std::string configPath;
  std::string preset;
  std::vector<std::string> sets;
  std::string outDir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.configPath,
                  "JSON config file mirroring the experiment fields");
  cmd->add_option("--preset", opts.preset,
                  "named preset (see `--preset list`)");
  cmd->add_option("--set", opts.sets,
                  "override a config field, e.g. --set samples=10 or "
                  "--set p=0.01,0.05")
      ->take_all();
  cmd->add_option("--out", opts.outDir, "output directory for CSV/SVG");
}

olod::ExperimentConfig load_config(const CommonOpts& opts) {
  if (!opts.preset.empty() && opts.preset == "list") {
    for (const std::string& name : olod::preset_names())
      std::cout << name << '\n';
    std::exit(0);
  }
  if (!opts.configPath.empty() && !opts.preset.empty())
    throw olod::ConfigError("--config and --preset are mutually exclusive");
  olod::ExperimentConfig config;
  if (!opts.preset.empty()) {
    config = olod::preset_config(opts.preset);
  } else if (!opts.configPath.empty()) {
    std::ifstream in(opts.configPath);
    if (!in)
      throw olod::ConfigError("cannot open config '" + opts.configPath + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    config = olod::config_from_json(buffer.str());
  }
  for (const std::string& kv : opts.sets) olod::apply_override(config, kv);
  if (!opts.outDir.empty()) config.outDir = opts.outDir;
  return config;
}

int run_experiment_command(olod::ExperimentKind kind, const CommonOpts& opts) {
  olod::ExperimentConfig config = load_config(opts);
  config.kind = kind;
  std::vector<olod::ExperimentRecord> records =
      olod::run_experiment(config, &std::cerr);

  std::cout << "experiment=" << olod::to_string(kind)
            << " model=" << olod::to_string(config.model) << '\n';
  std::cout << "strategy,H,p,rmse,eoc\n";
  for (const auto& r : records)
    if (r.sample < 0)
      std::cout << r.strategy << ',' << olod::format_double(r.H) << ','
                << olod::format_double(r.p) << ','
                << olod::format_double(r.rmse) << ','
                << (std::isnan(r.eoc) ? std::string()
                                      : olod::format_double(r.eoc))
                << '\n';

  if (!config.outDir.empty()) {
    const auto csv = std::filesystem::path(config.outDir) /
                     (olod::to_string(kind) + ".csv");
    olod::write_csv(records, csv.string());
    olod::write_charts(config, records);
    std::cout << "wrote " << csv.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale eigenvalue solver for randomly perturbed periodic "
               "coefficients (offline-online recombination)"};
  app.require_subcommand(1);

  CommonOpts buildOpts;
  CLI::App* build = app.add_subcommand(
      "offline-build", "precompute the single-defect database");
  add_common(build, buildOpts);

  struct {
    std::string db;
    double p = 0.05;
    std::uint64_t seed = 1;
    std::uint64_t sample = 0;
    std::string strategy = "sum-one";
    double s = std::numeric_limits<double>::quiet_NaN();
    std::string reference = "fine-fem";
    int eigCount = 2;
  } solveOpts;
  CLI::App* solve =
      app.add_subcommand("solve", "solve one random realization");
  solve->add_option("--db", solveOpts.db, "offline database directory")
      ->required();
  solve->add_option("--p", solveOpts.p, "defect probability");
  solve->add_option("--seed", solveOpts.seed, "RNG seed");
  solve->add_option("--sample", solveOpts.sample, "sample index");
  solve->add_option("--strategy", solveOpts.strategy,
                    "sum-one or alternate-s");
  solve->add_option("--s", solveOpts.s,
                    "override the alternate-s weight sum");
  solve->add_option("--reference", solveOpts.reference,
                    "fine-fem, mlod, or none");
  solve->add_option("--eig-count", solveOpts.eigCount,
                    "eigenvalues averaged into the tracked quantity");

  CommonOpts sweepOpts, convOpts, compareOpts, diagOpts;
  CLI::App* sweep = app.add_subcommand(
      "sweep-p", "RMSE vs defect probability at a fixed coarse mesh");
  add_common(sweep, sweepOpts);
  CLI::App* conv = app.add_subcommand(
      "conv-h", "convergence study over a list of coarse meshes");
  add_common(conv, convOpts);
  CLI::App* compare = app.add_subcommand(
      "compare-s", "paired comparison of recombination strategies");
  add_common(compare, compareOpts);

  struct {
    double p = 0.05;
    std::uint64_t sample = 0;
    std::string strategy = "sum-one";
  } diagParams;
  CLI::App* diag = app.add_subcommand(
      "diagnose",
      "corrector decay, consistency error and per-element indicators of "
      "one realization");
  add_common(diag, diagOpts);
  diag->add_option("--p", diagParams.p, "defect probability");
  diag->add_option("--sample", diagParams.sample, "sample index");
  diag->add_option("--strategy", diagParams.strategy,
                   "sum-one or alternate-s");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (build->parsed()) {
      olod::ExperimentConfig config = load_config(buildOpts);
      if (config.outDir.empty())
        throw olod::ConfigError("offline-build needs --out DIR");
      olod::validate(config);
      const olod::MeshHierarchy mesh = olod::build_hierarchy(
          config.d, config.nHs.front(), config.nEps, config.nh);
      olod::WallTimer timer;
      const olod::OfflineDatabase db = olod::build_offline_database(
          mesh, olod::pattern_of(config), config.k, config.variant);
      olod::save_database(db, config.outDir);
      std::cout << "wrote " << config.outDir << " (" << db.numSlots
                << " slots, "
                << olod::database_payload_bytes(config.d, config.nHs.front(),
                                                config.nEps, config.nh,
                                                config.k)
                << " payload bytes, "
                << olod::format_double(timer.elapsed_ms()) << " ms)\n";
      return 0;
    }

    if (solve->parsed()) {
      const olod::OfflineDatabase db = olod::load_database(solveOpts.db);
      const olod::MeshHierarchy& mesh = db.mesh;
      const olod::DefectRealization realization = olod::realize_defects(
          mesh, db.pattern, solveOpts.p, solveOpts.seed, solveOpts.sample);
      olod::EigenOptions eigOpts;
      eigOpts.count = solveOpts.eigCount;

      const olod::MuStrategy strategy =
          solveOpts.strategy == "sum-one" ? olod::MuStrategy::SumOne
          : solveOpts.strategy == "alternate-s"
              ? olod::MuStrategy::AlternateS
              : throw olod::ConfigError("unknown strategy '" +
                                        solveOpts.strategy + "'");

      olod::WallTimer timer;
      const olod::CoarseForm form =
          olod::assemble_olod(db, mesh, realization, strategy, solveOpts.s);
      const olod::SpMat MH =
          olod::assemble_mass(mesh, olod::GridLevel::Coarse);
      const olod::EigenResult res = olod::solve_pg(form.K, MH, eigOpts);
      const double lambdaMethod =
          olod::lowest_nontrivial_average(res, eigOpts.count);
      std::cout << "defects=" << realization.defects.size()
                << " lambda_method=" << olod::format_double(lambdaMethod)
                << " (" << olod::format_double(timer.elapsed_ms()) << " ms)\n";

      if (solveOpts.reference != "none") {
        const olod::CoefficientField field =
            olod::realize_field(mesh, db.pattern, realization);
        double lambdaRef = 0;
        if (solveOpts.reference == "fine-fem") {
          const olod::SpMat Kf = olod::assemble_stiffness(
              mesh, olod::GridLevel::Fine, field.value);
          const olod::SpMat Mf =
              olod::assemble_mass(mesh, olod::GridLevel::Fine);
          lambdaRef = olod::lowest_nontrivial_average(
              olod::solve_symmetric(Kf, Mf, eigOpts), eigOpts.count);
        } else if (solveOpts.reference == "mlod") {
          const olod::CoarseForm ref =
              olod::assemble_pg_mlod(mesh, field, db.k, db.variant);
          lambdaRef = olod::lowest_nontrivial_average(
              olod::solve_pg(ref.K, MH, eigOpts), eigOpts.count);
        } else {
          throw olod::ConfigError("unknown reference '" +
                                  solveOpts.reference + "'");
        }
        std::cout << "lambda_ref=" << olod::format_double(lambdaRef)
                  << " rel_err="
                  << olod::format_double(
                         std::abs(lambdaMethod - lambdaRef) /
                         std::abs(lambdaRef))
                  << '\n';
      }
      return 0;
    }

    if (sweep->parsed())
      return run_experiment_command(olod::ExperimentKind::SweepP, sweepOpts);
    if (conv->parsed())
      return run_experiment_command(olod::ExperimentKind::ConvH, convOpts);
    if (compare->parsed())
      return run_experiment_command(olod::ExperimentKind::CompareS,
                                    compareOpts);

    if (diag->parsed()) {
      olod::ExperimentConfig config = load_config(diagOpts);
      const olod::MuStrategy strategy =
          diagParams.strategy == "sum-one" ? olod::MuStrategy::SumOne
          : diagParams.strategy == "alternate-s"
              ? olod::MuStrategy::AlternateS
              : throw olod::ConfigError("unknown strategy '" +
                                        diagParams.strategy + "'");
      const olod::DiagnoseReport report =
          olod::diagnose(config, diagParams.p, diagParams.sample, strategy);
      std::cout << "defects=" << report.defectCount << '\n';
      std::cout << "corrector decay (k, relative energy tail):\n";
      for (const auto& [k, e] : report.correctorDecay)
        std::cout << "  " << k << ' ' << olod::format_double(e) << '\n';
      std::cout << "consistency_eta=" << olod::format_double(report.eta)
                << '\n';
      std::cout << "max_indicator=" << olod::format_double(report.maxIndicator)
                << '\n';
      return 0;
    }
  } catch (const olod::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const olod::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
