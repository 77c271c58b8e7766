#include "mbisac/harness/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mbisac/errors.hpp"
#include "mbisac/format.hpp"
#include "mbisac/harness/evaluate.hpp"
#include "mbisac/harness/experiment.hpp"
#include "mbisac/mbml/checkpoint.hpp"

#ifndef MBISAC_VERSION
#define MBISAC_VERSION "0.1.0"
#endif

namespace mbisac::harness {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string method;
  std::optional<int> threads;
};

void writeFile(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
  if (!f) throw ConfigError("failed writing " + path.string());
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void writeManifest(const fs::path& dir, const std::string& subcommand, const ExperimentConfig& cfg,
                   const std::vector<std::string>& outputs, double wallSeconds) {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::istringstream in(cfg.canonicalText());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) config[line.substr(0, eq)] = line.substr(eq + 3);
  }
  const nlohmann::ordered_json doc = {
      {"subcommand", subcommand},     {"version", versionString()}, {"config_hash", hex64(cfg.hash())},
      {"threads", cfg.threads},       {"wall_time_s", wallSeconds}, {"outputs", outputs},
      {"config", config},
  };
  writeFile(dir / "manifest.json", doc.dump(2) + "\n");
}

void reportWarnings(const std::vector<MetricsRecord>& records, std::ostream& err) {
  for (const auto& r : records) {
    for (const auto& w : r.warnings) err << "warning [" << r.method << " eta=" << r.eta << " phic=" << r.phic << "]: " << w << '\n';
  }
}

SpacingVector spacingFor(const ExperimentConfig& cfg) {
  if (cfg.method == Method::Mbml) {
    const SpacingVector learned = learnedSpacing(cfg);
    return learned;
  }
  return methodSpacing(cfg.method, cfg.scenario);
}

std::vector<std::string> runSubcommand(const std::string& name, const ExperimentConfig& cfg, const fs::path& dir,
                                       std::ostream& out, std::ostream& err) {
  const auto& ev = cfg.evaluation;
  if (name == "calibrate") {
    const SpacingVector d = spacingFor(cfg);
    const ThresholdCalibration cal = calibrateForSpacing(cfg.scenario, d, ev, cfg.threads);
    writeFile(dir / "calibration.csv", "method,seed,target_pfa,threshold,empirical_pfa,n_calib\n" +
                                           std::string(toString(cfg.method)) + ',' + std::to_string(cfg.seed()) + ',' +
                                           formatDouble(cal.targetPfa) + ',' + formatDouble(cal.threshold) + ',' +
                                           formatDouble(cal.empiricalPfa) + ',' +
                                           std::to_string(cal.calibrationSamples) + '\n');
    out << "threshold " << formatDouble(cal.threshold) << " (re-measured Pfa " << formatDouble(cal.empiricalPfa)
        << ")\n";
    return {"calibration.csv"};
  }
  if (name == "simulate") {
    const SpacingVector d = spacingFor(cfg);
    const double threshold = calibrateForSpacing(cfg.scenario, d, ev, cfg.threads).threshold;
    const auto episodes = runEpisodes(cfg.simulateEpisodes, cfg.scenario, d, ev, threshold, cfg.method == Method::Mbml,
                                      cfg.schedule.estimator, cfg.threads);
    std::string csv = "index,present,angle_deg,range_m,detected,angle_est_deg,range_est_m,peak,symbol_errors\n";
    for (const auto& e : episodes) {
      csv += std::to_string(e.index) + ',' + (e.target.present ? "1" : "0") + ',' +
             formatDouble(radToDeg(e.target.angle)) + ',' + formatDouble(e.target.range) + ',' +
             (e.detected ? "1" : "0") + ',' + formatDouble(e.detected ? radToDeg(e.angleEst) : 0.0) + ',' +
             formatDouble(e.detected ? e.rangeEst : 0.0) + ',' + formatDouble(e.peak) + ',' +
             std::to_string(e.symbolErrors) + '\n';
    }
    writeFile(dir / "episodes.csv", csv);
    out << "simulated " << episodes.size() << " episodes\n";
    return {"episodes.csv"};
  }
  if (name == "train") {
    mbml::TrainingSchedule schedule = cfg.schedule;
    schedule.threads = cfg.threads;
    const mbml::TrainResult result = mbml::train(cfg.scenario, schedule);
    std::string csv = "iteration,mode,loss,learning_rate,batch_used,validation_sl,validation_ul\n";
    for (const auto& e : result.log) {
      csv += std::to_string(e.iteration) + ',' + mbml::toString(e.mode) + ',' + formatDouble(e.loss) + ',' +
             formatDouble(e.learningRate) + ',' + std::to_string(e.batchUsed) + ',' +
             formatDouble(e.validationSupervised) + ',' + formatDouble(e.validationUnsupervised) + '\n';
    }
    writeFile(dir / "train_log.csv", csv);
    mbml::saveCheckpoint((dir / "checkpoint.json").string(), cfg.scenario, result.state);
    const SpacingVector truth = sampleImpairment(cfg.scenario);
    out << "trained " << result.state.iteration << " iterations; steering mismatch "
        << formatDouble(mbml::steeringMismatch(SpacingVector::nominal(cfg.scenario), truth, cfg.scenario)) << " -> "
        << formatDouble(mbml::steeringMismatch(result.state.estimate, truth, cfg.scenario)) << '\n';
    return {"train_log.csv", "checkpoint.json"};
  }
  if (name == "evaluate") {
    const SpacingVector d = spacingFor(cfg);
    const MetricsRecord r = evaluate(cfg.method, cfg.scenario, d, ev, std::nullopt, cfg.schedule.estimator, cfg.threads);
    reportWarnings({r}, err);
    writeFile(dir / "metrics.csv", toCsv({r}));
    out << kMetricsHeader << '\n' << toCsvRow(r) << '\n';
    return {"metrics.csv"};
  }
  if (name == "sweep") {
    std::optional<SpacingVector> learned;
    for (const Method m : cfg.sweep.methods) {
      if (m == Method::Mbml && !learned) learned = learnedSpacing(cfg);
    }
    const auto records = paretoSweep(cfg.scenario, cfg.sweep.methods, learned ? &*learned : nullptr, ev, cfg.sweep,
                                     cfg.schedule.estimator, cfg.threads);
    reportWarnings(records, err);
    const auto fronts = paretoFronts(records);
    writeFile(dir / "metrics.csv", toCsv(records));
    writeFile(dir / "pareto.csv", toCsv(fronts));
    out << records.size() << " grid points, " << fronts.size() << " on the Pareto fronts\n";
    return {"metrics.csv", "pareto.csv"};
  }
  if (name == "ratio-study") {
    const auto results = labeledRatioStudy(cfg);
    std::vector<MetricsRecord> records;
    for (const auto& r : results) records.push_back(r.metrics);
    reportWarnings(records, err);
    writeFile(dir / "metrics.csv", toCsv(records));
    out << "ratio,pmd\n";
    for (const auto& r : results) out << formatDouble(r.ratio) << ',' << formatDouble(r.metrics.pmd) << '\n';
    return {"metrics.csv"};
  }
  if (name == "fd-check") {
    const auto rows = gradientCheckSuite(cfg.seed(), 20, cfg.threads);
    std::string csv = "configuration,loss,tx_path,relative_error\n";
    double worst = 0.0;
    for (const auto& r : rows) {
      csv += std::to_string(r.configuration) + ',' + (r.loss == mbml::LossKind::Supervised ? "SL" : "UL") + ',' +
             (r.txPath ? "1" : "0") + ',' + formatDouble(r.relativeError) + '\n';
      worst = std::max(worst, r.relativeError);
    }
    writeFile(dir / "fd_check.csv", csv);
    out << "max relative error " << formatDouble(worst) << " over " << rows.size() << " gradient checks\n";
    return {"fd_check.csv"};
  }
  throw ConfigError("unknown subcommand '" + name + "'");
}

}  // namespace

const char* versionString() { return MBISAC_VERSION; }

int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sensing/communication link simulator with learned array-spacing calibration"};
  app.set_version_flag("--version", versionString());
  app.require_subcommand(1, 1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "Experiment config file (key = value)");
  app.add_option("--seed", flags.seed, "Master seed, overrides the config");
  app.add_option("--out", flags.out, "Output directory, overrides the config");
  app.add_option("--method", flags.method, "baseline-genie | baseline-nominal | mbml");
  app.add_option("--threads", flags.threads, "Worker threads; affects speed only")->check(CLI::PositiveNumber);
  const std::vector<std::pair<std::string, std::string>> subcommands = {
      {"calibrate", "Calibrate the detection threshold for a method"},
      {"simulate", "Write per-episode detection and decoding outcomes"},
      {"train", "Train the spacing estimate and write a checkpoint"},
      {"evaluate", "Pmd, Pfa, RMSE and SER for one method"},
      {"sweep", "Trade-off sweep over (eta, phase) with Pareto fronts"},
      {"ratio-study", "Pmd against the labeled-data ratio"},
      {"fd-check", "Analytic gradients against finite differences"},
  };
  for (const auto& [name, help] : subcommands) app.add_subcommand(name, help);

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << versionString() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitConfigError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const auto start = std::chrono::steady_clock::now();
  try {
    ExperimentConfig cfg = flags.config.empty() ? ExperimentConfig::deskDefaults() : loadExperimentConfig(flags.config);
    if (flags.seed) cfg.scenario.masterSeed = *flags.seed;
    if (!flags.method.empty()) cfg.method = parseMethod(flags.method);
    if (flags.threads) cfg.threads = *flags.threads;
    if (!flags.out.empty()) cfg.outputDir = flags.out;
    cfg.validate();

    const fs::path dir(cfg.outputDir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());

    const auto outputs = runSubcommand(name, cfg, dir, out, err);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    writeManifest(dir, name, cfg, outputs, wall);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const CalibrationUnderpowered& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  } catch (const SingularSystem& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  } catch (const DegenerateCombination& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace mbisac::harness
