#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mbisac/config.hpp"
#include "mbisac/mbml/train.hpp"
#include "mbisac/precoder.hpp"

namespace mbisac::harness {

enum class Method { BaselineGenie, BaselineNominal, Mbml };

const char* toString(Method method);
/// Accepts baseline-genie, baseline-nominal, mbml. Throws ConfigError otherwise.
Method parseMethod(const std::string& name);

struct EvaluationSettings {
  Interval sector{degToRad(-40.0), degToRad(-20.0)};
  std::size_t nEval = 20000;
  double targetPfa = 1e-2;
  std::size_t nCalib = 20000;
  /// Snap drawn targets to the nearest dictionary cell.
  bool onGridTargets = false;
  IsacKnobs knobs;
};

struct SweepSettings {
  int etaPoints = 8;
  int phasePoints = 8;
  std::vector<Method> methods{Method::BaselineGenie, Method::BaselineNominal, Method::Mbml};

  /// linspace(0, 1, etaPoints).
  std::vector<double> etaGrid() const;
  /// k * 2 pi / phasePoints, k = 0..phasePoints-1.
  std::vector<double> phaseGrid() const;
};

struct RatioStudySettings {
  std::vector<double> ratios{0.01, 0.1, 0.5, 1.0};
  std::int64_t totalIterations = 1000;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  Method method = Method::Mbml;
  mbml::TrainingSchedule schedule;
  EvaluationSettings evaluation;
  SweepSettings sweep;
  RatioStudySettings ratioStudy;
  std::string checkpointPath;
  std::string outputDir = "out";
  std::size_t simulateEpisodes = 100;
  int threads = 1;

  std::uint64_t seed() const { return scenario.masterSeed; }
  /// Throws ConfigError when the combination is unusable.
  void validate() const;
  /// Echo of every setting as `key = value` lines, stable across runs.
  std::string canonicalText() const;
  std::uint64_t hash() const;

  /// Desk-scale defaults: K=16, S=32, the desk training schedule, and evaluation at Pfa 1e-2.
  static ExperimentConfig deskDefaults();
};

/// Flat `key = value` text with dotted keys and `#` comments. Unknown keys,
/// malformed values, and duplicate keys raise ConfigError naming the line.
std::map<std::string, std::string> parseKeyValues(const std::string& text);

/// Applies `scenario.preset` first (desk or full), then every other key on
/// top of the desk defaults.
ExperimentConfig parseExperimentConfig(const std::string& text);
ExperimentConfig loadExperimentConfig(const std::string& path);

/// Desk-scale schedule: `supervised` SL iterations then `unsupervised` UL iterations (or the reverse).
mbml::TrainingSchedule deskSchedule(std::int64_t supervised, std::int64_t unsupervised, bool supervisedFirst = true);

}  // namespace mbisac::harness
