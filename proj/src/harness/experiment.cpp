#include "mbisac/harness/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "mbisac/errors.hpp"
#include "mbisac/format.hpp"

namespace mbisac::harness {

namespace {

constexpr double kDeskSupervisedLr = 3e-6;
constexpr double kDeskUnsupervisedLr = 5e-6;
constexpr std::int64_t kDeskUnsupervisedDropAt = 1200;
constexpr double kDeskUnsupervisedDroppedLr = 5e-7;
constexpr double kDeskTemperature = 10.0;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> splitList(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double toDouble(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

std::int64_t toInt(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t toUnsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool toBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

Interval toDegreeInterval(const std::string& key, const std::string& v) {
  const auto parts = splitList(v);
  if (parts.size() != 2) throw ConfigError("key '" + key + "': expected 'lo, hi' in degrees");
  return {degToRad(toDouble(key, parts[0])), degToRad(toDouble(key, parts[1]))};
}

Interval toInterval(const std::string& key, const std::string& v) {
  const auto parts = splitList(v);
  if (parts.size() != 2) throw ConfigError("key '" + key + "': expected 'lo, hi'");
  return {toDouble(key, parts[0]), toDouble(key, parts[1])};
}

std::string intervalDeg(Interval i) { return formatDouble(radToDeg(i.lo)) + ", " + formatDouble(radToDeg(i.hi)); }

struct LearningRates {
  double supervised = kDeskSupervisedLr;
  std::int64_t supervisedDropAt = -1;
  double supervisedDropped = 0.0;
  double unsupervised = kDeskUnsupervisedLr;
  std::int64_t unsupervisedDropAt = kDeskUnsupervisedDropAt;
  double unsupervisedDropped = kDeskUnsupervisedDroppedLr;
};

void applyRates(mbml::TrainingSchedule& s, const LearningRates& r) {
  for (auto& p : s.phases) {
    if (p.mode == mbml::TrainMode::Supervised) {
      p.learningRate = r.supervised;
      p.lrDropAt = r.supervisedDropAt;
      p.droppedLearningRate = r.supervisedDropped;
    } else {
      p.learningRate = r.unsupervised;
      p.lrDropAt = r.unsupervisedDropAt;
      p.droppedLearningRate = r.unsupervisedDropped;
    }
  }
}

std::vector<mbml::TrainPhase> parsePhases(const std::string& key, const std::string& v) {
  std::vector<mbml::TrainPhase> phases;
  for (const auto& item : splitList(v)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("key '" + key + "': expected MODE:ITERATIONS, got '" + item + "'");
    const std::string mode = trim(item.substr(0, colon));
    mbml::TrainPhase p;
    if (mode == "SL") {
      p.mode = mbml::TrainMode::Supervised;
    } else if (mode == "UL") {
      p.mode = mbml::TrainMode::Unsupervised;
    } else {
      throw ConfigError("key '" + key + "': unknown phase mode '" + mode + "'");
    }
    p.iterations = toInt(key, trim(item.substr(colon + 1)));
    if (p.iterations < 0) throw ConfigError("key '" + key + "': negative iteration count");
    phases.push_back(p);
  }
  if (phases.empty()) throw ConfigError("key '" + key + "': no phases");
  return phases;
}

std::string formatPhases(const std::vector<mbml::TrainPhase>& phases) {
  std::string out;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (i) out += ",";
    out += std::string(mbml::toString(phases[i].mode)) + ":" + std::to_string(phases[i].iterations);
  }
  return out;
}

std::string joinDoubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += formatDouble(v[i]);
  }
  return out;
}

}  // namespace

const char* toString(Method method) {
  switch (method) {
    case Method::BaselineGenie:
      return "baseline-genie";
    case Method::BaselineNominal:
      return "baseline-nominal";
    case Method::Mbml:
      return "mbml";
  }
  return "unknown";
}

Method parseMethod(const std::string& name) {
  if (name == "baseline-genie") return Method::BaselineGenie;
  if (name == "baseline-nominal") return Method::BaselineNominal;
  if (name == "mbml") return Method::Mbml;
  throw ConfigError("unknown method '" + name + "' (expected baseline-genie, baseline-nominal, or mbml)");
}

std::vector<double> SweepSettings::etaGrid() const {
  std::vector<double> out;
  for (int i = 0; i < etaPoints; ++i) out.push_back(etaPoints == 1 ? 1.0 : static_cast<double>(i) / (etaPoints - 1));
  return out;
}

std::vector<double> SweepSettings::phaseGrid() const {
  std::vector<double> out;
  for (int i = 0; i < phasePoints; ++i) out.push_back(2.0 * kPi * i / phasePoints);
  return out;
}

mbml::TrainingSchedule deskSchedule(std::int64_t supervised, std::int64_t unsupervised, bool supervisedFirst) {
  mbml::TrainingSchedule s =
      mbml::TrainingSchedule::sequential(supervised, unsupervised, supervisedFirst, 64, kDeskSupervisedLr,
                                         kDeskUnsupervisedLr);
  applyRates(s, LearningRates{});
  s.estimator.temperature = kDeskTemperature;
  s.validationEpisodes = 1024;
  return s;
}

ExperimentConfig ExperimentConfig::deskDefaults() {
  ExperimentConfig cfg;
  cfg.scenario = ScenarioConfig::deskScale();
  cfg.schedule = deskSchedule(500, 1500);
  return cfg;
}

void ExperimentConfig::validate() const {
  try {
    scenario.validate();
    evaluation.knobs.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (!(evaluation.sector.lo < evaluation.sector.hi)) throw ConfigError("evaluation sector must be non-empty");
  if (evaluation.sector.lo < -kPi / 2.0 || evaluation.sector.hi > kPi / 2.0) {
    throw ConfigError("evaluation sector must lie within [-90, 90] degrees");
  }
  if (!(evaluation.targetPfa > 0.0 && evaluation.targetPfa <= 1.0)) throw ConfigError("target Pfa must lie in (0, 1]");
  if (evaluation.nEval == 0) throw ConfigError("evaluation.n_eval must be positive");
  if (sweep.etaPoints < 1 || sweep.phasePoints < 1) throw ConfigError("sweep grids must be nonempty");
  if (sweep.methods.empty()) throw ConfigError("sweep.methods must be nonempty");
  for (const double r : ratioStudy.ratios) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("ratio_study.ratios entries must lie in [0, 1]");
  }
  if (ratioStudy.totalIterations < 1) throw ConfigError("ratio_study.total_iterations must be positive");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (schedule.batchSize < 1) throw ConfigError("training.batch_size must be positive");
}

std::string ExperimentConfig::canonicalText() const {
  std::string out = scenario.canonicalText();
  const auto line = [&out](const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; };
  line("method", toString(method));
  line("training.schedule", formatPhases(schedule.phases));
  line("training.batch_size", std::to_string(schedule.batchSize));
  for (std::size_t i = 0; i < schedule.phases.size(); ++i) {
    const auto& p = schedule.phases[i];
    const std::string prefix = "training.phase" + std::to_string(i);
    line(prefix + ".lr", formatDouble(p.learningRate));
    line(prefix + ".lr_drop_at", std::to_string(p.lrDropAt));
    line(prefix + ".lr_after_drop", formatDouble(p.droppedLearningRate));
  }
  line("training.labeled_budget", std::to_string(schedule.labeledBudget));
  line("training.sl_tx_path", schedule.supervisedPaths.tx ? "true" : "false");
  line("training.ul_tx_path", schedule.unsupervisedPaths.tx ? "true" : "false");
  line("training.temperature", formatDouble(schedule.estimator.temperature));
  line("training.eta", formatDouble(schedule.knobs.tradeoff));
  line("training.phic", formatDouble(schedule.knobs.combinerPhase));
  line("training.ul_presence_conditioned", schedule.ulPresenceConditioned ? "true" : "false");
  line("training.ul_gate", formatDouble(schedule.ulGateThreshold));
  line("training.validation_every", std::to_string(schedule.validationEvery));
  line("training.validation_episodes", std::to_string(schedule.validationEpisodes));
  line("evaluation.sector_deg", intervalDeg(evaluation.sector));
  line("evaluation.n_eval", std::to_string(evaluation.nEval));
  line("evaluation.target_pfa", formatDouble(evaluation.targetPfa));
  line("evaluation.n_calib", std::to_string(evaluation.nCalib));
  line("evaluation.on_grid_targets", evaluation.onGridTargets ? "true" : "false");
  line("evaluation.eta", formatDouble(evaluation.knobs.tradeoff));
  line("evaluation.phic", formatDouble(evaluation.knobs.combinerPhase));
  line("sweep.eta_points", std::to_string(sweep.etaPoints));
  line("sweep.phic_points", std::to_string(sweep.phasePoints));
  std::string methods;
  for (std::size_t i = 0; i < sweep.methods.size(); ++i) methods += (i ? "," : "") + std::string(toString(sweep.methods[i]));
  line("sweep.methods", methods);
  line("ratio_study.ratios", joinDoubles(ratioStudy.ratios));
  line("ratio_study.total_iterations", std::to_string(ratioStudy.totalIterations));
  line("mbml.checkpoint", checkpointPath);
  line("simulate.episodes", std::to_string(simulateEpisodes));
  return out;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonicalText()); }

std::map<std::string, std::string> parseKeyValues(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string raw;
  int lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineNo) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineNo) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(lineNo) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

ExperimentConfig parseExperimentConfig(const std::string& text) {
  auto kv = parseKeyValues(text);
  ExperimentConfig cfg = ExperimentConfig::deskDefaults();
  if (auto it = kv.find("scenario.preset"); it != kv.end()) {
    if (it->second == "full") {
      cfg.scenario = ScenarioConfig::fullScale();
    } else if (it->second != "desk") {
      throw ConfigError("key 'scenario.preset': expected desk or full");
    }
    kv.erase(it);
  }

  LearningRates rates;
  ScenarioConfig& sc = cfg.scenario;
  mbml::TrainingSchedule& ts = cfg.schedule;
  using Handler = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Handler> handlers = {
      {"scenario.antenna_count", [&](auto& k, auto& v) { sc.antennaCount = static_cast<int>(toInt(k, v)); }},
      {"scenario.subcarrier_count", [&](auto& k, auto& v) { sc.subcarrierCount = static_cast<int>(toInt(k, v)); }},
      {"scenario.subcarrier_spacing", [&](auto& k, auto& v) { sc.subcarrierSpacing = toDouble(k, v); }},
      {"scenario.carrier_freq", [&](auto& k, auto& v) { sc.carrierFreq = toDouble(k, v); }},
      {"scenario.constellation_size", [&](auto& k, auto& v) { sc.constellationSize = static_cast<int>(toInt(k, v)); }},
      {"scenario.tap_count", [&](auto& k, auto& v) { sc.tapCount = static_cast<int>(toInt(k, v)); }},
      {"scenario.sensing_snr_db", [&](auto& k, auto& v) { sc.sensingSnrDb = toDouble(k, v); }},
      {"scenario.comm_snr_db", [&](auto& k, auto& v) { sc.commSnrDb = toDouble(k, v); }},
      {"scenario.noise_power", [&](auto& k, auto& v) { sc.noisePower = toDouble(k, v); }},
      {"scenario.noise_scale", [&](auto& k, auto& v) { sc.noiseScale = toDouble(k, v); }},
      {"scenario.target_angle_deg", [&](auto& k, auto& v) { sc.targetAnglePrior = toDegreeInterval(k, v); }},
      {"scenario.target_range_m", [&](auto& k, auto& v) { sc.targetRangePrior = toInterval(k, v); }},
      {"scenario.ue_angle_deg", [&](auto& k, auto& v) { sc.ueAnglePrior = toDegreeInterval(k, v); }},
      {"scenario.angle_grid_size", [&](auto& k, auto& v) { sc.angleGridSize = static_cast<int>(toInt(k, v)); }},
      {"scenario.delay_grid_size", [&](auto& k, auto& v) { sc.delayGridSize = static_cast<int>(toInt(k, v)); }},
      {"scenario.impairment_std", [&](auto& k, auto& v) { sc.impairmentStd = toDouble(k, v); }},
      {"scenario.window_span",
       [&](auto& k, auto& v) {
         if (v == "grid") {
           sc.windowSpan = WindowSpan::DictionaryGrid;
         } else if (v == "sector") {
           sc.windowSpan = WindowSpan::TargetSector;
         } else {
           throw ConfigError("key '" + k + "': expected grid or sector");
         }
       }},
      {"seed", [&](auto& k, auto& v) { sc.masterSeed = toUnsigned(k, v); }},
      {"method", [&](auto&, auto& v) { cfg.method = parseMethod(v); }},
      {"threads", [&](auto& k, auto& v) { cfg.threads = static_cast<int>(toInt(k, v)); }},
      {"training.schedule", [&](auto& k, auto& v) { ts.phases = parsePhases(k, v); }},
      {"training.batch_size", [&](auto& k, auto& v) { ts.batchSize = static_cast<int>(toInt(k, v)); }},
      {"training.lr_sl", [&](auto& k, auto& v) { rates.supervised = toDouble(k, v); }},
      {"training.lr_sl_drop_at", [&](auto& k, auto& v) { rates.supervisedDropAt = toInt(k, v); }},
      {"training.lr_sl_after_drop", [&](auto& k, auto& v) { rates.supervisedDropped = toDouble(k, v); }},
      {"training.lr_ul", [&](auto& k, auto& v) { rates.unsupervised = toDouble(k, v); }},
      {"training.lr_ul_drop_at", [&](auto& k, auto& v) { rates.unsupervisedDropAt = toInt(k, v); }},
      {"training.lr_ul_after_drop", [&](auto& k, auto& v) { rates.unsupervisedDropped = toDouble(k, v); }},
      {"training.labeled_budget", [&](auto& k, auto& v) { ts.labeledBudget = toInt(k, v); }},
      {"training.sl_tx_path", [&](auto& k, auto& v) { ts.supervisedPaths.tx = toBool(k, v); }},
      {"training.ul_tx_path", [&](auto& k, auto& v) { ts.unsupervisedPaths.tx = toBool(k, v); }},
      {"training.temperature", [&](auto& k, auto& v) { ts.estimator.temperature = toDouble(k, v); }},
      {"training.eta", [&](auto& k, auto& v) { ts.knobs.tradeoff = toDouble(k, v); }},
      {"training.phic", [&](auto& k, auto& v) { ts.knobs.combinerPhase = toDouble(k, v); }},
      {"training.ul_presence_conditioned", [&](auto& k, auto& v) { ts.ulPresenceConditioned = toBool(k, v); }},
      {"training.ul_gate", [&](auto& k, auto& v) { ts.ulGateThreshold = toDouble(k, v); }},
      {"training.validation_every", [&](auto& k, auto& v) { ts.validationEvery = static_cast<int>(toInt(k, v)); }},
      {"training.validation_episodes",
       [&](auto& k, auto& v) { ts.validationEpisodes = static_cast<int>(toInt(k, v)); }},
      {"evaluation.sector_deg", [&](auto& k, auto& v) { cfg.evaluation.sector = toDegreeInterval(k, v); }},
      {"evaluation.n_eval", [&](auto& k, auto& v) { cfg.evaluation.nEval = toUnsigned(k, v); }},
      {"evaluation.target_pfa", [&](auto& k, auto& v) { cfg.evaluation.targetPfa = toDouble(k, v); }},
      {"evaluation.n_calib", [&](auto& k, auto& v) { cfg.evaluation.nCalib = toUnsigned(k, v); }},
      {"evaluation.on_grid_targets", [&](auto& k, auto& v) { cfg.evaluation.onGridTargets = toBool(k, v); }},
      {"evaluation.eta", [&](auto& k, auto& v) { cfg.evaluation.knobs.tradeoff = toDouble(k, v); }},
      {"evaluation.phic", [&](auto& k, auto& v) { cfg.evaluation.knobs.combinerPhase = toDouble(k, v); }},
      {"sweep.eta_points", [&](auto& k, auto& v) { cfg.sweep.etaPoints = static_cast<int>(toInt(k, v)); }},
      {"sweep.phic_points", [&](auto& k, auto& v) { cfg.sweep.phasePoints = static_cast<int>(toInt(k, v)); }},
      {"sweep.methods",
       [&](auto&, auto& v) {
         cfg.sweep.methods.clear();
         for (const auto& m : splitList(v)) cfg.sweep.methods.push_back(parseMethod(m));
       }},
      {"ratio_study.ratios",
       [&](auto& k, auto& v) {
         cfg.ratioStudy.ratios.clear();
         for (const auto& r : splitList(v)) cfg.ratioStudy.ratios.push_back(toDouble(k, r));
       }},
      {"ratio_study.total_iterations", [&](auto& k, auto& v) { cfg.ratioStudy.totalIterations = toInt(k, v); }},
      {"mbml.checkpoint", [&](auto&, auto& v) { cfg.checkpointPath = v; }},
      {"output.dir", [&](auto&, auto& v) { cfg.outputDir = v; }},
      {"simulate.episodes", [&](auto& k, auto& v) { cfg.simulateEpisodes = toUnsigned(k, v); }},
  };
  for (const auto& [key, value] : kv) {
    const auto h = handlers.find(key);
    if (h == handlers.end()) throw ConfigError("unknown config key '" + key + "'");
    h->second(key, value);
  }
  applyRates(ts, rates);
  cfg.validate();
  return cfg;
}

ExperimentConfig loadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseExperimentConfig(buf.str());
}

}  // namespace mbisac::harness
