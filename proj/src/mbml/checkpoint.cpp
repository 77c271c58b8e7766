#include "mbisac/mbml/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mbisac/errors.hpp"

namespace mbisac::mbml {

namespace {

using nlohmann::json;

json vectorToJson(const RVector& v) {
  json arr = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v[k]);
  return arr;
}

RVector vectorFromJson(const json& arr) {
  RVector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t k = 0; k < arr.size(); ++k) v[static_cast<Eigen::Index>(k)] = arr[k].get<double>();
  return v;
}

}  // namespace

std::string checkpointToJson(const Checkpoint& checkpoint) {
  const TrainState& st = checkpoint.state;
  json history = json::array();
  // NaN marks a skipped iteration; JSON has no NaN, so store null.
  for (const double loss : st.lossHistory) {
    if (std::isfinite(loss)) {
      history.push_back(loss);
    } else {
      history.push_back(nullptr);
    }
  }
  const json doc = {
      {"format_version", kCheckpointVersion},
      {"config_hash", checkpoint.configHash},
      {"spacing", vectorToJson(st.estimate.values())},
      {"adam",
       {{"first", vectorToJson(st.adam.first)}, {"second", vectorToJson(st.adam.second)}, {"step", st.adam.step}}},
      {"iteration", st.iteration},
      {"phase_index", st.phaseIndex},
      {"phase_iteration", st.phaseIteration},
      {"labeled_remaining", st.labeledRemaining},
      {"loss_history", history},
  };
  return doc.dump(1);
}

Checkpoint checkpointFromJson(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw ConfigError("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint cp;
    cp.configHash = doc.at("config_hash").get<std::uint64_t>();
    TrainState& st = cp.state;
    st.estimate = SpacingVector(vectorFromJson(doc.at("spacing")));
    const json& adam = doc.at("adam");
    st.adam.first = vectorFromJson(adam.at("first"));
    st.adam.second = vectorFromJson(adam.at("second"));
    st.adam.step = adam.at("step").get<std::int64_t>();
    if (st.adam.first.size() != st.estimate.size() || st.adam.second.size() != st.estimate.size()) {
      throw ConfigError("checkpoint optimizer state does not match the spacing length");
    }
    st.iteration = doc.at("iteration").get<std::int64_t>();
    st.phaseIndex = doc.at("phase_index").get<std::size_t>();
    st.phaseIteration = doc.at("phase_iteration").get<std::int64_t>();
    st.labeledRemaining = doc.at("labeled_remaining").get<std::int64_t>();
    for (const auto& v : doc.at("loss_history")) {
      st.lossHistory.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    }
    return cp;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

void saveCheckpoint(const std::string& path, const ScenarioConfig& cfg, const TrainState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint " + path);
  out << checkpointToJson({cfg.hash(), state}) << '\n';
  if (!out) throw ConfigError("failed writing checkpoint " + path);
}

TrainState loadCheckpoint(const std::string& path, const ScenarioConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  Checkpoint cp = checkpointFromJson(buf.str());
  if (cp.configHash != cfg.hash()) throw ConfigError("checkpoint " + path + " was written for a different scenario");
  if (cp.state.estimate.size() != cfg.antennaCount) throw ConfigError("checkpoint antenna count mismatch");
  return std::move(cp.state);
}

}  // namespace mbisac::mbml
