#include "mbisac/config.hpp"

#include <cmath>
#include <string>

#include "mbisac/errors.hpp"
#include "mbisac/format.hpp"

namespace mbisac {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument("invalid scenario: " + what);
}

}  // namespace

double ScenarioConfig::noiseStd() const { return std::sqrt(noisePower) * noiseScale; }

void ScenarioConfig::validate() const {
  require(antennaCount >= 2, "antenna count must be >= 2");
  require(subcarrierCount >= 2, "subcarrier count must be >= 2");
  require(subcarrierSpacing > 0.0 && std::isfinite(subcarrierSpacing), "subcarrier spacing must be positive");
  require(carrierFreq > 0.0 && std::isfinite(carrierFreq), "carrier frequency must be positive");
  require(constellationSize >= 2, "constellation size must be >= 2");
  require(tapCount >= 1 && tapCount <= subcarrierCount, "tap count must be in [1, S]");
  require(std::isfinite(sensingSnrDb) && std::isfinite(commSnrDb), "SNRs must be finite");
  require(noisePower > 0.0 && std::isfinite(noisePower), "noise power must be positive");
  require(noiseScale >= 0.0 && std::isfinite(noiseScale), "noise scale must be non-negative");
  require(angleGridSize >= antennaCount, "angle grid size must be >= antenna count");
  require(delayGridSize >= 2, "delay grid size must be >= 2");
  const double half = kPi / 2.0;
  require(targetAnglePrior.lo < targetAnglePrior.hi, "target angle prior must be non-empty");
  require(targetAnglePrior.lo >= -half && targetAnglePrior.hi <= half, "target angle prior outside [-pi/2, pi/2]");
  require(ueAnglePrior.lo < ueAnglePrior.hi, "UE angle prior must be non-empty");
  require(ueAnglePrior.lo >= -half && ueAnglePrior.hi <= half, "UE angle prior outside [-pi/2, pi/2]");
  require(targetRangePrior.lo >= 0.0 && targetRangePrior.lo < targetRangePrior.hi, "range prior must satisfy 0 <= Rmin < Rmax");
  require(impairmentStd >= 0.0 && std::isfinite(impairmentStd), "impairment std must be non-negative");
}

std::string ScenarioConfig::canonicalText() const {
  std::string out;
  const auto line = [&out](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  line("antenna_count", std::to_string(antennaCount));
  line("subcarrier_count", std::to_string(subcarrierCount));
  line("subcarrier_spacing", formatDouble(subcarrierSpacing));
  line("carrier_freq", formatDouble(carrierFreq));
  line("constellation_size", std::to_string(constellationSize));
  line("tap_count", std::to_string(tapCount));
  line("sensing_snr_db", formatDouble(sensingSnrDb));
  line("comm_snr_db", formatDouble(commSnrDb));
  line("noise_power", formatDouble(noisePower));
  line("noise_scale", formatDouble(noiseScale));
  line("target_angle_lo", formatDouble(targetAnglePrior.lo));
  line("target_angle_hi", formatDouble(targetAnglePrior.hi));
  line("target_range_lo", formatDouble(targetRangePrior.lo));
  line("target_range_hi", formatDouble(targetRangePrior.hi));
  line("ue_angle_lo", formatDouble(ueAnglePrior.lo));
  line("ue_angle_hi", formatDouble(ueAnglePrior.hi));
  line("angle_grid_size", std::to_string(angleGridSize));
  line("delay_grid_size", std::to_string(delayGridSize));
  line("impairment_std", formatDouble(impairmentStd));
  line("window_span", windowSpan == WindowSpan::DictionaryGrid ? "grid" : "sector");
  line("master_seed", std::to_string(masterSeed));
  return out;
}

std::uint64_t ScenarioConfig::hash() const { return fnv1a(canonicalText()); }

ScenarioConfig ScenarioConfig::fullScale() {
  ScenarioConfig cfg;
  cfg.impairmentStd = cfg.wavelength() / 25.0;
  return cfg;
}

ScenarioConfig ScenarioConfig::deskScale() {
  ScenarioConfig cfg = fullScale();
  cfg.antennaCount = 16;
  cfg.subcarrierCount = 32;
  cfg.angleGridSize = 256;
  cfg.delayGridSize = 64;
  return cfg;
}

}  // namespace mbisac
