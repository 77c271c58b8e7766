#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mbisac::harness {

struct MetricsRecord {
  std::string method;
  std::uint64_t seed = 0;
  double eta = 1.0;
  double phic = 0.0;
  double pmd = 0.0;
  double pfa = 0.0;
  double rmse = 0.0;  // meters, over true positives
  double ser = 0.0;
  std::size_t nEval = 0;

  std::size_t presentCount = 0;
  std::size_t missedCount = 0;
  std::size_t absentCount = 0;
  std::size_t falseAlarmCount = 0;
  std::size_t truePositiveCount = 0;
  std::size_t symbolErrors = 0;
  std::size_t symbolCount = 0;
  double threshold = 0.0;
  std::vector<std::string> warnings;

  /// Binomial standard errors of the probability estimates.
  double pmdStdError() const;
  double pfaStdError() const;
  double serStdError() const;
};

/// Equality on the CSV columns.
bool sameCsvFields(const MetricsRecord& a, const MetricsRecord& b);

inline constexpr const char* kMetricsHeader = "method,seed,eta,phic,pmd,pfa,rmse_m,ser,n_eval";

std::string toCsvRow(const MetricsRecord& r);
/// Throws ConfigError on a malformed row.
MetricsRecord fromCsvRow(const std::string& row);
std::string toCsv(const std::vector<MetricsRecord>& records);
/// Parses text with the header line. Throws ConfigError on a header mismatch.
std::vector<MetricsRecord> fromCsv(const std::string& text);

/// a dominates b when it is no worse on both (pmd, ser) and better on one.
bool dominates(const MetricsRecord& a, const MetricsRecord& b);
/// Non-dominated subset in input order; exact ties are kept.
std::vector<MetricsRecord> paretoFilter(const std::vector<MetricsRecord>& records);

}  // namespace mbisac::harness
