#include "mbisac/harness/metrics.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <utility>

#include "mbisac/errors.hpp"
#include "mbisac/format.hpp"

namespace mbisac::harness {

namespace {

double binomialSe(double p, std::size_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

template <typename T>
T parseField(const std::string& text, const char* name) {
  T out{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError(std::string("bad CSV field ") + name + ": '" + text + "'");
  }
  return out;
}

}  // namespace

double MetricsRecord::pmdStdError() const { return binomialSe(pmd, presentCount); }
double MetricsRecord::pfaStdError() const { return binomialSe(pfa, absentCount); }
double MetricsRecord::serStdError() const { return binomialSe(ser, symbolCount); }

bool sameCsvFields(const MetricsRecord& a, const MetricsRecord& b) {
  // NaN RMSE (no true positives) compares equal to itself here.
  const auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.method == b.method && a.seed == b.seed && same(a.eta, b.eta) && same(a.phic, b.phic) &&
         same(a.pmd, b.pmd) && same(a.pfa, b.pfa) && same(a.rmse, b.rmse) && same(a.ser, b.ser) &&
         a.nEval == b.nEval;
}

std::string toCsvRow(const MetricsRecord& r) {
  if (r.method.find_first_of(",\n\"") != std::string::npos) {
    throw InvalidArgument("method tag may not contain commas, quotes, or newlines");
  }
  std::string out = r.method;
  out += ',' + std::to_string(r.seed);
  for (const double v : {r.eta, r.phic, r.pmd, r.pfa, r.rmse, r.ser}) out += ',' + formatDouble(v);
  out += ',' + std::to_string(r.nEval);
  return out;
}

MetricsRecord fromCsvRow(const std::string& row) {
  std::vector<std::string> f;
  std::string item;
  std::istringstream in(row);
  while (std::getline(in, item, ',')) f.push_back(item);
  if (!row.empty() && row.back() == ',') f.emplace_back();
  if (f.size() != 9) throw ConfigError("CSV row has " + std::to_string(f.size()) + " fields, expected 9");
  MetricsRecord r;
  r.method = f[0];
  r.seed = parseField<std::uint64_t>(f[1], "seed");
  r.eta = parseField<double>(f[2], "eta");
  r.phic = parseField<double>(f[3], "phic");
  r.pmd = parseField<double>(f[4], "pmd");
  r.pfa = parseField<double>(f[5], "pfa");
  r.rmse = parseField<double>(f[6], "rmse_m");
  r.ser = parseField<double>(f[7], "ser");
  r.nEval = parseField<std::size_t>(f[8], "n_eval");
  for (const auto& [value, name] : {std::pair{r.pmd, "pmd"}, {r.pfa, "pfa"}, {r.ser, "ser"}}) {
    if (!(value >= 0.0 && value <= 1.0)) throw ConfigError(std::string("CSV field ") + name + " is not a probability");
  }
  if (r.rmse < 0.0) throw ConfigError("CSV field rmse_m is negative");
  return r;
}

std::string toCsv(const std::vector<MetricsRecord>& records) {
  std::string out = std::string(kMetricsHeader) + '\n';
  for (const auto& r : records) out += toCsvRow(r) + '\n';
  return out;
}

std::vector<MetricsRecord> fromCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw ConfigError("metrics CSV header mismatch");
  std::vector<MetricsRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(fromCsvRow(line));
  }
  return out;
}

bool dominates(const MetricsRecord& a, const MetricsRecord& b) {
  return a.pmd <= b.pmd && a.ser <= b.ser && (a.pmd < b.pmd || a.ser < b.ser);
}

std::vector<MetricsRecord> paretoFilter(const std::vector<MetricsRecord>& records) {
  std::vector<MetricsRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < records.size() && !dominated; ++j) {
      dominated = j != i && dominates(records[j], records[i]);
    }
    if (!dominated) out.push_back(records[i]);
  }
  return out;
}

}  // namespace mbisac::harness
