#pragma once

#include <ctime>
#include <fstream>
#include <string>

#include "json.hpp"
#include "rmkp/estimates.hpp"
#include "rmkp/illposed.hpp"
#include "rmkp/util.hpp"

namespace rmkp {

inline nlohmann::json report_to_json(const EstimateReport& r) {
  nlohmann::json j;
  j["lemma"] = r.lemma;
  j["sup_ratio"] = r.sup_ratio;
  j["argmax_params"] = r.argmax;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["stable"] = r.stable;
  j["sup_ratio_base"] = r.sup_base;
  j["sup_ratio_extended"] = r.sup_extended;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

inline std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// The timestamp lives in a comment line of its own; everything after the
// first newline is a pure function of the report content, so runs with the
// same seed produce byte-identical files apart from that line.
inline void write_report_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "write_report_file: cannot open " + path);
  os << "# generated " << timestamp_utc() << "\n";
  os << j.dump(2) << "\n";
  require(os.good(), "write_report_file: write failed for " + path);
}

inline void write_inflation_csv(const std::string& path,
                                const std::vector<InflationRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "write_inflation_csv: cannot open " + path);
  os << "k,s1,norm_u0,norm_A3,ratio,converged\n";
  char buf[256];
  for (const InflationRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.6g,%.12g,%.12g,%.12g,%d\n", r.k, r.s1, r.norm_u0,
                  r.norm_a3, r.ratio, r.converged ? 1 : 0);
    os << buf;
  }
  require(os.good(), "write_inflation_csv: write failed for " + path);
}

}  // namespace rmkp
