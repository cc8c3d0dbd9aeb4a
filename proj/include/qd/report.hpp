#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qd/montecarlo.hpp"

namespace qd::report {

inline constexpr const char* kToolVersion = "0.1.0";

// Fixed 12-significant-digit rendering; the single number formatter used by
// every emitter so identical inputs always produce identical bytes.
// Non-finite values render as "null" to stay inside JSON.
std::string format_number(double x);

// Deterministic JSON text: keys sorted, two-space indent, numbers through
// format_number.  This is the only JSON serializer outputs go through.
std::string stable_json(const nlohmann::json& value);

// CSV with a leading comment block: one "# key = value" line per entry of
// the flattened meta object (sorted), then the header row, then the data.
std::string csv_text(const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows,
                     const nlohmann::json& meta);

// Writes content exactly as given; failures carry the path in the message.
void write_file(const std::string& path, const std::string& content);

// Operating-characteristic report for one rule at one threshold.
struct OCReport {
  double threshold = 0.0;
  double start = 0.0;  // head start (SR family) or mean start (SRP)
  double arl = 0.0;
  std::vector<double> add_curve;  // conditional delay at change point nu
  double add_inf = 0.0;           // plateau of the delay profile
  double j_p = 0.0;               // supremum of the delay profile
  double j_st = 0.0;              // stationary (multi-cyclic) delay
  double j_b = 0.0;               // lower bound for the same false-alarm rate
  std::optional<double> pfa_bayes;
  std::optional<double> add_bayes;
  std::optional<double> local_pfa_sup;
  std::optional<int> grid_n;             // absent for closed-form reports
  std::optional<double> richardson_err;  // relative drift under grid doubling
};

nlohmann::json to_json(const OCReport& report);
nlohmann::json to_json(const montecarlo::MCEstimate& estimate);

// Structural JSON-schema checker covering the subset the shipped schemas
// use: type, required, properties, items, enum, minimum/exclusiveMinimum,
// minItems.  Returns one message per violation; empty means valid.
std::vector<std::string> schema_check(const nlohmann::json& value,
                                      const nlohmann::json& schema);

// Schemas for the report payloads (the "report" key of each output file).
const nlohmann::json& oc_report_schema();
const nlohmann::json& mc_estimate_schema();
const nlohmann::json& detection_schema();
const nlohmann::json& constants_schema();
const nlohmann::json& calibration_schema();
const nlohmann::json& validation_schema();

}  // namespace qd::report
