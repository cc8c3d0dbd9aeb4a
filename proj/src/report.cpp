#include "qd/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "qd/errors.hpp"

namespace qd::report {

namespace {

void emit(const nlohmann::json& v, std::string& out, int depth) {
  auto pad = [&](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& [key, val] : v.items()) {
        pad(depth + 1);
        out += nlohmann::json(key).dump();
        out += ": ";
        emit(val, out, depth + 1);
        if (++i < v.size()) out += ',';
        out += '\n';
      }
      pad(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        pad(depth + 1);
        emit(v[i], out, depth + 1);
        if (i + 1 < v.size()) out += ',';
        out += '\n';
      }
      pad(depth);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += format_number(v.get<double>());
      return;
    default:
      out += v.dump();  // strings (escaped), integers, booleans, null
      return;
  }
}

void flatten_meta(const nlohmann::json& v, const std::string& prefix,
                  std::vector<std::string>& lines) {
  if (v.is_object()) {
    for (const auto& [key, val] : v.items())
      flatten_meta(val, prefix.empty() ? key : prefix + "." + key, lines);
    return;
  }
  std::string repr = v.is_number_float() ? format_number(v.get<double>())
                     : v.is_string()     ? v.get<std::string>()
                                         : v.dump();
  lines.push_back("# " + prefix + " = " + repr);
}

nlohmann::json parse_schema(const char* text) {
  return nlohmann::json::parse(text);
}

bool type_matches(const nlohmann::json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "integer")
    return value.is_number_integer() || value.is_number_unsigned();
  if (type == "number") return value.is_number();
  return false;
}

void check(const nlohmann::json& value, const nlohmann::json& schema,
           const std::string& path, std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = t.is_array()
                  ? std::any_of(t.begin(), t.end(),
                                [&](const nlohmann::json& one) {
                                  return type_matches(value,
                                                      one.get<std::string>());
                                })
                  : type_matches(value, t.get<std::string>());
    if (!ok) {
      errors.push_back(path + ": expected type " + t.dump());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = std::any_of(schema["enum"].begin(), schema["enum"].end(),
                          [&](const nlohmann::json& e) { return e == value; });
    if (!ok) errors.push_back(path + ": value not in enum");
  }
  if (value.is_number() && schema.contains("minimum") &&
      value.get<double>() < schema["minimum"].get<double>())
    errors.push_back(path + ": below minimum");
  if (value.is_number() && schema.contains("exclusiveMinimum") &&
      !(value.get<double>() > schema["exclusiveMinimum"].get<double>()))
    errors.push_back(path + ": not above exclusiveMinimum");
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!value.contains(key.get<std::string>()))
          errors.push_back(path + ": missing required key " +
                           key.get<std::string>());
    if (schema.contains("properties"))
      for (const auto& [key, sub] : schema["properties"].items())
        if (value.contains(key)) check(value[key], sub, path + "." + key, errors);
  }
  if (value.is_array()) {
    if (schema.contains("minItems") &&
        value.size() < schema["minItems"].get<std::size_t>())
      errors.push_back(path + ": fewer items than minItems");
    if (schema.contains("items"))
      for (std::size_t i = 0; i < value.size(); ++i)
        check(value[i], schema["items"], path + "[" + std::to_string(i) + "]",
              errors);
  }
}

}  // namespace

std::string format_number(double x) {
  if (!std::isfinite(x)) return "null";
  if (x == 0.0) x = 0.0;  // collapse negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string stable_json(const nlohmann::json& value) {
  std::string out;
  emit(value, out, 0);
  out += '\n';
  return out;
}

std::string csv_text(const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows,
                     const nlohmann::json& meta) {
  std::string out;
  std::vector<std::string> lines;
  flatten_meta(meta, "", lines);
  for (const auto& line : lines) {
    out += line;
    out += '\n';
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out += ',';
    out += columns[c];
  }
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw DomainError("csv: row width does not match the column count");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_number(row[c]);
    }
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DomainError("cannot open for writing: " + path);
  file << content;
  file.flush();
  if (!file.good()) throw DomainError("write failed: " + path);
}

nlohmann::json to_json(const OCReport& r) {
  nlohmann::json j;
  j["threshold"] = r.threshold;
  j["start"] = r.start;
  j["arl"] = r.arl;
  j["add_curve"] = r.add_curve;
  j["add_inf"] = r.add_inf;
  j["j_p"] = r.j_p;
  j["j_st"] = r.j_st;
  j["j_b"] = r.j_b;
  if (r.pfa_bayes) j["pfa_bayes"] = *r.pfa_bayes;
  if (r.add_bayes) j["add_bayes"] = *r.add_bayes;
  if (r.local_pfa_sup) j["local_pfa_sup"] = *r.local_pfa_sup;
  if (r.grid_n) j["grid"] = *r.grid_n;
  if (r.richardson_err) j["richardson_err"] = *r.richardson_err;
  return j;
}

nlohmann::json to_json(const montecarlo::MCEstimate& e) {
  nlohmann::json j;
  j["metric"] = montecarlo::metric_name(e.metric);
  j["value"] = e.value;
  j["std_error"] = e.std_error;
  j["n_reps"] = e.n_reps;
  j["n_kept"] = e.n_kept;
  j["seed"] = e.seed;
  return j;
}

std::vector<std::string> schema_check(const nlohmann::json& value,
                                      const nlohmann::json& schema) {
  std::vector<std::string> errors;
  check(value, schema, "$", errors);
  return errors;
}

const nlohmann::json& oc_report_schema() {
  static const nlohmann::json schema = parse_schema(R"({
    "type": "object",
    "required": ["threshold", "start", "arl", "add_curve", "add_inf",
                 "j_p", "j_st", "j_b"],
    "properties": {
      "threshold": {"type": "number", "exclusiveMinimum": 0},
      "start": {"type": "number", "minimum": 0},
      "arl": {"type": "number", "exclusiveMinimum": 0},
      "add_curve": {"type": "array", "minItems": 1,
                    "items": {"type": "number", "exclusiveMinimum": 0}},
      "add_inf": {"type": "number", "exclusiveMinimum": 0},
      "j_p": {"type": "number", "exclusiveMinimum": 0},
      "j_st": {"type": "number", "exclusiveMinimum": 0},
      "j_b": {"type": "number", "exclusiveMinimum": 0},
      "pfa_bayes": {"type": "number", "minimum": 0},
      "add_bayes": {"type": "number", "minimum": 0},
      "local_pfa_sup": {"type": "number", "minimum": 0},
      "grid": {"type": "integer", "exclusiveMinimum": 0},
      "richardson_err": {"type": "number", "minimum": 0}
    }
  })");
  return schema;
}

const nlohmann::json& mc_estimate_schema() {
  static const nlohmann::json schema = parse_schema(R"({
    "type": "object",
    "required": ["metric", "value", "std_error", "n_reps", "n_kept", "seed"],
    "properties": {
      "metric": {"type": "string",
                 "enum": ["arl", "add", "pfa_bayes", "stadd", "local_pfa"]},
      "value": {"type": "number"},
      "std_error": {"type": "number", "minimum": 0},
      "n_reps": {"type": "integer", "exclusiveMinimum": 0},
      "n_kept": {"type": "integer", "minimum": 0},
      "seed": {"type": "integer", "minimum": 0}
    }
  })");
  return schema;
}

const nlohmann::json& detection_schema() {
  static const nlohmann::json schema = parse_schema(R"({
    "type": "object",
    "required": ["alarm", "stopping_time", "n_consumed", "threshold"],
    "properties": {
      "alarm": {"type": "boolean"},
      "stopping_time": {"type": ["integer", "null"]},
      "n_consumed": {"type": "integer", "minimum": 0},
      "threshold": {"type": "number", "exclusiveMinimum": 0},
      "statistic": {"type": ["number", "null"]}
    }
  })");
  return schema;
}

const nlohmann::json& constants_schema() {
  static const nlohmann::json schema = parse_schema(R"({
    "type": "object",
    "required": ["kl", "overshoot"],
    "properties": {
      "kl": {"type": "object",
             "required": ["value", "source"],
             "properties": {"value": {"type": "number", "exclusiveMinimum": 0},
                            "source": {"type": "string"}}},
      "overshoot": {
        "type": "object",
        "required": ["zeta", "zeta_se", "varkappa", "varkappa_se",
                     "n_paths", "k_max", "source"],
        "properties": {
          "zeta": {"type": "number", "exclusiveMinimum": 0},
          "zeta_se": {"type": "number", "minimum": 0},
          "varkappa": {"type": "number"},
          "varkappa_se": {"type": "number", "minimum": 0},
          "n_paths": {"type": "integer", "exclusiveMinimum": 0},
          "k_max": {"type": "integer", "exclusiveMinimum": 0},
          "source": {"type": "string"}
        }
      },
      "closed_form": {
        "type": "object",
        "required": ["c_inf", "z1_sq", "r_star", "source"],
        "properties": {
          "c_inf": {"type": "number"},
          "z1_sq": {"type": "number", "exclusiveMinimum": 0},
          "r_star": {"type": "number", "minimum": 0},
          "source": {"type": "string"}
        }
      },
      "approx": {
        "type": "object",
        "required": ["threshold", "arl", "add_0", "add_inf"],
        "properties": {
          "threshold": {"type": "number", "exclusiveMinimum": 0},
          "arl": {"type": "number", "exclusiveMinimum": 0},
          "add_0": {"type": ["number", "null"]},
          "add_inf": {"type": ["number", "null"]}
        }
      }
    }
  })");
  return schema;
}

const nlohmann::json& calibration_schema() {
  static const nlohmann::json schema = parse_schema(R"({
    "type": "object",
    "required": ["threshold", "target", "achieved", "start"],
    "properties": {
      "threshold": {"type": "number", "exclusiveMinimum": 0},
      "target": {"type": "number", "exclusiveMinimum": 1},
      "achieved": {"type": "number", "exclusiveMinimum": 0},
      "start": {"type": ["number", "string"]},
      "head_start": {"type": "number", "minimum": 0},
      "coarse_evaluations": {"type": "integer", "minimum": 0},
      "fine_evaluations": {"type": "integer", "minimum": 0}
    }
  })");
  return schema;
}

const nlohmann::json& validation_schema() {
  static const nlohmann::json schema = parse_schema(R"({
    "type": "object",
    "required": ["suite", "pass", "checks"],
    "properties": {
      "suite": {"type": "string"},
      "pass": {"type": "boolean"},
      "checks": {
        "type": "array",
        "minItems": 1,
        "items": {
          "type": "object",
          "required": ["name", "estimate", "std_error", "solver", "pass"],
          "properties": {
            "name": {"type": "string"},
            "estimate": {"type": "number"},
            "std_error": {"type": "number", "minimum": 0},
            "solver": {"type": "number"},
            "pass": {"type": "boolean"}
          }
        }
      }
    }
  })");
  return schema;
}

}  // namespace qd::report
