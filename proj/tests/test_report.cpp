#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qd/errors.hpp"
#include "qd/report.hpp"

using nlohmann::json;
namespace report = qd::report;

TEST_CASE("numbers render with twelve significant digits") {
  CHECK(report::format_number(1.0) == "1");
  CHECK(report::format_number(-2.5) == "-2.5");
  CHECK(report::format_number(0.1) == "0.1");
  CHECK(report::format_number(100.184905772341) == "100.184905772");
  CHECK(report::format_number(1e-300) == "1e-300");
  CHECK(report::format_number(1234567890123456.0) == "1.23456789012e+15");

  SUBCASE("negative zero collapses to zero") {
    CHECK(report::format_number(-0.0) == "0");
  }
  SUBCASE("non-finite values become null") {
    CHECK(report::format_number(std::numeric_limits<double>::infinity()) ==
          "null");
    CHECK(report::format_number(-std::numeric_limits<double>::infinity()) ==
          "null");
    CHECK(report::format_number(std::nan("")) == "null");
  }
}

TEST_CASE("json output is deterministic and key-sorted") {
  json j;
  j["zeta"] = 0.425;
  j["alpha"] = 1;
  j["nested"] = {{"b", true}, {"a", "x\"y"}};
  j["list"] = {1.5, 2, json(nullptr)};

  std::string once = report::stable_json(j);
  std::string twice = report::stable_json(j);
  CHECK(once == twice);
  CHECK(once.back() == '\n');

  // Keys appear in sorted order regardless of insertion order.
  CHECK(once.find("\"alpha\"") < once.find("\"list\""));
  CHECK(once.find("\"list\"") < once.find("\"nested\""));
  CHECK(once.find("\"nested\"") < once.find("\"zeta\""));
  CHECK(once.find("\"a\"") < once.find("\"b\""));

  // Floats go through the shared formatter; strings stay escaped.
  CHECK(once.find("0.425") != std::string::npos);
  CHECK(once.find("x\\\"y") != std::string::npos);
  CHECK(once.find("null") != std::string::npos);

  SUBCASE("empty containers render compactly") {
    CHECK(report::stable_json(json::object()) == "{}\n");
    CHECK(report::stable_json(json::array()) == "[]\n");
  }
  SUBCASE("indentation is two spaces per level") {
    std::string text = report::stable_json(json{{"k", json{{"m", 1}}}});
    CHECK(text == "{\n  \"k\": {\n    \"m\": 1\n  }\n}\n");
  }
}

TEST_CASE("csv output carries a flattened meta comment block") {
  json meta;
  meta["command"] = "oc";
  meta["model"] = {{"family", "beta2beta"}, {"delta", 1.0}};
  std::string text =
      report::csv_text({"nu", "add"}, {{0, 3.42}, {1, 3.48}}, meta);

  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "# command = oc");
  std::getline(lines, line);
  CHECK(line == "# model.delta = 1");
  std::getline(lines, line);
  CHECK(line == "# model.family = beta2beta");
  std::getline(lines, line);
  CHECK(line == "nu,add");
  std::getline(lines, line);
  CHECK(line == "0,3.42");
  std::getline(lines, line);
  CHECK(line == "1,3.48");
  CHECK_FALSE(std::getline(lines, line));

  SUBCASE("row width must match the header") {
    CHECK_THROWS_AS(report::csv_text({"a", "b"}, {{1.0}}, json::object()),
                    qd::DomainError);
  }
}

TEST_CASE("files round-trip exactly") {
  const std::string path = "report_roundtrip.tmp";
  const std::string content = "line one\nline two\n";
  report::write_file(path, content);
  std::ifstream in(path, std::ios::binary);
  std::ostringstream back;
  back << in.rdbuf();
  CHECK(back.str() == content);
  std::remove(path.c_str());

  SUBCASE("unwritable paths are reported with the path") {
    CHECK_THROWS_WITH_AS(
        report::write_file("no_such_dir/x.json", "k"),
        doctest::Contains("no_such_dir/x.json"), qd::DomainError);
  }
}

namespace {

report::OCReport sample_report() {
  report::OCReport r;
  r.threshold = 43.0;
  r.start = 2.0;
  r.arl = 100.18;
  r.add_curve = {3.42, 3.48, 3.51};
  r.add_inf = 3.53;
  r.j_p = 3.53;
  r.j_st = 3.53;
  r.j_b = 3.52;
  return r;
}

}  // namespace

TEST_CASE("operating-characteristic reports satisfy their schema") {
  report::OCReport r = sample_report();
  json j = report::to_json(r);
  CHECK(report::schema_check(j, report::oc_report_schema()).empty());
  CHECK_FALSE(j.contains("pfa_bayes"));
  CHECK_FALSE(j.contains("grid"));

  SUBCASE("optional fields appear when set") {
    r.pfa_bayes = 0.05;
    r.grid_n = 400;
    r.richardson_err = 1e-6;
    json full = report::to_json(r);
    CHECK(report::schema_check(full, report::oc_report_schema()).empty());
    CHECK(full["pfa_bayes"].get<double>() == doctest::Approx(0.05));
    CHECK(full["grid"].get<int>() == 400);
  }
  SUBCASE("missing required keys are flagged") {
    j.erase("arl");
    auto errors = report::schema_check(j, report::oc_report_schema());
    REQUIRE_FALSE(errors.empty());
    CHECK(errors[0].find("arl") != std::string::npos);
  }
  SUBCASE("wrong types are flagged") {
    j["arl"] = "fast";
    CHECK_FALSE(report::schema_check(j, report::oc_report_schema()).empty());
  }
  SUBCASE("an empty delay curve is flagged") {
    j["add_curve"] = json::array();
    CHECK_FALSE(report::schema_check(j, report::oc_report_schema()).empty());
  }
  SUBCASE("non-positive thresholds are flagged") {
    j["threshold"] = 0.0;
    CHECK_FALSE(report::schema_check(j, report::oc_report_schema()).empty());
  }
}

TEST_CASE("monte carlo estimates satisfy their schema") {
  qd::montecarlo::MCEstimate e;
  e.metric = qd::montecarlo::Metric::Arl;
  e.value = 100.3;
  e.std_error = 0.4;
  e.n_reps = 50000;
  e.n_kept = 50000;
  e.seed = 20260816;
  json j = report::to_json(e);
  CHECK(report::schema_check(j, report::mc_estimate_schema()).empty());

  SUBCASE("unknown metric names are rejected") {
    j["metric"] = "speed";
    CHECK_FALSE(report::schema_check(j, report::mc_estimate_schema()).empty());
  }
}

TEST_CASE("detection reports allow a null stopping time") {
  json j;
  j["alarm"] = false;
  j["stopping_time"] = nullptr;
  j["n_consumed"] = 250;
  j["threshold"] = 43.0;
  j["statistic"] = 12.5;
  CHECK(report::schema_check(j, report::detection_schema()).empty());

  j["alarm"] = true;
  j["stopping_time"] = 17;
  CHECK(report::schema_check(j, report::detection_schema()).empty());

  SUBCASE("a fractional stopping time is rejected") {
    j["stopping_time"] = 17.5;
    CHECK_FALSE(report::schema_check(j, report::detection_schema()).empty());
  }
}

TEST_CASE("constants reports validate nested blocks") {
  json j;
  j["kl"] = {{"value", 1.0}, {"source", "closed-form"}};
  j["overshoot"] = {{"zeta", 0.426},   {"zeta_se", 0.002},
                    {"varkappa", 1.25}, {"varkappa_se", 0.004},
                    {"n_paths", 100000}, {"k_max", 100},
                    {"source", "series-monte-carlo"}};
  CHECK(report::schema_check(j, report::constants_schema()).empty());

  SUBCASE("closed-form block is optional but checked when present") {
    j["closed_form"] = {{"c_inf", 1.645}, {"z1_sq", 3.29}};
    auto errors = report::schema_check(j, report::constants_schema());
    REQUIRE_FALSE(errors.empty());  // r_star and source missing
  }
  SUBCASE("approx delays may be null for families without offsets") {
    j["approx"] = {{"threshold", 43.5},
                   {"arl", 100.0},
                   {"add_0", nullptr},
                   {"add_inf", nullptr}};
    CHECK(report::schema_check(j, report::constants_schema()).empty());
  }
  SUBCASE("a non-positive kl value is rejected") {
    j["kl"]["value"] = 0.0;
    CHECK_FALSE(report::schema_check(j, report::constants_schema()).empty());
  }
}

TEST_CASE("calibration reports accept numeric or named starts") {
  json j;
  j["threshold"] = 43.2;
  j["target"] = 100.0;
  j["achieved"] = 100.02;
  j["start"] = 2.0;
  CHECK(report::schema_check(j, report::calibration_schema()).empty());
  j["start"] = "qsd";
  CHECK(report::schema_check(j, report::calibration_schema()).empty());
  j["target"] = 1.0;  // must exceed 1
  CHECK_FALSE(report::schema_check(j, report::calibration_schema()).empty());
}

TEST_CASE("validation reports require complete check rows") {
  json row;
  row["name"] = "arl";
  row["estimate"] = 100.3;
  row["std_error"] = 0.4;
  row["solver"] = 100.18;
  row["pass"] = true;
  json j;
  j["suite"] = "beta-d1";
  j["pass"] = true;
  j["checks"] = json::array({row});
  CHECK(report::schema_check(j, report::validation_schema()).empty());

  j["checks"][0].erase("solver");
  CHECK_FALSE(report::schema_check(j, report::validation_schema()).empty());
}
