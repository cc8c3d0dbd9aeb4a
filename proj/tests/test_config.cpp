#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "qd/config.hpp"
#include "qd/errors.hpp"

namespace config = qd::config;

TEST_CASE("sections and key kinds parse") {
  auto t = config::parse_toml(
      "top = 1\n"
      "[model]\n"
      "family = \"beta\"   # trailing comment\n"
      "delta = 2.5\n"
      "\n"
      "# full-line comment\n"
      "[run]\n"
      "gamma = 1e4\n"
      "richardson = false\n"
      "label = \"a # not a comment\"\n");

  CHECK(config::has(t, "top"));
  CHECK(config::get_number(t, "top", 0) == 1.0);
  CHECK(config::get_string(t, "model.family", "") == "beta");
  CHECK(config::get_number(t, "model.delta", 0) == 2.5);
  CHECK(config::get_number(t, "run.gamma", 0) == 10000.0);
  CHECK(config::get_bool(t, "run.richardson", true) == false);
  CHECK(config::get_string(t, "run.label", "") == "a # not a comment");
  CHECK_FALSE(config::has(t, "model.gamma"));  // keys are section-scoped
}

TEST_CASE("string escapes decode") {
  auto t = config::parse_toml("s = \"tab\\there \\\"quoted\\\" \\\\ end\"\n");
  CHECK(config::get_string(t, "s", "") == "tab\there \"quoted\" \\ end");

  CHECK_THROWS_WITH_AS(config::parse_toml("s = \"bad \\q escape\"\n"),
                       doctest::Contains("line 1"), qd::DomainError);
}

TEST_CASE("getters enforce the stored type") {
  auto t = config::parse_toml("n = 3\ns = \"x\"\nb = true\n");
  CHECK_THROWS_WITH_AS(config::get_string(t, "n", ""),
                       doctest::Contains("'n'"), qd::DomainError);
  CHECK_THROWS_WITH_AS(config::get_number(t, "s", 0.0),
                       doctest::Contains("'s'"), qd::DomainError);
  CHECK_THROWS_WITH_AS(config::get_bool(t, "s", false),
                       doctest::Contains("'s'"), qd::DomainError);
  // Missing keys fall back instead of throwing.
  CHECK(config::get_number(t, "missing", 7.5) == 7.5);
  CHECK(config::get_string(t, "missing", "d") == "d");
  CHECK(config::get_bool(t, "missing", true) == true);
}

TEST_CASE("malformed input is reported with its line number") {
  CHECK_THROWS_WITH_AS(config::parse_toml("a = 1\na = 2\n"),
                       doctest::Contains("line 2"), qd::DomainError);
  CHECK_THROWS_WITH_AS(config::parse_toml("[s]\nx = 1\n[s2\n"),
                       doctest::Contains("line 3"), qd::DomainError);
  CHECK_THROWS_WITH_AS(config::parse_toml("x = \"unterminated\n"),
                       doctest::Contains("unterminated"), qd::DomainError);
  CHECK_THROWS_WITH_AS(config::parse_toml("just words\n"),
                       doctest::Contains("key = value"), qd::DomainError);
  CHECK_THROWS_WITH_AS(config::parse_toml("x = 1.2.3\n"),
                       doctest::Contains("1.2.3"), qd::DomainError);
  CHECK_THROWS_WITH_AS(config::parse_toml("bad key = 1\n"),
                       doctest::Contains("bad key"), qd::DomainError);
  CHECK_THROWS_WITH_AS(config::parse_toml("x =\n"),
                       doctest::Contains("missing value"), qd::DomainError);

  SUBCASE("duplicates in different sections are distinct keys") {
    auto t = config::parse_toml("[a]\nx = 1\n[b]\nx = 2\n");
    CHECK(config::get_number(t, "a.x", 0) == 1.0);
    CHECK(config::get_number(t, "b.x", 0) == 2.0);
  }
}

TEST_CASE("files load through the same parser") {
  const std::string path = "config_load.tmp";
  {
    std::ofstream out(path);
    out << "[run]\nseed = 42\n";
  }
  auto t = config::load_toml_file(path);
  CHECK(config::get_number(t, "run.seed", 0) == 42.0);
  std::remove(path.c_str());

  CHECK_THROWS_WITH_AS(config::load_toml_file("definitely_missing.toml"),
                       doctest::Contains("definitely_missing.toml"),
                       qd::DomainError);
}
