#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cartan/config.hpp"
#include "cartan/report_io.hpp"

using namespace cartan;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::MessageMatches;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream out(p);
  out << contents;
  return p;
}

}  // namespace

TEST_CASE("default configuration validates", "[config]") {
  RunConfig c;
  REQUIRE(c.model == "sl2r");
  REQUIRE(c.mu == std::vector<int>{2});
  REQUIRE(c.t_schedule.size() == 7);
  REQUIRE(c.threads == 1);
  REQUIRE(c.out_path == "-");
  REQUIRE_NOTHROW(validate_config(c));
}

TEST_CASE("json config overrides fields", "[config]") {
  RunConfig c;
  auto j = nlohmann::json::parse(R"({
    "model": "sl2r_x_sl2r",
    "grid": {"k_points": 32, "p_radius": 10.5, "ft_cutoff": 3},
    "x_angles": [1.0, 2.0],
    "mu": [2, 3],
    "t_schedule": [0.5, 0.25],
    "tolerances": {"pair": 1e-5},
    "bump_radius": 3.0,
    "gauss_c": 2.0,
    "output": {"path": "out.csv", "format": "csv"},
    "threads": 4
  })");
  apply_config_json(c, j);
  REQUIRE(c.model == "sl2r_x_sl2r");
  REQUIRE(c.grid.k_points == 32);
  REQUIRE(c.grid.p_radius == 10.5);
  REQUIRE(c.grid.ft_cutoff == 3);
  REQUIRE(c.grid.p_points == 48);  // untouched keys keep defaults
  REQUIRE(c.x_angles == std::vector<double>{1.0, 2.0});
  REQUIRE(c.mu == std::vector<int>{2, 3});
  REQUIRE(c.t_schedule == std::vector<double>{0.5, 0.25});
  REQUIRE(c.tolerances.at("pair") == 1e-5);
  REQUIRE(c.bump_radius == 3.0);
  REQUIRE(c.gauss_c == 2.0);
  REQUIRE(c.out_path == "out.csv");
  REQUIRE(c.format == "csv");
  REQUIRE(c.threads == 4);
  REQUIRE_NOTHROW(validate_config(c));
}

TEST_CASE("unknown keys are rejected at every level", "[config]") {
  RunConfig c;
  REQUIRE_THROWS_MATCHES(apply_config_json(c, nlohmann::json::parse(R"({"modle": "sl2r"})")),
                         config_error, MessageMatches(ContainsSubstring("modle")));
  REQUIRE_THROWS_MATCHES(
      apply_config_json(c, nlohmann::json::parse(R"({"grid": {"k_pts": 8}})")), config_error,
      MessageMatches(ContainsSubstring("k_pts")));
  REQUIRE_THROWS_MATCHES(
      apply_config_json(c, nlohmann::json::parse(R"({"output": {"file": "x"}})")), config_error,
      MessageMatches(ContainsSubstring("file")));
}

TEST_CASE("type mismatches become config errors", "[config]") {
  RunConfig c;
  REQUIRE_THROWS_AS(apply_config_json(c, nlohmann::json::parse(R"({"threads": "four"})")),
                    config_error);
  REQUIRE_THROWS_AS(apply_config_json(c, nlohmann::json::parse(R"({"mu": 2})")), config_error);
  REQUIRE_THROWS_AS(apply_config_json(c, nlohmann::json::parse(R"({"tolerances": [1, 2]})")),
                    config_error);
  REQUIRE_THROWS_AS(apply_config_json(c, nlohmann::json::parse(R"([1, 2])")), config_error);
}

TEST_CASE("config files load and bad files throw", "[config]") {
  RunConfig c;
  auto good = temp_file("cartan_cfg_good.json", R"({"model": "sl2r", "threads": 2})");
  load_config_file(c, good.string());
  REQUIRE(c.threads == 2);

  auto bad = temp_file("cartan_cfg_bad.json", "{model: sl2r");
  REQUIRE_THROWS_MATCHES(load_config_file(c, bad.string()), config_error,
                         MessageMatches(ContainsSubstring("parse error")));
  REQUIRE_THROWS_MATCHES(load_config_file(c, "/nonexistent/cartan.json"), config_error,
                         MessageMatches(ContainsSubstring("cannot open")));
  std::filesystem::remove(good);
  std::filesystem::remove(bad);
}

TEST_CASE("validation rejects out-of-range settings", "[config]") {
  auto broken = [](auto&& mutate) {
    RunConfig c;
    mutate(c);
    REQUIRE_THROWS_AS(validate_config(c), config_error);
  };
  broken([](RunConfig& c) { c.model = "so31"; });
  broken([](RunConfig& c) { c.grid.k_points = 7; });
  broken([](RunConfig& c) { c.grid.u_points = 4; });
  broken([](RunConfig& c) { c.grid.p_points = 15; });
  broken([](RunConfig& c) { c.grid.limit_points = 8; });
  broken([](RunConfig& c) { c.grid.p_radius = 0.0; });
  broken([](RunConfig& c) { c.grid.z_radius = -1.0; });
  broken([](RunConfig& c) { c.grid.ft_cutoff = 0; });
  broken([](RunConfig& c) { c.grid.ft_k_points = 9; });  // needs >= 2*ft_cutoff + 2 = 10
  broken([](RunConfig& c) { c.t_schedule.clear(); });
  broken([](RunConfig& c) { c.t_schedule = {0.5, 0.5}; });
  broken([](RunConfig& c) { c.t_schedule = {0.25, 0.5}; });
  broken([](RunConfig& c) { c.t_schedule = {0.5, -0.25}; });
  broken([](RunConfig& c) { c.tolerances["pair"] = 0.0; });
  broken([](RunConfig& c) { c.bump_radius = 0.0; });
  broken([](RunConfig& c) { c.gauss_c = -2.0; });
  broken([](RunConfig& c) { c.threads = 0; });
  broken([](RunConfig& c) { c.format = "xml"; });
}

TEST_CASE("tolerance lookup falls back to the given default", "[config]") {
  RunConfig c;
  REQUIRE(tolerance_or(c, "pair", 1e-6) == 1e-6);
  c.tolerances["pair"] = 1e-3;
  REQUIRE(tolerance_or(c, "pair", 1e-6) == 1e-3);
  REQUIRE(tolerance_or(c, "l2", 1e-12) == 1e-12);
}

TEST_CASE("thread default comes from the environment when sane", "[config]") {
  auto with_env = [](const char* val) {
    if (val)
      setenv("CARTAN_THREADS", val, 1);
    else
      unsetenv("CARTAN_THREADS");
    return env_default_threads();
  };
  REQUIRE(with_env(nullptr) == 1);
  REQUIRE(with_env("") == 1);
  REQUIRE(with_env("4") == 4);
  REQUIRE(with_env("1024") == 1024);
  REQUIRE(with_env("0") == 1);
  REQUIRE(with_env("-2") == 1);
  REQUIRE(with_env("2000") == 1);
  REQUIRE(with_env("4x") == 1);
  REQUIRE(with_env("abc") == 1);
  unsetenv("CARTAN_THREADS");
}

TEST_CASE("numeric formatting is locale-free and round-trips", "[config][io]") {
  REQUIRE(fmt17(1.0) == "1");
  REQUIRE(fmt17(-0.25) == "-0.25");
  REQUIRE(fmt17(0.1) == "0.10000000000000001");
  for (double x : {3.141592653589793, -2.718281828459045e-7, 1.0 / 3.0, 6.02e23}) {
    REQUIRE(std::strtod(fmt17(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("csv rows join cells with commas", "[config][io]") {
  std::ostringstream os;
  write_csv_row(os, {"a", "1", "-0.5"});
  REQUIRE(os.str() == "a,1,-0.5\n");
}

TEST_CASE("json writer emits a pinned byte layout", "[config][io]") {
  std::ostringstream os;
  JsonWriter w(os);
  w.begin_object();
  w.key("a");
  w.value_int(1);
  w.key("b");
  w.begin_array();
  w.value_number(0.5);
  w.value_bool(true);
  w.end_array();
  w.key("s");
  w.value_string("q\"\\");
  w.end_object();
  w.finish();
  REQUIRE(os.str() ==
          "{\n  \"a\": 1,\n  \"b\": [\n    0.5,\n    true\n  ],\n  \"s\": \"q\\\"\\\\\"\n}\n");
}

TEST_CASE("complex values serialize as re/im objects", "[config][io]") {
  std::ostringstream os;
  JsonWriter w(os);
  w.begin_object();
  w.key("z");
  w.value_complex({-0.5, 0.25});
  w.end_object();
  w.finish();
  REQUIRE(os.str() ==
          "{\n  \"z\": {\n    \"re\": -0.5,\n    \"im\": 0.25\n  }\n}\n");
}
