#pragma once
// Run configuration: model choice, grid resolutions, experiment parameters,
// tolerances, output routing.  Parsed from a JSON file plus flag overrides;
// validation failures throw config_error, which the CLI maps to exit 2.

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace cartan {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridConfig {
  // orbital integrals over K x p
  int k_points = 24;
  int p_points = 48;
  double p_radius = 9.0;
  // deformed orbital integral: radial chamber and conjugating K-factor
  int a_points = 128;
  double a_radius = 2.1;
  int limit_points = 192;
  double limit_radius = 2.2;
  // inverse Fourier transform of operator profiles
  int u_points = 16;
  int z_points = 96;
  double z_radius = 6.5;
  // kernel mode matrices
  int ft_k_points = 12;
  int ft_cutoff = 4;
  int ft_p_points = 32;
  double ft_p_radius = 7.5;
  // convolution quadrature
  int conv_k_points = 16;
  int conv_v_points = 28;
  double conv_v_radius = 7.5;
};

struct RunConfig {
  std::string model = "sl2r";
  GridConfig grid;
  std::vector<double> x_angles;  // empty: the command picks its default battery
  std::vector<int> mu = {2};
  std::vector<double> t_schedule = {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  std::map<std::string, double> tolerances;
  double bump_radius = 4.0;
  double gauss_c = 1.0;
  std::string out_path = "-";
  std::string format;  // "csv" or "json"; empty: command default
  int threads = 1;
};

inline double tolerance_or(const RunConfig& c, const std::string& name, double fallback) {
  auto it = c.tolerances.find(name);
  return it == c.tolerances.end() ? fallback : it->second;
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw config_error("unknown key \"" + it.key() + "\" in " + where);
}

}  // namespace detail

inline void apply_config_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw config_error("config root must be an object");
  detail::reject_unknown_keys(j,
                              {"model", "grid", "x_angles", "mu", "t_schedule",
                               "tolerances", "bump_radius", "gauss_c", "output", "threads"},
                              "config");
  try {
    if (j.contains("model")) c.model = j.at("model").get<std::string>();
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      detail::reject_unknown_keys(
          g,
          {"k_points", "p_points", "p_radius", "a_points", "a_radius", "limit_points",
           "limit_radius", "u_points", "z_points", "z_radius", "ft_k_points", "ft_cutoff",
           "ft_p_points", "ft_p_radius", "conv_k_points", "conv_v_points", "conv_v_radius"},
          "grid");
      auto geti = [&](const char* k, int& out) {
        if (g.contains(k)) out = g.at(k).get<int>();
      };
      auto getd = [&](const char* k, double& out) {
        if (g.contains(k)) out = g.at(k).get<double>();
      };
      geti("k_points", c.grid.k_points);
      geti("p_points", c.grid.p_points);
      getd("p_radius", c.grid.p_radius);
      geti("a_points", c.grid.a_points);
      getd("a_radius", c.grid.a_radius);
      geti("limit_points", c.grid.limit_points);
      getd("limit_radius", c.grid.limit_radius);
      geti("u_points", c.grid.u_points);
      geti("z_points", c.grid.z_points);
      getd("z_radius", c.grid.z_radius);
      geti("ft_k_points", c.grid.ft_k_points);
      geti("ft_cutoff", c.grid.ft_cutoff);
      geti("ft_p_points", c.grid.ft_p_points);
      getd("ft_p_radius", c.grid.ft_p_radius);
      geti("conv_k_points", c.grid.conv_k_points);
      geti("conv_v_points", c.grid.conv_v_points);
      getd("conv_v_radius", c.grid.conv_v_radius);
    }
    if (j.contains("x_angles")) c.x_angles = j.at("x_angles").get<std::vector<double>>();
    if (j.contains("mu")) c.mu = j.at("mu").get<std::vector<int>>();
    if (j.contains("t_schedule"))
      c.t_schedule = j.at("t_schedule").get<std::vector<double>>();
    if (j.contains("tolerances")) {
      if (!j.at("tolerances").is_object())
        throw config_error("tolerances must be an object");
      for (auto it = j.at("tolerances").begin(); it != j.at("tolerances").end(); ++it)
        c.tolerances[it.key()] = it.value().get<double>();
    }
    if (j.contains("bump_radius")) c.bump_radius = j.at("bump_radius").get<double>();
    if (j.contains("gauss_c")) c.gauss_c = j.at("gauss_c").get<double>();
    if (j.contains("output")) {
      const auto& o = j.at("output");
      detail::reject_unknown_keys(o, {"path", "format"}, "output");
      if (o.contains("path")) c.out_path = o.at("path").get<std::string>();
      if (o.contains("format")) c.format = o.at("format").get<std::string>();
    }
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config type error: ") + e.what());
  }
}

inline void load_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  apply_config_json(c, j);
}

inline void validate_config(const RunConfig& c) {
  if (c.model != "sl2r" && c.model != "sl2r_x_sl2r")
    throw config_error("unknown model \"" + c.model + "\" (shipped: sl2r, sl2r_x_sl2r)");
  const GridConfig& g = c.grid;
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw config_error(msg);
  };
  need(g.k_points >= 8 && g.u_points >= 8 && g.ft_k_points >= 8 && g.conv_k_points >= 8,
       "torus resolutions must be >= 8");
  need(g.p_points >= 16 && g.a_points >= 16 && g.limit_points >= 16 && g.z_points >= 16 &&
           g.ft_p_points >= 16 && g.conv_v_points >= 16,
       "radial resolutions must be >= 16");
  need(g.p_radius > 0 && g.a_radius > 0 && g.limit_radius > 0 && g.z_radius > 0 &&
           g.ft_p_radius > 0 && g.conv_v_radius > 0,
       "truncation radii must be positive");
  need(g.ft_cutoff >= 1, "ft_cutoff must be >= 1");
  need(g.ft_k_points >= 2 * g.ft_cutoff + 2, "ft_k_points must exceed twice ft_cutoff");
  need(!c.t_schedule.empty(), "t_schedule must be nonempty");
  for (size_t i = 0; i < c.t_schedule.size(); ++i) {
    need(c.t_schedule[i] > 0, "t_schedule entries must be positive");
    if (i) need(c.t_schedule[i] < c.t_schedule[i - 1], "t_schedule must be strictly decreasing");
  }
  for (const auto& [name, tol] : c.tolerances)
    need(tol > 0, "tolerance \"" + name + "\" must be positive");
  need(c.bump_radius > 0, "bump_radius must be positive");
  need(c.gauss_c > 0, "gauss_c must be positive");
  need(c.threads >= 1, "threads must be >= 1");
  need(c.format.empty() || c.format == "csv" || c.format == "json",
       "format must be csv or json");
}

// Default thread count from the environment; flags override.
inline int env_default_threads() {
  const char* s = std::getenv("CARTAN_THREADS");
  if (!s || !*s) return 1;
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0' || v < 1 || v > 1024) return 1;
  return int(v);
}

}  // namespace cartan
